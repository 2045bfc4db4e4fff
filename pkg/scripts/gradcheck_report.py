"""Print the full derivative-check report for a few representative networks."""

import argparse

import numpy as np

from coordnet import Kind, Loss, LossConfig, Nonlinearity, TangentTarget, init_network
from coordnet.gradcheck import run_suite

S, T, R = Nonlinearity.SIGMOID, Nonlinearity.TANH, Nonlinearity.RAMP

CASES = [
    ("mlp sigmoid/tanh, mse, l2, tangent penalty", Kind.MLP, [4, 5, 3, 2], [S, T, S], LossConfig(lam=0.1, mu=1.0)),
    ("mlp tanh/sigmoid, cross-entropy", Kind.MLP, [4, 5, 3, 2], [T, T, S], LossConfig(Loss.XENT)),
    ("mlp ramp hidden layer", Kind.MLP, [4, 6, 2], [R, S], LossConfig(mu=1.0)),
    ("tied ae [6,3,6] tanh", Kind.AE, [6, 3, 6], [T, T], LossConfig(mu=1.0)),
    ("tied ae [8,4,2,4,8] tanh", Kind.AE, [8, 4, 2, 4, 8], [T] * 4, LossConfig(mu=1.0)),
]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    seed = p.parse_args().seed
    rng = np.random.default_rng(seed)
    status = 0
    for title, kind, dims, acts, cfg in CASES:
        net = init_network(kind, dims, acts, seed)
        x = rng.standard_normal(net.n_in)
        y = None if kind is Kind.AE else rng.integers(0, 2, size=net.n_out).astype(float)
        tt = TangentTarget.of([(rng.standard_normal(net.n_in), rng.standard_normal(net.n_out))]) if cfg.mu else None
        rep = run_suite(net, x, y, cfg, tt, seed=seed)
        print(f"== {title}")
        print(rep.text())
        status |= not rep.passed
    raise SystemExit(2 if status else 0)


if __name__ == "__main__":
    main()
