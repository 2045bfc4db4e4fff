"""Train a 2-4-1 sigmoid MLP on XOR with summed-MSE full-batch descent.

    python scripts/xor.py --epochs 20000 --eta 0.5 --seed 42
"""

import argparse
from dataclasses import dataclass

import numpy as np

from coordnet import Example, Kind, LossConfig, Nonlinearity, forward, init_network, train

XOR = [([0, 0], [0]), ([0, 1], [1]), ([1, 0], [1]), ([1, 1], [0])]


@dataclass
class XorConfig:
    seed: int = 42
    eta: float = 0.5
    epochs: int = 20000
    target: float = 0.05
    every: int = 1000


def run(cfg: XorConfig):
    batch = [Example(np.array(x, float), np.array(y, float)) for x, y in XOR]
    net = init_network(Kind.MLP, [2, 4, 1], [Nonlinearity.SIGMOID] * 2, cfg.seed)
    net, log = train(net, batch, LossConfig(eta=cfg.eta), cfg.epochs)
    hit = next((n for n, v in enumerate(log, 1) if v < cfg.target), None)
    return net, batch, log, hit


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(XorConfig()).items():
        p.add_argument(f"--{name}", type=type(default), default=default)
    cfg = XorConfig(**vars(p.parse_args()))
    net, batch, log, hit = run(cfg)
    for n in range(0, len(log), cfg.every):
        print(f"epoch {n + 1} loss {log[n]:.6g}")
    print(f"final loss {log[-1]:.6g}; first below {cfg.target} at epoch {hit}")
    for ex in batch:
        print(ex.x, "->", forward(net, ex.x).output)


if __name__ == "__main__":
    main()
