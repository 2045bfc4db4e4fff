"""Tied linear autoencoder [8, 2, 8] on 32 samples of rank-2 data.

The learning rate comes from the halving probe, then full-batch descent runs
until the loss reaches a tenth of its initial value (or the epoch budget).
"""

import argparse
from dataclasses import dataclass

import numpy as np

from coordnet import Example, Kind, LossConfig, Nonlinearity, halving_probe, init_network, train


@dataclass
class AeConfig:
    seed: int = 42
    data_seed: int = 7
    samples: int = 32
    epochs: int = 5000
    probe_epochs: int = 20
    ratio: float = 0.1
    full: bool = False


def rank2_data(seed: int, n: int) -> np.ndarray:
    g = np.random.default_rng(seed)
    A, C = g.standard_normal((8, 2)), g.standard_normal((n, 2))
    return C @ A.T


def run(cfg: AeConfig):
    batch = [Example(x) for x in rank2_data(cfg.data_seed, cfg.samples)]
    net = init_network(Kind.AE, [8, 2, 8], [Nonlinearity.IDENTITY] * 2, cfg.seed)
    eta = halving_probe(net, batch, LossConfig(), trial_epochs=cfg.probe_epochs)
    if eta is None:
        raise SystemExit("halving probe found no descending learning rate")
    log0 = []

    def stop(obj):
        log0.append(obj)
        return not cfg.full and obj <= cfg.ratio * log0[0]

    net, log = train(net, batch, LossConfig(eta=eta), cfg.epochs, stop=stop)
    return eta, log


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=AeConfig.seed)
    p.add_argument("--data-seed", type=int, default=AeConfig.data_seed)
    p.add_argument("--epochs", type=int, default=AeConfig.epochs)
    p.add_argument("--full", action="store_true", help="run every epoch instead of stopping at the target ratio")
    a = p.parse_args()
    eta, log = run(AeConfig(seed=a.seed, data_seed=a.data_seed, epochs=a.epochs, full=a.full))
    print(f"probe eta {eta}")
    print(f"initial loss {log[0]:.6g}, final loss {log[-1]:.6g} after {len(log)} epochs "
          f"(ratio {log[-1] / log[0]:.3g})")


if __name__ == "__main__":
    main()
