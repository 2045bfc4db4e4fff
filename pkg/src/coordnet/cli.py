"""Command-line entry point: ``coordnet init|train|gradcheck|eval``.

Exit codes: 0 success, 1 usage or configuration error, 2 a numerical check
failed, 3 I/O error.
"""

import argparse
import sys

import numpy as np

from . import formats
from .elementwise import Nonlinearity
from .engine import ConfigError, Loss, LossConfig, batch_grads, train
from .gradcheck import run_suite
from .linalg import DimensionError
from .network import Kind, forward, init_network

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _loss_config(args, eta=None):
    return LossConfig(Loss(args.loss), args.eta if eta is None else eta, args.lam, args.mu)


def _examples(args, net, cfg):
    data = formats.load_dataset(args.data, net)
    if cfg.mu > 0:
        if not args.tangents:
            raise ConfigError("--mu > 0 needs --tangents")
        data = formats.attach_tangents(data, formats.load_tangents(args.tangents, net))
    return data


def cmd_init(args):
    kind = Kind(args.kind)
    acts = [Nonlinearity.parse(a) for a in args.activations]
    net = init_network(kind, args.dims, acts, args.seed)
    formats.save_model(net, args.out)
    return EXIT_OK


def cmd_train(args):
    net = formats.load_model(args.model)
    cfg = _loss_config(args)
    cfg.check(net)
    data = _examples(args, net, cfg)
    net, log = train(net, data, cfg, args.epochs)
    for n, loss in enumerate(log, 1):
        print(f"epoch {n} loss {formats.fmt(loss)}")
    formats.save_model(net, args.out or args.model)
    return EXIT_OK


def cmd_eval(args):
    net = formats.load_model(args.model)
    cfg = LossConfig(Loss(args.loss))
    cfg.check(net)
    data = formats.load_dataset(args.data, net)
    total = batch_grads(net, data, cfg).J
    print(f"loss {formats.fmt(total)}")
    for ex in data:
        print(",".join(formats.fmt(v) for v in forward(net, ex.x).output))
    return EXIT_OK


def cmd_gradcheck(args):
    net = formats.load_model(args.model)
    cfg = _loss_config(args)
    data = formats.load_dataset(args.data, net)
    if not 0 <= args.row < len(data):
        raise ConfigError(f"--row {args.row} outside 0..{len(data) - 1}")
    ex = data[args.row]
    targets = None
    if args.tangents:
        targets = formats.load_tangents(args.tangents, net)
        if args.row >= len(targets):
            raise ConfigError(f"tangent file has no line for row {args.row}")
        targets = targets[args.row]
    elif cfg.mu > 0:
        raise ConfigError("--mu > 0 needs --tangents")
    report = run_suite(net, ex.x, ex.y, cfg, targets, seed=args.seed)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_CHECK


def build_parser():
    p = _Parser(prog="coordnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(q, train_flags=True):
        q.add_argument("--loss", choices=[l.value for l in Loss], default="mse")
        q.add_argument("--lambda", dest="lam", type=float, default=0.0, help="l2 weight")
        q.add_argument("--mu", type=float, default=0.0, help="weight of the tangent (Jacobian) penalty")
        q.add_argument("--tangents", help="tangent file, one 'v_x ; beta_x' line per data row")
        q.add_argument("--seed", type=int, default=0)
        if train_flags:
            q.add_argument("--eta", type=float, default=0.1,
                           help="learning rate; gradients are summed over the batch, not averaged")

    q = sub.add_parser("init", help="write a freshly initialized model")
    q.add_argument("out")
    q.add_argument("--kind", choices=[k.value for k in Kind], default="mlp")
    q.add_argument("--dims", type=int, nargs="+", required=True)
    q.add_argument("--activations", nargs="+", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_init)

    q = sub.add_parser("train", help="full-batch gradient descent; prints 'epoch <n> loss <value>'")
    q.add_argument("model")
    q.add_argument("data")
    q.add_argument("--out", help="where to write the trained model (default: overwrite MODEL)")
    q.add_argument("--epochs", type=int, default=1)
    run_flags(q)
    q.set_defaults(func=cmd_train)

    q = sub.add_parser("gradcheck", help="finite-difference and adjoint checks at one data row")
    q.add_argument("model")
    q.add_argument("data")
    q.add_argument("--row", type=int, default=0)
    run_flags(q)
    q.set_defaults(func=cmd_gradcheck)

    q = sub.add_parser("eval", help="print the total loss and one output row per input row")
    q.add_argument("model")
    q.add_argument("data")
    q.add_argument("--loss", choices=[l.value for l in Loss], default="mse")
    q.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "epochs", 1) < 1:
            raise ConfigError("--epochs must be positive")
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            return args.func(args)
    except UsageError as e:
        print(f"coordnet: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (formats.FormatError, OSError) as e:
        print(f"coordnet: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, DimensionError, ValueError) as e:
        print(f"coordnet: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as e:
        print(f"coordnet: numerical failure: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
