"""Text formats for models, datasets and tangent targets.

Model files are line oriented::

    coordnet-model 1
    kind ae
    dims 4 2 4
    activations tanh tanh
    W1 2 4 <rows*cols values, row-major>
    b1 2 <values>
    b2 4 <values>

Floats are written with 17 significant digits, which round-trips float64
exactly. Autoencoder files store only the encoder weights.

Datasets are headerless CSV; each row is the input followed by the target
(autoencoder rows hold only the input). A tangent file has one line per
dataset row, ``v_x ; beta_x`` with comma-separated blocks; further
``; v_x ; beta_x`` blocks on the same line add more pairs for that row.
"""

import numpy as np

from .elementwise import Nonlinearity
from .engine import Example, TangentTarget
from .linalg import DimensionError
from .network import Kind, Network, check_dims

MAGIC = "coordnet-model"
VERSION = 1


class FormatError(ValueError):
    """A file that does not follow its format."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_model(net: Network) -> str:
    lines = [f"{MAGIC} {VERSION}", f"kind {net.kind}",
             "dims " + " ".join(str(d) for d in net.dims),
             "activations " + " ".join(str(a) for a in net.acts)]
    for k, W in enumerate(net.weights, 1):
        lines.append(f"W{k} {W.shape[0]} {W.shape[1]} " + " ".join(fmt(v) for v in W.ravel()))
    for k, b in enumerate(net.biases, 1):
        lines.append(f"b{k} {b.shape[0]} " + " ".join(fmt(v) for v in b))
    return "\n".join(lines) + "\n"


def save_model(net: Network, path):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(dumps_model(net))


def loads_model(text: str) -> Network:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0] != [MAGIC, str(VERSION)]:
        raise FormatError(f"missing '{MAGIC} {VERSION}' header")
    fields = {}
    for r in rows[1:]:
        if r[0] in fields:
            raise FormatError(f"duplicate key {r[0]}")
        fields[r[0]] = r[1:]
    try:
        kind = Kind(fields["kind"][0])
        dims = [int(d) for d in fields["dims"]]
        acts = tuple(Nonlinearity.parse(a) for a in fields["activations"])
        check_dims(kind, dims)
        n_layers = len(dims) - 1
        n_stored = n_layers if kind is Kind.MLP else n_layers // 2
        weights = []
        for k in range(1, n_stored + 1):
            r, c, *vals = fields[f"W{k}"]
            weights.append(_floats(vals, int(r) * int(c), f"W{k}").reshape(int(r), int(c)))
        biases = []
        for k in range(1, n_layers + 1):
            n, *vals = fields[f"b{k}"]
            biases.append(_floats(vals, int(n), f"b{k}"))
    except KeyError as e:
        raise FormatError(f"missing key {e.args[0]}") from None
    unknown = set(fields) - {"kind", "dims", "activations"} - {f"W{k}" for k in range(1, len(weights) + 1)} \
        - {f"b{k}" for k in range(1, len(biases) + 1)}
    if unknown:
        raise FormatError(f"unexpected keys {sorted(unknown)}")
    net = Network(kind, tuple(weights), tuple(biases), acts)
    if net.dims != dims:
        raise FormatError(f"parameter shapes give dims {net.dims}, header says {dims}")
    return net


def _floats(vals, n, what):
    if len(vals) != n:
        raise FormatError(f"{what}: expected {n} values, got {len(vals)}")
    a = np.array([float(v) for v in vals], dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise FormatError(f"{what}: non-finite value")
    return a


def load_model(path) -> Network:
    with open(path, encoding="ascii") as f:
        return loads_model(f.read())


def _csv_rows(path):
    rows = []
    with open(path, encoding="ascii") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append([float(t) for t in line.split(",")])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a comma-separated row of numbers") from None
    return rows


def load_dataset(path, net: Network) -> list:
    """Rows of ``path`` as :class:`Example` objects sized for ``net``."""
    out_w = 0 if net.kind is Kind.AE else net.n_out
    width = net.n_in + out_w
    rows = _csv_rows(path)
    if not rows:
        raise FormatError(f"{path}: empty dataset")
    examples = []
    for k, r in enumerate(rows, 1):
        if len(r) != width:
            raise DimensionError(f"{path}: row {k} has {len(r)} columns, model needs {width}")
        a = np.array(r)
        if not np.all(np.isfinite(a)):
            raise FormatError(f"{path}: row {k} has non-finite entries")
        examples.append(Example(a[:net.n_in], a[net.n_in:] if out_w else None))
    return examples


def load_tangents(path, net: Network) -> list:
    """One :class:`TangentTarget` per non-empty line."""
    targets = []
    with open(path, encoding="ascii") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            blocks = line.split(";")
            if len(blocks) % 2:
                raise FormatError(f"{path}:{lineno}: expected 'v ; beta' block pairs")
            try:
                vals = [[float(t) for t in b.split(",")] for b in blocks]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad number") from None
            pairs = list(zip(vals[0::2], vals[1::2]))
            for v, b in pairs:
                if len(v) != net.n_in or len(b) != net.n_out:
                    raise DimensionError(f"{path}:{lineno}: pair widths ({len(v)}, {len(b)}), "
                                      f"model needs ({net.n_in}, {net.n_out})")
            targets.append(TangentTarget.of(pairs))
    return targets


def attach_tangents(examples: list, targets: list) -> list:
    if len(examples) != len(targets):
        raise DimensionError(f"{len(targets)} tangent rows for {len(examples)} data rows")
    return [Example(e.x, e.y, t) for e, t in zip(examples, targets)]


def save_dataset(rows, path):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for r in rows:
            f.write(",".join(fmt(v) for v in r) + "\n")
