"""Finite-difference and adjoint-identity oracles.

The oracle side of every check is independent of the engine. Finite
differences evaluate the network through :func:`reference_forward` and
:func:`reference_tangent`, a separate dense-Jacobian implementation that only
needs the raw parameters and the scalar activation derivatives. The engine
is called only to produce the quantities under test.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import elementwise as ew
from .engine import (Grads, Loss, LossConfig, TangentTarget, XENT_EPS, backprop_standard,
                     grad_R_multi, seed_error, total_gradient)
from .linalg import DimensionError, inner
from .network import Kind, Network, forward, tangent_forward
from .elementwise import Nonlinearity

ADJOINT_TOL = 1e-12
FIRST_ORDER_TOL = 1e-6
TANGENT_TOL = 1e-6
HIGHER_ORDER_TOL = 1e-5
TIED_J_TOL = 1e-12
TIED_R_TOL = 1e-10
KINK_MARGIN = 1e-3


class NonFiniteError(FloatingPointError):
    def __init__(self, index, value):
        super().__init__(f"non-finite evaluation {value!r} at coordinate {index}")
        self.index = index


@dataclass(frozen=True)
class FdConfig:
    h_base: float = 1e-5
    rel_tol: float = 1e-6
    abs_floor: float = 1e-10

    def __post_init__(self):
        if not (self.h_base > 0 and self.rel_tol > 0):
            raise ValueError("h_base and rel_tol must be positive")


def fd_grad_scalar_loss(fn: Callable, theta, cfg: FdConfig = FdConfig()) -> np.ndarray:
    """Central differences with per-coordinate step ``h_base * (1 + |theta_k|)``."""
    theta = np.array(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for k in np.ndindex(theta.shape):
        h = cfg.h_base * (1.0 + abs(theta[k]))
        tp, tm = theta.copy(), theta.copy()
        tp[k] += h
        tm[k] -= h
        fp, fm = fn(tp), fn(tm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteError(k, fp if not np.isfinite(fp) else fm)
        grad[k] = (fp - fm) / (2.0 * h)
    return grad


def fd_jvp(fn: Callable, x, v, cfg: FdConfig = FdConfig()) -> np.ndarray:
    """``(fn(x + h v) - fn(x - h v)) / 2h`` with ``h = h_base / (1 + |v|)``."""
    x, v = np.asarray(x, dtype=np.float64), np.asarray(v, dtype=np.float64)
    h = cfg.h_base / (1.0 + float(np.linalg.norm(v)))
    fp, fm = np.asarray(fn(x + h * v)), np.asarray(fn(x - h * v))
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
        raise NonFiniteError(None, "jvp")
    return (fp - fm) / (2.0 * h)


def rel_error(a, b, abs_floor: float = 1e-10) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"rel_error: shapes {a.shape} and {b.shape}")
    d = float(np.linalg.norm(a - b))
    return d / max(abs_floor, float(np.linalg.norm(a)), float(np.linalg.norm(b)))


def grads_rel_error(a: Grads, b: Grads, abs_floor: float = 1e-10) -> float:
    """Worst relative error over parameter blocks, each measured in its own space."""
    return max(rel_error(p, q, abs_floor) for p, q in zip(a.as_list(), b.as_list()))


@dataclass
class AdjointReport:
    max_defect: float
    trials: int
    tol: float = ADJOINT_TOL

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol


def adjoint_check(primal: Callable, adjoint: Callable, dims, trials: int = 100,
                  rng: Optional[np.random.Generator] = None) -> AdjointReport:
    """Worst ``|<u, L v> - <L* u, v>| / (1 + |<u, L v>|)`` over random pairs.

    ``dims`` is ``(domain_shape, codomain_shape)``; shapes may be ints or tuples.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(0) if rng is None else rng
    dom, cod = dims
    worst = 0.0
    for _ in range(trials):
        v = rng.standard_normal(dom)
        u = rng.standard_normal(cod)
        lhs = inner(u, primal(v))
        rhs = inner(adjoint(u), v)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return AdjointReport(worst, trials)


def _effective_weights(net: Network):
    return [net.weights[net.weight_slot(i)].T if net.is_decoder(i) else net.weights[i]
            for i in range(len(net.layers))]


def reference_forward(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    for K, b, act in zip(_effective_weights(net), net.biases, net.acts):
        x = ew.apply(act, K @ x + b)
    return x


def reference_tangent(net: Network, x, v) -> np.ndarray:
    """``DF(x) . v`` by multiplying out the dense layer Jacobians."""
    x = np.asarray(x, dtype=np.float64)
    J = np.eye(x.shape[0])
    for K, b, act in zip(_effective_weights(net), net.biases, net.acts):
        z = K @ x + b
        J = np.diag(ew.apply_d1(act, z)) @ K @ J
        x = ew.apply(act, z)
    return J @ np.asarray(v, dtype=np.float64)


def reference_J(net: Network, x, y, cfg: LossConfig) -> float:
    F = reference_forward(net, x)
    y = np.asarray(x if net.kind is Kind.AE else y, dtype=np.float64)
    if cfg.loss is Loss.MSE:
        return 0.5 * float(np.sum((y - F) ** 2))
    F = np.clip(F, XENT_EPS, 1.0 - XENT_EPS)
    return float(-np.sum(y * np.log(F)) - np.sum((1.0 - y) * np.log(1.0 - F)))


def reference_R(net: Network, x, targets: TangentTarget) -> float:
    return sum(0.5 * float(np.sum((reference_tangent(net, x, v) - b) ** 2)) for v, b in targets.pairs)


def fd_param_grads(net: Network, fn: Callable, cfg: FdConfig = FdConfig()) -> Grads:
    """Finite-difference gradient of ``fn(net)`` over every stored parameter.

    A tied weight is perturbed once, so both layers that use it move together.
    """
    nw = len(net.weights)

    def block(k):
        def f(p):
            params = net.params()
            params[k] = p
            return fn(net.with_params(weights=params[:nw], biases=params[nw:]))
        return f

    out = [fd_grad_scalar_loss(block(k), p, cfg) for k, p in enumerate(net.params())]
    return Grads(out[:nw], out[nw:])


def kink_margin(net: Network, x) -> float:
    """Smallest |pre-activation| over ramp layers (inf without ramp layers)."""
    x = np.asarray(x, dtype=np.float64)
    margin = np.inf
    for K, b, act in zip(_effective_weights(net), net.biases, net.acts):
        z = K @ x + b
        if act is Nonlinearity.RAMP:
            margin = min(margin, float(np.min(np.abs(z))))
        x = ew.apply(act, z)
    return margin


def away_from_kinks(net: Network, x, rng: np.random.Generator, scale: float = 0.1, tries: int = 1000):
    """``x`` itself if finite differences are valid there, else a nearby resample."""
    x = np.asarray(x, dtype=np.float64)
    cand = x
    for _ in range(tries):
        if kink_margin(net, cand) >= KINK_MARGIN:
            return cand
        cand = x + scale * rng.standard_normal(x.shape)
    raise RuntimeError("could not find an input away from ramp kinks")


# -------------------------------------------------------------------------
# suite


@dataclass
class CheckResult:
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error)) and self.error <= self.tol

    def line(self) -> str:
        return f"{self.name:<44} {self.error:.3e}  tol {self.tol:.0e}  {'PASS' if self.passed else 'FAIL'}"


@dataclass
class Report:
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, error, tol):
        self.checks.append(CheckResult(name, float(error), tol))

    def text(self) -> str:
        lines = [f"# {n}" for n in self.notes] + [c.line() for c in self.checks]
        lines.append(f"RESULT {'PASS' if self.passed else 'FAIL'} ({sum(c.passed for c in self.checks)}/{len(self.checks)})")
        return "\n".join(lines)


def _d2f_primal(layer, cache, v):
    # u -> D^2 f(x) . (v, u), written out independently of the layer's adjoint
    d2 = ew.apply_d2(layer.act, cache.z)
    return lambda u: d2 * (cache.K @ v) * (cache.K @ u)


def _gradw_primal(layer, cache):
    d1 = ew.apply_d1(layer.act, cache.z)
    tau = (lambda U: U.T) if layer.tied else (lambda U: U)
    return lambda U: d1 * (tau(U) @ cache.x_in)


def _mixedw_primal(layer, cache, v):
    d1, d2 = ew.apply_d1(layer.act, cache.z), ew.apply_d2(layer.act, cache.z)
    tau = (lambda U: U.T) if layer.tied else (lambda U: U)
    Kv = cache.K @ v
    return lambda U: d2 * Kv * (tau(U) @ cache.x_in) + d1 * (tau(U) @ v)


def layer_adjoint_checks(net: Network, x, report: Report, rng: np.random.Generator, trials: int = 100):
    state = forward(net, x)
    for i, (layer, cache) in enumerate(zip(net.layers, state.caches)):
        n_in, n_out, wshape = layer.n_in, layer.n_out, layer.W.shape
        v = rng.standard_normal(n_in)
        pairs = [
            ("vjp_state/jvp_state", lambda a: layer.jvp_state(cache, a), lambda u: layer.vjp_state(cache, u), (n_in, n_out)),
            ("dpsi self-adjoint", lambda a: ew.dpsi_action(layer.act, cache.z, a),
             lambda u: ew.dpsi_action(layer.act, cache.z, u), (n_out, n_out)),
            ("d2f hook", _d2f_primal(layer, cache, v), lambda u: layer.d2f_hook_adjoint(cache, v, u), (n_in, n_out)),
            ("grad_W adjoint", _gradw_primal(layer, cache), lambda u: layer.grad_w_adjoint(cache, u), (wshape, n_out)),
            ("mixed_W hook", _mixedw_primal(layer, cache, v), lambda u: layer.mixed_w_hook_adjoint(cache, v, u),
             (wshape, n_out)),
        ]
        for name, p, a, dims in pairs:
            r = adjoint_check(p, a, dims, trials, rng)
            report.add(f"adjoint L{i + 1} {name}", r.max_defect, ADJOINT_TOL)


def untied_sum_oracle(net: Network, grads_untied: Grads) -> list:
    """Fold untied per-layer weight gradients onto the stored tied weights."""
    out = [np.zeros_like(W) for W in net.weights]
    for i in reversed(range(len(net.layers))):
        g = grads_untied.W[i]
        out[net.weight_slot(i)] = out[net.weight_slot(i)] + (g.T if net.is_decoder(i) else g)
    return out


def _engine_default(net, x, y, cfg, targets):
    state = forward(net, x)
    gJ = backprop_standard(net, state, seed_error(net, state, y, cfg))
    gR = grad_R_multi(net, x, targets, state)[0] if targets is not None and targets.pairs else None
    return gJ, gR


def run_suite(net: Network, x, y=None, cfg: LossConfig = LossConfig(), targets: Optional[TangentTarget] = None,
              seed: int = 0, fd: FdConfig = FdConfig(), grad_fn: Optional[Callable] = None) -> Report:
    """Every derivative check that applies to ``net`` at one data row.

    ``grad_fn(net, x, y, cfg, targets) -> (gJ, gR)`` replaces the engine
    gradients; the suite uses it to confirm that broken gradients FAIL.
    """
    rng = np.random.default_rng(seed)
    report = Report()
    cfg.check(net)
    x = np.asarray(x, dtype=np.float64)
    xs = away_from_kinks(net, x, rng)
    if xs is not x:
        report.notes.append("input resampled away from ramp kinks")
        x = xs
    if net.kind is Kind.AE:
        y = x
    grad_fn = grad_fn or _engine_default
    smooth = all(a in (Nonlinearity.SIGMOID, Nonlinearity.TANH, Nonlinearity.IDENTITY) for a in net.acts)

    layer_adjoint_checks(net, x, report, rng)

    gJ, gR = grad_fn(net, x, y, cfg, targets)
    fdJ = fd_param_grads(net, lambda n: reference_J(n, x, y, cfg), fd)
    report.add(f"grad J vs FD ({cfg.loss})", grads_rel_error(gJ, fdJ, fd.abs_floor), FIRST_ORDER_TOL)
    if cfg.lam > 0:
        lam = cfg.lam
        fdT = fd_param_grads(net, lambda n: reference_J(n, x, y, cfg) + lam * 0.5 * sum(
            float(np.sum(p * p)) for p in n.params()), fd)
        report.add("grad (J + lambda T) vs FD", grads_rel_error(total_gradient(net, gJ, LossConfig(
            cfg.loss, cfg.eta, lam, 0.0)), fdT, fd.abs_floor), FIRST_ORDER_TOL)

    state = forward(net, x)
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal(net.n_in)
        ts = tangent_forward(net, state, v)
        worst = max(worst, rel_error(ts.vs[-1], fd_jvp(lambda a: reference_forward(net, a), x, v, fd), fd.abs_floor))
    report.add("tangent_forward vs FD jvp", worst, TANGENT_TOL)

    if net.kind is Kind.AE:
        un = net.untied()
        ust = forward(un, x)
        ugJ = backprop_standard(un, ust, seed_error(un, ust, x, cfg))
        report.add("tied grad_W J vs untied-sum oracle",
                   max(rel_error(a, b) for a, b in zip(gJ.W, untied_sum_oracle(net, ugJ))), TIED_J_TOL)

    if targets is not None and targets.pairs:
        if smooth:
            fdR = fd_param_grads(net, lambda n: reference_R(n, x, targets), fd)
            report.add("grad R vs FD", grads_rel_error(gR, fdR, fd.abs_floor), HIGHER_ORDER_TOL)
        if net.kind is Kind.AE:
            un = net.untied()
            ugR, _ = grad_R_multi(un, x, targets)
            report.add("tied grad_W R vs untied-sum oracle",
                       max(rel_error(a, b) for a, b in zip(gR.W, untied_sum_oracle(net, ugR))), TIED_R_TOL)
        if not smooth:
            report.notes.append("grad R finite-difference check skipped: non-smooth activation")
    return report
