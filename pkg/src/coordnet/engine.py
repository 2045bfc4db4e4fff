"""Losses, backpropagation sweeps and gradient descent.

The backward sweeps walk the layers from the output to the input carrying
error cursors:

* ``e_y`` -- ``D*omega_{i+1} . (F - y)``, the ordinary backpropagated error;
* ``e_v`` -- ``D*omega_{i+1} . (DF.v - beta)``, the tangent error;
* ``e_t`` -- the tangent-backpropagated second-order term, zero at the output.

Parameter gradients are emitted per layer from the cursors and the layer's
adjoint actions. Tied autoencoder weights collect one contribution from the
encoder layer and one (already routed through ``tau*``) from the decoder.

All gradients are computed from forward-pass caches; ``descent_step`` then
updates every parameter at once.
"""

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .elementwise import Nonlinearity
from .linalg import DimensionError, Vec, inner_vec, vec
from .network import Kind, Network, PassState, forward, tangent_forward

XENT_EPS = 1e-12


class ConfigError(ValueError):
    """Inconsistent loss, network or run configuration."""


class Loss(enum.Enum):
    MSE = "mse"
    XENT = "xent"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class LossConfig:
    loss: Loss = Loss.MSE
    eta: float = 0.1
    lam: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        # eta = 0 is allowed: it gives an exact no-op step (a frozen run)
        if not self.eta >= 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.eta}")
        if self.lam < 0 or self.mu < 0:
            raise ConfigError(f"lambda and mu must be non-negative, got {self.lam}, {self.mu}")

    def check(self, net: Network):
        if self.loss is Loss.XENT and net.acts[-1] is not Nonlinearity.SIGMOID:
            raise ConfigError(f"cross-entropy needs a sigmoid output layer, got {net.acts[-1]}")


@dataclass(frozen=True, eq=False)
class TangentTarget:
    """Finite set of ``(v_x, beta_x)`` pairs attached to one input."""

    pairs: tuple

    @classmethod
    def of(cls, pairs) -> "TangentTarget":
        return cls(tuple((vec(v), vec(b)) for v, b in pairs))

    def check(self, net: Network):
        for v, b in self.pairs:
            if v.shape[0] != net.n_in or b.shape[0] != net.n_out:
                raise DimensionError(f"tangent pair of shape ({v.shape[0]}, {b.shape[0]}) "
                                     f"for a {net.n_in} -> {net.n_out} network")


@dataclass(eq=False)
class Grads:
    """One gradient per stored weight and per bias."""

    W: list
    b: list

    @classmethod
    def zeros(cls, net: Network) -> "Grads":
        return cls([np.zeros_like(W) for W in net.weights], [np.zeros_like(b) for b in net.biases])

    def __add__(self, other: "Grads") -> "Grads":
        return Grads([a + b for a, b in zip(self.W, other.W)], [a + b for a, b in zip(self.b, other.b)])

    def scaled(self, c: float) -> "Grads":
        return Grads([c * a for a in self.W], [c * a for a in self.b])

    def as_list(self) -> list:
        return list(self.W) + list(self.b)

    def equals(self, other: "Grads") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.as_list(), other.as_list()))


def _target(net: Network, state: PassState, y: Optional[Vec]) -> Vec:
    if net.kind is Kind.AE:
        x = state.xs[0]
        if y is not None and not np.array_equal(y, x):
            raise ConfigError("autoencoder targets are the inputs themselves")
        return x
    if y is None:
        raise ConfigError("MLP loss needs a target vector")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != state.output.shape:
        raise DimensionError(f"target of shape {y.shape} for output of shape {state.output.shape}")
    return y


def loss_value(net: Network, state: PassState, y: Optional[Vec], cfg: LossConfig) -> float:
    cfg.check(net)
    y = _target(net, state, y)
    F = state.output
    if cfg.loss is Loss.MSE:
        e = y - F
        return 0.5 * inner_vec(e, e)
    F = np.clip(F, XENT_EPS, 1.0 - XENT_EPS)
    return -inner_vec(y, np.log(F)) - inner_vec(1.0 - y, np.log(1.0 - F))


def seed_error(net: Network, state: PassState, y: Optional[Vec], cfg: LossConfig) -> Vec:
    """Gradient of the loss with respect to the network output."""
    cfg.check(net)
    y = _target(net, state, y)
    F = state.output
    if cfg.loss is Loss.MSE:
        return F - y
    F = np.clip(F, XENT_EPS, 1.0 - XENT_EPS)
    return -y / F + (1.0 - y) / (1.0 - F)


def tangent_loss(state: PassState, beta: Vec) -> float:
    if state.vs is None:
        raise ValueError("state carries no tangents")
    r = state.vs[-1] - beta
    return 0.5 * inner_vec(r, r)


def _check_state(net: Network, state: PassState, e: Vec):
    if len(state.caches) != len(net.layers):
        raise DimensionError(f"state has {len(state.caches)} layers, network has {len(net.layers)}")
    if e.shape != (net.n_out,):
        raise DimensionError(f"error of shape {e.shape} for output dimension {net.n_out}")


def backprop_standard(net: Network, state: PassState, e: Vec) -> Grads:
    """Parameter gradients of ``<e, F>``, i.e. of J when ``e`` is the seed error."""
    _check_state(net, state, e)
    g = Grads.zeros(net)
    for i in reversed(range(len(net.layers))):
        layer, cache = net.layers[i], state.caches[i]
        k = net.weight_slot(i)
        g.W[k] = g.W[k] + layer.grad_w_adjoint(cache, e)
        g.b[i] = layer.grad_b_adjoint(cache, e)
        if i:
            e = layer.vjp_state(cache, e)
    return g


def backprop_higher(net: Network, state: PassState, e_y: Optional[Vec], e_v: Vec):
    """Joint sweep returning ``(grads of J, grads of R)``.

    ``e_y`` may be ``None`` to skip the J cursor, in which case the first
    element of the result is ``None``.
    """
    if state.vs is None:
        raise ValueError("backprop_higher needs a state from tangent_forward")
    _check_state(net, state, e_v)
    if e_y is not None:
        _check_state(net, state, e_y)
    gJ = Grads.zeros(net) if e_y is not None else None
    gR = Grads.zeros(net)
    e_t = np.zeros(net.n_out)
    for i in reversed(range(len(net.layers))):
        layer, cache, v = net.layers[i], state.caches[i], state.vs[i]
        k = net.weight_slot(i)
        if gJ is not None:
            gJ.W[k] = gJ.W[k] + layer.grad_w_adjoint(cache, e_y)
            gJ.b[i] = layer.grad_b_adjoint(cache, e_y)
        gR.W[k] = gR.W[k] + (layer.grad_w_adjoint(cache, e_t) + layer.mixed_w_hook_adjoint(cache, v, e_v))
        gR.b[i] = layer.grad_b_adjoint(cache, e_t) + layer.mixed_b_hook_adjoint(cache, v, e_v)
        if i:
            # e_t consumes e_v before e_v itself moves down a layer
            e_t = layer.vjp_state(cache, e_t) + layer.d2f_hook_adjoint(cache, v, e_v)
            e_v = layer.vjp_state(cache, e_v)
            if e_y is not None:
                e_y = layer.vjp_state(cache, e_y)
    return gJ, gR


def grad_R_multi(net: Network, x: Vec, targets: TangentTarget, state: Optional[PassState] = None):
    """Sum over pairs of the R gradients, one tangent sweep per pair.

    Returns ``(grads, R)`` where ``R`` is the summed tangent loss.
    """
    if not targets.pairs:
        raise ValueError("empty tangent target set")
    targets.check(net)
    if state is None:
        state = forward(net, x)
    total, R = Grads.zeros(net), 0.0
    for v_x, beta in targets.pairs:
        ts = tangent_forward(net, state, v_x)
        _, g = backprop_higher(net, ts, None, ts.vs[-1] - beta)
        total = total + g
        R += tangent_loss(ts, beta)
    return total, R


@dataclass(eq=False)
class Example:
    x: Vec
    y: Optional[Vec] = None
    targets: Optional[TangentTarget] = None


@dataclass(eq=False)
class BatchResult:
    gJ: Grads
    gR: Optional[Grads]
    J: float
    R: float


def example_grads(net: Network, ex: Example, cfg: LossConfig) -> BatchResult:
    state = forward(net, ex.x)
    J = loss_value(net, state, ex.y, cfg)
    gJ = backprop_standard(net, state, seed_error(net, state, ex.y, cfg))
    gR, R = None, 0.0
    if cfg.mu > 0 and ex.targets is not None and ex.targets.pairs:
        gR, R = grad_R_multi(net, ex.x, ex.targets, state)
    return BatchResult(gJ, gR, J, R)


def batch_grads(net: Network, batch: Sequence[Example], cfg: LossConfig) -> BatchResult:
    """Summed (not averaged) gradients and losses, folded in batch order."""
    if not batch:
        raise ValueError("empty batch")
    gJ, gR, J, R = Grads.zeros(net), None, 0.0, 0.0
    for ex in batch:
        r = example_grads(net, ex, cfg)
        gJ = gJ + r.gJ
        if r.gR is not None:
            gR = r.gR if gR is None else gR + r.gR
        J += r.J
        R += r.R
    return BatchResult(gJ, gR, J, R)


def l2_term(net: Network) -> float:
    return 0.5 * sum(float(np.sum(p * p)) for p in net.params())


def total_gradient(net: Network, gJ: Grads, cfg: LossConfig, gR: Optional[Grads] = None) -> Grads:
    """``grad J + mu grad R + lambda theta`` for every stored parameter."""
    g = gJ
    if gR is not None and cfg.mu > 0:
        g = g + gR.scaled(cfg.mu)
    if cfg.lam > 0:
        g = g + Grads(list(net.weights), list(net.biases)).scaled(cfg.lam)
    return g


def descent_step(net: Network, gJ: Grads, cfg: LossConfig, gR: Optional[Grads] = None) -> Network:
    if len(gJ.W) != len(net.weights) or len(gJ.b) != len(net.biases):
        raise DimensionError("gradient does not match network parameters")
    g = total_gradient(net, gJ, cfg, gR)
    for p, d in zip(net.params(), g.as_list()):
        if p.shape != d.shape:
            raise DimensionError(f"gradient of shape {d.shape} for parameter of shape {p.shape}")
    return net.with_params(weights=[W - cfg.eta * d for W, d in zip(net.weights, g.W)],
                           biases=[b - cfg.eta * d for b, d in zip(net.biases, g.b)])


def objective(net: Network, result: BatchResult, cfg: LossConfig) -> float:
    return result.J + cfg.mu * result.R + cfg.lam * l2_term(net)


def batch_objective(net: Network, batch: Sequence[Example], cfg: LossConfig) -> float:
    return objective(net, batch_grads(net, batch, cfg), cfg)


def train(net: Network, batch: Sequence[Example], cfg: LossConfig, epochs: int,
          stop: Optional[Callable[[float], bool]] = None):
    """Full-batch descent for at most ``epochs`` epochs.

    Returns the final network and the per-epoch objective, each measured
    before that epoch's update. If ``stop(objective)`` is true the run ends
    there, without applying the update.
    """
    if epochs < 1:
        raise ConfigError(f"epochs must be positive, got {epochs}")
    cfg.check(net)
    log = []
    for _ in range(epochs):
        r = batch_grads(net, batch, cfg)
        log.append(objective(net, r, cfg))
        if stop is not None and stop(log[-1]):
            break
        net = descent_step(net, r.gJ, cfg, r.gR)
    return net, log


def halving_probe(net: Network, batch: Sequence[Example], cfg: LossConfig,
                  start: float = 1e-1, stop: float = 1e-6, trial_epochs: int = 1) -> Optional[float]:
    """Largest ``start / 2**k >= stop`` whose trial run strictly decreases the
    objective at every step, or ``None``."""
    eta = start
    while eta >= stop:
        trial = LossConfig(cfg.loss, eta, cfg.lam, cfg.mu)
        try:
            with np.errstate(over="raise", invalid="raise"):
                probe, log = train(net, batch, trial, trial_epochs)
                log.append(batch_objective(probe, batch, trial))
        except FloatingPointError:
            log = [np.inf]
        if all(np.isfinite(log)) and all(b < a for a, b in zip(log, log[1:])):
            return eta
        eta /= 2
    return None
