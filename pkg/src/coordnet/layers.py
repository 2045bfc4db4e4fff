"""Single-layer derivative algebra for ``f(x) = S(K x + b)``.

An MLP layer uses ``K = W``. A decoder layer of a tied autoencoder uses
``K = tau(W)`` where ``W`` is the weight stored at its partner encoder layer;
its parameter gradients are routed back through ``tau*`` so they come out in
the stored weight's shape.

Every backward action reads ``x_in``, ``z`` and ``K`` from the
:class:`LayerCache` written by :meth:`Layer.forward`, never from the live
parameters.
"""

from dataclasses import dataclass

from . import elementwise as ew
from .elementwise import Nonlinearity
from .linalg import DimensionError, Mat, Vec, hadamard, matvec, matvec_adjoint, outer, transpose


def tau(W: Mat) -> Mat:
    """Weight-sharing map from a stored encoder weight to the decoder weight."""
    return transpose(W)


def tau_adjoint(G: Mat) -> Mat:
    """Adjoint of :func:`tau` under the trace inner product."""
    return transpose(G)


def xi(i: int, L: int) -> int:
    """Partner of layer ``i`` (0-based) in a ``2L``-layer tied autoencoder.

    The map is an involution pairing encoder layer ``i`` with decoder layer
    ``2L - 1 - i``.
    """
    if not 0 <= i < 2 * L:
        raise IndexError(f"layer index {i} outside 0..{2 * L - 1}")
    return 2 * L - 1 - i


@dataclass(frozen=True, eq=False)
class LayerCache:
    """Forward-pass record; ``d1``/``d2`` are S'(z) and S''(z)."""

    x_in: Vec
    z: Vec
    K: Mat
    d1: Vec
    d2: Vec


@dataclass(frozen=True, eq=False)
class Layer:
    """One network level.

    ``W`` is the *stored* weight. For a decoder layer (``tied=True``) it is
    the partner encoder's weight and the layer multiplies by ``tau(W)``.
    """

    W: Mat
    b: Vec
    act: Nonlinearity
    tied: bool = False

    def __post_init__(self):
        K_shape = self.W.shape[::-1] if self.tied else self.W.shape
        if self.W.ndim != 2 or self.b.ndim != 1 or K_shape[0] != self.b.shape[0]:
            raise DimensionError(f"weight {self.W.shape} (tied={self.tied}) does not fit bias {self.b.shape}")

    @property
    def n_in(self) -> int:
        return self.W.shape[0] if self.tied else self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.b.shape[0]

    def effective_weight(self) -> Mat:
        return tau(self.W) if self.tied else self.W

    def _route(self, G: Mat) -> Mat:
        return tau_adjoint(G) if self.tied else G

    def _check(self, v, n, what):
        if v.ndim != 1 or v.shape[0] != n:
            raise DimensionError(f"{what}: expected length {n}, got shape {v.shape}")

    def forward(self, x: Vec):
        self._check(x, self.n_in, "forward")
        K = self.effective_weight()
        z = matvec(K, x) + self.b
        y, d1, d2 = ew.jet(self.act, z)
        return y, LayerCache(x_in=x, z=z, K=K, d1=d1, d2=d2)

    def jvp_state(self, cache: LayerCache, v: Vec) -> Vec:
        """D f(x) . v"""
        self._check(v, self.n_in, "jvp_state")
        return hadamard(cache.d1, matvec(cache.K, v))

    def vjp_state(self, cache: LayerCache, u: Vec) -> Vec:
        """D* f(x) . u = K^T (S'(z) (.) u)"""
        self._check(u, self.n_out, "vjp_state")
        return matvec_adjoint(cache.K, hadamard(cache.d1, u))

    def grad_w_adjoint(self, cache: LayerCache, u: Vec) -> Mat:
        """(S'(z) (.) u) x^T, pulled back through tau* for decoder layers."""
        self._check(u, self.n_out, "grad_w_adjoint")
        return self._route(outer(hadamard(cache.d1, u), cache.x_in))

    def grad_b_adjoint(self, cache: LayerCache, u: Vec) -> Vec:
        self._check(u, self.n_out, "grad_b_adjoint")
        return hadamard(cache.d1, u)

    def _d2_hook(self, cache, v, u):
        # S''(z) (.) (K v) (.) u, the self-adjoint hooked second derivative of S
        self._check(v, self.n_in, "hook direction")
        self._check(u, self.n_out, "hook argument")
        return hadamard(cache.d2, hadamard(matvec(cache.K, v), u))

    def d2f_hook_adjoint(self, cache: LayerCache, v: Vec, u: Vec) -> Vec:
        """(v -| D^2 f(x))* . u = K^T (S''(z) (.) (K v) (.) u)"""
        return matvec_adjoint(cache.K, self._d2_hook(cache, v, u))

    def mixed_w_hook_adjoint(self, cache: LayerCache, v: Vec, y: Vec) -> Mat:
        """(v -| D grad_W f(x))* . y"""
        G = outer(self._d2_hook(cache, v, y), cache.x_in) + outer(hadamard(cache.d1, y), v)
        return self._route(G)

    def mixed_b_hook_adjoint(self, cache: LayerCache, v: Vec, y: Vec) -> Vec:
        return self._d2_hook(cache, v, y)


def recompute_z(layer: Layer, cache: LayerCache) -> Vec:
    return matvec(cache.K, cache.x_in) + layer.b
