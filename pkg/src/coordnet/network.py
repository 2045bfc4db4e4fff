"""Networks as compositions of layers, and the forward state and tangent sweeps."""

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .elementwise import Nonlinearity
from .layers import Layer, xi
from .linalg import DimensionError, Vec, vec


class Kind(enum.Enum):
    MLP = "mlp"
    AE = "ae"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Network:
    """``F = f_n o ... o f_1`` with its parameters.

    For ``Kind.AE`` there are ``2L`` layers but only ``L`` stored weights:
    decoder layer ``i`` reuses ``weights[xi(i, L)]`` through ``tau``. Every
    layer owns its bias in both kinds.
    """

    kind: Kind
    weights: tuple
    biases: tuple
    acts: tuple

    def __post_init__(self):
        n = len(self.biases)
        if n == 0 or len(self.acts) != n:
            raise DimensionError(f"{n} biases but {len(self.acts)} activations")
        expect = n if self.kind is Kind.MLP else n // 2
        if self.kind is Kind.AE and n % 2:
            raise DimensionError(f"tied autoencoder needs an even layer count, got {n}")
        if len(self.weights) != expect:
            raise DimensionError(f"{self.kind} with {n} layers stores {expect} weights, got {len(self.weights)}")
        layers = [Layer(self.weights[self.weight_slot(i)], self.biases[i], self.acts[i], self.is_decoder(i))
                  for i in range(n)]
        for i in range(1, n):
            if layers[i].n_in != layers[i - 1].n_out:
                raise DimensionError(f"layer {i} expects {layers[i].n_in} inputs, layer {i - 1} gives {layers[i - 1].n_out}")
        object.__setattr__(self, "_layers", tuple(layers))

    @property
    def layers(self) -> tuple:
        return self._layers

    @property
    def depth(self) -> int:
        """Encoder depth ``L`` for autoencoders, layer count for MLPs."""
        return len(self.weights)

    @property
    def dims(self) -> list:
        return [self._layers[0].n_in] + [lay.n_out for lay in self._layers]

    @property
    def n_in(self) -> int:
        return self._layers[0].n_in

    @property
    def n_out(self) -> int:
        return self._layers[-1].n_out

    def is_decoder(self, i: int) -> bool:
        return self.kind is Kind.AE and i >= self.depth

    def weight_slot(self, i: int) -> int:
        """Index into ``weights`` of the matrix layer ``i`` depends on."""
        return xi(i, self.depth) if self.is_decoder(i) else i

    def with_params(self, weights=None, biases=None) -> "Network":
        return replace(self,
                       weights=self.weights if weights is None else tuple(weights),
                       biases=self.biases if biases is None else tuple(biases))

    def params(self) -> list:
        return list(self.weights) + list(self.biases)

    def untied(self) -> "Network":
        """The MLP with each layer's effective weight materialized independently."""
        return Network(Kind.MLP, tuple(lay.effective_weight().copy() for lay in self._layers),
                       tuple(b.copy() for b in self.biases), self.acts)


def check_dims(kind: Kind, dims: Sequence[int]):
    dims = list(dims)
    if len(dims) < 2 or any(int(d) <= 0 for d in dims):
        raise DimensionError(f"need at least two positive dimensions, got {dims}")
    if kind is Kind.AE:
        if (len(dims) - 1) % 2:
            raise DimensionError(f"autoencoder needs an even number of layers, got dims {dims}")
        if dims != dims[::-1]:
            raise DimensionError(f"autoencoder dims must be a palindrome, got {dims}")


def init_network(kind: Kind, dims: Sequence[int], acts: Sequence[Nonlinearity], seed: int) -> Network:
    """Seeded uniform initialization on ``[-1/sqrt(n_in), 1/sqrt(n_in)]``.

    Layers are visited in order; each draws its stored weight (if it owns
    one) and then its bias from a single PCG64 stream.
    """
    dims = [int(d) for d in dims]
    check_dims(kind, dims)
    n_layers = len(dims) - 1
    if len(acts) != n_layers:
        raise DimensionError(f"{n_layers} layers but {len(acts)} activations")
    rng = np.random.default_rng(np.uint64(seed % 2**64))
    n_stored = n_layers if kind is Kind.MLP else n_layers // 2
    weights, biases = [], []
    for i in range(n_layers):
        r = 1.0 / np.sqrt(dims[i])
        if i < n_stored:
            weights.append(rng.uniform(-r, r, size=(dims[i + 1], dims[i])))
        biases.append(rng.uniform(-r, r, size=dims[i + 1]))
    return Network(kind, tuple(weights), tuple(biases), tuple(acts))


@dataclass(eq=False)
class PassState:
    xs: list
    caches: list
    vs: Optional[list] = field(default=None)

    @property
    def output(self) -> Vec:
        return self.xs[-1]


def forward(net: Network, x: Vec) -> PassState:
    x = vec(x)
    xs, caches = [x], []
    for i, layer in enumerate(net.layers):
        if x.shape[0] != layer.n_in:
            raise DimensionError(f"layer {i}: expected input of length {layer.n_in}, got {x.shape[0]}")
        x, cache = layer.forward(x)
        xs.append(x)
        caches.append(cache)
    return PassState(xs, caches)


def tangent_forward(net: Network, state: PassState, v_x: Vec) -> PassState:
    """Push ``v_x`` through the tangent network; ``vs[-1] = DF(x) . v_x``."""
    v = vec(v_x)
    if v.shape[0] != net.n_in:
        raise DimensionError(f"tangent of length {v.shape[0]} for input dimension {net.n_in}")
    vs = [v]
    for layer, cache in zip(net.layers, state.caches):
        v = layer.jvp_state(cache, v)
        vs.append(v)
    return PassState(state.xs, state.caches, vs)


def tail(net: Network, i: int, x_i: Vec) -> Vec:
    """omega_i: apply layers ``i, i+1, ...`` (0-based) starting from ``x_i``."""
    for layer in net.layers[i:]:
        x_i, _ = layer.forward(x_i)
    return x_i
