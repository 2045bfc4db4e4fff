"""Elementwise nonlinearities and the derivative actions they induce.

An elementwise function applies a scalar operation to each coordinate in the
standard basis. Its derivative at ``z`` acts as a Hadamard product with the
componentwise first derivative, and its second derivative as a double
Hadamard product with the componentwise second derivative; both are
self-adjoint.
"""

import enum

import numpy as np

from .linalg import DimensionError, Vec, hadamard


class Nonlinearity(enum.Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    RAMP = "ramp"
    IDENTITY = "identity"

    @classmethod
    def parse(cls, token: str) -> "Nonlinearity":
        try:
            return cls(token.strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown nonlinearity {token!r} (expected one of {names})") from None

    def __str__(self):
        return self.value


def _sigmoid(z):
    # exp of a non-positive argument never overflows
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0, e) / (1.0 + e)


def _apply(n, z, order):
    z = np.asarray(z, dtype=np.float64)
    if n is Nonlinearity.IDENTITY:
        return (z.copy(), np.ones_like(z), np.zeros_like(z))[order]
    if n is Nonlinearity.RAMP:
        if order == 0:
            return np.maximum(z, 0.0)
        if order == 1:
            return (z > 0).astype(np.float64)  # H(0) = 0
        return np.zeros_like(z)
    if n is Nonlinearity.SIGMOID:
        s = _sigmoid(z)
        if order == 0:
            return s
        d1 = s * (1.0 - s)
        return d1 if order == 1 else d1 * (1.0 - 2.0 * s)
    if n is Nonlinearity.TANH:
        t = np.tanh(z)
        if order == 0:
            return t
        d1 = 1.0 - t * t
        return d1 if order == 1 else -2.0 * t * d1
    raise TypeError(f"not a Nonlinearity: {n!r}")


def jet(n: Nonlinearity, z: Vec):
    """``(Psi(z), Psi'(z), Psi''(z))`` from one evaluation of the operation."""
    z = np.asarray(z, dtype=np.float64)
    if n is Nonlinearity.SIGMOID:
        s = _sigmoid(z)
        d1 = s * (1.0 - s)
        return s, d1, d1 * (1.0 - 2.0 * s)
    if n is Nonlinearity.TANH:
        t = np.tanh(z)
        d1 = 1.0 - t * t
        return t, d1, -2.0 * t * d1
    return _apply(n, z, 0), _apply(n, z, 1), _apply(n, z, 2)


def apply(n: Nonlinearity, z: Vec) -> Vec:
    return _apply(n, z, 0)


def apply_d1(n: Nonlinearity, z: Vec) -> Vec:
    return _apply(n, z, 1)


def apply_d2(n: Nonlinearity, z: Vec) -> Vec:
    return _apply(n, z, 2)


def sigma(n: Nonlinearity, x: float) -> float:
    return float(_apply(n, np.array([x]), 0)[0])


def sigma_d1(n: Nonlinearity, x: float) -> float:
    return float(_apply(n, np.array([x]), 1)[0])


def sigma_d2(n: Nonlinearity, x: float) -> float:
    return float(_apply(n, np.array([x]), 2)[0])


def dpsi_action(n: Nonlinearity, z: Vec, v: Vec) -> Vec:
    """D Psi(z) . v = Psi'(z) (.) v"""
    if z.shape != v.shape:
        raise DimensionError(f"dpsi_action: z {z.shape} vs v {v.shape}")
    return hadamard(apply_d1(n, z), v)


def d2psi_action(n: Nonlinearity, z: Vec, v1: Vec, v2: Vec) -> Vec:
    """D^2 Psi(z) . (v1, v2) = Psi''(z) (.) v1 (.) v2"""
    if not (z.shape == v1.shape == v2.shape):
        raise DimensionError(f"d2psi_action: shapes {z.shape}, {v1.shape}, {v2.shape}")
    # v1 (.) v2 first: exactly commutative, so swapping the arguments is bit-identical
    return hadamard(apply_d2(n, z), hadamard(v1, v2))
