"""
Moment Basis Module
Shifted Legendre recurrences, Legendre-Gauss rules and the moment tensors
A_ijk, B_ijk and the friction matrix C_ij built from them
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def points(self) -> int:
        return self.nodes.size

    def mapped(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the affine image of the rule on [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@dataclass(frozen=True)
class MomentTensors:
    """
    Dense moment tensors, zero-based internally.

    A[i, j, k] holds A_{i+1, j+1, k+1}; same for B and C.
    """

    N: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def r(self) -> np.ndarray:
        """Scaling factors 2i+1, i = 1..N."""
        return 2.0 * np.arange(1, self.N + 1) + 1.0

    @property
    def A_tilde(self) -> np.ndarray:
        return self.A / self.r[:, None, None]

    @property
    def B_tilde(self) -> np.ndarray:
        return self.B / self.r[:, None, None]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        idx = range(self.N)
        for name, tensor in (("A", self.A), ("B", self.B)):
            for i in idx:
                for j in idx:
                    for k in idx:
                        rows.append((name, i + 1, j + 1, k + 1, tensor[i, j, k]))
        for i in idx:
            for j in idx:
                rows.append(("C", i + 1, j + 1, None, self.C[i, j]))
        frame = pd.DataFrame(rows, columns=["tensor", "i", "j", "k", "value"])
        frame["k"] = frame["k"].astype("Int64")
        return frame


def shifted_legendre_table(n_max: int, zeta: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Values and derivatives of phi_0..phi_{n_max} at zeta.

    phi_j = (2j-1)/j (1-2 zeta) phi_{j-1} - (j-1)/j phi_{j-2}
    phi'_j = phi'_{j-2} - 2(2j-1) phi_{j-1}

    Returns two arrays of shape (n_max+1,) + shape(zeta).
    """
    if n_max < 0:
        raise ValueError(f"basis index must be non-negative, got {n_max}")
    zeta = np.asarray(zeta, dtype=float)
    values = np.empty((n_max + 1,) + zeta.shape)
    derivs = np.empty_like(values)
    values[0] = 1.0
    derivs[0] = 0.0
    if n_max >= 1:
        values[1] = 1.0 - 2.0 * zeta
        derivs[1] = -2.0
    for j in range(2, n_max + 1):
        values[j] = ((2 * j - 1) / j) * (1.0 - 2.0 * zeta) * values[j - 1] - (
            (j - 1) / j
        ) * values[j - 2]
        derivs[j] = derivs[j - 2] - 2.0 * (2 * j - 1) * values[j - 1]
    return values, derivs


def _as_output(value: np.ndarray) -> ArrayLike:
    return float(value) if value.ndim == 0 else value


def shifted_legendre_eval(j: int, zeta: ArrayLike) -> ArrayLike:
    """phi_j(zeta), normalized so that phi_j(0) = 1."""
    values, _ = shifted_legendre_table(j, zeta)
    return _as_output(values[j])


def shifted_legendre_deriv(j: int, zeta: ArrayLike) -> ArrayLike:
    _, derivs = shifted_legendre_table(j, zeta)
    return _as_output(derivs[j])


def _legendre_and_derivative(n: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Classical L_n(x), L_{n-1}(x) on [-1, 1] by the Bonnet recurrence."""
    prev = np.ones_like(x)
    if n == 0:
        return prev, np.zeros_like(x)
    curr = x.copy()
    for k in range(1, n):
        prev, curr = curr, ((2 * k + 1) * x * curr - k * prev) / (k + 1)
    return curr, prev


@lru_cache(maxsize=None)
def legendre_gauss_rule(points: int) -> QuadratureRule:
    """
    Gauss rule on [-1, 1] with `points` nodes, exact to degree 2*points-1.

    Newton iteration on L_n with Chebyshev initial guesses.
    """
    if points < 1:
        raise ValueError(f"Gauss rule needs at least one point, got {points}")
    n = points
    k = np.arange(1, n + 1)
    x = -np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(NEWTON_MAX_ITER):
        ln, lnm1 = _legendre_and_derivative(n, x)
        dln = n * (x * ln - lnm1) / (x * x - 1.0)
        step = ln / dln
        x = x - step
        if np.max(np.abs(step)) <= NEWTON_TOL:
            break
    else:
        logger.warning(f"Gauss node iteration did not reach {NEWTON_TOL} for {n} points")
    # symmetric by construction
    x = 0.5 * (x - x[::-1])
    ln, lnm1 = _legendre_and_derivative(n, x)
    dln = n * (x * ln - lnm1) / (x * x - 1.0)
    weights = 2.0 / ((1.0 - x * x) * dln * dln)
    nodes = np.sort(x)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights)


def _tensor_point_count(N: int) -> int:
    return math.ceil((3 * N - 1) / 2 + 1)


def _friction_point_count(N: int) -> int:
    return math.ceil((2 * N - 3) / 2 + 1)


def _build_b_tilde(N: int) -> np.ndarray:
    """Unscaled B~_ijk = int_0^1 phi'_i (int_0^zeta phi_j) phi_k."""
    rule = legendre_gauss_rule(_tensor_point_count(N))
    xi, w = rule.nodes, rule.weights
    zeta = 0.5 * (xi + 1.0)

    # inner integral on [0, zeta_m] with the same rule: s = zeta_m (eta + 1) / 2
    s = np.outer(zeta, 0.5 * (xi + 1.0))
    inner_vals, _ = shifted_legendre_table(N, s)
    antideriv = 0.5 * zeta[None, :] * np.einsum("q,jmq->jm", w, inner_vals)

    vals, derivs = shifted_legendre_table(N, zeta)
    return 0.5 * np.einsum(
        "m,im,jm,km->ijk", w, derivs[1:], antideriv[1:], vals[1:]
    )


def direct_a_tensor(N: int) -> np.ndarray:
    """A_ijk = (2i+1) int_0^1 phi_i phi_j phi_k by Gauss quadrature, independent of B."""
    rule = legendre_gauss_rule(_tensor_point_count(N))
    zeta = 0.5 * (rule.nodes + 1.0)
    vals, _ = shifted_legendre_table(N, zeta)
    r = 2.0 * np.arange(1, N + 1) + 1.0
    product = np.einsum("m,im,jm,km->ijk", rule.weights, vals[1:], vals[1:], vals[1:])
    return 0.5 * r[:, None, None] * product


def _build_c(N: int) -> np.ndarray:
    rule = legendre_gauss_rule(_friction_point_count(N))
    zeta = 0.5 * (rule.nodes + 1.0)
    _, derivs = shifted_legendre_table(N, zeta)
    r = 2.0 * np.arange(1, N + 1) + 1.0
    return 0.5 * r[:, None] * np.einsum("m,im,jm->ij", rule.weights, derivs[1:], derivs[1:])


@lru_cache(maxsize=None)
def build_tensors(N: int) -> MomentTensors:
    """
    Moment tensors for N moments.

    B comes from nested Gauss quadrature; A from the identity
    A~_kji = -(B~_ijk + B~_kji) on the unscaled tensors.
    """
    if N < 1:
        raise ValueError(f"moment count must be positive, got {N}")
    r = 2.0 * np.arange(1, N + 1) + 1.0
    b_tilde = _build_b_tilde(N)
    a_tilde = -(b_tilde + b_tilde.transpose(2, 1, 0))
    A = r[:, None, None] * a_tilde
    B = r[:, None, None] * b_tilde
    C = _build_c(N)
    for arr in (A, B, C):
        arr.setflags(write=False)
    logger.debug(f"Built moment tensors for N={N}")
    return MomentTensors(N=N, A=A, B=B, C=C)


def dump_tensors_csv(tensors: MomentTensors, path: str) -> str:
    tensors.to_frame().to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Moment tensors for N={tensors.N} written to {path}")
    return path
