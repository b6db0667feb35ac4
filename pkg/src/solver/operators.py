"""
Spectral Operators Module
Legendre-Gauss-Lobatto nodes, weights and the collocated derivative matrix
with the diagonal-norm summation-by-parts property
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 100


def legendre_vandermonde(P: int, x: np.ndarray) -> np.ndarray:
    """V[i, k] = L_k(x_i) for k = 0..P (classical, unnormalized)."""
    x = np.asarray(x, dtype=float)
    V = np.zeros((x.size, P + 1))
    V[:, 0] = 1.0
    if P >= 1:
        V[:, 1] = x
    for k in range(2, P + 1):
        V[:, k] = ((2 * k - 1) * x * V[:, k - 1] - (k - 1) * V[:, k - 2]) / k
    return V


def lgl_nodes_weights(P: int):
    """
    Newton iteration for the roots of (1 - x^2) L'_P started from
    Chebyshev-Gauss-Lobatto points.
    """
    if P < 1:
        raise ValueError(f"polynomial degree must be at least 1, got {P}")
    nodes = -np.cos(np.pi * np.arange(P + 1) / P)
    update = np.ones_like(nodes)
    iterations = 0
    while np.max(np.abs(update)) > np.finfo(np.float64).eps and iterations < NEWTON_MAX_ITER:
        V = legendre_vandermonde(P, nodes)
        update = -(nodes * V[:, P] - V[:, P - 1]) / ((P + 1) * V[:, P])
        nodes = nodes + update
        iterations += 1

    nodes = 0.5 * (nodes - nodes[::-1])
    nodes[0], nodes[-1] = -1.0, 1.0
    if P % 2 == 0:
        nodes[P // 2] = 0.0
    V = legendre_vandermonde(P, nodes)
    weights = 2.0 / (P * (P + 1) * V[:, P] ** 2)
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def derivative_matrix(nodes: np.ndarray) -> np.ndarray:
    """D[i, j] = l'_j(x_i); diagonal from the negative row sum so that D @ 1 = 0."""
    lam = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))
    return D


def interpolation_matrix(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """L[m, j] = l_j(points_m) by the second barycentric formula."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    lam = barycentric_weights(nodes)
    diff = points[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = lam[None, :] / diff
    L = terms / np.sum(terms, axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    L[rows] = exact[rows].astype(float)
    return L


@dataclass(frozen=True)
class SpectralOperators:
    P: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.P + 1

    @property
    def Q(self) -> np.ndarray:
        return self.weights[:, None] * self.D

    @property
    def boundary_matrix(self) -> np.ndarray:
        B = np.zeros((self.n_nodes, self.n_nodes))
        B[0, 0], B[-1, -1] = -1.0, 1.0
        return B

    def sbp_defect(self) -> float:
        """max |Q + Q^T - B|."""
        return float(np.max(np.abs(self.Q + self.Q.T - self.boundary_matrix)))

    def modal_vandermonde(self) -> np.ndarray:
        """Orthonormal Legendre polynomials evaluated at the nodes."""
        scale = np.sqrt((2.0 * np.arange(self.P + 1) + 1.0) / 2.0)
        return legendre_vandermonde(self.P, self.nodes) * scale

    def to_modal(self, values: np.ndarray) -> np.ndarray:
        """Modal coefficients along the node axis (-1 of values)."""
        values = np.asarray(values, dtype=float)
        return np.linalg.solve(self.modal_vandermonde(), values.T).T

    def interpolate(self, values: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return interpolation_matrix(self.nodes, xi) @ values


@lru_cache(maxsize=None)
def build_operators(P: int) -> SpectralOperators:
    nodes, weights = lgl_nodes_weights(P)
    D = derivative_matrix(nodes)
    for arr in (nodes, weights, D):
        arr.setflags(write=False)
    logger.debug(f"Built LGL operators for P={P}")
    return SpectralOperators(P=P, nodes=nodes, weights=weights, D=D)
