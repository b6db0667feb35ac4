"""
Mesh Module
Uniform periodic element geometry and the nodal solution container
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from src.physics.model import DEFAULT_H_MIN, locate_dry
from src.solver.operators import SpectralOperators
from src.utils.errors import DryStateError

logger = logging.getLogger(__name__)

InitialCondition = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Mesh:
    x_a: float
    x_b: float
    K: int
    ops: SpectralOperators

    def __post_init__(self):
        if not self.x_a < self.x_b:
            raise ValueError(f"empty domain [{self.x_a}, {self.x_b}]")
        if self.K < 1:
            raise ValueError(f"element count must be positive, got {self.K}")

    @property
    def dx(self) -> float:
        return (self.x_b - self.x_a) / self.K

    @property
    def length(self) -> float:
        return self.x_b - self.x_a

    @property
    def element_left(self) -> np.ndarray:
        return self.x_a + self.dx * np.arange(self.K)

    @property
    def x_nodes(self) -> np.ndarray:
        """K x (P+1) physical node coordinates."""
        return self.element_left[:, None] + 0.5 * self.dx * (self.ops.nodes[None, :] + 1.0)

    @property
    def quadrature_weights(self) -> np.ndarray:
        """omega_i dx/2 for every node, K x (P+1)."""
        return np.broadcast_to(0.5 * self.dx * self.ops.weights, (self.K, self.ops.n_nodes))

    def integrate(self, nodal: np.ndarray) -> np.ndarray:
        """LGL quadrature over the whole domain; nodal has shape (K, P+1, ...)."""
        return np.einsum("ki,ki...->...", self.quadrature_weights, nodal)

    def locate(self, x: np.ndarray):
        """Element index and reference coordinate of physical points (periodic wrap)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        shifted = np.mod(x - self.x_a, self.length)
        element = np.minimum((shifted / self.dx).astype(int), self.K - 1)
        xi = 2.0 * (shifted - element * self.dx) / self.dx - 1.0
        return element, np.clip(xi, -1.0, 1.0)


@dataclass(frozen=True)
class MeshState:
    mesh: Mesh
    U: np.ndarray
    t: float = 0.0

    @property
    def K(self) -> int:
        return self.mesh.K

    @property
    def dx(self) -> float:
        return self.mesh.dx

    @property
    def x_nodes(self) -> np.ndarray:
        return self.mesh.x_nodes

    @property
    def n_moments(self) -> int:
        return self.U.shape[-1] - 3

    def advanced(self, U: np.ndarray, t: float) -> "MeshState":
        return replace(self, U=U, t=t)

    def advanced_time(self, t: float) -> "MeshState":
        return replace(self, t=t)


def check_wet(
    U: np.ndarray, h_min: float, time: Optional[float] = None, stage: Optional[int] = None
) -> None:
    """Raise a located DryStateError if any node has h <= h_min."""
    where = locate_dry(U[..., 0], h_min)
    if where is None:
        return
    element, node = where[0], where[1]
    raise DryStateError(
        f"water height {U[element, node, 0]:.3e} at or below threshold {h_min:.1e}",
        element=element,
        node=node,
        time=time,
        stage=stage,
    )


def project_initial_condition(
    ic: InitialCondition, mesh: Mesh, h_min: float = DEFAULT_H_MIN
) -> MeshState:
    """Nodal interpolation: U at every LGL node is ic(x_node)."""
    x = mesh.x_nodes
    U = np.asarray(ic(x), dtype=float)
    if U.shape[:2] != x.shape:
        raise ValueError(f"initial condition returned shape {U.shape} for nodes {x.shape}")
    check_wet(U, h_min, time=0.0)
    logger.debug(f"Initial condition interpolated on K={mesh.K}, P={mesh.ops.P}")
    return MeshState(mesh=mesh, U=U, t=0.0)


def evaluate_at(state: MeshState, x: np.ndarray) -> np.ndarray:
    """Lagrange interpolation of the nodal solution at arbitrary points."""
    mesh = state.mesh
    element, xi = mesh.locate(x)
    out = np.empty((element.size, state.U.shape[-1]))
    for k in np.unique(element):
        mask = element == k
        out[mask] = mesh.ops.interpolate(state.U[k], xi[mask])
    return out
