"""
DGSEM Module
Flux-differencing discontinuous Galerkin right-hand side on LGL nodes:
entropy-conservative volume fluctuations, configurable interface
fluctuations, collocated sources and optional subcell blending
"""

import logging
from typing import Callable, Optional

import numpy as np
from joblib import Parallel, delayed

from src.moments.basis import MomentTensors
from src.physics.fluxes import Fluctuation, ec_fluctuations, surface_fluctuations
from src.physics.model import entropy_vars, friction_source
from src.solver.mesh import Mesh, MeshState, check_wet
from src.solver.shock_capture import blend, blending_coefficients, subcell_fv_rhs
from src.utils.config import SchemeConfig
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

SourceFn = Callable[[np.ndarray, float], np.ndarray]


class Semidiscretization:
    """
    Binds mesh, tensors and scheme settings into dU/dt = rhs(U, t).

    U has shape (K, P+1, N+3). The state is never written during an
    evaluation; volume chunks write disjoint element ranges.
    """

    def __init__(
        self,
        mesh: Mesh,
        tensors: MomentTensors,
        scheme: SchemeConfig,
        source_fn: Optional[SourceFn] = None,
    ):
        if scheme.source == "manufactured" and source_fn is None:
            raise ConfigurationError("manufactured source requested without a source function")
        self.mesh = mesh
        self.ops = mesh.ops
        self.tensors = tensors
        self.scheme = scheme
        self.physics = scheme.physics
        self.source_fn = source_fn
        self.workers = scheme.workers
        self.last_blending: Optional[np.ndarray] = None

    def _surface(self, uL: np.ndarray, uR: np.ndarray) -> Fluctuation:
        return surface_fluctuations(uL, uR, self.tensors, self.physics, self.scheme.flux_mode)

    def _volume_chunk(self, U: np.ndarray) -> np.ndarray:
        left = U[:, :, None, :]
        right = U[:, None, :, :]
        dminus = ec_fluctuations(left, right, self.tensors, self.physics).dminus
        return 2.0 * np.einsum("im,kimv->kiv", self.ops.D, dminus)

    def volume_term(self, U: np.ndarray) -> np.ndarray:
        """sum_m 2 D_im D-_EC(U_i, U_m) per element."""
        if self.workers <= 1 or U.shape[0] < 2 * self.workers:
            return self._volume_chunk(U)
        chunks = np.array_split(np.arange(U.shape[0]), self.workers)
        parts = Parallel(n_jobs=self.workers, prefer="threads")(
            delayed(self._volume_chunk)(U[chunk]) for chunk in chunks
        )
        return np.concatenate(parts, axis=0)

    def interface_fluctuations(self, U: np.ndarray) -> Fluctuation:
        """Entry k is the interface between element k and its periodic right neighbour."""
        return self._surface(U[:, -1], np.roll(U[:, 0], -1, axis=0))

    def surface_term(self, U: np.ndarray, interface: Fluctuation) -> np.ndarray:
        out = np.zeros_like(U)
        out[:, 0] = np.roll(interface.dplus, 1, axis=0) / self.ops.weights[0]
        out[:, -1] += interface.dminus / self.ops.weights[-1]
        return out

    def source_term(self, U: np.ndarray, t: float) -> np.ndarray:
        kind = self.scheme.source
        if kind == "friction":
            return friction_source(U, self.tensors, self.physics)
        if kind == "manufactured":
            return np.asarray(self.source_fn(self.mesh.x_nodes, t), dtype=float)
        return np.zeros_like(U)

    def dg_rhs(self, U: np.ndarray, interface: Fluctuation) -> np.ndarray:
        scale = 2.0 / self.mesh.dx
        return -scale * (self.volume_term(U) + self.surface_term(U, interface))

    def rhs(self, U: np.ndarray, t: float, stage: Optional[int] = None) -> np.ndarray:
        check_wet(U, self.physics.h_min, time=t, stage=stage)
        interface = self.interface_fluctuations(U)
        dU = self.dg_rhs(U, interface)

        capture = self.scheme.shock_capture
        if capture.enabled:
            beta = blending_coefficients(U, self.ops, capture)
            self.last_blending = beta
            if np.any(beta > 0.0):
                fv = subcell_fv_rhs(U, self.ops, self.mesh.dx, interface, self._surface)
                dU = blend(dU, fv, beta)

        if self.scheme.source != "none":
            dU = dU + self.source_term(U, t)
        return dU

    def __call__(self, U: np.ndarray, t: float, stage: Optional[int] = None) -> np.ndarray:
        return self.rhs(U, t, stage)


def semidiscrete_rhs(
    state: MeshState,
    tensors: MomentTensors,
    scheme: SchemeConfig,
    source_fn: Optional[SourceFn] = None,
) -> np.ndarray:
    """One-shot dU/dt for a MeshState."""
    return Semidiscretization(state.mesh, tensors, scheme, source_fn).rhs(state.U, state.t)


def shock_capture_blend(
    state: MeshState,
    tensors: MomentTensors,
    scheme: SchemeConfig,
    rhs_dg: np.ndarray,
) -> np.ndarray:
    """Blend an already computed DG right-hand side with the subcell finite-volume one."""
    solver = Semidiscretization(state.mesh, tensors, scheme.model_copy(update={"source": "none"}))
    beta = blending_coefficients(state.U, solver.ops, scheme.shock_capture)
    if not np.any(beta > 0.0):
        return rhs_dg
    interface = solver.interface_fluctuations(state.U)
    fv = subcell_fv_rhs(state.U, solver.ops, state.dx, interface, solver._surface)
    return blend(rhs_dg, fv, beta)


def entropy_production(state_or_U, solver: Semidiscretization, dU: np.ndarray) -> float:
    """sum omega_i dx/2 w(U_i) . dU_i, the discrete entropy rate of the right-hand side."""
    U = state_or_U.U if isinstance(state_or_U, MeshState) else state_or_U
    w = entropy_vars(U, solver.physics)
    return float(solver.mesh.integrate(np.sum(w * dU, axis=-1)))
