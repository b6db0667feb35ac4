"""
Shock Capture Module
Modal smoothness indicator on u_m^3 and the first-order subcell
finite-volume operator blended into the DG right-hand side
"""

import logging
from typing import Callable

import numpy as np

from src.physics.fluxes import Fluctuation
from src.solver.operators import SpectralOperators
from src.utils.config import ShockCaptureParams

logger = logging.getLogger(__name__)

# logistic sharpness ln((1 - 1e-4) / 1e-4)
SHARPNESS = np.log((1.0 - 1e-4) / 1e-4)

FluctuationFn = Callable[[np.ndarray, np.ndarray], Fluctuation]


def indicator_threshold(P: int, params: ShockCaptureParams) -> float:
    return params.threshold_scale * 10.0 ** (-params.threshold_exponent * (P + 1) ** 0.25)


def modal_energy(indicator: np.ndarray, ops: SpectralOperators) -> np.ndarray:
    """
    Share of the highest modes in the modal energy of each element.

    indicator has shape (K, P+1). For P = 1 only the top-mode share is used,
    the second share is identically one there.
    """
    modes = ops.to_modal(indicator)
    squared = modes * modes
    total = np.sum(squared, axis=-1)
    clip1 = np.sum(squared[:, :-1], axis=-1)

    with np.errstate(divide="ignore", invalid="ignore"):
        energy = np.where(total > 0.0, (total - clip1) / total, 0.0)
        if ops.P >= 2:
            clip2 = np.sum(squared[:, :-2], axis=-1)
            second = np.where(clip1 > 0.0, (clip1 - clip2) / clip1, 0.0)
            energy = np.maximum(energy, second)
    return energy


def blending_coefficients(
    U: np.ndarray, ops: SpectralOperators, params: ShockCaptureParams
) -> np.ndarray:
    """Per-element blending factor in [0, alpha_max]."""
    um = U[..., 1] / U[..., 0]
    energy = modal_energy(um**3, ops)
    threshold = indicator_threshold(ops.P, params)

    exponent = np.clip(-SHARPNESS / threshold * (energy - threshold), -700.0, 700.0)
    beta = 1.0 / (1.0 + np.exp(exponent))
    beta = np.where(beta < params.alpha_min, 0.0, beta)
    beta = np.where(beta > 1.0 - params.alpha_min, 1.0, beta)
    beta = np.minimum(beta, params.alpha_max)

    if params.smooth and beta.size > 1:
        neighbours = 0.5 * np.maximum(np.roll(beta, 1), np.roll(beta, -1))
        beta = np.maximum(beta, neighbours)
        beta = np.minimum(beta, params.alpha_max)
    return beta


def subcell_fv_rhs(
    U: np.ndarray,
    ops: SpectralOperators,
    dx: float,
    interface: Fluctuation,
    fluctuations: FluctuationFn,
) -> np.ndarray:
    """
    First-order finite volumes on the LGL subcells of every element.

    `interface` holds the element-interface fluctuations (entry k sits between
    element k and k+1), shared with the DG surface term.
    """
    P = ops.P
    left_state, right_state = U[:, :-1], U[:, 1:]
    inner = fluctuations(left_state, right_state)

    incoming = np.zeros_like(U)
    incoming[:, 1:] += inner.dplus
    incoming[:, 0] += np.roll(interface.dplus, 1, axis=0)
    incoming[:, :-1] += inner.dminus
    incoming[:, P] += interface.dminus

    return -(2.0 / dx) * incoming / ops.weights[None, :, None]


def blend(rhs_dg: np.ndarray, rhs_fv: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """(1 - beta) DG + beta FV, touching only elements with beta > 0."""
    out = rhs_dg.copy()
    active = beta > 0.0
    if np.any(active):
        b = beta[active][:, None, None]
        out[active] = (1.0 - b) * rhs_dg[active] + b * rhs_fv[active]
    return out
