"""
Interface Fluxes Module
Entropy-conservative two-point flux, path-conservative fluctuations (linear
path, trapezoidal rule) and their entropy-stable and Rusanov variants
"""

import logging
from typing import NamedTuple

import numpy as np

from src.moments.basis import MomentTensors
from src.physics.model import (
    entropy_potential,
    entropy_vars,
    max_abs_eigenvalue,
    moment_count,
    nonconservative_product,
    physical_flux,
    primitive_parts,
    scaling_factors,
)
from src.utils.config import FluxMode, PhysicsParams
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

FLUX_MODES = ("ec", "es", "rusanov")


class Fluctuation(NamedTuple):
    dminus: np.ndarray
    dplus: np.ndarray


def _avg(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return 0.5 * (left + right)


def _check_pair(uL: np.ndarray, uR: np.ndarray, T: MomentTensors) -> None:
    NL, NR = moment_count(uL), moment_count(uR)
    if NL != NR or NL != T.N:
        raise ValueError(f"moment counts differ: left={NL}, right={NR}, tensors={T.N}")


def ec_flux(
    uL: np.ndarray, uR: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> np.ndarray:
    """
    Entropy-conservative two-point flux.

    Built from arithmetic averages only, so ec_flux(uL, uR) == ec_flux(uR, uL)
    holds bitwise. The momentum averages use the stored hu, not h*u.
    """
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    _check_pair(uL, uR, T)
    _, umL, aL, _ = primitive_parts(uL, p.h_min)
    _, umR, aR, _ = primitive_parts(uR, p.h_min)
    r = scaling_factors(T.N)

    hu = _avg(uL[..., 1], uR[..., 1])
    halpha = _avg(uL[..., 2:-1], uR[..., 2:-1])
    um = _avg(umL, umR)
    alpha = _avg(aL, aR)

    f = np.zeros(np.broadcast_shapes(uL.shape, uR.shape))
    f[..., 0] = hu
    f[..., 1] = hu * um + np.sum(halpha * alpha / r, axis=-1)
    f[..., 2:-1] = hu[..., None] * alpha + halpha * um[..., None]
    if p.nonlinear_moments:
        f[..., 2:-1] += np.einsum("ijk,...j,...k->...i", T.A, halpha, alpha)
    return f


def ec_fluctuations(
    uL: np.ndarray, uR: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> Fluctuation:
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    fstar = ec_flux(uL, uR, T, p)
    jump = uR - uL
    dminus = fstar - physical_flux(uL, T, p) + 0.5 * nonconservative_product(uL, jump, T, p)
    dplus = physical_flux(uR, T, p) - fstar + 0.5 * nonconservative_product(uR, jump, T, p)
    return Fluctuation(dminus, dplus)


def _dissipation_averages(uL: np.ndarray, uR: np.ndarray, p: PhysicsParams):
    """Averaged y = (1, u_m, alpha) and z = (0, gh, (2i+1)gh) of the entropy Hessian inverse."""
    hL, umL, aL, _ = primitive_parts(np.asarray(uL, dtype=float), p.h_min)
    hR, umR, aR, _ = primitive_parts(np.asarray(uR, dtype=float), p.h_min)
    N = aL.shape[-1]
    h = _avg(hL, hR)
    um = _avg(umL, umR)
    alpha = _avg(aL, aR)

    shape = np.broadcast_shapes(np.shape(um), alpha.shape[:-1]) + (N + 2,)
    y = np.empty(shape)
    y[..., 0] = 1.0
    y[..., 1] = um
    y[..., 2:] = alpha
    z = np.empty(shape)
    # z_1 = 0, not 1: only then is H the inverse entropy Hessian,
    # i.e. diag(H, 1)[[w]] -> [[u]] as uR -> uL (H_11 = 1 at rest with g = 1)
    z[..., 0] = 0.0
    z[..., 1] = p.g * h
    z[..., 2:] = p.g * h[..., None] * scaling_factors(N)
    return y, z


def es_dissipation_matrix(uL: np.ndarray, uR: np.ndarray, p: PhysicsParams) -> np.ndarray:
    """block-diag(H, 0) with H = ({y}{y}^T + diag({z})) / g."""
    y, z = _dissipation_averages(uL, uR, p)
    n = y.shape[-1]
    Q = np.zeros(y.shape[:-1] + (n + 1, n + 1))
    Q[..., :n, :n] = y[..., :, None] * y[..., None, :]
    idx = np.arange(n)
    Q[..., idx, idx] += z
    Q[..., :n, :n] /= p.g
    return Q


def apply_es_dissipation(
    uL: np.ndarray, uR: np.ndarray, jump_w: np.ndarray, p: PhysicsParams
) -> np.ndarray:
    """Matrix-free product es_dissipation_matrix(uL, uR) @ jump_w."""
    y, z = _dissipation_averages(uL, uR, p)
    dw = jump_w[..., :-1]
    out = np.zeros(np.broadcast_shapes(y.shape[:-1] + (y.shape[-1] + 1,), jump_w.shape))
    out[..., :-1] = (y * np.sum(y * dw, axis=-1, keepdims=True) + z * dw) / p.g
    return out


def interface_wave_speed(uL: np.ndarray, uR: np.ndarray, p: PhysicsParams) -> np.ndarray:
    return np.maximum(max_abs_eigenvalue(uL, p), max_abs_eigenvalue(uR, p))


def es_fluctuations(
    uL: np.ndarray, uR: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> Fluctuation:
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    ec = ec_fluctuations(uL, uR, T, p)
    jump_w = entropy_vars(uR, p) - entropy_vars(uL, p)
    lam = interface_wave_speed(uL, uR, p)
    diss = 0.5 * lam[..., None] * apply_es_dissipation(uL, uR, jump_w, p)
    return Fluctuation(ec.dminus - diss, ec.dplus + diss)


def rusanov_fluctuations(
    uL: np.ndarray, uR: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> Fluctuation:
    """Dissipation on the jump of conserved variables; not well-balanced over varying b."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    ec = ec_fluctuations(uL, uR, T, p)
    lam = interface_wave_speed(uL, uR, p)
    diss = 0.5 * lam[..., None] * (uR - uL)
    diss[..., -1] = 0.0
    return Fluctuation(ec.dminus - diss, ec.dplus + diss)


_SURFACE_FLUCTUATIONS = {
    "ec": ec_fluctuations,
    "es": es_fluctuations,
    "rusanov": rusanov_fluctuations,
}


def surface_fluctuations(
    uL: np.ndarray,
    uR: np.ndarray,
    T: MomentTensors,
    p: PhysicsParams,
    flux_mode: FluxMode = "es",
) -> Fluctuation:
    try:
        fluctuation = _SURFACE_FLUCTUATIONS[flux_mode]
    except KeyError:
        raise ConfigurationError(
            f"Unknown flux mode '{flux_mode}', expected one of {FLUX_MODES}"
        ) from None
    return fluctuation(uL, uR, T, p)


def entropy_condition_residual(
    uL: np.ndarray, uR: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> np.ndarray:
    """[[w]].f_ec - {w^T B}[[u]] - [[Psi]], Psi = w^T f - F; zero for an EC flux."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    wL, wR = entropy_vars(uL, p), entropy_vars(uR, p)
    jump = uR - uL
    noncons = 0.5 * (
        np.sum(wL * nonconservative_product(uL, jump, T, p), axis=-1)
        + np.sum(wR * nonconservative_product(uR, jump, T, p), axis=-1)
    )
    potential_jump = entropy_potential(uR, T, p) - entropy_potential(uL, T, p)
    return np.sum((wR - wL) * ec_flux(uL, uR, T, p), axis=-1) - noncons - potential_jump
