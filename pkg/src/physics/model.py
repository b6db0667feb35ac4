"""
Shallow Water Moment Model
Pointwise physics of the augmented moment system in the flat layout
(h, hu, halpha_1..N, b). Every function accepts arrays with arbitrary
leading axes and acts on the last one.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src.moments.basis import MomentTensors
from src.utils.config import PhysicsParams
from src.utils.errors import DryStateError

logger = logging.getLogger(__name__)

DEFAULT_H_MIN = 1e-10


def moment_count(u: np.ndarray) -> int:
    nvar = np.shape(u)[-1]
    if nvar < 4:
        raise ValueError(f"state needs at least 4 components, got {nvar}")
    return nvar - 3


def scaling_factors(N: int) -> np.ndarray:
    return 2.0 * np.arange(1, N + 1) + 1.0


def split_state(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Views (h, hu, halpha, b) of a flat-layout state."""
    N = moment_count(u)
    return u[..., 0], u[..., 1], u[..., 2 : N + 2], u[..., N + 2]


def locate_dry(h: np.ndarray, h_min: float) -> Optional[Tuple[int, ...]]:
    """Index of the first node with h <= h_min (NaN counts as dry), or None."""
    h = np.asarray(h)
    dry = ~(h > h_min)
    if not np.any(dry):
        return None
    return tuple(int(i) for i in np.argwhere(dry)[0])


def check_depth(h: np.ndarray, h_min: float) -> None:
    where = locate_dry(h, h_min)
    if where is None:
        return
    value = np.asarray(h)[where]
    raise DryStateError(f"water height {value:.3e} at or below threshold {h_min:.1e}")


def _check_tensors(u: np.ndarray, T: MomentTensors) -> int:
    N = moment_count(u)
    if N != T.N:
        raise ValueError(f"state carries {N} moments but tensors were built for N={T.N}")
    return N


def primitive_parts(
    u: np.ndarray, h_min: float = DEFAULT_H_MIN
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(h, u_m, alpha, b) of a conserved state, after the dry-state check."""
    h, hu, halpha, b = split_state(u)
    check_depth(h, h_min)
    return h, hu / h, halpha / h[..., None], b


def conserved_to_primitive(u: np.ndarray, h_min: float = DEFAULT_H_MIN) -> np.ndarray:
    h, um, alpha, b = primitive_parts(np.asarray(u, dtype=float), h_min)
    return np.concatenate([h[..., None], um[..., None], alpha, b[..., None]], axis=-1)


def primitive_to_conserved(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    h, um, alpha, b = split_state(q)
    return np.concatenate(
        [h[..., None], (h * um)[..., None], h[..., None] * alpha, b[..., None]], axis=-1
    )


def total_water_height(u: np.ndarray) -> np.ndarray:
    return u[..., 0] + u[..., -1]


def pressure_moments(h: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Psi = h * sum_i alpha_i^2 / (2i+1)."""
    r = scaling_factors(alpha.shape[-1])
    return h * np.sum(alpha * alpha / r, axis=-1)


def physical_flux(u: np.ndarray, T: MomentTensors, p: PhysicsParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    _check_tensors(u, T)
    h, um, alpha, _ = primitive_parts(u, p.h_min)
    hu = u[..., 1]

    f = np.zeros_like(u)
    f[..., 0] = hu
    f[..., 1] = hu * um + pressure_moments(h, alpha)
    f[..., 2:-1] = 2.0 * hu[..., None] * alpha
    if p.nonlinear_moments:
        f[..., 2:-1] += h[..., None] * np.einsum("ijk,...j,...k->...i", T.A, alpha, alpha)
    return f


def nonconservative_product(
    u: np.ndarray, du: np.ndarray, T: MomentTensors, p: PhysicsParams
) -> np.ndarray:
    """B(u) du for the augmented system; the pressure and bottom slope live in the momentum row."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    _check_tensors(u, T)
    h, um, alpha, _ = primitive_parts(u, p.h_min)
    du_halpha = du[..., 2:-1]

    out = np.zeros(np.broadcast_shapes(u.shape, du.shape))
    out[..., 1] = p.g * h * (du[..., 0] + du[..., -1])
    out[..., 2:-1] = -um[..., None] * du_halpha
    if p.nonlinear_moments:
        out[..., 2:-1] += np.einsum("ijk,...k,...j->...i", T.B, alpha, du_halpha)
    return out


def entropy(u: np.ndarray, p: PhysicsParams) -> np.ndarray:
    """Total energy density."""
    h, um, alpha, b = primitive_parts(np.asarray(u, dtype=float), p.h_min)
    return (
        0.5 * h * um * um
        + 0.5 * pressure_moments(h, alpha)
        + 0.5 * p.g * h * h
        + p.g * h * b
    )


def _cubic_moment_sum(tensor: np.ndarray, h: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    r = scaling_factors(alpha.shape[-1])
    scaled = tensor / r[:, None, None]
    return h * np.einsum("ijk,...i,...j,...k->...", scaled, alpha, alpha, alpha)


def entropy_flux(u: np.ndarray, T: MomentTensors, p: PhysicsParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    _check_tensors(u, T)
    h, um, alpha, b = primitive_parts(u, p.h_min)
    F = (
        0.5 * h * um**3
        + 1.5 * um * pressure_moments(h, alpha)
        + p.g * h * um * (h + b)
    )
    if p.nonlinear_moments:
        F = F + _cubic_moment_sum(T.A + T.B, h, alpha)
    return F


def entropy_vars(u: np.ndarray, p: PhysicsParams) -> np.ndarray:
    """w = (-u^2/2 - sum alpha^2/(2r) + g(h+b), u_m, alpha_i/(2i+1), b)."""
    h, um, alpha, b = primitive_parts(np.asarray(u, dtype=float), p.h_min)
    r = scaling_factors(alpha.shape[-1])
    w = np.empty(np.shape(u))
    w[..., 0] = -0.5 * um * um - 0.5 * np.sum(alpha * alpha / r, axis=-1) + p.g * (h + b)
    w[..., 1] = um
    w[..., 2:-1] = alpha / r
    w[..., -1] = b
    return w


def entropy_potential(u: np.ndarray, T: MomentTensors, p: PhysicsParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    _check_tensors(u, T)
    h, um, alpha, _ = primitive_parts(u, p.h_min)
    potential = um * pressure_moments(h, alpha)
    if p.nonlinear_moments:
        potential = potential - _cubic_moment_sum(T.B, h, alpha)
    return potential


def max_abs_eigenvalue(u: np.ndarray, p: PhysicsParams) -> np.ndarray:
    """Linearized-model spectral bound |u_m| + sqrt(gh + sum 3 alpha_i^2/(2i+1))."""
    h, um, alpha, _ = primitive_parts(np.asarray(u, dtype=float), p.h_min)
    return np.abs(um) + np.sqrt(p.g * h + 3.0 * pressure_moments(h, alpha) / h)


def friction_source(u: np.ndarray, T: MomentTensors, p: PhysicsParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    N = _check_tensors(u, T)
    h, um, alpha, _ = primitive_parts(u, p.h_min)
    friction = p.friction
    S = np.zeros_like(u)
    if friction.kind == "none":
        return S

    slip_velocity = um + np.sum(alpha, axis=-1)
    if friction.kind == "slip":
        bottom = -(friction.nu / friction.slip_length) * slip_velocity
    else:
        bottom = (
            -(friction.rho * p.g * friction.manning_n**2)
            / np.cbrt(h)
            * np.abs(slip_velocity)
            * slip_velocity
        )

    S[..., 1] = bottom
    S[..., 2:-1] = bottom[..., None] * scaling_factors(N)
    S[..., 2:-1] -= (friction.nu / h)[..., None] * np.einsum("ij,...j->...i", T.C, alpha)
    return S
