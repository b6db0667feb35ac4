import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.moments.basis import build_tensors
from src.physics.fluxes import (
    apply_es_dissipation,
    ec_flux,
    ec_fluctuations,
    entropy_condition_residual,
    es_dissipation_matrix,
    es_fluctuations,
    rusanov_fluctuations,
    surface_fluctuations,
)
from src.physics.model import (
    entropy_flux,
    entropy_potential,
    entropy_vars,
    nonconservative_product,
    physical_flux,
    primitive_to_conserved,
)
from src.runner.verify import random_states
from src.utils.config import PhysicsParams
from src.utils.errors import ConfigurationError


def lake_pair(N=2, H0=1.75, bL=0.2, bR=0.9):
    uL = np.zeros(N + 3)
    uR = np.zeros(N + 3)
    uL[0], uL[-1] = H0 - bL, bL
    uR[0], uR[-1] = H0 - bR, bR
    return uL, uR


@pytest.mark.parametrize("model", ["swme", "swlme"])
def test_ec_flux_consistency(rng, model):
    T = build_tensors(3)
    p = PhysicsParams(model=model)
    u = random_states(rng, 200, 3)
    assert_allclose(ec_flux(u, u, T, p), physical_flux(u, T, p), rtol=1e-13, atol=1e-12)


def test_ec_flux_symmetric(rng, swme):
    T = build_tensors(2)
    uL = random_states(rng, 100, 2)
    uR = random_states(rng, 100, 2)
    assert np.array_equal(ec_flux(uL, uR, T, swme), ec_flux(uR, uL, T, swme))


@pytest.mark.parametrize("model", ["swme", "swlme"])
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_ec_flux_entropy_condition(rng, model, N):
    T = build_tensors(N)
    p = PhysicsParams(model=model)
    uL = random_states(rng, 2000, N)
    uR = random_states(rng, 2000, N)
    residual = entropy_condition_residual(uL, uR, T, p)
    jump_w = entropy_vars(uR, p) - entropy_vars(uL, p)
    scale = (
        1.0
        + np.abs(np.sum(jump_w * ec_flux(uL, uR, T, p), axis=-1))
        + np.abs(entropy_flux(uR, T, p) - entropy_flux(uL, T, p))
    )
    assert np.max(np.abs(residual) / scale) <= 1e-12


def test_ec_fluctuations_vanish_for_equal_states(rng, swme):
    T = build_tensors(2)
    u = random_states(rng, 50, 2)
    fl = ec_fluctuations(u, u, T, swme)
    assert_allclose(fl.dminus, 0.0, atol=1e-12)
    assert_allclose(fl.dplus, 0.0, atol=1e-12)


@pytest.mark.parametrize("fluctuations", [ec_fluctuations, es_fluctuations])
def test_fluctuations_vanish_on_lake_at_rest(fluctuations, swme):
    uL, uR = lake_pair()
    fl = fluctuations(uL, uR, build_tensors(2), swme)
    assert_allclose(fl.dminus, 0.0, atol=1e-14)
    assert_allclose(fl.dplus, 0.0, atol=1e-14)


def test_ec_fluctuations_entropy_balance(rng, swme):
    T = build_tensors(2)
    uL = random_states(rng, 1000, 2)
    uR = random_states(rng, 1000, 2)
    fl = ec_fluctuations(uL, uR, T, swme)
    lhs = np.sum(entropy_vars(uL, swme) * fl.dminus, axis=-1) + np.sum(
        entropy_vars(uR, swme) * fl.dplus, axis=-1
    )
    jump = entropy_flux(uR, T, swme) - entropy_flux(uL, T, swme)
    assert_allclose(lhs, jump, rtol=1e-11, atol=1e-10)


def test_es_dissipation_matrix_at_rest(unit_gravity):
    u = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 0.0, 0.0]))
    Q = es_dissipation_matrix(u, u, unit_gravity)
    assert_allclose(Q, np.diag([1.0, 1.0, 3.0, 5.0, 0.0]), atol=1e-15)


def test_es_dissipation_matrix_free_product(rng, swme):
    uL = random_states(rng, 30, 2)
    uR = random_states(rng, 30, 2)
    jump_w = entropy_vars(uR, swme) - entropy_vars(uL, swme)
    Q = es_dissipation_matrix(uL, uR, swme)
    assert_allclose(
        apply_es_dissipation(uL, uR, jump_w, swme),
        np.einsum("nij,nj->ni", Q, jump_w),
        rtol=1e-13,
        atol=1e-13,
    )


def test_es_dissipation_matrix_inverts_entropy_hessian(rng, swme):
    uL = random_states(rng, 20, 3)
    step = 1e-6 * rng.standard_normal(uL.shape)
    step[:, -1] = 0.0
    uR = uL + step
    jump_w = entropy_vars(uR, swme) - entropy_vars(uL, swme)
    mapped = apply_es_dissipation(uL, uR, jump_w, swme)
    assert_allclose(mapped[:, :-1], step[:, :-1], rtol=0.0, atol=1e-10)


def test_es_dissipation_is_positive_semidefinite(rng, swme):
    uL = random_states(rng, 1000, 3)
    uR = random_states(rng, 1000, 3)
    jump_w = entropy_vars(uR, swme) - entropy_vars(uL, swme)
    quadratic = np.sum(jump_w * apply_es_dissipation(uL, uR, jump_w, swme), axis=-1)
    assert np.min(quadratic) >= -1e-12


def test_es_fluctuations_dissipate_entropy(rng, swme):
    T = build_tensors(2)
    uL = random_states(rng, 1000, 2)
    uR = random_states(rng, 1000, 2)
    fl = es_fluctuations(uL, uR, T, swme)
    lhs = np.sum(entropy_vars(uL, swme) * fl.dminus, axis=-1) + np.sum(
        entropy_vars(uR, swme) * fl.dplus, axis=-1
    )
    jump = entropy_flux(uR, T, swme) - entropy_flux(uL, T, swme)
    # the surface term enters the right-hand side with a minus sign
    assert np.min(lhs - jump) >= -1e-10 * (1.0 + np.max(np.abs(jump)))


def test_es_fluctuations_equal_states(rng, swme):
    T = build_tensors(2)
    u = random_states(rng, 20, 2)
    fl = es_fluctuations(u, u, T, swme)
    assert_allclose(fl.dminus, 0.0, atol=1e-12)
    assert_allclose(fl.dplus, 0.0, atol=1e-12)


def test_rusanov_is_not_well_balanced(swme):
    uL, uR = lake_pair()
    fl = rusanov_fluctuations(uL, uR, build_tensors(2), swme)
    assert abs(fl.dminus[0]) > 1e-3
    assert fl.dminus[-1] == 0.0
    assert fl.dplus[-1] == 0.0


@pytest.mark.parametrize(
    "mode, direct",
    [("ec", ec_fluctuations), ("es", es_fluctuations), ("rusanov", rusanov_fluctuations)],
)
def test_surface_fluctuations_dispatch(rng, swme, mode, direct):
    T = build_tensors(2)
    uL = random_states(rng, 10, 2)
    uR = random_states(rng, 10, 2)
    got = surface_fluctuations(uL, uR, T, swme, mode)
    expected = direct(uL, uR, T, swme)
    assert_allclose(got.dminus, expected.dminus)
    assert_allclose(got.dplus, expected.dplus)


def test_surface_fluctuations_unknown_mode(rng, swme):
    u = random_states(rng, 2, 2)
    with pytest.raises(ConfigurationError):
        surface_fluctuations(u, u, build_tensors(2), swme, "roe")


def test_mismatched_moment_counts(rng, swme):
    with pytest.raises(ValueError):
        ec_flux(random_states(rng, 3, 2), random_states(rng, 3, 3), build_tensors(2), swme)


@pytest.mark.parametrize("fluctuations", [ec_fluctuations, es_fluctuations, rusanov_fluctuations])
@pytest.mark.parametrize("model", ["swme", "swlme"])
def test_fluctuations_are_path_conservative(rng, fluctuations, model):
    T = build_tensors(3)
    p = PhysicsParams(model=model)
    uL = random_states(rng, 500, 3)
    uR = random_states(rng, 500, 3)
    jump = uR - uL
    fl = fluctuations(uL, uR, T, p)
    expected = (
        physical_flux(uR, T, p)
        - physical_flux(uL, T, p)
        + 0.5 * (nonconservative_product(uL, jump, T, p) + nonconservative_product(uR, jump, T, p))
    )
    assert_allclose(fl.dminus + fl.dplus, expected, rtol=1e-12, atol=1e-10)


def relative_residual(uL, uR, T, p):
    jump_potential = entropy_potential(uR, T, p) - entropy_potential(uL, T, p)
    jump_w = entropy_vars(uR, p) - entropy_vars(uL, p)
    scale = (
        1.0
        + np.abs(jump_potential)
        + np.abs(np.sum(jump_w * ec_flux(uL, uR, T, p), axis=-1))
        + np.abs(entropy_flux(uR, T, p) - entropy_flux(uL, T, p))
    )
    return entropy_condition_residual(uL, uR, T, p) / scale


def test_entropy_condition_without_moments(rng):
    T = build_tensors(2)
    uL = random_states(rng, 1000, 2)
    uR = random_states(rng, 1000, 2)
    uL[:, 2:-1] = 0.0
    uR[:, 2:-1] = 0.0
    for model in ("swme", "swlme"):
        residual = relative_residual(uL, uR, T, PhysicsParams(model=model))
        assert np.max(np.abs(residual)) <= 1e-12


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_entropy_condition_tensor_terms(rng, N):
    """The A and B contributions balance on their own."""
    T = build_tensors(N)
    uL = random_states(rng, 1000, N)
    uR = random_states(rng, 1000, N)
    nonlinear = relative_residual(uL, uR, T, PhysicsParams(model="swme"))
    linear = relative_residual(uL, uR, T, PhysicsParams(model="swlme"))
    assert np.max(np.abs(linear)) <= 1e-12
    assert np.max(np.abs(nonlinear - linear)) <= 2e-12
