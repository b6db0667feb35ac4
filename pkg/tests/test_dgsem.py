import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.moments.basis import build_tensors
from src.physics.fluxes import surface_fluctuations
from src.physics.model import entropy_vars, friction_source
from src.scenarios.examples import gaussian_bump, get_scenario
from src.solver.dgsem import (
    Semidiscretization,
    entropy_production,
    semidiscrete_rhs,
    shock_capture_blend,
)
from src.solver.mesh import Mesh, project_initial_condition
from src.solver.operators import build_operators
from src.solver.shock_capture import blend, subcell_fv_rhs
from src.utils.config import FrictionParams, PhysicsParams, SchemeConfig, ShockCaptureParams
from src.utils.errors import ConfigurationError, DryStateError

# a tiny threshold switches blending on wherever the velocity varies
FORCED_CAPTURE = ShockCaptureParams(enabled=True, threshold_scale=1e-12)


def lake_at_rest(N=2, H0=1.75):
    def ic(x):
        b = gaussian_bump(x)
        U = np.zeros(x.shape + (N + 3,))
        U[..., 0] = H0 - b
        U[..., -1] = b
        return U

    return ic


def wavy(N=2):
    """Smooth periodic state on [-1, 1] with varying velocity, moments and bottom."""

    def ic(x):
        h = 1.0 + 0.3 * np.exp(np.cos(np.pi * x) - 1.0)
        U = np.zeros(x.shape + (N + 3,))
        U[..., 0] = h
        U[..., 1] = h * (0.25 + 0.2 * np.sin(np.pi * x))
        U[..., 2] = h * 0.1 * np.cos(np.pi * x)
        if N >= 2:
            U[..., 3] = -0.25 * h
        U[..., -1] = 0.1 * np.sin(np.pi * x)
        return U

    return ic


def roughen(state, seed=7):
    """Break continuity at the element interfaces without drying any node."""
    U = state.U.copy()
    noise = np.random.default_rng(seed).uniform(-0.05, 0.05, U.shape[:2] + (2,))
    U[..., :2] *= 1.0 + noise
    return state.advanced(U, state.t)


def relative_production(solver, state, dU):
    w = entropy_vars(state.U, solver.physics)
    scale = float(solver.mesh.integrate(np.abs(np.sum(w * dU, axis=-1)))) + 1.0
    return abs(entropy_production(state, solver, dU)) / scale


def make_solver(ic, P=3, K=16, domain=(-1.0, 1.0), N=2, **scheme):
    mesh = Mesh(domain[0], domain[1], K, build_operators(P))
    solver = Semidiscretization(mesh, build_tensors(N), SchemeConfig(**scheme))
    return solver, project_initial_condition(ic, mesh)


@pytest.mark.parametrize("flux_mode", ["es", "ec"])
@pytest.mark.parametrize("P", [1, 2, 3, 4])
def test_lake_at_rest_is_preserved(flux_mode, P):
    solver, state = make_solver(
        lake_at_rest(),
        P=P,
        K=32,
        domain=(-4.0, 4.0),
        physics=PhysicsParams(g=9.812),
        flux_mode=flux_mode,
        shock_capture=ShockCaptureParams(enabled=True),
    )
    assert np.max(np.abs(solver.rhs(state.U, 0.0))) <= 1e-11


@pytest.mark.parametrize("flux_mode", ["ec", "es", "rusanov"])
def test_constant_state_is_steady(flux_mode):
    def ic(x):
        U = np.zeros(x.shape + (5,))
        U[..., :4] = [1.3, 0.4, -0.2, 0.1]
        return U

    solver, state = make_solver(ic, flux_mode=flux_mode)
    assert_allclose(solver.rhs(state.U, 0.0), 0.0, atol=1e-12)


def test_rusanov_breaks_lake_at_rest():
    solver, state = make_solver(
        lake_at_rest(),
        K=32,
        domain=(-4.0, 4.0),
        physics=PhysicsParams(g=9.812),
        flux_mode="rusanov",
    )
    assert np.max(np.abs(solver.rhs(state.U, 0.0))) > 1e-6


@pytest.mark.parametrize("model", ["swme", "swlme"])
def test_entropy_conservative_volume_and_surface(model):
    ic = get_scenario("example1").initial_condition
    solver, state = make_solver(
        ic, P=3, K=32, physics=PhysicsParams(g=1.0, model=model), flux_mode="ec"
    )
    state = roughen(state)
    assert relative_production(solver, state, solver.rhs(state.U, 0.0)) <= 1e-12


def test_entropy_conservation_with_bottom_topography():
    solver, state = make_solver(wavy(), P=4, K=8, flux_mode="ec")
    state = roughen(state)
    assert relative_production(solver, state, solver.rhs(state.U, 0.0)) <= 1e-12


def test_single_element_entropy_conservation():
    solver, state = make_solver(wavy(N=1), P=5, K=1, N=1, flux_mode="ec")
    state = roughen(state)
    assert relative_production(solver, state, solver.rhs(state.U, 0.0)) <= 1e-12


def test_entropy_stable_surface_dissipates():
    solver, state = make_solver(wavy(), flux_mode="es")
    state = roughen(state)
    dU = solver.rhs(state.U, 0.0)
    assert entropy_production(state.U, solver, dU) < 0.0


@pytest.mark.parametrize("flux_mode", ["ec", "es", "rusanov"])
def test_mass_conservation_with_blending(flux_mode):
    solver, state = make_solver(wavy(), flux_mode=flux_mode, shock_capture=FORCED_CAPTURE)
    dU = solver.rhs(state.U, 0.0)
    assert np.any(solver.last_blending > 0.0)
    assert abs(float(solver.mesh.integrate(dU[..., 0]))) <= 1e-12
    assert_allclose(dU[..., -1], 0.0)


def test_subcell_blending_leaves_lake_at_rest():
    solver, state = make_solver(
        lake_at_rest(), K=32, domain=(-4.0, 4.0), physics=PhysicsParams(g=9.812)
    )
    dg = solver.rhs(state.U, 0.0)
    interface = solver.interface_fluctuations(state.U)

    def fluctuations(uL, uR):
        return surface_fluctuations(uL, uR, solver.tensors, solver.physics, "es")

    fv = subcell_fv_rhs(state.U, solver.ops, state.dx, interface, fluctuations)
    assert np.max(np.abs(fv)) <= 1e-11
    assert np.max(np.abs(blend(dg, fv, np.full(32, 0.5)))) <= 1e-11


def test_shock_capture_blend_matches_rhs():
    solver, state = make_solver(wavy(), shock_capture=FORCED_CAPTURE)
    plain = make_solver(wavy())[0]
    dg = plain.rhs(state.U, 0.0)
    blended = shock_capture_blend(state, solver.tensors, solver.scheme, dg)
    assert_allclose(blended, solver.rhs(state.U, 0.0), rtol=1e-13, atol=1e-13)


def test_friction_source_is_added():
    physics = PhysicsParams(friction=FrictionParams(kind="slip", nu=0.5))
    with_friction, state = make_solver(wavy(), physics=physics, source="friction")
    without, _ = make_solver(wavy(), physics=physics, source="none")
    diff = with_friction.rhs(state.U, 0.0) - without.rhs(state.U, 0.0)
    assert_allclose(diff, friction_source(state.U, build_tensors(2), physics), atol=1e-12)


def test_manufactured_source_needs_function():
    mesh = Mesh(0.0, 1.0, 4, build_operators(2))
    with pytest.raises(ConfigurationError):
        Semidiscretization(mesh, build_tensors(2), SchemeConfig(source="manufactured"))


def test_manufactured_source_is_evaluated_at_nodes():
    mesh = Mesh(0.0, 1.0, 4, build_operators(2))
    calls = []

    def source(x, t):
        calls.append(t)
        return np.ones(x.shape + (5,))

    solver = Semidiscretization(
        mesh, build_tensors(2), SchemeConfig(source="manufactured"), source_fn=source
    )
    state = project_initial_condition(wavy(), mesh)
    plain = Semidiscretization(mesh, build_tensors(2), SchemeConfig())
    diff = solver.rhs(state.U, 0.3) - plain.rhs(state.U, 0.3)
    assert_allclose(diff, 1.0, atol=1e-12)
    assert calls == [0.3]


def test_threaded_volume_matches_serial():
    serial, state = make_solver(wavy(), K=16)
    threaded, _ = make_solver(wavy(), K=16, workers=4)
    assert_allclose(threaded.rhs(state.U, 0.0), serial.rhs(state.U, 0.0), rtol=0.0, atol=1e-12)


def test_dry_node_reported_with_location():
    solver, state = make_solver(wavy())
    U = state.U.copy()
    U[5, 2, 0] = 0.0
    with pytest.raises(DryStateError) as err:
        solver.rhs(U, 0.25, stage=2)
    assert (err.value.element, err.value.node, err.value.time) == (5, 2, 0.25)


def test_semidiscrete_rhs_wrapper():
    solver, state = make_solver(wavy())
    assert_allclose(
        semidiscrete_rhs(state, solver.tensors, solver.scheme), solver.rhs(state.U, state.t)
    )
