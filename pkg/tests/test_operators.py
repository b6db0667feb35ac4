import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.solver.mesh import Mesh, MeshState, evaluate_at, project_initial_condition, check_wet
from src.solver.operators import build_operators, interpolation_matrix, lgl_nodes_weights
from src.utils.errors import DryStateError


def test_lgl_linear():
    nodes, weights = lgl_nodes_weights(1)
    assert_allclose(nodes, [-1.0, 1.0])
    assert_allclose(weights, [1.0, 1.0])


def test_lgl_quadratic():
    nodes, weights = lgl_nodes_weights(2)
    assert_allclose(nodes, [-1.0, 0.0, 1.0], atol=1e-16)
    assert_allclose(weights, [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0], atol=1e-15)


def test_lgl_cubic_closed_form():
    nodes, weights = lgl_nodes_weights(3)
    assert_allclose(nodes, [-1.0, -1.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0), 1.0], atol=1e-15)
    assert_allclose(weights, [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0], atol=1e-15)


@pytest.mark.parametrize("P", range(1, 9))
def test_sbp_property(P):
    ops = build_operators(P)
    assert ops.sbp_defect() <= 1e-13
    assert np.sum(ops.weights) == pytest.approx(2.0, abs=1e-14)
    assert_allclose(ops.nodes, -ops.nodes[::-1], atol=1e-16)


@pytest.mark.parametrize("P", [1, 3, 6])
def test_derivative_exact_for_polynomials(P):
    ops = build_operators(P)
    x = ops.nodes
    assert_allclose(ops.D @ np.ones_like(x), 0.0, atol=1e-13)
    assert_allclose(ops.D @ x**P, P * x ** (P - 1), atol=1e-11)


def test_degree_zero_rejected():
    with pytest.raises(ValueError):
        build_operators(0)


def test_interpolation_reproduces_polynomials(ops3):
    xi = np.array([-0.9, -0.2, 0.0, 0.35, 1.0])
    values = ops3.nodes**3 - 2.0 * ops3.nodes
    assert_allclose(ops3.interpolate(values, xi), xi**3 - 2.0 * xi, atol=1e-13)
    L = interpolation_matrix(ops3.nodes, ops3.nodes)
    assert_allclose(L, np.eye(4))


def test_modal_transform_of_constant(ops3):
    modes = ops3.to_modal(np.full((2, 4), 3.0))
    assert_allclose(modes[:, 0], 3.0 * np.sqrt(2.0), atol=1e-13)
    assert_allclose(modes[:, 1:], 0.0, atol=1e-13)


def test_mesh_geometry(ops3):
    mesh = Mesh(-1.0, 1.0, 4, ops3)
    assert mesh.dx == pytest.approx(0.5)
    assert mesh.x_nodes.shape == (4, 4)
    assert mesh.x_nodes[0, 0] == pytest.approx(-1.0)
    assert mesh.x_nodes[-1, -1] == pytest.approx(1.0)
    assert mesh.integrate(np.ones((4, 4))) == pytest.approx(2.0)
    assert mesh.integrate(mesh.x_nodes**2) == pytest.approx(2.0 / 3.0)


@pytest.mark.parametrize("x_a, x_b, K", [(1.0, 1.0, 4), (0.0, 1.0, 0)])
def test_mesh_rejects_bad_geometry(ops3, x_a, x_b, K):
    with pytest.raises(ValueError):
        Mesh(x_a, x_b, K, ops3)


def constant_state(x, N=2):
    U = np.zeros(np.shape(x) + (N + 3,))
    U[..., 0] = 2.0
    U[..., 1] = 0.5
    U[..., 2] = -0.1
    return U


def test_project_constant_initial_condition(ops3):
    mesh = Mesh(0.0, 1.0, 5, ops3)
    state = project_initial_condition(constant_state, mesh)
    assert state.U.shape == (5, 4, 5)
    assert state.t == 0.0
    assert_allclose(state.U, constant_state(mesh.x_nodes))


def test_project_rejects_dry_initial_condition(ops3):
    mesh = Mesh(0.0, 1.0, 3, ops3)

    def dry(x):
        U = constant_state(x)
        U[..., 0] = np.where(x > 0.5, 0.0, 1.0)
        return U

    with pytest.raises(DryStateError) as err:
        project_initial_condition(dry, mesh)
    assert err.value.element == 1
    assert err.value.time == 0.0


def test_check_wet_reports_location():
    U = np.ones((3, 2, 4))
    U[2, 1, 0] = -1.0
    with pytest.raises(DryStateError) as err:
        check_wet(U, 1e-10, time=0.5, stage=3)
    assert (err.value.element, err.value.node, err.value.stage) == (2, 1, 3)
    assert "t=0.5" in str(err.value)


def test_evaluate_at_reproduces_smooth_state(ops3):
    mesh = Mesh(0.0, 2.0, 8, ops3)

    def ic(x):
        U = constant_state(x)
        U[..., 0] = 2.0 + 0.1 * x**2
        return U

    state = project_initial_condition(ic, mesh)
    x = np.array([0.1, 0.77, 1.5, 2.0])
    values = evaluate_at(state, x)
    # periodic wrap sends x = 2 to the left end
    assert_allclose(values[:3, 0], 2.0 + 0.1 * x[:3] ** 2, atol=1e-13)
    assert values[3, 0] == pytest.approx(2.0)


def test_mesh_state_advance(ops3):
    mesh = Mesh(0.0, 1.0, 2, ops3)
    state = MeshState(mesh, np.ones((2, 4, 4)))
    later = state.advanced(2.0 * state.U, 0.1)
    assert later.t == 0.1 and state.t == 0.0
    assert later.n_moments == 1
    assert later.advanced_time(0.2).U is later.U
