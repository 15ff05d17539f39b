import math

import numpy as np
import pytest

from faultcontact.core.errors import InconsistentStateError
from faultcontact.core.system_models import ContactState, FaceContactState
from faultcontact.models.grid_models import FaultPlane
from faultcontact.models.problem_models import FrictionParams
from faultcontact.services.bubble_service import bubble_trace_integrals
from faultcontact.services.contact_service import (
    ball_projection,
    build_jump_operators,
    check_kkt,
    classify_state,
    evaluate_tractions,
    face_average_jumps,
    fault_pressure_residual,
    normal_projection,
    relative_traction_change,
    tangent_derivatives,
    tangential_projection,
    update_normal,
    update_tangential,
)
from faultcontact.services.mesh_service import build_structured_hex_grid

FRICTION = FrictionParams.from_degrees(0.2, 30.0)


def single_face_mesh():
    return build_structured_hex_grid(
        extents=(1.0, 1.0, 2.0), divisions=(1, 1, 2), fault_planes=[FaultPlane(axis="z", coordinate=1.0)]
    )


def test_ball_projection():
    t = np.array([[3.0, 4.0], [0.3, 0.4], [1.0, 0.0]])
    out = ball_projection(t, np.array([1.0, 1.0, 0.0]))
    assert np.allclose(out, [[0.6, 0.8], [0.3, 0.4], [0.0, 0.0]])


def test_update_maps():
    assert update_normal(-1.0, 0.5, 4.0) == 0.0
    assert np.isclose(update_normal(-1.0, -0.1, 4.0), -1.4)

    friction = FrictionParams.from_degrees(0.5, 45.0)
    t_T = update_tangential([[1.0, 0.0]], [[0.5, 0.0]], np.array([2.0]), np.array([-1.0]), friction)
    assert np.allclose(t_T, [[1.5, 0.0]])
    inside = update_tangential([[0.1, 0.0]], [[0.1, 0.1]], np.array([2.0]), np.array([-1.0]), friction)
    assert np.allclose(inside, [[0.3, 0.2]])


def test_classify_state():
    states = classify_state(
        sigma_N=np.array([0.1, -1.0, -1.0]),
        trial_T=np.array([[5.0, 0.0], [0.5, 0.0], [2.0, 0.0]]),
        tau=np.array([1.0, 1.0, 1.0]),
        eps_T=np.ones(3),
    )
    assert ContactState.labels(states) == ["open", "stick", "slip"]


@pytest.mark.parametrize(
    "traction, g, expected",
    [
        ([-1.0, 0.8, 0.3], [0.01, 0.2, -0.1], ContactState.SLIP),
        ([-1.0, 0.1, 0.0], [0.01, 0.02, 0.01], ContactState.STICK),
        ([-0.1, 0.0, 0.0], [0.2, 0.0, 0.0], ContactState.OPEN),
    ],
)
@pytest.mark.parametrize("symmetric", [False, True])
def test_tangent_matches_finite_differences(traction, g, expected, symmetric):
    traction = np.array([traction])
    g = np.array([g])
    eps_N, eps_T = np.array([3.0]), np.array([2.0])
    prev = np.zeros((1, 2))

    update = evaluate_tractions(traction, g, prev, eps_N, eps_T, FRICTION, symmetric)
    assert update.state[0] == expected

    h = 1e-7
    fd = np.zeros((3, 3))
    for k in range(3):
        step = np.zeros((1, 3))
        step[0, k] = h
        up = evaluate_tractions(traction, g + step, prev, eps_N, eps_T, FRICTION, symmetric, tangent=False)
        down = evaluate_tractions(traction, g - step, prev, eps_N, eps_T, FRICTION, symmetric, tangent=False)
        fd[:, k] = (up.t_hat[0] - down.t_hat[0]) / (2 * h)
    assert np.allclose(update.tangent[0], fd, atol=1e-6)

    trial = traction[0, 1:] + eps_T[0] * g[0, 1:]
    ops = tangent_derivatives(update.state[0], trial, update.tau_max[0], 3.0, 2.0, FRICTION, symmetric)
    assert np.allclose(ops.local_matrix(), update.tangent[0])


def random_face_states(rng, wanted, symmetric, count=100, pool=20000, margin=1e-3):
    """``count`` random (traction, g, g_T_prev, eps_N, eps_T) samples in state ``wanted``, away from the kinks."""
    traction = np.column_stack([rng.uniform(-2.0, -0.05, pool), rng.uniform(-1.5, 1.5, (pool, 2))])
    g = rng.uniform(-0.3, 0.3, (pool, 3))
    prev = rng.uniform(-0.1, 0.1, (pool, 2))
    eps_N, eps_T = rng.uniform(1.0, 5.0, pool), rng.uniform(1.0, 5.0, pool)

    update = evaluate_tractions(traction, g, prev, eps_N, eps_T, FRICTION, symmetric, tangent=False)
    sigma_N = traction[:, 0] + eps_N * g[:, 0]
    trial = np.linalg.norm(traction[:, 1:] + eps_T[:, None] * (g[:, 1:] - prev), axis=1)
    clear = (np.abs(sigma_N) > margin) & (np.abs(trial - update.tau_max) > margin) & (trial > margin)
    picked = np.flatnonzero(clear & (update.state == wanted))[:count]
    assert len(picked) == count
    return traction[picked], g[picked], prev[picked], eps_N[picked], eps_T[picked]


@pytest.mark.parametrize("wanted", [ContactState.STICK, ContactState.SLIP, ContactState.OPEN])
@pytest.mark.parametrize("symmetric", [False, True])
def test_tangent_matches_finite_differences_on_random_states(rng, wanted, symmetric):
    traction, g, prev, eps_N, eps_T = random_face_states(rng, wanted, symmetric)

    update = evaluate_tractions(traction, g, prev, eps_N, eps_T, FRICTION, symmetric)
    assert np.all(update.state == wanted)

    h = 1e-7
    fd = np.zeros((len(g), 3, 3))
    for k in range(3):
        step = np.zeros_like(g)
        step[:, k] = h
        up = evaluate_tractions(traction, g + step, prev, eps_N, eps_T, FRICTION, symmetric, tangent=False)
        down = evaluate_tractions(traction, g - step, prev, eps_N, eps_T, FRICTION, symmetric, tangent=False)
        fd[:, :, k] = (up.t_hat - down.t_hat) / (2 * h)
    assert np.allclose(update.tangent, fd, atol=1e-5)


def test_slip_tangent_reported_along_the_trial_direction():
    t_hat = evaluate_tractions(
        np.array([[-1.0, 3.0, 4.0]]), np.zeros((1, 3)), np.zeros((1, 2)), np.ones(1), np.ones(1), FRICTION
    ).t_hat[0]
    tau = 0.2 + math.tan(math.radians(30.0))
    assert np.isclose(t_hat[0], -1.0)
    assert np.allclose(t_hat[1:], tau * np.array([0.6, 0.8]))


def test_slip_with_zero_trial_traction_has_no_tangent():
    with pytest.raises(InconsistentStateError):
        tangent_derivatives(ContactState.SLIP, np.zeros(2), 1.0, 1.0, 1.0, FRICTION)


def test_tangent_operators_in_global_components():
    ops = tangent_derivatives(ContactState.SLIP, np.array([1.0, 1.0]), 0.5, 2.0, 3.0, FRICTION)
    assert np.allclose(sum(ops.global_operators(np.eye(3))), ops.local_matrix())


def test_projections():
    n = np.array([0.0, 0.0, 1.0])
    v = np.array([1.0, 2.0, 3.0])
    assert np.allclose(normal_projection(n) @ v, [0.0, 0.0, 3.0])
    assert np.allclose(tangential_projection(n) @ v, [1.0, 2.0, 0.0])
    P = tangential_projection([0.6, 0.8, 0.0])
    assert np.allclose(P @ P, P)
    assert np.allclose(P + normal_projection([0.6, 0.8, 0.0]), np.eye(3))


def test_jump_operators_measure_the_plus_minus_difference():
    mesh = single_face_mesh()
    ops = build_jump_operators(mesh)
    assert ops.G.shape == (3, mesh.n_dofs)

    U = np.zeros((mesh.n_nodes, 3))
    U[mesh.faults.side_nodes(0, True)] = [0.1, -0.2, 0.3]
    # (g_N, g_1, g_2) with n = z, m1 = x, m2 = y
    assert np.allclose(ops.averages(U.ravel()), [[0.3, 0.1, -0.2]])

    g_N, g_T = face_average_jumps(mesh, 0, U.ravel())
    assert np.isclose(g_N, 0.3)
    assert np.allclose(g_T, [0.1, -0.2])
    _, dg_T = face_average_jumps(mesh, 0, U.ravel(), u_prev=U.ravel())
    assert np.allclose(dg_T, 0.0)


def test_rigid_motion_has_no_jump():
    mesh = single_face_mesh()
    ops = build_jump_operators(mesh)
    omega = np.array([0.01, -0.02, 0.03])
    u = (np.cross(omega, mesh.nodes) + [0.5, 0.2, -0.1]).ravel()
    assert np.allclose(ops.averages(u), 0.0, atol=1e-14)


def test_bubble_columns_of_the_jump_map():
    mesh = single_face_mesh()
    ops = build_jump_operators(mesh, bubble_trace_integrals(mesh))
    assert ops.G.shape == (3, mesh.n_dofs + 6)
    x = np.zeros(mesh.n_dofs + 6)
    x[mesh.n_dofs + 3] = 1.0  # plus-side bubble, x component
    assert np.allclose(ops.averages(x), [[0.0, 4 / 9, 0.0]])
    x[:] = 0.0
    x[mesh.n_dofs + 2] = 1.0  # minus-side bubble, z component
    assert np.allclose(ops.averages(x), [[-4 / 9, 0.0, 0.0]])


def test_fault_pressure_pushes_the_sides_apart():
    mesh = single_face_mesh()
    ops = build_jump_operators(mesh)
    r = fault_pressure_residual(ops, mesh.faults.tag, {0: 2.0}).reshape(-1, 3)
    assert np.allclose(r[mesh.faults.side_nodes(0, True)].sum(axis=0), [0.0, 0.0, -2.0])
    assert np.allclose(r[mesh.faults.side_nodes(0, False)].sum(axis=0), [0.0, 0.0, 2.0])
    assert np.allclose(fault_pressure_residual(ops, mesh.faults.tag, {1: 2.0}), 0.0)


def test_relative_traction_change():
    old = np.array([[-1.0, 0.0, 0.0], [-2.0, 0.5, 0.0]])
    new = np.array([[-1.0, 0.0, 0.0], [-2.0, 0.5, 0.2]])
    assert np.isclose(relative_traction_change(new, old, 1e-12), 0.2 / np.linalg.norm(new[1]))
    assert relative_traction_change(np.zeros((0, 3)), np.zeros((0, 3)), 1.0) == 0.0


def kkt_state(traction, g_N, dg_T, state):
    return FaceContactState(
        traction=np.array(traction, dtype=float),
        g_N=np.array(g_N, dtype=float),
        dg_T=np.array(dg_T, dtype=float),
        state=np.array(state),
        g_T_prev=np.zeros((len(g_N), 2)),
    )


def test_kkt_checks_pass_for_consistent_states():
    friction = FrictionParams.from_degrees(0.0, 30.0)
    tau = math.tan(math.radians(30.0))
    state = kkt_state(
        traction=[[-1.0, 0.1, 0.0], [0.0, 0.0, 0.0], [-1.0, tau, 0.0]],
        g_N=[0.0, 0.2, 0.0],
        dg_T=[[0.0, 0.0], [0.0, 0.0], [0.1, 0.0]],
        state=[ContactState.STICK, ContactState.OPEN, ContactState.SLIP],
    )
    assert check_kkt(state, friction, np.ones(3)).all_passed


def test_kkt_checks_flag_each_violation():
    friction = FrictionParams.from_degrees(0.0, 30.0)
    state = kkt_state(
        traction=[[0.5, 0.0, 0.0], [-1.0, 0.0, 0.0], [-1.0, 2.0, 0.0], [-1.0, 0.5, 0.0]],
        g_N=[0.0, -0.1, 0.0, 0.0],
        dg_T=[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-0.1, 0.0]],
        state=[ContactState.OPEN, ContactState.STICK, ContactState.STICK, ContactState.SLIP],
    )
    report = check_kkt(state, friction, np.ones(4))
    assert not report.all_passed
    assert report.normal_sign.tolist() == [False, True, True, True]
    assert report.gap.tolist() == [True, False, True, True]
    assert report.coulomb.tolist() == [False, True, False, True]
    assert report.collinearity.tolist() == [True, True, True, False]
    assert report.passed.tolist() == [False, False, False, False]


@pytest.mark.parametrize(
    "dg_T, aligned",
    [
        ([0.1, 0.0], True),
        ([-0.1, 0.0], False),
        ([0.0, 0.1], False),
        ([0.1, 0.05], False),
        ([0.1, 1e-8], True),
    ],
)
def test_slip_must_point_along_the_tangential_traction(dg_T, aligned):
    friction = FrictionParams.from_degrees(0.0, 30.0)
    tau = math.tan(math.radians(30.0))
    state = kkt_state(traction=[[-1.0, tau, 0.0]], g_N=[0.0], dg_T=[dg_T], state=[ContactState.SLIP])
    assert check_kkt(state, friction, np.ones(1)).collinearity.tolist() == [aligned]
