import math

import numpy as np
import pytest
import scipy.sparse as sp

from faultcontact.core.elements import ElementKind, face_nodes, REFERENCE_NODES
from faultcontact.core.errors import MeshError, SingularBlockError
from faultcontact.core.system_models import FaceContactState
from faultcontact.models.grid_models import FaultPlane
from faultcontact.models.problem_models import (
    DirichletCondition,
    ElasticMaterial,
    FrictionParams,
    LoadStep,
    NeumannCondition,
    PenaltyParams,
    ProblemDefinition,
    SolverConfig,
)
from faultcontact.services.assembly_service import assemble_global, cell_stresses, prepare_system, step_loads
from faultcontact.services.bubble_service import (
    _factor,
    assemble_bubble_blocks,
    bubble_clusters,
    bubble_gradient,
    bubble_trace_integrals,
    bubble_value,
    static_condense,
)
from faultcontact.services.contact_service import interface_tangent
from faultcontact.services.infsup_service import estimate_infsup, infsup_study, two_block_mesh
from faultcontact.services.mesh_service import build_structured_hex_grid
from faultcontact.services.solver_service import newton_step

INTERIOR = {
    ElementKind.HEX8: [0.2, -0.3, 0.1],
    ElementKind.TET4: [0.2, 0.15, 0.3],
    ElementKind.WEDGE6: [0.2, 0.3, 0.1],
}


def two_layer_problem(kind="hex8"):
    mesh = build_structured_hex_grid(
        extents=(2.0, 2.0, 2.0),
        divisions=(2, 2, 2),
        fault_planes=[FaultPlane(axis="z", coordinate=1.0)],
        kind=kind,
    )
    step = LoadStep(
        dirichlet=[DirichletCondition(set="zmin", x=0.0, y=0.0, z=0.0)],
        neumann=[NeumannCondition(set="zmax", traction=[0.1, 0.0, -1.0])],
    )
    return ProblemDefinition(
        mesh=mesh,
        materials={0: ElasticMaterial(E=1.0, nu=0.25)},
        friction=FrictionParams.from_degrees(0.0, 30.0),
        steps=[step],
    )


def test_bubble_value_examples():
    assert np.isclose(bubble_value("hex8", 5, [0.0, 0.0, 1.0]), 1.0)
    assert np.isclose(bubble_value("tet4", 0, [1 / 3, 1 / 3, 1 / 3]), 1 / 27)
    assert np.isclose(bubble_value("wedge6", 1, [1 / 3, 1 / 3, 1.0]), 1 / 27)


@pytest.mark.parametrize("kind", list(ElementKind))
def test_bubble_vanishes_on_the_other_faces(kind):
    verts = REFERENCE_NODES[kind]
    for f in range(kind.n_faces):
        assert np.allclose(bubble_value(kind, f, verts), 0.0)
        for other in range(kind.n_faces):
            if other == f:
                continue
            centroid = verts[list(face_nodes(kind, other))].mean(axis=0)
            assert abs(bubble_value(kind, f, centroid)) < 1e-14
        centroid = verts[list(face_nodes(kind, f))].mean(axis=0)
        assert bubble_value(kind, f, centroid) > 0


@pytest.mark.parametrize("kind", list(ElementKind))
def test_bubble_gradient_matches_finite_differences(kind):
    p = np.array(INTERIOR[kind])
    h = 1e-6
    for f in range(kind.n_faces):
        fd = np.array(
            [
                (bubble_value(kind, f, p + h * e) - bubble_value(kind, f, p - h * e)) / (2 * h)
                for e in np.eye(3)
            ]
        )
        assert np.allclose(bubble_gradient(kind, f, p), fd, atol=1e-8)


@pytest.mark.parametrize("kind, mean", [("hex8", 4 / 9), ("tet4", 1 / 60), ("wedge6", 1 / 9)])
def test_bubble_trace_integrals(kind, mean):
    mesh = build_structured_hex_grid(divisions=(2, 2, 2), fault_planes=[FaultPlane(axis="z", coordinate=0.5)], kind=kind)
    traces = bubble_trace_integrals(mesh)
    assert traces.shape == (mesh.n_faces, 2)
    assert np.allclose(traces / mesh.faults.area[:, None], mean, rtol=1e-12)


def test_bubble_clusters_follow_shared_parent_cells():
    split = build_structured_hex_grid(divisions=(2, 2, 2), fault_planes=[FaultPlane(axis="z", coordinate=0.5)])
    assert [c.tolist() for c in bubble_clusters(split)] == [[0], [1], [2], [3]]

    junction = build_structured_hex_grid(
        extents=(2.0, 2.0, 1.0),
        divisions=(2, 2, 1),
        origin=(-1.0, -1.0, 0.0),
        fault_planes=[
            FaultPlane(axis="y", coordinate=0.0),
            FaultPlane(axis="x", coordinate=0.0, bounds=[[0.0, 1.0], None], tag=1),
        ],
    )
    assert [c.tolist() for c in bubble_clusters(junction)] == [[0, 1, 2]]


@pytest.mark.parametrize("kind", list(ElementKind))
def test_condensed_step_matches_the_full_block_solve(kind):
    problem = two_layer_problem(kind)
    system = prepare_system(problem)
    loads = step_loads(system, problem, problem.steps[0])
    state = FaceContactState.initial(system.n_faces)
    blocks = assemble_global(system, np.zeros(system.n_dofs), state, loads, problem.friction)
    free = loads.free_dofs(system.n_u)

    dx, iterations = newton_step(system, blocks, free, SolverConfig())

    A = sp.bmat([[blocks.A_uu, blocks.A_ub], [blocks.A_bu, blocks.A_bb]]).toarray()
    r = np.concatenate([blocks.r_u, blocks.r_b])
    keep = np.concatenate([free, system.n_u + np.arange(system.n_b)])
    expected = np.linalg.solve(A[np.ix_(keep, keep)], -r[keep])
    assert iterations == 1
    assert np.allclose(dx[keep], expected, rtol=1e-8, atol=1e-10 * np.max(np.abs(expected)))
    assert np.all(dx[loads.dirichlet_dofs] == 0.0)


def slipping_state(system):
    # t_N = -1 with a tangential multiplier far outside the Coulomb ball: every face slips
    return FaceContactState.initial(system.n_faces).with_(traction=np.tile([-1.0, 5.0, 0.0], (system.n_faces, 1)))


def parent_pair_pattern(mesh):
    """Every dof pair within the two parent cells of some fault face."""
    pairs = set()
    for f in range(mesh.n_faces):
        cells = (int(mesh.faults.minus_cell[f]), int(mesh.faults.plus_cell[f]))
        nodes = np.union1d(mesh.cell_node_list(cells[0]), mesh.cell_node_list(cells[1]))
        dofs = (3 * nodes[:, None] + np.arange(3)).ravel().tolist()
        pairs.update((i, j) for i in dofs for j in dofs)
    return pairs


def stored_pattern(matrix):
    coo = sp.coo_matrix(matrix)
    return set(zip(coo.row.tolist(), coo.col.tolist()))


@pytest.mark.parametrize("symmetric", [True, False])
def test_condensation_fill_stays_inside_the_parent_cell_pairs(symmetric):
    problem = two_layer_problem()
    system = prepare_system(problem)
    loads = step_loads(system, problem, problem.steps[0])
    state = slipping_state(system)
    blocks = assemble_global(system, np.zeros(system.n_dofs), state, loads, problem.friction, symmetric)
    assert np.all(blocks.update.state == 1)

    n_u = system.n_u
    unpadded = stored_pattern((system.K + interface_tangent(system.jumps, blocks.update.tangent)).tocsr()[:n_u, :n_u])
    pairs = parent_pair_pattern(problem.mesh)
    assert stored_pattern(blocks.A_uu) == unpadded | pairs

    A_hat = static_condense(system, blocks).A_hat
    coo = A_hat.tocoo()
    filled = {(i, j) for i, j, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data) if v != 0.0}
    assert filled <= unpadded | pairs
    # condensation couples nodes of the two parent cells that share no element
    assert filled - unpadded

    dense = A_hat.toarray()
    scale = np.max(np.abs(dense))
    if symmetric:
        assert np.allclose(dense, dense.T, atol=1e-12 * scale)
    else:
        assert not np.allclose(dense, dense.T, atol=1e-6 * scale)


@pytest.mark.parametrize("kind", list(ElementKind))
@pytest.mark.parametrize("symmetric", [True, False])
@pytest.mark.parametrize("slipping", [True, False])
def test_bubble_blocks_match_the_global_assembly(kind, symmetric, slipping):
    problem = two_layer_problem(kind)
    problem = problem.model_copy(
        update={"materials": {0: ElasticMaterial(E=1.0, nu=0.25, initial_stress=[-0.5, 0.0, -1.0, 0.1, 0.0, 0.0])}}
    )
    system = prepare_system(problem)
    step = problem.steps[0]
    loads = step_loads(system, problem, step)
    state = slipping_state(system) if slipping else FaceContactState.initial(system.n_faces)
    x = 1e-3 * np.random.default_rng(7).standard_normal(system.n_dofs)
    blocks = assemble_global(system, x, state, loads, problem.friction, symmetric)

    ours = assemble_bubble_blocks(
        problem.mesh,
        problem.materials,
        state,
        PenaltyParams(eps_N=system.eps_N, eps_T=system.eps_T),
        problem.friction,
        x,
        symmetric,
        stresses=cell_stresses(problem, step),
    )

    assert ours.A_bb.shape == (system.n_b, system.n_b)
    assert ours.A_bu.shape == ours.A_ub.T.shape == (system.n_b, system.n_u)
    scale = np.max(np.abs(blocks.A_bb.toarray()))
    for mine, theirs in ((ours.A_bb, blocks.A_bb), (ours.A_bu, blocks.A_bu), (ours.A_ub, blocks.A_ub)):
        assert np.allclose(mine.toarray(), theirs.toarray(), rtol=0.0, atol=1e-12 * scale)
    assert np.allclose(ours.r_b, blocks.r_b, rtol=0.0, atol=1e-12 * max(np.max(np.abs(blocks.r_b)), 1.0))


def test_open_faces_leave_only_the_bulk_bubble_block():
    problem = two_layer_problem()
    system = prepare_system(problem)
    penalties = PenaltyParams(eps_N=system.eps_N, eps_T=system.eps_T)
    state = FaceContactState.initial(system.n_faces)
    opened = state.with_(traction=np.tile([1.0, 0.0, 0.0], (system.n_faces, 1)))

    closed = assemble_bubble_blocks(problem.mesh, problem.materials, state, penalties, problem.friction, np.zeros(system.n_dofs))
    open_ = assemble_bubble_blocks(problem.mesh, problem.materials, opened, penalties, problem.friction, np.zeros(system.n_dofs))

    bulk = system.K[system.n_u :, system.n_u :].toarray()
    assert np.allclose(open_.A_bb.toarray(), bulk)
    assert not np.allclose(closed.A_bb.toarray(), bulk)
    assert np.allclose(open_.r_b, 0.0)


def test_singular_block_is_reported():
    with pytest.raises(SingularBlockError) as exc:
        _factor(np.zeros((3, 3)), np.array([4]))
    assert exc.value.face_ids == [4]
    with pytest.raises(SingularBlockError):
        _factor(np.full((3, 3), np.nan), np.array([0, 1]))


def test_infsup_bubbles_keep_the_constant_away_from_zero():
    records = infsup_study(levels=3)
    enriched = np.array([r.beta_enriched for r in records])
    plain = np.array([r.beta_plain for r in records])

    assert [r.h for r in records] == [0.5, 0.25, 0.125]
    assert np.all(enriched >= plain * (1 - 1e-9))
    assert plain[-1] < 0.6 * plain[0]
    assert enriched[-1] >= 0.3
    assert enriched[-1] / plain[-1] > enriched[0] / plain[0]


def test_infsup_single_face():
    mesh = build_structured_hex_grid(
        extents=(1.0, 1.0, 2.0), divisions=(1, 1, 2), fault_planes=[FaultPlane(axis="z", coordinate=1.0)]
    )
    assert estimate_infsup(mesh, enriched=False) > 0
    assert estimate_infsup(mesh, enriched=True) >= estimate_infsup(mesh, enriched=False) * (1 - 1e-9)


def test_infsup_needs_fault_faces():
    with pytest.raises(MeshError):
        estimate_infsup(build_structured_hex_grid(), enriched=True)
    with pytest.raises(ValueError):
        infsup_study(levels=0)


def test_iterative_infsup_estimate_matches_the_dense_one(seed):
    mesh = two_block_mesh(4)
    dense = estimate_infsup(mesh, enriched=True)
    iterative = estimate_infsup(mesh, enriched=True, seed=seed, dense_limit=0)
    assert math.isclose(iterative, dense, rel_tol=1e-5)
    assert estimate_infsup(mesh, enriched=True, seed=seed, dense_limit=0) == iterative
