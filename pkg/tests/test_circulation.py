"""Whitney integration, circulation functions, and the abstract solver."""

import numpy as np
import pytest

from reebflow.circulation import (
    _avg_moment_below,
    check_circulation_axioms,
    circulation_function,
    primitive_cochain,
    solve_circulations,
    vorticity_residual,
    whitney_cycle_integral,
)
from reebflow.errors import HitsVertex, MissingCochain, NoCirculation
from reebflow.meshes import (
    flat_torus,
    flat_torus_cochain,
    octasphere,
    torus_test_field,
)
from reebflow.reeb import build_reeb, level_cycle, sublevel_moment
from reebflow.synthetic import make_graph, random_graph, zero_mean_shift


def with_cochain(mesh, values):
    return mesh.with_field(
        mesh.field, cochain=(mesh.topology.edges, values)
    )


@pytest.fixture(scope="module")
def torus_pair():
    """flat 64-torus with a consistent swept cochain and its circulation."""
    bare = flat_torus(64, torus_test_field)
    values = primitive_cochain(bare)
    mesh = with_cochain(bare, values)
    graph = build_reeb(mesh)
    cg = circulation_function(mesh, graph)
    return bare, values, mesh, graph, cg


# -------------------------------------------------------------- vorticity


def test_vorticity_residual_trivial_cases():
    mesh = flat_torus(8, lambda x, y: 0.0 * x)
    zero = with_cochain(mesh, np.zeros(mesh.topology.n_edges))
    assert vorticity_residual(zero) == 0.0
    field_mesh = flat_torus(8, torus_test_field)
    fbar = field_mesh.field[field_mesh.triangles].mean(axis=1)
    bare = with_cochain(field_mesh, np.zeros(field_mesh.topology.n_edges))
    assert vorticity_residual(bare) == np.max(np.abs(fbar))


def test_vorticity_residual_requires_cochain():
    mesh = flat_torus(8, torus_test_field)
    with pytest.raises(MissingCochain):
        vorticity_residual(mesh)


def test_primitive_cochain_inverts_residual():
    mesh = flat_torus(16, torus_test_field)
    swept = with_cochain(mesh, primitive_cochain(mesh))
    assert vorticity_residual(swept) <= 1e-12
    big = flat_torus(64, torus_test_field)
    swept = with_cochain(big, primitive_cochain(big))
    # dividing the rounding defect by the tiny triangle area costs a
    # few extra ulps at this resolution
    assert vorticity_residual(swept) <= 5e-12


# ------------------------------------------------------ whitney integrals


def test_whitney_exact_on_constant_forms():
    mesh = flat_torus(32, torus_test_field)
    graph = build_reeb(mesh)
    p, q = 0.625, -0.25
    gamma = flat_torus_cochain(mesh, period_x=p, period_y=q)
    assert np.max(np.abs(mesh.topology.coboundary(gamma))) == 0.0
    for e in graph.edges:
        a, b = graph.edge_span(e.id)
        z = a + 0.39 * (b - a)
        cycle = level_cycle(graph, e.id, z)
        pts = cycle.points[:, :2]
        steps = np.diff(np.vstack([pts, pts[:1]]), axis=0)
        steps -= np.round(steps)
        wx, wy = np.round(steps.sum(axis=0)).astype(int)
        val = whitney_cycle_integral(mesh, cycle, gamma)
        assert abs(val - (p * wx + q * wy)) <= 1e-12


def test_whitney_kills_exact_cochains():
    mesh = octasphere(4)
    graph = build_reeb(mesh)
    potential = mesh.vertices @ np.array([1.0, 2.0, -1.0])
    edges = mesh.topology.edges
    grad = potential[edges[:, 1]] - potential[edges[:, 0]]
    for z in (-0.8, -0.3, 0.4, 0.9):
        cycle = level_cycle(graph, 0, z)
        assert abs(whitney_cycle_integral(mesh, cycle, grad)) <= 1e-12


def test_whitney_matches_exact_sublevel_integral():
    # independent geometric oracle: for a swept cochain the loop integral
    # equals the integral of f over the sublevel disk, up to the
    # second-order defect of per-triangle field averages on cut triangles
    mesh = octasphere(4)
    f0 = mesh.field - (
        mesh.field[mesh.triangles].mean(axis=1) @ mesh.triangle_areas()
    ) / mesh.total_area()
    mesh = mesh.with_field(f0)
    values = primitive_cochain(mesh)
    mesh = with_cochain(mesh, values)
    graph = build_reeb(mesh)
    backing = graph.backing
    for z in (-0.6, -0.1, 0.5):
        cycle = level_cycle(graph, 0, z)
        loop = whitney_cycle_integral(mesh, cycle, values)
        exact = 0.0
        for g, tris in backing.edge_pieces[0]:
            lo, hi = backing.crit_values[g], backing.crit_values[g + 1]
            if z <= lo:
                break
            args = (
                backing.tri_v1[tris], backing.tri_v2[tris],
                backing.tri_v3[tris], backing.tri_area[tris],
            )
            exact += float(np.add.reduce(
                sublevel_moment(*args, min(z, hi))
                - sublevel_moment(*args, lo)
            ))
        assert abs(loop - exact) <= 5e-3 * max(1.0, abs(exact))


# ------------------------------------------------------- mesh circulation


def test_circulation_consistent_pair(torus_pair):
    _, _, mesh, graph, cg = torus_pair
    limits = np.concatenate([cg.c_minus, cg.c_minus + cg.edge_integral])
    scale = np.max(np.abs(limits))
    assert scale > 0.05
    assert np.max(cg.residuals) <= 1e-6 * scale
    report = check_circulation_axioms(cg, tol=1e-6)
    assert report.passed
    assert report.stokes_residual == 0.0
    assert report.worst() <= 1e-9 * scale


def test_circulation_is_deterministic(torus_pair):
    _, _, mesh, graph, cg = torus_pair
    again = circulation_function(mesh, graph)
    assert again.to_json() == cg.to_json()
    assert b"c_minus" in cg.to_json()
    assert b"edge_integral" in cg.to_json()
    assert b"residuals" in cg.to_json()


def test_circulation_requires_cochain(torus_pair):
    bare, _, _, graph, _ = torus_pair
    with pytest.raises(MissingCochain):
        circulation_function(bare, graph)


def test_circulation_zero_cochain_gives_zero_loops(torus_pair):
    bare, _, _, graph, cg = torus_pair
    mesh = with_cochain(bare, np.zeros(bare.topology.n_edges))
    with pytest.warns(UserWarning):
        zero_cg = circulation_function(mesh, graph)
    # every loop integral vanishes, so the start limit is minus the
    # within-edge extension from the start to the integration level
    fbar = bare.field[bare.triangles].mean(axis=1)
    for e in graph.edges:
        ext = _avg_moment_below(
            graph.backing, fbar, e.id, float(zero_cg.levels[e.id])
        )
        assert abs(zero_cg.c_minus[e.id] + ext) <= 1e-12


def test_mid_level_vertex_hit_is_resampled(torus_pair):
    _, _, mesh, graph, cg = torus_pair
    a, b = graph.edge_span(0)
    mid = (a + b) / 2.0
    # the test field takes the value -1 exactly on this grid, so the mid
    # level of the bottom edge must be resampled
    assert mid == -1.0
    with pytest.raises(HitsVertex):
        level_cycle(graph, 0, mid)
    assert cg.levels[0] != mid
    assert a < cg.levels[0] < b


def test_closed_cochain_shifts_by_periods(torus_pair):
    bare, values, mesh, graph, cg = torus_pair
    p = 0.37
    gamma = flat_torus_cochain(bare, period_x=p)
    shifted = circulation_function(
        with_cochain(bare, values + gamma), graph
    )
    delta = shifted.c_minus - cg.c_minus
    # oracle: integrate gamma directly along each integration cycle
    for e in graph.edges:
        cycle = level_cycle(graph, e.id, float(cg.levels[e.id]))
        period = whitney_cycle_integral(bare, cycle, gamma)
        assert abs(delta[e.id] - period) <= 1e-6 * p
    moved = np.sort(delta)
    assert abs(moved[0] + p) <= 1e-9
    assert abs(moved[-1] - p) <= 1e-9
    assert np.max(np.abs(moved[1:3])) <= 1e-9
    # the shift is a 1-cycle: residuals are untouched
    assert np.max(np.abs(shifted.residuals - cg.residuals)) <= 1e-12


def test_gauge_property(torus_pair):
    bare, values, mesh, graph, cg = torus_pair
    gamma = flat_torus_cochain(bare, period_x=0.37)
    shifted = circulation_function(
        with_cochain(bare, values + gamma), graph
    )
    space = solve_circulations(graph)
    d = shifted.c_minus - space.particular.c_minus
    assert np.max(np.abs(d)) > 0.3
    basis = np.stack(space.basis, axis=1)
    coef, *_ = np.linalg.lstsq(basis, d, rcond=None)
    leftover = d - basis @ coef
    assert np.max(np.abs(leftover)) <= 1e-9


# --------------------------------------------------------- abstract solve


def test_solve_sphere_graph():
    graph = make_graph([(-1.0, "min"), (1.0, "max")], [(0, 1, 2.0)])
    space = solve_circulations(graph)
    assert space.dimension == 0
    assert space.basis == []
    assert abs(space.particular.c_minus[0]) <= 1e-15
    assert abs(space.particular.c_plus(0)) <= 1e-15
    report = check_circulation_axioms(space.particular)
    assert report.passed


def test_solve_figure2_graph():
    graph = zero_mean_shift(make_graph(
        [(0.0, "min"), (1.0, "saddle"), (2.0, "saddle"), (3.0, "max")],
        [(0, 1, 1.0), (1, 2, 0.5), (1, 2, 0.5), (2, 3, 1.0)],
    ))
    space = solve_circulations(graph)
    assert space.dimension == 1 == graph.b1()
    vec = space.basis[0]
    assert vec[0] == 0.0 and vec[3] == 0.0
    assert sorted([vec[1], vec[2]]) == [-1.0, 1.0]
    assert np.max(space.particular.residuals) <= 1e-12
    member = space.member([2.5])
    assert np.max(member.residuals) <= 1e-12
    assert check_circulation_axioms(member).passed


def test_solve_rejects_nonzero_mean():
    graph = make_graph([(-0.75, "min"), (1.25, "max")], [(0, 1, 2.0)])
    with pytest.raises(NoCirculation) as exc:
        solve_circulations(graph)
    assert exc.value.obstruction == 0.5


def test_solve_random_graphs_dimension():
    for seed in range(12):
        graph = zero_mean_shift(random_graph(seed, max_edges=30))
        space = solve_circulations(graph)
        assert space.dimension == graph.b1()
        assert len(space.basis) == space.dimension
        scale = max(1.0, float(np.max(np.abs(space.particular.c_minus))))
        assert float(np.max(space.particular.residuals)) <= 1e-9 * scale
        for vec in space.basis:
            assert np.max(space.particular.shifted(vec).residuals) <= (
                1e-9 * scale
            )


def test_axiom_report_flags_perturbation(torus_pair):
    _, _, _, graph, cg = torus_pair
    bump = np.zeros(graph.n_edges)
    bump[1] = 0.1
    report = check_circulation_axioms(cg.shifted(bump), tol=1e-6)
    assert not report.passed
    src, dst = graph.edges[1].src, graph.edges[1].dst
    assert abs(report.per_vertex[src] - 0.1) <= 1e-9
    assert abs(report.per_vertex[dst] - 0.1) <= 1e-9
    assert report.stokes_residual == 0.0


def test_space_json_round_trip():
    graph = zero_mean_shift(make_graph(
        [(0.0, "min"), (1.0, "saddle"), (2.0, "saddle"), (3.0, "max")],
        [(0, 1, 1.0), (1, 2, 0.5), (1, 2, 0.5), (2, 3, 1.0)],
    ))
    space = solve_circulations(graph)
    import json

    doc = json.loads(space.to_json())
    assert doc["dimension"] == 1
    assert len(doc["basis"]) == 1
    assert len(doc["c_minus"]) == graph.n_edges
    assert len(doc["residuals"]) == graph.n_vertices
    assert space.to_json() == solve_circulations(graph).to_json()
