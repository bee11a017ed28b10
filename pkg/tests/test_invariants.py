"""Moments, period function, saddle fits, isomorphism, compatibility."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebflow.errors import (
    IllConditionedFit,
    InsufficientSamples,
    OutOfRange,
)
from reebflow.invariants import (
    FIT_GRID,
    compatible,
    edge_moments,
    fit_saddle,
    global_moments,
    graphs_isomorphic,
    invariants_to_csv,
    period_function,
)
from reebflow.meshes import (
    flat_torus,
    grid_torus,
    octasphere,
    torus_test_field,
)
from reebflow.reeb import build_reeb
from reebflow.synthetic import make_graph, random_graph

TAU = 2.0 * np.pi


@pytest.fixture(scope="module")
def sphere_graph():
    return build_reeb(octasphere(5))


@pytest.fixture(scope="module")
def flat64():
    return build_reeb(flat_torus(64, torus_test_field))


@pytest.fixture(scope="module")
def flat128():
    return build_reeb(flat_torus(128, torus_test_field))


def exact_saddle_graph(extra_fine=False):
    """Synthetic saddle whose measure is exactly the asymptotic model.

    Trunk below the saddle (two outgoing branches), psi(f) = f:
    mu_trunk(t) = -2 t ln t, mu_branch(t) = -t ln t, plus a linear term
    a1 * t on the short branch chosen so the saddle balances exactly.
    Profile levels include the saddle-fit sample offsets, so linear
    interpolation reproduces the model exactly where the fit looks.
    """
    ext_t, ext_1, ext_2 = 0.3, 0.25, 0.28
    mass_t = -2 * ext_t * np.log(ext_t)
    mass_2 = -ext_2 * np.log(ext_2)
    a1 = (mass_t - (-ext_1 * np.log(ext_1)) - mass_2) / ext_1
    mass_1 = -ext_1 * np.log(ext_1) + a1 * ext_1
    r = 0.25 * ext_1

    def levels(extent):
        base = np.concatenate([r * FIT_GRID, np.linspace(0.0, extent, 33)])
        if extra_fine:
            base = np.concatenate(
                [base, 1e-9 * 0.5 ** (np.arange(0, 16) / 2.0)]
            )
        return np.unique(base[(base >= 0) & (base <= extent)])

    def mu_curve(t, log_slope, lin):
        safe = np.where(t > 0, t, 1.0)
        return np.where(t > 0, -log_slope * t * np.log(safe) + lin * t, 0.0)

    t = levels(ext_t)
    prof_t = np.stack(
        [-t[::-1], mass_t - mu_curve(t, 2.0, 0.0)[::-1]], axis=1
    )
    t1 = levels(ext_1)
    prof_1 = np.stack([t1, mu_curve(t1, 1.0, a1)], axis=1)
    t2 = levels(ext_2)
    prof_2 = np.stack([t2, mu_curve(t2, 1.0, 0.0)], axis=1)
    graph = make_graph(
        [(-ext_t, "min"), (0.0, "saddle"), (ext_1, "max"), (ext_2, "max")],
        [
            (0, 1, mass_t, prof_t),
            (1, 2, mass_1, prof_1),
            (1, 3, mass_2, prof_2),
        ],
    )
    return graph, a1


# ----------------------------------------------------------------- moments


def test_sphere_moments(sphere_graph):
    mom = edge_moments(sphere_graph, 0, 4)
    assert abs(mom[0] - 4 * np.pi) <= 0.005 * 4 * np.pi
    assert abs(mom[1]) <= 1e-6 * mom[0]


def test_moment_zero_is_edge_mass(flat64):
    for e in flat64.edges:
        mom = edge_moments(flat64, e.id, 0)
        assert abs(mom[0] - e.mass) <= 1e-12 * flat64.total_mass


def test_global_moments_additivity(flat64):
    total = global_moments(flat64, 4)
    acc = np.zeros(5)
    for e in flat64.edges:
        acc += edge_moments(flat64, e.id, 4)
    assert np.array_equal(total, acc)
    assert abs(total[0] - flat64.total_mass) <= 1e-12 * flat64.total_mass


def test_second_moment_matches_quadrature():
    mesh = flat_torus(64, torus_test_field)
    graph = build_reeb(mesh)
    mom = global_moments(graph, 2)
    tri = mesh.triangles
    f1 = mesh.field[tri[:, 0]]
    f2 = mesh.field[tri[:, 1]]
    f3 = mesh.field[tri[:, 2]]
    areas = mesh.triangle_areas()
    # exact integral of a linear field squared over each triangle
    quad = float(np.sum(
        areas
        * (f1 * f1 + f2 * f2 + f3 * f3 + f1 * f2 + f1 * f3 + f2 * f3)
        / 6.0
    ))
    lin = float(np.sum(areas * (f1 + f2 + f3) / 3.0))
    # Stieltjes midpoint sums see the profile, not the mesh: first order
    # in the level spacing, so 1e-3 at 64 interior levels
    assert abs(mom[2] - quad) <= 1e-3 * abs(quad)
    assert abs(mom[1] - lin) <= 1e-9 * graph.total_mass


def test_torus_band_mass_against_refined_mesh():
    graph = build_reeb(grid_torus(64))
    # same band on a 256x256 mesh of the same torus
    assert abs(graph.edges[0].mass - 25.509259900573603) <= 0.005 * 25.51


def test_moment_lmax_guard(flat64):
    with pytest.raises(ValueError):
        edge_moments(flat64, 0, 17)
    with pytest.raises(ValueError):
        edge_moments(flat64, 0, -1)


# ---------------------------------------------------------------- periods


def test_sphere_period_constant(sphere_graph):
    for z in (-0.9, -0.3, 0.21, 0.77):
        p = period_function(sphere_graph, 0, z)
        assert abs(p - TAU) <= 0.01 * TAU


def test_period_telescopes_to_edge_mass(flat64, sphere_graph):
    for graph in (flat64, sphere_graph):
        for e in graph.edges:
            zs = e.profile[:, 0]
            mids = (zs[1:] + zs[:-1]) / 2.0
            dz = np.diff(zs)
            acc = sum(
                period_function(graph, e.id, float(z)) * float(d)
                for z, d in zip(mids, dz)
            )
            assert abs(acc - e.mass) <= 0.01 * e.mass


def test_period_blows_up_at_saddle(flat128):
    vid = [v.id for v in flat128.vertices if abs(v.f - 0.9) < 1e-9][0]
    trunk, _ = flat128.saddle_trunk(vid)
    vals = [
        period_function(flat128, trunk, 0.9 + d)
        for d in (0.05, 0.01, 0.002)
    ]
    assert vals[0] < vals[1] < vals[2]


def test_period_finite_at_extremum(sphere_graph):
    near = period_function(sphere_graph, 0, -0.999)
    nearer = period_function(sphere_graph, 0, -0.9995)
    assert 0.5 * TAU <= near <= 1.5 * TAU
    assert nearer <= near * 1.2


def test_period_out_of_range(flat64):
    a, b = flat64.edge_span(0)
    for z in (a, b, a - 1.0, b + 1.0):
        with pytest.raises(OutOfRange):
            period_function(flat64, 0, z)


def test_saddle_density_additivity(flat128):
    # one-sided trunk density equals the sum of the branch densities
    # at matching offsets near the saddle level
    vid = [v.id for v in flat128.vertices if abs(v.f - 0.9) < 1e-9][0]
    trunk, (b1, b2) = flat128.saddle_trunk(vid)
    h = 0.2 / 65  # first uniform profile step on the trunk
    for d in (h, 2 * h):
        pt = period_function(flat128, trunk, 0.9 + d)
        pb = period_function(flat128, b1, 0.9 - d) + period_function(
            flat128, b2, 0.9 - d
        )
        assert abs(pt - pb) <= 0.02 * pt


# ------------------------------------------------------------- saddle fits


def test_fit_recovers_exact_model():
    graph, a1 = exact_saddle_graph()
    fit = fit_saddle(graph, 1)
    assert fit.trunk == 0
    assert set(fit.branches) == {1, 2}
    cs = [fit.log_coeffs[e] for e in fit.sides()]
    assert abs(cs[0] - 2.0) <= 1e-9
    assert abs(cs[1] + 1.0) <= 1e-9
    assert abs(cs[2] + 1.0) <= 1e-9
    for e in fit.sides():
        assert abs(fit.eta_consts[e]) <= 1e-12
        assert fit.residuals[e] <= 1e-12
    assert abs(fit.eta_slopes[1] - a1) <= 1e-9
    assert abs(fit.eta_slopes[0]) <= 1e-9
    assert abs(fit.psi_prime - 1.0) <= 1e-9
    # psi' = 1 makes the first-order zeta data equal the eta slopes
    for e in fit.sides():
        assert abs(fit.zeta_slopes[e] - fit.eta_slopes[e]) <= 1e-9
    assert all(n >= 12 for n in fit.n_samples.values())


def test_fit_is_deterministic():
    graph, _ = exact_saddle_graph()
    f1 = fit_saddle(graph, 1)
    f2 = fit_saddle(graph, 1)
    assert f1.log_coeffs == f2.log_coeffs
    assert f1.eta_consts == f2.eta_consts
    assert f1.eta_slopes == f2.eta_slopes


def test_fit_insufficient_samples():
    graph = make_graph(
        [(0.0, "min"), (1.0, "saddle"), (2.0, "max"), (3.0, "max")],
        [(0, 1, 2.0), (1, 2, 1.0), (1, 3, 1.0)],
    )
    with pytest.raises(InsufficientSamples):
        fit_saddle(graph, 1)


def test_fit_ill_conditioned():
    graph, _ = exact_saddle_graph(extra_fine=True)
    with pytest.raises(IllConditionedFit):
        fit_saddle(graph, 1, fit_radius=1e-9)


def test_fit_bad_radius(flat64):
    vid = [v.id for v in flat64.vertices if v.kind == "saddle"][0]
    for r in (0.0, -0.1, 10.0):
        with pytest.raises(OutOfRange):
            fit_saddle(flat64, vid, fit_radius=r)


def test_fit_rejects_non_saddle(flat64):
    vid = [v.id for v in flat64.vertices if v.kind == "min"][0]
    with pytest.raises(ValueError):
        fit_saddle(flat64, vid)


def test_fit_sign_pattern_follows_trunk_orientation(flat128):
    # trunk pointing down gives log coefficients (+, -, -); trunk
    # pointing up mirrors them, since the measure must increase away
    # from the saddle on every side
    for vid in [v.id for v in flat128.vertices if v.kind == "saddle"]:
        fit = fit_saddle(flat128, vid, fit_radius=0.1)
        ct = fit.log_coeffs[fit.trunk]
        cb = [fit.log_coeffs[b] for b in fit.branches]
        trunk_up = flat128.edges[fit.trunk].src == vid
        expected = -1.0 if trunk_up else 1.0
        assert np.sign(ct) == expected
        assert np.sign(cb[0]) == -expected
        assert np.sign(cb[1]) == -expected
        # trunk coefficient is minus the branch sum, ratio near -2
        assert abs(ct + cb[0] + cb[1]) <= 0.1 * abs(ct)
        assert abs(ct / cb[0] + 2.0) <= 0.12
        assert abs(ct / cb[1] + 2.0) <= 0.12
        assert abs(fit.psi_prime - ct / 2.0) == 0.0


# ------------------------------------------------------------ isomorphism


def _parallel_pair_graph(profiles, masses):
    p, q = profiles
    m1, m2 = masses
    inflow = m1 + m2
    return make_graph(
        [(0.0, "min"), (1.0, "saddle"), (2.0, "saddle"), (3.0, "max")],
        [
            (0, 1, inflow),
            (1, 2, m1, p),
            (1, 2, m2, q),
            (2, 3, inflow),
        ],
    )


def _bent_profile(mass):
    z = np.array([1.0, 1.25, 1.5, 1.75, 2.0])
    mu = mass * np.array([0.0, 0.125, 0.25, 0.5, 1.0])
    return np.stack([z, mu], axis=1)


def _straight_profile(mass):
    z = np.array([1.0, 1.25, 1.5, 1.75, 2.0])
    mu = mass * np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    return np.stack([z, mu], axis=1)


def test_iso_self_identity(flat64):
    res = graphs_isomorphic(flat64, flat64, 0.0, 0.0, 0.0)
    assert res
    assert res.max_profile_deviation == 0.0
    assert res.vertex_map == {v.id: v.id for v in flat64.vertices}
    assert res.edge_map == {e.id: e.id for e in flat64.edges}


def test_iso_rejects_doubled_mass(flat64):
    from reebflow.synthetic import scale_edge_mass

    doubled = scale_edge_mass(flat64, 0, 2.0)
    res = graphs_isomorphic(flat64, doubled)
    assert not res
    assert "mass" in res.reason


def test_iso_parallel_bundle_swap():
    p, q = _straight_profile(0.5), _bent_profile(0.75)
    g1 = _parallel_pair_graph((p, q), (0.5, 0.75))
    g2 = _parallel_pair_graph((q, p), (0.75, 0.5))
    res = graphs_isomorphic(g1, g2, 0.0, 0.0, 0.0)
    assert res
    assert res.edge_map[1] == 2 and res.edge_map[2] == 1


def test_iso_parallel_bundle_mismatch():
    m = 0.625
    g1 = _parallel_pair_graph(
        (_straight_profile(m), _bent_profile(m)), (m, m)
    )
    g2 = _parallel_pair_graph(
        (_straight_profile(m), _straight_profile(m)), (m, m)
    )
    res = graphs_isomorphic(g1, g2, 0.0, 0.0, 0.0)
    assert not res
    # widened profile tolerance lets the same pair match
    res = graphs_isomorphic(g1, g2, 0.0, 0.0, 1.0)
    assert res
    assert res.max_profile_deviation > 0.0


def test_iso_symmetry_and_tolerance_defaults(flat64, flat128):
    # same field at different resolutions: equal combinatorics, nearby
    # masses; strict default tolerances must reject, widened must accept
    assert not graphs_isomorphic(flat64, flat128)
    res = graphs_isomorphic(flat64, flat128, 1e-6, 0.01, 0.01)
    assert res
    back = graphs_isomorphic(flat128, flat64, 1e-6, 0.01, 0.01)
    assert back
    assert back.vertex_map == {
        v: k for k, v in res.vertex_map.items()
    }


# brute-force oracle: try every kind- and value-preserving bijection


def _brute_force_isomorphic(g1, g2):
    if g1.n_vertices != g2.n_vertices or g1.n_edges != g2.n_edges:
        return False
    groups = {}
    for v in g2.vertices:
        groups.setdefault((v.kind, v.f), []).append(v.id)
    pools = []
    for v in g1.vertices:
        pools.append(groups.get((v.kind, v.f), []))
    if any(not pool for pool in pools):
        return False

    def vertex_maps(i, used):
        if i == len(pools):
            yield {}
            return
        for cand in pools[i]:
            if cand in used:
                continue
            for rest in vertex_maps(i + 1, used | {cand}):
                rest[g1.vertices[i].id] = cand
                yield rest

    for vmap in vertex_maps(0, frozenset()):
        bundles1 = {}
        for e in g1.edges:
            bundles1.setdefault((vmap[e.src], vmap[e.dst]), []).append(e)
        bundles2 = {}
        for e in g2.edges:
            bundles2.setdefault((e.src, e.dst), []).append(e)
        if set(bundles1) != set(bundles2):
            continue
        ok = True
        for key, b1 in bundles1.items():
            b2 = bundles2[key]
            if len(b1) != len(b2):
                ok = False
                break
            matched = False
            for perm in itertools.permutations(range(len(b2))):
                if all(
                    e1.mass == b2[j].mass
                    and np.array_equal(e1.profile, b2[j].profile)
                    for e1, j in zip(b1, perm)
                ):
                    matched = True
                    break
            if not matched:
                ok = False
                break
        if ok:
            return True
    return False


def test_iso_agrees_with_brute_force():
    graphs = [random_graph(seed, max_edges=8) for seed in range(24)]
    for i, g in enumerate(graphs):
        fast = bool(graphs_isomorphic(g, g, 0.0, 0.0, 0.0))
        assert fast and _brute_force_isomorphic(g, g)
        other = graphs[(i + 1) % len(graphs)]
        fast = bool(graphs_isomorphic(g, other, 0.0, 0.0, 0.0))
        slow = _brute_force_isomorphic(g, other)
        assert fast == slow


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_iso_reflexive_on_random_graphs(seed):
    g = random_graph(seed, max_edges=10)
    assert graphs_isomorphic(g, g, 0.0, 0.0, 0.0)
    assert compatible(g, g.b1(), g.total_mass)


# ------------------------------------------------------------ compatibility


def test_compatible_torus(flat64):
    assert compatible(flat64, 1, flat64.total_mass, tol=1e-6)
    assert not compatible(flat64, 2, flat64.total_mass, tol=1e-6)
    assert not compatible(flat64, 1, flat64.total_mass * 1.1, tol=1e-6)
    assert compatible(flat64, 1, flat64.total_mass * 1.1, tol=0.2)


# ------------------------------------------------------------------ export


def test_csv_export(flat64):
    out = invariants_to_csv(flat64, lmax=4)
    lines = out.strip().split("\n")
    assert lines[0] == "edgeId,src,dst,fSrc,fDst,mass,I0,I1,I2,I3,I4"
    edge_lines = lines[1 : 1 + flat64.n_edges]
    assert len(edge_lines) == flat64.n_edges
    header2 = lines[1 + flat64.n_edges]
    assert header2.startswith("saddle,f,trunk,branch1,branch2,psiPrime0")
    n_saddles = sum(1 for v in flat64.vertices if v.kind == "saddle")
    assert len(lines) == 2 + flat64.n_edges + n_saddles
    assert out == invariants_to_csv(flat64, lmax=4)


def test_csv_reports_unavailable_fits():
    graph = make_graph(
        [(0.0, "min"), (1.0, "saddle"), (2.0, "max"), (3.0, "max")],
        [(0, 1, 2.0), (1, 2, 1.0), (1, 3, 1.0)],
    )
    out = invariants_to_csv(graph)
    assert "unavailable" in out
