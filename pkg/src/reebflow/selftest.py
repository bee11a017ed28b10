"""Executable acceptance checks over the bundled analytic surfaces.

Eleven numbered criteria exercise the full pipeline end to end: graph
topology, the measure laws, saddle asymptotics, invariance under exact
remaps, the circulation solver and axioms, the flux law, the verdict
hierarchy, the isomorphism oracle, and period consistency. Each
criterion function returns a short detail string and raises
AssertionError with a diagnostic when its check fails. run_selftest
prints one line per criterion; the test suite runs the same functions.
"""

import itertools

import numpy as np

from .advect import (
    SinProfile,
    apply_map,
    hamiltonian_flow_map,
    shear_x,
    simplicial_automorphism,
)
from .circulation import (
    NoCirculation,
    check_circulation_axioms,
    circulation_function,
    primitive_cochain,
    solve_circulations,
)
from .equivalence import Tolerances, compare_functions
from .freezing import snap_cycle
from .invariants import edge_moments, fit_saddle, graphs_isomorphic, \
    period_function
from .meshes import (
    flat_torus,
    flat_torus_cochain,
    genus2_pretzel,
    grid_torus,
    octasphere,
    quarter_turn_permutation,
    torus_test_field,
    translation_permutation,
    two_peak_torus,
)
from .reeb import (
    MeasuredReebGraph,
    ReebEdge,
    ReebVertex,
    build_reeb,
    level_cycle,
    measure_at,
)
from .synthetic import (
    profile_first_moment,
    random_graph,
    scale_edge_mass,
    zero_mean_shift,
)

TAU = 2.0 * np.pi

REMAP_TOL = Tolerances(tol_f=2.9e-2, tol_mass=1e-2, tol_profile=1e-2)


def _zero_mean(mesh):
    areas = mesh.triangle_areas()
    fbar = mesh.field[mesh.triangles].mean(axis=1)
    return mesh.with_field(mesh.field - float(areas @ fbar)
                           / mesh.total_area())


def criterion_betti_genus():
    """b1 of the graph equals the surface genus on genus 0, 1, 2."""
    got = [
        build_reeb(octasphere(3)).b1(),
        build_reeb(grid_torus(16)).b1(),
        build_reeb(genus2_pretzel(24)).b1(),
    ]
    assert got == [0, 1, 2], f"b1 per genus: {got} != [0, 1, 2]"
    return "b1 = 0/1/2 on sphere/torus/genus-2"


def criterion_figure_graphs():
    """The two reference torus fields give their known graphs exactly."""
    g = build_reeb(grid_torus(32))
    kinds = [v.kind for v in g.vertices]
    assert kinds == ["min", "saddle", "saddle", "max"], kinds
    pairs = sorted((e.src, e.dst) for e in g.edges)
    assert pairs == [(0, 1), (1, 2), (1, 2), (2, 3)], pairs

    g2 = build_reeb(two_peak_torus(32))
    kinds2 = [v.kind for v in g2.vertices]
    assert g2.n_vertices == 6 and g2.n_edges == 6, (
        g2.n_vertices, g2.n_edges)
    assert kinds2.count("max") == 2 and kinds2.count("saddle") == 3, kinds2
    return "height torus 2+2 vertices with parallel pair, two-peak 6"


def _sphere_cap_error(levels: int) -> float:
    graph = build_reeb(octasphere(levels))
    worst = 0.0
    for z in np.linspace(-0.95, 0.95, 39):
        mu = measure_at(graph, 0, float(z))
        exact = TAU * (1.0 + float(z))
        worst = max(worst, abs(mu - exact) / exact)
    return worst


def criterion_sphere_measure():
    """Sublevel measure on a refined sphere matches 2 pi (1 + z)."""
    coarse = _sphere_cap_error(6)    # 32768 triangles
    fine = _sphere_cap_error(7)      # 131072 triangles
    assert coarse <= 0.01, f"cap measure error {coarse:.4f} > 1%"
    assert fine <= 0.55 * coarse, (
        f"no halving under refinement: {coarse:.2e} -> {fine:.2e}")
    return f"max rel err {coarse:.2e}, refined {fine:.2e}"


def criterion_saddle_asymptotics():
    """Trunk/branch log-coefficient ratio -2 and eta-slope cancellation."""
    graph = build_reeb(flat_torus(256, torus_test_field))
    details = []
    for v in graph.vertices:
        if v.kind != "saddle":
            continue
        fit = fit_saddle(graph, v.id, fit_radius=0.1)
        ct = fit.log_coeffs[fit.trunk]
        for b in fit.branches:
            ratio = ct / fit.log_coeffs[b]
            assert abs(ratio + 2.0) <= 0.1, (
                f"saddle {v.id}: trunk/branch ratio {ratio:.4f}")
        slopes = list(fit.eta_slopes.values())
        defect = abs(sum(slopes)) / max(abs(s) for s in slopes)
        assert defect <= 0.05, (
            f"saddle {v.id}: eta slope sum defect {defect:.4f}")
        details.append(f"{ratio + 2.0:+.3f}/{defect:.3f}")
    return "ratio offset/eta defect per saddle: " + ", ".join(details)


def _shear_deviation(n: int) -> float:
    mesh = flat_torus(n, torus_test_field)
    out = apply_map(mesh, shear_x(SinProfile([(0.25, 1, 0.0)])))
    gf, gg = build_reeb(mesh), build_reeb(out)
    assert graphs_isomorphic(gf, gg, 1e-2, 1e-2, 1e-2), "graphs differ"
    spread = max(v.f for v in gf.vertices) - min(v.f for v in gf.vertices)
    worst = max(
        abs(a.f - b.f) / spread for a, b in zip(gf.vertices, gg.vertices)
    )
    worst = max(worst, abs(gf.total_mass - gg.total_mass) / gf.total_mass)
    for e in range(gf.n_edges):
        mf = edge_moments(gf, e, 4)
        mg = edge_moments(gg, e, 4)
        worst = max(worst, float(
            np.max(np.abs(mf - mg) / np.maximum(np.abs(mf), 1e-12))
        ))
    return worst


def criterion_casimir_invariance():
    """Exact shear preserves moments, levels, mass within 1 percent."""
    coarse = _shear_deviation(256)
    fine = _shear_deviation(512)
    assert coarse <= 0.01, f"worst deviation {coarse:.2e} > 1%"
    assert fine < coarse, (
        f"no shrink under refinement: {coarse:.2e} -> {fine:.2e}")
    return f"worst rel dev {coarse:.2e} at 256^2, {fine:.2e} at 512^2"


def _level_shift(graph, delta):
    vs = [ReebVertex(v.id, v.f + delta, v.kind, v.mesh_vertex)
          for v in graph.vertices]
    es = []
    for e in graph.edges:
        profile = e.profile.copy()
        profile[:, 0] += delta
        es.append(ReebEdge(e.id, e.src, e.dst, e.mass, profile))
    return MeasuredReebGraph(vs, es, graph.total_mass)


def criterion_circulation_dimension(seed0: int = 0):
    """Solution space dimension is b1; nonzero mean raises NoCirculation."""
    dims = []
    for seed in range(seed0, seed0 + 20):
        graph = zero_mean_shift(random_graph(seed, max_edges=30))
        space = solve_circulations(graph)
        assert space.dimension == graph.b1(), (
            f"seed {seed}: dim {space.dimension} != b1 {graph.b1()}")
        dims.append(space.dimension)

        # knock the integral of f dmu off zero, by scaling the heaviest
        # moment edge when one exists, by shifting all levels otherwise
        # (a single symmetric edge has no mass-scaling handle)
        moments = [profile_first_moment(e) for e in graph.edges]
        eid = int(np.argmax(np.abs(moments)))
        fmax = max(abs(v.f) for v in graph.vertices)
        if abs(moments[eid]) > 1e-6 * fmax * graph.total_mass:
            bad = scale_edge_mass(graph, eid, 1.5)
        else:
            bad = _level_shift(graph, 0.5 * (1.0 + fmax))
        try:
            solve_circulations(bad)
            raise AssertionError(f"seed {seed}: NoCirculation not raised")
        except NoCirculation:
            pass
    return f"20 graphs, dims {min(dims)}..{max(dims)}"


def _edge_periods(mesh, graph, gamma):
    out = {}
    for e in graph.edges:
        a, b = graph.edge_span(e.id)
        z = 0.5 * (a + b) + 0.01 * (b - a)
        cyc = snap_cycle(mesh, level_cycle(graph, e.id, z))
        out[e.id] = float(cyc @ gamma)
    return out


def criterion_circulation_axioms():
    """Axioms hold at 1e-6; a closed cochain shifts C by its periods."""
    bare = flat_torus(64, torus_test_field)
    alpha = primitive_cochain(bare)
    mesh = bare.with_field(bare.field, cochain=(bare.topology.edges, alpha))
    graph = build_reeb(mesh)
    cg = circulation_function(mesh, graph)
    report = check_circulation_axioms(cg, tol=1e-6)
    assert report.passed, f"axiom residual {report.worst():.2e}"

    p = 0.37
    gamma = flat_torus_cochain(bare, period_x=p)
    pert = bare.with_field(
        bare.field, cochain=(bare.topology.edges, alpha + gamma)
    )
    cg2 = circulation_function(pert, build_reeb(pert))
    periods = _edge_periods(mesh, graph, gamma)
    worst = 0.0
    for e in graph.edges:
        delta = cg2.c_minus[e.id] - cg.c_minus[e.id]
        worst = max(worst, abs(delta - periods[e.id]))
    assert worst <= 1e-6 * p, f"period shift error {worst:.2e}"
    return (f"worst residual {report.worst():.2e}, "
            f"period shift error {worst:.2e}")


def criterion_flux_law():
    """Translation flux is the offset; Hamiltonian flow flux vanishes."""
    mesh = flat_torus(160, torus_test_field)
    tr = apply_map(
        mesh, simplicial_automorphism(translation_permutation(160, 0, 48))
    )
    v = compare_functions(mesh, tr, "ham")
    assert v.outcome == "NotEquivalent", v.outcome
    area = v.certificate["flux"][0]["wrapped"] / mesh.total_area()
    assert abs(area - 0.3) <= 0.003, f"translation flux {area:.5f}"

    def isotropic(xs, ys):
        return np.cos(TAU * ys) + 0.45 * np.cos(TAU * xs)

    m96 = flat_torus(96, isotropic)
    x, y = m96.vertices[:, 0], m96.vertices[:, 1]
    stream = (0.01 * np.cos(TAU * y) + 0.004 * np.cos(2 * TAU * y)
              + 0.002 * (np.sin(3 * TAU * y) - 3 * np.sin(TAU * y))
              + 0.007 * np.cos(TAU * x)
              + 0.0015 * (np.sin(3 * TAU * x) - 3 * np.sin(TAU * x)))
    adv = apply_map(m96, hamiltonian_flow_map(m96, stream, t=1.0, steps=64))
    w = compare_functions(m96, adv, "ham", REMAP_TOL)
    assert w.outcome == "Equivalent", f"{w.outcome}: {w.reason}"
    ham_area = max(r["wrapped"] for r in w.certificate["flux"])
    assert ham_area <= 0.005 * m96.total_area(), f"flow flux {ham_area:.2e}"
    return f"translation {area:.4f}, flow flux {ham_area:.1e}"


def criterion_verdict_hierarchy():
    """Quarter turn, translation, and self-comparisons verdict table."""
    m64 = flat_torus(64, torus_test_field)
    rot = apply_map(
        m64, simplicial_automorphism(quarter_turn_permutation(64))
    )
    assert compare_functions(m64, rot, "sdiff").outcome == "Equivalent"
    assert compare_functions(m64, rot, "sdiff0").outcome == "NotEquivalent"

    m40 = flat_torus(40, torus_test_field)
    tr = apply_map(
        m40, simplicial_automorphism(translation_permutation(40, 0, 12))
    )
    assert compare_functions(m40, tr, "sdiff0").outcome == "Equivalent"
    assert compare_functions(m40, tr, "ham").outcome == "NotEquivalent"

    for maker in (lambda: octasphere(3), lambda: grid_torus(16),
                  lambda: genus2_pretzel(24)):
        mesh = _zero_mean(maker())
        for group in ("sdiff", "sdiff0", "ham"):
            v = compare_functions(mesh, mesh, group)
            assert v.outcome == "Equivalent", (
                f"self {group} genus {build_reeb(mesh).b1()}: {v.outcome}")
    return "8 verdict cases plus 9 self-comparisons match"


def _brute_force_isomorphic(g1, g2) -> bool:
    # exhaustive kind- and value-preserving bijection search; exact
    # comparison only, so it is sound on the dyadic random graphs
    if g1.n_vertices != g2.n_vertices or g1.n_edges != g2.n_edges:
        return False
    groups = {}
    for v in g2.vertices:
        groups.setdefault((v.kind, v.f), []).append(v.id)
    pools = [groups.get((v.kind, v.f), []) for v in g1.vertices]
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
            hit = any(
                all(e1.mass == b2[j].mass
                    and np.array_equal(e1.profile, b2[j].profile)
                    for e1, j in zip(b1, perm))
                for perm in itertools.permutations(range(len(b2)))
            )
            if not hit:
                ok = False
                break
        if ok:
            return True
    return False


def criterion_isomorphism_oracle(seed0: int = 0):
    """graphs_isomorphic matches brute force on 100 random graphs."""
    graphs = [random_graph(seed, max_edges=8)
              for seed in range(seed0, seed0 + 100)]
    checked = 0
    for i, g in enumerate(graphs):
        cases = [g, graphs[(i + 1) % len(graphs)]]
        if i % 10 == 0:
            cases.append(scale_edge_mass(g, 0, 1.5))
        for other in cases:
            fast = bool(graphs_isomorphic(g, other, 0.0, 0.0, 0.0))
            slow = _brute_force_isomorphic(g, other)
            assert fast == slow, (
                f"disagreement on pair {i}: fast {fast}, brute {slow}")
            checked += 1
    return f"{checked} exact-data comparisons agree"


def criterion_period_consistency():
    """Integrated period reproduces edge mass; sphere period is 2 pi."""
    worst = 0.0
    for graph in (build_reeb(flat_torus(64, torus_test_field)),
                  build_reeb(octasphere(5))):
        for e in graph.edges:
            zs = e.profile[:, 0]
            mids = (zs[1:] + zs[:-1]) / 2.0
            acc = sum(
                period_function(graph, e.id, float(z)) * float(d)
                for z, d in zip(mids, np.diff(zs))
            )
            rel = abs(acc - e.mass) / e.mass
            assert rel <= 0.01, f"edge {e.id}: period sum off by {rel:.4f}"
            worst = max(worst, rel)

    sphere = build_reeb(octasphere(5))
    sph_worst = max(
        abs(period_function(sphere, 0, z) - TAU) / TAU
        for z in (-0.9, -0.3, 0.21, 0.77)
    )
    assert sph_worst <= 0.01, f"sphere period off by {sph_worst:.4f}"
    return f"mass defect {worst:.2e}, sphere period defect {sph_worst:.2e}"


CRITERIA = [
    ("betti-genus law", criterion_betti_genus),
    ("reference torus graphs", criterion_figure_graphs),
    ("sphere measure law", criterion_sphere_measure),
    ("saddle asymptotics", criterion_saddle_asymptotics),
    ("invariance under exact shear", criterion_casimir_invariance),
    ("circulation solution space", criterion_circulation_dimension),
    ("circulation axioms and periods", criterion_circulation_axioms),
    ("flux law", criterion_flux_law),
    ("verdict hierarchy", criterion_verdict_hierarchy),
    ("isomorphism oracle", criterion_isomorphism_oracle),
    ("period consistency", criterion_period_consistency),
]


_SEEDED = {criterion_circulation_dimension, criterion_isomorphism_oracle}


def run_selftest(out=print, seed: int = 0) -> bool:
    """Run all acceptance criteria, one printed line each.

    seed offsets the randomized suites (criteria 6 and 10); everything
    else is deterministic by construction.
    """
    all_passed = True
    for num, (name, func) in enumerate(CRITERIA, start=1):
        try:
            detail = func(seed) if func in _SEEDED else func()
            out(f"PASS {num:2d} {name}: {detail}")
        except AssertionError as exc:
            all_passed = False
            out(f"FAIL {num:2d} {name}: {exc}")
    return all_passed
