"""Decision procedures for equivalence under area-preserving groups.

Three nested groups are supported. The coarsest (sdiff) compares the
measured Reeb graphs alone. The identity component (sdiff0) additionally
compares the frozen topological data through the graph isomorphism:
nothing extra on the sphere, the level-circle homology classes on the
torus, and classes plus pants incidence plus half twists from genus two
up. At genus two and higher homology classes stand in for isotopy
classes of circles, so agreement between distinct inputs is reported as
Inconclusive rather than Equivalent, while disagreement is still a
sound obstruction. The finest comparison (ham) adds the flux test:
across a cycle basis of reduced edges, the area between corresponding
level circles must vanish modulo the total area.

A graph isomorphism is not unique when parallel edge bundles carry
equal masses and profiles, and the frozen data can distinguish the
pairings (parallel edges in one reduced chain bound opposite circle
classes). Equivalence holds when SOME isomorphism matches everything,
so the finer comparisons search the admissible bundle pairings and
keep the deepest failure for the report when none survives.

Pairs (field, cochain) are compared the same way with one extra
invariant, the circulation function, matched edge by edge through its
start limits.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .circulation import circulation_function
from .errors import DifferentMesh, HitsVertex, NotZeroMean
from .freezing import FrozenData, chain_area_between, freeze, snap_cycle
from .invariants import _profile_deviation, graphs_isomorphic
from .mesh import TriMeshField
from .reeb import MeasuredReebGraph, build_reeb, level_cycle

_GROUPS = ("sdiff", "sdiff0", "ham")


@dataclass(frozen=True)
class Tolerances:
    """Comparison tolerances; None picks a scale-aware default.

    tol_f, tol_mass, tol_profile feed the graph isomorphism. tol_area
    is the flux threshold as a fraction of the total area. tol_circ
    bounds the edgewise circulation start-limit difference; its default
    is 1e-6 of the larger circulation magnitude (floored at 1e-3).
    """

    tol_f: float | None = None
    tol_mass: float | None = None
    tol_profile: float | None = None
    tol_area: float = 0.005
    tol_circ: float | None = None

    def to_dict(self) -> dict:
        return {
            "tol_f": self.tol_f,
            "tol_mass": self.tol_mass,
            "tol_profile": self.tol_profile,
            "tol_area": self.tol_area,
            "tol_circ": self.tol_circ,
        }


@dataclass
class Verdict:
    """Outcome of one comparison, with the first obstruction named."""

    outcome: str  # Equivalent | NotEquivalent | Inconclusive
    reason: str | None
    group: str
    tolerances: dict
    certificate: dict | None = None

    @property
    def exit_code(self) -> int:
        return {"Equivalent": 0, "NotEquivalent": 1, "Inconclusive": 2}[
            self.outcome
        ]

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "reason": self.reason,
            "group": self.group,
            "tolerances": self.tolerances,
            "certificate": self.certificate,
        }

    def to_json(self) -> bytes:
        return json.dumps(
            self.to_dict(), sort_keys=True, separators=(",", ":")
        ).encode("ascii")


def _check_group(group: str, allowed) -> None:
    if group not in allowed:
        raise ValueError(f"group must be one of {allowed}, got {group!r}")


def _field_mean(mesh: TriMeshField) -> float:
    areas = mesh.triangle_areas()
    fbar = mesh.field[mesh.triangles].mean(axis=1)
    return float(areas @ fbar) / mesh.total_area()


def _zero_mean_guard(mesh: TriMeshField, tol_f: float | None) -> None:
    spread = float(mesh.field.max() - mesh.field.min())
    limit = tol_f if tol_f is not None else 1e-6 * max(spread, 1e-12)
    mean = _field_mean(mesh)
    if abs(mean) > limit:
        raise NotZeroMean(
            f"field mean {mean!r} exceeds the zero-mean tolerance {limit!r}"
        )


# -------------------------------------------------------- pairing variants


def _edge_map_variants(gf, gg, iso, tol):
    """Edge maps extending the certificate's vertex pairing, one per
    admissible combination of parallel-bundle permutations. The
    matcher's own pairing comes first; order is deterministic."""
    tol_mass = tol.tol_mass if tol.tol_mass is not None \
        else 1e-9 * gf.total_mass
    tol_profile = tol.tol_profile if tol.tol_profile is not None \
        else 1e-6 * gf.total_mass
    bundles: dict[tuple[int, int], list[int]] = {}
    for e in gf.edges:
        bundles.setdefault((e.src, e.dst), []).append(e.id)
    choices = []
    for key in sorted(bundles):
        ids = sorted(bundles[key])
        base = tuple(iso.edge_map[i] for i in ids)
        if len(ids) == 1:
            choices.append([dict(zip(ids, base))])
            continue
        frags = [dict(zip(ids, base))]
        for perm in itertools.permutations(sorted(base)):
            if perm == base:
                continue
            ok = all(
                abs(gf.edges[a].mass - gg.edges[b].mass) <= tol_mass
                and _profile_deviation(
                    gf.edges[a].profile, gg.edges[b].profile
                ) <= tol_profile
                for a, b in zip(ids, perm)
            )
            if ok:
                frags.append(dict(zip(ids, perm)))
        choices.append(frags)
    for combo in itertools.product(*choices):
        emap = {}
        for frag in combo:
            emap.update(frag)
        yield emap


def _map_certificate(gf, gg, vmap, emap) -> dict:
    worst = 0.0
    for a, b in emap.items():
        worst = max(worst, _profile_deviation(
            gf.edges[a].profile, gg.edges[b].profile
        ))
    return {
        "vertex_map": sorted([int(a), int(b)] for a, b in vmap.items()),
        "edge_map": sorted([int(a), int(b)] for a, b in emap.items()),
        "max_profile_deviation": worst,
    }


# ------------------------------------------------------- freezing comparison


def _circle_class(fz: FrozenData, full_edge: int):
    """Reduced edge and homology class of the level circle over a
    full-graph edge, or (None, None) when the edge hangs off the core.
    Parallel chain edges traversed against the regular edge bound the
    opposite class, hence the direction sign."""
    cell = fz.reduced.edge_cell.get(full_edge)
    if cell is None or cell[0] != "edge":
        return None, None
    r = int(cell[1])
    e = fz.reduced.edges[r]
    sign = e.chain_dirs[e.chain.index(full_edge)] * e.regular_dir()
    return r, sign * fz.edge_classes[r]


def _compare_freezing(fz_f: FrozenData, fz_g: FrozenData, vmap, emap):
    """(failure_reason_or_None, records). Genus 0 has nothing to check.

    A transformation isotopic to the identity fixes every homology
    class, so the circle over each core edge must keep its literal
    class under the edge map."""
    genus = fz_f.reduced.b1()
    records: dict = {"genus": genus}
    if genus == 0:
        return None, records
    pairs = {}
    classes = []
    for e_red in fz_f.reduced.edges:
        eg = emap[e_red.regular_edge]
        rg, class_g = _circle_class(fz_g, eg)
        if rg is None:
            return ("reduced graph structure differs under the "
                    "certificate"), records
        pairs[e_red.id] = rg
        cf = fz_f.edge_classes[e_red.id].tolist()
        cg = class_g.tolist()
        classes.append({"edge_f": e_red.id, "edge_g": rg,
                        "class_f": cf, "class_g": cg})
        if cf != cg:
            records["classes"] = classes
            return (
                f"level-circle homology class differs on reduced edge "
                f"{e_red.id}: {cf} vs {cg}"
            ), records
    records["classes"] = classes
    if len(set(pairs.values())) != len(pairs):
        return ("reduced graph structure differs under the "
                "certificate"), records
    records["reduced_edge_map"] = sorted([a, b] for a, b in pairs.items())
    vpairs = {}
    for v in fz_f.reduced.vertices:
        cell = fz_g.reduced.vertex_cell.get(vmap[v.full_vertex])
        if cell is None or cell[0] != "vertex":
            return ("reduced graph structure differs under the "
                    "certificate"), records
        vpairs[v.id] = int(cell[1])
    if len(set(vpairs.values())) != len(vpairs):
        return ("reduced graph structure differs under the "
                "certificate"), records
    if genus == 1:
        return None, records

    # region correspondence through the pants-vertex bijection
    sigma = {}
    for rv, gv in vpairs.items():
        sigma[int(fz_f.coloring.vertex_region[rv])] = int(
            fz_g.coloring.vertex_region[gv]
        )
    sides = []
    for rf, rg in sorted(pairs.items()):
        sf = tuple(sigma[int(r)] for r in fz_f.coloring.edge_sides[rf])
        sg = tuple(int(x) for x in fz_g.coloring.edge_sides[rg])
        sides.append({"edge_f": rf, "edge_g": rg,
                      "sides_f": list(sf), "sides_g": list(sg)})
        if sf != sg:
            records["pants"] = sides
            return (
                f"pants incidence differs on reduced edge {rf}: "
                f"{list(sf)} vs {list(sg)}"
            ), records
    records["pants"] = sides
    twists = []
    for rf, rg in sorted(pairs.items()):
        tf = fz_f.half_twist.get(rf)
        tg = fz_g.half_twist.get(rg)
        if tf is None and tg is None:
            continue
        twists.append({"edge_f": rf, "edge_g": rg,
                       "twist_f": tf, "twist_g": tg})
        if tf != tg:
            records["half_twists"] = twists
            return (
                f"half-twist sign differs on reduced loop {rf}: "
                f"{tf} vs {tg}"
            ), records
    records["half_twists"] = twists
    return None, records


# -------------------------------------------------------------- flux test


def _flux_edges(fz: FrozenData):
    """Reduced edges whose removal leaves a spanning tree: greedy
    maximum-mass spanning tree, complement returned sorted by id."""
    red = fz.reduced
    masses = {}
    for e in red.edges:
        masses[e.id] = sum(fz.graph.edges[k].mass for k in e.chain)
    order = sorted(red.edges, key=lambda e: (-masses[e.id], e.id))
    parent = list(range(red.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    in_tree = set()
    for e in order:
        ra, rb = find(e.src), find(e.dst)
        if ra != rb:
            parent[ra] = rb
            in_tree.add(e.id)
    return [e.id for e in red.edges if e.id not in in_tree]


def _matched_circle_area(mesh_f, mesh_g, gf, gg, ef: int, eg: int):
    """Area between same-level circles over corresponding edges."""
    a1, b1 = gf.edge_span(ef)
    a2, b2 = gg.edge_span(eg)
    lo, hi = max(a1, a2), min(b1, b2)
    if not lo < hi:
        raise HitsVertex(
            f"edges {ef} and {eg} have disjoint level spans"
        )
    z0 = 0.5 * (lo + hi)
    nudge = 0.01 * (hi - lo)
    last = None
    for z in (z0, z0 + nudge, z0 - nudge):
        try:
            c1 = snap_cycle(mesh_f, level_cycle(gf, ef, z))
            c2 = snap_cycle(mesh_g, level_cycle(gg, eg, z))
            return float(z), chain_area_between(mesh_f, c1, c2)
        except HitsVertex as exc:
            last = exc
    raise last


def _flux_tests(mesh_f, mesh_g, gf, gg, emap, fz_f, tol_area):
    total = mesh_f.total_area()
    records = []
    failure = None
    for rf in _flux_edges(fz_f):
        ef = fz_f.reduced.edges[rf].regular_edge
        eg = emap[ef]
        z, area = _matched_circle_area(mesh_f, mesh_g, gf, gg, ef, eg)
        area = float(area)
        wrapped = float(min(area, total - area))
        records.append({
            "edge_f": rf, "level": z, "area": area, "wrapped": wrapped,
        })
        if failure is None and wrapped > tol_area * total:
            failure = (
                f"area between level circles over reduced edge {rf} is "
                f"{wrapped!r}, not 0 mod totalArea within {tol_area * total!r}"
            )
    return records, failure


# ------------------------------------------------------------- entry points


def compare_functions(
    mesh_f: TriMeshField,
    mesh_g: TriMeshField,
    group: str = "sdiff",
    tolerances: Tolerances | None = None,
) -> Verdict:
    """Decide whether two fields are related by a transformation of the
    chosen group, as far as the computed invariants can tell."""
    tol = tolerances or Tolerances()
    _check_group(group, _GROUPS)
    if group != "sdiff" and not mesh_f.same_domain(mesh_g):
        raise DifferentMesh(
            f"{group} comparison requires both fields on the same mesh"
        )
    if group == "ham":
        _zero_mean_guard(mesh_f, tol.tol_f)
        _zero_mean_guard(mesh_g, tol.tol_f)
    gf, gg = build_reeb(mesh_f), build_reeb(mesh_g)
    return _decide(mesh_f, mesh_g, gf, gg, group, tol)


def _decide(mesh_f, mesh_g, gf, gg, group, tol, circulations=None) -> Verdict:
    tdict = tol.to_dict()
    iso = graphs_isomorphic(gf, gg, tol.tol_f, tol.tol_mass, tol.tol_profile)
    if not iso:
        return Verdict("NotEquivalent", f"measured Reeb graphs differ: "
                       f"{iso.reason}", group, tdict)

    def finish(outcome, reason, emap, cert):
        full = _map_certificate(gf, gg, iso.vertex_map, emap)
        full.update(cert)
        return Verdict(outcome, reason, group, tdict, full)

    stages = []
    if circulations is not None:
        stages.append(lambda emap, cert: _circulation_stage(
            circulations, emap, tol, cert))
    if group != "sdiff":
        # literal equality makes the identity map an explicit
        # certificate, so the genus >= 2 isotopy proxy does not water
        # down the verdict
        identical = mesh_f.same_domain(mesh_g) and np.array_equal(
            mesh_f.field, mesh_g.field
        )
        fz_f, fz_g = freeze(mesh_f, gf), freeze(mesh_g, gg)
        genus = gf.b1()
        stages.append(lambda emap, cert: _freezing_stage(
            fz_f, fz_g, iso.vertex_map, emap, cert))
        if group == "ham":
            stages.append(lambda emap, cert: _flux_stage(
                mesh_f, mesh_g, gf, gg, emap, fz_f, tol.tol_area, cert))
    if not stages:
        return finish("Equivalent", None, dict(iso.edge_map), {})

    deepest = (-1, None, None, None)
    for emap in _edge_map_variants(gf, gg, iso, tol):
        cert: dict = {}
        depth = 0
        failure = None
        for stage in stages:
            failure = stage(emap, cert)
            if failure is not None:
                break
            depth += 1
        if failure is None:
            if group != "sdiff" and genus >= 2 and not identical:
                return finish(
                    "Inconclusive",
                    "isotopy proxy: invariants agree at the homology "
                    "level, which cannot certify isotopy of circles at "
                    "genus >= 2",
                    emap, cert,
                )
            if group != "sdiff" and identical:
                cert["identity"] = True
            return finish("Equivalent", None, emap, cert)
        if depth > deepest[0]:
            deepest = (depth, failure, emap, cert)
    _, failure, emap, cert = deepest
    return finish("NotEquivalent", failure, emap, cert)


def _freezing_stage(fz_f, fz_g, vmap, emap, cert):
    reason, records = _compare_freezing(fz_f, fz_g, vmap, emap)
    cert["freezing"] = records
    return reason


def _flux_stage(mesh_f, mesh_g, gf, gg, emap, fz_f, tol_area, cert):
    records, failure = _flux_tests(
        mesh_f, mesh_g, gf, gg, emap, fz_f, tol_area
    )
    cert["flux"] = records
    return failure


def _circulation_stage(circulations, emap, tol, cert):
    cg_f, cg_g = circulations
    scale = max(
        float(np.abs(cg_f.c_minus).max(initial=0.0)),
        float(np.abs(cg_g.c_minus).max(initial=0.0)),
        1e-3,
    )
    tol_c = tol.tol_circ if tol.tol_circ is not None else 1e-6 * scale
    rows = []
    failure = None
    for ef in sorted(emap):
        eg = emap[ef]
        cf, cg = float(cg_f.c_minus[ef]), float(cg_g.c_minus[eg])
        rows.append({"edge_f": ef, "edge_g": eg,
                     "c_minus_f": cf, "c_minus_g": cg})
        if failure is None and abs(cf - cg) > tol_c:
            failure = (
                f"circulation start limit differs on edge {ef}: "
                f"{cf!r} vs {cg!r} (tolerance {tol_c!r})"
            )
    cert["circulation"] = rows
    cert["vorticity_residual_f"] = float(np.abs(cg_f.residuals).max())
    cert["vorticity_residual_g"] = float(np.abs(cg_g.residuals).max())
    return failure


def compare_cosets(
    mesh_f: TriMeshField,
    mesh_g: TriMeshField,
    group: str = "sdiff",
    tolerances: Tolerances | None = None,
) -> Verdict:
    """Decide equivalence of (field, cochain) pairs: the function
    comparison plus edgewise agreement of the circulation functions."""
    tol = tolerances or Tolerances()
    _check_group(group, ("sdiff", "sdiff0"))
    if group != "sdiff" and not mesh_f.same_domain(mesh_g):
        raise DifferentMesh(
            f"{group} comparison requires both fields on the same mesh"
        )
    gf, gg = build_reeb(mesh_f), build_reeb(mesh_g)
    circulations = (
        circulation_function(mesh_f, gf),
        circulation_function(mesh_g, gg),
    )
    return _decide(mesh_f, mesh_g, gf, gg, group, tol, circulations)
