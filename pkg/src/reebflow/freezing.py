"""Reduced graphs, cycle homology, pants colorings, and cycle areas.

The level circles over interior edge points of a measured Reeb graph cut
the surface into elementary pieces. This module extracts the discrete
part of that structure: the reduced graph left after pruning the trees
that hang off extrema, the homology classes of the cutting circles, the
pants regions between them, a two-valued twist datum on loop edges, and
the area enclosed between homologous circles.

Homology plumbing is tree-cotree: a spanning tree of the mesh edges plus
a spanning tree of the dual graph leave exactly 2*genus edges, whose
fundamental cycles generate H1 of the surface. Intersection numbers are
counted by pushing one cycle off itself to the left into the triangle
fan and counting signed crossings, so every pairing is an exact integer.
Areas between homologous cycles come from an integer potential on
triangles (the 2-chain bounded by the difference), determined up to the
fundamental class, hence the value is reported modulo the total area.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GenusTooSmall,
    InternalSweepError,
    NoLoops,
    NotHomologous,
)
from .mesh import TriMeshField
from .reeb import LevelCycle, MeasuredReebGraph, interior_level_cycle


# ------------------------------------------------------------ reduced graph


@dataclass(frozen=True)
class ReducedVertex:
    id: int
    full_vertex: int  # id of the surviving vertex in the full graph


@dataclass
class ReducedEdge:
    """A maximal chain of full-graph edges between reduced vertices.

    chain lists the full edges in walk order from src to dst and
    chain_dirs[k] is +1 when the walk traverses chain[k] upward (from
    its source). regular_edge is the chain edge carrying the regular
    point used to extract this edge's level circle.
    """

    id: int
    src: int
    dst: int
    chain: list[int]
    chain_dirs: list[int]
    regular_edge: int

    def regular_dir(self) -> int:
        return self.chain_dirs[self.chain.index(self.regular_edge)]


@dataclass
class ReducedGraph:
    """Core of a measured Reeb graph: no 1-valent vertices, 2-valent
    chains merged into single edges. vertex_cell and edge_cell retract
    every full-graph cell onto a reduced cell ('vertex', id) or
    ('edge', id); on a tree everything retracts to None."""

    vertices: list[ReducedVertex]
    edges: list[ReducedEdge]
    vertex_cell: dict = field(default_factory=dict)
    edge_cell: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def b1(self) -> int:
        if not self.vertices:
            return 0
        return self.n_edges - self.n_vertices + 1

    def loops(self) -> list[int]:
        return [e.id for e in self.edges if e.src == e.dst]

    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v.id, "full_vertex": v.full_vertex}
                for v in self.vertices
            ],
            "edges": [
                {
                    "id": e.id,
                    "src": e.src,
                    "dst": e.dst,
                    "chain": list(map(int, e.chain)),
                    "chain_dirs": list(map(int, e.chain_dirs)),
                    "regular_edge": int(e.regular_edge),
                }
                for e in self.edges
            ],
            "vertex_cell": {
                str(k): list(v) if v is not None else None
                for k, v in self.vertex_cell.items()
            },
            "edge_cell": {
                str(k): list(v) if v is not None else None
                for k, v in self.edge_cell.items()
            },
        }


def reduced_graph(graph: MeasuredReebGraph) -> ReducedGraph:
    """Prune hanging trees, then merge 2-valent chains.

    The result is homotopy equivalent to the input: b1 is preserved.
    A tree (genus 0) reduces to the empty graph.
    """
    n_v, n_e = graph.n_vertices, graph.n_edges
    alive_v = np.ones(n_v, dtype=bool)
    alive_e = np.ones(n_e, dtype=bool)
    deg = np.zeros(n_v, dtype=np.int64)
    for e in graph.edges:
        deg[e.src] += 1
        deg[e.dst] += 1
    attach = {}  # pruned cell -> full vertex it fell onto
    queue = [v.id for v in graph.vertices if deg[v.id] == 1]
    while queue:
        vid = queue.pop()
        if not alive_v[vid] or deg[vid] != 1:
            continue
        eid = next(k for k in graph.incident(vid) if alive_e[k])
        e = graph.edges[eid]
        other = e.dst if e.src == vid else e.src
        alive_v[vid] = False
        alive_e[eid] = False
        deg[vid] = 0
        deg[other] -= 1
        attach[("vertex", vid)] = other
        attach[("edge", eid)] = other
        if deg[other] == 1:
            queue.append(other)

    if not alive_e.any():
        cells_v = {v.id: None for v in graph.vertices}
        cells_e = {e.id: None for e in graph.edges}
        return ReducedGraph([], [], cells_v, cells_e)

    core = [v.id for v in graph.vertices if alive_v[v.id]]
    branch = [vid for vid in core if deg[vid] >= 3]
    if not branch:
        branch = [min(core)]  # the core is a circle; pick a base point
    rv_of = {vid: k for k, vid in enumerate(sorted(branch))}
    vertices = [ReducedVertex(k, vid) for vid, k in sorted(rv_of.items())]

    vertex_cell: dict = {vid: ("vertex", rv_of[vid]) for vid in rv_of}
    edge_cell: dict = {}
    edges: list[ReducedEdge] = []
    used = np.zeros(n_e, dtype=bool)
    for vid in sorted(rv_of):
        for eid in sorted(graph.incident(vid)):
            if not alive_e[eid] or used[eid]:
                continue
            chain, dirs = [], []
            cur_v, cur_e = vid, eid
            while True:
                e = graph.edges[cur_e]
                chain.append(cur_e)
                dirs.append(1 if e.src == cur_v else -1)
                used[cur_e] = True
                cur_v = e.dst if e.src == cur_v else e.src
                if cur_v in rv_of:
                    break
                cur_e = next(
                    k for k in graph.incident(cur_v)
                    if alive_e[k] and k != cur_e
                )
            rid = len(edges)
            edges.append(ReducedEdge(
                rid, rv_of[vid], rv_of[cur_v], chain, dirs, min(chain)
            ))
            for k in chain:
                edge_cell[k] = ("edge", rid)
            # interior chain vertices retract into the edge
            walk_v = vid
            for k, d in zip(chain[:-1], dirs[:-1]):
                e = graph.edges[k]
                walk_v = e.dst if d == 1 else e.src
                vertex_cell[walk_v] = ("edge", rid)

    def resolve(vid: int):
        while not alive_v[vid]:
            vid = attach[("vertex", vid)]
        return vertex_cell[vid]

    for v in graph.vertices:
        if v.id not in vertex_cell:
            vertex_cell[v.id] = resolve(v.id)
    for e in graph.edges:
        if e.id not in edge_cell:
            edge_cell[e.id] = resolve(attach[("edge", e.id)])

    out = ReducedGraph(vertices, edges, vertex_cell, edge_cell)
    if out.b1() != graph.b1():
        raise InternalSweepError(
            f"reduction changed b1: {graph.b1()} -> {out.b1()}"
        )
    return out


# ---------------------------------------------------------- homology basis


@dataclass
class HomologyBasis:
    """2*genus integer 1-cycles on mesh edges and their pairing.

    cycles[i] is a coefficient vector over mesh edges in the canonical
    (low id -> high id) orientation; paths[i] the same cycle as a closed
    vertex walk. matrix[i, j] is the algebraic intersection number of
    cycles i and j: skew-symmetric and unimodular.
    """

    cycles: list[np.ndarray]
    matrix: np.ndarray
    paths: list[list[int]]

    @property
    def rank(self) -> int:
        return len(self.cycles)

    def to_dict(self) -> dict:
        return {
            "cycles": [
                [[int(k), int(c[k])] for k in np.nonzero(c)[0]]
                for c in self.cycles
            ],
            "matrix": [[int(x) for x in row] for row in self.matrix],
        }


def _vertex_walk_chain(topo, path: list[int]) -> np.ndarray:
    out = np.zeros(topo.n_edges, dtype=np.int64)
    for p, q in zip(path[:-1], path[1:]):
        out[topo.edge_index(p, q)] += 1 if p < q else -1
    return out


def _left_pushoff_crossings(mesh, path: list[int]) -> np.ndarray:
    """Signed crossing counts of the left parallel copy of a closed
    simple vertex walk, as a vector over mesh edges. The copy runs
    through the triangle fans on the left of the walk, so it crosses
    exactly the spokes strictly between the outgoing and incoming
    directions; a crossing counts +1 when it enters the triangle that
    traverses the crossed edge low-to-high."""
    topo = mesh.topology
    ccw = {}  # (vertex, neighbor) -> next neighbor counterclockwise
    tri_of = {}  # directed corner pair -> triangle id
    for t, (a, b, c) in enumerate(mesh.triangles):
        ccw[(a, b)] = c
        ccw[(b, c)] = a
        ccw[(c, a)] = b
        tri_of[(a, b)] = t
        tri_of[(b, c)] = t
        tri_of[(c, a)] = t
    sigma = np.zeros(topo.n_edges, dtype=np.int64)
    vs = path[:-1]
    m = len(vs)
    for i in range(m):
        u, v, w = vs[(i - 1) % m], vs[i], vs[(i + 1) % m]
        x = w
        while True:
            x2 = ccw[(v, x)]
            if x2 == u:
                break
            # the copy steps backward through the fan, from the triangle
            # (v, x2, ccw(x2)) into (v, x, x2), across the spoke (v, x2)
            eid = topo.edge_index(v, x2)
            enters = tri_of[(x, x2)]
            sigma[eid] += 1 if enters == topo.edge_tri_plus[eid] else -1
            x = x2
    return sigma


def homology_basis(mesh: TriMeshField) -> HomologyBasis:
    """Tree-cotree basis of H1 of the mesh surface with its exact
    integer intersection matrix. The sphere yields the empty basis; on
    the torus the pair is ordered so the matrix is [[0, 1], [-1, 0]]."""
    topo = mesh.topology
    n_v, n_e = mesh.n_vertices, topo.n_edges
    neighbors: list[list[tuple[int, int]]] = [[] for _ in range(n_v)]
    for k, (a, b) in enumerate(topo.edges):
        neighbors[a].append((k, b))
        neighbors[b].append((k, a))

    in_tree = np.zeros(n_e, dtype=bool)
    parent = np.full(n_v, -1, dtype=np.int64)
    seen = np.zeros(n_v, dtype=bool)
    seen[0] = True
    stack = [0]
    order = []
    while stack:
        v = stack.pop()
        order.append(v)
        for k, w in neighbors[v]:
            if not seen[w]:
                seen[w] = True
                in_tree[k] = True
                parent[w] = v
                stack.append(w)
    if not seen.all():
        raise InternalSweepError("mesh 1-skeleton is not connected")

    # dual spanning tree through the remaining edges
    tri_seen = np.zeros(mesh.n_triangles, dtype=bool)
    in_cotree = np.zeros(n_e, dtype=bool)
    tri_seen[0] = True
    stack = [0]
    tri_edges = topo.tri_edges
    while stack:
        t = stack.pop()
        for k in tri_edges[t]:
            if in_tree[k]:
                continue
            other = int(
                topo.edge_tri_plus[k]
                if topo.edge_tri_minus[k] == t
                else topo.edge_tri_minus[k]
            )
            if not tri_seen[other]:
                tri_seen[other] = True
                in_cotree[k] = True
                stack.append(other)

    leftover = np.nonzero(~in_tree & ~in_cotree)[0]

    def to_root(v: int) -> list[int]:
        out = [v]
        while parent[out[-1]] >= 0:
            out.append(int(parent[out[-1]]))
        return out

    paths: list[list[int]] = []
    cycles: list[np.ndarray] = []
    for k in leftover:
        a, b = int(topo.edges[k][0]), int(topo.edges[k][1])
        up_a, up_b = to_root(a), to_root(b)
        tail = 0
        while (
            tail < min(len(up_a), len(up_b))
            and up_a[-1 - tail] == up_b[-1 - tail]
        ):
            tail += 1
        lca_a = up_a[: len(up_a) - tail + 1]  # a .. lca
        lca_b = up_b[: len(up_b) - tail + 1]  # b .. lca
        path = [a, b] + lca_b[1:] + lca_a[-2::-1]
        paths.append(path)
        cycles.append(_vertex_walk_chain(topo, path))

    k2 = len(cycles)
    matrix = np.zeros((k2, k2), dtype=np.int64)
    if k2:
        sigmas = [_left_pushoff_crossings(mesh, p) for p in paths]
        for i in range(k2):
            for j in range(k2):
                matrix[i, j] = int(sigmas[i] @ cycles[j])
        if np.any(matrix + matrix.T != 0):
            raise InternalSweepError("intersection matrix is not skew")
        det = round(float(np.linalg.det(matrix.astype(np.float64))))
        if abs(det) != 1:
            raise InternalSweepError(
                f"intersection pairing is not unimodular (det {det})"
            )
        if k2 == 2 and matrix[0, 1] == -1:
            cycles.reverse()
            paths.reverse()
            matrix = -matrix
    return HomologyBasis(cycles, matrix, paths)


def cycle_class(
    mesh: TriMeshField, basis: HomologyBasis, cycle: LevelCycle
) -> np.ndarray:
    """Integer coordinates of a level circle's homology class in the
    basis, via signed crossings with the basis cycles."""
    if basis.rank == 0:
        return np.zeros(0, dtype=np.int64)
    topo = mesh.topology
    cross = np.where(
        topo.edge_tri_plus[cycle.mesh_edges] == cycle.triangles, 1, -1
    )
    w = np.array(
        [int(cross @ c[cycle.mesh_edges]) for c in basis.cycles],
        dtype=np.int64,
    )
    x = np.linalg.solve(
        basis.matrix.T.astype(np.float64), w.astype(np.float64)
    )
    xi = np.rint(x).astype(np.int64)
    if np.any(basis.matrix.T @ xi != w):
        raise InternalSweepError("pairing system has no integer solution")
    return xi


def edge_homology_classes(
    mesh: TriMeshField,
    graph: MeasuredReebGraph,
    reduced: ReducedGraph,
    basis: HomologyBasis,
) -> dict[int, np.ndarray]:
    """Homology class of the level circle over each reduced edge's
    regular point. Classes of embedded circles are primitive or zero."""
    out = {}
    for e in reduced.edges:
        cyc = interior_level_cycle(graph, e.regular_edge)
        cls = cycle_class(mesh, basis, cyc)
        g = 0
        for c in cls:
            g = math.gcd(g, int(abs(c)))
        if g > 1:
            raise InternalSweepError(
                f"level circle class {cls.tolist()} is not primitive"
            )
        out[e.id] = cls
    return out


# ----------------------------------------------------------- pants regions


@dataclass
class PantsColoring:
    """Triangle partition cut by the reduced-edge level circles.

    regions[r] lists the triangles of region r; vertex_region maps each
    reduced vertex to its region; edge_sides[e] = (below, above) region
    indices on the two sides of reduced edge e's cutting circle;
    cut_levels[e] records the level actually used.
    """

    regions: list[np.ndarray]
    vertex_region: list[int]
    edge_sides: list[tuple[int, int]]
    cut_levels: list[float]

    def to_dict(self) -> dict:
        return {
            "regions": [list(map(int, r)) for r in self.regions],
            "vertex_region": list(map(int, self.vertex_region)),
            "edge_sides": [list(map(int, s)) for s in self.edge_sides],
            "cut_levels": [float(z) for z in self.cut_levels],
        }


_CUT_FRACS = (0.5, 0.35, 0.65, 0.25, 0.75, 0.45, 0.55)


def pants_coloring(
    mesh: TriMeshField,
    graph: MeasuredReebGraph,
    reduced: ReducedGraph,
) -> PantsColoring:
    """Cut the surface along one level circle per reduced edge and
    flood-fill the pieces. Cut triangles join the side holding two of
    their corners (their one uncut adjacency). Region-vertex matching
    comes from the walk direction at each regular point: the side below
    the cut belongs to the chain end the walk came from."""
    if graph.b1() < 2:
        raise GenusTooSmall(
            f"pants decomposition needs genus >= 2, got {graph.b1()}"
        )
    topo = mesh.topology
    n_t = mesh.n_triangles

    owner = np.full(n_t, -1, dtype=np.int64)
    cuts: list[LevelCycle] = []
    for e in reduced.edges:
        cyc = None
        for frac in _CUT_FRACS:
            cand = interior_level_cycle(graph, e.regular_edge, frac)
            if np.all(owner[cand.triangles] == -1):
                cyc = cand
                break
        if cyc is None:
            raise InternalSweepError(
                "cut circles overlap on triangles at every retry level; "
                "refine the mesh"
            )
        owner[cyc.triangles] = e.id
        cuts.append(cyc)

    blocked = np.zeros(topo.n_edges, dtype=bool)
    for cyc in cuts:
        blocked[cyc.mesh_edges] = True
    label = np.full(n_t, -1, dtype=np.int64)
    n_regions = 0
    for start in range(n_t):
        if label[start] >= 0:
            continue
        label[start] = n_regions
        stack = [start]
        while stack:
            t = stack.pop()
            for k in topo.tri_edges[t]:
                if blocked[k]:
                    continue
                other = int(
                    topo.edge_tri_plus[k]
                    if topo.edge_tri_minus[k] == t
                    else topo.edge_tri_minus[k]
                )
                if label[other] < 0:
                    label[other] = n_regions
                    stack.append(other)
        n_regions += 1
    if n_regions != reduced.n_vertices:
        raise InternalSweepError(
            f"cutting produced {n_regions} regions for "
            f"{reduced.n_vertices} reduced vertices"
        )

    f = mesh.field
    edge_sides: list[tuple[int, int]] = []
    for e, cyc in zip(reduced.edges, cuts):
        n_below = np.sum(f[mesh.triangles[cyc.triangles]] < cyc.level, axis=1)
        below = set(label[cyc.triangles[n_below == 2]].tolist())
        above = set(label[cyc.triangles[n_below == 1]].tolist())
        if len(below) != 1 or len(above) != 1:
            raise InternalSweepError(
                f"cut circle of reduced edge {e.id} has ambiguous sides "
                f"(below {sorted(below)}, above {sorted(above)})"
            )
        edge_sides.append((below.pop(), above.pop()))

    vertex_region = np.full(reduced.n_vertices, -1, dtype=np.int64)
    for e, (r_below, r_above) in zip(reduced.edges, edge_sides):
        below_end = e.src if e.regular_dir() == 1 else e.dst
        above_end = e.dst if e.regular_dir() == 1 else e.src
        for rv, region in ((below_end, r_below), (above_end, r_above)):
            if vertex_region[rv] not in (-1, region):
                raise InternalSweepError(
                    f"reduced vertex {rv} meets two regions "
                    f"({vertex_region[rv]} and {region})"
                )
            vertex_region[rv] = region
    if sorted(vertex_region.tolist()) != list(range(n_regions)):
        raise InternalSweepError(
            "region-vertex matching is not a bijection: "
            f"{vertex_region.tolist()}"
        )

    regions = [
        np.nonzero(label == r)[0].astype(np.int64) for r in range(n_regions)
    ]
    return PantsColoring(
        regions,
        vertex_region.tolist(),
        edge_sides,
        [float(c.level) for c in cuts],
    )


# -------------------------------------------------------------- half twists


def half_twists(
    graph: MeasuredReebGraph, reduced: ReducedGraph
) -> dict[int, int]:
    """Sign in {+1, -1} for each loop edge of the reduced graph.

    The loop is oriented from its smaller-id incidence stub; walking it
    crosses the regular point upward or downward, which coorients the
    level circle there; the surface orientation turns that coorientation
    into a running direction. The sign records whether that direction
    crosses the circle's smallest crossed mesh edge low-to-high.
    All choices are fixed conventions; the value is comparable between
    functions on the same mesh.
    """
    loops = reduced.loops()
    if not loops:
        raise NoLoops("reduced graph has no loop edges")
    if graph.backing is None:
        raise ValueError("half twists require a mesh-backed graph")
    topo = graph.backing.mesh.topology
    out = {}
    for rid in loops:
        e = reduced.edges[rid]
        cyc = interior_level_cycle(graph, e.regular_edge)
        i = int(np.argmin(cyc.mesh_edges))
        # stored traversal keeps the sublevel set on its left, so the
        # upward coorientation runs against it and downward along it
        along_traversal = e.regular_dir() == -1
        positive_here = (
            topo.edge_tri_plus[cyc.mesh_edges[i]] == cyc.triangles[i]
        )
        out[rid] = 1 if along_traversal == bool(positive_here) else -1
    return out


# ------------------------------------------------------ areas between cycles


def snap_cycle(mesh: TriMeshField, cycle: LevelCycle) -> np.ndarray:
    """Integer mesh 1-cycle homologous to a level circle.

    Each crossing point slides down its mesh edge to the endpoint below
    the level; consecutive snapped endpoints share the crossed triangle,
    so the walk stays on mesh edges.
    """
    topo, f = mesh.topology, mesh.field
    ends = topo.edges[cycle.mesh_edges]
    below = np.where(
        f[ends[:, 0]] < cycle.level, ends[:, 0], ends[:, 1]
    ).astype(np.int64)
    out = np.zeros(topo.n_edges, dtype=np.int64)
    n = len(below)
    for i in range(n):
        p, q = int(below[i]), int(below[(i + 1) % n])
        if p == q:
            continue
        out[topo.edge_index(p, q)] += 1 if p < q else -1
    return out


def chain_area_between(mesh: TriMeshField, cycle1, cycle2) -> float:
    """Area of a 2-chain bounded by cycle2 - cycle1, in [0, totalArea).

    Cycles are integer vectors over mesh edges in the canonical low-to-
    high orientation. The bounding chain is an integer potential on
    triangles whose difference across each edge matches the input; it
    exists exactly when the cycles are homologous and is unique up to
    the fundamental class, so the area is well defined modulo totalArea.
    """
    topo = mesh.topology
    d1 = np.asarray(cycle1, dtype=np.int64)
    d2 = np.asarray(cycle2, dtype=np.int64)
    if d1.shape != (topo.n_edges,) or d2.shape != (topo.n_edges,):
        raise ValueError("cycles must be vectors over all mesh edges")
    d = d2 - d1
    x = np.zeros(mesh.n_triangles, dtype=np.int64)
    seen = np.zeros(mesh.n_triangles, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        t = stack.pop()
        for k in topo.tri_edges[t]:
            plus, minus = int(topo.edge_tri_plus[k]), int(
                topo.edge_tri_minus[k]
            )
            other = plus if minus == t else minus
            if not seen[other]:
                seen[other] = True
                x[other] = x[t] + (d[k] if minus == t else -d[k])
                stack.append(other)
    resid = x[topo.edge_tri_plus] - x[topo.edge_tri_minus] - d
    if np.any(resid != 0):
        raise NotHomologous(
            "no triangle chain bounds the difference of the cycles"
        )
    total = mesh.total_area()
    area = math.fmod(float(mesh.triangle_areas() @ x), total)
    if area < 0:
        area += total
    return area


# ------------------------------------------------------------ frozen bundle


@dataclass
class FrozenData:
    """Everything the level circles pin to the surface: the reduced
    graph, the homology basis, each cutting circle's class, the pants
    regions (genus >= 2), and the loop twist signs."""

    graph: MeasuredReebGraph
    reduced: ReducedGraph
    basis: HomologyBasis
    edge_classes: dict[int, np.ndarray]
    coloring: PantsColoring | None
    half_twist: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "reduced": self.reduced.to_dict(),
            "basis": self.basis.to_dict(),
            "edge_classes": {
                str(k): [int(x) for x in v]
                for k, v in self.edge_classes.items()
            },
            "coloring": (
                self.coloring.to_dict() if self.coloring is not None else None
            ),
            "half_twist": {
                str(k): int(v) for k, v in self.half_twist.items()
            },
        }

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")


def freeze(mesh: TriMeshField, graph: MeasuredReebGraph) -> FrozenData:
    """Compute the full freezing bundle of a mesh-backed graph."""
    if graph.backing is None:
        raise ValueError("freezing requires a mesh-backed graph")
    reduced = reduced_graph(graph)
    basis = homology_basis(mesh)
    if basis.rank != 2 * graph.b1():
        raise InternalSweepError(
            f"homology rank {basis.rank} does not match genus {graph.b1()}"
        )
    classes = edge_homology_classes(mesh, graph, reduced, basis)
    coloring = (
        pants_coloring(mesh, graph, reduced) if graph.b1() >= 2 else None
    )
    twists = half_twists(graph, reduced) if reduced.loops() else {}
    return FrozenData(graph, reduced, basis, classes, coloring, twists)
