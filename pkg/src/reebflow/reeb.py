"""Measured Reeb graphs of simple piecewise linear functions.

The Reeb graph contracts every connected component of every level set of
the field to a point. For a simple function (distinct critical values,
no degenerate saddles) on a closed oriented surface the graph has one
1-valent vertex per extremum and one 3-valent vertex per saddle, every
edge is oriented toward increasing field value, and the area measure of
the surface pushes forward to an edgewise measure mu with continuous,
strictly increasing cumulative profiles.

The sweep works on exact piecewise linear data: no numerical contouring,
every area is the closed-form area of a clipped triangle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DuplicateCriticalValue,
    HitsVertex,
    InternalSweepError,
    OutOfRange,
)
from .mesh import (
    KIND_MAX,
    KIND_MIN,
    KIND_SADDLE,
    SurfaceReport,
    TriMeshField,
    validate,
)

MASS_BALANCE_RTOL = 1e-12


# ----------------------------------------------------- clipped-triangle areas


def sublevel_area(v1, v2, v3, area, z):
    """Area of {field <= z} inside triangles with sorted vertex values
    v1 <= v2 <= v3. All arguments broadcast."""
    v1, v2, v3 = np.asarray(v1), np.asarray(v2), np.asarray(v3)
    area, z = np.asarray(area), np.asarray(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = area * (z - v1) ** 2 / ((v2 - v1) * (v3 - v1))
        high = area * (v3 - z) ** 2 / ((v3 - v2) * (v3 - v1))
    return np.where(
        z <= v1,
        0.0,
        np.where(z <= v2, low, np.where(z <= v3, area - high, area)),
    )


def sublevel_moment(v1, v2, v3, area, z):
    """Integral of the field over {field <= z}, same conventions."""
    v1, v2, v3 = np.asarray(v1), np.asarray(v2), np.asarray(v3)
    area, z = np.asarray(area), np.asarray(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        low_a = area * (z - v1) ** 2 / ((v2 - v1) * (v3 - v1))
        high_a = area * (v3 - z) ** 2 / ((v3 - v2) * (v3 - v1))
    # a linear field averages to the mean of the corner values
    low_m = low_a * (v1 + 2.0 * z) / 3.0
    high_m = high_a * (v3 + 2.0 * z) / 3.0
    full = area * (v1 + v2 + v3) / 3.0
    return np.where(
        z <= v1,
        0.0,
        np.where(z <= v2, low_m, np.where(z <= v3, full - high_m, full)),
    )


def band_area(v1, v2, v3, area, lo, hi):
    """Area of {lo < field <= hi} inside the triangles."""
    return sublevel_area(v1, v2, v3, area, hi) - sublevel_area(
        v1, v2, v3, area, lo
    )


# -------------------------------------------------------------- graph model


@dataclass(frozen=True)
class ReebVertex:
    id: int
    f: float
    kind: str
    mesh_vertex: int = -1


@dataclass
class ReebEdge:
    id: int
    src: int
    dst: int
    mass: float
    profile: np.ndarray  # (K, 2) columns (z, mu), strictly increasing


class MeasuredReebGraph:
    """Vertices, oriented edges and the pushforward measure profiles.

    Graphs built from a mesh carry a backing object that knows which
    triangles project where; purely combinatorial graphs (test data,
    random samples) carry backing=None.
    """

    def __init__(self, vertices, edges, total_mass, backing=None):
        self.vertices: list[ReebVertex] = list(vertices)
        self.edges: list[ReebEdge] = list(edges)
        self.total_mass = float(total_mass)
        self.backing = backing
        self._in = [[] for _ in self.vertices]
        self._out = [[] for _ in self.vertices]
        for e in self.edges:
            self._out[e.src].append(e.id)
            self._in[e.dst].append(e.id)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def b1(self) -> int:
        """First Betti number; equals the genus of the backing surface."""
        return self.n_edges - self.n_vertices + 1

    def in_edges(self, vid: int) -> list[int]:
        return list(self._in[vid])

    def out_edges(self, vid: int) -> list[int]:
        return list(self._out[vid])

    def incident(self, vid: int) -> list[int]:
        return self.in_edges(vid) + self.out_edges(vid)

    def edge_span(self, eid: int) -> tuple[float, float]:
        e = self.edges[eid]
        return self.vertices[e.src].f, self.vertices[e.dst].f

    def saddle_trunk(self, vid: int) -> tuple[int, list[int]]:
        """(trunk edge id, [branch edge ids]) at a 3-valent vertex. The
        trunk is the lone edge on its own side of the vertex."""
        ins, outs = self._in[vid], self._out[vid]
        if len(ins) == 2 and len(outs) == 1:
            return outs[0], list(ins)
        if len(ins) == 1 and len(outs) == 2:
            return ins[0], list(outs)
        raise ValueError(f"vertex {vid} is not 3-valent")

    def project_vertex(self, i: int):
        """Image of mesh vertex i: ('vertex', vid) or ('edge', eid, t)
        with t the normalized field coordinate along the edge."""
        if self.backing is None:
            raise ValueError("graph has no mesh backing")
        return self.backing.vertex_image(i)


def check_graph(graph: MeasuredReebGraph, rtol: float = 1e-9) -> None:
    """Structural sanity of a measured Reeb graph; raises
    InternalSweepError on violations. Used on every build and on
    synthetic graphs."""
    n = graph.n_vertices
    for e in graph.edges:
        fa, fb = graph.vertices[e.src].f, graph.vertices[e.dst].f
        if not fa < fb:
            raise InternalSweepError(f"edge {e.id} not oriented upward")
        p = e.profile
        if p[0, 0] != fa or p[-1, 0] != fb:
            raise InternalSweepError(f"edge {e.id} profile span mismatch")
        if p[0, 1] != 0.0:
            raise InternalSweepError(f"edge {e.id} profile must start at 0")
        if abs(p[-1, 1] - e.mass) > rtol * max(e.mass, graph.total_mass):
            raise InternalSweepError(f"edge {e.id} profile mass mismatch")
        if np.any(np.diff(p[:, 0]) <= 0) or np.any(np.diff(p[:, 1]) <= 0):
            raise InternalSweepError(f"edge {e.id} profile not increasing")
    for v in graph.vertices:
        nin, nout = len(graph.in_edges(v.id)), len(graph.out_edges(v.id))
        shape_ok = {
            KIND_MIN: nin == 0 and nout == 1,
            KIND_MAX: nin == 1 and nout == 0,
            KIND_SADDLE: (nin, nout) in ((1, 2), (2, 1)),
        }.get(v.kind, False)
        if not shape_ok:
            raise InternalSweepError(
                f"vertex {v.id} ({v.kind}) has valence ({nin}, {nout})"
            )
    mass = float(np.add.reduce([e.mass for e in graph.edges]))
    if abs(mass - graph.total_mass) > max(rtol, 1e-9) * graph.total_mass:
        raise InternalSweepError("edge masses do not add up to total mass")
    # connectivity
    if n > 1:
        rows = [e.src for e in graph.edges] + [e.dst for e in graph.edges]
        cols = [e.dst for e in graph.edges] + [e.src for e in graph.edges]
        m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        ncomp, _ = connected_components(m.tocsr(), directed=False)
        if ncomp != 1:
            raise InternalSweepError("graph is not connected")


# ------------------------------------------------------------- mesh backing


class ReebBacking:
    """Projection data tying a measured Reeb graph to its source mesh."""

    def __init__(self, mesh, crit_values, crit_vertices, gap_tris,
                 gap_labels, edge_of, vertex_of):
        self.mesh: TriMeshField = mesh
        self.crit_values = crit_values          # (k,) increasing
        self.crit_vertices = crit_vertices      # (k,) mesh vertex ids
        self.gap_tris = gap_tris                # per gap: triangle ids
        self.gap_labels = gap_labels            # per gap: component labels
        self.edge_of = edge_of                  # (gap, label) -> edge id
        self.vertex_of = vertex_of              # mesh vertex id -> reeb vid
        tv = mesh.field[mesh.triangles]
        tv = np.sort(tv, axis=1)
        self.tri_v1, self.tri_v2, self.tri_v3 = tv[:, 0], tv[:, 1], tv[:, 2]
        self.tri_area = mesh.triangle_areas()
        # per edge: [(gap index, triangle ids)], ordered by gap
        pieces: dict[int, list] = {}
        for g in range(len(gap_tris)):
            tris, labels = gap_tris[g], gap_labels[g]
            for lab in np.unique(labels):
                eid = edge_of[(g, int(lab))]
                pieces.setdefault(eid, []).append((g, tris[labels == lab]))
        for lst in pieces.values():
            lst.sort(key=lambda p: p[0])
        self.edge_pieces = pieces

    def n_gaps(self) -> int:
        return len(self.gap_tris)

    def locate_gap(self, z: float) -> int:
        """Index g with crit_values[g] < z <= crit_values[g+1] (clipped)."""
        g = int(np.searchsorted(self.crit_values, z, side="left")) - 1
        return min(max(g, 0), self.n_gaps() - 1)

    def piece_area_below(self, tri_ids, z):
        return sublevel_area(
            self.tri_v1[tri_ids], self.tri_v2[tri_ids],
            self.tri_v3[tri_ids], self.tri_area[tri_ids], z,
        )

    def edge_measure_at(self, eid: int, z: float) -> float:
        """Exact pushforward mass of the edge part below level z."""
        total = 0.0
        for g, tris in self.edge_pieces[eid]:
            lo, hi = self.crit_values[g], self.crit_values[g + 1]
            if z <= lo:
                break
            zc = min(z, hi)
            chunk = self.piece_area_below(tris, zc) - self.piece_area_below(
                tris, lo
            )
            total += float(np.add.reduce(chunk))
        return total

    def edge_moment(self, eid: int) -> float:
        """Exact integral of f dmu over the edge, from the closed-form
        moment of the linear field over clipped triangles."""
        total = 0.0
        for g, tris in self.edge_pieces[eid]:
            lo, hi = self.crit_values[g], self.crit_values[g + 1]
            m_hi = sublevel_moment(
                self.tri_v1[tris], self.tri_v2[tris], self.tri_v3[tris],
                self.tri_area[tris], hi,
            )
            m_lo = sublevel_moment(
                self.tri_v1[tris], self.tri_v2[tris], self.tri_v3[tris],
                self.tri_area[tris], lo,
            )
            total += float(np.add.reduce(m_hi - m_lo))
        return total

    def seed_triangle(self, eid: int, z: float) -> int:
        g = self.locate_gap(z)
        for gg, tris in self.edge_pieces[eid]:
            if gg == g:
                crossing = tris[
                    (self.tri_v1[tris] < z) & (self.tri_v3[tris] > z)
                ]
                if len(crossing):
                    return int(crossing.min())
        raise OutOfRange(f"level {z!r} does not cross edge {eid}")

    def vertex_image(self, i: int):
        if i in self.vertex_of:
            return ("vertex", self.vertex_of[i])
        fz = float(self.mesh.field[i])
        star = np.nonzero(np.any(self.mesh.triangles == i, axis=1))[0]
        # prefer the gap below f(i); at the bottom fall back to above
        for g in (self.locate_gap(fz), self.locate_gap(np.nextafter(fz, np.inf))):
            tris, labels = self.gap_tris[g], self.gap_labels[g]
            pos = np.nonzero(np.isin(tris, star))[0]
            if len(pos):
                eid = self.edge_of[(g, int(labels[pos[0]]))]
                return ("edge", eid, fz)
        raise InternalSweepError(f"vertex {i} projects nowhere")


# ------------------------------------------------------------------ sweeping


def _components(n: int, rows, cols) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if len(rows) == 0:
        return np.arange(n, dtype=np.int64)
    m = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)
    )
    _, labels = connected_components(m.tocsr(), directed=False)
    return labels


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _interval_components(mesh, tmin, tmax, elo, ehi, lo, hi):
    """Connected components of the open band lo < f < hi, as triangle
    labels. Returns (triangle ids, labels)."""
    topo = mesh.topology
    sel_t = np.nonzero((tmin < hi) & (tmax > lo))[0]
    index = np.full(mesh.n_triangles, -1, dtype=np.int64)
    index[sel_t] = np.arange(len(sel_t))
    sel_e = (elo < hi) & (ehi > lo)
    a = index[topo.edge_tri_plus[sel_e]]
    b = index[topo.edge_tri_minus[sel_e]]
    if np.any(a < 0) or np.any(b < 0):
        raise InternalSweepError("band adjacency escaped the band")
    labels = _components(len(sel_t), a, b)
    return sel_t, labels


def build_reeb(
    mesh: TriMeshField,
    report: SurfaceReport | None = None,
    n_levels: int = 64,
) -> MeasuredReebGraph:
    """Sweep the mesh and build its measured Reeb graph.

    Requires a simple field: all critical values distinct (run
    ensure_simple first if unsure). n_levels sets the number of uniform
    interior profile samples per edge; 16 geometrically refined samples
    are always added toward each endpoint.
    """
    if report is None:
        report = validate(mesh)
    crit = report.critical_points
    values = np.array([cp.value for cp in crit])
    if len(np.unique(values)) != len(values):
        raise DuplicateCriticalValue(
            "critical values are not pairwise distinct; run ensure_simple"
        )
    k = len(crit)
    f = mesh.field
    tv = f[mesh.triangles]
    tmin, tmax = tv.min(axis=1), tv.max(axis=1)
    topo = mesh.topology
    ef = f[topo.edges]
    elo, ehi = ef.min(axis=1), ef.max(axis=1)

    # components of every inter-critical band
    gap_tris, gap_labels, gap_offsets = [], [], [0]
    for g in range(k - 1):
        tris, labels = _interval_components(
            mesh, tmin, tmax, elo, ehi, values[g], values[g + 1]
        )
        gap_tris.append(tris)
        gap_labels.append(labels)
        gap_offsets.append(gap_offsets[-1] + int(labels.max()) + 1)

    def global_id(gap: int, label: int) -> int:
        return gap_offsets[gap] + label

    uf = _UnionFind(gap_offsets[-1])
    src_of: dict[int, int] = {}  # global gap-component id -> reeb vertex
    dst_of: dict[int, int] = {}

    mids = (values[:-1] + values[1:]) / 2.0
    star_cache = [None] * k
    for j in range(k):
        lo = mids[j - 1] if j > 0 else values[0] - 1.0
        hi = mids[j] if j < k - 1 else values[-1] + 1.0
        tris, labels = _interval_components(
            mesh, tmin, tmax, elo, ehi, lo, hi
        )
        where = np.full(mesh.n_triangles, -1, dtype=np.int64)
        where[tris] = labels
        star = np.nonzero(np.any(mesh.triangles == crit[j].vertex, axis=1))[0]
        star_cache[j] = star
        crit_label = int(where[star[0]])
        if np.any(where[star] != crit_label):
            raise InternalSweepError(
                f"star of critical vertex {crit[j].vertex} split in its slab"
            )

        def side_map(gap: int) -> dict[int, int]:
            out: dict[int, int] = {}
            g_tris, g_labels = gap_tris[gap], gap_labels[gap]
            slab_lab = where[g_tris]
            mask = slab_lab >= 0
            pairs = np.unique(
                np.stack([g_labels[mask], slab_lab[mask]], axis=1), axis=0
            )
            for lab, slab in pairs:
                if int(lab) in out:
                    raise InternalSweepError(
                        "band component meets two slab components"
                    )
                out[int(lab)] = int(slab)
            return out

        below = side_map(j - 1) if j > 0 else {}
        above = side_map(j) if j < k - 1 else {}
        in_ends = [g for g, s in below.items() if s == crit_label]
        out_ends = [g for g, s in above.items() if s == crit_label]
        kind = crit[j].kind
        shape_ok = {
            KIND_MIN: (len(in_ends), len(out_ends)) == (0, 1),
            KIND_MAX: (len(in_ends), len(out_ends)) == (1, 0),
            KIND_SADDLE: (len(in_ends), len(out_ends)) in ((1, 2), (2, 1)),
        }[kind]
        if not shape_ok:
            raise InternalSweepError(
                f"critical vertex {crit[j].vertex} ({kind}) has "
                f"{len(in_ends)} ends below and {len(out_ends)} above"
            )
        for g in in_ends:
            dst_of[global_id(j - 1, g)] = j
        for g in out_ends:
            src_of[global_id(j, g)] = j
        # cylinders passing through this level: splice below onto above
        passing: dict[int, list] = {}
        for g, s in below.items():
            if s != crit_label:
                passing.setdefault(s, [[], []])[0].append(g)
        for g, s in above.items():
            if s != crit_label:
                passing.setdefault(s, [[], []])[1].append(g)
        for s, (bs, as_) in passing.items():
            if len(bs) != 1 or len(as_) != 1:
                raise InternalSweepError(
                    "regular slab component is not a simple cylinder"
                )
            uf.union(global_id(j - 1, bs[0]), global_id(j, as_[0]))

    # collect union-find classes into edges
    members: dict[int, list] = {}
    for g in range(k - 1):
        for lab in range(gap_offsets[g + 1] - gap_offsets[g]):
            gid = global_id(g, lab)
            members.setdefault(uf.find(gid), []).append((g, lab))
    tv_sorted = np.sort(tv, axis=1)
    v1, v2, v3 = tv_sorted[:, 0], tv_sorted[:, 1], tv_sorted[:, 2]
    areas = mesh.triangle_areas()

    raw_edges = []
    for root, mems in members.items():
        mems.sort()
        srcs = [src_of[global_id(g, l)] for g, l in mems
                if global_id(g, l) in src_of]
        dsts = [dst_of[global_id(g, l)] for g, l in mems
                if global_id(g, l) in dst_of]
        if len(srcs) != 1 or len(dsts) != 1:
            raise InternalSweepError("edge chain lacks unique endpoints")
        gaps = [g for g, _ in mems]
        if gaps != list(range(srcs[0], dsts[0])):
            raise InternalSweepError("edge chain has gaps out of order")
        first_tris = gap_tris[mems[0][0]][gap_labels[mems[0][0]] == mems[0][1]]
        raw_edges.append((srcs[0], dsts[0], mems, int(first_tris.min())))
    raw_edges.sort(key=lambda r: (values[r[0]], values[r[1]], r[3]))

    vertices = [
        ReebVertex(i, float(cp.value), cp.kind, cp.vertex)
        for i, cp in enumerate(crit)
    ]
    vertex_of = {cp.vertex: i for i, cp in enumerate(crit)}
    edge_of: dict[tuple[int, int], int] = {}
    edges = []
    for eid, (vsrc, vdst, mems, _seed) in enumerate(raw_edges):
        for g, lab in mems:
            edge_of[(g, lab)] = eid
        edges.append((eid, vsrc, vdst, mems))

    backing = ReebBacking(
        mesh, values, np.array([cp.vertex for cp in crit]),
        gap_tris, gap_labels, edge_of, vertex_of,
    )

    reeb_edges = []
    for eid, vsrc, vdst, mems in edges:
        mass = 0.0
        for g, lab in mems:
            tris = gap_tris[g][gap_labels[g] == lab]
            mass += float(np.add.reduce(band_area(
                v1[tris], v2[tris], v3[tris], areas[tris],
                values[g], values[g + 1],
            )))
        profile = _edge_profile(
            backing, eid, float(values[vsrc]), float(values[vdst]),
            mass, n_levels,
        )
        reeb_edges.append(ReebEdge(eid, vsrc, vdst, mass, profile))

    total = mesh.total_area()
    balance = float(np.add.reduce([e.mass for e in reeb_edges]))
    if abs(balance - total) > MASS_BALANCE_RTOL * total:
        raise InternalSweepError(
            f"pushforward loses mass: {balance!r} != {total!r}"
        )
    graph = MeasuredReebGraph(vertices, reeb_edges, total, backing)
    check_graph(graph)
    return graph


def _edge_profile(backing, eid, a, b, mass, n_levels):
    h = (b - a) / (n_levels + 1)
    uniform = a + h * np.arange(1, n_levels + 1)
    fine = h * 0.5 ** np.arange(1, 17)
    zs = np.unique(np.concatenate([[a], uniform, a + fine, b - fine, [b]]))
    mu = np.array([backing.edge_measure_at(eid, z) for z in zs])
    if abs(mu[-1] - mass) > 1e-9 * max(mass, 1e-300):
        raise InternalSweepError("profile does not integrate to edge mass")
    mu[0], mu[-1] = 0.0, mass
    profile = np.stack([zs, mu], axis=1)
    if np.any(np.diff(mu) <= 0):
        raise InternalSweepError("profile is not strictly increasing")
    return profile


# -------------------------------------------------------------- measurement


def measure_at(graph: MeasuredReebGraph, eid: int, z: float) -> float:
    """mu of the part of edge eid below level z. Exact on mesh-backed
    graphs, linear interpolation of the stored profile otherwise."""
    e = graph.edges[eid]
    a, b = graph.edge_span(eid)
    if not a <= z <= b:
        raise OutOfRange(f"level {z!r} outside edge span [{a!r}, {b!r}]")
    if graph.backing is not None:
        return graph.backing.edge_measure_at(eid, z)
    return float(np.interp(z, e.profile[:, 0], e.profile[:, 1]))


# -------------------------------------------------------------- level cycles


@dataclass
class LevelCycle:
    """An oriented level circle traversing mesh triangles.

    Traversal keeps the sublevel set on the left. points[i] is the entry
    point into triangles[i]; the in-triangle segment i runs from
    points[i] to points[(i+1) % n]. mesh_edges[i] is the crossed mesh
    edge, params[i] the crossing position along the canonical (low id ->
    high id) direction of that edge, and signs[i] = +1 when the canonical
    direction points from below the level to above it.
    """

    edge_id: int
    level: float
    points: np.ndarray       # (n, 3)
    triangles: np.ndarray    # (n,)
    mesh_edges: np.ndarray   # (n,)
    params: np.ndarray       # (n,)
    signs: np.ndarray        # (n,)

    def __len__(self) -> int:
        return len(self.triangles)

    def crossing_set(self) -> set[int]:
        return set(int(e) for e in self.mesh_edges)


def level_cycle(graph: MeasuredReebGraph, eid: int, z: float) -> LevelCycle:
    """Trace the level circle over the interior point (eid, z)."""
    if graph.backing is None:
        raise ValueError("level cycles require a mesh-backed graph")
    backing = graph.backing
    mesh = backing.mesh
    a, b = graph.edge_span(eid)
    if not a < z < b:
        raise OutOfRange(f"level {z!r} not interior to edge [{a!r}, {b!r}]")
    f = mesh.field
    order = np.searchsorted(np.sort(f), z)
    hit = np.sort(f)[order - 1] == z if order > 0 else False
    if hit or (order < len(f) and np.sort(f)[order] == z):
        raise HitsVertex(f"level {z!r} passes through a mesh vertex")

    topo = mesh.topology
    tris = mesh.triangles
    seed = backing.seed_triangle(eid, z)
    pts, tri_seq, edge_seq, par_seq, sign_seq = [], [], [], [], []
    t = seed
    entry_edge = None
    while True:
        corners = tris[t]
        fv = f[corners]
        up = down = None
        for s in range(3):
            p, q = corners[s], corners[(s + 1) % 3]
            if f[p] < z < f[q]:
                up = (p, q)
            elif f[p] > z > f[q]:
                down = (p, q)
        if up is None or down is None:
            raise InternalSweepError("level walk entered a non-crossing triangle")
        p, q = up
        tpar = (z - f[p]) / (f[q] - f[p])
        pts.append(mesh.vertices[p] + tpar * (mesh.vertices[q] - mesh.vertices[p]))
        lo, hi = (p, q) if p < q else (q, p)
        eidx = topo.edge_index(lo, hi)
        edge_seq.append(eidx)
        par_seq.append(tpar if p == lo else 1.0 - tpar)
        sign_seq.append(1 if f[lo] < f[hi] else -1)
        tri_seq.append(t)
        if entry_edge is None:
            entry_edge = eidx
        # leave through the downward-crossed side
        dp, dq = down
        dlo, dhi = (dp, dq) if dp < dq else (dq, dp)
        didx = topo.edge_index(dlo, dhi)
        nxt = topo.edge_tri_plus[didx]
        if nxt == t:
            nxt = topo.edge_tri_minus[didx]
        if nxt == seed and didx == entry_edge:
            break
        t = int(nxt)
        if len(tri_seq) > mesh.n_triangles:
            raise InternalSweepError("level walk failed to close")
    return LevelCycle(
        edge_id=eid,
        level=z,
        points=np.asarray(pts),
        triangles=np.asarray(tri_seq, dtype=np.int64),
        mesh_edges=np.asarray(edge_seq, dtype=np.int64),
        params=np.asarray(par_seq),
        signs=np.asarray(sign_seq, dtype=np.int64),
    )


def interior_level_cycle(
    graph: MeasuredReebGraph, eid: int, frac: float = 0.5
) -> LevelCycle:
    """Level circle near the fractional position frac of an edge's span.

    When the first pick passes through a mesh vertex value, retries one
    local profile spacing up and down before giving up.
    """
    a, b = graph.edge_span(eid)
    z0 = (1.0 - frac) * a + frac * b
    zs = graph.edges[eid].profile[:, 0]
    k = min(max(int(np.searchsorted(zs, z0)), 1), len(zs) - 1)
    spacing = zs[k] - zs[k - 1]
    last_exc = None
    for z in (z0, z0 + spacing, z0 - spacing):
        if not a < z < b:
            continue
        try:
            return level_cycle(graph, eid, float(z))
        except HitsVertex as exc:
            last_exc = exc
    raise HitsVertex(
        f"edge {eid}: level near {z0!r} and both resamples hit mesh "
        f"vertices ({last_exc})"
    )


# ------------------------------------------------------------------- export


def graph_to_dict(graph: MeasuredReebGraph) -> dict:
    return {
        "vertices": [
            {"id": v.id, "f": v.f, "kind": v.kind} for v in graph.vertices
        ],
        "edges": [
            {
                "id": e.id,
                "src": e.src,
                "dst": e.dst,
                "mass": e.mass,
                "profile": [[float(z), float(m)] for z, m in e.profile],
            }
            for e in graph.edges
        ],
        "total_mass": graph.total_mass,
    }


def graph_to_json(graph: MeasuredReebGraph) -> bytes:
    return json.dumps(graph_to_dict(graph), sort_keys=True).encode("utf-8")


def graph_to_dot(graph: MeasuredReebGraph) -> str:
    lines = ["digraph reeb {"]
    for v in graph.vertices:
        lines.append(f'  v{v.id} [label="{v.kind}@{v.f!r}"];')
    order = sorted(
        graph.edges,
        key=lambda e: (graph.vertices[e.src].f, graph.vertices[e.dst].f, e.id),
    )
    for e in order:
        lines.append(f'  v{e.src} -> v{e.dst} [label="{e.mass!r}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
