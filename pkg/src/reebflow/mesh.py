"""Triangle meshes carrying a scalar field, and their validation.

A mesh is a closed, oriented, connected triangulated surface. Each vertex
carries one field value; triangles may carry an area override (used for
abstract meshes whose embedding coordinates are not meaningful, e.g. flat
tori given in chart coordinates) and the mesh may carry a 1-cochain: one
real value per directed edge, antisymmetric under direction reversal.

Vertex criticality uses the piecewise-linear link rule: a vertex is a
minimum iff its lower link is empty, a maximum iff its upper link is
empty, regular iff lower and upper link each have one component, and a
saddle iff the lower link has exactly two components. Three or more lower
components is a degenerate (monkey) saddle and is rejected. Ties between
adjacent values are broken lexicographically by (value, vertex index) so
classification is always defined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateSaddle,
    DuplicateCriticalValue,
    MissingCochain,
    NotClosed,
    NotConnected,
    NotOrientable,
    NotSimple,
    ParseError,
    ZeroArea,
)

KIND_MIN = "min"
KIND_MAX = "max"
KIND_SADDLE = "saddle"


@dataclass(frozen=True)
class CriticalPoint:
    vertex: int
    kind: str
    value: float


@dataclass(frozen=True)
class SurfaceReport:
    genus: int
    total_area: float
    euler_characteristic: int
    critical_points: tuple[CriticalPoint, ...]

    def vertices_of_kind(self, kind: str) -> list[int]:
        return [c.vertex for c in self.critical_points if c.kind == kind]


class TriMeshField:
    """Immutable triangle mesh with a per-vertex scalar field.

    Parameters
    ----------
    vertices : (V, 3) float array of positions.
    triangles : (T, 3) int array, zero-based, counterclockwise as seen
        from outside (consistent global orientation).
    field : (V,) float array of field values.
    area_override : optional (T,) positive float array replacing the
        Euclidean triangle areas.
    cochain : optional pair (edges, values) where edges is an (L, 2) int
        array of directed vertex pairs and values the matching reals; the
        value on a reversed pair is the negation.
    """

    def __init__(
        self,
        vertices,
        triangles,
        field,
        area_override=None,
        cochain=None,
    ):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.field = np.ascontiguousarray(field, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ParseError("vertices must be a (V, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ParseError("triangles must be a (T, 3) array")
        if self.field.shape != (len(self.vertices),):
            raise ParseError("field must hold one value per vertex")
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise IndexError("triangle references a vertex outside the mesh")
        if area_override is not None:
            area_override = np.ascontiguousarray(area_override, dtype=np.float64)
            if area_override.shape != (len(self.triangles),):
                raise ParseError("area_override must hold one value per triangle")
        self.area_override = area_override
        if cochain is not None:
            e, v = cochain
            e = np.ascontiguousarray(e, dtype=np.int64)
            v = np.ascontiguousarray(v, dtype=np.float64)
            if e.ndim != 2 or e.shape[1] != 2 or v.shape != (len(e),):
                raise ParseError("cochain must pair (L, 2) edges with L values")
            cochain = (e, v)
        self.raw_cochain = cochain

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def topology(self) -> "MeshTopology":
        return MeshTopology(self)

    def triangle_areas(self) -> np.ndarray:
        if self.area_override is not None:
            return self.area_override
        p = self.vertices[self.triangles]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return 0.5 * np.linalg.norm(cr, axis=1)

    def total_area(self) -> float:
        # Fixed summation order: triangle index order.
        return float(np.add.reduce(self.triangle_areas()))

    def has_cochain(self) -> bool:
        return self.raw_cochain is not None

    def cochain_on_edges(self) -> np.ndarray:
        """Cochain values aligned with topology.edges (low < high direction)."""
        if self.raw_cochain is None:
            raise MissingCochain("mesh carries no 1-cochain")
        return self.topology.align_cochain(*self.raw_cochain)

    def with_field(self, field, cochain="keep") -> "TriMeshField":
        out = TriMeshField(
            self.vertices,
            self.triangles,
            field,
            area_override=self.area_override,
            cochain=self.raw_cochain if cochain == "keep" else cochain,
        )
        if "topology" in self.__dict__:  # same triangulation, share the cache
            out.__dict__["topology"] = self.topology
        return out

    def same_domain(self, other: "TriMeshField") -> bool:
        """True when both fields live on the identical triangulation."""
        if self.vertices.shape != other.vertices.shape:
            return False
        if self.triangles.shape != other.triangles.shape:
            return False
        if not np.array_equal(self.triangles, other.triangles):
            return False
        if not np.array_equal(self.vertices, other.vertices):
            return False
        a, b = self.area_override, other.area_override
        if (a is None) != (b is None):
            return False
        if a is not None and not np.array_equal(a, b):
            return False
        return True


class MeshTopology:
    """Edge tables and adjacency derived from the triangle list.

    edges : (E, 2) int, each row (lo, hi) with lo < hi, lexicographically
        sorted.
    tri_edges : (T, 3) int, edge id opposite each local slot k, i.e. row t
        column k is the edge joining the two vertices of triangle t other
        than triangles[t, k].
    edge_tri_plus / edge_tri_minus : (E,) int, the triangle whose boundary
        orientation traverses the edge as (lo -> hi), resp. (hi -> lo).
    """

    def __init__(self, mesh: TriMeshField):
        tris = mesh.triangles
        n_tri = len(tris)
        if n_tri == 0:
            raise NotClosed("mesh has no triangles")
        # Directed edges in boundary order; slot k is opposite vertex k.
        directed = np.stack(
            [tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]], axis=1
        ).reshape(-1, 2)
        lo = directed.min(axis=1)
        hi = directed.max(axis=1)
        und = lo.astype(np.int64) * (tris.max() + 1) + hi
        order = np.argsort(und, kind="stable")
        und_sorted = und[order]
        uniq, start, counts = np.unique(
            und_sorted, return_index=True, return_counts=True
        )
        if np.any(counts != 2):
            bad = np.where(counts != 2)[0][0]
            raise NotClosed(
                f"edge {lo[order[start[bad]]]}-{hi[order[start[bad]]]} lies on "
                f"{counts[bad]} triangles, expected 2"
            )
        n_edge = len(uniq)
        # Map each directed occurrence to its undirected edge id.
        edge_id_of_directed = np.empty(3 * n_tri, dtype=np.int64)
        edge_id_of_directed[order] = np.repeat(np.arange(n_edge), 2)
        first = order[start]
        second = order[start + 1]
        forward_first = directed[first, 0] == lo[first]
        forward_second = directed[second, 0] == lo[second]
        if np.any(forward_first == forward_second):
            raise NotOrientable(
                "an edge is traversed twice in the same direction; "
                "triangle orientations are inconsistent"
            )
        tri_of = lambda idx: idx // 3
        plus = np.where(forward_first, tri_of(first), tri_of(second))
        minus = np.where(forward_first, tri_of(second), tri_of(first))

        self.mesh = mesh
        self.edges = np.stack([lo[first], hi[first]], axis=1)
        self.edge_tri_plus = plus.astype(np.int64)
        self.edge_tri_minus = minus.astype(np.int64)
        self.tri_edges = edge_id_of_directed.reshape(n_tri, 3)
        self._edge_lookup = {
            (int(a), int(b)): k for k, (a, b) in enumerate(self.edges)
        }

        comp_n, _ = connected_components(self._tri_adjacency(), directed=False)
        if comp_n != 1:
            raise NotConnected(f"mesh has {comp_n} components, expected 1")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        try:
            return self._edge_lookup[key]
        except KeyError:
            raise KeyError(f"no mesh edge joins vertices {a} and {b}") from None

    def _tri_adjacency(self):
        n_tri = self.mesh.n_triangles
        rows = self.edge_tri_plus
        cols = self.edge_tri_minus
        data = np.ones(len(rows), dtype=np.int8)
        return coo_matrix((data, (rows, cols)), shape=(n_tri, n_tri))

    def align_cochain(self, pairs: np.ndarray, values: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_edges, dtype=np.float64)
        seen = np.zeros(self.n_edges, dtype=bool)
        for (a, b), v in zip(pairs, values):
            a, b = int(a), int(b)
            k = self.edge_index(a, b)
            signed = v if a < b else -v
            if seen[k] and out[k] != signed:
                raise ParseError(
                    f"cochain lists edge {a}-{b} twice with inconsistent values"
                )
            out[k] = signed
            seen[k] = True
        return out

    def coboundary(self, edge_values: np.ndarray) -> np.ndarray:
        """Sum of the cochain around each triangle boundary (discrete d)."""
        tris = self.mesh.triangles
        total = np.zeros(self.mesh.n_triangles, dtype=np.float64)
        for k in range(3):
            a = tris[:, (k + 1) % 3]
            b = tris[:, (k + 2) % 3]
            e = self.tri_edges[:, k]
            sign = np.where(a < b, 1.0, -1.0)
            total += sign * edge_values[e]
        return total


# --------------------------------------------------------------------- loading


def load_mesh(data: bytes, format: str = "json") -> TriMeshField:
    """Parse mesh bytes in 'json' or 'off' format."""
    if format == "json":
        return _load_json(data)
    if format == "off":
        return _load_off(data)
    raise ParseError(f"unknown mesh format {format!r}")


def _load_json(data: bytes) -> TriMeshField:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    for key in ("vertices", "triangles", "field"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")
    try:
        vertices = np.asarray(doc["vertices"], dtype=np.float64)
        triangles = np.asarray(doc["triangles"], dtype=np.int64)
        field = np.asarray(doc["field"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed array: {exc}") from exc
    area_override = None
    if doc.get("area_override") is not None:
        area_override = np.asarray(doc["area_override"], dtype=np.float64)
    cochain = None
    if doc.get("cochain") is not None:
        c = doc["cochain"]
        if not isinstance(c, dict) or "edges" not in c or "values" not in c:
            raise ParseError("cochain must be an object with edges and values")
        cochain = (
            np.asarray(c["edges"], dtype=np.int64),
            np.asarray(c["values"], dtype=np.float64),
        )
    return TriMeshField(vertices, triangles, field, area_override, cochain)


def dump_mesh_json(mesh: TriMeshField) -> bytes:
    doc = {
        "vertices": mesh.vertices.tolist(),
        "triangles": mesh.triangles.tolist(),
        "field": mesh.field.tolist(),
    }
    if mesh.area_override is not None:
        doc["area_override"] = mesh.area_override.tolist()
    if mesh.raw_cochain is not None:
        e, v = mesh.raw_cochain
        doc["cochain"] = {"edges": e.tolist(), "values": v.tolist()}
    return json.dumps(doc, sort_keys=True).encode("utf-8")


def _load_off(data: bytes) -> TriMeshField:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("OFF data is not valid UTF-8 text") from exc
    lines = text.splitlines()
    field_at = None
    for i, line in enumerate(lines):
        if line.strip().upper().startswith("# FIELD"):
            field_at = i
            break
    head = [
        ln for ln in lines[:field_at]
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not head or head[0].strip() != "OFF":
        raise ParseError("OFF data must start with an OFF header line")
    try:
        nv, nf, _ne = (int(tok) for tok in head[1].split()[:3])
        verts = [
            [float(x) for x in head[2 + i].split()[:3]] for i in range(nv)
        ]
        tris = []
        for i in range(nf):
            toks = head[2 + nv + i].split()
            if int(toks[0]) != 3:
                raise ParseError("OFF faces must all be triangles")
            tris.append([int(toks[1]), int(toks[2]), int(toks[3])])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed OFF data: {exc}") from exc
    if field_at is None:
        raise ParseError("OFF data lacks the '# FIELD' sentinel section")
    tail = [
        ln for ln in lines[field_at + 1:]
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if len(tail) < nv:
        raise ParseError("OFF field section is shorter than the vertex count")
    try:
        field = [float(ln.split()[0]) for ln in tail[:nv]]
    except ValueError as exc:
        raise ParseError(f"malformed field value: {exc}") from exc
    return TriMeshField(verts, tris, field)


def dump_mesh_off(mesh: TriMeshField) -> bytes:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_triangles} 0"]
    for p in mesh.vertices:
        out.append(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
    for t in mesh.triangles:
        out.append(f"3 {int(t[0])} {int(t[1])} {int(t[2])}")
    out.append("# FIELD")
    for v in mesh.field:
        out.append(repr(float(v)))
    return ("\n".join(out) + "\n").encode("utf-8")


# ------------------------------------------------------------- classification


def classify_vertices(mesh: TriMeshField) -> np.ndarray:
    """Lower-link component count per vertex, encoded as kind codes.

    Returns an int array: 0 regular, 1 minimum, 2 maximum, 3 saddle.
    Raises DegenerateSaddle when a lower link has three or more components.
    Value ties between adjacent vertices are broken by vertex index, so the
    rule is evaluated on a strict total order.
    """
    tris = mesh.triangles
    f = mesh.field
    n = mesh.n_vertices
    # Rank vertices by (value, index); comparisons become integer.
    order = np.lexsort((np.arange(n), f))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    center = tris.reshape(-1)  # vertex whose link gets the opposite edge
    link_u = tris[:, [1, 2, 0]].reshape(-1)
    link_v = tris[:, [2, 0, 1]].reshape(-1)
    below_u = rank[link_u] < rank[center]
    below_v = rank[link_v] < rank[center]

    deg = np.zeros(n, dtype=np.int64)  # = number of star triangles
    np.add.at(deg, center, 1)
    lo_ends = np.zeros(n, dtype=np.int64)  # lower endpoints, counted twice
    np.add.at(lo_ends, center, below_u.astype(np.int64) + below_v)
    lo_edges = np.zeros(n, dtype=np.int64)
    np.add.at(lo_edges, center, (below_u & below_v).astype(np.int64))

    n_lo = lo_ends // 2
    comps_lo = np.where(n_lo == 0, 0, np.where(n_lo == deg, 1, n_lo - lo_edges))

    kinds = np.zeros(n, dtype=np.int64)
    kinds[n_lo == 0] = 1
    kinds[n_lo == deg] = 2
    kinds[(comps_lo >= 2)] = 3
    if np.any(comps_lo >= 3):
        raise DegenerateSaddle(int(np.where(comps_lo >= 3)[0][0]))
    return kinds


_KIND_NAMES = {1: KIND_MIN, 2: KIND_MAX, 3: KIND_SADDLE}


def validate(mesh: TriMeshField) -> SurfaceReport:
    """Check the closed-surface axioms and classify critical vertices."""
    topo = mesh.topology  # raises NotClosed / NotOrientable / NotConnected
    areas = mesh.triangle_areas()
    bad = np.where(areas <= 0.0)[0]
    if len(bad):
        raise ZeroArea(int(bad[0]))
    chi = mesh.n_vertices - topo.n_edges + mesh.n_triangles
    if chi % 2 != 0 or chi > 2:
        raise NotOrientable(f"Euler characteristic {chi} is not 2 - 2*genus")
    genus = (2 - chi) // 2
    kinds = classify_vertices(mesh)
    crit = [
        CriticalPoint(int(v), _KIND_NAMES[int(kinds[v])], float(mesh.field[v]))
        for v in np.where(kinds != 0)[0]
    ]
    crit.sort(key=lambda c: (c.value, c.vertex))
    n_min = sum(1 for c in crit if c.kind == KIND_MIN)
    n_max = sum(1 for c in crit if c.kind == KIND_MAX)
    n_sad = sum(1 for c in crit if c.kind == KIND_SADDLE)
    if n_min - n_sad + n_max != chi:
        raise DegenerateSaddle(
            -1,
            f"critical point counts ({n_min} min, {n_sad} saddle, {n_max} max) "
            f"violate the Euler relation for characteristic {chi}",
        )
    return SurfaceReport(
        genus=genus,
        total_area=mesh.total_area(),
        euler_characteristic=chi,
        critical_points=tuple(crit),
    )


def ensure_simple(
    mesh: TriMeshField,
    policy: str = "reject",
    eps: float = None,
    report: Optional[SurfaceReport] = None,
) -> TriMeshField:
    """Enforce pairwise distinct critical values.

    policy 'reject' raises DuplicateCriticalValue when two critical
    vertices share a field value. policy 'perturb' adds eps * i / V to the
    value of vertex i (default eps: 1e-9 times the field range) and
    verifies that all vertex values are then pairwise distinct. The call
    is idempotent: a mesh that already satisfies the precondition is
    returned unchanged.
    """
    if report is None:
        report = validate(mesh)
    values = np.array([c.value for c in report.critical_points])
    if len(np.unique(values)) == len(values):
        return mesh
    if policy == "reject":
        dup = values[np.where(np.diff(np.sort(values)) == 0.0)[0][0]]
        raise DuplicateCriticalValue(
            f"two critical vertices share the field value {dup!r}"
        )
    if policy != "perturb":
        raise ValueError(f"unknown policy {policy!r}")
    span = float(mesh.field.max() - mesh.field.min())
    if eps is None:
        eps = 1e-9 * (span if span > 0 else 1.0)
    n = mesh.n_vertices
    new_field = mesh.field + eps * np.arange(n) / n
    out = mesh.with_field(new_field)
    if len(np.unique(out.field)) != n:
        raise NotSimple(
            "perturbation did not separate all vertex values; increase eps"
        )
    new_report = validate(out)
    new_values = np.array([c.value for c in new_report.critical_points])
    if len(np.unique(new_values)) != len(new_values):
        raise NotSimple("perturbation left duplicate critical values")
    return out
