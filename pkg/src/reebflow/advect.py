"""Exactly area-preserving remaps of fields on the flat unit torus.

A shear slides one chart coordinate by a periodic profile of the other,
so its Jacobian is triangular with unit determinant and chart area is
preserved exactly. Vertex permutations of symmetric meshes are exact
simplicial automorphisms needing no resampling at all. Hamiltonian
stream functions are handled by composing shear pairs built from the
axis-averaged stream profiles; every substep is an exact shear with a
zero-mean displacement profile, so the composition preserves area
exactly and sweeps zero net area across any cycle.

Remapping composes the field with the inverse map and resamples at the
original vertices through the piecewise linear interpolant, keeping the
vertex set fixed so remapped fields stay directly comparable. A cochain,
when present, is pulled back by integrating its interpolating 1-form
along the inverse images of the mesh edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatch, InternalSweepError
from .mesh import TriMeshField

TAU = 2.0 * np.pi

_BARY_TOL = 1e-9


# ------------------------------------------------------------------ profiles


class SinProfile:
    """Sum of sine terms amp * sin(2 pi freq u + phase), zero mean."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(
            (float(a), int(k), float(p)) for a, k, p in terms
        )

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        out = np.zeros_like(u)
        for a, k, p in self.terms:
            out += a * np.sin(TAU * k * u + p)
        return out

    def to_dict(self) -> dict:
        return {"kind": "sin", "terms": [list(t) for t in self.terms]}


class ConstProfile:
    """Constant displacement; the shear becomes a rigid translation."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.full_like(u, self.value)

    def to_dict(self) -> dict:
        return {"kind": "const", "value": self.value}


class GridProfile:
    """Periodic linear interpolation through nodes on [0, 1)."""

    __slots__ = ("nodes", "values", "_xs", "_ys")

    def __init__(self, nodes, values):
        nodes = np.asarray(nodes, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape != values.shape or len(nodes) < 2:
            raise ValueError("profile needs matching 1d nodes and values")
        if np.any(np.diff(nodes) <= 0) or nodes[0] < 0 or nodes[-1] >= 1:
            raise ValueError("profile nodes must increase within [0, 1)")
        self.nodes = nodes
        self.values = values
        # one ghost node on each side closes the period
        self._xs = np.concatenate(([nodes[-1] - 1.0], nodes, [nodes[0] + 1.0]))
        self._ys = np.concatenate(([values[-1]], values, [values[0]]))

    def __call__(self, u):
        u = np.mod(np.asarray(u, dtype=np.float64), 1.0)
        return np.interp(u, self._xs, self._ys)

    def to_dict(self) -> dict:
        return {
            "kind": "grid",
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
        }


def profile_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "sin":
        return SinProfile(doc["terms"])
    if kind == "const":
        return ConstProfile(doc["value"])
    if kind == "grid":
        return GridProfile(doc["nodes"], doc["values"])
    raise ValueError(f"unknown profile kind {kind!r}")


# ---------------------------------------------------------------------- maps


@dataclass(frozen=True)
class AreaPreservingMap:
    """Composable area-preserving map of the flat unit torus.

    substeps lists (axis, profile) shears applied left to right; perm
    holds a vertex permutation instead when kind == "perm". meta carries
    the construction parameters for serialization.
    """

    kind: str
    substeps: tuple = ()
    perm: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def forward_points(self, points: np.ndarray) -> np.ndarray:
        return _run_substeps(points, self.substeps, inverse=False)

    def inverse_points(self, points: np.ndarray) -> np.ndarray:
        return _run_substeps(points, self.substeps, inverse=True)

    def to_dict(self) -> dict:
        return dict(self.meta)


def _run_substeps(points, substeps, inverse: bool) -> np.ndarray:
    pts = np.array(points, dtype=np.float64, copy=True)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    seq = substeps[::-1] if inverse else substeps
    sgn = -1.0 if inverse else 1.0
    for axis, prof in seq:
        if axis == "x":
            pts[:, 0] = np.mod(pts[:, 0] + sgn * prof(pts[:, 1]), 1.0)
        else:
            pts[:, 1] = np.mod(pts[:, 1] + sgn * prof(pts[:, 0]), 1.0)
    return pts


def shear_x(profile) -> AreaPreservingMap:
    """(x, y) -> (x + profile(y) mod 1, y)."""
    return AreaPreservingMap(
        kind="shear_x",
        substeps=(("x", profile),),
        meta={"kind": "shear_x", "profile": _profile_dict(profile)},
    )


def shear_y(profile) -> AreaPreservingMap:
    """(x, y) -> (x, y + profile(x) mod 1)."""
    return AreaPreservingMap(
        kind="shear_y",
        substeps=(("y", profile),),
        meta={"kind": "shear_y", "profile": _profile_dict(profile)},
    )


def simplicial_automorphism(perm) -> AreaPreservingMap:
    """Exact remap by a vertex permutation preserving the triangles."""
    perm = np.asarray(perm, dtype=np.int64)
    return AreaPreservingMap(
        kind="perm",
        perm=perm,
        meta={"kind": "perm", "perm": perm.tolist()},
    )


def _profile_dict(profile) -> dict:
    to_dict = getattr(profile, "to_dict", None)
    return to_dict() if to_dict is not None else {"kind": "custom"}


def hamiltonian_flow_map(
    mesh: TriMeshField, stream, t: float = 1.0, steps: int = 64
) -> AreaPreservingMap:
    """Shear-pair composition approximating the flow of a stream function.

    stream holds one value per mesh vertex on a flat-chart torus. Each of
    the `steps` substep pairs shears x by dt times the y-derivative of
    the x-averaged stream and y by minus dt times the x-derivative of
    the y-averaged stream. Both displacement profiles are derivatives of
    periodic functions, hence zero mean, so the composition has zero
    flux; and each substep is an exact shear, so area is preserved
    exactly at every step count. When the stream depends on one
    coordinate only the splitting is exact and the step count drops out.
    """
    _require_flat_chart(mesh)
    stream = np.asarray(stream, dtype=np.float64)
    if stream.shape != (mesh.n_vertices,):
        raise DomainMismatch("stream must hold one value per mesh vertex")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    dt = float(t) / int(steps)
    ys, h_of_y = _axis_means(mesh.vertices[:, 1], stream)
    xs, h_of_x = _axis_means(mesh.vertices[:, 0], stream)
    g = GridProfile(ys, dt * _periodic_derivative(ys, h_of_y))
    h = GridProfile(xs, -dt * _periodic_derivative(xs, h_of_x))
    return AreaPreservingMap(
        kind="ham",
        substeps=(("x", g), ("y", h)) * int(steps),
        meta={
            "kind": "ham",
            "t": float(t),
            "steps": int(steps),
            "profile_x": g.to_dict(),
            "profile_y": h.to_dict(),
        },
    )


def map_from_dict(doc: dict) -> AreaPreservingMap:
    """Rebuild a map from its to_dict form (the CLI wire format)."""
    kind = doc.get("kind")
    if kind in ("shear_x", "shear_y"):
        prof = profile_from_dict(doc["profile"])
        return shear_x(prof) if kind == "shear_x" else shear_y(prof)
    if kind == "perm":
        return simplicial_automorphism(np.asarray(doc["perm"], dtype=np.int64))
    if kind == "ham":
        g = profile_from_dict(doc["profile_x"])
        h = profile_from_dict(doc["profile_y"])
        steps = int(doc["steps"])
        return AreaPreservingMap(
            kind="ham",
            substeps=(("x", g), ("y", h)) * steps,
            meta=dict(doc),
        )
    raise ValueError(f"unknown map kind {kind!r}")


def _axis_means(coord, values):
    """Mean of values over each distinct coordinate line."""
    us, inverse = np.unique(coord, return_inverse=True)
    sums = np.bincount(inverse, weights=values, minlength=len(us))
    counts = np.bincount(inverse, minlength=len(us))
    return us, sums / counts


def _periodic_derivative(us, vals):
    """Central differences of a periodic node function."""
    up = np.roll(vals, -1)
    dn = np.roll(vals, 1)
    du = np.roll(us, -1) - np.roll(us, 1)
    du[0] += 1.0
    du[-1] -= 1.0
    # wrap produces the (u[i+1] + 1) - u[i-1] spans at the seam
    du = np.mod(du, 1.0)
    du[du == 0.0] = 1.0
    return (up - dn) / du


# ------------------------------------------------------------ chart locator


def _wrap_diff(d: np.ndarray) -> np.ndarray:
    """Shift each chart displacement to its nearest representative."""
    return d - np.round(d)


def _require_flat_chart(mesh: TriMeshField) -> None:
    v = mesh.vertices
    if mesh.area_override is None:
        raise DomainMismatch(
            "flat-torus maps need a mesh with an exact area override"
        )
    if np.any(v[:, 2] != 0.0):
        raise DomainMismatch("flat-torus maps need chart vertices with z = 0")
    if v[:, :2].min() < 0.0 or v[:, :2].max() >= 1.0:
        raise DomainMismatch("chart coordinates must lie in [0, 1)")


class _ChartLocator:
    """Point location and sampling on a flat-chart mesh, modulo 1."""

    def __init__(self, mesh: TriMeshField):
        self.mesh = mesh
        pos = mesh.vertices[:, :2]
        tris = mesh.triangles
        a = pos[tris[:, 0]]
        b = a + _wrap_diff(pos[tris[:, 1]] - a)
        c = a + _wrap_diff(pos[tris[:, 2]] - a)
        e1, e2 = b - a, c - a
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(det == 0.0):
            raise DomainMismatch("mesh has a degenerate chart triangle")
        inv = np.empty((len(tris), 2, 2))
        inv[:, 0, 0] = e2[:, 1] / det
        inv[:, 0, 1] = -e2[:, 0] / det
        inv[:, 1, 0] = -e1[:, 1] / det
        inv[:, 1, 1] = e1[:, 0] / det
        self.anchor = a
        self.inv = inv
        self._grad_cache = None

        # uniform bins sized to the longest edge: a triangle bbox then
        # overlaps at most 2 bins per axis
        longest = np.sqrt(
            max(
                (e1**2).sum(axis=1).max(),
                (e2**2).sum(axis=1).max(),
                ((e2 - e1) ** 2).sum(axis=1).max(),
            )
        )
        self.nb = nb = max(1, min(4096, int(1.0 / (longest + 1e-15))))
        lo = np.minimum(np.minimum(a, b), c) - 1e-9
        hi = np.maximum(np.maximum(a, b), c) + 1e-9
        b0 = np.floor(lo * nb).astype(np.int64)
        b1 = np.floor(hi * nb).astype(np.int64)
        t_ids = np.arange(len(tris))
        pairs = []
        for di in (0, 1):
            for dj in (0, 1):
                bi = np.mod(np.where(di, b1[:, 0], b0[:, 0]), nb)
                bj = np.mod(np.where(dj, b1[:, 1], b0[:, 1]), nb)
                pairs.append(np.stack([bi * nb + bj, t_ids], axis=1))
        pairs = np.unique(np.concatenate(pairs), axis=0)
        self.bin_tris = pairs[:, 1]
        counts = np.bincount(pairs[:, 0], minlength=nb * nb)
        self.bin_counts = counts
        self.bin_offsets = np.concatenate(([0], np.cumsum(counts)))

    def locate(self, points: np.ndarray, chunk: int = 131072):
        """Containing triangle and barycentric weights per chart point."""
        points = np.asarray(points, dtype=np.float64)
        n = len(points)
        tri = np.full(n, -1, dtype=np.int64)
        lam = np.zeros((n, 3))
        for s in range(0, n, chunk):
            sl = slice(s, min(s + chunk, n))
            t, l = self._locate_block(points[sl])
            tri[sl] = t
            lam[sl] = l
        return tri, lam

    def _locate_block(self, pts):
        nb = self.nb
        bi = np.minimum((pts[:, 0] * nb).astype(np.int64), nb - 1)
        bj = np.minimum((pts[:, 1] * nb).astype(np.int64), nb - 1)
        bins = np.maximum(bi, 0) * nb + np.maximum(bj, 0)
        cnt = self.bin_counts[bins]
        off = self.bin_offsets[bins]
        total = int(cnt.sum())
        pid = np.repeat(np.arange(len(pts)), cnt)
        starts = np.concatenate(([0], np.cumsum(cnt)))[:-1]
        rows = np.arange(total) - np.repeat(starts, cnt) + np.repeat(off, cnt)
        cand = self.bin_tris[rows]
        dp = _wrap_diff(pts[pid] - self.anchor[cand])
        l2 = np.einsum("ij,ij->i", self.inv[cand, 0], dp)
        l3 = np.einsum("ij,ij->i", self.inv[cand, 1], dp)
        l1 = 1.0 - l2 - l3
        ok = (l1 >= -_BARY_TOL) & (l2 >= -_BARY_TOL) & (l3 >= -_BARY_TOL)
        tri = np.full(len(pts), -1, dtype=np.int64)
        lam = np.zeros((len(pts), 3))
        hit = np.flatnonzero(ok)
        first_pid, first_at = np.unique(pid[hit], return_index=True)
        sel = hit[first_at]
        tri[first_pid] = cand[sel]
        lam[first_pid, 0] = l1[sel]
        lam[first_pid, 1] = l2[sel]
        lam[first_pid, 2] = l3[sel]
        for p in np.flatnonzero(tri < 0):
            tri[p], lam[p] = self._brute_force(pts[p])
        return tri, lam

    def _brute_force(self, pt):
        dp = _wrap_diff(pt[None, :] - self.anchor)
        l2 = np.einsum("ij,ij->i", self.inv[:, 0], dp)
        l3 = np.einsum("ij,ij->i", self.inv[:, 1], dp)
        l1 = 1.0 - l2 - l3
        worst = np.minimum(np.minimum(l1, l2), l3)
        t = int(np.argmax(worst))
        if worst[t] < -1e-6:
            raise InternalSweepError(
                f"chart point {pt.tolist()} lies in no mesh triangle"
            )
        return t, np.array([l1[t], l2[t], l3[t]])

    def sample_field(self, points: np.ndarray) -> np.ndarray:
        tri, lam = self.locate(points)
        # snap roundoff dust so corner hits reproduce values bitwise
        lam = np.where(lam < 1e-12, 0.0, lam)
        lam /= lam.sum(axis=1, keepdims=True)
        corners = self.mesh.field[self.mesh.triangles[tri]]
        return np.einsum("ij,ij->i", lam, corners)

    def _barygrads(self) -> np.ndarray:
        """(T, slot, 2) gradients of the three barycentrics."""
        if self._grad_cache is None:
            self._grad_cache = np.stack(
                [-self.inv[:, 0] - self.inv[:, 1],
                 self.inv[:, 0], self.inv[:, 1]],
                axis=1,
            )
        return self._grad_cache

    def _whitney_from(self, cvals, tri, lam, gd) -> np.ndarray:
        """Cochain 1-form contracted with a direction, from located
        triangles, barycentric weights, and the direction's barycentric
        derivatives gd."""
        topo = self.mesh.topology
        tris = self.mesh.triangles
        out = np.zeros(len(tri))
        rows = np.arange(len(tri))
        for k in range(3):
            s, t = (k + 1) % 3, (k + 2) % 3
            e = topo.tri_edges[tri, k]
            swap = tris[tri, s] > tris[tri, t]
            lo = np.where(swap, t, s)
            hi = np.where(swap, s, t)
            out += cvals[e] * (
                lam[rows, lo] * gd[rows, hi] - lam[rows, hi] * gd[rows, lo]
            )
        return out

    def whitney_dot(self, cvals, points, dirs) -> np.ndarray:
        """Interpolating 1-form of an edge cochain, contracted with a
        direction vector at each point."""
        tri, lam = self.locate(points)
        gd = np.einsum("psj,pj->ps", self._barygrads()[tri], dirs)
        return self._whitney_from(cvals, tri, lam, gd)

    def whitney_segments(self, cvals, starts, dirs) -> np.ndarray:
        """Exact line integral of the cochain's interpolating 1-form
        along each straight chart segment start -> start + dir.

        The contraction of a Whitney form with a fixed direction is
        constant along that direction inside a triangle (the lambda
        terms cancel antisymmetrically), so splitting the segment at
        triangle boundaries and evaluating once per piece is exact.
        """
        starts = np.asarray(starts, dtype=np.float64)
        dirs = np.asarray(dirs, dtype=np.float64)
        total = np.zeros(len(starts))
        t = np.zeros(len(starts))
        live = np.flatnonzero(np.einsum("ij,ij->i", dirs, dirs) > 0.0)
        nudge = 1e-7  # clears boundary roundoff; length error ~ 1e-7 per round
        for _ in range(64):
            if len(live) == 0:
                return total
            tt = t[live] + nudge
            p = np.mod(starts[live] + tt[:, None] * dirs[live], 1.0)
            tri, lam = self.locate(p)
            gd = np.einsum(
                "psj,pj->ps", self._barygrads()[tri], dirs[live]
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                cross = np.where(gd < 0.0, lam / -gd, np.inf)
            ds = np.minimum(np.min(cross, axis=1), 1.0 - tt)
            ds = np.maximum(ds, 0.0) + nudge
            total[live] += ds * self._whitney_from(cvals, tri, lam, gd)
            t[live] += ds
            live = live[t[live] < 1.0 - 1e-9]
        # grazing leftovers: one evaluation for the remainder
        rest = 1.0 - t[live]
        p = np.mod(
            starts[live] + (t[live] + 0.5 * rest)[:, None] * dirs[live], 1.0
        )
        tri, lam = self.locate(p)
        gd = np.einsum("psj,pj->ps", self._barygrads()[tri], dirs[live])
        total[live] += rest * self._whitney_from(cvals, tri, lam, gd)
        return total


# ------------------------------------------------------------------ applying


def apply_map(
    mesh: TriMeshField, m: AreaPreservingMap, cochain_samples: int = 16
) -> TriMeshField:
    """Field (and cochain) carried through the map, on the same mesh.

    The new field at vertex v is the old field at the inverse image of
    v, evaluated through the piecewise linear interpolant; permutation
    maps relabel values exactly instead. The new cochain value on an
    edge is the integral of the old cochain's interpolating 1-form
    along the inverse image of that edge, approximated by
    cochain_samples straight pieces each integrated exactly.
    """
    if m.kind == "perm":
        return _apply_permutation(mesh, m.perm)
    _require_flat_chart(mesh)
    loc = _ChartLocator(mesh)
    pre = m.inverse_points(mesh.vertices[:, :2])
    new_field = loc.sample_field(pre)
    if not mesh.has_cochain():
        return mesh.with_field(new_field, cochain=None)
    beta = _pullback_cochain(mesh, loc, m, cochain_samples)
    return mesh.with_field(
        new_field, cochain=(mesh.topology.edges.copy(), beta)
    )


def _pullback_cochain(mesh, loc, m, samples: int) -> np.ndarray:
    topo = mesh.topology
    pos = mesh.vertices[:, :2]
    alpha = mesh.cochain_on_edges()
    pa = pos[topo.edges[:, 0]]
    pb = pa + _wrap_diff(pos[topo.edges[:, 1]] - pa)
    s = np.linspace(0.0, 1.0, samples + 1)
    line = pa[None, :, :] + s[:, None, None] * (pb - pa)[None, :, :]
    flat = np.mod(line.reshape(-1, 2), 1.0)
    q = m.inverse_points(flat).reshape(samples + 1, -1, 2)
    step = _wrap_diff(q[1:] - q[:-1])  # (S, E, 2) unwrapped pieces
    vals = loc.whitney_segments(
        alpha, q[:-1].reshape(-1, 2), step.reshape(-1, 2)
    ).reshape(samples, -1)
    return vals.sum(axis=0)


def _apply_permutation(mesh: TriMeshField, perm: np.ndarray) -> TriMeshField:
    v = mesh.n_vertices
    if perm is None or perm.shape != (v,):
        raise DomainMismatch("permutation length must match the vertex count")
    if not np.array_equal(np.sort(perm), np.arange(v)):
        raise DomainMismatch("not a permutation of the vertex ids")
    mapped = perm[mesh.triangles]
    if not _same_oriented_triangles(mesh.triangles, mapped):
        raise DomainMismatch(
            "permutation does not preserve the oriented triangle set"
        )
    if mesh.area_override is not None:
        order_a = _canonical_rows(mesh.triangles)
        order_b = _canonical_rows(mapped)
        areas = mesh.area_override
        ia = np.lexsort(order_a.T[::-1])
        ib = np.lexsort(order_b.T[::-1])
        if np.any(areas[ia] != areas[ib]):
            raise DomainMismatch(
                "permutation does not preserve the area override"
            )
    new_field = np.empty_like(mesh.field)
    new_field[perm] = mesh.field
    if not mesh.has_cochain():
        return mesh.with_field(new_field, cochain=None)
    topo = mesh.topology
    alpha = mesh.cochain_on_edges()
    beta = np.zeros_like(alpha)
    for k, (a, b) in enumerate(topo.edges):
        pa, pb = int(perm[a]), int(perm[b])
        j = topo.edge_index(pa, pb)
        beta[j] = alpha[k] if pa < pb else -alpha[k]
    return mesh.with_field(new_field, cochain=(topo.edges.copy(), beta))


def _canonical_rows(tris: np.ndarray) -> np.ndarray:
    """Rotate each triangle so its smallest vertex id comes first."""
    shift = np.argmin(tris, axis=1)
    cols = (shift[:, None] + np.arange(3)[None, :]) % 3
    return np.take_along_axis(tris, cols, axis=1)


def _same_oriented_triangles(a: np.ndarray, b: np.ndarray) -> bool:
    ca = _canonical_rows(a)
    cb = _canonical_rows(b)
    ca = ca[np.lexsort(ca.T[::-1])]
    cb = cb[np.lexsort(cb.T[::-1])]
    return bool(np.array_equal(ca, cb))
