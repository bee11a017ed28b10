"""Bundled analytic meshes used by tests, examples and the selftest.

All generators return TriMeshField instances. Embedded meshes (spheres,
tori of revolution, spliced pretzels) take their areas from the embedding;
flat-torus meshes live in chart coordinates on the unit square and carry
an exact area override, since chart coordinates wrap around.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMeshField

TAU = 2.0 * np.pi


# ------------------------------------------------------------------ spheres


def octasphere(levels: int = 4) -> TriMeshField:
    """Unit sphere from repeated 4-way subdivision of the octahedron.

    8 * 4**levels triangles; every vertex is projected onto the unit
    sphere; the field is the height coordinate z.
    """
    verts = [
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.0),
        (0.0, 0.0, -1.0),
    ]
    # Outward (counterclockwise from outside) octahedron faces.
    tris = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    for _ in range(levels):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                pa, pb = verts[a], verts[b]
                m = (pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2])
                norm = (m[0] ** 2 + m[1] ** 2 + m[2] ** 2) ** 0.5
                verts.append((m[0] / norm, m[1] / norm, m[2] / norm))
                cache[key] = len(verts) - 1
            return cache[key]

        next_tris = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_tris += [
                (a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)
            ]
        tris = next_tris
    v = np.asarray(verts, dtype=np.float64)
    return TriMeshField(v, np.asarray(tris, dtype=np.int64), v[:, 2].copy())


# ------------------------------------------------------------- tori (grids)


def _torus_points(n: int, big_radius: float, tube_radius: float) -> np.ndarray:
    """Standing torus of revolution: the big circle lies in the xz plane,
    so the height z = (R + r cos v) sin u is a simple Morse function with
    one minimum, two saddles and one maximum."""
    i = np.arange(n)
    u = TAU * i / n
    v = TAU * i / n
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = big_radius + tube_radius * np.cos(vv)
    pts = np.stack(
        [ring * np.cos(uu), tube_radius * np.sin(vv), ring * np.sin(uu)],
        axis=-1,
    )
    return pts.reshape(-1, 3)


def _grid_triangles(n: int) -> np.ndarray:
    """Diagonal-split triangulation of an n x n periodic grid."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (i * n + j).ravel()
    b = (((i + 1) % n) * n + j).ravel()
    c = (((i + 1) % n) * n + (j + 1) % n).ravel()
    d = (i * n + (j + 1) % n).ravel()
    t1 = np.stack([a, b, c], axis=1)
    t2 = np.stack([a, c, d], axis=1)
    return np.concatenate([t1, t2]).astype(np.int64)


def grid_torus(
    n: int = 32, big_radius: float = 2.0, tube_radius: float = 1.0
) -> TriMeshField:
    """Standing torus of revolution with field = height.

    n must be divisible by 4 so the four height-critical points of the
    smooth surface land on grid vertices.
    """
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4")
    pts = _torus_points(n, big_radius, tube_radius)
    tris = _grid_triangles(n)
    return TriMeshField(pts, tris, pts[:, 2].copy())


def two_peak_torus(
    n: int = 32,
    big_radius: float = 2.0,
    tube_radius: float = 1.0,
    bump_cells: int | None = None,
    bump_height: float = 1.4,
    bump_width: float = 0.3,
) -> TriMeshField:
    """Standing torus whose height field carries one extra hump.

    A smooth bump added off the summit splits the top of the surface into
    two peaks separated by one extra saddle: 1 minimum, 3 saddles and
    2 maxima in total, the classic two-summit profile on a torus.
    """
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4")
    base = grid_torus(n, big_radius, tube_radius)
    if bump_cells is None:
        bump_cells = max(3, (3 * n) // 16)
    i = np.arange(n * n) // n
    j = np.arange(n * n) % n
    u = TAU * i / n
    v = TAU * j / n
    u_c = TAU * (n // 4 + bump_cells) / n
    du = np.angle(np.exp(1j * (u - u_c)))
    dv = np.angle(np.exp(1j * v))
    bump = bump_height * np.exp(-(du**2 + dv**2) / bump_width**2)
    return base.with_field(base.field + bump)


# -------------------------------------------------------------- flat torus


def flat_torus(n: int, func, area: float = 1.0) -> TriMeshField:
    """Unit-square flat torus on an n x n cell grid, four triangles per
    cell around a cell-center vertex (so the quarter-turn is a simplicial
    automorphism). func(x, y) gives the field; coordinates live in [0, 1).
    Carries an exact area override: every triangle has area/(4 n^2).
    """
    corners_x, corners_y = np.meshgrid(
        np.arange(n) / n, np.arange(n) / n, indexing="ij"
    )
    centers_x = corners_x + 0.5 / n
    centers_y = corners_y + 0.5 / n
    xs = np.concatenate([corners_x.ravel(), centers_x.ravel()])
    ys = np.concatenate([corners_y.ravel(), centers_y.ravel()])
    pts = np.stack([xs, ys, np.zeros_like(xs)], axis=1)

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (i * n + j).ravel()
    b = (((i + 1) % n) * n + j).ravel()
    c = (((i + 1) % n) * n + (j + 1) % n).ravel()
    d = (i * n + (j + 1) % n).ravel()
    x = n * n + (i * n + j).ravel()
    tris = np.concatenate(
        [
            np.stack([a, b, x], axis=1),
            np.stack([b, c, x], axis=1),
            np.stack([c, d, x], axis=1),
            np.stack([d, a, x], axis=1),
        ]
    ).astype(np.int64)
    field = np.asarray(func(xs, ys), dtype=np.float64)
    override = np.full(len(tris), area / (4.0 * n * n))
    return TriMeshField(pts, tris, field, area_override=override)


def torus_test_field(x, y):
    """The standard genus-1 test field: one min, two saddles, one max."""
    return np.cos(TAU * y) + 0.1 * np.cos(TAU * x)


def flat_torus_cochain(
    mesh: TriMeshField, period_x: float = 0.0, period_y: float = 0.0
) -> np.ndarray:
    """Closed 1-cochain of a constant 1-form on a unit-chart torus.

    Edge values are the chart displacements wrapped to the nearest
    representative, weighted by the requested periods; the integral over
    a loop winding once in x is period_x, over a vertical loop period_y,
    and the coboundary vanishes on every triangle. Values align with
    mesh.topology.edges.
    """
    edges = mesh.topology.edges
    d = mesh.vertices[edges[:, 1], :2] - mesh.vertices[edges[:, 0], :2]
    d -= np.round(d)
    return d[:, 0] * period_x + d[:, 1] * period_y


def quarter_turn_permutation(n: int) -> np.ndarray:
    """Vertex permutation of flat_torus(n, ...) for the quarter turn
    (x, y) -> (-y, x) mod 1. Maps corners to corners, centers to centers,
    and every triangle to a triangle with orientation preserved."""
    perm = np.empty(2 * n * n, dtype=np.int64)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    # corner (i, j) at (i/n, j/n) maps to (-j/n, i/n) = corner (-j mod n, i)
    perm[(i * n + j).ravel()] = (((-j) % n) * n + i).ravel()
    # center (i+.5, j+.5)/n maps to ((-j-1)+.5, i+.5)/n
    perm[n * n + (i * n + j).ravel()] = (
        n * n + (((-j - 1) % n) * n + i).ravel()
    )
    return perm


def translation_permutation(n: int, di: int, dj: int) -> np.ndarray:
    """Vertex permutation of flat_torus(n, ...) translating by the grid
    vector (di/n, dj/n)."""
    perm = np.empty(2 * n * n, dtype=np.int64)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    shifted = (((i + di) % n) * n + (j + dj) % n).ravel()
    perm[(i * n + j).ravel()] = shifted
    perm[n * n + (i * n + j).ravel()] = n * n + shifted
    return perm


# ---------------------------------------------------------- spliced surfaces


def _directed_link_cycle(tris: np.ndarray, vertex: int) -> list[int]:
    """Link of a vertex as a directed cycle, following the orientation in
    which the star triangles traverse the link edges."""
    step = {}
    for t in tris:
        if vertex in t:
            k = list(t).index(vertex)
            b, c = int(t[(k + 1) % 3]), int(t[(k + 2) % 3])
            step[b] = c
    start = min(step)
    cycle = [start]
    while True:
        nxt = step[cycle[-1]]
        if nxt == start:
            break
        cycle.append(nxt)
        if len(cycle) > len(step):
            raise ValueError(f"link of vertex {vertex} is not a single cycle")
    if len(cycle) != len(step):
        raise ValueError(f"link of vertex {vertex} is not a single cycle")
    return cycle


def splice_tube(
    vertices: np.ndarray,
    triangles: np.ndarray,
    vertex_a: int,
    vertex_b: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remove two vertex stars and join the holes with a triangle band.

    Returns (vertices, triangles, kept) where kept maps old vertex ids to
    new ones (-1 for the removed pair). The band pairs the two link cycles
    by nearest position, so it adds no twist beyond grid alignment.
    """
    ring_a = _directed_link_cycle(triangles, vertex_a)
    ring_b = _directed_link_cycle(triangles, vertex_b)
    if len(ring_a) != len(ring_b):
        raise ValueError("link cycles differ in length; cannot splice")
    m = len(ring_a)
    ring_b_rev = ring_b[::-1]

    pa = vertices[ring_a]
    centroid_shift = vertices[ring_b_rev].mean(axis=0) - pa.mean(axis=0)
    best_offset, best_cost = 0, np.inf
    for off in range(m):
        pb = vertices[np.roll(ring_b_rev, -off)] - centroid_shift
        cost = float(((pa - pb) ** 2).sum())
        if cost < best_cost:
            best_offset, best_cost = off, cost
    ring_b_rev = list(np.roll(ring_b_rev, -best_offset))

    keep_tris = [
        t for t in triangles if vertex_a not in t and vertex_b not in t
    ]
    band = []
    for k in range(m):
        la, lb = ring_a[k], ring_a[(k + 1) % m]
        ma, mb = ring_b_rev[k], ring_b_rev[(k + 1) % m]
        band.append((la, lb, ma))
        band.append((lb, mb, ma))
    all_tris = np.asarray(keep_tris + band, dtype=np.int64)

    kept = np.full(len(vertices), -1, dtype=np.int64)
    mask = np.ones(len(vertices), dtype=bool)
    mask[[vertex_a, vertex_b]] = False
    kept[mask] = np.arange(mask.sum())
    return vertices[mask], kept[all_tris], kept


def genus2_pretzel(
    n: int = 24, big_radius: float = 2.0, tube_radius: float = 1.0,
    gap: float = 1.0,
) -> TriMeshField:
    """Two standing tori stacked along the height axis and joined by a
    neck: genus 2, field = height, six critical points, and a reduced
    graph with two loops joined by one edge."""
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4")
    shift = big_radius + tube_radius + gap / 2.0
    lower = _torus_points(n, big_radius, tube_radius) - [0.0, 0.0, shift]
    upper = _torus_points(n, big_radius, tube_radius) + [0.0, 0.0, shift]
    tris = _grid_triangles(n)
    vertices = np.concatenate([lower, upper])
    triangles = np.concatenate([tris, tris + n * n])
    top_of_lower = (n // 4) * n + 0
    bottom_of_upper = n * n + (3 * n // 4) * n + 0
    v, t, _ = splice_tube(vertices, triangles, top_of_lower, bottom_of_upper)
    return TriMeshField(v, t, v[:, 2].copy())


def genus2_theta(
    n: int = 24, big_radius: float = 2.0, tube_radius: float = 1.0,
    handle_cells: int = 3,
) -> TriMeshField:
    """Standing torus with an extra tube from its lower body to its upper
    body: genus 2, field = height, six critical points, and a theta-shaped
    reduced graph (two vertices, three parallel edges, no loops)."""
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4")
    pts = _torus_points(n, big_radius, tube_radius)
    tris = _grid_triangles(n)
    low = ((3 * n) // 4 - handle_cells) % n
    high = (n // 4 + handle_cells) % n
    vertex_low = low * n + 0
    vertex_high = high * n + 0
    v, t, _ = splice_tube(pts, tris, vertex_low, vertex_high)
    return TriMeshField(v, t, v[:, 2].copy())


def half_twist_permutation(mesh: TriMeshField, tol: float = 1e-9) -> np.ndarray:
    """Vertex permutation realizing the rotation (x, y, z) -> (-x, -y, z)
    on a mesh symmetric under it (e.g. genus2_pretzel). On each standing
    torus the rotation axis runs through the hole, so the map acts as a
    half twist of both handles simultaneously."""
    target = mesh.vertices * [-1.0, -1.0, 1.0]
    order_src = np.lexsort(
        (np.round(mesh.vertices[:, 2] / tol), np.round(mesh.vertices[:, 1] / tol),
         np.round(mesh.vertices[:, 0] / tol))
    )
    order_dst = np.lexsort(
        (np.round(target[:, 2] / tol), np.round(target[:, 1] / tol),
         np.round(target[:, 0] / tol))
    )
    perm = np.empty(mesh.n_vertices, dtype=np.int64)
    perm[order_dst] = order_src
    if not np.allclose(mesh.vertices[perm], target, atol=10 * tol):
        raise ValueError("mesh is not symmetric under the half-turn rotation")
    return perm
