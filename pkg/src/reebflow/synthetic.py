"""Abstract measured Reeb graphs: hand-built and randomly sampled.

These graphs carry no mesh backing; they exercise the combinatorial and
measure-theoretic layers (isomorphism, moments, circulation) directly.
All generated numbers are dyadic rationals, so every arithmetic result
that stays within sums and differences is exact in binary floats.
"""

from __future__ import annotations

import numpy as np

from .errors import InternalSweepError
from .mesh import KIND_MAX, KIND_MIN, KIND_SADDLE
from .reeb import MeasuredReebGraph, ReebEdge, ReebVertex, check_graph


def make_graph(vertices, edges, n_profile: int = 9) -> MeasuredReebGraph:
    """Build a measured Reeb graph from plain data.

    vertices: list of (f, kind). Must be listed in increasing f order.
    edges: list of (src, dst, mass) or (src, dst, mass, profile) where
    profile is an (K, 2) array; omitted profiles are filled in linearly.
    """
    vs = [ReebVertex(i, float(f), kind) for i, (f, kind) in enumerate(vertices)]
    es = []
    for eid, spec in enumerate(edges):
        src, dst, mass = spec[0], spec[1], float(spec[2])
        if len(spec) > 3 and spec[3] is not None:
            profile = np.asarray(spec[3], dtype=np.float64)
        else:
            a, b = vs[src].f, vs[dst].f
            steps = np.arange(n_profile) / (n_profile - 1)
            profile = np.stack([a + (b - a) * steps, mass * steps], axis=1)
        es.append(ReebEdge(eid, src, dst, mass, profile))
    total = float(np.add.reduce([e.mass for e in es]))
    graph = MeasuredReebGraph(vs, es, total)
    check_graph(graph)
    return graph


def profile_first_moment(edge: ReebEdge) -> float:
    """Stieltjes midpoint sum of integral z dmu over the edge profile;
    exact whenever mu is piecewise linear in z between the samples."""
    z, mu = edge.profile[:, 0], edge.profile[:, 1]
    mids = (z[1:] + z[:-1]) / 2.0
    return float(np.add.reduce(mids * np.diff(mu)))


def zero_mean_shift(graph: MeasuredReebGraph) -> MeasuredReebGraph:
    """Shift the field so the total first moment integral f dmu is zero,
    the existence precondition for circulation functions."""
    total_moment = float(
        np.add.reduce([profile_first_moment(e) for e in graph.edges])
    )
    c = total_moment / graph.total_mass
    vs = [ReebVertex(v.id, v.f - c, v.kind, v.mesh_vertex)
          for v in graph.vertices]
    es = []
    for e in graph.edges:
        profile = e.profile.copy()
        profile[:, 0] -= c
        es.append(ReebEdge(e.id, e.src, e.dst, e.mass, profile))
    return MeasuredReebGraph(vs, es, graph.total_mass)


def scale_edge_mass(graph: MeasuredReebGraph, eid: int,
                    factor: float) -> MeasuredReebGraph:
    """Copy of the graph with one edge's measure scaled by factor > 0."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    es = []
    for e in graph.edges:
        if e.id == eid:
            profile = e.profile.copy()
            profile[:, 1] *= factor
            es.append(ReebEdge(e.id, e.src, e.dst, e.mass * factor, profile))
        else:
            es.append(e)
    total = float(np.add.reduce([e.mass for e in es]))
    return MeasuredReebGraph(list(graph.vertices), es, total)


# ------------------------------------------------------------ random graphs


def random_graph(
    seed,
    max_edges: int = 30,
    min_edges: int = 1,
    n_profile: int = 9,
) -> MeasuredReebGraph:
    """Random connected measured Reeb graph with dyadic data.

    Simulates an upward sweep: strands open at minima, split and merge
    at saddles, and close at maxima. Rejects disconnected or oversized
    outcomes and retries, so the result is always a valid graph.
    """
    rng = np.random.default_rng(seed)
    for _ in range(200):
        graph = _try_random_graph(rng, max_edges, min_edges, n_profile)
        if graph is not None:
            return graph
    raise RuntimeError("random graph generation failed to converge")


def _try_random_graph(rng, max_edges, min_edges, n_profile):
    vertices: list[tuple[float, str]] = []
    edges: list[tuple[int, int, float]] = []
    strands: list[int] = []  # vertex id at the open lower end
    value = 0.0

    def next_value() -> float:
        nonlocal value
        value += float(rng.integers(1, 65)) / 64.0
        return value

    def dyadic_mass() -> float:
        return float(rng.integers(1, 513)) / 512.0

    n_interior = int(rng.integers(0, 9))
    vertices.append((next_value(), KIND_MIN))
    strands.append(0)
    for _ in range(n_interior):
        choices = ["min", "split"]
        if len(strands) >= 2:
            choices += ["merge", "max"]
        op = rng.choice(choices)
        vid = len(vertices)
        if op == "min":
            vertices.append((next_value(), KIND_MIN))
            strands.append(vid)
        elif op == "split":
            k = int(rng.integers(0, len(strands)))
            src = strands.pop(k)
            vertices.append((next_value(), KIND_SADDLE))
            edges.append((src, vid, dyadic_mass()))
            strands += [vid, vid]
        elif op == "merge":
            k1 = int(rng.integers(0, len(strands)))
            s1 = strands.pop(k1)
            k2 = int(rng.integers(0, len(strands)))
            s2 = strands.pop(k2)
            vertices.append((next_value(), KIND_SADDLE))
            edges.append((s1, vid, dyadic_mass()))
            edges.append((s2, vid, dyadic_mass()))
            strands.append(vid)
        else:
            k = int(rng.integers(0, len(strands)))
            src = strands.pop(k)
            vertices.append((next_value(), KIND_MAX))
            edges.append((src, vid, dyadic_mass()))
    while strands:
        # a lone strand must close; two or more may merge first
        if len(strands) >= 2 and rng.random() < 0.5:
            s1, s2 = strands.pop(), strands.pop()
            vid = len(vertices)
            vertices.append((next_value(), KIND_SADDLE))
            edges.append((s1, vid, dyadic_mass()))
            edges.append((s2, vid, dyadic_mass()))
            strands.append(vid)
        else:
            src = strands.pop()
            vid = len(vertices)
            vertices.append((next_value(), KIND_MAX))
            edges.append((src, vid, dyadic_mass()))
    if not min_edges <= len(edges) <= max_edges:
        return None
    try:
        return make_graph(vertices, edges, n_profile=n_profile)
    except InternalSweepError:
        return None
