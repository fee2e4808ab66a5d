"""Combinatorial maps as rotation systems, plus BFS distances.

A map is a fixed-point-free involution ``alpha_inv`` pairing half-edges
into edges and a permutation ``sigma_next`` whose cycles are the
counterclockwise half-edge orders around vertices.  Faces are the orbits
of phi = sigma_next o alpha_inv.  Distances run through compiled
shortest-path code; a naive reference BFS is kept for cross-checks.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

__all__ = [
    "HalfEdgeMap",
    "DistanceField",
    "MapStructureError",
    "build_map",
    "faces",
    "genus",
    "bfs",
    "bfs_multi",
    "bfs_naive",
    "canonical_form",
    "edges_to_text",
    "rotations_to_text",
]


class MapStructureError(ValueError):
    pass


@dataclass(eq=False)
class HalfEdgeMap:
    alpha_inv: np.ndarray
    sigma_next: np.ndarray
    vertex_of: np.ndarray
    root_half_edge: int = 0
    marked: dict = field(default_factory=dict)

    @property
    def n_half_edges(self) -> int:
        return len(self.alpha_inv)

    @property
    def n_edges(self) -> int:
        return len(self.alpha_inv) // 2

    @property
    def n_vertices(self) -> int:
        return int(self.vertex_of.max()) + 1 if len(self.vertex_of) else 0

    def edges(self) -> np.ndarray:
        h = np.arange(self.n_half_edges)
        sel = h < self.alpha_inv
        return np.column_stack([self.vertex_of[h[sel]],
                                self.vertex_of[self.alpha_inv[h[sel]]]])

    def adjacency(self) -> csr_matrix:
        e = self.edges()
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return csr_matrix((data, (rows, cols)),
                          shape=(self.n_vertices, self.n_vertices))

    def validate(self) -> None:
        n = self.n_half_edges
        a, s = self.alpha_inv, self.sigma_next
        if n % 2 or np.any(a[a] != np.arange(n)) or np.any(a == np.arange(n)):
            raise MapStructureError("alpha_inv is not a fixed-point-free involution")
        if np.any(np.sort(s) != np.arange(n)):
            raise MapStructureError("sigma_next is not a permutation")
        if np.any(self.vertex_of[s] != self.vertex_of):
            raise MapStructureError("sigma_next cycles must stay within a vertex")
        # connectivity under the group generated by alpha and sigma
        seen = np.zeros(n, dtype=bool)
        stack = [self.root_half_edge]
        seen[self.root_half_edge] = True
        while stack:
            h = stack.pop()
            for nxt in (int(a[h]), int(s[h])):
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        if not seen.all():
            raise MapStructureError("map is not connected")


@dataclass(frozen=True)
class DistanceField:
    src: int
    dist: np.ndarray


def build_map(rotations: list[list[int]], alpha_inv: np.ndarray,
              root_half_edge: int = 0, marked: dict | None = None) -> HalfEdgeMap:
    """Assemble and validate a map from per-vertex rotation lists.

    ``rotations[v]`` lists the half-edges around vertex v in
    counterclockwise order; every half-edge id in [0, 2E) must appear
    exactly once across all lists.
    """
    alpha_inv = np.asarray(alpha_inv, dtype=np.int64)
    n = len(alpha_inv)
    sigma = np.full(n, -1, dtype=np.int64)
    vertex_of = np.full(n, -1, dtype=np.int64)
    for v, ring in enumerate(rotations):
        for i, h in enumerate(ring):
            if not (0 <= h < n) or vertex_of[h] != -1:
                raise MapStructureError(f"half-edge {h} repeated or out of range")
            vertex_of[h] = v
            sigma[h] = ring[(i + 1) % len(ring)]
    if np.any(vertex_of < 0):
        raise MapStructureError("some half-edges missing from rotation lists")
    m = HalfEdgeMap(alpha_inv=alpha_inv, sigma_next=sigma, vertex_of=vertex_of,
                    root_half_edge=root_half_edge, marked=dict(marked or {}))
    m.validate()
    return m


def faces(m: HalfEdgeMap) -> list[tuple[int, int, list[int]]]:
    """Orbits of phi = sigma_next o alpha_inv: (face id, degree, cycle)."""
    n = m.n_half_edges
    seen = np.zeros(n, dtype=bool)
    out = []
    for h0 in range(n):
        if seen[h0]:
            continue
        cyc = []
        h = h0
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = int(m.sigma_next[m.alpha_inv[h]])
        out.append((len(out), len(cyc), cyc))
    return out


def genus(m: HalfEdgeMap) -> int:
    v = m.n_vertices
    e = m.n_edges
    f = len(faces(m))
    defect = 2 - v + e - f
    if defect % 2:
        raise MapStructureError(f"odd Euler defect {defect}")
    return defect // 2


def bfs(m: HalfEdgeMap, src: int) -> DistanceField:
    d = dijkstra(m.adjacency(), indices=src, unweighted=True, directed=False)
    return DistanceField(src=src, dist=d.astype(np.int64))


def bfs_multi(m: HalfEdgeMap, sources) -> np.ndarray:
    d = dijkstra(m.adjacency(), indices=np.asarray(sources, dtype=np.int64),
                 unweighted=True, directed=False)
    return np.atleast_2d(d).astype(np.int64)


def bfs_naive(m: HalfEdgeMap, src: int) -> np.ndarray:
    """Reference quadratic-ish BFS, for cross-checking the compiled path."""
    adj: dict[int, list[int]] = {}
    for u, v in m.edges():
        adj.setdefault(int(u), []).append(int(v))
        adj.setdefault(int(v), []).append(int(u))
    dist = np.full(m.n_vertices, -1, dtype=np.int64)
    dist[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj.get(u, ()):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def canonical_form(m: HalfEdgeMap, include_marks: bool = True) -> tuple:
    """Canonical relabeling by traversal from the root half-edge.

    Rooted connected maps have no nontrivial automorphisms, so the pair
    of permutations rewritten in discovery order is a complete
    isomorphism invariant (marks are appended as canonical vertex ids).
    """
    n = m.n_half_edges
    new_id = np.full(n, -1, dtype=np.int64)
    order = []
    stack = [int(m.root_half_edge)]
    new_id[m.root_half_edge] = 0
    order.append(int(m.root_half_edge))
    while stack:
        h = stack.pop()
        for nxt in (int(m.sigma_next[h]), int(m.alpha_inv[h])):
            if new_id[nxt] < 0:
                new_id[nxt] = len(order)
                order.append(nxt)
                stack.append(nxt)
    order_arr = np.asarray(order)
    sig = tuple(int(new_id[m.sigma_next[h]]) for h in order_arr)
    alp = tuple(int(new_id[m.alpha_inv[h]]) for h in order_arr)
    canon: tuple = (sig, alp)
    if include_marks and m.marked:
        vert_rank = {}
        for h in order:
            v = int(m.vertex_of[h])
            if v not in vert_rank:
                vert_rank[v] = len(vert_rank)
        canon = canon + (tuple(sorted((k, vert_rank[v]) for k, v in m.marked.items())),)
    return canon


def edges_to_text(m: HalfEdgeMap) -> str:
    buf = io.StringIO()
    buf.write(f"{m.n_vertices} {m.n_edges}\n")
    for u, v in m.edges():
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def rotations_to_text(m: HalfEdgeMap) -> str:
    rings: dict[int, list[int]] = {}
    seen = np.zeros(m.n_half_edges, dtype=bool)
    for h0 in range(m.n_half_edges):
        if seen[h0]:
            continue
        v = int(m.vertex_of[h0])
        cyc = []
        h = h0
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = int(m.sigma_next[h])
        rings[v] = cyc
    buf = io.StringIO()
    for v in sorted(rings):
        buf.write(f"{v}: " + " ".join(str(h) for h in rings[v]) + "\n")
    return buf.getvalue()
