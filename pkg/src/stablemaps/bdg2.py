"""Two-source construction with delays: unicyclomobiles and bi-pointed maps.

A unicyclomobile is a well-labeled bipartite plane map with exactly two
faces (hence a unique even cycle).  Performing the pointed construction
inside each face, with one added vertex per face, yields a bipartite map
with two marked vertices and an admissible delay; the inverse rebuilds
the unicyclomobile from distances to the marks.  The belt-buckle
decomposition cuts the cycle into a marked mobile and a one-black-star
piece, which is what makes the Boltzmann measure tractable.

Corners are identified with half-edges: corner(h) is the wedge between
sigma_prev(h) and h at vertex_of(h), and the corners of a face are the
half-edges of its phi-orbit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobiles import LabeledMobile, mobile_from_tree
from .planarmap import (HalfEdgeMap, MapStructureError, bfs, build_map, canonical_form,
                        faces, genus)

__all__ = [
    "Unicyclomobile",
    "DelayRecord",
    "AdmissibilityError",
    "mobile_rings",
    "compose_belt_buckle",
    "decompose_belt_buckle",
    "bdg2_forward",
    "bdg2_inverse",
    "admissible_delays",
    "cycle_vertices",
    "unicyclo_key",
    "sample_bipointed",
]


class AdmissibilityError(ValueError):
    pass


# orientation of the cut walk in face f1 (f2 uses the opposite); fixed by
# the round-trip identity
_CUT_F1_FORWARD = False


@dataclass(eq=False)
class Unicyclomobile:
    map: HalfEdgeMap
    color: np.ndarray   # 0 white, 1 black, per vertex
    label: np.ndarray   # per vertex, meaningful at whites
    root_half_edge: int  # root corner = wedge before this half-edge (white)
    f1_rep: int  # a half-edge whose face is f1
    f2_rep: int

    def validate(self) -> None:
        self.map.validate()
        fs = faces(self.map)
        if len(fs) != 2:
            raise MapStructureError(f"unicyclomobile must have 2 faces, got {len(fs)}")
        cyc = cycle_vertices(self.map)
        if len(cyc) % 2:
            raise MapStructureError("cycle length must be even")
        for u, v in self.map.edges():
            if self.color[u] == self.color[v]:
                raise MapStructureError("map is not bipartite in colors")
        root_v = int(self.map.vertex_of[self.root_half_edge])
        if self.color[root_v] != 0 or self.label[root_v] != 0:
            raise MapStructureError("root corner must sit at a white vertex of label 0")
        for b in range(len(self.color)):
            if self.color[b] != 1:
                continue
            ring = _ring_of(self.map, b)
            labs = [int(self.label[self.map.vertex_of[self.map.alpha_inv[h]]])
                    for h in ring]
            for x, y in zip(labs, labs[1:] + labs[:1]):
                if y < x - 1:
                    raise MapStructureError("labels are not well-labeled around a black vertex")


@dataclass(frozen=True)
class DelayRecord:
    delta: int
    delta1: int
    delta2: int

    def __post_init__(self):
        assert self.delta == self.delta1 - self.delta2


def _ring_of(m: HalfEdgeMap, v: int) -> list[int]:
    h0 = int(np.flatnonzero(m.vertex_of == v)[0])
    ring = [h0]
    h = int(m.sigma_next[h0])
    while h != h0:
        ring.append(h)
        h = int(m.sigma_next[h])
    return ring


def _sigma_prev(m: HalfEdgeMap) -> np.ndarray:
    prev = np.empty_like(m.sigma_next)
    prev[m.sigma_next] = np.arange(len(m.sigma_next))
    return prev


def cycle_vertices(m: HalfEdgeMap) -> list[int]:
    """Vertices of the unique cycle, in cyclic order (maps with 2 faces)."""
    deg = np.bincount(m.vertex_of, minlength=m.n_vertices)
    alive = np.ones(m.n_vertices, dtype=bool)
    adj: dict[int, set[int]] = {v: set() for v in range(m.n_vertices)}
    for h in range(m.n_half_edges):
        u, v = int(m.vertex_of[h]), int(m.vertex_of[m.alpha_inv[h]])
        adj[u].add(h)
    work = [v for v in range(m.n_vertices) if deg[v] == 1]
    deg = deg.astype(np.int64)
    dead_edges = set()
    while work:
        v = work.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for h in adj[v]:
            if h in dead_edges:
                continue
            dead_edges.add(h)
            dead_edges.add(int(m.alpha_inv[h]))
            u = int(m.vertex_of[m.alpha_inv[h]])
            deg[u] -= 1
            if deg[u] == 1 and alive[u]:
                work.append(u)
    start = int(np.flatnonzero(alive)[0])
    order = [start]
    prev = -1
    cur = start
    while True:
        nxt = None
        for h in adj[cur]:
            if h in dead_edges:
                continue
            u = int(m.vertex_of[m.alpha_inv[h]])
            if alive[u] and u != prev:
                nxt = u
                break
        if nxt is None:  # 2-cycle: both neighbors equal prev
            nxt = prev
        if nxt == start:
            break
        order.append(nxt)
        prev, cur = cur, nxt
        if len(order) > int(alive.sum()):
            break
    return order


# ---------------------------------------------------------------------------
# mobiles as rings


def mobile_rings(lm: LabeledMobile) -> tuple[list[list[int]], np.ndarray]:
    """Half-edge rings of a mobile: edge of child v has half-edges
    (2(v-1), 2(v-1)+1) = (at parent, at v); rings are [up, children...]."""
    mobile = lm.mobile
    n = mobile.n_nodes
    rings: list[list[int]] = [[] for _ in range(n)]
    alpha = np.empty(2 * (n - 1), dtype=np.int64) if n > 1 else np.zeros(0, np.int64)
    for v in range(1, n):
        h_par, h_up = 2 * (v - 1), 2 * (v - 1) + 1
        alpha[h_par], alpha[h_up] = h_up, h_par
        rings[v].append(h_up)
    for v in range(n):
        for c in mobile.children(v):
            rings[v].append(2 * (int(c) - 1))
    return rings, alpha


@dataclass(eq=False)
class Belt:
    lm: LabeledMobile
    leaf: int  # marked white leaf (may be the root for the trivial belt)


@dataclass(eq=False)
class Buckle:
    lm: LabeledMobile
    leaf: int          # marked white leaf at generation 2
    corner_vertex: int
    corner_gap: int    # gap in the vertex ring; root gaps are linear 0..deg


def buckle_corners(lm: LabeledMobile, leaf: int) -> list[tuple[int, int]]:
    """White corners of a mobile buckle: leaf excluded, root corner doubled."""
    mobile = lm.mobile
    out = []
    for v in range(mobile.n_white):
        if v == leaf:
            continue
        deg = (mobile.child_ptr[v + 1] - mobile.child_ptr[v]) + (0 if v == 0 else 1)
        gaps = deg + 1 if v == 0 else deg
        for gap in range(int(gaps)):
            out.append((v, gap))
    return out


def _merged_rings(belt: Belt, buckle: Buckle):
    """Glue belt and buckle into unicyclomobile rings.

    Belt-leaf and buckle-root merge first (vertex A), then buckle-leaf and
    belt-root merge (vertex B), closing the cycle.  Returns rings, alpha,
    the vertex remap, and bookkeeping half-edges.
    """
    lm_t, leaf_t = belt.lm, belt.leaf
    lm_p, leaf_p = buckle.lm, buckle.leaf
    if lm_t.label[leaf_t] != -lm_p.label[leaf_p]:
        raise AdmissibilityError("belt leaf label must equal minus the buckle leaf label")
    rings_t, alpha_t = mobile_rings(lm_t)
    rings_p, alpha_p = mobile_rings(lm_p)
    n_t = lm_t.mobile.n_nodes
    off_v = n_t
    off_h = len(alpha_t)
    alpha = np.concatenate([alpha_t, alpha_p + off_h]) if len(alpha_p) else alpha_t.copy()
    rings_p = [[h + off_h for h in ring] for ring in rings_p]
    p_root_ring = rings_p[0]
    h_leaf_p = rings_p[leaf_p][0]  # the buckle leaf's unique (up) half-edge

    trivial_belt = leaf_t == 0  # marked leaf is the (childless) root
    rings: dict[int, list[int]] = {}
    remap: dict[int, int] = {}
    for v in range(n_t):
        remap[v] = v
        rings[v] = list(rings_t[v])
    for v in range(lm_p.mobile.n_nodes):
        remap[off_v + v] = off_v + v
        rings[off_v + v] = list(rings_p[v])

    # vertex A: belt leaf absorbs the buckle root's children
    a_id = leaf_t
    remap[off_v + 0] = a_id
    rings[a_id] = rings[a_id] + p_root_ring  # [up(leaf_t)] + buckle root ring
    del rings[off_v + 0]
    # vertex B: buckle leaf's edge lands in the belt root corner
    b_id = 0
    remap[off_v + leaf_p] = b_id
    if trivial_belt:  # A and B are the same vertex
        rings[b_id] = [h_leaf_p] + rings[a_id] if a_id == b_id else None
    else:
        rings[b_id] = [h_leaf_p] + rings[b_id]
    if off_v + leaf_p in rings:
        del rings[off_v + leaf_p]
    return rings, alpha, remap, h_leaf_p


def compose_belt_buckle(belt: Belt, buckle: Buckle) -> Unicyclomobile:
    lm_t, lm_p = belt.lm, buckle.lm
    if buckle.corner_vertex == buckle.leaf:
        raise AdmissibilityError("marked corner must avoid the marked leaf")
    for lm, leaf in ((lm_t, belt.leaf), (lm_p, buckle.leaf)):
        if lm.mobile.color[leaf] != 0 or len(lm.mobile.children(leaf)):
            raise AdmissibilityError("marked vertices must be white leaves")
    par = buckle.lm.mobile.parent
    if buckle.leaf == 0 or par[par[buckle.leaf]] != 0:
        raise AdmissibilityError("buckle leaf must sit at generation 2")
    rings, alpha, remap, h_leaf_p = _merged_rings(belt, buckle)
    n_t = lm_t.mobile.n_nodes
    # compact vertex ids
    old_ids = sorted(rings)
    new_of = {old: i for i, old in enumerate(old_ids)}
    rotations = [rings[old] for old in old_ids]
    color = np.zeros(len(old_ids), dtype=np.uint8)
    label = np.zeros(len(old_ids), dtype=np.int64)
    shift = int(lm_t.label[belt.leaf])
    for old in old_ids:
        if old < n_t:
            color[new_of[old]] = lm_t.mobile.color[old]
            label[new_of[old]] = lm_t.label[old]
        else:
            color[new_of[old]] = lm_p.mobile.color[old - n_t]
            label[new_of[old]] = lm_p.label[old - n_t] + shift

    # root corner: transported buckle corner (vertex, gap)
    cv = buckle.corner_vertex
    ring_src = remap[n_t + cv]
    ring = rings[ring_src]
    if cv == 0:  # buckle root: linear gaps over its children within vertex A
        k = len(buckle.lm.mobile.children(0))
        base = len(ring) - k  # buckle-root children sit at the ring's tail
        gap = buckle.corner_gap
        if gap < k:
            root_h = ring[base + gap]
        else:  # far side of the doubled root corner
            root_h = ring[0] if not _is_trivial(belt) else ring[0]
    else:
        d = len(rings[remap[n_t + cv]])
        root_h = ring[(buckle.corner_gap + 1) % d]

    vertex_lists = [[] for _ in range(len(old_ids))]
    for i, old in enumerate(old_ids):
        vertex_lists[i] = rings[old]
    m = build_map(vertex_lists, alpha, root_half_edge=int(root_h))
    label = label - label[m.vertex_of[m.root_half_edge]]
    u = Unicyclomobile(map=m, color=color, label=label,
                       root_half_edge=int(root_h),
                       f1_rep=int(h_leaf_p), f2_rep=-1)
    u.f2_rep = _other_face_rep(m, int(h_leaf_p))
    u.validate()
    return u


def _is_trivial(belt: Belt) -> bool:
    return belt.lm.mobile.n_nodes == 1


def _other_face_rep(m: HalfEdgeMap, rep: int) -> int:
    fs = faces(m)
    for _, _, cyc in fs:
        if rep not in cyc:
            return cyc[0]
    raise MapStructureError("map does not have two faces")


def _face_orbit(m: HalfEdgeMap, rep: int) -> list[int]:
    cyc = [rep]
    h = int(m.sigma_next[m.alpha_inv[rep]])
    while h != rep:
        cyc.append(h)
        h = int(m.sigma_next[m.alpha_inv[h]])
    return cyc


def unicyclo_key(u: Unicyclomobile) -> tuple:
    """Complete isomorphism invariant of a rooted labeled unicyclomobile."""
    m = u.map
    f1 = set(_face_orbit(m, u.f1_rep))
    n = m.n_half_edges
    new_id = np.full(n, -1, dtype=np.int64)
    order = [int(u.root_half_edge)]
    new_id[u.root_half_edge] = 0
    stack = [int(u.root_half_edge)]
    while stack:
        h = stack.pop()
        for nxt in (int(m.sigma_next[h]), int(m.alpha_inv[h])):
            if new_id[nxt] < 0:
                new_id[nxt] = len(order)
                order.append(nxt)
                stack.append(nxt)
    sig = tuple(int(new_id[m.sigma_next[h]]) for h in order)
    alp = tuple(int(new_id[m.alpha_inv[h]]) for h in order)
    # labels only live on whites; blacks carry bookkeeping values
    lab = tuple(int(u.label[m.vertex_of[h]]) if u.color[m.vertex_of[h]] == 0 else 0
                for h in order)
    col = tuple(int(u.color[m.vertex_of[h]]) for h in order)
    face = tuple(h in f1 for h in order)
    return sig, alp, lab, col, face




def _rings_table(m: HalfEdgeMap) -> dict[int, list[int]]:
    rings: dict[int, list[int]] = {}
    seen = np.zeros(m.n_half_edges, dtype=bool)
    for h0 in range(m.n_half_edges):
        if seen[h0]:
            continue
        cyc = []
        h = h0
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = int(m.sigma_next[h])
        rings[int(m.vertex_of[h0])] = cyc
    return rings


def _rotate_after(ring: list[int], h: int) -> list[int]:
    i = ring.index(h)
    return ring[i + 1:] + ring[:i]


def decompose_belt_buckle(u: Unicyclomobile) -> tuple[Belt, Buckle]:
    """Cut the cycle at the buckle star determined by the root corner.

    Walking the contour of the face containing the root corner
    (one orientation in f1, the other in f2), the first black cycle
    vertex is the buckle star; the next white cycle vertex splits into
    belt root and buckle leaf, and the white two cycle edges back splits
    into belt leaf and buckle root.
    """
    m = u.map
    cyc = set(cycle_vertices(m))
    f1_set = set(_face_orbit(m, u.f1_rep))
    root_in_f1 = int(u.root_half_edge) in f1_set
    orbit = _face_orbit(m, u.f1_rep if root_in_f1 else u.f2_rep)
    forward = (root_in_f1 == _CUT_F1_FORWARD)
    if not forward:
        orbit = orbit[::-1]
    pos = orbit.index(int(u.root_half_edge))
    walk = orbit[pos:] + orbit[:pos]

    state, h_arrival = 0, -1
    for idx in range(1, 2 * len(walk) + 1):
        h = walk[idx % len(walk)]
        v = int(m.vertex_of[h])
        if state == 0 and u.color[v] == 1 and v in cyc:
            state = 1
        elif state == 1 and u.color[v] == 0 and v in cyc:
            h_arrival = h
            break
    if h_arrival < 0:
        raise MapStructureError("cut rule failed to locate the buckle star")
    v_b = int(m.vertex_of[h_arrival])

    sigma_prev = _sigma_prev(m)
    # the edge crossed when arriving at v_b came from the star black
    h_leaf_p = int(sigma_prev[h_arrival]) if forward else int(h_arrival)
    b_star = int(m.vertex_of[m.alpha_inv[h_leaf_p]])
    if u.color[b_star] != 1 or b_star not in cyc:
        raise MapStructureError("cut arrival edge does not come from a cycle black")

    rings = _rings_table(m)
    two_cycle = len(cyc) == 2
    if two_cycle:
        v_a = v_b
        h_up_t = None
        p_root_ring = _rotate_after(rings[v_b], h_leaf_p)
        belt_ring: list[int] = []
    else:
        nbrs = {int(m.vertex_of[m.alpha_inv[h]]) for h in rings[b_star]}
        v_a = [w for w in nbrs if w in cyc and u.color[w] == 0 and w != v_b][0]
        h_up_t = [h for h in rings[v_a]
                  if int(m.vertex_of[m.alpha_inv[h]]) in cyc
                  and u.color[m.vertex_of[m.alpha_inv[h]]] == 1
                  and int(m.vertex_of[m.alpha_inv[h]]) != b_star][0]
        p_root_ring = _rotate_after(rings[v_a], h_up_t)
        # drop the star edge: it belongs to the buckle-root ring's head? no:
        # ring of A in the composition is [h_up_t, buckle-root children...],
        # and the star edge is one of those children edges, so keep it
        belt_ring = _rotate_after(rings[v_b], h_leaf_p)

    # --- tree extraction -----------------------------------------------
    A_ROOT, A_LEAF, B_ROOT, B_LEAF = ("A", 0), ("A", 1), ("B", 0), ("B", 1)

    def vertex_of_node(node):
        return {"A": v_a, "B": v_b}.get(node[0], node[1])

    def extract(root_node, root_ring, leaf_rule):
        kids: dict = {}
        colors: dict = {}
        labels: dict = {}
        book: dict = {}

        def grow(node, ring, up_half):
            v = vertex_of_node(node)
            colors[node] = int(u.color[v])
            labels[node] = int(u.label[v])
            kids[node] = []
            book[node] = ([up_half] if up_half is not None else []) + list(ring)
            for h in ring:
                h_back = int(m.alpha_inv[h])
                w = int(m.vertex_of[h_back])
                leaf_node = leaf_rule(w, h_back)
                if leaf_node is not None:
                    kids[node].append(leaf_node)
                    colors[leaf_node] = int(u.color[w])
                    labels[leaf_node] = int(u.label[w])
                    kids[leaf_node] = []
                    book[leaf_node] = [h_back]
                    continue
                child = ("v", w)
                kids[node].append(child)
                grow(child, _rotate_after(rings[w], h_back), h_back)

        grow(root_node, root_ring, None)
        return kids, colors, labels, book

    if two_cycle:
        belt_kids = {A_LEAF: []}
        belt_colors = {A_LEAF: 0}
        belt_labels = {A_LEAF: int(u.label[v_a])}
        belt_book: dict = {A_LEAF: []}
        belt_root = A_LEAF
    else:
        def belt_leaf_rule(w, h_back):
            if w == v_a and h_back == h_up_t:
                return A_LEAF
            return None

        belt_kids, belt_colors, belt_labels, belt_book = extract(
            B_ROOT, belt_ring, belt_leaf_rule)
        belt_root = B_ROOT

    def buck_leaf_rule(w, h_back):
        if w == v_b and h_back == h_leaf_p:
            return B_LEAF
        return None

    buck_kids, buck_colors, buck_labels, buck_book = extract(
        A_ROOT, p_root_ring, buck_leaf_rule)

    shift_t = belt_labels[belt_root]
    belt_lm, belt_map = mobile_from_tree(
        belt_root, belt_kids, belt_colors,
        {k: v - shift_t for k, v in belt_labels.items()}, want_map=True)
    shift_p = buck_labels[A_ROOT]
    buck_lm, buck_map = mobile_from_tree(
        A_ROOT, buck_kids, buck_colors,
        {k: v - shift_p for k, v in buck_labels.items()}, want_map=True)

    # --- transport the root corner into buckle (vertex, gap) ------------
    h0 = int(u.root_half_edge)
    corner_node, gap = None, -1
    for node, book in buck_book.items():
        if buck_colors[node] != 0:
            continue
        if node == A_ROOT:
            if h0 in book:
                corner_node, gap = node, book.index(h0)
            elif (two_cycle and h0 == h_leaf_p) or (not two_cycle and h0 == h_up_t):
                corner_node, gap = node, len(book)
        elif node != B_LEAF and h0 in book:
            corner_node, gap = node, (book.index(h0) - 1) % len(book)
        if corner_node is not None:
            break
    if corner_node is None:
        raise MapStructureError("root corner did not transport into the buckle")

    belt = Belt(lm=belt_lm, leaf=belt_map[A_LEAF])
    buckle = Buckle(lm=buck_lm, leaf=buck_map[B_LEAF],
                    corner_vertex=buck_map[corner_node], corner_gap=int(gap))
    return belt, buckle


# ---------------------------------------------------------------------------
# forward construction


def _coherent_white_corners(u: Unicyclomobile, rep: int) -> tuple[list[int], np.ndarray]:
    """White corners of a face in the label-coherent contour direction.

    Around every black vertex consecutive white corners may drop by at
    most 1, which singles out one of the two orbit orientations; the
    successor search needs that direction so labels cannot skip levels.
    """
    m = u.map
    orbit = _face_orbit(m, rep)
    whites = [h for h in orbit if u.color[m.vertex_of[h]] == 0]
    lab = np.array([int(u.label[m.vertex_of[h]]) for h in whites])
    n = len(whites)
    if n > 1:
        drops = lab[(np.arange(n) + 1) % n] - lab
        if drops.min() < -1:
            whites = whites[::-1]
            lab = lab[::-1]
            drops = lab[(np.arange(n) + 1) % n] - lab
            if drops.min() < -1:
                raise MapStructureError("labels are not well-labeled along the face")
    return whites, lab


def _cyclic_successors(lab: np.ndarray) -> np.ndarray:
    """succ[i] = next cyclic position with label lab[i] - 1, or -1 at the min."""
    n = len(lab)
    succ = np.full(n, -1, dtype=np.int64)
    lab_min = int(lab.min())
    levels = {int(lvl): np.flatnonzero(lab == lvl) for lvl in np.unique(lab)}
    for lvl, src in levels.items():
        if lvl == lab_min:
            continue
        tgt = levels[lvl - 1]
        idx = np.searchsorted(tgt, src, side="right")
        succ[src] = tgt[np.where(idx < len(tgt), idx, 0)]
    return succ


def bdg2_forward(u: Unicyclomobile, eps: int = 1) -> tuple[HalfEdgeMap, DelayRecord]:
    """The two-source construction: one added vertex per face.

    Returns the bi-pointed map (marks "v1", "v2", rooted per eps) and the
    delay record (delta_i = label of the added vertex in face i).
    """
    if eps not in (-1, 1):
        raise ValueError("eps must be +1 or -1")
    m = u.map
    whites1, lab1 = _coherent_white_corners(u, u.f1_rep)
    whites2, lab2 = _coherent_white_corners(u, u.f2_rep)

    white_vertices = np.flatnonzero(u.color == 0)
    new_white = {int(v): i for i, v in enumerate(white_vertices)}
    n_w = len(white_vertices)
    v1_id, v2_id = n_w, n_w + 1

    corner_of: dict[int, int] = {}
    faces_corners = [whites1, whites2]
    faces_labels = [lab1, lab2]
    base = [0, len(whites1)]
    for fi in (0, 1):
        for p, h in enumerate(faces_corners[fi]):
            corner_of[h] = base[fi] + p
    n_c = len(whites1) + len(whites2)

    succ_global = np.full(n_c, -1, dtype=np.int64)
    target_point = np.empty(n_c, dtype=np.int64)
    incoming: list[list[int]] = [[] for _ in range(n_c)]
    deltas = []
    for fi in (0, 1):
        lab = faces_labels[fi]
        succ = _cyclic_successors(lab)
        deltas.append(int(lab.min()) - 1)
        for p in range(len(lab)):
            c = base[fi] + p
            target_point[c] = v1_id if fi == 0 else v2_id
            if succ[p] >= 0:
                succ_global[c] = base[fi] + succ[p]
                incoming[base[fi] + int(succ[p])].append(c)

    alpha = np.arange(2 * n_c, dtype=np.int64)
    alpha[0::2] += 1
    alpha[1::2] -= 1
    rotations: list[list[int]] = [[] for _ in range(n_w + 2)]
    rings = _rings_table(m)
    face_len = [len(whites1), len(whites2)]
    for v in white_vertices:
        ring = rotations[new_white[int(v)]]
        for h in rings[int(v)]:
            c = corner_of[h]
            fi = 0 if c < base[1] else 1
            p = c - base[fi]
            srcs = sorted(incoming[c],
                          key=lambda s: (p - (s - base[fi])) % face_len[fi])
            ring.extend(2 * s + 1 for s in srcs)
            ring.append(2 * c)
    star1 = [2 * c + 1 for c in range(base[1])
             if succ_global[c] < 0]
    star2 = [2 * c + 1 for c in range(base[1], n_c) if succ_global[c] < 0]
    rotations[v1_id] = star1[::-1]
    rotations[v2_id] = star2[::-1]

    c0 = corner_of[int(u.root_half_edge)]
    root = 2 * c0 if eps == 1 else 2 * c0 + 1
    out = build_map(rotations, alpha, root_half_edge=root,
                    marked={"v1": v1_id, "v2": v2_id})
    if genus(out) != 0:
        raise MapStructureError("two-source construction produced nonzero genus")
    degs = sorted(d for _, d, _ in faces(out))
    expect = sorted(2 * int(np.sum(m.vertex_of == b))
                    for b in np.flatnonzero(u.color == 1))
    if degs != expect:
        raise MapStructureError("face degrees do not match black degrees")
    return out, DelayRecord(delta=deltas[0] - deltas[1],
                            delta1=deltas[0], delta2=deltas[1])


def admissible_delays(m: HalfEdgeMap, v1: int, v2: int) -> list[int]:
    """{delta : |delta| < d(v1, v2), delta = d(v1, v2) mod 2}."""
    if v1 == v2:
        raise ValueError("marks must be distinct")
    d = int(bfs(m, v1).dist[v2])
    return [delta for delta in range(-d + 1, d) if (d + delta) % 2 == 0]


# ---------------------------------------------------------------------------
# inverse construction

# conventions fixed by the round-trip identity with bdg2_forward
_INV_FACE_FORWARD = False  # walk m-face orbits backward when locating descents
_INV_ROOT_AFTER = True     # root corner = wedge after the canonical root edge
_INV_BLACK_REVERSED = False


def bdg2_inverse(m: HalfEdgeMap, delta: int | DelayRecord,
                 v1: int | None = None, v2: int | None = None
                 ) -> tuple[Unicyclomobile, int]:
    """Rebuild the unicyclomobile from a bi-pointed map with a delay.

    Labels are l~(v) = min(d(v, v1) + delta1, d(v, v2) + delta2); each face
    contributes a black vertex joined to its deg/2 descent corners, the
    marks are pruned, and labels are normalized at the root corner.
    Raises :class:`AdmissibilityError` when (m, v1, v2, delta) is not
    admissible.
    """
    if v1 is None:
        v1 = int(m.marked["v1"])
    if v2 is None:
        v2 = int(m.marked["v2"])
    if isinstance(delta, DelayRecord):
        delta1, delta2 = delta.delta1, delta.delta2
    else:
        delta1, delta2 = int(delta), 0
    d1 = bfs(m, v1).dist
    d2 = bfs(m, v2).dist
    d12 = int(d1[v2])
    if not (abs(delta1 - delta2) < d12 and (d12 + delta1 - delta2) % 2 == 0):
        raise AdmissibilityError(
            f"delay {delta1 - delta2} is not admissible for distance {d12}")
    ltilde = np.minimum(d1 + delta1, d2 + delta2)

    edges = m.edges()
    if np.any(np.abs(ltilde[edges[:, 0]] - ltilde[edges[:, 1]]) != 1):
        raise AdmissibilityError("labels do not change by one along an edge")
    # local minima must be exactly the marks
    adj_min = np.full(m.n_vertices, np.iinfo(np.int64).max)
    for a, b in ((0, 1), (1, 0)):
        np.minimum.at(adj_min, edges[:, a], ltilde[edges[:, b]])
    minima = np.flatnonzero(ltilde < adj_min)
    if sorted(int(x) for x in minima) != sorted((v1, v2)):
        raise AdmissibilityError("local minima of the labels are not exactly the marks")

    m_faces = faces(m)
    n_white = m.n_vertices - 2
    old_whites = [v for v in range(m.n_vertices) if v not in (v1, v2)]
    new_id = {v: i for i, v in enumerate(old_whites)}
    arcs: list[tuple[int, int]] = []  # (m-corner half-edge, black id)
    arc_at_corner: dict[int, int] = {}
    black_rings: list[list[int]] = []
    for fid, _, cyc in m_faces:
        orbit = cyc if _INV_FACE_FORWARD else cyc[::-1]
        ring = []
        for p, h in enumerate(orbit):
            v = int(m.vertex_of[h])
            w = int(m.vertex_of[orbit[(p + 1) % len(orbit)]])
            if ltilde[v] == ltilde[w] + 1:
                a = len(arcs)
                arcs.append((h, n_white + fid))
                arc_at_corner[h] = a
                ring.append(2 * a + 1)
        if len(ring) != len(orbit) // 2:
            raise AdmissibilityError("face does not have deg/2 descent corners")
        black_rings.append(ring[::-1] if _INV_BLACK_REVERSED else ring)

    rings = _rings_table(m)
    rotations: list[list[int]] = [[] for _ in range(n_white + len(m_faces))]
    for v in old_whites:
        ring = []
        for h in rings[v]:
            if h in arc_at_corner:
                ring.append(2 * arc_at_corner[h])
        rotations[new_id[v]] = ring
    for fid in range(len(m_faces)):
        rotations[n_white + fid] = black_rings[fid]
    alpha = np.arange(2 * len(arcs), dtype=np.int64)
    alpha[0::2] += 1
    alpha[1::2] -= 1

    # root corner and sign
    h0 = int(m.root_half_edge)
    o, t = int(m.vertex_of[h0]), int(m.vertex_of[m.alpha_inv[h0]])
    eps = 1 if ltilde[t] == ltilde[o] - 1 else -1
    e0c = h0 if eps == 1 else int(m.alpha_inv[h0])
    corner_h = int(m.sigma_next[e0c]) if _INV_ROOT_AFTER else e0c
    if corner_h not in arc_at_corner:
        raise AdmissibilityError("root corner does not carry an arc")
    root_half = 2 * arc_at_corner[corner_h]

    color = np.zeros(n_white + len(m_faces), dtype=np.uint8)
    color[n_white:] = 1
    label = np.zeros(n_white + len(m_faces), dtype=np.int64)
    for v in old_whites:
        label[new_id[v]] = int(ltilde[v])
    shift = int(ltilde[m.vertex_of[e0c]])
    label -= shift

    u_map = build_map(rotations, alpha, root_half_edge=root_half)
    # faces of u: f1 is the side whose region swallowed v1
    f1_rep = _mark_side_rep(m, v1, arc_at_corner)
    u = Unicyclomobile(map=u_map, color=color, label=label,
                       root_half_edge=root_half, f1_rep=f1_rep, f2_rep=-1)
    u.f2_rep = _other_face_rep(u_map, f1_rep)
    u.validate()
    return u, eps


def _mark_side_rep(m: HalfEdgeMap, v_mark: int, arc_at_corner: dict) -> int:
    """A u-half-edge whose u-face contains the pruned mark.

    Walk the m-face incident to the mark from the mark's corner until the
    first descent corner; the white side of its arc borders the sector of
    that face containing the mark.
    """
    h_at = int(np.flatnonzero(m.vertex_of == v_mark)[0])
    h = h_at
    for _ in range(4 * m.n_half_edges):
        if h in arc_at_corner:
            return 2 * arc_at_corner[h]
        h = int(m.sigma_next[m.alpha_inv[h]])  # next corner of the face
    raise MapStructureError("no arc found on the mark's face")


# ---------------------------------------------------------------------------
# bi-pointed sampling


@dataclass(eq=False)
class BipointedSample:
    map: HalfEdgeMap
    v1: int
    v2: int
    delay: int
    unicyclo: Unicyclomobile
    eps: int
    weight: float  # importance weight (d(v1,v2) - 1)_+ against w^{2bullet}


def sample_bipointed(off, n: int, rng: np.random.Generator,
                     max_retry: int = 1000) -> BipointedSample:
    """Sample from the bi-pointed Boltzmann law, up to a known bias.

    Samples a size-n map through the one-point construction, draws uniform
    distinct marks conditioned on distance >= 2 and a uniform admissible
    delay, and inverts.  Relative to the two-point measure (counting
    measure in the delay) every sample carries importance weight
    (d(v1, v2) - 1)_+, which is returned rather than resampled away.
    """
    from .bdg import bdg_forward
    from .mobiles import sample_labeled_mobile

    lm = sample_labeled_mobile(off, n, rng)
    mp, v_star, _ = bdg_forward(lm, 1 if rng.random() < 0.5 else -1)
    for _ in range(max_retry):
        v1 = int(rng.integers(0, mp.n_vertices))
        v2 = int(rng.integers(0, mp.n_vertices))
        if v1 == v2:
            continue
        d = int(bfs(mp, v1).dist[v2])
        if d < 2:
            continue
        delays = [x for x in range(-d + 1, d) if (d + x) % 2 == 0]
        delta = int(delays[int(rng.integers(0, len(delays)))])
        m2 = HalfEdgeMap(alpha_inv=mp.alpha_inv, sigma_next=mp.sigma_next,
                         vertex_of=mp.vertex_of, root_half_edge=mp.root_half_edge,
                         marked={"v1": v1, "v2": v2})
        u, eps = bdg2_inverse(m2, delta)
        return BipointedSample(map=m2, v1=v1, v2=v2, delay=delta, unicyclo=u,
                               eps=eps, weight=float(d - 1))
    raise RuntimeError(f"no admissible mark pair found in {max_retry} draws")


def unicyclo_to_text(u: Unicyclomobile) -> str:
    """Mobile-style lines plus cycle and face annotations."""
    import io
    m = u.map
    buf = io.StringIO()
    parent_like = {}
    for v in range(m.n_vertices):
        color = "w" if u.color[v] == 0 else "b"
        line = f"{v} {color} -"
        if u.color[v] == 0:
            line += f" {int(u.label[v])}"
        buf.write(line + "\n")
    buf.write("cycle: " + " ".join(str(v) for v in cycle_vertices(m)) + "\n")
    f1 = sorted({int(m.vertex_of[h]) for h in _face_orbit(m, u.f1_rep)})
    buf.write("f1: " + " ".join(str(v) for v in f1) + "\n")
    buf.write(f"root_vertex: {int(m.vertex_of[u.root_half_edge])}\n")
    return buf.getvalue()
