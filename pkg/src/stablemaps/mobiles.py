"""Exact sampling of Boltzmann mobiles conditioned on their white size.

The sampler factors through the white grandchild process: grandchild
counts conditioned on their sum form the (rotated) Lukasiewicz excursion,
the black layer is filled in by the renewal decomposition of the
grandchild law, and labels are uniform per black vertex.  Each stage is
exact; tests compare against exhaustive enumeration at small sizes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .weights import TwoTypeOffspring, WeightSequence

__all__ = [
    "Mobile",
    "LabeledMobile",
    "PathEncoding",
    "RejectionBudgetError",
    "sample_grandchild_bridge",
    "reconstruct_mobile",
    "sample_well_labeling",
    "sample_labeled_mobile",
    "encode_paths",
    "rescale_paths",
    "mobile_to_text",
    "mobile_from_text",
]


class RejectionBudgetError(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"rejection budget exceeded after {attempts} attempts")
        self.attempts = attempts


@dataclass(eq=False)
class Mobile:
    """Rooted two-type plane tree in arena form.

    White vertices carry ids 0..n_white-1 in lexicographic (depth-first)
    order; black vertices follow, grouped by their white parent.  Children
    are stored CSR-style in plane (left to right) order.
    """

    parent: np.ndarray
    color: np.ndarray  # 0 white, 1 black
    child_ptr: np.ndarray
    child_ids: np.ndarray
    n_white: int
    n_black: int

    @property
    def n_nodes(self) -> int:
        return self.n_white + self.n_black

    def children(self, v: int) -> np.ndarray:
        return self.child_ids[self.child_ptr[v]:self.child_ptr[v + 1]]

    def validate(self) -> None:
        n = self.n_nodes
        assert self.color[0] == 0, "root must be white"
        assert self.parent[0] == -1
        edges = n - 1
        assert self.n_white + self.n_black - 1 == edges
        for v in range(n):
            for c in self.children(v):
                assert self.color[c] != self.color[v], "colors must alternate"
                assert self.parent[c] == v


@dataclass(eq=False)
class LabeledMobile:
    mobile: Mobile
    label: np.ndarray  # int, meaningful at white ids

    def validate(self) -> None:
        m = self.mobile
        m.validate()
        assert self.label[0] == 0, "root label must be 0"
        for b in range(m.n_nodes):
            if m.color[b] != 1:
                continue
            ring = [m.parent[b]] + list(m.children(b)) + [m.parent[b]]
            for u, v in zip(ring, ring[1:]):
                assert self.label[v] >= self.label[u] - 1, "not well-labeled"


@dataclass(eq=False)
class PathEncoding:
    """White Lukasiewicz path S and label path L of a labeled mobile."""

    S: np.ndarray  # length n_white + 1, first hit of -1 at the last index
    L: np.ndarray  # length n_white
    visit_order: np.ndarray  # white ids in lexicographic order


# ---------------------------------------------------------------------------
# conditioned grandchild counts


def _grand_pmf(off, total: int) -> np.ndarray:
    if isinstance(off, np.ndarray):
        pmf = np.asarray(off, dtype=np.float64)
        out = np.zeros(total + 1)
        out[:min(len(pmf), total + 1)] = pmf[:total + 1]
        return out
    return off.ensure_grand(total)[:total + 1]


def _rejection_counts(pmf: np.ndarray, m: int, total: int,
                      rng: np.random.Generator, max_attempts: int) -> tuple[np.ndarray, int]:
    """i.i.d. draws from the law extending ``pmf`` conditioned on sum == total.

    Any draw exceeding ``total`` forces the sum over budget, so the mass
    above ``total`` is lumped into a sentinel that rejects the attempt.
    """
    mass = float(pmf.sum())
    cdf = np.cumsum(np.append(pmf, max(0.0, 1.0 - mass)))
    cdf[-1] = 1.0
    chunk_cap = max(1, (1 << 22) // max(m, 1))
    rows = min(16, chunk_cap)
    attempts = 0
    while attempts < max_attempts:
        rows = min(rows, max_attempts - attempts)
        draws = np.searchsorted(cdf, rng.random((rows, m)), side="right")
        sums = draws.sum(axis=1)
        hits = np.flatnonzero(sums == total)
        for h in hits:
            row = draws[h]
            if np.all(row <= total):  # sentinel value is total + 1
                return row.astype(np.int64), attempts + int(h) + 1
        attempts += rows
        rows = min(rows * 4, chunk_cap)
    raise RejectionBudgetError(attempts)


def _convolution_table(pmf: np.ndarray, m: int, total: int) -> dict[int, np.ndarray]:
    """pmfs of partial sums for every block size in the halving tree of m."""
    sizes = {m}
    queue = [m]
    while queue:
        s = queue.pop()
        if s <= 1:
            continue
        for part in (s // 2, s - s // 2):
            if part not in sizes:
                sizes.add(part)
                queue.append(part)
    table: dict[int, np.ndarray] = {1: pmf[:total + 1]}
    for s in sorted(sizes):
        if s == 1 or s in table:
            continue
        a, b = s // 2, s - s // 2
        nfft = 1 << (2 * total + 1).bit_length()
        conv = np.fft.irfft(np.fft.rfft(table[a], nfft) * np.fft.rfft(table[b], nfft),
                            nfft)[:total + 1]
        np.clip(conv, 0.0, None, out=conv)
        table[s] = conv
    return table


def _split_blocks(sizes: np.ndarray, totals: np.ndarray, table: dict[int, np.ndarray],
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Split every block (size >= 2) in two, sampling the left block sum.

    Conditionally on a block of s i.i.d. counts summing to t, the sum of
    the first a = s//2 of them has law proportional to q_a(j) q_{s-a}(t-j).
    """
    left = np.empty(len(sizes), dtype=np.int64)
    for s in np.unique(sizes):
        sel = np.flatnonzero(sizes == s)
        a, b = int(s) // 2, int(s) - int(s) // 2
        qa, qb = table[a], table[b]
        t = totals[sel]
        lens = t + 1
        starts = np.concatenate([[0], np.cumsum(lens)[:-1]])
        pos = np.arange(int(lens.sum())) - np.repeat(starts, lens)
        w = qa[pos] * qb[np.repeat(t, lens) - pos]
        cum = np.cumsum(w)
        seg_tot = np.add.reduceat(w, starts)
        base = np.where(starts > 0, cum[starts - 1], 0.0)
        u = rng.random(len(sel)) * seg_tot
        j = np.searchsorted(cum, base + u, side="left") - starts
        left[sel] = np.clip(j, 0, t)
    new_sizes = np.empty(2 * len(sizes), dtype=np.int64)
    new_totals = np.empty(2 * len(sizes), dtype=np.int64)
    new_sizes[0::2], new_sizes[1::2] = sizes // 2, sizes - sizes // 2
    new_totals[0::2], new_totals[1::2] = left, totals - left
    return new_sizes, new_totals


def _recursive_counts(pmf: np.ndarray, m: int, total: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Same conditional law as rejection, by dyadic conditional splitting.

    P(g_1..g_m | sum = total) factorizes over any split into block sums,
    so sampling block sums down a halving tree is exact and costs
    O(total log m) instead of one i.i.d. vector per rejection attempt.
    """
    if m == 1:
        return np.array([total], dtype=np.int64)
    table = _convolution_table(pmf, m, total)
    if table[m][total] <= 0.0:
        raise ValueError("conditioning event has probability zero")
    return _run_splits(table, m, total, rng)


def _run_splits(table, m, total, rng) -> np.ndarray:
    sizes = np.array([m], dtype=np.int64)
    totals = np.array([total], dtype=np.int64)
    out = np.empty(m, dtype=np.int64)
    offsets = np.array([0], dtype=np.int64)  # position of each block in out
    while True:
        done = sizes == 1
        if done.any():
            out[offsets[done]] = totals[done]
        live = ~done
        if not live.any():
            break
        sizes, prev_off = sizes[live], offsets[live]
        new_sizes, new_totals = _split_blocks(sizes, totals[live], table, rng)
        offsets = np.empty(2 * len(sizes), dtype=np.int64)
        offsets[0::2] = prev_off
        offsets[1::2] = prev_off + sizes // 2
        sizes, totals = new_sizes, new_totals
    return out


def vervaat_rotation(g: np.ndarray) -> np.ndarray:
    """Rotate bridge increments at the first minimum of the walk.

    The walk S_k = sum_{i<=k} (g_i - 1) ends at -1; rotating at the first
    argmin is the unique cyclic shift whose walk stays >= 0 before the
    end (cyclic lemma).  The output is checked to be a valid first-passage
    excursion.
    """
    steps = g.astype(np.int64) - 1
    walk = np.cumsum(steps)
    if walk[-1] != -1:
        raise ValueError("bridge must end at -1")
    a = int(np.argmin(walk)) + 1  # first position attaining the minimum
    rotated = np.concatenate([g[a:], g[:a]]) if a < len(g) else g.copy()
    rot_walk = np.cumsum(rotated.astype(np.int64) - 1)
    assert rot_walk[-1] == -1 and (len(rot_walk) == 1 or rot_walk[:-1].min() >= 0), \
        "rotation did not produce a first-passage excursion"
    return rotated


def sample_grandchild_bridge(off, n: int, rng: np.random.Generator,
                             method: str = "auto",
                             max_attempts: int = 10_000_000) -> np.ndarray:
    """Grandchild counts of the n-1 white vertices in lexicographic order.

    The counts are i.i.d. grandchild draws conditioned on summing to n-2,
    then Vervaat-rotated so the Lukasiewicz walk first hits -1 at time n-1.
    ``method="rejection"`` retries i.i.d. vectors (the attempt count is
    reported on failure); ``method="recursive"`` samples the same law by
    conditional dyadic splits and is the default above 4096 vertices.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    m, total = n - 1, n - 2
    if method == "auto":
        method = "recursive" if m >= 4096 else "rejection"
    if method == "rejection":
        pmf = _grand_pmf(off, total)
        g, _ = _rejection_counts(pmf, m, total, rng, max_attempts)
    elif method == "recursive":
        if m == 1:
            g = np.array([total], dtype=np.int64)
        else:
            cached = getattr(off, "_split_cache", None) \
                if not isinstance(off, np.ndarray) else None
            if cached is not None and cached[0] == (m, total):
                table = cached[1]
            else:
                table = _convolution_table(_grand_pmf(off, total), m, total)
                if not isinstance(off, np.ndarray):
                    off._split_cache = ((m, total), table)
            if table[m][total] <= 0.0:
                raise ValueError("conditioning event has probability zero")
            g = _run_splits(table, m, total, rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return vervaat_rotation(g)


# ---------------------------------------------------------------------------
# black layer


def _composition_tables(off, total: int, small: int = 64):
    """Conditional cdf of the next black child count, by remaining budget.

    Row g' (1 <= g' <= small) is the cdf over k in [0, g'] of
    mu_bullet(k) mu_grand(g'-k); the k > budget region has mass zero.
    Budget 0 is handled separately (geometric run of childless blacks).
    The table only involves mu_grand(0..small), so it is cached.
    """
    if isinstance(off, np.ndarray):
        raise TypeError("black-layer reconstruction needs a TwoTypeOffspring")
    mu_b = off.mu_bullet
    grand = off.ensure_grand(max(total, small))
    cached = getattr(off, "_comp_cache", None)
    if cached is not None and cached.shape[0] - 1 >= min(small, max(total, 1)):
        return cached, grand
    cdf = np.zeros((small + 1, small + 1))
    for g in range(1, small + 1):
        hi = min(g, len(mu_b) - 1)
        w = np.zeros(small + 1)
        w[:hi + 1] = mu_b[:hi + 1] * grand[g::-1][:hi + 1]
        cdf[g] = np.cumsum(w / w.sum())
    off._comp_cache = cdf
    return cdf, grand


def _sample_compositions(off, g: np.ndarray, rng: np.random.Generator,
                         small: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Black child-count sequences for every white vertex.

    Returns (black_counts_flat, block_ptr): white w owns entries
    block_ptr[w]..block_ptr[w+1] of the flat array, each entry being the
    number of white children of one black child, in plane order.
    """
    m = len(g)
    total = int(g.max(initial=0))
    z = off.z
    p_continue_at_zero = (1.0 - 1.0 / z) * (off.mu_bullet[0] if len(off.mu_bullet) else 0.0)
    cdf, grand = _composition_tables(off, total, small)
    small = cdf.shape[0] - 1

    parts: list[list[int]] = [[] for _ in range(m)]
    budgets = g.astype(np.int64).copy()
    active = np.flatnonzero(budgets > 0)
    while len(active):
        b = budgets[active]
        small_sel = b <= small
        if small_sel.any():
            idx = active[small_sel]
            rows = cdf[b[small_sel]]
            u = rng.random(len(idx))
            ks = (u[:, None] > rows).sum(axis=1)
            for w, k in zip(idx, ks):
                parts[w].append(int(k))
                budgets[w] -= int(k)
        if (~small_sel).any():
            for w in active[~small_sel]:
                gp = int(budgets[w])
                hi = min(gp, len(off.mu_bullet) - 1)
                wts = off.mu_bullet[:hi + 1] * grand[gp - hi:gp + 1][::-1]
                wts = wts / wts.sum()
                k = int(rng.choice(hi + 1, p=wts))
                parts[w].append(k)
                budgets[w] -= k
        active = active[budgets[active] > 0]

    # budget exhausted: geometric run of childless black children, then stop
    extra = rng.geometric(1.0 - p_continue_at_zero, size=m) - 1
    counts = np.fromiter((len(p) for p in parts), dtype=np.int64, count=m) + extra
    block_ptr = np.concatenate([[0], np.cumsum(counts)])
    flat = np.zeros(block_ptr[-1], dtype=np.int64)
    for w, p in enumerate(parts):
        flat[block_ptr[w]:block_ptr[w] + len(p)] = p
    return flat, block_ptr


def reconstruct_mobile(g: np.ndarray, off, rng: np.random.Generator) -> Mobile:
    """Mobile whose white grandchild counts in lexicographic order are ``g``.

    Conditionally on g, each white vertex's black children are sampled by
    the renewal decomposition of the grandchild law: with remaining budget
    g', stop with probability z^{-1} 1{g'=0} / mu_grand(g'), otherwise
    emit k white grandchildren with probability proportional to
    mu_bullet(k) mu_grand(g'-k).  Aggregated over g this is exactly the
    two-type law conditioned on the white size.
    """
    g = np.asarray(g, dtype=np.int64)
    walk = np.cumsum(g - 1)
    if walk[-1] != -1 or (len(walk) > 1 and walk[:-1].min() < 0):
        raise ValueError("g is not a first-passage excursion increment array")
    k_flat, block_ptr = _sample_compositions(off, g, rng)
    return _assemble(g, k_flat, block_ptr)


def _assemble(g: np.ndarray, k_flat: np.ndarray, block_ptr: np.ndarray) -> Mobile:
    m = len(g)
    nb = len(k_flat)
    n = m + nb
    parent = np.full(n, -1, dtype=np.int64)
    kptr = np.concatenate([[0], np.cumsum(k_flat)])
    black_children = np.full(kptr[-1], -1, dtype=np.int64)

    slot_black: list[int] = []
    slot_pos: list[int] = []
    for w in range(m):
        if w > 0:
            b = slot_black.pop()
            i = slot_pos.pop()
            parent[w] = m + b
            black_children[kptr[b] + i] = w
        for b in range(int(block_ptr[w + 1]) - 1, int(block_ptr[w]) - 1, -1):
            parent[m + b] = w
            for i in range(int(k_flat[b]) - 1, -1, -1):
                slot_black.append(b)
                slot_pos.append(i)
    assert not slot_black, "grandchild counts and compositions disagree"

    color = np.zeros(n, dtype=np.uint8)
    color[m:] = 1
    child_ptr = np.empty(n + 1, dtype=np.int64)
    child_ptr[0] = 0
    child_ptr[1:m + 1] = np.cumsum(np.diff(block_ptr))
    child_ptr[m + 1:] = child_ptr[m] + np.cumsum(k_flat)
    child_ids = np.empty(child_ptr[-1], dtype=np.int64)
    child_ids[:child_ptr[m]] = m + np.arange(nb)
    child_ids[child_ptr[m]:] = black_children
    return Mobile(parent=parent, color=color, child_ptr=child_ptr,
                  child_ids=child_ids, n_white=m, n_black=nb)


# ---------------------------------------------------------------------------
# labels


def _bridge_increments(ks: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform label bridges, one per black vertex with child count ks[b].

    A bridge for k children is (s_1..s_{k+1}), s_i >= -1, summing to 0,
    drawn uniformly among C(2k+1, k) via a uniform k-subset of 2k+1 slots
    (stars and bars).  Returns the flat increments s_1..s_k per black
    (the return step s_{k+1} is implied) and their CSR pointer.
    """
    ptr = np.concatenate([[0], np.cumsum(ks)])
    flat = np.zeros(ptr[-1], dtype=np.int64)
    big = 64
    for k in np.unique(ks):
        k = int(k)
        if k == 0:
            continue
        sel = np.flatnonzero(ks == k)
        if k <= big:
            u = rng.random((len(sel), 2 * k + 1))
            bars = np.sort(np.argpartition(u, k - 1, axis=1)[:, :k], axis=1)
            stars_before = bars - np.arange(k)  # t_1 + ... + t_j for bar j
            incr = np.diff(np.concatenate([np.zeros((len(sel), 1), dtype=np.int64),
                                           stars_before], axis=1), axis=1) - 1
        else:
            incr = np.empty((len(sel), k), dtype=np.int64)
            for r, _ in enumerate(sel):
                bars = np.sort(rng.choice(2 * k + 1, size=k, replace=False))
                sb = bars - np.arange(k)
                incr[r] = np.diff(np.concatenate([[0], sb])) - 1
        for r, b in enumerate(sel):
            flat[ptr[b]:ptr[b] + k] = incr[r]
    return flat, ptr


def sample_well_labeling(mobile: Mobile, rng: np.random.Generator) -> LabeledMobile:
    """Uniform well-labeling: independent uniform bridges per black vertex."""
    m, nb = mobile.n_white, mobile.n_black
    ks = np.diff(mobile.child_ptr)[m:] if nb else np.zeros(0, dtype=np.int64)
    flat, ptr = _bridge_increments(ks.astype(np.int64), rng)
    prefix = np.concatenate([[0], np.cumsum(flat)])

    label = np.zeros(mobile.n_nodes, dtype=np.int64)
    if m > 1:
        # per-white increment: partial bridge sum at its slot around the
        # parent black; grandparent whites precede in id (DFS) order
        blacks_kids = mobile.child_ids[mobile.child_ptr[m]:]
        pos_in_black = np.empty(m, dtype=np.int64)
        pos_in_black[blacks_kids] = (np.arange(len(blacks_kids))
                                     - np.repeat(ptr[:-1], ks))
        w_ids = np.arange(1, m)
        pb = mobile.parent[w_ids] - m
        incr = (prefix[ptr[pb] + pos_in_black[w_ids] + 1] - prefix[ptr[pb]])
        white_parent = mobile.parent[mobile.parent[w_ids]]
        lab = label  # local alias for the sequential pass
        for w, wp, dl in zip(w_ids.tolist(), white_parent.tolist(), incr.tolist()):
            lab[w] = lab[wp] + dl
    if nb:
        label[m:] = label[mobile.parent[m:]]
    return LabeledMobile(mobile=mobile, label=label)


def sample_labeled_mobile(off, n: int, rng: np.random.Generator,
                          method: str = "auto") -> LabeledMobile:
    g = sample_grandchild_bridge(off, n, rng, method=method)
    mobile = reconstruct_mobile(g, off, rng)
    return sample_well_labeling(mobile, rng)


# ---------------------------------------------------------------------------
# encodings


def encode_paths(lm: LabeledMobile) -> PathEncoding:
    mobile = lm.mobile
    m = mobile.n_white
    # blacks are stored grouped by white parent, so white w's grandchild
    # count is the total child count of its contiguous black range
    kb_cum = np.concatenate([[0], np.cumsum(np.diff(mobile.child_ptr)[m:])])
    grand = kb_cum[mobile.child_ptr[1:m + 1]] - kb_cum[mobile.child_ptr[:m]]
    s_path = np.concatenate([[0], np.cumsum(grand - 1)])
    assert s_path[-1] == -1 and (m == 1 or s_path[1:-1].min() >= 0)
    return PathEncoding(S=s_path, L=lm.label[:m].copy(),
                        visit_order=np.arange(m, dtype=np.int64))


def rescale_paths(pe: PathEncoding, w: WeightSequence,
                  grid: np.ndarray | int = 256) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rescaled encodings on a grid of times in [0, 1].

    Returns (t, 2 (s_q n)^{-1/alpha} S_{floor((n-1)t)},
    (s_q n)^{-1/(2 alpha)} L_{floor((n-1)t)}), the pair converging to the
    stable excursion and its label field.
    """
    n = len(pe.S)  # = n - 1 white vertices plus the final -1 step
    if isinstance(grid, (int, np.integer)):
        t = np.linspace(0.0, 1.0, int(grid))
    else:
        t = np.asarray(grid, dtype=np.float64)
    alpha, s_q = w.alpha, w.s_q
    n_map = n  # vertex count of the associated map: (n-1 whites) + point
    idx = np.minimum((np.floor((n - 1) * t)).astype(np.int64), n - 1)
    s_resc = 2.0 * (s_q * n_map) ** (-1.0 / alpha) * pe.S[idx]
    l_vals = np.where(idx < len(pe.L), pe.L[np.minimum(idx, len(pe.L) - 1)], 0)
    l_resc = (s_q * n_map) ** (-1.0 / (2.0 * alpha)) * l_vals
    return t, s_resc, l_resc


# ---------------------------------------------------------------------------
# serialization


def mobile_to_text(lm: LabeledMobile | Mobile) -> str:
    mobile = lm.mobile if isinstance(lm, LabeledMobile) else lm
    label = lm.label if isinstance(lm, LabeledMobile) else None
    buf = io.StringIO()
    for v in range(mobile.n_nodes):
        color = "w" if mobile.color[v] == 0 else "b"
        line = f"{v} {color} {mobile.parent[v]}"
        if label is not None and mobile.color[v] == 0:
            line += f" {label[v]}"
        buf.write(line + "\n")
    return buf.getvalue()


def mobile_from_text(text: str) -> LabeledMobile:
    colors, parents, labels = {}, {}, {}
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        v, color, parent = int(parts[0]), parts[1], int(parts[2])
        colors[v] = 0 if color == "w" else 1
        parents[v] = parent
        if len(parts) > 3:
            labels[v] = int(parts[3])
    kids: dict[int, list[int]] = {v: [] for v in colors}
    root = None
    for v, p in parents.items():
        if p < 0:
            root = v
        else:
            kids[p].append(v)  # plane order = listing order in the file
    return mobile_from_tree(root, kids, colors, labels)


def mobile_from_tree(root, kids: dict, colors: dict, labels: dict | None = None,
                     want_map: bool = False):
    """Build the arena representation from nested children lists.

    Whites are renumbered 0..n_white-1 in depth-first order, blacks follow
    grouped by their white parent, which is the layout the samplers emit.
    With ``want_map`` the original-id -> arena-id mapping is returned too.
    """
    white_order: list = []
    stack = [root]
    while stack:  # preorder over whites
        v = stack.pop()
        white_order.append(v)
        grandkids: list = []
        for b in kids[v]:
            grandkids.extend(kids[b])
        stack.extend(reversed(grandkids))
    wrank = {v: i for i, v in enumerate(white_order)}
    black_order = [b for v in white_order for b in kids[v]]  # grouped by white
    brank = {b: i for i, b in enumerate(black_order)}
    m, nb = len(white_order), len(black_order)
    n = m + nb

    def new_id(v):
        return wrank[v] if colors[v] == 0 else m + brank[v]

    parent = np.full(n, -1, dtype=np.int64)
    child_lists: list[list[int]] = [[] for _ in range(n)]
    for v in colors:
        nv = new_id(v)
        for c in kids[v]:
            parent[new_id(c)] = nv
            child_lists[nv].append(new_id(c))
    child_ptr = np.concatenate([[0], np.cumsum([len(c) for c in child_lists])]).astype(np.int64)
    child_ids = (np.concatenate([np.asarray(c, dtype=np.int64) for c in child_lists])
                 if child_ptr[-1] else np.zeros(0, dtype=np.int64))
    color = np.zeros(n, dtype=np.uint8)
    color[m:] = 1
    mobile = Mobile(parent=parent, color=color, child_ptr=child_ptr,
                    child_ids=child_ids, n_white=m, n_black=nb)
    label = np.zeros(n, dtype=np.int64)
    if labels:
        for v, lab in labels.items():
            label[new_id(v)] = lab
    lm = LabeledMobile(mobile=mobile, label=label)
    if want_map:
        return lm, {v: new_id(v) for v in colors}
    return lm
