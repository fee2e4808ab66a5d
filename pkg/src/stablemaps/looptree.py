"""Looptree metrics and Gaussian label fields on discrete jump excursions.

The continuum object is approximated by rescaled Lukasiewicz excursions
(every identity used here is exact on integer inputs); the same code
accepts synthetic grids.  Ancestral structure follows the running-minimum
relation, loops have the circle metric of their jump sizes, and labels
decorate the jumps with independent Brownian bridges refined lazily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import STAGE_FIELD, stream

__all__ = [
    "JumpExcursion",
    "AncestralDecomposition",
    "LabelField",
    "excursion_from_lukasiewicz",
    "ancestors",
    "common_ancestor",
    "loop_distance",
    "face_boundary",
    "label_field",
    "z_metric",
    "z_metric_matrix",
    "dstar_grid",
    "identified_pairs",
]


@dataclass(eq=False)
class JumpExcursion:
    """Cadlag excursion on a grid: x[j] >= 0 before the end, x[-1] = 0.

    The pre-value at index j is x[j-1] (x[-1] := 0 at j = 0); a jump at j
    means x[j] > x[j-1], of size delta[j].
    """

    t: np.ndarray
    x: np.ndarray
    jumps: np.ndarray = field(default=None)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.x = np.asarray(self.x, dtype=np.float64)
        if len(self.t) != len(self.x):
            raise ValueError("grid and values must have equal length")
        if self.x[-1] != 0.0 or (len(self.x) > 1 and self.x[:-1].min() < 0):
            raise ValueError("excursion must stay >= 0 and end at 0")
        pre = np.concatenate([[0.0], self.x[:-1]])
        if self.jumps is None:
            self.jumps = np.flatnonzero(self.x > pre)
        self.pre = pre
        self.delta = self.x - pre

    @property
    def n(self) -> int:
        return len(self.x)


def excursion_from_lukasiewicz(s_path: np.ndarray) -> JumpExcursion:
    """Excursion grid from a Lukasiewicz path ending at -1.

    The final -1 overshoot is replaced by a 0 so that the lifetime is
    normalized; all ancestral identities remain exact integers.
    """
    s_path = np.asarray(s_path, dtype=np.int64)
    if s_path[-1] != -1 or s_path[0] != 0:
        raise ValueError("expected a first-passage Lukasiewicz path")
    x = np.concatenate([s_path[:-1], [0]]).astype(np.float64)
    t = np.linspace(0.0, 1.0, len(x))
    return JumpExcursion(t=t, x=x)


@dataclass(eq=False)
class AncestralDecomposition:
    """Jump ancestors of a query index: times r, jump sizes, and x_{r,t}."""

    query: int
    r: np.ndarray
    delta: np.ndarray
    x_rt: np.ndarray

    def reconstruct(self) -> float:
        return float(self.x_rt.sum())


def _ancestor_sweep(ex: JumpExcursion, j: int):
    """All ancestors of index j (backward running-minimum sweep)."""
    rs, deltas, xs = [], [], []
    mn = math.inf
    for r in range(j, -1, -1):
        mn = min(mn, float(ex.x[r]))
        if ex.pre[r] <= mn:
            rs.append(r)
            deltas.append(float(ex.delta[r]))
            xs.append(mn - float(ex.pre[r]))
            mn = min(mn, float(ex.pre[r]))
    return rs[::-1], deltas[::-1], xs[::-1]


def ancestors(ex: JumpExcursion, j: int) -> AncestralDecomposition:
    """Jump ancestors r of j with their x_{r,j} = min X[r..j] - X[r-].

    On integer Lukasiewicz inputs the sizes reconstruct X_j exactly.
    """
    if j == 0:
        return AncestralDecomposition(query=0, r=np.zeros(0, np.int64),
                                      delta=np.zeros(0), x_rt=np.zeros(0))
    rs, deltas, xs = _ancestor_sweep(ex, j)
    keep = [i for i, d in enumerate(deltas) if d > 0]
    return AncestralDecomposition(
        query=j,
        r=np.asarray([rs[i] for i in keep], dtype=np.int64),
        delta=np.asarray([deltas[i] for i in keep]),
        x_rt=np.asarray([xs[i] for i in keep]))


def common_ancestor(ex: JumpExcursion, i: int, j: int) -> int:
    """Largest r <= min(i, j) with r an ancestor of both."""
    if i > j:
        i, j = j, i
    mn = float(ex.x[i:j + 1].min())
    for r in range(i, -1, -1):
        if ex.pre[r] <= mn and float(ex.x[r:i + 1].min()) >= ex.pre[r]:
            return r
        mn = min(mn, float(ex.x[r]))
    return 0


def _circle(u: float, v: float) -> float:
    d = abs(u - v)
    return min(d, 1.0 - d)


def _resistance(u: float, v: float) -> float:
    d = abs(u - v)
    return d * (1.0 - d)


_KERNELS = {"geodesic": _circle, "resistance": _resistance}


def _d0(ex: JumpExcursion, c: int, j: int, kernel) -> float:
    """Sum over jump ancestors r with c < r <= j of delta_r k(0, x/delta)."""
    rs, deltas, xs = _ancestor_sweep(ex, j)
    total = 0.0
    for r, d, xv in zip(rs, deltas, xs):
        if r <= c or d <= 0:
            continue
        total += d * kernel(0.0, xv / d)
    return total


def loop_distance(ex: JumpExcursion, i: int, j: int,
                  kernel: str = "geodesic") -> float:
    """Looptree pseudo-distance between grid times (resistance variant
    with kernel="resistance"; the two are within a factor of 2)."""
    k = _KERNELS[kernel]
    if i == j:
        return 0.0
    c = common_ancestor(ex, i, j)
    out = _d0(ex, c, i, k) + _d0(ex, c, j, k)
    dc = float(ex.delta[c])
    if dc > 0:
        xi = _x_rt(ex, c, i)
        xj = _x_rt(ex, c, j)
        out += dc * k(xi / dc, xj / dc)
    return out


def _x_rt(ex: JumpExcursion, r: int, j: int) -> float:
    return float(ex.x[r:j + 1].min()) - float(ex.pre[r])


def face_boundary(ex: JumpExcursion, r: int, fractions: np.ndarray) -> np.ndarray:
    """First-passage times f_r(s) = inf{u >= r : X_u <= X_r - s Delta_r}.

    Weakly increasing in s; f_r(0) = r and f_r(1) is the first return to
    the pre-jump level.
    """
    if ex.delta[r] <= 0:
        raise ValueError(f"index {r} is not a jump")
    fractions = np.asarray(fractions, dtype=np.float64)
    targets = ex.x[r] - fractions * ex.delta[r]
    out = np.empty(len(fractions), dtype=np.int64)
    order = np.argsort(-targets)  # descending target = increasing time
    pos = r
    for oi in order:
        while ex.x[pos] > targets[oi] + 1e-12 and pos < ex.n - 1:
            pos += 1
        out[oi] = pos
    return out


# ---------------------------------------------------------------------------
# label field


@dataclass(eq=False)
class _Bridge:
    fractions: list
    values: list


@dataclass(eq=False)
class LabelField:
    """Brownian labels on the looptree of an excursion, lazily refined.

    Z(t) sums sqrt(delta) * b_r(x/delta) over ancestral jumps with
    delta >= threshold; per-jump standard bridges are refined by
    conditional interpolation, deterministically in the stream keyed by
    (seed, jump index, draw rank).
    """

    excursion: JumpExcursion
    seed: int
    threshold: float = 0.0
    _bridges: dict = field(default_factory=dict)
    _rngs: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    def bridge_value(self, jump_index: int, u: float) -> float:
        if u <= 0.0 or u >= 1.0:
            return 0.0
        br = self._bridges.get(jump_index)
        if br is None:
            br = _Bridge(fractions=[0.0, 1.0], values=[0.0, 0.0])
            self._bridges[jump_index] = br
            self._rngs[jump_index] = stream(self.seed, STAGE_FIELD, jump_index)
        lo = 0
        for i, fr in enumerate(br.fractions):
            if abs(fr - u) <= 1e-15:
                return br.values[i]
            if fr < u:
                lo = i
        hi = lo + 1
        u0, u1 = br.fractions[lo], br.fractions[hi]
        v0, v1 = br.values[lo], br.values[hi]
        mean = v0 + (v1 - v0) * (u - u0) / (u1 - u0)
        var = (u - u0) * (u1 - u) / (u1 - u0)
        val = mean + math.sqrt(max(var, 0.0)) * float(self._rngs[jump_index].standard_normal())
        br.fractions.insert(hi, u)
        br.values.insert(hi, val)
        return val

    def z(self, j: int) -> tuple[float, float]:
        """Label at grid index j and the truncation residual variance."""
        if j in self._cache:
            return self._cache[j]
        dec = ancestors(self.excursion, j)
        total, residual = 0.0, 0.0
        for r, d, xv in zip(dec.r, dec.delta, dec.x_rt):
            frac = xv / d
            if d >= self.threshold:
                total += math.sqrt(d) * self.bridge_value(int(r), frac)
            else:
                residual += xv * (1.0 - frac)
        self._cache[j] = (total, residual)
        return self._cache[j]

    def z_path(self, indices=None) -> np.ndarray:
        idx = range(self.excursion.n) if indices is None else indices
        return np.asarray([self.z(int(j))[0] for j in idx])


def label_field(ex: JumpExcursion, seed: int, threshold: float = 0.0) -> LabelField:
    return LabelField(excursion=ex, seed=seed, threshold=threshold)


# ---------------------------------------------------------------------------
# label pseudo-metric and the chain distance


def _interval_min(lab: np.ndarray, i: int, j: int) -> float:
    if i > j:
        i, j = j, i
    return float(lab[i:j + 1].min())


def _wrap_min(lab: np.ndarray, i: int, j: int) -> float:
    if i > j:
        i, j = j, i
    return min(float(lab[j:].min()), float(lab[:i + 1].min()))


def z_metric(lab: np.ndarray, i: int, j: int) -> float:
    """z(s,t) = Z_s + Z_t - 2 max(min over [s,t], min over the wrap)."""
    lab = np.asarray(lab)
    return float(lab[i] + lab[j]
                 - 2.0 * max(_interval_min(lab, i, j), _wrap_min(lab, i, j)))


def z_metric_matrix(lab: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Pairwise z over grid indices, via prefix/suffix interval minima."""
    lab = np.asarray(lab, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.int64)
    g = len(grid)
    lv = lab[grid]
    # interval minima between consecutive grid points, then running minima
    seg = np.empty(max(g - 1, 0))
    for k in range(g - 1):
        seg[k] = lab[grid[k]:grid[k + 1] + 1].min()
    inner = np.full((g, g), np.inf)
    for a in range(g):
        inner[a, a] = lv[a]
        if a + 1 < g:
            inner[a, a + 1:] = np.minimum.accumulate(seg[a:])
            inner[a + 1:, a] = inner[a, a + 1:]
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid indices must be strictly increasing")
    prefix = np.minimum.accumulate(lab)
    suffix = np.minimum.accumulate(lab[::-1])[::-1]
    pre, suf = prefix[grid], suffix[grid]
    idx = np.arange(g)
    outer = np.minimum(pre[np.minimum.outer(idx, idx)],
                       suf[np.maximum.outer(idx, idx)])
    z = lv[:, None] + lv[None, :] - 2.0 * np.maximum(inner, outer)
    np.fill_diagonal(z, 0.0)
    return z


def identified_pairs(ex: JumpExcursion, grid: np.ndarray) -> list[tuple[int, int]]:
    """Grid pairs (a, b) identified in the looptree.

    The criterion is exact on discrete inputs: X_{s-} = X_t with
    X_r > X_{s-} strictly on (s, t).
    """
    grid = np.asarray(grid, dtype=np.int64)
    out = []
    for ai, a in enumerate(grid):
        for bi in range(ai + 1, len(grid)):
            b = int(grid[bi])
            s, t = int(a), b
            if s == t:
                continue
            level = ex.pre[s]
            if ex.x[t] != level or ex.x[s] < level:
                continue
            if t == s + 1 or ex.x[s + 1:t].min() > level:
                out.append((ai, bi))
    return out


def dstar_grid(ex: JumpExcursion, lab: np.ndarray, grid: np.ndarray,
               identify: bool = True, max_grid: int = 4000,
               return_hops: bool = False):
    """Chain distance on grid times: shortest path over z-weighted edges.

    Zero-weight edges join looptree-identified times when ``identify`` is
    set.  The output upper-bounds the limit distance restricted to the
    grid and is nonincreasing under refinement; with hop counts it obeys
    the exact coupling d_map <= value + 2 * hops on discrete inputs.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    grid = np.asarray(grid, dtype=np.int64)
    if len(grid) > max_grid:
        raise ResourceWarning(f"grid of {len(grid)} exceeds the {max_grid} cap")
    if ex is None and identify:
        raise ValueError("identifications need the excursion")
    w = z_metric_matrix(lab, grid)
    ident = set()
    if identify:
        for a, b in identified_pairs(ex, grid):
            w[a, b] = w[b, a] = 0.0
            ident.add((a, b))
            ident.add((b, a))
    g = len(grid)
    rows = np.repeat(np.arange(g), g)
    cols = np.tile(np.arange(g), g)
    off_diag = rows != cols
    # explicit zeros must survive: zero-weight edges join identified times
    graph = csr_matrix((w.ravel()[off_diag], (rows[off_diag], cols[off_diag])),
                       shape=(g, g))
    dist, pred = shortest_path(graph, method="D", directed=False,
                               return_predecessors=True)
    if not return_hops:
        return dist
    g = len(grid)
    hops = np.zeros((g, g), dtype=np.int64)
    for a in range(g):
        for b in range(g):
            if a == b:
                continue
            steps = 0
            cur = b
            while cur != a and pred[a, cur] >= 0:
                nxt = int(pred[a, cur])
                if (nxt, cur) not in ident:
                    steps += 1  # zero-weight z links still count as hops
                cur = nxt
            hops[a, b] = steps
    return dist, hops
