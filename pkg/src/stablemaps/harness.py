"""Monte Carlo campaigns, scaling estimators, and lamination rendering.

Campaigns are embarrassingly parallel over sample indices: every sample
draws from streams keyed by (seed, n-index, sample), so results do not
depend on scheduling, and records serialize to JSONL with stable key
order for byte-identical reruns.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bdg, bdg2, looptree, mobiles, planarmap, weights
from .rng import stream

__all__ = [
    "CampaignConfig",
    "run_campaign",
    "records_to_jsonl",
    "ball_volume_exponent",
    "two_point_scaling",
    "render_lamination",
    "make_weights",
    "make_offspring",
]

EXPERIMENTS = ("ball_volume", "two_point", "verify", "coupling")


@dataclass(frozen=True)
class CampaignConfig:
    experiment: str
    alpha: float = 1.5
    family: str = "kazakov"
    n_list: tuple = (1000,)
    samples: int = 100
    seed: int = 0
    k_max: int = 0  # 0: pick max(n) automatically
    grid: int = 32
    verify_samples: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.samples <= 0 or not self.n_list or min(self.n_list) < 2:
            raise ValueError("sample and size counts must be positive")


def make_weights(family: str, alpha: float) -> weights.WeightSequence:
    if family == "kazakov":
        return weights.kazakov_weights(alpha)
    if family == "tuned":
        return weights.tune_base_sequence(lambda k: k ** (-alpha - 0.5), alpha)
    raise ValueError(f"unknown family {family!r} (custom tables go through the API)")


def make_offspring(cfg: CampaignConfig) -> tuple[weights.WeightSequence,
                                                 weights.TwoTypeOffspring]:
    w = make_weights(cfg.family, cfg.alpha)
    k_max = cfg.k_max or max(max(cfg.n_list), 1000)
    off = weights.offspring_laws(w, k_max=k_max)
    return w, off


def _n_threads() -> int:
    try:
        return max(1, int(os.environ.get("STABLEMAPS_THREADS", "1")))
    except ValueError:
        return 1


def _radius_grid(points: int) -> np.ndarray:
    return np.geomspace(0.08, 0.8, points)


def _ball_volume_sample(w, off, n, idx, seed, grid):
    rng = stream(seed, n, idx)
    lm = mobiles.sample_labeled_mobile(off, n, rng)
    lab = lm.label[:lm.mobile.n_white]
    dist_to_point = lab - lab.min() + 1
    scale = (w.s_q * n) ** (1.0 / (2.0 * w.alpha))
    radii = _radius_grid(grid)
    counts = np.searchsorted(np.sort(dist_to_point), radii * scale, side="right")
    return {"counts": counts.tolist(), "radii": radii.tolist(),
            "max_dist": int(dist_to_point.max())}


def _two_point_sample(w, off, n, idx, seed, grid):
    rng = stream(seed, n, idx)
    lm = mobiles.sample_labeled_mobile(off, n, rng)
    edges, v_star, corners = bdg.bdg_edges(lm)
    n_v = v_star + 1
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra
    data = np.ones(2 * len(edges), dtype=np.int8)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = csr_matrix((data, (rows, cols)), shape=(n_v, n_v))
    v1 = int(rng.integers(0, n_v))
    v2 = int(rng.integers(0, n_v))
    d_row = dijkstra(adj, indices=v1, unweighted=True)
    d = int(d_row[v2]) if v1 != v2 else 0
    return {"d": d, "rescaled": d * (w.s_q * n) ** (-1.0 / (2.0 * w.alpha)),
            "weight": float(max(d - 1, 0))}


def _verify_sample(w, off, n, idx, seed, grid):
    rng = stream(seed, n, idx)
    lm = mobiles.sample_labeled_mobile(off, n, rng)
    m, v_star, corners = bdg.bdg_forward(lm, 1 if idx % 2 == 0 else -1)
    rep = bdg.verify_map(lm, m, v_star, stream(seed, n, idx, 1),
                         n_pairs=min(1000, n), n_quads=min(100, n // 4 + 1),
                         corners=corners)
    g = planarmap.genus(m)
    return {"violations": len(rep["violations"]) + (g != 0),
            "pairs": rep["n_pairs"], "quads": rep["n_quads"]}


def _coupling_sample(w, off, n, idx, seed, grid):
    rng = stream(seed, n, idx)
    lm = mobiles.sample_labeled_mobile(off, n, rng)
    m, v_star, corners = bdg.bdg_forward(lm, 1)
    lab = corners.label.astype(np.float64)
    c_total = len(corners.contour)
    g_pts = np.unique(np.linspace(0, c_total - 1, min(grid, c_total)).astype(np.int64))
    verts = corners.contour[g_pts]
    dmat = planarmap.bfs_multi(m, verts)
    zmat = looptree.z_metric_matrix(lab, g_pts)
    dstar, hops = looptree.dstar_grid(None, lab, g_pts, identify=False,
                                      return_hops=True)
    violations = 0
    for a in range(len(g_pts)):
        for b in range(len(g_pts)):
            d_ab = int(dmat[a, verts[b]])
            if abs(lab[g_pts[a]] - lab[g_pts[b]]) > d_ab + 1e-9:
                violations += 1
            if d_ab > zmat[a, b] + 2 + 1e-9:
                violations += 1
            if d_ab > dstar[a, b] + 2 * hops[a, b] + 1e-9:
                violations += 1
    return {"violations": violations, "grid": len(g_pts)}


_SAMPLERS = {
    "ball_volume": _ball_volume_sample,
    "two_point": _two_point_sample,
    "verify": _verify_sample,
    "coupling": _coupling_sample,
}


def run_campaign(cfg: CampaignConfig) -> list[dict]:
    """Run a campaign and return one record per (experiment, n, sample)."""
    w, off = make_offspring(cfg)
    sampler = _SAMPLERS[cfg.experiment]
    records: list[dict] = []
    jobs = [(n_ix, n, s) for n_ix, n in enumerate(cfg.n_list)
            for s in range(cfg.samples)]

    def work(job):
        n_ix, n, s = job
        try:
            stats = sampler(w, off, n, s, cfg.seed + 1000 * n_ix, cfg.grid)
            err = None
        except Exception as exc:  # per-sample failures recorded, campaign continues
            stats, err = {}, f"{type(exc).__name__}: {exc}"
        rec = {"experiment": cfg.experiment, "n": n, "sample": s, "stats": stats}
        if err:
            rec["error"] = err
        return rec

    threads = _n_threads()
    if threads == 1:
        records = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, jobs))
    records.sort(key=lambda r: (r["n"], r["sample"]))
    return records


def records_to_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


# ---------------------------------------------------------------------------
# estimators


def ball_volume_exponent(records: list[dict],
                         window: tuple[float, float] = (0.1, 0.55)) -> dict:
    """Least-squares slope of log mean volume against log radius.

    The central window drops radii with fewer than a handful of vertices
    and radii sensing the total size; the standard error pools per-sample
    slopes.  The monofractal target is 2 alpha.
    """
    by_n: dict[int, list] = {}
    for r in records:
        if "error" in r or not r["stats"]:
            continue
        by_n.setdefault(r["n"], []).append(r["stats"])
    out = {}
    for n, stats in by_n.items():
        radii = np.asarray(stats[0]["radii"])
        counts = np.asarray([s["counts"] for s in stats], dtype=np.float64)
        keep = (radii >= window[0]) & (radii <= window[1])
        if keep.sum() < 2:
            raise ValueError("radius window leaves fewer than two points")
        lr = np.log(radii[keep])
        mean_counts = counts[:, keep].mean(axis=0)
        if np.any(mean_counts <= 0):
            raise ValueError("window includes empty balls; enlarge radii")
        slope = float(np.polyfit(lr, np.log(mean_counts), 1)[0])
        per_sample = []
        for row in counts[:, keep]:
            if np.all(row > 0):
                per_sample.append(np.polyfit(lr, np.log(row), 1)[0])
        stderr = float(np.std(per_sample) / math.sqrt(len(per_sample))) \
            if len(per_sample) > 1 else float("nan")
        out[n] = {"slope": slope, "stderr": stderr, "samples": len(stats)}
    return out


def two_point_scaling(records: list[dict]) -> dict:
    by_n: dict[int, list] = {}
    for r in records:
        if "error" in r or not r["stats"]:
            continue
        by_n.setdefault(r["n"], []).append(r["stats"])
    out = {}
    for n, stats in sorted(by_n.items()):
        resc = np.asarray([s["rescaled"] for s in stats])
        wts = np.asarray([s["weight"] for s in stats])
        out[n] = {
            "median": float(np.median(resc)),
            "q25": float(np.quantile(resc, 0.25)),
            "q75": float(np.quantile(resc, 0.75)),
            "mean_delay_weight": float(wts.mean()),
            "samples": len(stats),
        }
    meds = [v["median"] for v in out.values()]
    out["stability"] = (max(meds) - min(meds)) / max(meds) if len(meds) > 1 else 0.0
    return out


# ---------------------------------------------------------------------------
# laminations


def _chord(s: float, t: float) -> tuple[float, float, float, float]:
    a1, a2 = 2 * math.pi * s, 2 * math.pi * t
    return (math.cos(a1), -math.sin(a1), math.cos(a2), -math.sin(a2))


def lamination_chords(path: np.ndarray, kind: str,
                      excursion: looptree.JumpExcursion | None = None
                      ) -> list[tuple[int, int]]:
    """Identified pairs along a discrete path: one chord per pair.

    kind "X": looptree identifications (first return below the pre-jump
    level with a strict excursion in between); kind "Z": vanishing label
    pseudo-metric on the grid.
    """
    path = np.asarray(path, dtype=np.float64)
    n = len(path)
    if not n:
        return []
    if kind == "X":
        ex = excursion if excursion is not None else \
            looptree.JumpExcursion(t=np.linspace(0, 1, n), x=path)
        return looptree.identified_pairs(ex, np.arange(n))
    if kind == "Z":
        zm = looptree.z_metric_matrix(path, np.arange(n))
        a_idx, b_idx = np.nonzero(np.triu(zm <= 1e-12, k=1))
        return list(zip(a_idx.tolist(), b_idx.tolist()))
    raise ValueError("kind must be 'X' or 'Z'")


def _face_polygons(ex: looptree.JumpExcursion, max_edges: int) -> list[tuple[int, int]]:
    """Boundary edges of the loop of each jump: consecutive first-passage
    grid times below the jump, closed back to the jump time."""
    edges: list[tuple[int, int]] = []
    for r in ex.jumps.tolist():
        pts = [r]
        mn = float(ex.x[r])
        for u in range(r + 1, ex.n):
            if ex.x[u] < mn:
                mn = float(ex.x[u])
                pts.append(u)
                if mn <= ex.pre[r]:
                    break
        edges.extend(zip(pts, pts[1:]))
        if len(pts) > 2:
            edges.append((pts[0], pts[-1]))
        if len(edges) >= max_edges:
            break
    return edges[:max_edges]


def render_lamination(path: np.ndarray, kind: str = "X",
                      excursion: looptree.JumpExcursion | None = None,
                      max_chords: int = 4000, size: int = 500) -> str:
    """SVG chord diagram of the identifications along a discrete path.

    One steelblue chord per identified pair (class "pair"); for kind "X"
    the grid image of each face boundary is layered underneath as a
    polygon (class "face"), which for a single-jump excursion is the
    convex polygon of that jump.  Positions are t -> exp(-2 i pi t).
    """
    path = np.asarray(path, dtype=np.float64)
    n = len(path)
    pairs = lamination_chords(path, kind, excursion)[:max_chords]
    faces: list[tuple[int, int]] = []
    if kind == "X" and n:
        ex = excursion if excursion is not None else \
            looptree.JumpExcursion(t=np.linspace(0, 1, n), x=path)
        faces = _face_polygons(ex, max_chords)

    half = size / 2.0
    r = half * 0.96

    def line(a, b, cls, color, width):
        x1, y1, x2, y2 = _chord(a / n, b / n)
        return (f'<line class="{cls}" x1="{half + r * x1:.2f}" '
                f'y1="{half + r * y1:.2f}" x2="{half + r * x2:.2f}" '
                f'y2="{half + r * y2:.2f}" stroke="{color}" '
                f'stroke-width="{width}"/>')

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<circle cx="{half}" cy="{half}" r="{r}" fill="none" '
           'stroke="black" stroke-width="1"/>']
    out.extend(line(a, b, "face", "lightsteelblue", 0.4) for a, b in faces)
    out.extend(line(a, b, "pair", "steelblue", 0.8) for a, b in pairs)
    out.append("</svg>")
    return "\n".join(out)
