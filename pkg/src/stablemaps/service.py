"""FastAPI service wrapping the sampling and verification toolkit.

Runs standalone via uvicorn (``stablemaps serve``) or in-process behind
the CLI.  Requests are deterministic given their seed, so the service is
safe to scale across clients.
"""

from __future__ import annotations

import io

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import bdg, harness, mobiles, numerics, planarmap, weights
from .rng import stream

app = FastAPI(title="stablemaps", version="0.1.0")


class WeightsRequest(BaseModel):
    family: str = "kazakov"
    alpha: float = 1.5
    k_max: int = 1000


class WeightsResponse(BaseModel):
    family: str
    alpha: float
    z_q: float
    s_q: float | None
    text: str


class SampleRequest(BaseModel):
    alpha: float = 1.5
    family: str = "kazakov"
    n: int = Field(100, ge=2)
    samples: int = Field(1, ge=1, le=10_000)
    seed: int = 0
    kind: str = "mobile"  # mobile | paths | map
    k_max: int = 0


class SampleResponse(BaseModel):
    kind: str
    items: list[str]


class VerifyRequest(BaseModel):
    alpha: float = 1.5
    family: str = "kazakov"
    n: int = Field(1000, ge=2)
    samples: int = Field(100, ge=1)
    seed: int = 7
    grid: int = 32


class VerifyResponse(BaseModel):
    samples: int
    total_violations: int
    ok: bool
    records_jsonl: str


class EstimateRequest(BaseModel):
    experiment: str = "ball_volume"
    alpha: float = 1.5
    family: str = "kazakov"
    n_list: list[int] = [1000]
    samples: int = Field(50, ge=1)
    seed: int = 0
    k_max: int = 0
    grid: int = 32


class EstimateResponse(BaseModel):
    experiment: str
    summary: dict
    records_jsonl: str


class TwoPointRequest(BaseModel):
    alphas: list[float] = [1.5]
    c: float | None = None  # default: the vanishing constant per alpha


class TwoPointRow(BaseModel):
    alpha: float
    c: float
    residual: float
    error_estimate: float


class TwoPointResponse(BaseModel):
    rows: list[TwoPointRow]


class RenderRequest(BaseModel):
    alpha: float = 1.5
    family: str = "kazakov"
    n: int = Field(200, ge=2)
    seed: int = 0
    kind: str = "X"  # X | Z
    size: int = 500


class RenderResponse(BaseModel):
    svg: str
    chords: int


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/weights", response_model=WeightsResponse)
def weights_endpoint(req: WeightsRequest):
    try:
        w = harness.make_weights(req.family, req.alpha)
        off = weights.offspring_laws(w, k_max=max(req.k_max, 10))
    except (weights.WeightError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return WeightsResponse(
        family=w.family, alpha=w.alpha, z_q=w.z_q, s_q=w.s_q,
        text=weights.weights_to_text(w, truncation_mass=off.truncation_mass))


def _sampling_setup(family, alpha, n, k_max):
    w = harness.make_weights(family, alpha)
    off = weights.offspring_laws(w, k_max=k_max or max(n, 1000))
    return w, off


@app.post("/sample", response_model=SampleResponse)
def sample_endpoint(req: SampleRequest):
    try:
        w, off = _sampling_setup(req.family, req.alpha, req.n, req.k_max)
    except (weights.WeightError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    items = []
    for s in range(req.samples):
        lm = mobiles.sample_labeled_mobile(off, req.n, stream(req.seed, req.n, s))
        if req.kind == "mobile":
            items.append(mobiles.mobile_to_text(lm))
        elif req.kind == "paths":
            pe = mobiles.encode_paths(lm)
            buf = io.StringIO()
            buf.write("i,S,L\n")
            for i in range(len(pe.S)):
                l_val = pe.L[i] if i < len(pe.L) else 0
                buf.write(f"{i},{pe.S[i]},{l_val}\n")
            items.append(buf.getvalue())
        elif req.kind == "map":
            m, _, _ = bdg.bdg_forward(lm, 1 if s % 2 == 0 else -1)
            items.append(planarmap.edges_to_text(m))
        else:
            raise HTTPException(status_code=422, detail=f"unknown kind {req.kind!r}")
    return SampleResponse(kind=req.kind, items=items)


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(req: VerifyRequest):
    cfg = harness.CampaignConfig(
        experiment="verify", alpha=req.alpha, family=req.family,
        n_list=(req.n,), samples=req.samples, seed=req.seed, grid=req.grid)
    records = harness.run_campaign(cfg)
    total = sum(r["stats"].get("violations", 1) if "error" not in r else 1
                for r in records)
    return VerifyResponse(samples=len(records), total_violations=total,
                          ok=total == 0,
                          records_jsonl=harness.records_to_jsonl(records))


@app.post("/estimate", response_model=EstimateResponse)
def estimate_endpoint(req: EstimateRequest):
    try:
        cfg = harness.CampaignConfig(
            experiment=req.experiment, alpha=req.alpha, family=req.family,
            n_list=tuple(req.n_list), samples=req.samples, seed=req.seed,
            k_max=req.k_max, grid=req.grid)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    records = harness.run_campaign(cfg)
    if req.experiment == "ball_volume":
        summary = {str(n): v for n, v in harness.ball_volume_exponent(records).items()}
    elif req.experiment == "two_point":
        summary = {str(k): v for k, v in harness.two_point_scaling(records).items()}
    else:
        total = sum(r["stats"].get("violations", 1) if "error" not in r else 1
                    for r in records)
        summary = {"total_violations": total, "ok": total == 0}
    return EstimateResponse(experiment=req.experiment, summary=summary,
                            records_jsonl=harness.records_to_jsonl(records))


@app.post("/twopoint", response_model=TwoPointResponse)
def twopoint_endpoint(req: TwoPointRequest):
    rows = []
    for alpha in req.alphas:
        c = req.c if req.c is not None else numerics.critical_bridge_constant(alpha)
        try:
            res = numerics.two_point_residual(alpha, c)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        rows.append(TwoPointRow(alpha=alpha, c=c, residual=res.value,
                                error_estimate=res.abs_error_estimate))
    return TwoPointResponse(rows=rows)


@app.post("/render", response_model=RenderResponse)
def render_endpoint(req: RenderRequest):
    try:
        w, off = _sampling_setup(req.family, req.alpha, req.n, 0)
    except (weights.WeightError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    from . import looptree
    lm = mobiles.sample_labeled_mobile(off, req.n, stream(req.seed, req.n, 0))
    pe = mobiles.encode_paths(lm)
    ex = looptree.excursion_from_lukasiewicz(pe.S)
    if req.kind == "X":
        svg = harness.render_lamination(ex.x, "X", excursion=ex, size=req.size)
        chords = len(harness.lamination_chords(ex.x, "X", ex))
    elif req.kind == "Z":
        lab = pe.L.astype(float)
        svg = harness.render_lamination(lab, "Z", size=req.size)
        chords = len(harness.lamination_chords(lab, "Z"))
    else:
        raise HTTPException(status_code=422, detail=f"unknown kind {req.kind!r}")
    return RenderResponse(svg=svg, chords=chords)
