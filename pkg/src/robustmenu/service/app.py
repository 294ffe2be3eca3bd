"""FastAPI service wrapping the solver library.

Error mapping: domain/validation problems return 400, inconsistent
ambiguity sets 409, and certificate self-check failures 500 with
error="certificate_self_check_failed" (the CLI maps these to its exit
codes).
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..adversary import worst_case_meanvar, worst_case_ratio
from ..ambiguity import (
    AmbiguitySet,
    mean_set,
    multisegment_set,
    quantile_set,
    segmented_mean_set,
    support_set,
)
from ..closed_form import (
    QuantileInfMechanism,
    mean_one_level,
    mean_two_level,
    meanvar_two_level_approx,
    quantile_inf,
    quantile_one_level,
    quantile_two_level,
    support_inf_ratio,
    support_optimal,
)
from ..core import Mechanism, RatioResult, canonicalize
from ..errors import DomainError, InconsistentAmbiguityError, NumericError
from ..ratio_lp import solve_ratio_given_prices
from ..reproduce import run_target
from ..search import approx_inf_level, best_n_level
from .models import (
    AmbiguityParams,
    CertificateModel,
    ContinuousMenuModel,
    ErrorModel,
    FileModel,
    MechanismModel,
    ReproduceRequest,
    ReproduceResponse,
    SolveRequest,
    SolveResponse,
    VerifyRequest,
)

app = FastAPI(title="robustmenu", version=__version__)


@app.exception_handler(DomainError)
async def _domain_error(request, exc: DomainError):
    return JSONResponse(status_code=400, content=ErrorModel(error="domain", detail=str(exc)).model_dump())


@app.exception_handler(InconsistentAmbiguityError)
async def _inconsistent(request, exc: InconsistentAmbiguityError):
    return JSONResponse(status_code=409, content=ErrorModel(error="inconsistent_set", detail=str(exc)).model_dump())


@app.exception_handler(NumericError)
async def _numeric(request, exc: NumericError):
    return JSONResponse(
        status_code=500,
        content=ErrorModel(error="certificate_self_check_failed", detail=str(exc)).model_dump(),
    )


@app.exception_handler(ValueError)
async def _value_error(request, exc: ValueError):
    return JSONResponse(status_code=400, content=ErrorModel(error="domain", detail=str(exc)).model_dump())


def build_ambiguity_set(params: AmbiguityParams) -> AmbiguitySet:
    if params.kind == "support":
        return support_set(params.vlo, params.vbar)
    if params.kind == "mean":
        return mean_set(params.mu, params.vbar)
    if params.kind == "quantile":
        return quantile_set(params.quantile_pairs(), params.vbar)
    if params.kind == "multisegment":
        return multisegment_set(
            [(seg["intervals"], seg["xi"]) for seg in params.segments], params.vbar
        )
    if params.kind == "segmentedmean":
        return segmented_mean_set(
            [(tuple(seg["interval"]), seg["mu"]) for seg in params.segments],
            params.vbar,
        )
    raise DomainError(f"{params.kind} has no constraint-function representation")


def _mech_model(mech: Mechanism) -> MechanismModel:
    return MechanismModel(prices=list(mech.prices), probs=list(mech.probs), vbar=mech.vbar)


def _ratio_response(result: RatioResult, label: str) -> SolveResponse:
    return SolveResponse(
        metric="competitive_ratio",
        value=result.ratio,
        label=label,
        mechanism=_mech_model(result.mechanism),
    )


def _solve_closed(req: SolveRequest) -> SolveResponse:
    p, n = req.set, req.n
    if p.kind == "support":
        if n == "inf":
            return SolveResponse(
                metric="competitive_ratio",
                value=support_inf_ratio(p.vlo, p.vbar),
                label="unrestricted-menu limit (no finite mechanism)",
            )
        return _ratio_response(support_optimal(n, p.vlo, p.vbar), "optimal")
    if p.kind == "mean":
        if n == 1:
            return _ratio_response(mean_one_level(p.mu, p.vbar), "optimal")
        if n == 2:
            res = mean_two_level(p.mu, p.vbar)
            return _ratio_response(RatioResult(res.ratio, res.mechanism), "optimal")
        raise DomainError(
            "mean set has closed forms for n in {1, 2}; use method=grid for more levels"
        )
    if p.kind == "quantile":
        pairs = p.quantile_pairs()
        if len(pairs) != 1:
            raise DomainError("closed forms cover a single quantile constraint; use method=lp/grid")
        omega, xi = pairs[0]
        if n == 1:
            return _ratio_response(quantile_one_level(omega, xi, p.vbar), "optimal")
        if n == 2:
            return _ratio_response(quantile_two_level(omega, xi, p.vbar), "optimal")
        if n == "inf":
            mech = quantile_inf(omega, xi, p.vbar)
            return SolveResponse(
                metric="competitive_ratio",
                value=mech.r,
                label="optimal unrestricted menu",
                continuous_menu=ContinuousMenuModel(**mech.to_json_dict()),
            )
        raise DomainError(
            "quantile set has closed forms for n in {1, 2, inf}; use method=grid otherwise"
        )
    if p.kind == "meanvar":
        if n != 2:
            raise DomainError(
                "mean-variance information carries a two-level feasible "
                "approximation only (other menu sizes belong to prior work)"
            )
        mech, r = meanvar_two_level_approx(p.mu, p.sigma)
        return SolveResponse(
            metric="competitive_ratio",
            value=r,
            label="feasible approximation (certified lower bound)",
            mechanism=_mech_model(mech),
        )
    raise DomainError(f"no closed form for {p.kind} sets; use method=lp/grid")


@app.post("/solve", response_model=SolveResponse, responses={400: {"model": ErrorModel}})
def solve(req: SolveRequest) -> SolveResponse:
    if req.method == "closed":
        return _solve_closed(req)
    if req.set.kind == "meanvar":
        raise DomainError(
            "mean-variance sets are outside the finite reformulation; use method=closed"
        )
    ambiguity = build_ambiguity_set(req.set)
    if req.method == "lp":
        if not req.prices:
            raise DomainError("method=lp requires prices")
        return _ratio_response(
            solve_ratio_given_prices(ambiguity, req.prices),
            "optimal probabilities at the given prices",
        )
    # grid search
    if req.n == "inf":
        gridsize = req.gridsize or 400
        result = approx_inf_level(ambiguity, gridsize)
        return _ratio_response(
            result, f"lower bound from a uniform {gridsize}-price menu"
        )
    resolution = req.resolution or 0.01 * req.set.vbar
    result = best_n_level(ambiguity, req.n, resolution, workers=req.workers)
    return _ratio_response(result, f"grid search at resolution {resolution}")


@app.post("/verify", response_model=CertificateModel, responses={400: {"model": ErrorModel}})
def verify(req: VerifyRequest) -> CertificateModel:
    mech = canonicalize(req.mechanism.prices, req.mechanism.probs, req.mechanism.vbar)
    if req.set.kind == "meanvar":
        cert = worst_case_meanvar(
            mech, req.set.mu, req.set.sigma, vmax=req.vmax, gridsize=req.gridsize
        )
    else:
        if mech.vbar != req.set.vbar:
            raise DomainError(
                f"mechanism vbar {mech.vbar} does not match set vbar {req.set.vbar}"
            )
        ambiguity = build_ambiguity_set(req.set)
        cert = worst_case_ratio(mech, ambiguity, dense_fill=req.dense_fill)
    return CertificateModel(**cert.to_json_dict())


@app.post("/reproduce", response_model=ReproduceResponse, responses={400: {"model": ErrorModel}})
def reproduce(req: ReproduceRequest) -> ReproduceResponse:
    files = run_target(req.target, resolution=req.resolution, workers=req.workers)
    return ReproduceResponse(files=[FileModel(name=n, content=c) for n, c in files])


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}
