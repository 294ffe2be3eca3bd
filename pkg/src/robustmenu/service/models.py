"""Request/response schemas for the HTTP surface."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

SetKind = Literal["support", "mean", "quantile", "multisegment", "segmentedmean", "meanvar"]


class AmbiguityParams(BaseModel):
    kind: SetKind
    vbar: float = Field(gt=0)
    vlo: Optional[float] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None
    omega: Optional[float] = None
    xi: Optional[float] = None
    quantiles: Optional[list[tuple[float, float]]] = None
    segments: Optional[list[dict]] = None

    @model_validator(mode="after")
    def _check_kind_params(self) -> "AmbiguityParams":
        needs = {
            "support": ("vlo",),
            "mean": ("mu",),
            "meanvar": ("mu", "sigma"),
            "multisegment": ("segments",),
            "segmentedmean": ("segments",),
        }
        for field in needs.get(self.kind, ()):
            if getattr(self, field) is None:
                raise ValueError(f"{self.kind} set requires {field}")
        if self.kind == "quantile" and self.quantiles is None and (
            self.omega is None or self.xi is None
        ):
            raise ValueError("quantile set requires omega and xi (or a quantiles list)")
        return self

    def quantile_pairs(self) -> list[tuple[float, float]]:
        if self.quantiles is not None:
            return [(float(o), float(x)) for o, x in self.quantiles]
        return [(float(self.omega), float(self.xi))]


class MechanismModel(BaseModel):
    prices: list[float]
    probs: list[float]
    vbar: float


class ContinuousMenuModel(BaseModel):
    """The quantile-set unrestricted-menu optimum."""

    omega: float
    xi: float
    vbar: float
    ratio: float
    phat: float
    point_mass: dict
    density_segments: list[dict]


class SolveRequest(BaseModel):
    set: AmbiguityParams
    n: Union[int, Literal["inf"]] = 1
    method: Literal["closed", "lp", "grid"] = "closed"
    prices: Optional[list[float]] = None
    resolution: Optional[float] = Field(default=None, gt=0)
    gridsize: Optional[int] = Field(default=None, ge=50)
    workers: Optional[int] = Field(default=None, ge=1)


class SolveResponse(BaseModel):
    metric: str
    value: float
    label: str
    mechanism: Optional[MechanismModel] = None
    continuous_menu: Optional[ContinuousMenuModel] = None


class VerifyRequest(BaseModel):
    set: AmbiguityParams
    mechanism: MechanismModel
    dense_fill: Optional[int] = Field(default=None, ge=2)
    vmax: Optional[float] = None
    gridsize: int = 4000


class PricePointModel(BaseModel):
    value: float
    side: Literal["exact", "left_limit"]


class AtomModel(PricePointModel):
    mass: float


class CertificateModel(BaseModel):
    ratio: float
    price: PricePointModel
    atoms: list[AtomModel]


class ReproduceRequest(BaseModel):
    target: str
    resolution: Optional[float] = Field(default=None, gt=0)
    workers: Optional[int] = Field(default=None, ge=1)


class FileModel(BaseModel):
    name: str
    content: str


class ReproduceResponse(BaseModel):
    files: list[FileModel]


class ErrorModel(BaseModel):
    error: str
    detail: str
