"""Worst-case oracle: nature's best response to a fixed mechanism.

Independent of the synthesis programs: given any payment function and
ambiguity set, enumerate candidate hindsight prices over the symbolic site
list (left limit and exact point of every price, breakpoint, and the upper
bound), solve the small tail-normalized program per candidate, and return
the minimizing certificate.  Certificates are re-verified from raw atoms
before being returned.

Candidate ties break toward the smallest price value, left limit first,
which is the iteration order of the sorted site list.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .ambiguity import AmbiguitySet
from .core import (
    DiscreteDistribution,
    GridPoint,
    Mechanism,
    Side,
    _payment_unbounded,
)
from .errors import DomainError, InconsistentAmbiguityError, NumericError
from .lp import EQ, GE, LE, LinearProgram, SolveStatus, solve_lp

PHI_FEAS_TOL = 1e-8
SELF_CHECK_TOL = 1e-7
MASS_KEEP_TOL = 1e-14
TRUNCATION_MASS_WARN = 1e-6


class PaymentFunction(Protocol):
    """What the oracle needs from a mechanism: t(.), its domain, its kinks."""

    vbar: float

    def payment_at(self, at: GridPoint) -> float: ...

    def grid_values(self) -> tuple[float, ...]: ...


@dataclass(frozen=True)
class WorstCaseCertificate:
    """Nature's distribution, hindsight price, and the value they achieve."""

    value: float
    hindsight_price: GridPoint
    distribution: DiscreteDistribution
    kind: str  # "ratio", "alpha_metric", or "meanvar_ratio"

    @property
    def ratio(self) -> float:
        return self.value

    def to_json_dict(self) -> dict:
        return {
            "ratio" if self.kind != "alpha_metric" else "value": self.value,
            "price": {
                "value": self.hindsight_price.value,
                "side": self.hindsight_price.side.value,
            },
            "atoms": [
                {"value": gp.value, "side": gp.side.value, "mass": m}
                for gp, m in self.distribution.atoms
            ],
        }


def _site_values(
    mechanism: PaymentFunction,
    breakpoints: Sequence[float],
    vbar: float,
    dense_fill: int | None,
    extra: Sequence[float] = (),
) -> list[float]:
    values = {float(v) for v in mechanism.grid_values()}
    values.update(float(b) for b in breakpoints)
    values.update(float(e) for e in extra)
    values.add(float(vbar))
    if dense_fill is not None:
        if dense_fill < 2:
            raise DomainError("dense_fill needs at least 2 points")
        values.update(np.linspace(0.0, vbar, dense_fill).tolist())
    return sorted(v for v in values if 0.0 <= v <= vbar)


def _sites_from_values(values: Sequence[float]) -> list[GridPoint]:
    sites: list[GridPoint] = [GridPoint(0.0, Side.EXACT)]
    for v in values:
        if v <= 0.0:
            continue
        sites.append(GridPoint(v, Side.LEFT_LIMIT))
        sites.append(GridPoint(v, Side.EXACT))
    return sites


def _distribution_from(
    sites: Sequence[GridPoint], masses: np.ndarray
) -> DiscreteDistribution:
    total = float(masses.sum())
    scale = max(1.0, total)
    pairs = [
        (site, float(m))
        for site, m in zip(sites, masses)
        if m > MASS_KEEP_TOL * scale
    ]
    return DiscreteDistribution.from_pairs(pairs).normalized()


def _verify_ratio_certificate(
    mechanism: PaymentFunction,
    ambiguity_set: AmbiguitySet,
    cert: WorstCaseCertificate,
) -> None:
    """Recompute the reported value from raw atoms; raise on mismatch."""
    dist = cert.distribution
    p = cert.hindsight_price
    revenue = math.fsum(
        mechanism.payment_at(gp) * m for gp, m in dist.atoms
    )
    tail = dist.tail_mass(p)
    if tail <= 0 or p.value <= 0:
        raise NumericError("certificate hindsight price has empty tail")
    recomputed = revenue / (p.value * tail)
    if abs(recomputed - cert.value) > SELF_CHECK_TOL * (1.0 + abs(cert.value)):
        raise NumericError(
            f"certificate self-check failed: reported {cert.value}, "
            f"recomputed {recomputed}"
        )
    for k in range(ambiguity_set.num_constraints):
        slack = math.fsum(
            ambiguity_set.phi_eval(k, gp) * m for gp, m in dist.atoms
        )
        if slack < -PHI_FEAS_TOL:
            raise NumericError(
                f"certificate distribution violates constraint {k} by {slack}"
            )


def worst_case_ratio(
    mechanism: PaymentFunction,
    ambiguity_set: AmbiguitySet,
    dense_fill: int | None = None,
) -> WorstCaseCertificate:
    """Worst-case competitive ratio of a mechanism over the ambiguity set.

    Per candidate hindsight price p, minimizes the expected payment under
    the tail-normalized measure (mass one at or above p) subject to the
    constraint functions; the ratio at p divides by the price.  The optional
    dense fill adds uniformly spaced exact atoms as a numerical cross-check.
    """
    if mechanism.vbar != ambiguity_set.vbar:
        raise DomainError(
            f"mechanism vbar {mechanism.vbar} != set vbar {ambiguity_set.vbar}"
        )
    sites = _sites_from_values(
        _site_values(mechanism, ambiguity_set.breakpoints(), ambiguity_set.vbar, dense_fill)
    )
    N = len(sites)
    K = ambiguity_set.num_constraints
    t = np.array([mechanism.payment_at(gp) for gp in sites])
    phi = np.array(
        [[ambiguity_set.phi_eval(k, gp) for gp in sites] for k in range(K)]
    )

    best: tuple[float, int, np.ndarray] | None = None
    feasible_seen = False
    for c in range(N):
        if sites[c].value <= 0.0:
            continue
        A = np.empty((K + 1, N))
        A[0, :] = 0.0
        A[0, c:] = 1.0
        A[1:, :] = phi
        rhs = np.zeros(K + 1)
        rhs[0] = 1.0
        lp = LinearProgram(-t, A, [EQ] + [GE] * K, rhs)
        sol = solve_lp(lp)
        if sol.status is not SolveStatus.OPTIMAL:
            continue
        feasible_seen = True
        ratio = -sol.objective / sites[c].value
        if best is None or ratio < best[0]:
            best = (ratio, c, sol.x)
    if not feasible_seen or best is None:
        raise InconsistentAmbiguityError(
            "no candidate hindsight price admits a feasible distribution"
        )
    ratio, c, h = best
    cert = WorstCaseCertificate(
        value=float(ratio),
        hindsight_price=sites[c],
        distribution=_distribution_from(sites, h),
        kind="ratio",
    )
    _verify_ratio_certificate(mechanism, ambiguity_set, cert)
    return cert


def worst_case_alpha_metric(
    mechanism: Mechanism, mu: float, vbar: float, alpha: float
) -> WorstCaseCertificate:
    """Worst case of revenue minus alpha times hindsight revenue (exact mean)."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    if not 0 < mu <= vbar:
        raise DomainError(f"need 0 < mu <= vbar, got mu={mu}")
    if mechanism.vbar != vbar:
        raise DomainError(f"mechanism vbar {mechanism.vbar} != {vbar}")
    sites = _sites_from_values(_site_values(mechanism, (), vbar, None))
    N = len(sites)
    t = np.array([mechanism.payment_at(gp) for gp in sites])
    vals = np.array([gp.value for gp in sites])

    best: tuple[float, int, np.ndarray] | None = None
    for c in range(N):
        tail = np.zeros(N)
        tail[c:] = 1.0
        obj = t - alpha * sites[c].value * tail
        A = np.vstack([np.ones(N), vals - mu])
        lp = LinearProgram(-obj, A, [EQ, EQ], np.array([1.0, 0.0]))
        sol = solve_lp(lp)
        if sol.status is not SolveStatus.OPTIMAL:
            continue
        value = -sol.objective
        if best is None or value < best[0]:
            best = (value, c, sol.x)
    if best is None:
        raise InconsistentAmbiguityError("mean constraint admits no distribution")
    value, c, f = best
    dist = _distribution_from(sites, f)
    cert = WorstCaseCertificate(
        value=float(value),
        hindsight_price=sites[c],
        distribution=dist,
        kind="alpha_metric",
    )
    # Self-check: recompute revenue - alpha * p * tail from raw atoms.
    revenue = math.fsum(mechanism.payment_at(gp) * m for gp, m in dist.atoms)
    tail = dist.tail_mass(sites[c])
    recomputed = revenue - alpha * sites[c].value * tail
    if abs(recomputed - value) > SELF_CHECK_TOL * (1.0 + abs(value)):
        raise NumericError(
            f"alpha-metric certificate self-check failed: {value} vs {recomputed}"
        )
    mean_slack = abs(dist.mean() - mu)
    if mean_slack > PHI_FEAS_TOL:
        raise NumericError(f"certificate mean misses mu by {mean_slack}")
    return cert


def worst_case_meanvar(
    mechanism: Mechanism,
    mu: float,
    sigma: float,
    vmax: float | None = None,
    gridsize: int = 4000,
) -> WorstCaseCertificate:
    """Truncated-grid adversary for mean mu, variance at most sigma^2.

    The valuation domain is unbounded, so the adversary is restricted to a
    dense exact grid on [0, vmax] plus left limits at the mechanism's own
    prices; the returned ratio upper-bounds the true infimum and decreases
    under grid refinement.  sigma = 0 short-circuits to the point mass at mu.
    """
    if mu <= 0 or sigma < 0:
        raise DomainError(f"need mu > 0 and sigma >= 0, got {mu}, {sigma}")
    prices = np.asarray(mechanism.prices)
    probs = np.asarray(mechanism.probs)

    def t_at(gp: GridPoint) -> float:
        return _payment_unbounded(prices, probs, gp)

    if sigma == 0.0:
        atom = GridPoint(mu, Side.EXACT)
        ratio = t_at(atom) / mu
        return WorstCaseCertificate(
            value=float(ratio),
            hindsight_price=atom,
            distribution=DiscreteDistribution.from_pairs([(atom, 1.0)]),
            kind="meanvar_ratio",
        )
    if vmax is None:
        vmax = mu + 50.0 * sigma
    if vmax <= mu:
        raise DomainError(f"need vmax > mu, got vmax={vmax}")
    if gridsize < 1000:
        raise DomainError(f"need gridsize >= 1000, got {gridsize}")

    grid = np.linspace(0.0, vmax, gridsize)
    sites: list[GridPoint] = [GridPoint(v, Side.EXACT) for v in grid]
    for v in mechanism.prices:
        if v > 0:
            sites.append(GridPoint(v, Side.LEFT_LIMIT))
        sites.append(GridPoint(v, Side.EXACT))
    sites.append(GridPoint(mu, Side.EXACT))
    sites = sorted(set(sites), key=lambda gp: gp.sort_key())
    N = len(sites)
    t = np.array([t_at(gp) for gp in sites])
    vals = np.array([gp.value for gp in sites])
    m2 = vals * vals - mu * mu - sigma * sigma

    best: tuple[float, int, np.ndarray] | None = None
    for c in range(N):
        if sites[c].value <= 0.0:
            continue
        A = np.empty((3, N))
        A[0, :] = 0.0
        A[0, c:] = 1.0
        A[1, :] = vals - mu
        A[2, :] = m2
        lp = LinearProgram(-t, A, [EQ, EQ, LE], np.array([1.0, 0.0, 0.0]))
        sol = solve_lp(lp)
        if sol.status is not SolveStatus.OPTIMAL:
            continue
        ratio = -sol.objective / sites[c].value
        if best is None or ratio < best[0]:
            best = (ratio, c, sol.x)
    if best is None:
        raise InconsistentAmbiguityError(
            "truncated mean-variance adversary found no feasible distribution"
        )
    ratio, c, h = best
    dist = _distribution_from(sites, h)
    top_cell = vmax - (vmax / (gridsize - 1))
    top_mass = math.fsum(m for gp, m in dist.atoms if gp.value >= top_cell)
    if top_mass > TRUNCATION_MASS_WARN:
        warnings.warn(
            f"worst-case distribution places {top_mass:.2e} mass in the top "
            f"grid cell; increase vmax to reduce truncation bias",
            RuntimeWarning,
            stacklevel=2,
        )
    cert = WorstCaseCertificate(
        value=float(ratio),
        hindsight_price=sites[c],
        distribution=dist,
        kind="meanvar_ratio",
    )
    _verify_meanvar_certificate(cert, t_at, mu, sigma)
    return cert


def _verify_meanvar_certificate(
    cert: WorstCaseCertificate, t_at, mu: float, sigma: float
) -> None:
    dist = cert.distribution
    p = cert.hindsight_price
    revenue = math.fsum(t_at(gp) * m for gp, m in dist.atoms)
    tail = dist.tail_mass(p)
    recomputed = revenue / (p.value * tail)
    if abs(recomputed - cert.value) > SELF_CHECK_TOL * (1.0 + abs(cert.value)):
        raise NumericError(
            f"mean-variance certificate self-check failed: {cert.value} vs {recomputed}"
        )
    if abs(dist.mean() - mu) > PHI_FEAS_TOL:
        raise NumericError("certificate mean drifted from mu")
    second = math.fsum(gp.value ** 2 * m for gp, m in dist.atoms)
    if second - mu * mu - sigma * sigma > PHI_FEAS_TOL * (1.0 + sigma * sigma):
        raise NumericError("certificate variance exceeds sigma^2")
