"""Empirical performance under fully specified valuation distributions.

Expected revenue uses the tail-sum identity for finite menus (the payment
is a step function, so the exact sum is both faster and tighter than
quadrature) and integration by parts plus adaptive Simpson for the
continuous-menu payment.  Everything is computed by quadrature or exact
sums; there is no sampling anywhere.

Conventions fixed here (reported in output metadata by the callers):
an indifferent buyer purchases, so tails are closed at posted prices; the
quantile of a distribution is the smallest v whose strict-left tail drops
to the requested probability, clamped to vbar when the tail never drops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .closed_form import QuantileInfMechanism
from .core import DiscreteDistribution, GridPoint, Mechanism, Side
from .errors import DomainError, NumericError

BETA_EPS = 1e-15
BETA_MAX_ITER = 500
SIMPSON_TOL = 1e-8
QUANTILE_TOL = 1e-10
HINDSIGHT_COARSE_GRID = 10_000
GOLDEN_TOL = 1e-10


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETA_EPS:
            return h
    raise NumericError(f"incomplete beta continued fraction stalled at a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) to absolute accuracy ~1e-14."""
    if a <= 0 or b <= 0:
        raise DomainError(f"beta parameters must be positive, got {a}, {b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class BetaDistribution:
    """Beta(alpha, beta) scaled onto [0, vbar]."""

    alpha: float
    beta: float
    vbar: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise DomainError("beta shape parameters must be positive")
        if self.vbar <= 0:
            raise DomainError("vbar must be positive")

    def cdf(self, v: float) -> float:
        if v < 0 or v > self.vbar:
            raise DomainError(f"{v} outside [0, {self.vbar}]")
        return regularized_incomplete_beta(self.alpha, self.beta, v / self.vbar)

    def pdf(self, v: float) -> float:
        x = v / self.vbar
        if x <= 0.0 or x >= 1.0:
            return 0.0
        ln = (
            math.lgamma(self.alpha + self.beta)
            - math.lgamma(self.alpha)
            - math.lgamma(self.beta)
            + (self.alpha - 1.0) * math.log(x)
            + (self.beta - 1.0) * math.log1p(-x)
        )
        return math.exp(ln) / self.vbar

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta) * self.vbar


ParametricDistribution = Union[BetaDistribution, DiscreteDistribution]


def cdf(dist: ParametricDistribution, v: float) -> float:
    """P(X <= v); for discrete supports this is the left-closed sum."""
    if isinstance(dist, BetaDistribution):
        return dist.cdf(v)
    probe = GridPoint(v, Side.EXACT)
    return math.fsum(m for gp, m in dist.atoms if gp <= probe)


def _tail_at_price(dist: ParametricDistribution, price: float, vbar: float) -> float:
    """P(buyer accepts price) with purchase on indifference."""
    if isinstance(dist, BetaDistribution):
        if price <= 0.0:
            return 1.0
        return 1.0 - dist.cdf(min(price, dist.vbar))
    threshold = GridPoint(price, Side.EXACT)
    return dist.tail_mass(threshold)


def _adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float, depth: int = 48
) -> float:
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fb, fm, whole, tol, depth)


def _simpson_rec(f, a, b, fa, fb, fm, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_rec(f, a, m, fa, fm, flm, left, half, depth - 1) + _simpson_rec(
        f, m, b, fm, fb, frm, right, half, depth - 1
    )


def revenue_under(
    mechanism: Union[Mechanism, QuantileInfMechanism],
    dist: ParametricDistribution,
) -> float:
    """Expected revenue of a mechanism when the valuation follows ``dist``."""
    vbar = mechanism.vbar
    dist_vbar = dist.vbar if isinstance(dist, BetaDistribution) else None
    if dist_vbar is not None and dist_vbar != vbar:
        raise DomainError(f"mechanism vbar {vbar} != distribution vbar {dist_vbar}")
    if isinstance(mechanism, Mechanism):
        return float(
            math.fsum(
                v * x * _tail_at_price(dist, v, vbar)
                for v, x in zip(mechanism.prices, mechanism.probs)
            )
        )
    return _revenue_continuous(mechanism, dist)


def _revenue_continuous(
    mech: QuantileInfMechanism, dist: ParametricDistribution
) -> float:
    if isinstance(dist, DiscreteDistribution):
        return float(math.fsum(mech.payment_at(gp) * m for gp, m in dist.atoms))
    if mech.xi == 1.0:
        return mech.omega * (1.0 - dist.cdf(mech.omega))
    # E[t(X)] = t(vbar) - int F dt, where dt has density r/(1-xi) on
    # [xi*phat, omega), density r on [phat, vbar], and a jump at omega.
    r, xi, omega, phat, vbar = mech.r, mech.xi, mech.omega, mech.phat, mech.vbar
    lo = xi * phat
    jump = r * (phat - omega) / (1.0 - xi)
    seg1 = (
        _adaptive_simpson(dist.cdf, lo, omega, SIMPSON_TOL) * r / (1.0 - xi)
        if omega > lo
        else 0.0
    )
    seg2 = (
        _adaptive_simpson(dist.cdf, phat, vbar, SIMPSON_TOL) * r
        if vbar > phat
        else 0.0
    )
    return r * vbar - seg1 - seg2 - jump * dist.cdf(omega)


def _revenue_by_density_quadrature(
    mechanism: Mechanism, dist: BetaDistribution
) -> float:
    """Independent slow path: direct quadrature of t against the density.

    Only sound when the density is bounded (alpha, beta >= 1); used by tests
    to cross-check the tail-sum identity.
    """
    points = [0.0] + [p for p in mechanism.prices if 0.0 < p < dist.vbar] + [dist.vbar]
    total = 0.0
    for a, b in zip(points, points[1:]):
        t_mid = mechanism.payment_at(GridPoint(0.5 * (a + b), Side.EXACT))
        total += t_mid * _adaptive_simpson(dist.pdf, a, b, SIMPSON_TOL)
    return total


def _golden_max(g: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - inv_phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv_phi * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def optimal_posted_revenue(dist: ParametricDistribution) -> tuple[float, float]:
    """Hindsight-optimal posted price and its revenue.

    Discrete supports are maximized exactly over atom sites (an atom at a
    left limit is captured by prices approaching it from below, and the
    supremum value is reported at that price).  Continuous distributions use
    a coarse grid followed by golden-section refinement.
    """
    if isinstance(dist, DiscreteDistribution):
        best_rev, best_price = 0.0, 0.0
        for gp, _ in dist.atoms:
            if gp.value <= 0.0:
                continue
            rev = gp.value * dist.tail_mass(gp)
            if rev > best_rev + 1e-15 or (
                abs(rev - best_rev) <= 1e-15 and gp.value < best_price
            ):
                best_rev, best_price = rev, gp.value
        return best_price, best_rev
    g = lambda p: p * (1.0 - dist.cdf(p))
    vbar = dist.vbar
    step = vbar / HINDSIGHT_COARSE_GRID
    best_i, best_val = 0, 0.0
    for i in range(1, HINDSIGHT_COARSE_GRID + 1):
        val = g(i * step)
        if val > best_val:
            best_i, best_val = i, val
    lo = max(0.0, (best_i - 1) * step)
    hi = min(vbar, (best_i + 1) * step)
    price = _golden_max(g, lo, hi, GOLDEN_TOL * max(1.0, vbar))
    return price, g(price)


def performance_ratio(
    mechanism: Union[Mechanism, QuantileInfMechanism],
    dist: ParametricDistribution,
) -> float:
    """Revenue under the true distribution relative to the hindsight optimum."""
    _, opt = optimal_posted_revenue(dist)
    if opt <= 0.0:
        raise DomainError("hindsight revenue is zero; ratio undefined")
    return revenue_under(mechanism, dist) / opt


def quantile_of(dist: ParametricDistribution, tail_prob: float) -> float:
    """Smallest v with P(X >= v) <= tail_prob, clamped to vbar.

    Used to extract quantile constraints (omega, xi=tail_prob) from a known
    distribution: P(X >= result) >= tail_prob always holds.
    """
    if not 0.0 < tail_prob < 1.0:
        raise DomainError(f"tail probability must be in (0, 1), got {tail_prob}")
    vbar = dist.vbar if isinstance(dist, BetaDistribution) else max(
        (gp.value for gp, _ in dist.atoms), default=0.0
    )
    if vbar <= 0.0:
        return 0.0

    def tail_ok(v: float) -> bool:
        if isinstance(dist, BetaDistribution):
            return 1.0 - dist.cdf(v) <= tail_prob
        return dist.tail_mass(GridPoint(v, Side.EXACT)) <= tail_prob

    if not tail_ok(vbar):
        return vbar
    lo, hi = 0.0, vbar
    if tail_ok(lo):
        return lo
    tol = QUANTILE_TOL * max(1.0, vbar)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tail_ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
