"""Analytic mechanisms and robust values, with bisection for implicit roots.

Degenerate inputs (mu = vbar, sigma = 0, xi = 1, vlo = vbar) short-circuit
to the point-mass answers instead of evaluating 0/0 expressions; each
short-circuit is noted on the operation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from .core import GridPoint, Mechanism, RatioResult, Side, canonicalize
from .errors import DomainError, NumericError

ROOT_REL_TOL = 1e-13
ROOT_MAX_ITER = 200

MEAN_TWO_LEVEL_SPLIT = 0.49  # stated branch constant; true crossover differs in ~1e-3
MEANVAR_BRANCH_SIGMA = math.sqrt(math.sqrt(5.0) - 2.0)  # sigma/mu where the root equation switches


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rel_tol: float = ROOT_REL_TOL,
    max_iter: int = ROOT_MAX_ITER,
) -> float:
    """Bisection on a bracketing interval; relative tolerance on the root."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NumericError(f"root not bracketed on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) <= rel_tol * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Support information.
# ---------------------------------------------------------------------------


def support_levels_ratio(vlo: float, vhi: float, prices) -> RatioResult:
    """Ratio and probabilities for fixed levels under support information.

    Requires the lowest level at vlo; otherwise the ratio degenerates to 0
    (pricing strictly above the lowest possible valuation concedes buyers
    just below the cheapest price) and all mass is reported on the lowest
    level.
    """
    if not 0 < vlo <= vhi:
        raise DomainError(f"need 0 < vlo <= vhi, got {vlo}, {vhi}")
    v = [float(p) for p in prices]
    if not v or any(b < a for a, b in zip(v, v[1:])):
        raise DomainError("prices must be sorted and nonempty")
    if v[0] < vlo or v[-1] > vhi:
        raise DomainError(f"prices must lie in [{vlo}, {vhi}]")
    n = len(v)
    if v[0] != vlo:
        mech = canonicalize(v, [1.0] + [0.0] * (n - 1), vhi)
        return RatioResult(0.0, mech, None)
    ext = v + [vhi]
    denom = ext[1] / ext[0] + math.fsum(
        (ext[i + 1] - ext[i]) / ext[i] for i in range(1, n)
    )
    r = 1.0 / denom
    x = [r * ext[1] / vlo] + [r * (ext[i + 1] - ext[i]) / ext[i] for i in range(1, n)]
    return RatioResult(r, canonicalize(v, x, vhi), None)


def support_optimal(n: int, vlo: float, vhi: float) -> RatioResult:
    """Optimal n levels: a geometric ladder with the stated probabilities."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if not 0 < vlo <= vhi:
        raise DomainError(f"need 0 < vlo <= vhi, got {vlo}, {vhi}")
    rho = (vhi / vlo) ** (1.0 / n)
    r = 1.0 / (n * rho - (n - 1))
    prices = [vlo ** ((n + 1 - i) / n) * vhi ** ((i - 1) / n) for i in range(1, n + 1)]
    probs = [rho * r] + [(rho - 1.0) * r] * (n - 1)
    return RatioResult(r, canonicalize(prices, probs, vhi), None)


def support_inf_ratio(vlo: float, vhi: float) -> float:
    """Limit of the n-level ratio as levels proliferate."""
    if not 0 < vlo <= vhi:
        raise DomainError(f"need 0 < vlo <= vhi, got {vlo}, {vhi}")
    return 1.0 / (math.log(vhi / vlo) + 1.0)


# ---------------------------------------------------------------------------
# Mean information.
# ---------------------------------------------------------------------------


def _check_mean(mu: float, vbar: float) -> None:
    if not 0 < mu <= vbar:
        raise DomainError(f"need 0 < mu <= vbar, got mu={mu}, vbar={vbar}")


def mean_one_level(mu: float, vbar: float) -> RatioResult:
    """Optimal posted price under a known mean and upper bound."""
    _check_mean(mu, vbar)
    v1 = vbar - math.sqrt(vbar * vbar - mu * vbar)
    r = 1.0 - math.sqrt(1.0 - mu / vbar)
    return RatioResult(r, canonicalize([v1], [1.0], vbar), None)


@dataclass(frozen=True)
class MeanTwoLevel:
    """Two-level mean-set optimum plus diagnostics for the branch split."""

    ratio: float
    mechanism: Mechanism
    v1: float
    v2: float
    low_mean_branch: bool  # mu/vbar <= MEAN_TWO_LEVEL_SPLIT
    v2_exceeds_mean: bool


def _mean_two_level_low(mu: float, vbar: float) -> tuple[float, float, float, float]:
    v1 = vbar - math.sqrt(vbar * vbar - mu * vbar)
    v2 = math.sqrt(v1 * vbar)
    x1 = 1.0 / (2.0 - math.sqrt(v1 / vbar))
    r = 1.0 / (2.0 * math.sqrt(vbar / v1) - 1.0)
    return v1, v2, x1, r


def _mean_two_level_high(mu: float, vbar: float) -> tuple[float, float, float, float]:
    v1 = vbar - math.sqrt(vbar * vbar - mu * vbar)
    v2 = (v1 + math.sqrt(v1 * v1 + 8.0 * v1 * vbar)) / 4.0
    core = 2.0 * v2 * vbar - v2 * v2 - mu * vbar
    denom = (v2 - v1) * core + v1 * vbar * (vbar - mu)
    x1 = v2 * core / denom
    r = v1 * v2 * (vbar - mu) / denom
    return v1, v2, x1, r


def mean_two_level(mu: float, vbar: float) -> MeanTwoLevel:
    """Optimal two levels under a known mean and upper bound.

    The branch constant 0.49 is applied as stated; near the split a
    diagnostic warning reports the numerically-solved crossover of the two
    ratio expressions, which sits close to but not exactly at 0.49.

    mu = vbar short-circuits to the point mass at vbar with ratio 1.
    """
    _check_mean(mu, vbar)
    if mu == vbar:
        mech = canonicalize([vbar], [1.0], vbar)
        return MeanTwoLevel(1.0, mech, vbar, vbar, False, False)
    ratio_of_mean = mu / vbar
    if abs(ratio_of_mean - MEAN_TWO_LEVEL_SPLIT) < 0.005:
        crossover = bisect_root(
            lambda m: _mean_two_level_low(m, 1.0)[3] - _mean_two_level_high(m, 1.0)[3],
            0.40,
            0.60,
        )
        warnings.warn(
            f"mu/vbar={ratio_of_mean:.6f} is near the branch constant "
            f"{MEAN_TWO_LEVEL_SPLIT}; the exact crossover of the two ratio "
            f"expressions is {crossover:.6f}",
            RuntimeWarning,
            stacklevel=2,
        )
    low = ratio_of_mean <= MEAN_TWO_LEVEL_SPLIT
    v1, v2, x1, r = (
        _mean_two_level_low(mu, vbar) if low else _mean_two_level_high(mu, vbar)
    )
    mech = canonicalize([v1, v2], [x1, 1.0 - x1], vbar)
    return MeanTwoLevel(r, mech, v1, v2, low, v2 >= mu)


# ---------------------------------------------------------------------------
# Mean-variance information (feasible two-level approximation).
# ---------------------------------------------------------------------------


def meanvar_two_level_approx(mu: float, sigma: float) -> tuple[Mechanism, float]:
    """Feasible two-level mechanism under mean mu and variance at most sigma^2.

    The lower price solves a cubic picked by the size of sigma/mu; the upper
    price, probabilities, and certified ratio follow in closed form.  sigma=0
    short-circuits to the deterministic price mu with ratio 1.  The returned
    mechanism's vbar is its own top price; the valuation domain of this
    family is unbounded.
    """
    if mu <= 0:
        raise DomainError(f"need mu > 0, got {mu}")
    if sigma < 0:
        raise DomainError(f"need sigma >= 0, got {sigma}")
    if sigma == 0.0:
        return canonicalize([mu], [1.0], mu), 1.0
    s2 = sigma * sigma
    if sigma <= MEANVAR_BRANCH_SIGMA * mu:
        f = lambda v: (mu - v) ** 3 - (2.0 * v - mu) * s2
        v1 = bisect_root(f, mu / 2.0, mu)
    else:
        coef = 2.0 / (9.0 + math.sqrt(5.0))
        f = lambda v: (mu - v) ** 3 - coef * (7.0 * v - 3.0 * mu) * s2
        v1 = bisect_root(f, 3.0 * mu / 7.0, mu)
    inner = mu + s2 / (mu - v1)
    v2 = math.sqrt(v1 * inner)
    root_a = math.sqrt(s2 + mu * (mu - v1))
    x1 = root_a / (2.0 * root_a - math.sqrt(v1 * (mu - v1)))
    r = 1.0 / (2.0 * math.sqrt(inner / v1) - 1.0)
    mech = canonicalize([v1, v2], [x1, 1.0 - x1], v2)
    return mech, r


def meanvar_ratio_lower_bound(mu: float, sigma: float) -> float:
    """Closed-form floor for the two-level mean-variance ratio."""
    if mu <= 0:
        raise DomainError(f"need mu > 0, got {mu}")
    cv = sigma / mu
    return 1.0 / (7.0 * math.sqrt(3.0) / 3.0 * math.sqrt(4.0 / 7.0 + cv * cv))


# ---------------------------------------------------------------------------
# Quantile information.
# ---------------------------------------------------------------------------


def _check_quantile(omega: float, xi: float, vbar: float) -> None:
    if vbar <= 0:
        raise DomainError(f"need vbar > 0, got {vbar}")
    if not 0 <= omega <= vbar:
        raise DomainError(f"omega {omega} outside [0, {vbar}]")
    if not 0 < xi <= 1:
        raise DomainError(f"xi {xi} outside (0, 1]")


def quantile_one_level(omega: float, xi: float, vbar: float) -> RatioResult:
    """Optimal posted price given a conversion rate xi at price omega."""
    _check_quantile(omega, xi, vbar)
    v1 = min(omega, xi * vbar)
    r = min(xi, omega / vbar)
    if v1 == 0.0:
        return RatioResult(0.0, canonicalize([0.0], [1.0], vbar), None)
    return RatioResult(r, canonicalize([v1], [1.0], vbar), None)


def quantile_two_level(omega: float, xi: float, vbar: float) -> RatioResult:
    """Optimal two levels given a conversion rate xi at price omega.

    When the two branch prices coincide (xi = omega/vbar) the mechanism
    collapses to the single posted price and the one-level ratio is returned
    exactly, so no improvement appears at the knot.
    """
    _check_quantile(omega, xi, vbar)
    if omega == 0.0:
        return RatioResult(0.0, canonicalize([0.0], [1.0], vbar), None)
    if xi * vbar <= omega:
        v1 = xi * vbar
        v2 = min(omega, math.sqrt(xi) * vbar)
        if v2 <= v1:
            return quantile_one_level(omega, xi, vbar)
        x1 = (v2 - xi * vbar) / (xi * vbar * vbar / v2 - 2.0 * xi * vbar + v2)
        r = (1.0 - xi) / (vbar / v2 + v2 / (xi * vbar) - 2.0)
    else:
        v1 = omega
        v2 = max(omega / xi, math.sqrt(omega * vbar))
        x1 = v2 * v2 / (v2 * v2 - omega * v2 + omega * vbar)
        r = 1.0 / (v2 / omega + vbar / v2 - 1.0)
    return RatioResult(r, canonicalize([v1, v2], [x1, 1.0 - x1], vbar), None)


@dataclass(frozen=True)
class QuantileInfMechanism:
    """Price density with a point mass: the unrestricted-menu optimum.

    Density r/((1-xi) v) on [xi*phat, omega), a point mass at omega, and
    density r/v on [phat, vbar], where phat = min((2-xi)*omega, vbar).  The
    degenerate xi = 1 collapses to the deterministic price omega with ratio
    omega/vbar.
    """

    omega: float
    xi: float
    vbar: float
    r: float
    phat: float

    @property
    def point_mass(self) -> float:
        """Probability of posting exactly omega."""
        if self.xi == 1.0:
            return 1.0
        return self.r * (self.phat - self.omega) / (self.omega * (1.0 - self.xi))

    def density_at(self, v: float) -> float:
        """Price density away from the atom at omega."""
        if self.xi == 1.0:
            return 0.0
        if self.xi * self.phat <= v < self.omega:
            return self.r / ((1.0 - self.xi) * v)
        if self.phat <= v <= self.vbar:
            return self.r / v
        return 0.0

    def payment_value(self, v: float, left: bool = False) -> float:
        if self.xi == 1.0:
            if v > self.omega or (v == self.omega and not left):
                return self.omega
            return 0.0
        lo = self.xi * self.phat
        if v < lo or (v == lo and left):
            return 0.0
        if v < self.omega or (v == self.omega and left):
            return self.r * (v - lo) / (1.0 - self.xi)
        if v < self.phat:
            return self.r * self.phat
        return self.r * v

    def payment_at(self, at: GridPoint) -> float:
        if at.value < 0 or at.value > self.vbar:
            raise DomainError(f"payment queried at {at.value}, outside [0, {self.vbar}]")
        return self.payment_value(at.value, left=at.side is Side.LEFT_LIMIT)

    def allocation_at(self, v: float) -> float:
        """Cumulative price distribution q(v)."""
        if self.xi == 1.0:
            return 1.0 if v >= self.omega else 0.0
        lo = self.xi * self.phat
        if v < lo:
            return 0.0
        if v < self.omega:
            return self.r / (1.0 - self.xi) * math.log(v / lo)
        if v < self.phat:
            return 1.0 - self.r * math.log(self.vbar / self.phat)
        return 1.0 - self.r * math.log(self.vbar / max(v, self.phat))

    def total_price_mass(self) -> float:
        """Density integrals plus the atom; equals 1 for a valid mechanism."""
        if self.xi == 1.0:
            return 1.0
        lo = self.xi * self.phat
        seg1 = self.r / (1.0 - self.xi) * math.log(self.omega / lo)
        seg2 = self.r * math.log(self.vbar / self.phat)
        return seg1 + seg2 + self.point_mass

    def grid_values(self) -> tuple[float, ...]:
        if self.xi == 1.0:
            return (self.omega,)
        return (self.xi * self.phat, self.omega, self.phat)

    def to_json_dict(self) -> dict:
        return {
            "omega": self.omega,
            "xi": self.xi,
            "vbar": self.vbar,
            "ratio": self.r,
            "phat": self.phat,
            "point_mass": {"at": self.omega, "mass": self.point_mass},
            "density_segments": [
                {
                    "lo": self.xi * self.phat,
                    "hi": self.omega,
                    "form": "r/((1-xi)*v)",
                },
                {"lo": self.phat, "hi": self.vbar, "form": "r/v"},
            ]
            if self.xi < 1.0
            else [],
        }


def quantile_inf(omega: float, xi: float, vbar: float) -> QuantileInfMechanism:
    """Unrestricted-menu optimum under a single quantile constraint.

    xi = 1 short-circuits to the deterministic price omega (ratio
    omega/vbar); omega = 0 is rejected since the density involves log(omega).
    """
    _check_quantile(omega, xi, vbar)
    if omega == 0.0:
        raise DomainError("omega = 0 admits no positive-revenue density")
    if xi == 1.0:
        return QuantileInfMechanism(omega, 1.0, vbar, omega / vbar, omega)
    phat = min((2.0 - xi) * omega, vbar)
    inv_r = (
        (math.log(omega) - math.log(xi * phat)) / (1.0 - xi)
        + (phat - omega) / ((1.0 - xi) * omega)
        + math.log(vbar)
        - math.log(phat)
    )
    return QuantileInfMechanism(omega, xi, vbar, 1.0 / inv_r, phat)


# ---------------------------------------------------------------------------
# Alternative metrics on the mean set.
# ---------------------------------------------------------------------------


def maximin_revenue_optimal(mu: float, vbar: float, n: int) -> tuple[Mechanism, float]:
    """Optimal n levels for worst-case revenue: a geometric ladder above the
    root of mu/v + n (v/vbar)^(1/n) = n + 1, uniform probabilities.

    mu = vbar short-circuits to the point mass at vbar with revenue vbar.
    """
    _check_mean(mu, vbar)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if mu == vbar:
        return canonicalize([vbar], [1.0], vbar), vbar
    g = lambda v: mu / v + n * (v / vbar) ** (1.0 / n) - (n + 1.0)
    v1 = bisect_root(g, mu * 1e-12, mu)
    prices = [v1 * (vbar / v1) ** ((j - 1) / n) for j in range(1, n + 1)]
    revenue = (mu - v1) / n / ((vbar / v1) ** (1.0 / n) - 1.0)
    return canonicalize(prices, [1.0 / n] * n, vbar), revenue


@dataclass(frozen=True)
class LinearPaymentMechanism:
    """Limit of the maximin-revenue ladders: pay (v - v1)/log(vbar/v1)."""

    v1: float
    vbar: float
    revenue: float

    def payment(self, v: float) -> float:
        if v <= self.v1:
            return 0.0
        return (v - self.v1) / math.log(self.vbar / self.v1)

    def allocation(self, v: float) -> float:
        if v <= self.v1:
            return 0.0
        return math.log(v / self.v1) / math.log(self.vbar / self.v1)


def maximin_revenue_inf(mu: float, vbar: float) -> LinearPaymentMechanism:
    """Unrestricted-menu maximin revenue: linear payment above the root of
    mu = v (1 + log vbar - log v).

    mu = vbar degenerates to full extraction at vbar.
    """
    _check_mean(mu, vbar)
    if mu == vbar:
        return LinearPaymentMechanism(vbar, vbar, vbar)
    h = lambda v: v * (1.0 + math.log(vbar) - math.log(v)) - mu
    v1 = bisect_root(h, vbar * 1e-15, vbar)
    revenue = (mu - v1) / math.log(vbar / v1)
    return LinearPaymentMechanism(v1, vbar, revenue)


def minimax_regret_one_level(mu: float, vbar: float) -> tuple[float, float]:
    """Optimal posted price and worst-case absolute regret on the mean set."""
    _check_mean(mu, vbar)
    root = math.sqrt((vbar - mu) * (3.0 * mu + vbar))
    price = vbar * (mu + vbar - root) / (2.0 * mu)
    regret = (mu - vbar + root) / 2.0
    return price, regret
