"""Deterministic CSV reproductions of the desk-scale tables and figures.

Every target returns a list of (filename, content) pairs.  Files start with
one metadata comment line carrying the package version and the parameters
used, then a header, then rows with 12-significant-digit floats; identical
inputs produce byte-identical output.
"""

from __future__ import annotations

import math
from typing import Callable

from . import __version__
from .ambiguity import mean_set, quantile_set
from .closed_form import (
    mean_one_level,
    mean_two_level,
    meanvar_ratio_lower_bound,
    meanvar_two_level_approx,
    quantile_inf,
    quantile_one_level,
    quantile_two_level,
    support_inf_ratio,
    support_optimal,
)
from .errors import DomainError
from .evaluate import BetaDistribution, performance_ratio, quantile_of
from .search import approx_inf_level, best_n_level

INF_GRIDSIZE = 400
DEFAULT_FIG_SEARCH_RESOLUTION = 0.05  # of vbar; coarser than solve's default by design


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _csv(meta: str, header: list[str], rows: list[list[float | str]]) -> str:
    lines = [f"# robustmenu {__version__}; {meta}", ",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def fig_support() -> list[tuple[str, str]]:
    """Ratio of n-level to unrestricted-menu performance across support widths."""
    rows = []
    for i in range(1, 101):
        frac = i / 100.0
        r_inf = support_inf_ratio(frac, 1.0)
        r = {n: support_optimal(n, frac, 1.0).ratio for n in (1, 2, 5)}
        rows.append(
            [frac, r[1], r[2], r[5], r_inf, r[1] / r_inf, r[2] / r_inf, r[5] / r_inf]
        )
    content = _csv(
        "target=fig-support; vbar=1; vlo/vbar grid 0.01..1 step 0.01",
        ["vlo_over_vbar", "r1", "r2", "r5", "r_inf", "r1_over_rinf", "r2_over_rinf", "r5_over_rinf"],
        rows,
    )
    return [("fig_support.csv", content)]


def fig_mean(resolution: float = DEFAULT_FIG_SEARCH_RESOLUTION, workers: int | None = None) -> list[tuple[str, str]]:
    """Mean-set ratios for one and two levels, a three-level grid search, and
    the dense-grid lower bound standing in for the unrestricted optimum."""
    rows = []
    for i in range(1, 21):
        mu = i / 20.0
        r1 = mean_one_level(mu, 1.0).ratio
        r2 = mean_two_level(mu, 1.0).ratio
        r3 = best_n_level(mean_set(mu, 1.0), 3, resolution, workers=workers).ratio
        r_inf_lb = approx_inf_level(mean_set(mu, 1.0), INF_GRIDSIZE).ratio
        rows.append([mu, r1, r2, r3, r_inf_lb, r1 / r_inf_lb, r2 / r_inf_lb])
    content = _csv(
        f"target=fig-mean; vbar=1; mu grid 0.05..1 step 0.05; "
        f"r3 grid-search resolution={_fmt(resolution)}; r_inf lower bound from "
        f"uniform {INF_GRIDSIZE}-price menu (exact unrestricted value belongs to prior work)",
        ["mu_over_vbar", "r1", "r2", "r3_grid", "r_inf_lower_bound", "r1_over_rinf_lb", "r2_over_rinf_lb"],
        rows,
    )
    return [("fig_mean.csv", content)]


def fig_quantile(resolution: float = DEFAULT_FIG_SEARCH_RESOLUTION, workers: int | None = None) -> list[tuple[str, str]]:
    """Quantile-set ratios on four omega panels; the unrestricted-menu
    column uses this paper's own closed form."""
    rows = []
    for omega10 in (2, 4, 6, 8):
        omega = omega10 / 10.0
        for j in range(1, 20):
            xi = j / 20.0
            r1 = quantile_one_level(omega, xi, 1.0).ratio
            r2 = quantile_two_level(omega, xi, 1.0).ratio
            r3 = best_n_level(quantile_set([(omega, xi)], 1.0), 3, resolution, workers=workers).ratio
            r_inf = quantile_inf(omega, xi, 1.0).r
            rows.append([omega, xi, r1, r2, r3, r_inf])
    content = _csv(
        f"target=fig-quantile; vbar=1; omega in 0.2,0.4,0.6,0.8; xi grid "
        f"0.05..0.95 step 0.05; r3 grid-search resolution={_fmt(resolution)}",
        ["omega", "xi", "r1", "r2", "r3_grid", "r_inf"],
        rows,
    )
    return [("fig_quantile.csv", content)]


def table2_row2() -> list[tuple[str, str]]:
    """Two-level mean-variance ratios across coefficients of variation."""
    rows = []
    for cv in (0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10):
        _, r = meanvar_two_level_approx(1.0, float(cv))
        rows.append([float(cv), r, 100.0 * r, meanvar_ratio_lower_bound(1.0, float(cv))])
    content = _csv(
        "target=table2-row2; mu=1; sigma/mu in 0.5,1..10; two-level feasible "
        "approximation (surrounding rows belong to prior work)",
        ["sigma_over_mu", "r2", "r2_percent", "lower_bound"],
        rows,
    )
    return [("table2_row2.csv", content)]


def fig_compareball() -> list[tuple[str, str]]:
    """Full-range adversary vs price-restricted adversary on the geometric
    ladder, vbar/vlo = 10, n = 1..10."""
    vlo, vbar = 1.0, 10.0
    rows = []
    for n in range(1, 11):
        ladder = support_optimal(n, vlo, vbar).mechanism.prices
        ext = list(ladder) + [vbar]
        r_full = 1.0 / (
            sum(ext[i + 1] / ext[i] for i in range(n)) - (n - 1)
        )
        r_restricted = 1.0 / (n - sum(ladder[i - 1] / ladder[i] for i in range(1, n)))
        rows.append([n, r_restricted, r_full, support_inf_ratio(vlo, vbar)])
    content = _csv(
        "target=fig-compareball; vbar/vlo=10; geometric price ladder; "
        "restricted adversary confines valuations to the ladder",
        ["n", "r_restricted_adversary", "r_full_adversary", "r_inf"],
        rows,
    )
    return [("fig_compareball.csv", content)]


EC_ALPHAS = (0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0)
EC_BETA_PANELS = ("equal", 0.5, 1.0, 2.0)
EC_XIS = (0.3, 0.5, 0.7)


def ec_beta() -> list[tuple[str, str]]:
    """Empirical ratios of robust mechanisms built from partial information,
    evaluated against the true scaled Beta distribution.

    Mean-information rows cover one and two levels (the unrestricted-menu
    mechanism for the mean set belongs to prior work); quantile-information
    rows cover one, two, and unrestricted levels.
    """
    rows: list[list[float | str]] = []
    for panel in EC_BETA_PANELS:
        for alpha in EC_ALPHAS:
            beta = alpha if panel == "equal" else float(panel)
            dist = BetaDistribution(alpha, beta, 1.0)
            mu = dist.mean()
            rows.append([alpha, beta, "mean", "1", performance_ratio(mean_one_level(mu, 1.0).mechanism, dist)])
            rows.append([alpha, beta, "mean", "2", performance_ratio(mean_two_level(mu, 1.0).mechanism, dist)])
            for xi in EC_XIS:
                omega = quantile_of(dist, xi)
                if omega <= 0.0:
                    continue
                tag = f"quantile_xi={_fmt(xi)}"
                rows.append([alpha, beta, tag, "1", performance_ratio(quantile_one_level(omega, xi, 1.0).mechanism, dist)])
                rows.append([alpha, beta, tag, "2", performance_ratio(quantile_two_level(omega, xi, 1.0).mechanism, dist)])
                rows.append([alpha, beta, tag, "inf", performance_ratio(quantile_inf(omega, xi, 1.0), dist)])
    content = _csv(
        "target=ec-beta; Beta valuations on [0,1]; panels beta=alpha,0.5,1,2; "
        "quantiles extracted as smallest v with P(X>=v)<=xi; mean rows omit "
        "n=inf (prior-work mechanism); indifferent buyers purchase",
        ["alpha", "beta", "info_kind", "n", "ratio"],
        rows,
    )
    return [("ec_beta.csv", content)]


TARGETS: dict[str, Callable[..., list[tuple[str, str]]]] = {
    "fig-support": fig_support,
    "fig-mean": fig_mean,
    "fig-quantile": fig_quantile,
    "table2-row2": table2_row2,
    "fig-compareball": fig_compareball,
    "ec-beta": ec_beta,
}


def run_target(
    target: str, resolution: float | None = None, workers: int | None = None
) -> list[tuple[str, str]]:
    if target not in TARGETS:
        raise DomainError(
            f"unknown target {target!r}; choose from {sorted(TARGETS)}"
        )
    fn = TARGETS[target]
    if target in ("fig-mean", "fig-quantile"):
        return fn(resolution or DEFAULT_FIG_SEARCH_RESOLUTION, workers)
    return fn()
