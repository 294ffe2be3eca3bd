"""Finite linear programs for robust pricing at fixed price levels.

``build_ratio_lp`` is the single generic reformulation used everywhere: one
lambda block per merged-grid point, payment constraints indexed by pairs of
grid points, a normalization row, and one extra row per block evaluating the
constraint functions exactly at vbar.  The extra rows are redundant whenever
every constraint function is continuous at vbar and cost nothing; when a
constraint steps exactly at the upper bound they keep the program bounded
and matching the underlying game (see tests for the degenerate corners).

The alternative-metric programs (weighted regret family and maximin
revenue) are specific to the mean set and carry their own sign conventions
for the multipliers: the metric family leaves them free, maximin revenue
restricts the mean multiplier to be nonnegative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ambiguity import AmbiguitySet, MergedGrid, merged_grid
from .core import Mechanism, RatioResult, canonicalize
from .errors import DomainError, InconsistentAmbiguityError, NumericError
from .lp import EQ, LE, LinearProgram, LpSolution, SolveStatus, solve_lp

ALPHA_MAXIMIN_MISMATCH_TOL = 1e-8


@dataclass(frozen=True)
class RatioLpLayout:
    """Column/row indexing of the generic ratio program."""

    num_prices: int
    num_constraints: int
    num_grid: int

    @property
    def col_r(self) -> int:
        return 0

    def col_x(self, l: int) -> int:
        return 1 + l

    def col_lambda(self, k: int, i: int) -> int:
        return 1 + self.num_prices + k * self.num_grid + i

    def row_pair(self, i: int, j: int) -> int:
        return i * self.num_grid + j

    def row_vbar_exact(self, i: int) -> int:
        return self.num_grid * self.num_grid + i

    @property
    def row_norm(self) -> int:
        return self.num_grid * (self.num_grid + 1)

    @property
    def num_cols(self) -> int:
        return 1 + self.num_prices + self.num_constraints * self.num_grid

    @property
    def num_rows(self) -> int:
        return self.num_grid * (self.num_grid + 1) + 1


def build_ratio_lp(
    ambiguity_set: AmbiguitySet, prices: Sequence[float]
) -> tuple[LinearProgram, RatioLpLayout]:
    """Competitive-ratio program for the given price levels.

    Maximize r subject to, for blocks i and grid points j,

        [j >= i] * r*u_i + sum_k phi_left[k][j] * lam[k, i] <= sum_{l in S_j} v_l x_l

    together with the vbar-exact rows and sum(x) = 1.  All variables are
    nonnegative.
    """
    grid = merged_grid(ambiguity_set, prices)
    return _build_from_grid(grid, ambiguity_set.num_constraints), _layout_of(grid, ambiguity_set)


def _layout_of(grid: MergedGrid, ambiguity_set: AmbiguitySet) -> RatioLpLayout:
    return RatioLpLayout(
        num_prices=len(grid.prices),
        num_constraints=ambiguity_set.num_constraints,
        num_grid=len(grid.points),
    )


def _build_from_grid(grid: MergedGrid, K: int) -> LinearProgram:
    n = len(grid.prices)
    G = len(grid.points)
    layout = RatioLpLayout(n, K, G)
    A = np.zeros((layout.num_rows, layout.num_cols))
    rhs = np.zeros(layout.num_rows)
    senses = [LE] * layout.num_rows

    price_arr = np.asarray(grid.prices)
    payment_rows = np.zeros((G, n))  # payment at the left limit of u_j
    for j, members in enumerate(grid.members):
        for l in members:
            payment_rows[j, l] = price_arr[l]

    for i in range(G):
        for j in range(G):
            r_idx = layout.row_pair(i, j)
            if j >= i:
                A[r_idx, layout.col_r] = grid.points[i]
            for k in range(K):
                A[r_idx, layout.col_lambda(k, i)] = grid.phi_left[k][j]
            A[r_idx, layout.col_x(0) : layout.col_x(0) + n] = -payment_rows[j]
        r_idx = layout.row_vbar_exact(i)
        A[r_idx, layout.col_r] = grid.points[i]
        for k in range(K):
            A[r_idx, layout.col_lambda(k, i)] = grid.phi_at_vbar[k]
        A[r_idx, layout.col_x(0) : layout.col_x(0) + n] = -price_arr

    A[layout.row_norm, layout.col_x(0) : layout.col_x(0) + n] = 1.0
    senses[layout.row_norm] = EQ
    rhs[layout.row_norm] = 1.0

    obj = np.zeros(layout.num_cols)
    obj[layout.col_r] = 1.0
    return LinearProgram(obj, A, senses, rhs)


def solve_ratio_given_prices(
    ambiguity_set: AmbiguitySet, prices: Sequence[float]
) -> RatioResult:
    """Build and solve the ratio program; package the optimal mechanism."""
    lp, layout = build_ratio_lp(ambiguity_set, prices)
    sol = solve_lp(lp)
    _require_optimal(sol, "ratio program")
    n = layout.num_prices
    xs = np.clip(sol.x[1 : 1 + n], 0.0, None)
    mech = canonicalize(prices, xs, ambiguity_set.vbar)
    lam = sol.x[1 + n :].reshape(layout.num_constraints, layout.num_grid)
    return RatioResult(ratio=float(sol.objective), mechanism=mech, dualvars=lam)


def _require_optimal(sol: LpSolution, what: str) -> None:
    if sol.status is SolveStatus.OPTIMAL:
        return
    if sol.status is SolveStatus.INFEASIBLE:
        raise InconsistentAmbiguityError(f"{what} infeasible: the ambiguity set admits no distribution")
    if sol.status is SolveStatus.UNBOUNDED:
        raise InconsistentAmbiguityError(f"{what} unbounded: the ambiguity set admits no distribution")
    raise NumericError(f"{what} stalled in the simplex")


def _sorted_with_sentinel(prices: Sequence[float], vbar: float) -> tuple[np.ndarray, np.ndarray]:
    v = np.sort(np.asarray([float(p) for p in prices]))
    if v.size == 0:
        raise DomainError("need at least one price")
    if v[0] < 0 or v[-1] > vbar:
        raise DomainError("prices must lie in [0, vbar]")
    return v, np.append(v, vbar)


def build_alpha_metric_lp(
    mu: float, vbar: float, prices: Sequence[float], alpha: float
) -> LinearProgram:
    """Weighted-regret program on the exact-mean set (multipliers free).

    Maximizes Delta = worst case of (revenue - alpha * hindsight revenue).
    alpha = 0 is maximin revenue, alpha = 1 is minimax absolute regret (with
    Delta equal to minus the regret).
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    if not 0 < mu <= vbar:
        raise DomainError(f"need 0 < mu <= vbar, got mu={mu}")
    v, v_ext = _sorted_with_sentinel(prices, vbar)
    n = v.size
    # Columns: Delta, x_1..x_n, lam_1..lam_{n+1}.
    cols = 1 + n + (n + 1)
    rows = (n + 1) * (n + 1) + (n + 1) + 1
    A = np.zeros((rows, cols))
    rhs = np.zeros(rows)
    senses = [LE] * rows
    free = np.zeros(cols, dtype=bool)
    free[0] = True
    free[1 + n :] = True

    r = 0
    for i in range(n + 1):
        for j in range(n + 1):
            A[r, 0] = 1.0
            A[r, 1 + n + i] = v_ext[j] - mu
            for l in range(n):
                if v[l] < v_ext[j]:
                    A[r, 1 + l] = -v[l]
            if j >= i:
                rhs[r] = -alpha * v_ext[i]
            r += 1
    # Zero-valuation rows Delta <= lam_i * mu for every block, including the
    # top one: nature may always park mass at worthless valuations.
    for i in range(n + 1):
        A[r, 0] = 1.0
        A[r, 1 + n + i] = -mu
        r += 1
    A[r, 1 : 1 + n] = 1.0
    senses[r] = EQ
    rhs[r] = 1.0

    obj = np.zeros(cols)
    obj[0] = 1.0
    return LinearProgram(obj, A, senses, rhs, free=free)


def solve_alpha_metric_given_prices(
    mu: float, vbar: float, prices: Sequence[float], alpha: float
) -> tuple[float, Mechanism]:
    """Solve the weighted-regret program; returns (Delta, mechanism)."""
    lp = build_alpha_metric_lp(mu, vbar, prices, alpha)
    sol = solve_lp(lp)
    _require_optimal(sol, "alpha-metric program")
    v = np.sort(np.asarray([float(p) for p in prices]))
    xs = np.clip(sol.x[1 : 1 + v.size], 0.0, None)
    mech = canonicalize(v, xs, vbar)
    delta = float(sol.objective)
    if alpha == 0.0:
        revenue, _ = solve_maximin_revenue_given_prices(mu, vbar, prices)
        if abs(revenue - delta) > ALPHA_MAXIMIN_MISMATCH_TOL * (1.0 + abs(revenue)):
            warnings.warn(
                "alpha=0 metric and maximin-revenue program disagree: "
                f"{delta} vs {revenue}; the multiplier sign conventions differ",
                RuntimeWarning,
                stacklevel=2,
            )
    return delta, mech


def build_maximin_revenue_lp(
    mu: float, vbar: float, prices: Sequence[float]
) -> LinearProgram:
    """Maximin-revenue program: one nonnegative mean multiplier."""
    if not 0 < mu <= vbar:
        raise DomainError(f"need 0 < mu <= vbar, got mu={mu}")
    v, v_ext = _sorted_with_sentinel(prices, vbar)
    n = v.size
    # Columns: lam0, x_1..x_n, lam1.
    cols = 2 + n
    rows = (n + 1) + 1
    A = np.zeros((rows, cols))
    rhs = np.zeros(rows)
    senses = [LE] * rows
    free = np.zeros(cols, dtype=bool)
    free[0] = True

    for j in range(n + 1):
        A[j, 0] = 1.0
        A[j, 1 + n] = v_ext[j] - mu
        for l in range(n):
            if v[l] < v_ext[j]:
                A[j, 1 + l] = -v[l]
    A[n + 1, 1 : 1 + n] = 1.0
    senses[n + 1] = EQ
    rhs[n + 1] = 1.0

    obj = np.zeros(cols)
    obj[0] = 1.0
    return LinearProgram(obj, A, senses, rhs, free=free)


def solve_maximin_revenue_given_prices(
    mu: float, vbar: float, prices: Sequence[float]
) -> tuple[float, Mechanism]:
    """Worst-case expected revenue maximized over pricing probabilities."""
    lp = build_maximin_revenue_lp(mu, vbar, prices)
    sol = solve_lp(lp)
    _require_optimal(sol, "maximin-revenue program")
    v = np.sort(np.asarray([float(p) for p in prices]))
    xs = np.clip(sol.x[1 : 1 + v.size], 0.0, None)
    return float(sol.objective), canonicalize(v, xs, vbar)
