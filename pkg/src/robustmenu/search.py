"""Grid search over price tuples and dense-grid menus.

``best_n_level`` enumerates nondecreasing price tuples from a uniform grid
(duplicates skipped: a tuple with a repeated price is dominated by the
lower-order tuple already enumerated) and solves the ratio program per
tuple.  The sweep is an order-preserving parallel map with a deterministic
reduction, so results do not depend on worker count.

``approx_inf_level`` solves one ratio program whose price set is a dense
uniform grid, giving a certified lower bound on the unrestricted-menu
ratio.  Small instances run on the in-house simplex; past a size threshold
the same program is assembled sparsely (with cumulative-payment auxiliary
variables) and handed to HiGHS, since a dense tableau at several hundred
levels is out of the in-house engine's envelope.  The two paths agree on
overlapping sizes (see tests).
"""

from __future__ import annotations

import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .ambiguity import AmbiguitySet, merged_grid
from .core import RatioResult, canonicalize
from .errors import DomainError, NumericError
from .ratio_lp import solve_ratio_given_prices

DIRECT_SOLVER_MAX_GRID = 60  # largest merged grid the dense tableau should see
_CHUNK = 400


def _price_grid(vbar: float, resolution: float, n: int) -> np.ndarray:
    if resolution <= 0:
        raise DomainError(f"resolution must be positive, got {resolution}")
    cells = round(vbar / resolution)
    if cells < n:
        raise DomainError(
            f"resolution {resolution} gives {cells} cells; need at least {n}"
        )
    return np.linspace(0.0, vbar, cells + 1)


def _score_chunk(
    ambiguity_set: AmbiguitySet, chunk: list[tuple[float, ...]]
) -> tuple[float, tuple[float, ...], tuple[float, ...], tuple[float, ...]] | None:
    best = None
    for prices in chunk:
        result = solve_ratio_given_prices(ambiguity_set, prices)
        if best is None or result.ratio > best[0]:
            best = (
                result.ratio,
                prices,
                result.mechanism.prices,
                result.mechanism.probs,
            )
    return best


def _chunked(iterable: Iterable, size: int) -> Iterable[list]:
    it = iter(iterable)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def best_n_level(
    ambiguity_set: AmbiguitySet,
    n: int,
    resolution: float,
    workers: int | None = None,
    progress: bool = False,
) -> RatioResult:
    """Best n-level mechanism over the uniform price grid of the given step.

    Ties break toward the lexicographically smallest price tuple (the
    enumeration order), independent of worker count.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    grid = _price_grid(ambiguity_set.vbar, resolution, n)
    combos = itertools.combinations(grid.tolist(), n)
    if workers is None:
        workers = os.cpu_count() or 1
    total_chunks = None
    if progress:
        from math import comb

        total_chunks = (comb(grid.size, n) + _CHUNK - 1) // _CHUNK

    best = None
    done = 0

    def reduce(candidate) -> None:
        nonlocal best
        if candidate is None:
            return
        if best is None or candidate[0] > best[0]:
            best = candidate

    if workers <= 1:
        for chunk in _chunked(combos, _CHUNK):
            reduce(_score_chunk(ambiguity_set, chunk))
            done += 1
            _tick(progress, done, total_chunks)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for candidate in pool.map(
                _score_chunk,
                itertools.repeat(ambiguity_set),
                _chunked(combos, _CHUNK),
            ):
                reduce(candidate)
                done += 1
                _tick(progress, done, total_chunks)
    if best is None:
        raise DomainError("price grid produced no candidate tuples")
    ratio, _, prices, probs = best
    return RatioResult(ratio, canonicalize(prices, probs, ambiguity_set.vbar), None)


def _tick(progress: bool, done: int, total: int | None) -> None:
    if progress and total and (done % max(1, total // 20) == 0 or done == total):
        print(f"grid search: {done}/{total} chunks", file=sys.stderr)


def approx_inf_level(ambiguity_set: AmbiguitySet, gridsize: int) -> RatioResult:
    """Certified lower bound on the unrestricted-menu ratio.

    One ratio program with prices on the uniform grid over (0, vbar]; any
    feasible menu on a price subset lower-bounds the unrestricted optimum.
    """
    if gridsize < 50:
        raise DomainError(f"need gridsize >= 50, got {gridsize}")
    vbar = ambiguity_set.vbar
    prices = (np.arange(1, gridsize + 1) * (vbar / gridsize)).tolist()
    prices[-1] = vbar
    grid = merged_grid(ambiguity_set, prices)
    if len(grid.points) <= DIRECT_SOLVER_MAX_GRID:
        return solve_ratio_given_prices(ambiguity_set, prices)
    return _solve_ratio_sparse(ambiguity_set, prices)


def _solve_ratio_sparse(
    ambiguity_set: AmbiguitySet, prices: Sequence[float]
) -> RatioResult:
    """Same ratio program, assembled sparsely and solved with HiGHS.

    Cumulative payments get auxiliary variables so every pair row has O(K)
    nonzeros; without them the instance is quadratically dense.
    """
    from scipy import sparse
    from scipy.optimize import linprog

    grid = merged_grid(ambiguity_set, prices)
    G = len(grid.points)
    n = len(grid.prices)
    K = ambiguity_set.num_constraints
    col_r = 0
    col_x = 1
    col_lam = col_x + n
    col_T = col_lam + K * G
    col_Tfull = col_T + G
    ncols = col_Tfull + 1

    rows_eq, cols_eq, vals_eq, rhs_eq = [], [], [], []

    def eq_entry(r, c, v):
        rows_eq.append(r)
        cols_eq.append(c)
        vals_eq.append(v)

    # T_j - T_{j-1} - sum of newly covered price terms = 0
    req = 0
    prev_members: tuple[int, ...] = ()
    for j in range(G):
        eq_entry(req, col_T + j, 1.0)
        if j > 0:
            eq_entry(req, col_T + j - 1, -1.0)
        newcomers = set(grid.members[j]) - set(prev_members)
        for l in newcomers:
            eq_entry(req, col_x + l, -grid.prices[l])
        prev_members = grid.members[j]
        rhs_eq.append(0.0)
        req += 1
    eq_entry(req, col_Tfull, 1.0)
    for l in range(n):
        eq_entry(req, col_x + l, -grid.prices[l])
    rhs_eq.append(0.0)
    req += 1
    for l in range(n):
        eq_entry(req, col_x + l, 1.0)
    rhs_eq.append(1.0)
    req += 1

    rows_ub, cols_ub, vals_ub = [], [], []
    rub = 0

    def ub_entry(r, c, v):
        rows_ub.append(r)
        cols_ub.append(c)
        vals_ub.append(v)

    for i in range(G):
        for j in range(G):
            if j >= i:
                ub_entry(rub, col_r, grid.points[i])
            for k in range(K):
                coeff = grid.phi_left[k][j]
                if coeff != 0.0:
                    ub_entry(rub, col_lam + k * G + i, coeff)
            ub_entry(rub, col_T + j, -1.0)
            rub += 1
        ub_entry(rub, col_r, grid.points[i])
        for k in range(K):
            coeff = grid.phi_at_vbar[k]
            if coeff != 0.0:
                ub_entry(rub, col_lam + k * G + i, coeff)
        ub_entry(rub, col_Tfull, -1.0)
        rub += 1

    A_eq = sparse.coo_matrix(
        (vals_eq, (rows_eq, cols_eq)), shape=(req, ncols)
    ).tocsr()
    A_ub = sparse.coo_matrix(
        (vals_ub, (rows_ub, cols_ub)), shape=(rub, ncols)
    ).tocsr()
    c = np.zeros(ncols)
    c[col_r] = -1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(rub),
        A_eq=A_eq,
        b_eq=np.array(rhs_eq),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise NumericError(f"dense-grid ratio program failed: {res.message}")
    xs = np.clip(res.x[col_x : col_x + n], 0.0, None)
    mech = canonicalize(grid.prices, xs, ambiguity_set.vbar)
    return RatioResult(float(-res.fun), mech, None)
