"""Dense two-phase simplex for the small linear programs built here.

Maximization form.  Free variables are split into differences of
nonnegatives, rows are normalized to nonnegative right-hand sides, phase one
drives artificial variables out, and Bland's anti-cycling rule is always on
because the generated programs are heavily degenerate (many payment
constraints are tight at once).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
MAX_PIVOTS = 1_000_000

LE, EQ, GE = "<=", "=", ">="


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERIC_FAILURE = "numeric_failure"


@dataclass
class LinearProgram:
    """max objective @ z  subject to rows (coeffs, sense, rhs); z >= 0 unless free."""

    objective: np.ndarray
    row_coeffs: np.ndarray  # shape (m, n)
    senses: list[str]
    rhs: np.ndarray
    free: np.ndarray | None = None  # boolean mask, default all nonnegative

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        self.row_coeffs = np.asarray(self.row_coeffs, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = self.objective.shape[0]
        if self.row_coeffs.ndim != 2 or self.row_coeffs.shape[1] != n:
            raise DomainError(
                f"constraint width {self.row_coeffs.shape} does not match "
                f"objective length {n}"
            )
        m = self.row_coeffs.shape[0]
        if len(self.senses) != m or self.rhs.shape[0] != m:
            raise DomainError("row count mismatch among coeffs, senses, rhs")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise DomainError(f"unknown sense {s!r}")
        if self.free is None:
            self.free = np.zeros(n, dtype=bool)
        else:
            self.free = np.asarray(self.free, dtype=bool)
            if self.free.shape[0] != n:
                raise DomainError("free mask length mismatch")
        if not (
            np.all(np.isfinite(self.objective))
            and np.all(np.isfinite(self.row_coeffs))
            and np.all(np.isfinite(self.rhs))
        ):
            raise DomainError("nonfinite coefficient in linear program")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.row_coeffs.shape[0]


@dataclass
class LpSolution:
    status: SolveStatus
    x: np.ndarray | None
    objective: float | None


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int, scratch: np.ndarray) -> None:
    T[row] *= 1.0 / T[row, col]
    piv_row = T[row]
    factors = scratch[: T.shape[0]]
    np.copyto(factors, T[:, col])
    factors[row] = 0.0
    T -= factors[:, None] * piv_row
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _bland_enter(reduced: np.ndarray, allowed: int) -> int:
    """Lowest-index column with reduced cost > tol (maximization)."""
    mask = reduced[:allowed] > PIVOT_TOL
    idx = int(mask.argmax())
    return idx if mask[idx] else -1


def _dantzig_enter(reduced: np.ndarray, allowed: int) -> int:
    """Most-improving column; faster but not cycle-safe on its own."""
    idx = int(reduced[:allowed].argmax())
    return idx if reduced[idx] > PIVOT_TOL else -1


def _bland_leave(T: np.ndarray, basis: np.ndarray, col: int, m: int) -> int:
    # Bland: among minimal ratios, leave the row whose basic var has least index.
    if m <= 48:
        best_ratio = math.inf
        best_row = -1
        best_var = -1
        last = T.shape[1] - 1
        for i in range(m):
            a = T[i, col]
            if a > PIVOT_TOL:
                ratio = T[i, last] / a
                if ratio < best_ratio - 1e-15 or (
                    ratio <= best_ratio + 1e-15 and (best_row < 0 or basis[i] < best_var)
                ):
                    if ratio < best_ratio:
                        best_ratio = ratio
                    best_row = i
                    best_var = basis[i]
        return best_row
    colvals = T[:m, col]
    eligible = colvals > PIVOT_TOL
    if not eligible.any():
        return -1
    ratios = np.where(eligible, T[:m, -1] / np.where(eligible, colvals, 1.0), np.inf)
    best = ratios.min()
    ties = np.nonzero(ratios <= best + 1e-15)[0]
    return int(ties[np.argmin(basis[ties])])


DEGENERATE_STALL = 12  # pivots without objective progress before Bland engages


def _run_simplex(T: np.ndarray, basis: np.ndarray, allowed: int, budget: int) -> tuple[str, int]:
    """Dantzig entering, with Bland's rule engaged while the objective stalls.

    Bland's rule is the anti-cycling safeguard: after DEGENERATE_STALL
    consecutive pivots with no objective movement the entering rule switches
    to lowest-index (under which cycling is impossible) and stays there until
    the objective moves again.
    """
    m = T.shape[0] - 1
    used = 0
    scratch = np.empty(m + 1)
    zrow = T[m, :-1]
    stall = 0
    while used < budget:
        if stall < DEGENERATE_STALL:
            col = _dantzig_enter(zrow, allowed)
        else:
            col = _bland_enter(zrow, allowed)
        if col < 0:
            return "optimal", used
        row = _bland_leave(T, basis, col, m)
        if row < 0:
            return "unbounded", used
        before = T[m, -1]
        _pivot(T, basis, row, col, scratch)
        used += 1
        if T[m, -1] != before:
            stall = 0
        else:
            stall += 1
    return "stalled", used


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex; returns a certified-feasible point on OPTIMAL."""
    n_orig = lp.num_vars
    m = lp.num_rows

    free_idx = np.nonzero(lp.free)[0]
    n_cols = n_orig + free_idx.size  # appended negative parts
    A = np.zeros((m, n_cols))
    A[:, :n_orig] = lp.row_coeffs
    if free_idx.size:
        A[:, n_orig:] = -lp.row_coeffs[:, free_idx]
    c = np.zeros(n_cols)
    c[:n_orig] = lp.objective
    if free_idx.size:
        c[n_orig:] = -lp.objective[free_idx]
    b = lp.rhs.copy()
    senses = list(lp.senses)

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    for i in np.nonzero(flip)[0]:
        if senses[i] == LE:
            senses[i] = GE
        elif senses[i] == GE:
            senses[i] = LE

    n_slack = sum(1 for s in senses if s != EQ)
    total = n_cols + n_slack + m  # slacks/surpluses then one artificial per row
    T = np.zeros((m + 1, total + 1))
    T[:m, :n_cols] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    s_at = n_cols
    art_at = n_cols + n_slack
    for i, s in enumerate(senses):
        if s == LE:
            T[i, s_at] = 1.0
            basis[i] = s_at
            s_at += 1
        elif s == GE:
            T[i, s_at] = -1.0
            s_at += 1
            T[i, art_at + i] = 1.0
            basis[i] = art_at + i
        else:
            T[i, art_at + i] = 1.0
            basis[i] = art_at + i

    # Rows whose basis is an artificial need it priced into the phase-1 row.
    art_rows = [i for i in range(m) if basis[i] >= art_at]
    if art_rows:
        T[m, : total] = 0.0
        for i in art_rows:
            T[m, :-1] += T[i, :-1]
            T[m, -1] += T[i, -1]
        T[m, art_at:total] = 0.0
        status, used = _run_simplex(T, basis, art_at, MAX_PIVOTS)
        if status == "stalled":
            return LpSolution(SolveStatus.NUMERIC_FAILURE, None, None)
        if T[m, -1] > FEAS_TOL:
            return LpSolution(SolveStatus.INFEASIBLE, None, None)
        # Pivot any artificial still basic (at zero) out of the basis.
        scratch = np.empty(m + 1)
        for i in range(m):
            if basis[i] >= art_at:
                nz = np.nonzero(np.abs(T[i, :art_at]) > PIVOT_TOL)[0]
                if nz.size:
                    _pivot(T, basis, i, int(nz[0]), scratch)
        keep = [i for i in range(m) if basis[i] < art_at]
        if len(keep) < m:  # redundant rows: drop them
            T = np.vstack([T[keep], T[m:]])
            basis = basis[keep]
            m = len(keep)
    else:
        used = 0

    # Phase 2: rebuild the objective row, priced out over the current basis.
    T[m, :] = 0.0
    T[m, :n_cols] = -c  # tableau keeps z-row as (z_j - c_j)
    for i in range(m):
        cb = c[basis[i]] if basis[i] < n_cols else 0.0
        if cb != 0.0:
            T[m, :] += cb * T[i, :]
    # Entering test below expects reduced costs as c_j - z_j > 0, i.e. -(row).
    T[m, :] *= -1.0
    status, used2 = _run_simplex(T, basis, art_at, MAX_PIVOTS - used)
    if status == "stalled":
        return LpSolution(SolveStatus.NUMERIC_FAILURE, None, None)
    if status == "unbounded":
        return LpSolution(SolveStatus.UNBOUNDED, None, None)

    z = np.zeros(total)
    z[basis] = T[:m, -1]
    x = z[:n_orig].copy()
    if free_idx.size:
        x[free_idx] -= z[n_orig : n_orig + free_idx.size]
    obj = float(lp.objective @ x)

    residual = lp.row_coeffs @ x - lp.rhs
    scale = 1.0 + np.abs(lp.rhs)
    for i, s in enumerate(lp.senses):
        r = residual[i]
        ok = (
            r <= FEAS_TOL * scale[i]
            if s == LE
            else r >= -FEAS_TOL * scale[i]
            if s == GE
            else abs(r) <= FEAS_TOL * scale[i]
        )
        if not ok:
            return LpSolution(SolveStatus.NUMERIC_FAILURE, None, None)
    if np.any(x[~lp.free] < -FEAS_TOL):
        return LpSolution(SolveStatus.NUMERIC_FAILURE, None, None)
    return LpSolution(SolveStatus.OPTIMAL, x, obj)
