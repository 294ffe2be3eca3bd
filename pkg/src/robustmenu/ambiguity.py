"""Ambiguity sets over a buyer's valuation distribution.

A set is described by constraint functions phi_k: a distribution F on
[0, vbar] belongs to the set iff the integral of every phi_k against F is
nonnegative.  Each phi_k is stored as contiguous affine pieces with explicit
boundary-inclusion flags, which makes one-sided evaluation exact: a step
down at the right end of an interval simply starts a new piece.

Builders for the five standard families are provided; each decomposes its
indicator arithmetic into pieces that are nondecreasing inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import GridPoint, Side
from .errors import DomainError

_MONOTONE_SLOPE_TOL = 0.0


@dataclass(frozen=True)
class Piece:
    """Affine piece a*v + b on an interval with explicit closures."""

    lo: float
    lo_closed: bool
    hi: float
    hi_closed: bool
    a: float
    b: float

    def value(self, v: float) -> float:
        return self.a * v + self.b

    def contains(self, v: float) -> bool:
        if v < self.lo or v > self.hi:
            return False
        if v == self.lo and not self.lo_closed:
            return False
        if v == self.hi and not self.hi_closed:
            return False
        return True

    def covers_just_below(self, v: float) -> bool:
        """Whether (v - eps) lies in this piece for all small eps > 0."""
        return self.lo < v <= self.hi


@dataclass(frozen=True)
class PiecewiseMonotoneFn:
    """Bounded function on [0, vbar], nondecreasing within each piece."""

    pieces: tuple[Piece, ...]
    vbar: float

    def __post_init__(self) -> None:
        if not self.pieces:
            raise DomainError("a constraint function needs at least one piece")
        if self.pieces[0].lo != 0.0 or self.pieces[-1].hi != self.vbar:
            raise DomainError("pieces must cover [0, vbar]")
        for piece in self.pieces:
            if piece.a < _MONOTONE_SLOPE_TOL:
                raise DomainError(
                    f"piece on [{piece.lo}, {piece.hi}] decreases (slope {piece.a})"
                )
        for left, right in zip(self.pieces, self.pieces[1:]):
            if left.hi != right.lo or left.hi_closed == right.lo_closed:
                raise DomainError("pieces must partition [0, vbar] contiguously")

    def eval(self, at: GridPoint) -> float:
        if at.value > self.vbar:
            raise DomainError(f"{at.value} outside [0, {self.vbar}]")
        if at.side is Side.EXACT:
            for piece in self.pieces:
                if piece.contains(at.value):
                    return piece.value(at.value)
            raise DomainError(f"no piece contains {at.value}")
        for piece in reversed(self.pieces):
            if piece.covers_just_below(at.value):
                return piece.value(at.value)
        raise DomainError(f"no piece just below {at.value}")

    def breakpoints(self) -> tuple[float, ...]:
        """Interior piece boundaries, strictly inside (0, vbar)."""
        return tuple(
            p.hi for p in self.pieces[:-1] if 0.0 < p.hi < self.vbar
        )


def _constant_run(vbar: float, cuts: list[tuple[float, bool]], levels: list[float]) -> tuple[Piece, ...]:
    """Constant pieces: levels[i] holds between cut i-1 and cut i.

    ``cuts`` are (value, left_closed_at_cut): if left_closed_at_cut the cut
    value belongs to the piece on its left.
    """
    pieces: list[Piece] = []
    lo, lo_closed = 0.0, True
    for (cut, belongs_left), level in zip(cuts, levels):
        pieces.append(Piece(lo, lo_closed, cut, belongs_left, 0.0, level))
        lo, lo_closed = cut, not belongs_left
    pieces.append(Piece(lo, lo_closed, vbar, True, 0.0, levels[-1]))
    return tuple(pieces)


@dataclass(frozen=True)
class AmbiguitySet:
    """Constraint functions phi_k plus the family tag that built them."""

    vbar: float
    constraints: tuple[PiecewiseMonotoneFn, ...]
    kind: str
    params: dict

    def __post_init__(self) -> None:
        if not self.constraints:
            raise DomainError("an ambiguity set needs at least one constraint")
        for fn in self.constraints:
            if fn.vbar != self.vbar:
                raise DomainError("constraint vbar mismatch")

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def breakpoints(self) -> tuple[float, ...]:
        values: set[float] = set()
        for fn in self.constraints:
            values.update(fn.breakpoints())
        return tuple(sorted(values))

    def phi_eval(self, k: int, at: GridPoint) -> float:
        return phi_eval(self, k, at)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "vbar": self.vbar, "params": self.params}


def phi_eval(ambiguity_set: AmbiguitySet, k: int, at: GridPoint) -> float:
    """Value of phi_k at a grid point, honoring the side flag exactly."""
    if not 0 <= k < ambiguity_set.num_constraints:
        raise DomainError(f"constraint index {k} out of range")
    return ambiguity_set.constraints[k].eval(at)


# ---------------------------------------------------------------------------
# Builders for the standard families.
# ---------------------------------------------------------------------------


def support_set(vlo: float, vbar: float) -> AmbiguitySet:
    """Valuations known to lie in [vlo, vbar]: phi(v) = 1[v >= vlo] - 1."""
    if not 0 <= vlo <= vbar:
        raise DomainError(f"need 0 <= vlo <= vbar, got vlo={vlo}, vbar={vbar}")
    if vlo == 0.0:
        pieces = (Piece(0.0, True, vbar, True, 0.0, 0.0),)
    else:
        pieces = _constant_run(vbar, [(vlo, False)], [-1.0, 0.0])
    fn = PiecewiseMonotoneFn(pieces, vbar)
    return AmbiguitySet(vbar, (fn,), "support", {"vlo": vlo, "vbar": vbar})


def mean_set(mu: float, vbar: float) -> AmbiguitySet:
    """Mean at least mu on [0, vbar]: phi(v) = v - mu."""
    if not 0 < mu <= vbar:
        raise DomainError(f"need 0 < mu <= vbar, got mu={mu}, vbar={vbar}")
    fn = PiecewiseMonotoneFn((Piece(0.0, True, vbar, True, 1.0, -mu),), vbar)
    return AmbiguitySet(vbar, (fn,), "mean", {"mu": mu, "vbar": vbar})


def quantile_set(
    quantiles: Iterable[tuple[float, float]], vbar: float
) -> AmbiguitySet:
    """P(v >= omega_k) >= xi_k for each pair: phi_k(v) = 1[v >= omega_k] - xi_k."""
    fns = []
    pairs = []
    for omega, xi in quantiles:
        if not 0 <= omega <= vbar:
            raise DomainError(f"omega {omega} outside [0, {vbar}]")
        if not 0 < xi <= 1:
            raise DomainError(f"xi {xi} outside (0, 1]")
        if omega == 0.0:
            pieces = (Piece(0.0, True, vbar, True, 0.0, 1.0 - xi),)
        else:
            pieces = _constant_run(vbar, [(omega, False)], [-xi, 1.0 - xi])
        fns.append(PiecewiseMonotoneFn(pieces, vbar))
        pairs.append([omega, xi])
    if not fns:
        raise DomainError("need at least one (omega, xi) pair")
    return AmbiguitySet(
        vbar, tuple(fns), "quantile", {"quantiles": pairs, "vbar": vbar}
    )


def _as_interval_list(intervals) -> list[tuple[float, float]]:
    # Accept a bare (a, b) pair as shorthand for a single interval.
    if (
        len(intervals) == 2
        and all(isinstance(x, (int, float)) for x in intervals)
    ):
        return [(float(intervals[0]), float(intervals[1]))]
    return [(float(a), float(b)) for a, b in intervals]


def multisegment_set(
    segments: Iterable[tuple[Sequence, float]], vbar: float
) -> AmbiguitySet:
    """P(v in I_k) >= xi_k where I_k is a union of closed intervals."""
    fns = []
    params = []
    for intervals, xi in segments:
        if not 0 < xi <= 1:
            raise DomainError(f"xi {xi} outside (0, 1]")
        ivs = sorted(_as_interval_list(intervals))
        if not ivs:
            raise DomainError("empty interval list")
        for a, b in ivs:
            if not 0 <= a <= b <= vbar:
                raise DomainError(f"interval [{a}, {b}] invalid on [0, {vbar}]")
        for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
            if a2 <= b1:
                raise DomainError("intervals within one constraint must be disjoint")
        pieces: list[Piece] = []
        inside, outside = 1.0 - xi, -xi
        cursor, cursor_closed = 0.0, True
        for a, b in ivs:
            if a > cursor or (a == cursor and not cursor_closed):
                pieces.append(Piece(cursor, cursor_closed, a, False, 0.0, outside))
            pieces.append(Piece(a, True, b, True, 0.0, inside))
            cursor, cursor_closed = b, False
        if cursor < vbar:
            pieces.append(Piece(cursor, cursor_closed, vbar, True, 0.0, outside))
        fns.append(PiecewiseMonotoneFn(tuple(pieces), vbar))
        params.append({"intervals": [list(iv) for iv in ivs], "xi": xi})
    if not fns:
        raise DomainError("need at least one (intervals, xi) entry")
    return AmbiguitySet(vbar, tuple(fns), "multisegment", {"segments": params, "vbar": vbar})


def segmented_mean_set(
    segments: Iterable[tuple[tuple[float, float], float]], vbar: float
) -> AmbiguitySet:
    """Segment means: phi_k(v) = 1[v in I_k] * (v - mu_k) for closed I_k."""
    fns = []
    params = []
    for (a, b), mu_k in segments:
        a, b = float(a), float(b)
        if not 0 <= a <= b <= vbar:
            raise DomainError(f"interval [{a}, {b}] invalid on [0, {vbar}]")
        pieces: list[Piece] = []
        if a > 0.0:
            pieces.append(Piece(0.0, True, a, False, 0.0, 0.0))
        pieces.append(Piece(a, True, b, True, 1.0, -mu_k))
        if b < vbar:
            pieces.append(Piece(b, False, vbar, True, 0.0, 0.0))
        fns.append(PiecewiseMonotoneFn(tuple(pieces), vbar))
        params.append({"interval": [a, b], "mu": mu_k})
    if not fns:
        raise DomainError("need at least one (interval, mu) entry")
    return AmbiguitySet(vbar, tuple(fns), "segmentedmean", {"segments": params, "vbar": vbar})


def make_standard_set(kind: str, **params) -> AmbiguitySet:
    """Dispatch to the family builders by name."""
    builders = {
        "support": lambda: support_set(params["vlo"], params["vbar"]),
        "mean": lambda: mean_set(params["mu"], params["vbar"]),
        "quantile": lambda: quantile_set(params["quantiles"], params["vbar"]),
        "multisegment": lambda: multisegment_set(params["segments"], params["vbar"]),
        "segmentedmean": lambda: segmented_mean_set(params["segments"], params["vbar"]),
    }
    if kind not in builders:
        raise DomainError(f"unknown ambiguity-set kind {kind!r}")
    return builders[kind]()


# ---------------------------------------------------------------------------
# Merged evaluation grid for the finite reformulation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MergedGrid:
    """Sorted positive values from prices, breakpoints, and vbar.

    ``members[j]`` lists the indices l with prices[l] < points[j] (the nested
    sets of the finite program), and ``phi_left[k][j]`` is phi_k evaluated at
    the left limit of points[j].  ``phi_at_vbar[k]`` is the exact value at
    vbar, needed where a constraint steps exactly at the upper bound.
    """

    points: tuple[float, ...]
    members: tuple[tuple[int, ...], ...]
    phi_left: tuple[tuple[float, ...], ...]
    phi_at_vbar: tuple[float, ...]
    prices: tuple[float, ...]


def merged_grid(ambiguity_set: AmbiguitySet, prices: Sequence[float]) -> MergedGrid:
    """Union grid of prices, constraint breakpoints, and vbar."""
    vbar = ambiguity_set.vbar
    for v in prices:
        if v < 0 or v > vbar:
            raise DomainError(f"price {v} outside [0, {vbar}]")
    values = {float(v) for v in prices if v > 0.0}
    values.update(ambiguity_set.breakpoints())
    values.add(vbar)
    points = tuple(sorted(values))
    members = tuple(
        tuple(l for l, v in enumerate(prices) if v < u) for u in points
    )
    phi_left = tuple(
        tuple(fn.eval(GridPoint(u, Side.LEFT_LIMIT)) for u in points)
        for fn in ambiguity_set.constraints
    )
    phi_at_vbar = tuple(
        fn.eval(GridPoint(vbar, Side.EXACT)) for fn in ambiguity_set.constraints
    )
    return MergedGrid(points, members, phi_left, phi_at_vbar, tuple(float(v) for v in prices))
