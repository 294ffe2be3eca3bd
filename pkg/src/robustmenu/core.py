"""Domain types for randomized posted-price mechanisms.

Valuations live on [0, vbar].  Points of that interval are addressed by a
:class:`GridPoint`, which carries a side flag so that left limits of step
functions can be evaluated exactly (no numeric epsilon anywhere).  A
:class:`Mechanism` randomizes over finitely many prices; its induced expected
payment is the right-continuous step function evaluated by ``payment_at``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

PROB_TOL = 1e-9
SUM_TOL = 1e-12


class Side(enum.Enum):
    """Which one-sided value of a function to take at a point."""

    LEFT_LIMIT = "left_limit"
    EXACT = "exact"


@dataclass(frozen=True, order=False)
class GridPoint:
    """A valuation together with a side flag.

    Ordering is lexicographic: points compare by value first, and at equal
    values the left limit precedes the exact point.  ``(0, LEFT_LIMIT)`` is
    rejected because there is nothing below zero.
    """

    value: float
    side: Side = Side.EXACT

    def __post_init__(self) -> None:
        if self.value < 0:
            raise DomainError(f"grid point value must be >= 0, got {self.value}")
        if self.value == 0 and self.side is Side.LEFT_LIMIT:
            raise DomainError("left limit at 0 is undefined")

    def sort_key(self) -> tuple[float, int]:
        return (self.value, 0 if self.side is Side.LEFT_LIMIT else 1)

    def __lt__(self, other: "GridPoint") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "GridPoint") -> bool:
        return self.sort_key() <= other.sort_key()

    def __gt__(self, other: "GridPoint") -> bool:
        return self.sort_key() > other.sort_key()

    def __ge__(self, other: "GridPoint") -> bool:
        return self.sort_key() >= other.sort_key()


def exact(value: float) -> GridPoint:
    return GridPoint(value, Side.EXACT)


def left_of(value: float) -> GridPoint:
    return GridPoint(value, Side.LEFT_LIMIT)


@dataclass(frozen=True)
class Mechanism:
    """A menu that posts ``prices[i]`` with probability ``probs[i]``.

    Instances are produced by :func:`canonicalize`: prices strictly sorted,
    probabilities nonnegative and summing to one.
    """

    prices: tuple[float, ...]
    probs: tuple[float, ...]
    vbar: float

    def payment_at(self, at: GridPoint) -> float:
        return payment_at(self, at)

    def expected_price(self) -> float:
        """Full payment sum(v_i * x_i); equals the payment at (vbar, EXACT)."""
        return float(math.fsum(p * x for p, x in zip(self.prices, self.probs)))

    def grid_values(self) -> tuple[float, ...]:
        """Valuations at which the payment function can change."""
        return self.prices

    def to_json_dict(self) -> dict:
        return {
            "prices": list(self.prices),
            "probs": list(self.probs),
            "vbar": self.vbar,
        }


@dataclass(frozen=True)
class StepPayment:
    """Callable view of a mechanism's expected-payment step function."""

    mechanism: Mechanism

    def __call__(self, at: GridPoint) -> float:
        return payment_at(self.mechanism, at)

    @property
    def vbar(self) -> float:
        return self.mechanism.vbar


def payment_at(mechanism: Mechanism, at: GridPoint) -> float:
    """Expected payment of a buyer at ``at``.

    Exact side sums v_l * x_l over prices v_l <= value; the left limit uses
    the strict inequality, so an atom exactly at the evaluation point is
    excluded.  Raises :class:`DomainError` outside [0, vbar].
    """
    if at.value < 0 or at.value > mechanism.vbar:
        raise DomainError(
            f"payment queried at {at.value}, outside [0, {mechanism.vbar}]"
        )
    return _payment_unbounded(mechanism.prices, mechanism.probs, at)


def _payment_unbounded(
    prices: Sequence[float], probs: Sequence[float], at: GridPoint
) -> float:
    # No vbar check; used internally where the evaluation grid may extend
    # past the mechanism's own upper bound (the payment is constant there).
    if at.side is Side.EXACT:
        terms = (v * x for v, x in zip(prices, probs) if v <= at.value)
    else:
        terms = (v * x for v, x in zip(prices, probs) if v < at.value)
    return float(math.fsum(terms))


def canonicalize(
    prices: Iterable[float], probs: Iterable[float], vbar: float
) -> Mechanism:
    """Sort prices, merge duplicates, renormalize probabilities.

    Zero-probability levels are dropped (duplicates emitted by grid sweeps
    collapse here).  Idempotent.
    """
    p = [float(v) for v in prices]
    x = [float(v) for v in probs]
    if len(p) != len(x):
        raise DomainError(f"{len(p)} prices but {len(x)} probabilities")
    if not p:
        raise DomainError("a mechanism needs at least one price level")
    if vbar <= 0 or not math.isfinite(vbar):
        raise DomainError(f"vbar must be positive and finite, got {vbar}")
    for v in p:
        if v < 0 or v > vbar:
            raise DomainError(f"price {v} outside [0, {vbar}]")
    for w in x:
        if w < -PROB_TOL:
            raise DomainError(f"negative probability {w}")
    total = math.fsum(x)
    if abs(total - 1.0) > PROB_TOL:
        raise DomainError(f"probabilities sum to {total}, expected 1")

    merged: dict[float, float] = {}
    for v, w in zip(p, x):
        merged[v] = merged.get(v, 0.0) + max(w, 0.0)
    total = math.fsum(merged.values())
    levels = sorted((v, w / total) for v, w in merged.items())
    kept = [(v, w) for v, w in levels if w > 0.0]
    return Mechanism(
        prices=tuple(v for v, _ in kept),
        probs=tuple(w for _, w in kept),
        vbar=float(vbar),
    )


@dataclass(frozen=True)
class DiscreteDistribution:
    """Atoms with side flags and nonnegative masses.

    Used both as a probability distribution (masses sum to 1) and as the
    tail-normalized measure appearing in the adversary's inner programs, so
    the total mass is not constrained at construction.
    """

    atoms: tuple[tuple[GridPoint, float], ...]

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[GridPoint, float]]) -> "DiscreteDistribution":
        cleaned = []
        for gp, m in pairs:
            if m < 0:
                raise DomainError(f"negative mass {m} at {gp}")
            cleaned.append((gp, float(m)))
        cleaned.sort(key=lambda t: t[0].sort_key())
        return DiscreteDistribution(atoms=tuple(cleaned))

    def total_mass(self) -> float:
        return float(math.fsum(m for _, m in self.atoms))

    def is_probability(self, tol: float = SUM_TOL) -> bool:
        return abs(self.total_mass() - 1.0) <= tol

    def normalized(self) -> "DiscreteDistribution":
        total = self.total_mass()
        if total <= 0:
            raise DomainError("cannot normalize a zero measure")
        return DiscreteDistribution(
            atoms=tuple((gp, m / total) for gp, m in self.atoms)
        )

    def tail_mass(self, threshold: GridPoint) -> float:
        """Mass at atoms >= threshold in grid-point order."""
        return float(math.fsum(m for gp, m in self.atoms if gp >= threshold))

    def mean(self) -> float:
        return float(math.fsum(gp.value * m for gp, m in self.atoms))


@dataclass(frozen=True)
class RatioResult:
    """A mechanism together with the robust value it attains."""

    ratio: float
    mechanism: Mechanism
    dualvars: np.ndarray | None = field(default=None, compare=False)
