"""Analytic bounds for probing under limited independence.

Floating point throughout, except ``fourth_central_moment`` which is generic
over the number type so it can be fed ``fractions.Fraction`` values.
Probability bounds are clamped to ``[0, 1]`` unless ``raw=True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence


class BoundDomainError(ValueError):
    pass


@dataclass(frozen=True)
class BoundParams:
    alpha: float
    eps: float = 0.0
    q: int = 1
    d: float = 1.0
    n: int | None = None
    r: int | None = None

    def __post_init__(self):
        if self.n is not None and self.r is not None and not math.isclose(self.alpha, self.n / self.r):
            raise BoundDomainError(f"alpha={self.alpha} disagrees with n/r={self.n / self.r}")


def _check_load(alpha: float, eps: float, n: int | None = None) -> None:
    if not 0 <= alpha < 1:
        raise BoundDomainError(f"load factor {alpha} outside [0, 1)")
    if eps < 0:
        raise BoundDomainError("eps must be nonnegative")
    if alpha > 0 and eps >= (1 - alpha) / alpha:
        raise BoundDomainError(f"eps={eps} not below (1-alpha)/alpha={(1 - alpha) / alpha}")
    _check_eps_n(eps, n)


def _check_eps_n(eps: float, n: int | None) -> None:
    if n is not None and eps >= 1 - 2 / n:
        raise BoundDomainError(f"eps={eps} not below 1 - 2/n={1 - 2 / n}")


def _clamp(x: float, raw: bool) -> float:
    return x if raw else min(1.0, x)


def t_branches(alpha: float, eps: float) -> tuple[float, float]:
    """The two expressions whose minimum is ``t_alpha_eps``."""
    _check_load(alpha, eps)
    if alpha == 0:
        return 0.0, 0.0
    g = 1 - (1 + eps) * alpha
    first = 5.2 * alpha * (1 + eps) ** 2 / g**2 + 4 / (9 * alpha) - 1
    second = 3 * alpha**2 * (1 + eps) ** 2 / g**4 * (2 + 4 / (9 * alpha))
    return first, second


def t_alpha_eps(alpha: float, eps: float = 0.0) -> float:
    """Expected displacement bound shared by the linear and blocked probing results.

    Defined as 0 at ``alpha == 0`` (the limit of the second branch).
    """
    return min(t_branches(alpha, eps))


def lemma1_tail(params: BoundParams, raw: bool = False) -> float:
    """Bound on ``Pr{|h(S) & Q| >= alpha q (1+eps) + d}`` for 4-wise independent hashing."""
    a, e, q, d = params.alpha, params.eps, params.q, params.d
    if d <= 0:
        raise BoundDomainError("deviation d must be positive")
    if e < 0:
        raise BoundDomainError("eps must be nonnegative")
    _check_eps_n(e, params.n)
    return _clamp((3 * a * a * q * q + a * q) * (1 + e) ** 2 / d**4, raw)


def lemma1_fully_loaded(
    alpha: float, eps: float, q: int, n: int | None = None, raw: bool = False
) -> float:
    """Bound on the probability that ``q`` slots after a fixed key's home are fully loaded (5-wise)."""
    _check_load(alpha, eps, n)
    if q < 1:
        raise BoundDomainError("interval length must be positive")
    g = 1 - (1 + eps) * alpha
    return _clamp((3 * alpha**2 / q**2 + alpha / q**3) * (1 + eps) ** 2 / g**4, raw)


def fourth_central_moment(probs: Sequence):
    """``E((X - mu)^4)`` for a sum of 4-wise independent indicators with the given means."""
    if len(probs) == 0:
        raise BoundDomainError("need at least one indicator")
    if any(not 0 <= p <= 1 for p in probs):
        raise BoundDomainError("indicator probabilities must lie in [0, 1]")
    mu = sum(probs)
    s2 = sum(p**2 for p in probs)
    s3 = sum(p**3 for p in probs)
    s4 = sum(p**4 for p in probs)
    return mu + 3 * mu**2 - 7 * s2 - 6 * mu * s2 + 12 * s3 + 3 * s2**2 - 6 * s4


def chebyshev_tail(params: BoundParams, raw: bool = False) -> float:
    """Second-moment counterpart of ``lemma1_tail``; variance of the count is at most its mean."""
    if params.d <= 0:
        raise BoundDomainError("deviation d must be positive")
    return _clamp(params.alpha * params.q * (1 + params.eps) / params.d**2, raw)


def full_independence_unsuccessful_bound(alpha: float) -> float:
    """Unsuccessful-search bound for blocked probing if full independence were available."""
    if not 0 < alpha < 1:
        raise BoundDomainError(f"load factor {alpha} outside (0, 1)")
    expo = 1 - alpha + math.log(alpha)
    if expo == 0:
        raise BoundDomainError("exponent vanishes")
    return 1 + math.exp(expo) / (math.log(2) * abs(expo))


class Theorem4Bounds(NamedTuple):
    U: float
    I: float
    D: float
    S: float


def successful_search_bound(alpha: float, eps: float = 0.0) -> float:
    """Blocked probing successful-search bound; constants transcribed, not re-derived."""
    _check_load(alpha, eps)
    ae = (1 + eps) * alpha
    g = 1 - ae
    if alpha <= 0.3 / (1 + eps):
        return 1 + (alpha**2 + alpha / 3) * 4 * (1 + eps) ** 2 / g**3
    log_term = 10.4 * math.log(g) + (8 / 9) * math.log(ae)
    return 0.915 / ae + 10.4 * (1 + eps) / g + 0.673 / alpha - 1 + log_term / alpha


def theorem4_bounds(alpha: float, eps: float = 0.0, n: int | None = None) -> Theorem4Bounds:
    _check_load(alpha, eps, n)
    t = t_alpha_eps(alpha, eps)
    return Theorem4Bounds(1 + t, 1 + 2 * t, 1 + 2 * t, successful_search_bound(alpha, eps))


def theorem5_bound(alpha: float, eps: float = 0.0, n: int | None = None) -> float:
    """Successful-search bound for blocked probing with 4-wise independence, ``alpha >= 0.8`` only."""
    _check_load(alpha, eps, n)
    if alpha < 0.8:
        raise BoundDomainError("no explicit constant below alpha = 0.8")
    return 6 * (1 + eps) / (1 - (1 + eps) * alpha) - 2.7


def cyclic_overlap(a: tuple[int, int], b: tuple[int, int], r: int) -> int:
    """Number of positions shared by two cyclic intervals ``start + [length]`` modulo ``r``."""
    (s1, l1), (s2, l2) = a, b
    s1 %= r
    s2 %= r
    total = 0
    for shift in (-r, 0, r):
        lo = max(s1, s2 + shift)
        hi = min(s1 + l1, s2 + shift + l2)
        total += max(0, hi - lo)
    return total


@dataclass
class IntervalSet:
    """A multiset of cyclic intervals modulo ``r``, each given as ``(start, length)``."""

    r: int
    intervals: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        for start, length in self.intervals:
            if not 0 <= start < self.r or not 0 <= length <= self.r:
                raise BoundDomainError(f"interval ({start}, {length}) does not fit modulo {self.r}")

    def positions(self) -> list[int]:
        """The covered positions with multiplicity."""
        return [(s + j) % self.r for s, length in self.intervals for j in range(length)]

    def coverage(self) -> list[int]:
        counts = [0] * self.r
        for y in self.positions():
            counts[y] += 1
        return counts

    def __len__(self):
        return len(self.intervals)


def intersection_lower_bound(intervals: IntervalSet) -> float:
    """Sum over interval pairs of ``|I & J|**2 / 2``; lower bound on linear probing insertion steps."""
    r = intervals.r
    return sum(cyclic_overlap(a, b, r) ** 2 for a, b in combinations(intervals.intervals, 2)) / 2
