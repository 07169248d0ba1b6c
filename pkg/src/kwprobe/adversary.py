"""Adversarial key sets that make pairwise independent hashing cost Theta(r log r).

The universe ``[p]`` (``p = 1 mod 4`` prime, table size ``r = ceil(p/2)``) is cut
into 8 consecutive parts and ``S`` is the union of two of them. For
``h(x) = ((a x + b) mod p) mod r`` with ``m = a^-1 mod p``, stepping ``x`` by
``m`` steps ``a x + b`` by one, so each part maps onto ``min(m, |part|)``
intervals. Small ``m`` therefore yields long overlapping runs of homes and
about ``r**2 / m`` insertion steps; averaging over the uniform ``m`` gives the
logarithmic factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numba import njit

from .bounds import IntervalSet
from .field_hash import CWHash, DomainError, check_modulus, mod_inverse, next_prime_congruent, sample
from .linear_probe import LinearTable, total_cost_from_homes

PARTS = 8
PAIRS = tuple(combinations(range(1, PARTS + 1), 2))
MIN_MODULUS = 1000


def partition(p: int) -> list[tuple[int, int]]:
    """Eight consecutive half-open ranges covering ``[p]`` with sizes ``floor(p/8)`` or ``ceil(p/8)``."""
    cuts = [p * i // PARTS for i in range(PARTS + 1)]
    return list(zip(cuts[:-1], cuts[1:]))


@dataclass(frozen=True)
class AdversaryInstance:
    p: int
    parts: tuple[tuple[int, int], ...]
    selection: tuple[int, int]

    @property
    def r(self) -> int:
        return (self.p + 1) // 2

    def part(self, i: int) -> tuple[int, int]:
        """The ``i``-th part, 1-based."""
        return self.parts[i - 1]

    def keys(self, selection: tuple[int, int] | None = None) -> np.ndarray:
        i1, i2 = selection or self.selection
        return np.concatenate([np.arange(*self.part(i1)), np.arange(*self.part(i2))])

    @property
    def size(self) -> int:
        return sum(hi - lo for lo, hi in (self.part(i) for i in self.selection))


def modulus_for_table(log_r: int) -> int:
    """Prime ``p = 1 (mod 4)`` at or above ``4n + 1`` where ``n = 2**(log_r - 1)`` keys fill half the table."""
    n = 1 << (log_r - 1)
    return next_prime_congruent(4 * n + 1, 1, 4)


def build_instance(p: int, pair=None, rng: np.random.Generator | None = None) -> AdversaryInstance:
    """``pair`` is a 1-based pair of distinct part indices, or None to draw one from ``rng``."""
    p = check_modulus(p)
    if p % 4 != 1:
        raise DomainError(f"p={p} is not 1 mod 4")
    if p < MIN_MODULUS:
        raise DomainError(f"p={p} below {MIN_MODULUS}")
    if pair is None:
        if rng is None:
            raise ValueError("need rng to draw a random pair")
        pair = PAIRS[int(rng.integers(len(PAIRS)))]
    i1, i2 = pair
    if i1 == i2:
        raise DomainError("the two parts must differ")
    if not (1 <= i1 <= PARTS and 1 <= i2 <= PARTS):
        raise DomainError(f"part indices must lie in 1..{PARTS}")
    return AdversaryInstance(p, tuple(partition(p)), (min(i1, i2), max(i1, i2)))


def decompose_image(part: tuple[int, int], a: int, b: int, p: int, r: int) -> IntervalSet:
    """Cover ``{h(x) : x in part}`` by intervals modulo ``r``, with multiplicity.

    ``part`` is split into arithmetic progressions of stride ``m = a^-1``; each
    progression is an interval modulo ``p``, which becomes at most two
    intervals modulo ``r``.
    """
    if a == 0:
        raise DomainError("a must be nonzero")
    lo, hi = part
    m = mod_inverse(a, p)
    pieces = []
    for x0 in range(lo, min(lo + m, hi)):
        length = (hi - 1 - x0) // m + 1
        start = (a * x0 + b) % p
        for s, ln in ((start, min(length, p - start)), (0, start + length - p)):
            while ln > 0:
                chunk = min(ln, r)
                pieces.append((s % r, chunk))
                s += chunk
                ln -= chunk
    return IntervalSet(r, pieces)


@dataclass
class TrialCost:
    trial: int
    a: int
    b: int
    m: int
    selection: tuple[int, int]
    total_steps: float


@dataclass
class CostStats:
    r: int
    family: str
    trials: list[TrialCost] = field(default_factory=list)

    @property
    def totals(self) -> np.ndarray:
        return np.array([t.total_steps for t in self.trials], dtype=float)

    @property
    def mean_total_steps(self) -> float:
        return float(self.totals.mean())

    @property
    def std(self) -> float:
        return float(self.totals.std(ddof=1)) if len(self.trials) > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(len(self.trials))


def table_cost(homes, r: int) -> int:
    table = LinearTable(r)
    for key, home in enumerate(homes):
        table.insert(key, int(home))
    return table.probes_total


def _cost(homes, r, engine):
    if engine == "fast":
        return total_cost_from_homes(homes, r)
    if engine == "table":
        return table_cost(homes, r)
    raise ValueError(f"unknown engine {engine!r}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def adversary_trial(
    instance: AdversaryInstance,
    family: str,
    seed: int,
    trial: int,
    pair_mode: str = "random",
    engine: str = "fast",
) -> tuple[TrialCost, np.ndarray]:
    """One trial: sample a function from ``(seed, trial)`` and cost the chosen set.

    Returns the trial record and the homes of the inserted keys.
    """
    if family not in ("cw", "star"):
        raise ValueError("adversary targets the pairwise families cw and star")
    p, r = instance.p, instance.r
    rng = trial_rng(seed, trial)
    h = sample(family, 2, p, r, rng)
    m = mod_inverse(h.a, p) if h.a else 0
    if pair_mode == "worst":
        best = None
        for sel in PAIRS:
            homes = h.eval_many(instance.keys(sel))
            c = _cost(homes, r, engine)
            if best is None or c > best[1]:
                best = (sel, c, homes)
        sel, cost, homes = best
    else:
        if pair_mode == "random":
            sel = PAIRS[int(rng.integers(len(PAIRS)))]
        elif pair_mode == "fixed":
            sel = instance.selection
        else:
            raise ValueError(f"unknown pair mode {pair_mode!r}")
        homes = h.eval_many(instance.keys(sel))
        cost = _cost(homes, r, engine)
    return TrialCost(trial, h.a, h.b, m, sel, cost), homes


def measure_cost(
    instance: AdversaryInstance,
    family: str = "cw",
    trials: int = 200,
    seed: int = 0,
    pair_mode: str = "random",
    engine: str = "fast",
) -> CostStats:
    """Insert the adversarial set under ``trials`` independently sampled functions.

    ``pair_mode``: ``random`` redraws the two parts every trial (the
    randomized set of the lower-bound argument), ``fixed`` uses
    ``instance.selection``, ``worst`` records the costliest of all 28 pairs.
    ``engine="table"`` inserts into a ``LinearTable``; ``"fast"`` computes the
    same order-independent total from the home counts.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    stats = CostStats(instance.r, family)
    for t in range(trials):
        stats.trials.append(adversary_trial(instance, family, seed, t, pair_mode, engine)[0])
    return stats


@njit(cache=True)
def _pair_average_costs(p, r, cuts, bs, a_values):
    n_parts = cuts.size - 1
    part_of = np.empty(p, np.int64)
    for i in range(n_parts):
        for x in range(cuts[i], cuts[i + 1]):
            part_of[x] = i
    counts = np.zeros((n_parts, r), np.int64)
    carry1 = np.empty(r, np.int64)
    out = np.empty(a_values.size, np.float64)
    n_pairs = n_parts * (n_parts - 1) // 2
    for idx in range(a_values.size):
        a = a_values[idx]
        b = bs[idx]
        counts[:, :] = 0
        for x in range(p):
            counts[part_of[x], ((a * x + b) % p) % r] += 1
        acc = 0.0
        for i in range(n_parts):
            for j in range(i + 1, n_parts):
                n = (cuts[i + 1] - cuts[i]) + (cuts[j + 1] - cuts[j])
                carry = 0
                total = 0
                for y in range(r):
                    carry += counts[i, y] + counts[j, y] - 1
                    if carry < 0:
                        carry = 0
                    carry1[y] = carry
                    total += carry
                # second lap: carries differ from the first lap only until they agree
                y = 0
                while carry > 0 and y < r:
                    carry += counts[i, y] + counts[j, y] - 1
                    if carry < 0:
                        carry = 0
                    if carry == carry1[y]:
                        break
                    total += carry - carry1[y]
                    y += 1
                acc += n + total
        out[idx] = acc / n_pairs
    return out


def exhaustive_cost(p: int, seed: int = 0, a_values=None) -> CostStats:
    """Stratified estimate of the randomized-pair expected cost for the ``cw`` family.

    Every multiplier ``a`` in ``1..p-1`` is one trial (so ``m = a^-1`` is covered
    exactly once each); ``b`` is drawn per trial and the cost is averaged over
    all 28 part pairs, which is the exact conditional expectation over the
    pair. The heavy tail from small ``m`` is what makes plain sampling of
    ``a`` too noisy to resolve growth ratios.
    """
    p = check_modulus(p)
    r = (p + 1) // 2
    cuts = np.array([p * i // PARTS for i in range(PARTS + 1)], dtype=np.int64)
    if a_values is None:
        a_values = np.arange(1, p, dtype=np.int64)
    a_values = np.asarray(a_values, dtype=np.int64)
    bs = np.random.default_rng(seed).integers(0, p, size=a_values.size, dtype=np.int64)
    costs = _pair_average_costs(p, r, cuts, bs, a_values)
    stats = CostStats(r, "cw")
    for t, (a, b, c) in enumerate(zip(a_values.tolist(), bs.tolist(), costs.tolist())):
        stats.trials.append(TrialCost(t, a, b, mod_inverse(a, p), (0, 0), c))
    return stats


def pair_average_cost(h: CWHash, instance: AdversaryInstance, engine: str = "fast") -> float:
    """Mean total steps over the 28 pairs for one function; reference for the compiled kernel."""
    return float(np.mean([_cost(h.eval_many(instance.keys(sel)), instance.r, engine) for sel in PAIRS]))
