"""Brute-force oracles for the analytic claims, grouped into suites for the CLI.

Each check returns a list of failure descriptions (empty means pass) or a
result table whose rows carry their own pass flag.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import BoundParams, IntervalSet, fourth_central_moment, intersection_lower_bound, lemma1_fully_loaded, lemma1_tail
from .field_hash import MERSENNE_31, star_range
from .harness import differential_test
from .linear_probe import LinearTable


def _all_polynomials(p: int, k: int) -> np.ndarray:
    """Every coefficient vector ``(c_0, ..., c_{k-1})`` over ``[p]``, one per row."""
    grids = np.meshgrid(*[np.arange(p)] * k, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def _poly_table(coeffs: np.ndarray, p: int) -> np.ndarray:
    """Field values of every polynomial (rows) at every point of ``[p]`` (columns)."""
    x = np.arange(p, dtype=np.int64)
    acc = np.zeros((coeffs.shape[0], p), dtype=np.int64)
    for c in coeffs[:, ::-1].T:
        acc = (acc * x + c[:, None]) % p
    return acc


def moment_identity(p: int, r_values=None) -> list[str]:
    """Compare the closed-form fourth central moment with enumeration over all degree-3 polynomials.

    Keys are all of ``[p]``; for each range size ``r`` and each nonempty
    ``Q`` in ``[r]``, ``X`` counts keys hashing into ``Q``. Exact rationals.
    """
    funcs = _poly_table(_all_polynomials(p, 4), p)
    total = funcs.shape[0]
    failures = []
    for r in r_values or range(2, p + 1):
        values = funcs % r
        for size in range(1, r + 1):
            for q in itertools.combinations(range(r), size):
                mask = np.zeros(r, dtype=bool)
                mask[list(q)] = True
                hit = mask[values]
                probs = [Fraction(int(c), total) for c in hit.sum(axis=0)]
                hist = np.bincount(hit.sum(axis=1), minlength=p + 1)
                mu = sum(probs)
                brute = sum(Fraction(int(c), total) * (j - mu) ** 4 for j, c in enumerate(hist) if c)
                closed = fourth_central_moment(probs)
                if brute != closed:
                    failures.append(f"p={p} r={r} Q={q}: enumeration {brute} != closed form {closed}")
    return failures


def star_pairwise(p: int = 5, r: int = 3) -> list[str]:
    """Enumerate the whole star family and check every pair probability is exactly ``1/r**2``."""
    p_hat = star_range(p, r)
    vs = _all_polynomials(p_hat, p)  # every v in [p_hat]^p
    ab = _all_polynomials(p, 2)
    x = np.arange(p, dtype=np.int64)
    y = (ab[:, :1] * x + ab[:, 1:]) % p  # (a, b) rows
    # values[i, j, x] for the i-th (a, b) and j-th v
    values = np.where(vs[None, :, :] >= p, vs[None, :, :], y[:, None, :]) % r
    values = values.reshape(-1, p)
    members = values.shape[0]
    failures = []
    for x1, x2 in itertools.permutations(range(p), 2):
        joint = np.bincount(values[:, x1] * r + values[:, x2], minlength=r * r)
        for cell, count in enumerate(joint):
            if count * r * r != members:
                failures.append(f"x=({x1},{x2}) y=({cell // r},{cell % r}): {count}/{members}")
    return failures


@dataclass
class TailRow:
    alpha: float
    q: int
    d: float
    freq: float
    bound: float
    se: float

    @property
    def ok(self) -> bool:
        return self.freq <= self.bound + 3 * self.se


def _sample_poly_values(rng, functions: int, k: int, keys: np.ndarray, p: int, r: int) -> np.ndarray:
    coeffs = rng.integers(0, p, size=(functions, k), dtype=np.int64)
    acc = np.zeros((functions, keys.size), dtype=np.int64)
    for j in range(k - 1, -1, -1):
        acc = (acc * keys + coeffs[:, j : j + 1]) % p
    return acc % r


def tail_soundness(
    alphas=(0.25, 0.5, 0.75),
    qs=(4, 16, 64),
    d_fracs=(0.25, 0.5, 1.0),
    functions: int = 10_000,
    r: int = 1024,
    seed: int = 0,
    p: int = MERSENNE_31,
) -> list[TailRow]:
    """Empirical ``Pr{|h(S) & Q| >= alpha q (1+eps) + d}`` for sampled 5-wise functions.

    ``S`` is a fixed random set of ``alpha r`` keys and ``Q`` the slots
    ``[q]``; each ``(alpha, q)`` gets its own batch of functions, shared by the
    ``d`` values. The standard error is the binomial one at the bound.
    """
    rng = np.random.default_rng(seed)
    eps = r / p
    rows = []
    for alpha in alphas:
        n = int(round(alpha * r))
        keys = rng.choice(p, size=n, replace=False).astype(np.int64)
        for q in qs:
            values = _sample_poly_values(rng, functions, 5, keys, p, r)
            counts = (values < q).sum(axis=1)
            for frac in d_fracs:
                d = q * frac
                params = BoundParams(alpha, eps, q, d, n=n, r=r)
                bound = lemma1_tail(params)
                freq = float(np.mean(counts >= alpha * q * (1 + eps) + d))
                se = math.sqrt(bound * (1 - bound) / functions)
                rows.append(TailRow(alpha, q, d, freq, bound, se))
    return rows


def fully_loaded_soundness(
    alphas=(0.25, 0.5), qs=(4, 8, 16), functions: int = 10_000, r: int = 1024, seed: int = 0, p: int = MERSENNE_31
) -> list[TailRow]:
    """Empirical probability that the ``q`` slots from a fixed outside key's home hold ``q`` keys."""
    rng = np.random.default_rng(seed)
    eps = r / p
    rows = []
    for alpha in alphas:
        n = int(round(alpha * r))
        keys = rng.choice(p, size=n + 1, replace=False).astype(np.int64)
        for q in qs:
            values = _sample_poly_values(rng, functions, 5, keys, p, r)
            offset = (values[:, :-1] - values[:, -1:]) % r
            freq = float(np.mean((offset < q).sum(axis=1) >= q))
            bound = lemma1_fully_loaded(alpha, eps, q, n=n)
            se = math.sqrt(bound * (1 - bound) / functions)
            rows.append(TailRow(alpha, q, float(q), freq, bound, se))
    return rows


def random_interval_instance(rng: np.random.Generator) -> IntervalSet:
    """A random interval multiset mod ``r`` with total length below ``r``, clustered so overlaps are common."""
    r = int(rng.integers(8, 257))
    budget = int(rng.integers(1, r))
    centre = int(rng.integers(r))
    spread = int(rng.integers(1, r + 1))
    intervals = []
    while budget > 0:
        length = int(rng.integers(1, min(budget, r // 2 + 1) + 1))
        start = (centre + int(rng.integers(spread))) % r
        intervals.append((start, length))
        budget -= length
    return IntervalSet(r, intervals)


def lemma4_check(instances: int = 1000, seed: int = 0) -> list[str]:
    """Linear probing insertion steps never fall below the interval-intersection bound."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(instances):
        iv = random_interval_instance(rng)
        homes = iv.positions()
        order = rng.permutation(len(homes))
        table = LinearTable(iv.r)
        for key in order.tolist():
            table.insert(key, homes[key])
        bound = intersection_lower_bound(iv)
        if table.probes_total < bound:
            failures.append(f"instance {i}: r={iv.r} intervals={iv.intervals}: steps {table.probes_total} < {bound}")
    return failures


def differential_suite(op_count: int = 100_000, instrumented_ops: int = 10_000, seed: int = 0) -> list[str]:
    failures = []
    for scheme in ("blocked-bidirectional", "blocked-xor"):
        for m in differential_test(scheme, op_count, seed, r=1024, max_load=0.9):
            failures.append(f"{scheme}: {m}")
        for m in differential_test(scheme, instrumented_ops, seed + 1, r=128, max_load=0.9, check_invariants=True):
            failures.append(f"{scheme} (instrumented): {m}")
    for m in differential_test("linear", instrumented_ops, seed, r=1024, max_load=0.9, check_invariants=True):
        failures.append(f"linear: {m}")
    return failures


def _suite_moments():
    failures = moment_identity(5) + moment_identity(7)
    return failures, ["exact fourth central moment identity, p in {5, 7}, every r and Q"]


def _suite_pairwise():
    failures = star_pairwise(5, 3)
    return failures, ["star family pair probabilities, p=5 r=3, all 194400 members"]


def _suite_lemma2():
    rows = tail_soundness() + fully_loaded_soundness()
    lines = [
        f"alpha={t.alpha} q={t.q} d={t.d:g}: freq={t.freq:.6f} bound={t.bound:.6f} se={t.se:.6f} {'ok' if t.ok else 'FAIL'}"
        for t in rows
    ]
    failures = [ln for ln, t in zip(lines, rows) if not t.ok] + lemma4_check()
    return failures, lines


def _suite_differential():
    return differential_suite(), ["blocked differential, 1e5 ops per variant; instrumented invariant runs"]


SUITES = {
    "moments": _suite_moments,
    "pairwise": _suite_pairwise,
    "lemma2": _suite_lemma2,
    "differential": _suite_differential,
}


def run_suite(name: str) -> tuple[bool, list[str]]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    failures, info = SUITES[name]()
    return not failures, info + failures
