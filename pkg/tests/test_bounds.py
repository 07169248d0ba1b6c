import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from kwprobe.bounds import (
    BoundDomainError,
    BoundParams,
    IntervalSet,
    chebyshev_tail,
    cyclic_overlap,
    fourth_central_moment,
    full_independence_unsuccessful_bound,
    intersection_lower_bound,
    lemma1_fully_loaded,
    lemma1_tail,
    t_alpha_eps,
    t_branches,
    theorem4_bounds,
    theorem5_bound,
)


def test_t_examples():
    assert t_alpha_eps(0.5, 0) == pytest.approx(10.4 + 8 / 9 - 1, abs=1e-12)
    assert t_alpha_eps(0.5, 0) == pytest.approx(10.2889, abs=1e-4)
    first, second = t_branches(0.1, 0)
    assert second < first
    assert t_alpha_eps(0.1, 0) == pytest.approx(0.2947, abs=1e-4)
    assert t_alpha_eps(0, 0.3) == 0
    with pytest.raises(BoundDomainError):
        t_alpha_eps(0.5, 1.0)
    with pytest.raises(BoundDomainError):
        t_alpha_eps(1.0, 0)


def test_t_below_both_branches():
    for a in np.linspace(0.01, 0.95, 40):
        for e in (0, 0.01, 0.03):
            if e < (1 - a) / a:
                b = t_branches(a, e)
                assert t_alpha_eps(a, e) <= min(b) and all(math.isfinite(x) for x in b)


def test_lemma1_examples():
    assert lemma1_tail(BoundParams(0.5, 0, 16, 8)) == pytest.approx(200 / 4096)
    assert lemma1_tail(BoundParams(0.5, 0, 4, 1)) == 1.0
    assert lemma1_tail(BoundParams(0.5, 0, 4, 1), raw=True) == pytest.approx(14)
    vals = [lemma1_tail(BoundParams(0.5, 0, 16, d)) for d in range(1, 200)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 1e-5
    with pytest.raises(BoundDomainError):
        lemma1_tail(BoundParams(0.5, 0, 16, 0))
    with pytest.raises(BoundDomainError):
        lemma1_tail(BoundParams(0.5, 0.9, 16, 1, n=20, r=40))
    with pytest.raises(BoundDomainError):
        BoundParams(0.5, n=10, r=30)


def test_fully_loaded_examples():
    assert lemma1_fully_loaded(0.5, 0, 16) == pytest.approx(0.048828, abs=1e-6)
    assert lemma1_fully_loaded(1e-9, 0, 1) < 1e-8
    with pytest.raises(BoundDomainError):
        lemma1_fully_loaded(0.5, 1.0, 4)


def test_fully_loaded_is_tail_at_shifted_d():
    for a, e, q in itertools.product(np.linspace(0.05, 0.9, 12), (0, 0.01, 0.05), (1, 2, 5, 16, 64)):
        if e >= (1 - a) / a:
            continue
        d = q * (1 - (1 + e) * a)
        assert lemma1_fully_loaded(a, e, q, raw=True) == pytest.approx(
            lemma1_tail(BoundParams(a, e, q, d), raw=True), rel=1e-12
        )


def _brute_moment(probs):
    # independent indicators: enumerate all outcomes
    mu = sum(probs)
    total = 0
    for bits in itertools.product((0, 1), repeat=len(probs)):
        w = 1
        for b, p in zip(bits, probs):
            w *= p if b else 1 - p
        total += w * (sum(bits) - mu) ** 4
    return total


def test_fourth_moment_examples():
    assert fourth_central_moment([1]) == 0
    assert fourth_central_moment([Fraction(1, 2)] * 4) == Fraction(5, 2)
    assert fourth_central_moment([Fraction(1, 2)] * 2) == Fraction(1, 2)
    with pytest.raises(BoundDomainError):
        fourth_central_moment([0.5, 1.5])
    with pytest.raises(BoundDomainError):
        fourth_central_moment([])


def test_fourth_moment_matches_enumeration():
    rng = np.random.default_rng(2)
    for n in range(1, 8):
        probs = [Fraction(int(rng.integers(0, 12)), 11) for _ in range(n)]
        assert fourth_central_moment(probs) == _brute_moment(probs)


def test_chebyshev():
    assert chebyshev_tail(BoundParams(0.5, 0, 16, 8)) == pytest.approx(0.125)
    assert chebyshev_tail(BoundParams(0.5, 0, 16, 1e6)) < 1e-10
    assert chebyshev_tail(BoundParams(0.5, 0, 16, 8)) >= lemma1_tail(BoundParams(0.5, 0, 16, 8))


def test_chebyshev_dominates_exactly_when_d_large():
    # the second-moment bound is the weaker one iff d^2 >= (3 alpha q + 1)(1 + eps)
    for a, q, frac, e in itertools.product((0.25, 0.5, 0.75), (4, 16, 64), (0.25, 0.5, 1.0), (0, 0.01)):
        p = BoundParams(a, e, q, q * frac)
        cheb, tail = chebyshev_tail(p, raw=True), lemma1_tail(p, raw=True)
        if p.d**2 >= (3 * a * q + 1) * (1 + e):
            assert cheb >= tail * (1 - 1e-12)
        else:
            assert cheb < tail


def test_eq1_examples():
    x = 0.5 - math.log(2)
    assert full_independence_unsuccessful_bound(0.5) == pytest.approx(1 + math.exp(x) / (math.log(2) * -x))
    assert full_independence_unsuccessful_bound(0.5) == pytest.approx(7.159, abs=2e-3)
    v = full_independence_unsuccessful_bound(0.9)
    assert v == pytest.approx(268.6, abs=0.15)
    assert v < 1 + 2 / math.log(2) / 0.1**2
    grid = [full_independence_unsuccessful_bound(a) for a in np.linspace(0.05, 0.99, 60)]
    assert all(x < y for x, y in zip(grid, grid[1:]))
    with pytest.raises(BoundDomainError):
        full_independence_unsuccessful_bound(1.0)


def test_theorem4_examples():
    b = theorem4_bounds(0.5, 0)
    assert b.U == pytest.approx(11.2889, abs=1e-4)
    assert b.I == b.D == pytest.approx(21.5778, abs=1e-4)


def test_theorem4_s_breakpoint():
    e = 0.02
    edge = 0.3 / (1 + e)
    low = theorem4_bounds(edge, e).S
    assert low == pytest.approx(1 + (edge**2 + edge / 3) * 4 * (1 + e) ** 2 / (1 - (1 + e) * edge) ** 3)
    above = theorem4_bounds(edge + 1e-9, e).S
    ae = (1 + e) * (edge + 1e-9)
    expected = 0.915 / ae + 10.4 * (1 + e) / (1 - ae) + 0.673 / (edge + 1e-9) - 1
    expected += (10.4 * math.log(1 - ae) + 8 / 9 * math.log(ae)) / (edge + 1e-9)
    assert above == pytest.approx(expected)


def test_theorem5_examples():
    assert theorem5_bound(0.8) == pytest.approx(27.3)
    assert theorem5_bound(0.9) == pytest.approx(57.3)
    with pytest.raises(BoundDomainError):
        theorem5_bound(0.75)


def _overlap_brute(a, b, r):
    sa = {(a[0] + j) % r for j in range(a[1])}
    sb = {(b[0] + j) % r for j in range(b[1])}
    return len(sa & sb)


def test_cyclic_overlap_brute():
    r = 9
    for a in itertools.product(range(r), range(r + 1)):
        for b in itertools.product(range(r), range(0, r + 1, 2)):
            assert cyclic_overlap(a, b, r) == _overlap_brute(a, b, r)


def test_intersection_examples():
    assert intersection_lower_bound(IntervalSet(16, [(0, 4), (4, 4), (8, 8)])) == 0
    assert intersection_lower_bound(IntervalSet(16, [(3, 4), (3, 4)])) == 8
    # chain: only neighbours overlap, in 2 slots each
    assert intersection_lower_bound(IntervalSet(16, [(0, 4), (2, 4), (4, 4)])) == 4
    # three intervals, each pair sharing two slots
    assert intersection_lower_bound(IntervalSet(6, [(0, 4), (2, 4), (4, 4)])) == 6
    assert intersection_lower_bound(IntervalSet(8, [(6, 4), (7, 3)])) == 4.5
    with pytest.raises(BoundDomainError):
        IntervalSet(8, [(8, 1)])


def test_interval_set_positions_wrap():
    iv = IntervalSet(5, [(3, 4), (0, 1)])
    assert iv.positions() == [3, 4, 0, 1, 0]
    assert iv.coverage() == [2, 1, 0, 1, 1]
    assert len(iv) == 2
