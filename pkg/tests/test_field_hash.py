import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwprobe.field_hash import (
    CWHash,
    DomainError,
    MERSENNE_31,
    NoPrimeFound,
    PolynomialHash,
    StarHash,
    check_modulus,
    eval_cw,
    eval_poly,
    eval_star,
    is_prime,
    mod_inverse,
    next_prime_congruent,
    parse,
    sample,
)


def _sieve(limit):
    flags = [True] * limit
    flags[0] = flags[1] = False
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = [False] * len(flags[i * i :: i])
    return flags


def test_is_prime_matches_sieve():
    flags = _sieve(20000)
    assert all(is_prime(n) == flags[n] for n in range(20000))


def test_is_prime_large():
    assert is_prime(MERSENNE_31)
    assert not is_prime(MERSENNE_31 - 2)
    # strong pseudoprime to bases 2, 3, 5, 7
    assert not is_prime(3215031751)


@pytest.mark.parametrize("args,expected", [((5, 1, 4), 5), ((18, 1, 4), 29), ((17, 1, 4), 17)])
def test_next_prime_congruent(args, expected):
    assert next_prime_congruent(*args) == expected


def test_next_prime_errors():
    with pytest.raises(DomainError):
        next_prime_congruent(3, 1, 4)
    with pytest.raises(DomainError):
        next_prime_congruent(10, 4, 4)
    with pytest.raises(NoPrimeFound):
        next_prime_congruent(10, 0, 4)


@pytest.mark.parametrize("p", [4, 3, 2**31 + 11, 2**31 - 3])
def test_check_modulus_rejects(p):
    with pytest.raises(DomainError):
        check_modulus(p)


@pytest.mark.parametrize("a,p,m", [(3, 7, 5), (1, 101, 1), (2, 13, 7)])
def test_mod_inverse_examples(a, p, m):
    assert mod_inverse(a, p) == m


def test_mod_inverse_bijection():
    for p in [q for q in range(5, 102) if is_prime(q)]:
        inv = [mod_inverse(a, p) for a in range(1, p)]
        assert all(a * m % p == 1 for a, m in zip(range(1, p), inv))
        assert sorted(inv) == list(range(1, p))
    with pytest.raises(DomainError):
        mod_inverse(0, 7)


def test_eval_poly_examples():
    assert eval_poly(PolynomialHash(11, 4, (7,)), 9) == 3
    assert eval_poly(PolynomialHash(13, 13, (3, 2)), 4) == 11
    assert eval_poly(PolynomialHash(13, 6, (1, 1, 1, 1, 1)), 2) == 5


def test_eval_cw_examples():
    assert eval_cw(CWHash(13, 6, 1, 0), 5) == 5
    assert eval_cw(CWHash(13, 6, 2, 3), 10) == 4
    assert eval_cw(CWHash(13, 6, 2, 3), 12) == 1


def test_eval_star_examples():
    v = np.array([5, 1, 0, 2, 5])
    assert eval_star(StarHash(5, 3, 4, 2, v), 0) == 2  # v_x >= p
    assert eval_star(StarHash(5, 3, 0, 0, v), 1) == 0
    assert eval_star(StarHash(5, 3, 1, 0, v), 3) == 0


def test_domain_errors():
    with pytest.raises(DomainError):
        PolynomialHash(13, 6, (1, 2))(13)
    with pytest.raises(DomainError):
        CWHash(13, 6, 0, 1)
    with pytest.raises(DomainError):
        StarHash(5, 3, 0, 0, np.array([6, 0, 0, 0, 0]))
    with pytest.raises(DomainError):
        StarHash(5, 3, 0, 0, np.array([0, 0, 0, 0]))
    with pytest.raises(DomainError):
        PolynomialHash(13, 6, (1,) * 6)


def test_sample_determinism_and_constraints():
    h1 = sample("polynomial", 5, MERSENNE_31, 1024, np.random.default_rng(7))
    h2 = sample("polynomial", 5, MERSENNE_31, 1024, np.random.default_rng(7))
    assert h1 == h2 and h1.k == 5
    rng = np.random.default_rng(1)
    assert all(sample("cw", 2, 13, 6, rng).a != 0 for _ in range(500))
    star = sample("star", 2, 5, 3, rng)
    assert star.v.shape == (5,) and star.v.max() < 6 and star.p_hat == 6
    with pytest.raises(DomainError):
        sample("polynomial", 6, 13, 6, rng)
    with pytest.raises(ValueError):
        sample("tabulation", 2, 13, 6, rng)


def test_serialize_round_trip():
    rng = np.random.default_rng(3)
    for kind in ("polynomial", "cw", "star"):
        h = sample(kind, 4, 1009, 100, rng)
        text = h.serialize()
        assert text.split(",")[0] == kind
        assert parse(text) == h
    assert PolynomialHash(13, 6, (3, 2)).serialize() == "polynomial,2,13,6,3,2"


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(5)
    xs = np.arange(1009)
    for kind in ("polynomial", "cw", "star"):
        h = sample(kind, 5, 1009, 37, rng)
        assert h.eval_many(xs).tolist() == [h(int(x)) for x in xs]
    big = sample("polynomial", 5, MERSENNE_31, 1 << 20, rng)
    xs = rng.integers(0, MERSENNE_31, size=200)
    assert big.eval_many(xs).tolist() == [big(int(x)) for x in xs]


def test_polynomial_approximately_uniform():
    p, r = 13, 6
    for x in range(p):
        counts = np.zeros(r, dtype=int)
        for c in itertools.product(range(p), repeat=2):
            counts[PolynomialHash(p, r, c)(x)] += 1
        assert np.all(np.abs(counts / p**2 - 1 / r) < 1 / p)


def test_three_wise_independence_before_reduction():
    p = 7
    funcs = list(itertools.product(range(p), repeat=3))
    for pts in itertools.combinations(range(p), 3):
        seen = {tuple(PolynomialHash(p, p, c).field_value(x) for x in pts) for c in funcs}
        assert len(seen) == p**3  # bijection onto [p]^3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=1, max_size=5), st.integers(0, 100))
def test_poly_pure_and_in_range(coeffs, x):
    h = PolynomialHash(101, 17, tuple(coeffs))
    assert h(x) == h(x)
    assert 0 <= h(x) < 17
