"""Prime-field arithmetic and the limited-independence hash families.

Three families are supported, all mapping ``[p]`` to ``[r]``:

* ``polynomial``: degree ``k-1`` polynomials over GF(p) followed by ``mod r``
  (k-wise independent, ``r/p``-approximately uniform in the relative sense).
* ``cw``: Carter-Wegman ``((a*x + b) mod p) mod r`` with ``a != 0``.
* ``star``: the pairwise independent, exactly uniform variant of ``cw`` that
  substitutes a random table entry ``v[x]`` whenever ``v[x] >= p``.

Every product of two residues is below ``2**62``, so both the scalar and the
numpy evaluators are exact with 64-bit integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

MAX_MODULUS = 1 << 31
MAX_DEGREE = 5
PRIME_SEARCH_LIMIT = 10**7

# Deterministic witness set for every n < 3.3e24, so all 64-bit inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

MERSENNE_31 = (1 << 31) - 1


class DomainError(ValueError):
    """An argument lies outside the domain of a field operation."""


class NoPrimeFound(RuntimeError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test, exact for all n < 2**64."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_modulus(p: int) -> int:
    """Validate a field modulus and return it as a plain int."""
    p = int(p)
    if not 5 <= p < MAX_MODULUS:
        raise DomainError(f"modulus {p} outside [5, 2**31)")
    if not is_prime(p):
        raise DomainError(f"modulus {p} is not prime")
    return p


def next_prime_congruent(lower: int, residue: int, modulus: int) -> int:
    """Smallest prime ``p >= lower`` with ``p % modulus == residue``."""
    if lower < 5:
        raise DomainError("lower must be at least 5")
    if not 0 <= residue < modulus:
        raise DomainError("residue must lie in [0, modulus)")
    p = lower + (residue - lower) % modulus
    while p <= lower + PRIME_SEARCH_LIMIT:
        if is_prime(p):
            return p
        p += modulus
    raise NoPrimeFound(
        f"no prime = {residue} (mod {modulus}) within {PRIME_SEARCH_LIMIT} of {lower}"
    )


def mod_inverse(a: int, p: int) -> int:
    if not 0 < a < p:
        raise DomainError(f"{a} has no inverse in GF({p})")
    return pow(a, p - 2, p)


def _check_point(x: int, p: int) -> None:
    if not 0 <= x < p:
        raise DomainError(f"key {x} outside [0, {p})")


def _check_points(xs: np.ndarray, p: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    if xs.size and (xs.min() < 0 or xs.max() >= p):
        raise DomainError(f"keys outside [0, {p})")
    return xs


@dataclass(frozen=True)
class PolynomialHash:
    """``x -> ((c0 + c1 x + ... + c_{k-1} x^{k-1}) mod p) mod r``."""

    p: int
    r: int
    coeffs: tuple[int, ...]

    family = "polynomial"

    def __post_init__(self):
        check_modulus(self.p)
        if not 1 <= self.r <= self.p:
            raise DomainError(f"range {self.r} outside [1, p]")
        if not 1 <= len(self.coeffs) <= MAX_DEGREE:
            raise DomainError(f"degree k={len(self.coeffs)} outside 1..{MAX_DEGREE}")
        if any(not 0 <= c < self.p for c in self.coeffs):
            raise DomainError("coefficients must lie in [p]")

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @property
    def eps(self) -> float:
        return self.r / self.p

    def field_value(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __call__(self, x: int) -> int:
        _check_point(x, self.p)
        return self.field_value(x) % self.r

    def field_values(self, xs) -> np.ndarray:
        xs = _check_points(xs, self.p)
        acc = np.zeros(xs.shape, dtype=np.int64)
        for c in reversed(self.coeffs):
            acc = (acc * xs + c) % self.p
        return acc

    def eval_many(self, xs) -> np.ndarray:
        return self.field_values(xs) % self.r

    def serialize(self) -> str:
        return ",".join(map(str, ["polynomial", self.k, self.p, self.r, *self.coeffs]))


@dataclass(frozen=True)
class CWHash:
    """Carter-Wegman ``((a x + b) mod p) mod r`` with ``a`` nonzero."""

    p: int
    r: int
    a: int
    b: int

    family = "cw"
    k = 2

    def __post_init__(self):
        check_modulus(self.p)
        if not 1 <= self.r <= self.p:
            raise DomainError(f"range {self.r} outside [1, p]")
        if not 0 < self.a < self.p or not 0 <= self.b < self.p:
            raise DomainError("need 0 < a < p and 0 <= b < p")

    @property
    def eps(self) -> float:
        return self.r / self.p

    def field_value(self, x: int) -> int:
        return (self.a * x + self.b) % self.p

    def __call__(self, x: int) -> int:
        _check_point(x, self.p)
        return self.field_value(x) % self.r

    def field_values(self, xs) -> np.ndarray:
        xs = _check_points(xs, self.p)
        return (self.a * xs + self.b) % self.p

    def eval_many(self, xs) -> np.ndarray:
        return self.field_values(xs) % self.r

    def serialize(self) -> str:
        return ",".join(map(str, ["cw", 2, self.p, self.r, self.a, self.b]))


def star_range(p: int, r: int) -> int:
    """``ceil(p/r) * r``, the range of the substitution table entries."""
    return -(-p // r) * r


def star_table(p: int, r: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, star_range(p, r), size=p, dtype=np.int64)


@dataclass(frozen=True)
class StarHash:
    """``x -> g((a x + b) mod p, v[x]) mod r`` where ``g`` keeps ``v[x]`` iff ``v[x] >= p``.

    ``a`` may be zero. The table ``v`` has ``p`` entries drawn from
    ``[ceil(p/r) * r]``; when it was generated from ``v_seed`` the canonical
    text form records the seed instead of the table.
    """

    p: int
    r: int
    a: int
    b: int
    v: np.ndarray = field(repr=False, compare=False)
    v_seed: int | None = None

    family = "star"
    k = 2

    def __post_init__(self):
        check_modulus(self.p)
        if not 1 <= self.r <= self.p:
            raise DomainError(f"range {self.r} outside [1, p]")
        if not 0 <= self.a < self.p or not 0 <= self.b < self.p:
            raise DomainError("need 0 <= a, b < p")
        v = np.asarray(self.v, dtype=np.int64)
        if v.shape != (self.p,):
            raise DomainError(f"table must have exactly p={self.p} entries")
        if v.min() < 0 or v.max() >= self.p_hat:
            raise DomainError(f"table entries must lie in [{self.p_hat}]")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def p_hat(self) -> int:
        return star_range(self.p, self.r)

    @property
    def eps(self) -> float:
        return 0.0

    def field_value(self, x: int) -> int:
        vx = int(self.v[x])
        return vx if vx >= self.p else (self.a * x + self.b) % self.p

    def __call__(self, x: int) -> int:
        _check_point(x, self.p)
        return self.field_value(x) % self.r

    def field_values(self, xs) -> np.ndarray:
        xs = _check_points(xs, self.p)
        vx = self.v[xs]
        return np.where(vx >= self.p, vx, (self.a * xs + self.b) % self.p)

    def eval_many(self, xs) -> np.ndarray:
        return self.field_values(xs) % self.r

    def serialize(self) -> str:
        if self.v_seed is None:
            raise ValueError("table was not generated from a seed; no canonical text form")
        return ",".join(map(str, ["star", 2, self.p, self.r, self.a, self.b, self.v_seed]))

    def __eq__(self, other):
        if not isinstance(other, StarHash):
            return NotImplemented
        return (self.p, self.r, self.a, self.b) == (other.p, other.r, other.a, other.b) and bool(
            np.array_equal(self.v, other.v)
        )

    def __hash__(self):
        return hash((self.p, self.r, self.a, self.b, self.v.tobytes()))


HashFunction = Union[PolynomialHash, CWHash, StarHash]

FAMILIES = ("polynomial", "cw", "star")


def eval_poly(h: PolynomialHash, x: int) -> int:
    return h(x)


def eval_cw(h: CWHash, x: int) -> int:
    return h(x)


def eval_star(h: StarHash, x: int) -> int:
    return h(x)


def sample(kind: str, k: int, p: int, r: int, rng: np.random.Generator) -> HashFunction:
    """Draw a uniformly random member of the requested family."""
    p = check_modulus(p)
    if kind == "polynomial":
        if not 1 <= k <= MAX_DEGREE:
            raise DomainError(f"degree k={k} outside 1..{MAX_DEGREE}")
        coeffs = tuple(int(c) for c in rng.integers(0, p, size=k))
        return PolynomialHash(p, r, coeffs)
    if kind == "cw":
        return CWHash(p, r, int(rng.integers(1, p)), int(rng.integers(0, p)))
    if kind == "star":
        a = int(rng.integers(0, p))
        b = int(rng.integers(0, p))
        seed = int(rng.integers(0, 2**63))
        return StarHash(p, r, a, b, star_table(p, r, seed), seed)
    raise ValueError(f"unknown family {kind!r}; expected one of {FAMILIES}")


def parse(text: str) -> HashFunction:
    """Inverse of ``serialize``."""
    kind, *fields = text.strip().split(",")
    k, p, r, *rest = (int(f) for f in fields)
    if kind == "polynomial":
        if len(rest) != k:
            raise ValueError(f"expected {k} coefficients, got {len(rest)}")
        return PolynomialHash(p, r, tuple(rest))
    if kind == "cw":
        a, b = rest
        return CWHash(p, r, a, b)
    if kind == "star":
        a, b, seed = rest
        return StarHash(p, r, a, b, star_table(p, r, seed), seed)
    raise ValueError(f"unknown family {kind!r}")
