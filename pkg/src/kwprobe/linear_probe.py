"""Linear probing with displacement-ordered placement and exact probe counting.

Placement: a key scanning slot ``home + i`` claims it if the slot is empty or
holds a key whose displacement exceeds ``i`` (its home lies outside
``home + [i+1]``). The evicted key then continues scanning from the next slot
as if it were being inserted. Equal homes keep scanning, so keys sharing a
home stay in insertion order.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np


class CapacityError(RuntimeError):
    pass


class DuplicateKeyError(KeyError):
    pass


class LinearTable:
    def __init__(self, r: int):
        if r < 2:
            raise ValueError("table needs at least 2 slots")
        self.r = r
        self.keys: list[int | None] = [None] * r
        self.homes: list[int] = [-1] * r
        self.count = 0
        self.probes_total = 0
        self._members: set[int] = set()

    def __len__(self):
        return self.count

    def __contains__(self, key):
        return key in self._members

    def insert(self, key: int, home: int) -> int:
        """Insert ``key`` with home slot ``home``; return slots inspected across the eviction chain."""
        r = self.r
        if not 0 <= home < r:
            raise ValueError(f"home {home} outside [0, {r})")
        if key in self._members:
            raise DuplicateKeyError(key)
        if self.count >= r - 1:
            raise CapacityError(f"table of size {r} already holds {self.count} keys")
        keys, homes = self.keys, self.homes
        self._members.add(key)
        probes = 0
        s = home
        i = 0
        while True:
            probes += 1
            occupant = keys[s]
            if occupant is None:
                keys[s] = key
                homes[s] = home
                break
            if (s - homes[s]) % r > i:
                keys[s], key = key, occupant
                homes[s], home = home, homes[s]
                i = (s - home) % r
            s = (s + 1) % r
            i += 1
        self.count += 1
        self.probes_total += probes
        return probes

    def search(self, key: int, home: int) -> tuple[bool, int]:
        keys = self.keys
        s = home
        probes = 0
        while True:
            probes += 1
            occupant = keys[s]
            if occupant is None:
                return False, probes
            if occupant == key:
                return True, probes
            s = (s + 1) % self.r
            if probes == self.r:
                return False, probes

    def displacement(self, slot: int) -> int:
        return (slot - self.homes[slot]) % self.r

    def total_cost(self) -> int:
        """Sum of ``1 + displacement`` over stored keys."""
        return sum(1 + self.displacement(s) for s, k in enumerate(self.keys) if k is not None)

    def items(self):
        """Yield ``(slot, key, home)`` for occupied slots."""
        for s, k in enumerate(self.keys):
            if k is not None:
                yield s, k, self.homes[s]

    def check_invariants(self) -> None:
        """Raise AssertionError if the no-gap invariant or the bookkeeping is broken."""
        r = self.r
        seen = set()
        for s, key, home in self.items():
            assert key not in seen, f"key {key} stored twice"
            seen.add(key)
            for step in range(self.displacement(s)):
                assert self.keys[(home + step) % r] is not None, (
                    f"gap at slot {(home + step) % r} before key {key} (home {home}, slot {s})"
                )
        assert seen == self._members
        assert len(seen) == self.count <= r - 1

    def dump(self) -> str:
        lines = []
        for s, k in enumerate(self.keys):
            if k is None:
                lines.append(f"{s},EMPTY")
            else:
                lines.append(f"{s},{k},{self.homes[s]},{self.displacement(s)}")
        return "\n".join(lines)


def lp_insert(table: LinearTable, key: int, home: int) -> int:
    return table.insert(key, home)


def lp_search(table: LinearTable, key: int, home: int) -> tuple[bool, int]:
    return table.search(key, home)


def lp_total_cost(table: LinearTable) -> int:
    return table.total_cost()


def fully_loaded(homes: Iterable[int], interval: tuple[int, int], r: int | None = None) -> bool:
    """True iff at least ``length`` homes fall in the interval ``start + [length]``.

    Without ``r`` the interval is taken as a plain integer range.
    """
    start, length = interval
    if r is None:
        hits = sum(1 for h in homes if start <= h < start + length)
    else:
        if length > r:
            raise ValueError("interval longer than the table")
        hits = sum(1 for h in homes if (h - start) % r < length)
    return hits >= length


def total_cost_from_homes(homes, r: int) -> int:
    """Total insertion steps for a home multiset, without simulating a table.

    Valid because the final occupancy, and hence the sum of displacements, does
    not depend on insertion order. Uses the carry recursion
    ``c[y] = max(0, c[y-1] + load[y] - 1)`` around the ring twice so the
    second lap starts from a steady state.
    """
    homes = np.asarray(homes, dtype=np.int64)
    n = homes.size
    if n >= r:
        raise CapacityError(f"{n} keys do not fit in {r - 1} usable slots")
    load = np.bincount(homes, minlength=r)
    x = np.concatenate([load, load]) - 1
    s = np.cumsum(x)
    carry = s - np.minimum(np.minimum.accumulate(s), 0)
    return int(n + carry[r:].sum())
