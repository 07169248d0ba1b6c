"""Blocked probing over nested power-of-two aligned blocks.

The table size is ``r = 2**L``. For a home slot ``h`` the level-``i`` block is
the aligned block of ``2**i`` slots containing ``h``; a probe sequence visits
level 0 (``h`` itself) and then, for each ``i >= 1``, the half of the level-``i``
block that level ``i-1`` did not cover. Two traversal orders are provided:

* ``bidirectional``: each new half is scanned sequentially, moving away from
  the already traversed block (forward or backward depending on bit ``i-1``
  of ``h``);
* ``xor``: slot ``h ^ j`` for ``j = 0, 1, 2, ...``.

``metric(y1, y2)`` is the level of the smallest block around ``y1`` that
contains ``y2``. Stored keys satisfy the level invariant: a key at metric
level ``i`` from its home sees every lower block around its home fully
occupied by keys hashed inside that block. Search stop rules, eviction
during insertion and repair after deletion all preserve it.
"""

from __future__ import annotations

from .linear_probe import CapacityError, DuplicateKeyError

VARIANTS = ("bidirectional", "xor")


def block_align(x: int, a: int) -> int:
    """``x - (x mod a)``."""
    if a < 1:
        raise ValueError("alignment must be positive")
    return x - x % a


def bp_metric(y1: int, y2: int) -> int:
    return (y1 ^ y2).bit_length()


def _is_power_of_two(r: int) -> bool:
    return r >= 1 and r & (r - 1) == 0


def level_slots(home: int, level: int, variant: str):
    """Slots probed at ``level``: level 0 is ``home``; level ``i`` is the new half of the size-``2**i`` block."""
    if level == 0:
        return (home,)
    half = 1 << (level - 1)
    if variant == "xor":
        return [home ^ j for j in range(half, 2 * half)]
    base = home - home % half
    if home & half:
        return range(base - 1, base - half - 1, -1)
    return range(base + half, base + 2 * half)


def probe_sequence(home: int, r: int, variant: str) -> list[int]:
    if not _is_power_of_two(r):
        raise ValueError(f"table size {r} is not a power of two")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    seq = []
    for level in range(r.bit_length()):
        seq.extend(level_slots(home, level, variant))
    return seq


class BlockedTable:
    def __init__(self, r: int, variant: str = "bidirectional"):
        if not _is_power_of_two(r) or r < 2:
            raise ValueError(f"table size {r} must be a power of two >= 2")
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        self.r = r
        self.levels = r.bit_length() - 1
        self.variant = variant
        self.keys: list[int | None] = [None] * r
        self.homes: list[int] = [-1] * r
        self.count = 0
        self._members: set[int] = set()

    def __len__(self):
        return self.count

    def __contains__(self, key):
        return key in self._members

    def _check_home(self, home):
        if not 0 <= home < self.r:
            raise ValueError(f"home {home} outside [0, {self.r})")

    def _locate(self, key: int, home: int) -> tuple[int | None, int]:
        keys, homes, variant = self.keys, self.homes, self.variant
        probes = 0
        for level in range(self.levels + 1):
            stop = False
            for s in level_slots(home, level, variant):
                probes += 1
                k = keys[s]
                if k is None:
                    stop = True
                elif k == key:
                    return s, probes
                elif (homes[s] ^ home) >> level:
                    stop = True
            if stop:
                break
        return None, probes

    def search(self, key: int, home: int) -> tuple[bool, int]:
        self._check_home(home)
        slot, probes = self._locate(key, home)
        return slot is not None, probes

    def insert(self, key: int, home: int) -> int:
        self._check_home(home)
        if key in self._members:
            raise DuplicateKeyError(key)
        if self.count >= self.r:
            raise CapacityError(f"table of size {self.r} is full")
        self._members.add(key)
        self.count += 1
        keys, homes, variant = self.keys, self.homes, self.variant
        probes = 0
        level = 0
        skip = -1
        while True:
            evicted = False
            while level <= self.levels and not evicted:
                for s in level_slots(home, level, variant):
                    if s == skip:
                        continue
                    probes += 1
                    occupant = keys[s]
                    if occupant is None:
                        keys[s] = key
                        homes[s] = home
                        return probes
                    occupant_level = bp_metric(homes[s], s)
                    if level < occupant_level:
                        keys[s], key = key, occupant
                        homes[s], home = home, homes[s]
                        level = occupant_level
                        skip = s
                        evicted = True
                        break
                else:
                    level += 1
            if not evicted:
                raise AssertionError("no free slot reached; table state corrupted")

    def delete(self, key: int, home: int) -> int:
        self._check_home(home)
        slot, probes = self._locate(key, home)
        if slot is None:
            return probes
        self.keys[slot] = None
        self.homes[slot] = -1
        self._members.discard(key)
        self.count -= 1
        return probes + self._repair(slot, home)

    def _repair(self, hole: int, removed_home: int) -> int:
        """Refill ``hole`` until no stored key can lower its metric by moving into it.

        The key chosen is the one that lands closest to its home (smallest new
        metric); any other choice can strand a key behind a stop rule.
        """
        keys, homes, variant = self.keys, self.homes, self.variant
        probes = 0
        while True:
            skipped = bp_metric(removed_home, hole)
            levels = [lv for lv in range(1, self.levels + 1) if lv != skipped]
            best = None
            # For each scanned key hashed outside its own block around the hole,
            # the highest block level around the hole that it makes impure.
            foreign = []
            for level in levels:
                empty = False
                for s in level_slots(hole, level, variant):
                    probes += 1
                    k = keys[s]
                    if k is None:
                        empty = True
                        continue
                    h = homes[s]
                    new = bp_metric(h, hole)
                    cur = bp_metric(h, s)
                    if new < cur:
                        cand = (new, -cur, s)
                        if best is None or cand < best:
                            best = cand
                    elif new > level:
                        foreign.append(new - 1)
                if empty or level == self.levels:
                    break
                if best is not None:
                    # a better candidate further out needs every block from its
                    # new level up to this one pure and full
                    dirty_top = max((min(t, level) for t in foreign), default=-1)
                    if dirty_top + 1 >= best[0]:
                        break
            if best is None:
                return probes
            src = best[2]
            keys[hole], homes[hole] = keys[src], homes[src]
            keys[src], homes[src] = None, -1
            removed_home = homes[hole]
            hole = src

    def items(self):
        for s, k in enumerate(self.keys):
            if k is not None:
                yield s, k, self.homes[s]

    def check_invariants(self) -> None:
        """Full-table check of the level invariant and bookkeeping."""
        seen = set()
        for s, key, home in self.items():
            assert key not in seen, f"key {key} stored twice"
            seen.add(key)
            level = bp_metric(home, s)
            for j in range(level):
                base = block_align(home, 1 << j)
                for z in range(base, base + (1 << j)):
                    assert self.keys[z] is not None, (
                        f"key {key} at slot {s} (home {home}, level {level}): slot {z} of level-{j} block empty"
                    )
                    assert bp_metric(self.homes[z], home) <= j, (
                        f"key {key} at slot {s}: slot {z} holds a key hashed outside the level-{j} block"
                    )
        assert seen == self._members
        assert len(seen) == self.count <= self.r

    def dump(self) -> str:
        lines = []
        for s, k in enumerate(self.keys):
            if k is None:
                lines.append(f"{s},EMPTY")
            else:
                h = self.homes[s]
                lines.append(f"{s},{k},{h},{(s - h) % self.r},{bp_metric(h, s)}")
        return "\n".join(lines)


def bp_search(table: BlockedTable, key: int, home: int) -> tuple[bool, int]:
    return table.search(key, home)


def bp_insert(table: BlockedTable, key: int, home: int) -> int:
    return table.insert(key, home)


def bp_delete(table: BlockedTable, key: int, home: int) -> int:
    return table.delete(key, home)
