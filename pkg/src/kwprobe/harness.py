"""Experiment orchestration: seeded trials, probe statistics, CSV output and differential tests.

Trial ``t`` of an experiment draws everything (hash function, keys, operation
stream) from ``numpy.random.default_rng([seed, t])``, so results do not depend
on how trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import adversary
from .blocked_probe import VARIANTS, BlockedTable
from .field_hash import MAX_DEGREE, MERSENNE_31, DomainError, check_modulus, next_prime_congruent, sample
from .linear_probe import DuplicateKeyError, LinearTable

SCHEMES = ("linear", "blocked-bidirectional", "blocked-xor")
WORKLOADS = ("random-keys", "adversarial", "mixed-ops")
OPS = ("insert", "search_hit", "search_miss", "insert_at_load", "delete")
CSV_COLUMNS = (
    "scheme", "family", "k", "n", "r", "alpha", "trial", "seed",
    "op", "count", "mean_probes", "max_probes", "total_steps",
)
# the star family stores a table of p entries
STAR_MAX_MODULUS = 1 << 24


class SpecError(ValueError):
    pass


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: str
    family: str
    n: int
    r: int
    k: int | None = None
    alpha: float | None = None
    trials: int = 1
    seed: int = 0
    workload: str = "random-keys"
    op_count: int = 0
    delete_fraction: float = 0.0
    p: int | None = None
    probe_keys: int = 1000

    def __post_init__(self):
        # "polynomial-5" is shorthand for family="polynomial", k=5
        fam = self.family
        if fam.startswith("polynomial-"):
            try:
                k = int(fam.split("-", 1)[1])
            except ValueError:
                raise SpecError(f"family {fam!r}: degree after 'polynomial-' is not an integer") from None
            if self.k is not None and self.k != k:
                raise SpecError(f"family {fam!r} disagrees with k={self.k}")
            object.__setattr__(self, "family", "polynomial")
            object.__setattr__(self, "k", k)
        elif fam in ("cw", "star"):
            if self.k not in (None, 2):
                raise SpecError(f"family {fam!r} is pairwise; k must be 2, got {self.k}")
            object.__setattr__(self, "k", 2)
        elif fam != "polynomial":
            raise SpecError(f"family {fam!r}; expected polynomial-k, cw or star")
        if self.k is None or not 1 <= self.k <= MAX_DEGREE:
            raise SpecError(f"k={self.k} outside 1..{MAX_DEGREE}")
        if self.scheme not in SCHEMES:
            raise SpecError(f"scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.workload not in WORKLOADS:
            raise SpecError(f"workload {self.workload!r}; expected one of {WORKLOADS}")
        if self.r < 2:
            raise SpecError(f"r={self.r} must be at least 2")
        if self.blocked and not _is_power_of_two(self.r):
            raise SpecError(f"r={self.r} must be a power of two for scheme {self.scheme}")
        if not 1 <= self.n < self.r:
            raise SpecError(f"need 1 <= n < r, got n={self.n}, r={self.r}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.n / self.r)
        elif not math.isclose(self.alpha * self.r, self.n, abs_tol=1e-9):
            raise SpecError(f"alpha*r = {self.alpha * self.r} does not equal n={self.n}")
        if self.trials < 1:
            raise SpecError(f"trials={self.trials} must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise SpecError(f"seed={self.seed} is not a 64-bit unsigned value")
        if self.probe_keys < 0:
            raise SpecError("probe_keys must be nonnegative")
        if self.workload == "mixed-ops":
            if self.op_count < 1:
                raise SpecError("mixed-ops workload needs op_count >= 1")
            if not 0 <= self.delete_fraction <= 1:
                raise SpecError(f"delete_fraction={self.delete_fraction} outside [0, 1]")
            if self.delete_fraction > 0 and not self.blocked:
                raise SpecError("linear scheme has no deletion; set delete_fraction to 0")
        if self.workload == "adversarial":
            self._check_adversarial()
        else:
            self._check_keyed()

    def _check_adversarial(self):
        if self.scheme != "linear":
            raise SpecError("adversarial workload runs on the linear scheme")
        if self.family not in ("cw", "star"):
            raise SpecError("adversarial workload needs family cw or star")
        p = self.p if self.p is not None else next_prime_congruent(4 * self.n + 1, 1, 4)
        try:
            adversary.build_instance(p, (1, 2))
        except DomainError as exc:
            raise SpecError(f"adversarial modulus: {exc}") from None
        if self.r != (p + 1) // 2:
            raise SpecError(f"adversarial workload with p={p} needs r={(p + 1) // 2}, got r={self.r}")
        object.__setattr__(self, "p", p)

    def _check_keyed(self):
        p = self.p
        if p is None:
            if self.family == "star":
                p = next_prime_congruent(max(2 * self.r, self.n + self.probe_keys) + 1, 1, 2)
            else:
                p = MERSENNE_31
        try:
            check_modulus(p)
        except DomainError as exc:
            raise SpecError(str(exc)) from None
        if p < self.r:
            raise SpecError(f"p={p} smaller than r={self.r}")
        if self.family == "star" and p > STAR_MAX_MODULUS:
            raise SpecError(f"star family stores p entries; p={p} exceeds {STAR_MAX_MODULUS}")
        need = self.n + self.probe_keys + (self.op_count if self.workload == "mixed-ops" else 0)
        if need > p:
            raise SpecError(f"workload needs {need} distinct keys but the universe [p] has {p}")
        object.__setattr__(self, "p", p)

    @property
    def blocked(self) -> bool:
        return self.scheme.startswith("blocked-")

    @property
    def variant(self) -> str | None:
        return self.scheme.split("-", 1)[1] if self.blocked else None

    @property
    def family_label(self) -> str:
        return f"polynomial-{self.k}" if self.family == "polynomial" else self.family

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown config fields: {sorted(unknown)}")
        missing = {"scheme", "family", "n", "r"} - set(data)
        if missing:
            raise SpecError(f"missing config fields: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> ExperimentSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class TrialResult:
    spec: ExperimentSpec
    trial: int
    function: str
    probes: dict[str, list[int]] = field(default_factory=dict)
    total_steps: int | None = None  # insertion total computed independently of the probe log

    def counts(self, op: str) -> list[int]:
        return self.probes.get(op, [])

    def mean(self, op: str) -> float:
        c = self.counts(op)
        return sum(c) / len(c) if c else 0.0

    def total(self, op: str) -> int:
        return sum(self.counts(op))

    def rows(self):
        s = self.spec
        for op in OPS:
            c = self.counts(op)
            if not c:
                continue
            yield {
                "scheme": s.scheme,
                "family": s.family_label,
                "k": s.k,
                "n": s.n,
                "r": s.r,
                "alpha": f"{s.alpha:.6f}",
                "trial": self.trial,
                "seed": s.seed,
                "op": op,
                "count": len(c),
                "mean_probes": f"{sum(c) / len(c):.6f}",
                "max_probes": max(c),
                "total_steps": sum(c),
            }


def _make_table(spec: ExperimentSpec):
    if spec.blocked:
        return BlockedTable(spec.r, spec.variant)
    return LinearTable(spec.r)


def _random_keys(spec: ExperimentSpec, rng, table, h) -> dict[str, list[int]]:
    keys = rng.choice(spec.p, size=spec.n + spec.probe_keys, replace=False)
    homes = h.eval_many(keys).tolist()
    keys = keys.tolist()
    stored, fresh = range(spec.n), range(spec.n, len(keys))
    log = {op: [] for op in OPS}
    for i in stored:
        log["insert"].append(table.insert(keys[i], homes[i]))
    for i in stored:
        found, probes = table.search(keys[i], homes[i])
        assert found, f"stored key {keys[i]} not found"
        log["search_hit"].append(probes)
    for i in fresh:
        found, probes = table.search(keys[i], homes[i])
        assert not found, f"fresh key {keys[i]} reported present"
        log["search_miss"].append(probes)
    if spec.blocked:
        # insert each fresh key into the loaded table and remove it again
        for i in fresh:
            log["insert_at_load"].append(table.insert(keys[i], homes[i]))
            log["delete"].append(table.delete(keys[i], homes[i]))
    return log


def _mixed_ops(spec: ExperimentSpec, rng, table, h) -> dict[str, list[int]]:
    pool = rng.choice(spec.p, size=spec.n + spec.probe_keys + spec.op_count, replace=False).tolist()
    log = {op: [] for op in OPS}
    home = lambda x: int(h(x))  # noqa: E731
    stored: list[int] = []
    where: dict[int, int] = {}
    nxt = 0

    def add(op):
        nonlocal nxt
        key = pool[nxt]
        nxt += 1
        log[op].append(table.insert(key, home(key)))
        where[key] = len(stored)
        stored.append(key)

    def remove(key):
        log["delete"].append(table.delete(key, home(key)))
        i = where.pop(key)
        last = stored.pop()
        if last != key:
            stored[i] = last
            where[last] = i

    for _ in range(spec.n):
        add("insert")
    for _ in range(spec.op_count):
        u = rng.random()
        if u < spec.delete_fraction and stored:
            remove(stored[int(rng.integers(len(stored)))])
        elif len(stored) < spec.n:
            add("insert")
        elif rng.random() < 0.5:
            key = stored[int(rng.integers(len(stored)))]
            found, probes = table.search(key, home(key))
            assert found
            log["search_hit"].append(probes)
        else:
            # keys beyond the consumed prefix of the pool are never stored
            key = pool[int(rng.integers(nxt, len(pool)))]
            found, probes = table.search(key, home(key))
            assert not found
            log["search_miss"].append(probes)
    return log


def _adversarial(spec: ExperimentSpec, trial: int) -> TrialResult:
    instance = adversary.build_instance(spec.p, (1, 2))
    rec, homes = adversary.adversary_trial(instance, spec.family, spec.seed, trial, "random", "fast")
    table = LinearTable(spec.r)
    probes = [table.insert(key, int(y)) for key, y in enumerate(homes.tolist())]
    fn = f"{spec.family},2,{spec.p},{spec.r},{rec.a},{rec.b}"
    return TrialResult(spec, trial, fn, {"insert": probes}, rec.total_steps)


def run_trial(spec: ExperimentSpec, trial: int) -> TrialResult:
    if spec.workload == "adversarial":
        return _adversarial(spec, trial)
    rng = np.random.default_rng([spec.seed, trial])
    h = sample(spec.family, spec.k, spec.p, spec.r, rng)
    table = _make_table(spec)
    if spec.workload == "random-keys":
        log = _random_keys(spec, rng, table, h)
    else:
        log = _mixed_ops(spec, rng, table, h)
    total = table.total_cost() if isinstance(table, LinearTable) else None
    return TrialResult(spec, trial, h.serialize(), {op: c for op, c in log.items() if c}, total)


def _run_chunk(spec: ExperimentSpec, trials: list[int]) -> list[TrialResult]:
    return [run_trial(spec, t) for t in trials]


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[TrialResult]:
    """All trials of ``spec``, sorted by trial index; output is independent of ``workers``."""
    if workers <= 1 or spec.trials == 1:
        return _run_chunk(spec, list(range(spec.trials)))
    chunks = [list(range(w, spec.trials, workers)) for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [spec] * len(chunks), chunks)
        results = [r for part in parts for r in part]
    return sorted(results, key=lambda r: r.trial)


def emit_csv(results: list[TrialResult], destination) -> None:
    """Write one row per (trial, op) to a path or a text stream."""
    if not results:
        raise ValueError("no results to write")
    results = sorted(results, key=lambda r: r.trial)
    if hasattr(destination, "write"):
        _write_rows(results, destination)
        return
    with open(destination, "w", newline="") as fh:
        _write_rows(results, fh)


def _write_rows(results, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        writer.writerows(res.rows())


def csv_text(results: list[TrialResult]) -> str:
    buf = io.StringIO()
    emit_csv(results, buf)
    return buf.getvalue()


def parse_csv(source) -> list[dict]:
    """Read rows written by ``emit_csv`` back with numeric types restored."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    else:
        text = source.read() if hasattr(source, "read") else source
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    rows = []
    for row in reader:
        for col in ("k", "n", "r", "trial", "seed", "count", "max_probes", "total_steps"):
            row[col] = int(row[col])
        for col in ("alpha", "mean_probes"):
            row[col] = float(row[col])
        rows.append(row)
    return rows


def summarize(results: list[TrialResult], op: str) -> tuple[float, float]:
    """Mean over trials of the per-trial mean probes for ``op``, and its standard error."""
    means = np.array([r.mean(op) for r in results if r.counts(op)])
    if means.size == 0:
        raise ValueError(f"no {op} measurements")
    se = means.std(ddof=1) / math.sqrt(means.size) if means.size > 1 else 0.0
    return float(means.mean()), float(se)


# -- differential testing ---------------------------------------------------


@dataclass
class Mismatch:
    step: int
    op: str
    key: int
    detail: str

    def __str__(self):
        return f"step {self.step}: {self.op}({self.key}): {self.detail}"


def _default_factory(scheme: str, r: int):
    if scheme == "linear":
        return LinearTable(r)
    variant = scheme.split("-", 1)[1] if scheme.startswith("blocked-") else scheme
    if variant not in VARIANTS:
        raise ValueError(f"unknown scheme {scheme!r}")
    return BlockedTable(r, variant)


def differential_test(
    scheme: str,
    op_count: int,
    seed: int,
    r: int = 1024,
    max_load: float = 0.9,
    table_factory: Callable[[], object] | None = None,
    check_invariants: bool = False,
) -> list[Mismatch]:
    """Replay a random insert/delete/search stream against a table and a dict; report the first divergence.

    Keys come from a universe four times the table size so that repeated
    inserts, deletes of absent keys and both search outcomes all occur. Homes
    come from a 5-wise polynomial hash. With ``check_invariants`` the table's
    own checker runs after every mutation and a failure is reported as a
    mismatch.
    """
    if op_count < 1:
        return []
    rng = np.random.default_rng([seed, 0xD1FF])
    table = table_factory() if table_factory else _default_factory(scheme, r)
    r = table.r
    can_delete = hasattr(table, "delete")
    cap = min(int(max_load * r), r - 1)
    universe = 4 * r
    h = sample("polynomial", MAX_DEGREE, MERSENNE_31, r, rng)
    homes = h.eval_many(np.arange(universe)).tolist()
    ref: dict[int, int] = {}
    ops = rng.random(op_count).tolist()
    picks = rng.integers(0, universe, size=op_count).tolist()

    for step, (u, key) in enumerate(zip(ops, picks)):
        home = homes[key]
        if u < 0.4:
            op = "insert"
            if key in ref:
                try:
                    table.insert(key, home)
                except DuplicateKeyError:
                    pass
                else:
                    return [Mismatch(step, op, key, "duplicate insert accepted")]
                continue
            if len(ref) >= cap:
                op = "search"
            else:
                table.insert(key, home)
                ref[key] = home
        elif u < 0.7 and can_delete:
            op = "delete"
            table.delete(key, home)
            ref.pop(key, None)
        else:
            op = "search"
        found, _ = table.search(key, home)
        if found != (key in ref):
            return [Mismatch(step, op, key, f"table says {found}, reference says {key in ref}")]
        if check_invariants and op != "search":
            try:
                table.check_invariants()
            except AssertionError as exc:
                return [Mismatch(step, op, key, f"invariant broken: {exc}")]

    stored = {k: y for _, k, y in table.items()}
    if stored != ref:
        diff = sorted(set(stored.items()) ^ set(ref.items()))[:5]
        return [Mismatch(op_count, "final", diff[0][0], f"table contents differ from reference: {diff}")]
    for key, home in ref.items():
        if not table.search(key, home)[0]:
            return [Mismatch(op_count, "final", key, "stored key not reachable by search")]
    return []


def spec_dict(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["family"] = spec.family_label
    return d
