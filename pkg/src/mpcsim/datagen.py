"""Random instances: matching databases, skewed generators, degree profiles.

Relations are numpy int64 arrays of shape (m, arity) with values in [0, n).
Generation is deterministic given (query, statistics, seed); each relation
draws from a sub-seed derived from (seed, atom index), so relations could be
generated concurrently without changing the result.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .hashing import derive_seed
from .packing import Statistics, expected_output_size
from .queries import ConjunctiveQuery, QueryError, is_connected


class DatagenError(ValueError):
    pass


class Instance:
    """Per-relation tuple sets over the domain [0, n)."""

    def __init__(self, data: dict[str, np.ndarray], n: int, seed_note=None):
        self.data = {}
        for name, arr in data.items():
            arr = np.asarray(arr, dtype=np.int64)
            if arr.ndim != 2:
                raise DatagenError(f"relation {name}: expected a 2-d array")
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise DatagenError(f"relation {name}: values outside [0, {n})")
            self.data[name] = arr
        self.n = int(n)
        self.seed_note = seed_note
        self._tuple_cache: dict[str, list[tuple[int, ...]]] = {}

    @classmethod
    def from_tuples(cls, data: dict[str, Iterable[tuple]], n: int, seed_note=None):
        arrays = {}
        for name, rows in data.items():
            rows = sorted(set(tuple(int(v) for v in r) for r in rows))
            arity = len(rows[0]) if rows else 1
            arrays[name] = np.array(rows, dtype=np.int64).reshape(len(rows), arity)
        return cls(arrays, n, seed_note)

    def m(self, name: str) -> int:
        return self.data[name].shape[0]

    def arity(self, name: str) -> int:
        return self.data[name].shape[1]

    @property
    def bits_per_value(self) -> int:
        return max(1, (self.n - 1).bit_length())

    def tuples(self, name: str) -> list[tuple[int, ...]]:
        if name not in self._tuple_cache:
            self._tuple_cache[name] = [tuple(int(v) for v in row) for row in self.data[name]]
        return self._tuple_cache[name]

    def stats_for(self, q: ConjunctiveQuery) -> Statistics:
        return Statistics(
            tuple(self.m(a.name) for a in q.atoms),
            self.n,
            tuple(a.arity for a in q.atoms),
        )

    def check_no_duplicates(self) -> None:
        for name, arr in self.data.items():
            if len(np.unique(arr, axis=0)) != len(arr):
                raise DatagenError(f"relation {name} contains duplicate tuples")


def _injection(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """m distinct values drawn uniformly from [0, n) (partial shuffle)."""
    if m > n:
        raise DatagenError(f"cannot draw {m} distinct values from a domain of {n}")
    return rng.choice(n, size=m, replace=False).astype(np.int64)


def random_matching_db(q: ConjunctiveQuery, stats: Statistics, seed: int) -> Instance:
    """每relation: one uniform injection per column, composed by row index.

    Every value has degree exactly one in every column, and the relation is
    uniform over such matchings given the seed.
    """
    data = {}
    for j, atom in enumerate(q.atoms):
        m = stats.m[j]
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "rel", j)))
        cols = [_injection(rng, m, stats.n) for _ in range(atom.arity)]
        data[atom.name] = np.stack(cols, axis=1)
    return Instance(data, stats.n, seed_note=("matching", seed))


# -- skewed generation ------------------------------------------------------


def _column_support(spec, n: int) -> float:
    kind = spec[0] if isinstance(spec, tuple) else spec
    if kind == "matching":
        return n
    if kind == "constant":
        return 1
    if kind == "zipf":
        return spec[2]
    raise DatagenError(f"unknown column spec {spec!r}")


def _draw_column(spec, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    kind = spec[0] if isinstance(spec, tuple) else spec
    if kind == "matching":
        return _injection(rng, m, n)
    if kind == "constant":
        h = int(spec[1])
        if not 0 <= h < n:
            raise DatagenError(f"constant {h} outside domain [0, {n})")
        return np.full(m, h, dtype=np.int64)
    if kind == "zipf":
        s, support = float(spec[1]), int(spec[2])
        if not 1 <= support <= n:
            raise DatagenError("zipf support must be within the domain")
        w = (np.arange(1, support + 1, dtype=np.float64)) ** (-s)
        w /= w.sum()
        return rng.choice(support, size=m, p=w).astype(np.int64)
    raise DatagenError(f"unknown column spec {spec!r}")


def skewed_db(
    q: ConjunctiveQuery,
    stats: Statistics,
    skew_spec: dict[str, Sequence],
    seed: int,
) -> Instance:
    """Instance with per-column distributions.

    skew_spec maps a relation name to one spec per column:
    "matching" | ("constant", h) | ("zipf", s, support).  Colliding rows are
    dropped and the non-matching columns resampled until the relation reaches
    its target cardinality.
    """
    data = {}
    for j, atom in enumerate(q.atoms):
        m, n = stats.m[j], stats.n
        specs = skew_spec.get(atom.name, ["matching"] * atom.arity)
        if len(specs) != atom.arity:
            raise DatagenError(f"{atom.name}: expected {atom.arity} column specs")
        max_distinct = math.prod(_column_support(s, n) for s in specs)
        if m > max_distinct:
            raise DatagenError(
                f"{atom.name}: {m} distinct tuples impossible "
                f"(column supports allow {max_distinct})"
            )
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "rel", j)))
        cols = [_draw_column(s, m, n, rng) for s in specs]
        rows = {tuple(int(c[i]) for c in cols) for i in range(m)}
        resample = [
            i for i, s in enumerate(specs)
            if (s[0] if isinstance(s, tuple) else s) != "constant"
        ]
        attempts = 0
        while len(rows) < m:
            attempts += 1
            if attempts > 500:
                raise DatagenError(f"{atom.name}: cannot reach {m} distinct tuples")
            need = m - len(rows)
            fresh = [c[:need].copy() for c in cols]
            for i in resample:
                fresh[i] = _draw_column(specs[i], need, n, rng)
            for i in range(need):
                rows.add(tuple(int(c[i]) for c in fresh))
            rows = set(list(rows)[: m]) if len(rows) > m else rows
        arr = np.array(sorted(rows), dtype=np.int64)
        data[atom.name] = arr
    return Instance(data, stats.n, seed_note=("skewed", seed))


# -- degree statistics ------------------------------------------------------


@dataclass
class DegreeProfile:
    """Exact frequency map of a relation projected onto a position set."""

    positions: tuple[int, ...]
    counts: dict[tuple[int, ...], int]
    max_degree: int
    threshold: Optional[Fraction]
    heavy: list[tuple[tuple[int, ...], int]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def degree_profile(
    relation: np.ndarray,
    positions: Sequence[int],
    threshold: Optional[Fraction] = None,
) -> DegreeProfile:
    positions = tuple(positions)
    if not positions:
        raise DatagenError("position set must be nonempty")
    arr = np.asarray(relation, dtype=np.int64)
    sub = arr[:, list(positions)]
    uniq, cnt = np.unique(sub, axis=0, return_counts=True)
    counts = {tuple(int(v) for v in row): int(c) for row, c in zip(uniq, cnt)}
    heavy = []
    if threshold is not None:
        heavy = sorted(
            ((t, c) for t, c in counts.items() if c >= threshold),
            key=lambda tc: (-tc[1], tc[0]),
        )
    return DegreeProfile(
        positions, counts, int(cnt.max()) if len(cnt) else 0, threshold, heavy
    )


# -- distributional check ----------------------------------------------------


@dataclass
class PaleyZygmundReport:
    alpha: float
    mean_output: float
    empirical: float
    bound: float
    sigma: float
    trials: int
    passed: bool


def paley_zygmund_check(
    q: ConjunctiveQuery,
    stats: Statistics,
    alpha: float,
    trials: int,
    seed: int,
) -> PaleyZygmundReport:
    """Empirical P(|q(I)| > alpha*mu) against the second-moment bound
    (1-alpha)^2 * mu/(mu+1) for random matching databases."""
    from .simulate import oracle_eval

    if not is_connected(q):
        raise QueryError("the output-size bound applies to connected queries")
    if trials < 100:
        raise DatagenError("need at least 100 trials")
    if not 0 <= alpha < 1:
        raise DatagenError("alpha must be in [0, 1)")
    mu = expected_output_size(q, stats)
    exceed = 0
    total = 0.0
    for t in range(trials):
        inst = random_matching_db(q, stats, derive_seed(seed, "pz", t))
        size = len(oracle_eval(q, inst))
        total += size
        if size > alpha * mu:
            exceed += 1
    bound = (1.0 - alpha) ** 2 * mu / (mu + 1.0)
    sigma = math.sqrt(max(bound * (1.0 - bound), 1e-12) / trials)
    empirical = exceed / trials
    return PaleyZygmundReport(
        alpha, total / trials, empirical, bound, sigma, trials,
        passed=empirical >= bound - 3.0 * sigma,
    )


# -- persistence -------------------------------------------------------------


def save_instance(inst: Instance, dirpath: str) -> None:
    """One text file per relation: header '# name arity m n', one tuple per line."""
    os.makedirs(dirpath, exist_ok=True)
    for name in sorted(inst.data):
        arr = inst.data[name]
        path = os.path.join(dirpath, f"{name}.rel")
        with open(path, "w") as f:
            f.write(f"# {name} {arr.shape[1]} {arr.shape[0]} {inst.n}\n")
            for row in arr:
                f.write(" ".join(str(int(v)) for v in row) + "\n")


def load_instance(dirpath: str) -> Instance:
    data = {}
    n = 2
    for fname in sorted(os.listdir(dirpath)):
        if not fname.endswith(".rel"):
            continue
        path = os.path.join(dirpath, fname)
        with open(path) as f:
            header = f.readline().split()
            if len(header) != 5 or header[0] != "#":
                raise DatagenError(f"{path}: bad header")
            name, arity, m, rel_n = header[1], int(header[2]), int(header[3]), int(header[4])
            n = max(n, rel_n)
            rows = np.loadtxt(f, dtype=np.int64, ndmin=2)
            if rows.size == 0:
                rows = rows.reshape(0, arity)
            if rows.shape != (m, arity):
                raise DatagenError(f"{path}: expected {m} rows of arity {arity}")
            data[name] = rows
    return Instance(data, n, seed_note=("loaded", dirpath))
