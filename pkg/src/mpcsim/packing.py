"""Fractional edge packings, share optimization, and load/replication bounds.

Weights are exact rationals throughout; floating point appears only at the
final exponentiation into a load measured in bits.  The share optimizers
break ties deterministically:

* the witness packing vertex is the lexicographically smallest maximizer;
* share exponents for equal-size inputs are the uniform vector 1/k when the
  query is degree-regular and that vector is feasible, and otherwise the
  lexicographically smallest optimal solution (in variable order).

The uniform-first rule keeps symmetric queries (cycles, cliques) on their
symmetric optimum instead of an arbitrary polytope vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from . import lp
from .queries import ConjunctiveQuery, QueryError

MAX_ENUM = 24  # vertex enumeration guard on atoms + variables


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


@dataclass(frozen=True)
class PackingVector:
    """Per-atom weights of a fractional edge packing (atom order)."""

    weights: tuple[Fraction, ...]
    tight: bool = False

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def __iter__(self):
        return iter(self.weights)


@dataclass(frozen=True)
class Statistics:
    """Per-atom tuple counts and the domain size, with derived bit sizes."""

    m: tuple[int, ...]
    n: int
    arities: tuple[int, ...]

    def __post_init__(self):
        if len(self.m) != len(self.arities):
            raise PreconditionError("one count per atom required")
        if any(mj < 1 for mj in self.m):
            raise PreconditionError("tuple counts must be >= 1")
        if self.n < max(self.m):
            raise PreconditionError("domain size n must be >= every m_j")

    @classmethod
    def for_query(cls, q: ConjunctiveQuery, m, n: int) -> "Statistics":
        if isinstance(m, int):
            m = [m] * q.num_atoms
        return cls(tuple(int(v) for v in m), int(n), tuple(a.arity for a in q.atoms))

    @property
    def bits_per_value(self) -> int:
        return max(1, (self.n - 1).bit_length())

    @property
    def M(self) -> tuple[int, ...]:
        b = self.bits_per_value
        return tuple(a * mj * b for a, mj in zip(self.arities, self.m))

    @property
    def equal_sizes(self) -> bool:
        return len(set(self.M)) == 1

    def mu(self, p: int) -> list[float]:
        lp_ = math.log(p)
        return [math.log(Mj) / lp_ for Mj in self.M]


@dataclass(frozen=True)
class ShareAssignment:
    """Share exponents, integer shares, and the predicted load."""

    query: ConjunctiveQuery
    p: int
    exponents: tuple[Fraction, ...]
    shares: tuple[int, ...]
    lam: float
    load_bits: float
    witness: Optional[PackingVector] = None
    binding_atom: Optional[str] = None

    def __post_init__(self):
        if len(self.shares) != self.query.k:
            raise PreconditionError("one share per variable required")
        prod = math.prod(self.shares)
        if prod > self.p:
            raise PreconditionError(f"shares multiply to {prod} > p = {self.p}")
        if any(s < 1 for s in self.shares):
            raise PreconditionError("shares must be >= 1")

    def share_of(self, var: str) -> int:
        return self.shares[self.query.variables.index(var)]

    def atom_grid(self, atom_idx: int) -> int:
        """Product of shares over the distinct variables of one atom."""
        prod = 1
        for v in self.query.atoms[atom_idx].varset:
            prod *= self.share_of(v)
        return prod

    def predicted_tuple_loads(self, stats: Statistics) -> list[float]:
        return [stats.m[j] / self.atom_grid(j) for j in range(self.query.num_atoms)]

    def predicted_bit_loads(self, stats: Statistics) -> list[float]:
        return [Mj / self.atom_grid(j) for j, Mj in enumerate(stats.M)]

    @classmethod
    def from_shares(
        cls, q: ConjunctiveQuery, shares: Sequence[int], stats: Statistics, p: Optional[int] = None
    ) -> "ShareAssignment":
        shares = tuple(int(s) for s in shares)
        if p is None:
            p = math.prod(shares)
        exps = tuple(_exact_logp(p, s) for s in shares)
        bit_loads = [Mj / math.prod(shares[q.variables.index(v)] for v in a.varset)
                     for a, Mj in zip(q.atoms, stats.M)]
        load = max(bit_loads)
        return cls(q, p, exps, shares, math.log(load) / math.log(p), load)


def _exact_logp(p: int, x: int) -> Fraction:
    """log_p(x) as an exact rational when x is a rational power of p."""
    if x == 1:
        return Fraction(0)
    if p < 2:
        return Fraction(0)
    approx = Fraction(math.log(x) / math.log(p)).limit_denominator(64)
    if approx > 0 and p ** approx.numerator == x ** approx.denominator:
        return approx
    return Fraction(math.log(x) / math.log(p))


# -- polytope vertex enumeration ------------------------------------------


def _packing_rows(q: ConjunctiveQuery) -> list[list[Fraction]]:
    """One row per variable: sum of u_j over atoms containing it."""
    rows = []
    for v in q.variables:
        rows.append([Fraction(1 if v in a.varset else 0) for a in q.atoms])
    return rows


def _enumerate_vertices(
    rows: list[list[Fraction]], rhs: list[Fraction], nvars: int, feasible
) -> list[tuple[Fraction, ...]]:
    """Vertices of {x : rows.x <= rhs (component sense handled by caller),
    x >= 0} by solving every square subsystem of tight constraints."""
    all_rows = rows + [[Fraction(1 if j == i else 0) for j in range(nvars)] for i in range(nvars)]
    all_rhs = rhs + [Fraction(0)] * nvars
    out: dict[tuple, tuple] = {}
    for subset in combinations(range(len(all_rows)), nvars):
        A = [all_rows[i] for i in subset]
        b = [all_rhs[i] for i in subset]
        x = lp.solve_square(A, b)
        if x is None:
            continue
        if feasible(x):
            out.setdefault(tuple(x), tuple(x))
    return sorted(out.values())


def packing_vertices(q: ConjunctiveQuery) -> list[PackingVector]:
    """All extreme points of the edge-packing polytope, exact and sorted.

    Enumeration cost grows as C(k + atoms, atoms); guarded to k + atoms <= 24.
    """
    if q.k + q.num_atoms > MAX_ENUM:
        raise PreconditionError(
            f"vertex enumeration guarded to {MAX_ENUM} variables+atoms "
            f"(got {q.k + q.num_atoms})"
        )
    return list(_packing_vertices_cached(q))


@lru_cache(maxsize=512)
def _packing_vertices_cached(q: ConjunctiveQuery) -> tuple[PackingVector, ...]:
    rows = _packing_rows(q)
    rhs = [Fraction(1)] * q.k

    def feasible(x):
        if any(v < 0 for v in x):
            return False
        return all(
            sum(r * v for r, v in zip(row, x)) <= 1 for row in rows
        )

    verts = _enumerate_vertices(rows, rhs, q.num_atoms, feasible)
    out = []
    for v in verts:
        sums = [sum(r * w for r, w in zip(row, v)) for row in rows]
        out.append(PackingVector(v, tight=all(s == 1 for s in sums)))
    return tuple(out)


def cover_vertices(q: ConjunctiveQuery) -> list[tuple[Fraction, ...]]:
    """Vertices of the fractional vertex-cover polytope (per-variable weights)."""
    if q.k + q.num_atoms > MAX_ENUM:
        raise PreconditionError("vertex enumeration guard exceeded")
    rows = []
    for a in q.atoms:
        rows.append([Fraction(1 if v in a.varset else 0) for v in q.variables])
    rhs = [Fraction(1)] * q.num_atoms

    def feasible(x):
        if any(v < 0 for v in x):
            return False
        return all(sum(r * v for r, v in zip(row, x)) >= 1 for row in rows)

    return _enumerate_vertices(rows, rhs, q.k, feasible)


@lru_cache(maxsize=2048)
def tau_star(q: ConjunctiveQuery) -> Fraction:
    """Fractional vertex covering number: max total weight of an edge packing.

    Solved by an exact LP, so it works well past the vertex-enumeration guard.
    """
    rows = _packing_rows(q)
    res = lp.solve_lp(
        c=[Fraction(-1)] * q.num_atoms,
        a_ub=rows,
        b_ub=[Fraction(1)] * q.k,
    )
    return -res.objective


@lru_cache(maxsize=512)
def rho_star(q: ConjunctiveQuery) -> Fraction:
    """Fractional edge cover optimum (metadata; nothing downstream uses it)."""
    rows = _packing_rows(q)
    res = lp.solve_lp(
        c=[Fraction(1)] * q.num_atoms,
        a_ub=[[-r for r in row] for row in rows],
        b_ub=[Fraction(-1)] * q.k,
    )
    return res.objective


# -- the load formula and exact comparisons --------------------------------


def load_formula(u, stats: Statistics, p: int) -> float:
    """Bits received per server for one packing: (prod M_j^u_j / p)^(1/sum u).

    The all-zero packing maps to load 0 (its limit value).
    """
    w = list(u.weights if isinstance(u, PackingVector) else u)
    s = sum(w)
    if s == 0:
        return 0.0
    ln = sum(float(uj) * math.log(Mj) for uj, Mj in zip(w, stats.M)) - math.log(p)
    return math.exp(ln / float(s))


def _cmp_exact(u: Sequence[Fraction], v: Sequence[Fraction], M: Sequence[int], p: int) -> int:
    """Exact sign of L(u) - L(v) via integer cross-exponentiation."""
    su, sv = sum(u, Fraction(0)), sum(v, Fraction(0))
    if su == 0 and sv == 0:
        return 0
    if su == 0:
        return -1
    if sv == 0:
        return 1
    # L(u) ? L(v)  <=>  (prod M^u / p)^sv  ?  (prod M^v / p)^su
    exps_l = [uj * sv for uj in u]
    exps_r = [vj * su for vj in v]
    den = 1
    for f in exps_l + exps_r + [su, sv]:
        den = den * f.denominator // math.gcd(den, f.denominator)
    lhs = rhs = 1
    for Mj, el, er in zip(M, exps_l, exps_r):
        lhs *= Mj ** int(el * den)
        rhs *= Mj ** int(er * den)
    lhs *= p ** int(su * den)
    rhs *= p ** int(sv * den)
    return (lhs > rhs) - (lhs < rhs)


def _cmp_load(u, v, stats: Statistics, p: int) -> int:
    """Sign of L(u) - L(v): float prefilter, exact integers near ties."""
    lu, lv = load_formula(u, stats, p), load_formula(v, stats, p)
    scale = max(abs(lu), abs(lv), 1.0)
    if abs(lu - lv) > 1e-12 * scale:
        return 1 if lu > lv else -1
    wu = u.weights if isinstance(u, PackingVector) else tuple(u)
    wv = v.weights if isinstance(v, PackingVector) else tuple(v)
    return _cmp_exact(wu, wv, stats.M, p)


def max_load_over_vertices(q: ConjunctiveQuery, stats: Statistics, p: int) -> tuple[PackingVector, float]:
    """The packing vertex attaining the highest load, with its load in bits.

    Ties break toward the lexicographically smallest weight vector.
    """
    best = None
    for u in packing_vertices(q):
        if best is None:
            best = u
            continue
        c = _cmp_load(u, best, stats, p)
        if c > 0 or (c == 0 and u.weights < best.weights):
            best = u
    return best, load_formula(best, stats, p)


# -- share optimization -----------------------------------------------------


def _nu(stats: Statistics, p: int) -> list[Fraction]:
    """log_p(M_j / max M) as exact fractions of the float logs (0 when equal)."""
    Mmax = max(stats.M)
    lp_ = math.log(p)
    return [
        Fraction(0) if Mj == Mmax else Fraction(math.log(Mj / Mmax) / lp_)
        for Mj in stats.M
    ]


def _degree_regular(q: ConjunctiveQuery) -> bool:
    degs = {len(q.atoms_of(v)) for v in q.variables}
    return len(degs) == 1


def _canonical_exponents(q: ConjunctiveQuery, rhs: list[Fraction], allow_uniform: bool) -> list[Fraction]:
    """Optimal exponents for constraints sum_{i in S_j} e_i >= rhs_j, sum e <= 1.

    Prefers the uniform vector for degree-regular queries, otherwise returns
    the lexicographically smallest optimal solution.
    """
    if allow_uniform and _degree_regular(q):
        unif = Fraction(1, q.k)
        ok = all(
            sum(unif for v in q.variables if v in a.varset) >= r
            for a, r in zip(q.atoms, rhs)
        )
        if ok:
            return [unif] * q.k
    a_ub: list[list[Fraction]] = [[Fraction(1)] * q.k]
    b_ub: list[Fraction] = [Fraction(1)]
    for a, r in zip(q.atoms, rhs):
        a_ub.append([Fraction(-1 if v in a.varset else 0) for v in q.variables])
        b_ub.append(-r)
    return lp.lexmin(a_ub, b_ub, q.k)


def _round_shares(p: int, exponents: Sequence[Fraction]) -> list[int]:
    """Integer shares: floor p^e_i, then greedily grow the biggest deficits
    while the product still fits in p."""
    shares: list[int] = []
    targets: list[float] = []
    for e in exponents:
        t = _pow_float(p, e)
        targets.append(t)
        shares.append(max(1, _floor_pow(p, e)))
    while True:
        prod = math.prod(shares)
        best_i, best_deficit = None, None
        for i, s in enumerate(shares):
            if prod // s * (s + 1) <= p:
                d = targets[i] / s
                if best_deficit is None or d > best_deficit:
                    best_i, best_deficit = i, d
        if best_i is None:
            return shares
        shares[best_i] += 1


def _pow_float(p: int, e: Fraction) -> float:
    return math.exp(float(e) * math.log(p)) if e else 1.0


def _iroot(x: int, r: int) -> int:
    """floor(x ** (1/r)) for integers, exact."""
    if x < 0 or r < 1:
        raise ValueError
    if x in (0, 1) or r == 1:
        return x
    lo, hi = 0, 1 << ((x.bit_length() + r - 1) // r + 1)
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid ** r <= x:
            lo = mid
        else:
            hi = mid
    return lo


def _floor_pow(p: int, e: Fraction) -> int:
    """floor(p^e) with exact integer arithmetic for small denominators."""
    if e <= 0:
        return 1
    if e.denominator <= 64 and e.numerator * math.log(p) < 256:
        return _iroot(p ** e.numerator, e.denominator)
    return int(_pow_float(p, e) + 1e-9)


def optimize_shares_skewfree(q: ConjunctiveQuery, stats: Statistics, p: int) -> ShareAssignment:
    """Shares minimizing the per-relation load for low-skew data.

    The optimum equals the maximum of the load formula over the packing
    polytope's vertices; exponents are recovered as a canonical optimal
    solution of the underlying share LP.
    """
    if p < 2:
        raise PreconditionError("p >= 2 required")
    bad = [j for j, Mj in enumerate(stats.M) if Mj < p]
    if bad:
        names = [q.atoms[j].name for j in bad]
        raise PreconditionError(f"relations smaller than p bits: {names} (M_j >= p assumed)")

    witness, load_bits = max_load_over_vertices(q, stats, p)
    nu = _nu(stats, p)

    # Shift of lambda relative to log_p(max M): max over vertices of
    # (sum u nu - 1) / sum u, computed in exact fractions of the nu data.
    lam_shift = None
    for u in packing_vertices(q):
        s = u.total
        if s == 0:
            continue
        val = (sum(uj * nj for uj, nj in zip(u.weights, nu)) - 1) / s
        if lam_shift is None or val > lam_shift:
            lam_shift = val
    rhs = [nj - lam_shift for nj in nu]
    exps = _canonical_exponents(q, rhs, allow_uniform=stats.equal_sizes)
    shares = _round_shares(p, exps)
    lam = math.log(max(load_bits, 1e-300)) / math.log(p)
    return ShareAssignment(
        q, p, tuple(exps), tuple(shares), lam, load_bits, witness=witness
    )


def optimize_shares_skew_oblivious(q: ConjunctiveQuery, stats: Statistics, p: int) -> ShareAssignment:
    """Shares minimizing the worst-case load over all data distributions.

    The binding quantity per relation is M_j over the *minimum* share among
    its variables, which water-filling solves exactly.
    """
    if p < 2:
        raise PreconditionError("p >= 2 required")
    nu = _nu(stats, p)
    nu_hat = []
    for v in q.variables:
        nu_hat.append(max(nu[j] for j in q.atoms_of(v)))
    # smallest t with sum(max(nu_hat_i - t, 0)) <= 1
    desc = sorted(nu_hat, reverse=True)
    t = None
    prefix = Fraction(0)
    for r, val in enumerate(desc, start=1):
        prefix += val
        cand = (prefix - 1) / r
        if t is None or cand > t:
            t = cand
    mu_max = math.log(max(stats.M)) / math.log(p)
    if mu_max + float(t) < 0:
        t = Fraction(-mu_max).limit_denominator(1 << 40)
    exps = [max(nh - t, Fraction(0)) for nh in nu_hat]
    shares = _round_shares(p, exps)
    # Predicted load: max_j M_j / p^(min share exponent in S_j).
    lam = None
    binding = None
    logp = math.log(p)
    for j, a in enumerate(q.atoms):
        e_min = min(float(exps[q.variables.index(v)]) for v in a.varset)
        cand = math.log(stats.M[j]) / logp - e_min
        if lam is None or cand > lam:
            lam, binding = cand, a.name
    load_bits = math.exp(lam * logp)
    return ShareAssignment(
        q, p, tuple(exps), tuple(shares), lam, load_bits, binding_atom=binding
    )


# -- derived quantities ------------------------------------------------------


def expected_output_size(q: ConjunctiveQuery, stats: Statistics) -> float:
    """Expected answers over uniform per-column-injective inputs:
    n^(k - a) * prod m_j."""
    num = math.prod(stats.m)
    a = q.total_arity
    if a >= q.k:
        return num / (stats.n ** (a - q.k))
    return float(num * stats.n ** (q.k - a))


def replication_lower_bound(q: ConjunctiveQuery, stats: Statistics, L: float) -> float:
    """Minimum average number of times each input bit must be communicated
    by any one-round algorithm with per-server load at most L bits."""
    for j, Mj in enumerate(stats.M):
        if L > Mj:
            raise PreconditionError(
                f"L = {L} exceeds M_{q.atoms[j].name} = {Mj}; bound needs L <= M_j"
            )
    verts = packing_vertices(q)
    c = 0.0
    best = 1.0
    for u in verts:
        s = float(u.total)
        if s == 0:
            continue
        c = max(c, (s / 4.0) ** s)
        term = math.prod((Mj / L) ** float(uj) for Mj, uj in zip(stats.M, u.weights))
        best = max(best, term)
    return c * L / sum(stats.M) * best
