"""Conjunctive queries as hypergraphs: parsing, structure, contraction.

A query is a list of named atoms over shared variables, e.g. the triangle
``S1(x,y),S2(y,z),S3(z,x)``.  Queries are full (every variable is an output
variable) and have no self-joins (relation names are pairwise distinct).
All objects in this module are immutable values; every function is pure.

Note on radius: the literature is not consistent about the radius of the
path query with k edges (both ceil(k/2) and floor(k/2) appear).  This module
uses the standard graph-theoretic radius of the primal graph, which is
ceil(k/2) for a path with k edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence


class QueryError(ValueError):
    """Malformed query text or an operation applied out of its domain."""


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def varset(self) -> frozenset[str]:
        return frozenset(self.args)

    def text(self) -> str:
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class ConjunctiveQuery:
    """A full conjunctive query without self-joins.

    variables: all distinct variables, in first-occurrence order.
    atoms: the atoms, in source order.  Repeated variables inside one atom
    are allowed (they arise from contraction), repeated relation names are
    not.
    """

    variables: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise QueryError("a query needs at least one atom")
        seen_names = set()
        for a in self.atoms:
            if a.name in seen_names:
                raise QueryError(f"self-join: relation {a.name!r} appears twice")
            seen_names.add(a.name)
            if a.arity < 1:
                raise QueryError(f"atom {a.name!r} has arity 0")
        declared = set(self.variables)
        used = set()
        for a in self.atoms:
            for v in a.args:
                if v not in declared:
                    raise QueryError(f"atom {a.name!r} uses undeclared variable {v!r}")
                used.add(v)
        if used != declared:
            unused = sorted(declared - used)
            raise QueryError(f"variables {unused} occur in no atom (query not full)")

    # -- basic accessors -------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def total_arity(self) -> int:
        return sum(a.arity for a in self.atoms)

    def atom_index(self, name: str) -> int:
        for i, a in enumerate(self.atoms):
            if a.name == name:
                return i
        raise KeyError(name)

    def atoms_of(self, var: str) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if var in a.varset]

    def var_positions(self, atom_idx: int) -> dict[str, list[int]]:
        pos: dict[str, list[int]] = {}
        for i, v in enumerate(self.atoms[atom_idx].args):
            pos.setdefault(v, []).append(i)
        return pos

    def text(self) -> str:
        return ",".join(a.text() for a in self.atoms)

    def __str__(self) -> str:
        return self.text()

    def subquery(self, atom_indices: Iterable[int]) -> "ConjunctiveQuery":
        """The query induced by a subset of atoms (variable order inherited)."""
        idx = sorted(set(atom_indices))
        if not idx:
            raise QueryError("empty atom set")
        atoms = tuple(self.atoms[i] for i in idx)
        used = set()
        for a in atoms:
            used |= a.varset
        variables = tuple(v for v in self.variables if v in used)
        return ConjunctiveQuery(variables, atoms)


@dataclass(frozen=True)
class SubqueryHandle:
    """A subset of atoms of a parent query plus its induced variable set."""

    atom_indices: frozenset[int]
    variables: frozenset[str]
    connected: bool


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[(),])")


def parse_query(text: str) -> ConjunctiveQuery:
    """Parse ``Name(v1,...,va)`` atoms joined by commas.

    Whitespace is insignificant.  Raises QueryError with the character
    position on a syntax error.
    """
    pos = 0
    n = len(text)

    def next_token() -> tuple[str, int]:
        nonlocal pos
        m = _TOKEN.match(text, pos)
        if not m:
            raise QueryError(f"syntax error at position {pos}: {text[pos:pos+10]!r}")
        tok = m.group(1)
        at = m.start(1)
        pos = m.end()
        return tok, at

    def expect(sym: str):
        tok, at = next_token()
        if tok != sym:
            raise QueryError(f"expected {sym!r} at position {at}, got {tok!r}")

    atoms: list[Atom] = []
    variables: list[str] = []
    seen_vars = set()
    while True:
        name, at = next_token()
        if name in "(),":
            raise QueryError(f"expected relation name at position {at}, got {name!r}")
        expect("(")
        args: list[str] = []
        while True:
            var, vat = next_token()
            if var in "(),":
                raise QueryError(f"expected variable at position {vat}, got {var!r}")
            args.append(var)
            if var not in seen_vars:
                seen_vars.add(var)
                variables.append(var)
            tok, at = next_token()
            if tok == ")":
                break
            if tok != ",":
                raise QueryError(f"expected ',' or ')' at position {at}, got {tok!r}")
        atoms.append(Atom(name, tuple(args)))
        if pos >= n or not text[pos:].strip():
            break
        expect(",")
    return ConjunctiveQuery(tuple(variables), tuple(atoms))


# -- structural analysis -------------------------------------------------


def _atom_adjacency(q: ConjunctiveQuery, atom_indices: Sequence[int]) -> dict[int, set[int]]:
    by_var: dict[str, list[int]] = {}
    for i in atom_indices:
        for v in q.atoms[i].varset:
            by_var.setdefault(v, []).append(i)
    adj: dict[int, set[int]] = {i: set() for i in atom_indices}
    for members in by_var.values():
        for a, b in combinations(members, 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _components(q: ConjunctiveQuery, atom_indices: Sequence[int]) -> list[list[int]]:
    adj = _atom_adjacency(q, atom_indices)
    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in atom_indices:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nb in adj[cur]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(sorted(comp))
    return comps


def connected_components(q: ConjunctiveQuery) -> list[SubqueryHandle]:
    """Partition the atoms into maximal variable-connected groups."""
    handles = []
    for comp in _components(q, range(q.num_atoms)):
        vs = frozenset().union(*(q.atoms[i].varset for i in comp))
        handles.append(SubqueryHandle(frozenset(comp), vs, True))
    return handles


def is_connected(q: ConjunctiveQuery) -> bool:
    return len(_components(q, range(q.num_atoms))) == 1


def characteristic(q: ConjunctiveQuery) -> int:
    """total arity - #variables - #atoms + #components (always >= 0)."""
    c = len(_components(q, range(q.num_atoms)))
    return q.total_arity - q.k - q.num_atoms + c


def is_tree_like(q: ConjunctiveQuery) -> bool:
    return is_connected(q) and characteristic(q) == 0


def contract(q: ConjunctiveQuery, atom_indices: Iterable[int]) -> ConjunctiveQuery:
    """Contract the given atoms: merge the variables of each connected group
    of contracted atoms into the group's first-occurring variable, drop the
    contracted atoms, and rewrite the rest.

    Contracting the empty set returns the query unchanged.  Contracting
    everything is an error only if it would leave no atoms.
    """
    m = sorted(set(atom_indices))
    if not m:
        return q
    for i in m:
        if not 0 <= i < q.num_atoms:
            raise QueryError(f"atom index {i} out of range")
    rep: dict[str, str] = {}
    order = {v: i for i, v in enumerate(q.variables)}
    for comp in _components(q, m):
        vs = set()
        for i in comp:
            vs |= q.atoms[i].varset
        first = min(vs, key=order.__getitem__)
        for v in vs:
            rep[v] = first
    keep = [i for i in range(q.num_atoms) if i not in set(m)]
    if not keep:
        raise QueryError("contraction would remove every atom")
    atoms = tuple(
        Atom(q.atoms[i].name, tuple(rep.get(v, v) for v in q.atoms[i].args))
        for i in keep
    )
    used = set()
    for a in atoms:
        used |= a.varset
    variables = tuple(v for v in q.variables if v in used)
    return ConjunctiveQuery(variables, atoms)


def primal_graph(q: ConjunctiveQuery) -> dict[str, set[str]]:
    """Variables adjacent iff they co-occur in some atom."""
    adj: dict[str, set[str]] = {v: set() for v in q.variables}
    for a in q.atoms:
        vs = sorted(a.varset)
        for u, w in combinations(vs, 2):
            adj[u].add(w)
            adj[w].add(u)
    return adj


def _bfs_dist(adj: dict[str, set[str]], src: str) -> dict[str, int]:
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def radius_diameter(q: ConjunctiveQuery) -> tuple[int, int]:
    """(radius, diameter) of the primal graph; rejects disconnected queries."""
    if not is_connected(q):
        raise QueryError("radius/diameter are defined for connected queries only")
    adj = primal_graph(q)
    ecc = {}
    for v in q.variables:
        dist = _bfs_dist(adj, v)
        ecc[v] = max(dist.values())
    return min(ecc.values()), max(ecc.values())


def center_variable(q: ConjunctiveQuery) -> str:
    """A variable of minimum eccentricity (first-occurrence order breaks ties)."""
    adj = primal_graph(q)
    best, best_ecc = None, None
    for v in q.variables:
        e = max(_bfs_dist(adj, v).values())
        if best_ecc is None or e < best_ecc:
            best, best_ecc = v, e
    return best


MAX_SUBQUERY_ATOMS = 20


def enumerate_connected_subqueries(
    q: ConjunctiveQuery,
    minimal_filter: Optional[Callable[[SubqueryHandle], bool]] = None,
) -> list[SubqueryHandle]:
    """All nonempty connected atom subsets of q.

    With minimal_filter, keep only subsets satisfying the predicate none of
    whose proper connected subsets satisfy it.  Guarded to 20 atoms.
    """
    if q.num_atoms > MAX_SUBQUERY_ATOMS:
        raise QueryError(f"subquery enumeration guarded to {MAX_SUBQUERY_ATOMS} atoms")
    adj = _atom_adjacency(q, range(q.num_atoms))

    connected: list[frozenset[int]] = []

    # Standard connected-subset enumeration: each subset is generated exactly
    # once from its minimum element by growing only through allowed vertices.
    def grow(current: set[int], frontier: set[int], banned: set[int]):
        connected.append(frozenset(current))
        candidates = sorted(frontier - banned)
        newly_banned = set(banned)
        for v in candidates:
            new_frontier = (frontier | adj[v]) - current - {v}
            grow(current | {v}, new_frontier, set(newly_banned))
            newly_banned.add(v)

    for start in range(q.num_atoms):
        grow({start}, set(adj[start]), set(range(start + 1)))

    def handle(s: frozenset[int]) -> SubqueryHandle:
        vs = frozenset().union(*(q.atoms[i].varset for i in s))
        return SubqueryHandle(s, vs, True)

    if minimal_filter is None:
        return [handle(s) for s in sorted(connected, key=lambda s: (len(s), sorted(s)))]

    satisfying = [s for s in connected if minimal_filter(handle(s))]
    satisfying.sort(key=len)
    minimal: list[frozenset[int]] = []
    for s in satisfying:
        if not any(t < s for t in minimal):
            minimal.append(s)
    return [handle(s) for s in sorted(minimal, key=lambda s: (len(s), sorted(s)))]


# -- common query families ------------------------------------------------


def line_query(k: int) -> ConjunctiveQuery:
    """S1(x0,x1),...,Sk(x_{k-1},x_k): a path with k binary atoms."""
    if k < 1:
        raise QueryError("k >= 1")
    atoms = tuple(Atom(f"S{j}", (f"x{j-1}", f"x{j}")) for j in range(1, k + 1))
    return ConjunctiveQuery(tuple(f"x{i}" for i in range(k + 1)), atoms)


def cycle_query(k: int) -> ConjunctiveQuery:
    """S1(x1,x2),...,Sk(xk,x1): a cycle with k binary atoms."""
    if k < 3:
        raise QueryError("k >= 3")
    atoms = tuple(
        Atom(f"S{j}", (f"x{j}", f"x{j % k + 1}")) for j in range(1, k + 1)
    )
    return ConjunctiveQuery(tuple(f"x{i}" for i in range(1, k + 1)), atoms)


def star_query(k: int) -> ConjunctiveQuery:
    """S1(z,x1),...,Sk(z,xk): all atoms share the hub variable z."""
    if k < 1:
        raise QueryError("k >= 1")
    atoms = tuple(Atom(f"S{j}", ("z", f"x{j}")) for j in range(1, k + 1))
    return ConjunctiveQuery(("z",) + tuple(f"x{i}" for i in range(1, k + 1)), atoms)


def spokes_query(k: int) -> ConjunctiveQuery:
    """R1(z,x1),S1(x1,y1),...: k two-hop spokes hanging off a hub z."""
    if k < 1:
        raise QueryError("k >= 1")
    atoms = []
    variables = ["z"]
    for j in range(1, k + 1):
        atoms.append(Atom(f"R{j}", ("z", f"x{j}")))
        atoms.append(Atom(f"S{j}", (f"x{j}", f"y{j}")))
        variables += [f"x{j}", f"y{j}"]
    return ConjunctiveQuery(tuple(variables), tuple(atoms))


def clique_query(k: int) -> ConjunctiveQuery:
    """One binary atom per pair of k variables (K_k)."""
    if k < 2:
        raise QueryError("k >= 2")
    atoms = []
    j = 0
    for a, b in combinations(range(1, k + 1), 2):
        j += 1
        atoms.append(Atom(f"S{j}", (f"x{a}", f"x{b}")))
    return ConjunctiveQuery(tuple(f"x{i}" for i in range(1, k + 1)), tuple(atoms))


def binom_query(k: int, m: int) -> ConjunctiveQuery:
    """One m-ary atom per m-subset of k variables (the paper-style B_{k,m})."""
    if not 1 <= m <= k:
        raise QueryError("need 1 <= m <= k")
    atoms = []
    for idx in combinations(range(1, k + 1), m):
        name = "S" + "".join(str(i) for i in idx)
        atoms.append(Atom(name, tuple(f"x{i}" for i in idx)))
    return ConjunctiveQuery(tuple(f"x{i}" for i in range(1, k + 1)), tuple(atoms))


_FAMILY = re.compile(r"^(C|L|T|SP|K)(\d+)$")


def query_from_name(text: str) -> ConjunctiveQuery:
    """Resolve a family shorthand (C3, L5, T2, SP2, K4, K4m1, B32) or parse
    the text as a query."""
    t = text.strip()
    m = _FAMILY.match(t)
    if m:
        fam, k = m.group(1), int(m.group(2))
        return {
            "C": cycle_query,
            "L": line_query,
            "T": star_query,
            "SP": spokes_query,
            "K": clique_query,
        }[fam](k)
    if re.match(r"^B(\d)(\d)$", t):
        k, mm = int(t[1]), int(t[2])
        return binom_query(k, mm)
    if t == "K4m1":
        q = clique_query(4)
        return q.subquery(range(q.num_atoms - 1))
    return parse_query(t)
