"""Enumerate every mechanism table satisfying a set of axioms.

``exhaustive`` mode walks the whole table space and filters with the checkers in
:mod:`hallot.axioms`; it is only feasible for n <= 2. ``propagated`` mode treats
each profile as a variable over the n! allocations and solves a binary
constraint problem by backtracking with arc consistency:

* strategy-proofness and non-bossiness link profiles that differ in one agent's
  preference;
* tie-breaking axioms add one two-valued variable per agent pair (global) or
  per pair and context (local), fixing which of the two is served first
  whenever they agree;
* the identical preferences lower bound links each profile to the unanimous
  profile of every agent's ranking;
* Pareto and pairwise efficiency prune domains up front.

Group strategy-proofness is searched as strategy-proofness plus non-bossiness,
and every solution is re-checked against the direct definition.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .axioms import canonical_axiom, check
from .core import DomainTooLargeError, InvalidDomainError, get_domain
from .mechanisms import MechanismTable, all_hierarchies, all_priorities, materialize, sd_mechanism, seqd_mechanism

EXHAUSTIVE_LIMIT = 2**20
PROPAGATED_MAX_N = 3
PROPAGATED_AXIOMS = {"sp", "nb", "gsp", "monotonic", "gctb", "lctb", "iplb", "pareto", "pairwise"}


@dataclass
class SearchSpec:
    n: int
    axioms: tuple[str, ...]
    mode: str = "propagated"
    limit: int | None = None
    ordering: str = "seeded"

    def __post_init__(self):
        self.axioms = tuple(sorted({canonical_axiom(a) for a in self.axioms}))
        if self.mode not in ("exhaustive", "propagated"):
            raise InvalidDomainError(f"mode must be exhaustive or propagated, got {self.mode!r}")
        if self.ordering not in ("seeded", "mrv", "index"):
            raise InvalidDomainError(f"unknown variable ordering {self.ordering!r}")
        if self.mode == "exhaustive":
            m = math.factorial(self.n)
            if m ** (m**self.n) > EXHAUSTIVE_LIMIT:
                raise DomainTooLargeError(
                    f"exhaustive search needs (n!)^((n!)^n) <= 2^20 tables (n <= 2); n={self.n} is too large"
                )
        else:
            if self.n > PROPAGATED_MAX_N:
                raise DomainTooLargeError(f"propagated search is limited to n <= {PROPAGATED_MAX_N}, got n={self.n}")
            unsupported = set(self.axioms) - PROPAGATED_AXIOMS
            if unsupported:
                raise InvalidDomainError(
                    f"propagated search cannot encode {sorted(unsupported)}; supported: {sorted(PROPAGATED_AXIOMS)}"
                )

    def to_dict(self):
        return {"n": self.n, "axioms": list(self.axioms), "mode": self.mode, "limit": self.limit,
                "ordering": self.ordering}


@dataclass
class SearchResult:
    spec: SearchSpec
    tables: list[MechanismTable] = field(default_factory=list)
    nodes: int = 0
    complete: bool = True

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "count": len(self.tables),
            "tables": [t.to_dict() for t in self.tables],
            "nodes": self.nodes,
            "complete": self.complete,
        }


def enumerate_mechanisms(spec: SearchSpec) -> SearchResult:
    if spec.mode == "exhaustive":
        result = _exhaustive(spec)
    else:
        result = _Solver(spec).run()
        _recheck(result)
    result.tables.sort()
    return result


def _exhaustive(spec):
    dom = get_domain(spec.n)
    result = SearchResult(spec)
    for entries in itertools.product(range(dom.m), repeat=dom.size):
        result.nodes += 1
        t = MechanismTable(spec.n, entries)
        if all(check(t, a).holds for a in spec.axioms):
            result.tables.append(t)
            if spec.limit is not None and len(result.tables) >= spec.limit:
                result.complete = False
                break
    return result


def _recheck(result):
    """Every propagated solution must pass each requested axiom's own checker."""
    for t in result.tables:
        for a in result.spec.axioms:
            opts = {"mode": "direct"} if a in ("gsp", "monotonic") else {}
            if not check(t, a, **opts).holds:
                raise AssertionError(f"search produced a table failing {a}")


# -- propagated search -------------------------------------------------------------

_BITS = [tuple(b for b in range(8) if mask >> b & 1) for mask in range(1 << 8)]


class _Solver:
    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.dom = dom = get_domain(spec.n)
        axioms = set(spec.axioms)
        if axioms & {"gsp", "monotonic"}:
            axioms |= {"sp", "nb"}
        self.axioms = axioms
        self.allocs = dom.perms  # allocation a gives agent i object allocs[a, i]
        self.full_mask = (1 << dom.m) - 1
        self.domains = [self.full_mask] * dom.size
        self.arcs: dict[tuple[int, int], list[int]] = {}
        self._unary()
        if "sp" in axioms or "nb" in axioms:
            self._single_agent_links()
        if "iplb" in axioms:
            self._iplb_links()
        if "gctb" in axioms:
            self._tie_break_links(local=False)
        if "lctb" in axioms:
            self._tie_break_links(local=True)
        # rev[v]: arcs (u, table) to re-revise when v's domain shrinks
        self.rev: list[list[tuple[int, list[int]]]] = [[] for _ in self.domains]
        for (u, v), table in self.arcs.items():
            self.rev[v].append((u, table))
        self.order = self._static_order()

    # building ------------------------------------------------------------------

    def _new_var(self, size):
        self.domains.append((1 << size) - 1)
        return len(self.domains) - 1

    def _link(self, u, v, compat):
        """Add constraint ``compat[a][b]`` between var u (value a) and var v (value b)."""
        fwd = [sum(1 << b for b, ok in enumerate(row) if ok) for row in compat]
        bwd = [sum(1 << a for a, row in enumerate(compat) if row[b]) for b in range(len(compat[0]))]
        for key, table in (((u, v), fwd), ((v, u), bwd)):
            if key in self.arcs:
                self.arcs[key] = [x & y for x, y in zip(self.arcs[key], table)]
            else:
                self.arcs[key] = table

    def _unary(self):
        dom, allocs = self.dom, self.allocs
        if not self.axioms & {"pareto", "pairwise"}:
            return
        for r in range(dom.size):
            ranks = dom.rank[dom.profiles[r][:, None], allocs.T].T  # ranks[a, i]
            mask = 0
            for a in range(dom.m):
                ok = True
                if "pareto" in self.axioms:
                    diff = ranks - ranks[a]
                    ok = not ((diff <= 0).all(axis=1) & (diff < 0).any(axis=1)).any()
                if ok and "pairwise" in self.axioms:
                    ok = not any(
                        ranks[a, i] > dom.rank[dom.profiles[r, i], allocs[a, j]]
                        and ranks[a, j] > dom.rank[dom.profiles[r, j], allocs[a, i]]
                        for i, j in itertools.combinations(range(dom.n), 2)
                    )
                if ok:
                    mask |= 1 << a
            self.domains[r] = mask

    def _single_agent_links(self):
        dom, allocs, rank = self.dom, self.allocs, self.dom.rank
        cache = {}
        for r in range(dom.size):
            for i in range(dom.n):
                p = int(dom.profiles[r, i])
                for q in range(p + 1, dom.m):
                    r2 = int(r + (q - p) * dom.strides[i])
                    key = (i, p, q)
                    if key not in cache:
                        compat = [[True] * dom.m for _ in range(dom.m)]
                        for a in range(dom.m):
                            for b in range(dom.m):
                                oa, ob = allocs[a, i], allocs[b, i]
                                ok = True
                                if "sp" in self.axioms:
                                    ok = rank[p, oa] <= rank[p, ob] and rank[q, ob] <= rank[q, oa]
                                if ok and "nb" in self.axioms and oa == ob:
                                    ok = a == b
                                compat[a][b] = ok
                        cache[key] = compat
                    self._link(r, r2, cache[key])

    def _iplb_links(self):
        dom, allocs, rank = self.dom, self.allocs, self.dom.rank
        for r in range(dom.size):
            for i in range(dom.n):
                p = int(dom.profiles[r, i])
                u = dom.unanimous_index(p)
                if u == r:
                    continue
                compat = [[rank[p, allocs[a, i]] <= rank[p, allocs[b, i]] for b in range(dom.m)]
                          for a in range(dom.m)]
                self._link(r, u, compat)

    def _tie_break_links(self, local):
        """Direction variable d: 0 means the lower-numbered agent of the pair is
        served first whenever the two agree, 1 the other one."""
        dom, allocs, rank = self.dom, self.allocs, self.dom.rank
        for i, j in itertools.combinations(range(dom.n), 2):
            shared = None if local else self._new_var(2)
            blocks = {}
            for r in range(dom.size):
                p = int(dom.profiles[r, i])
                if p != dom.profiles[r, j]:
                    continue
                if local:
                    ctx = r - p * int(dom.strides[i]) - p * int(dom.strides[j])
                    if ctx not in blocks:
                        blocks[ctx] = self._new_var(2)
                    var = blocks[ctx]
                else:
                    var = shared
                compat = [[(rank[p, allocs[a, i]] < rank[p, allocs[a, j]]) == (d == 0) for d in range(2)]
                          for a in range(dom.m)]
                self._link(r, var, compat)

    def _static_order(self):
        dom = self.dom
        if self.spec.ordering == "index":
            return list(range(dom.size))
        seeds = [dom.unanimous_index(p) for p in range(dom.m)]
        seen, order = set(seeds), list(seeds)
        queue = deque(seeds)
        while queue:
            r = queue.popleft()
            for i in range(dom.n):
                p = int(dom.profiles[r, i])
                for q in range(dom.m):
                    r2 = int(r + (q - p) * dom.strides[i])
                    if r2 not in seen:
                        seen.add(r2)
                        order.append(r2)
                        queue.append(r2)
        return order

    # solving ---------------------------------------------------------------------

    def _propagate(self, domains, changed):
        rev = self.rev
        queue = deque(changed)
        queued = set(changed)
        while queue:
            v = queue.popleft()
            queued.discard(v)
            dv = domains[v]
            for u, table in rev[v]:
                du = domains[u]
                new = du
                for a in _BITS[du]:
                    if not table[a] & dv:
                        new &= ~(1 << a)
                if new != du:
                    if not new:
                        return False
                    domains[u] = new
                    if u not in queued:
                        queued.add(u)
                        queue.append(u)
        return True

    def _select(self, domains):
        n_profiles = self.dom.size
        if self.spec.ordering == "mrv":
            best, best_size = None, None
            for v in range(n_profiles):
                size = len(_BITS[domains[v]])
                if size > 1 and (best is None or size < best_size):
                    best, best_size = v, size
            return best
        for v in self.order:
            if len(_BITS[domains[v]]) > 1:
                return v
        return None

    def run(self) -> SearchResult:
        result = SearchResult(self.spec)
        domains = list(self.domains)
        if not self._propagate(domains, range(len(domains))):
            return result
        limit = self.spec.limit
        stack = [domains]
        while stack:
            domains = stack.pop()
            var = self._select(domains)
            if var is None:
                result.tables.append(
                    MechanismTable(self.dom.n, [_BITS[d][0] for d in domains[: self.dom.size]])
                )
                if limit is not None and len(result.tables) >= limit:
                    result.complete = not stack
                    break
                continue
            branches = []
            for a in _BITS[domains[var]]:
                result.nodes += 1
                child = list(domains)
                child[var] = 1 << a
                if self._propagate(child, [var]):
                    branches.append(child)
            stack.extend(reversed(branches))
        return result


def family_tables(n: int, family: str) -> list[MechanismTable]:
    if family == "serial":
        tables = [materialize(sd_mechanism(pi), n) for pi in all_priorities(n)]
    elif family == "sequential":
        tables = [materialize(seqd_mechanism(h), n) for h in all_hierarchies(n)]
    else:
        raise InvalidDomainError(f"family must be serial or sequential, got {family!r}")
    return sorted(tables)


def cross_validate(result: SearchResult, family: str) -> bool:
    """Set equality between the search output and the materialized family."""
    found = {t.key() for t in result.tables}
    expected = {t.key() for t in family_tables(result.spec.n, family)}
    return found == expected


def table_keys(tables) -> set[bytes]:
    return {t.key() for t in tables}


def random_tables(n: int, count: int, seed: int = 0) -> list[MechanismTable]:
    rng = np.random.default_rng(seed)
    dom = get_domain(n)
    return [MechanismTable(n, rng.integers(0, dom.m, dom.size), label=f"random{k}") for k in range(count)]
