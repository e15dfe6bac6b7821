"""Serial and sequential dictatorships, constant mechanisms, counterexamples.

A :class:`Mechanism` is evaluated profile by profile. :func:`materialize` turns
one into a :class:`MechanismTable`, the explicit form every checker consumes.
Mechanisms may carry a vectorized evaluator over the whole domain; it is only a
speed path and must agree with the per-profile rule.
"""
from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .core import (
    Allocation,
    Domain,
    HallotError,
    InvalidDomainError,
    ParseError,
    Priority,
    Profile,
    get_domain,
    is_bijection,
    object_names,
    top,
)

Path = tuple[tuple[int, int], ...]


class StructureError(HallotError, ValueError):
    """A hierarchy or table that violates its structural invariants."""


class Mechanism:
    def __init__(
        self,
        rule: Callable[[Profile], Allocation],
        label: str,
        vectorized: Callable[[Domain], np.ndarray] | None = None,
        n: int | None = None,
    ):
        self.rule = rule
        self.label = label
        self.vectorized = vectorized
        self.n = n

    def __call__(self, profile: Profile) -> Allocation:
        return tuple(self.rule(profile))

    def __repr__(self):
        return f"Mechanism({self.label!r})"


# -- serial dictatorship ---------------------------------------------------------


def check_priority(priority: Sequence[int], n: int | None = None) -> Priority:
    priority = tuple(int(a) for a in priority)
    if sorted(priority) != list(range(len(priority))) or (n is not None and len(priority) != n):
        raise InvalidDomainError(f"priority {priority} is not a permutation of the agents")
    return priority


def serial_dictatorship(priority: Priority, profile: Profile) -> Allocation:
    """Agents in ``priority`` order each take their best remaining object."""
    if len(priority) != len(profile):
        raise InvalidDomainError("priority and profile cover different agent sets")
    remaining = set(range(len(profile)))
    alloc = [-1] * len(profile)
    for agent in priority:
        alloc[agent] = top(profile[agent], remaining)
        remaining.discard(alloc[agent])
    return tuple(alloc)


def _sd_entries(dom: Domain, priority: Priority) -> np.ndarray:
    alloc = _kernels.serial_dictatorship(dom.profiles, dom.rank, np.asarray(priority, dtype=np.int64))
    return _kernels.perm_indices(alloc)


def sd_mechanism(priority: Sequence[int]) -> Mechanism:
    priority = check_priority(priority)
    label = "sd(" + ",".join(str(a + 1) for a in priority) + ")"
    return Mechanism(
        lambda profile: serial_dictatorship(priority, profile),
        label,
        vectorized=lambda dom: _sd_entries(dom, priority),
        n=len(priority),
    )


def all_priorities(n: int) -> list[Priority]:
    return list(itertools.permutations(range(n)))


# -- sequential dictatorship -------------------------------------------------------


class Hierarchy:
    """Decision tree naming the next dictator from the (dictator, object) history.

    ``children`` maps a non-empty path of ``(agent, object)`` picks to the agent
    who picks next. Entries where only one agent is left may be omitted; they are
    dropped on construction, so equal trees compare equal.
    """

    def __init__(self, n: int, root: int, children: Mapping[Path, int]):
        self.n = n
        self.root = root
        self.children = self._validate(n, root, {tuple(map(tuple, k)): v for k, v in children.items()})

    @staticmethod
    def _validate(n, root, children):
        if not 0 <= root < n:
            raise StructureError(f"root agent {root} outside 0..{n - 1}")
        kept = {}
        reachable = set()
        stack: list[tuple[Path, int]] = [((), root)]
        while stack:
            path, agent = stack.pop()
            used_objects = {o for _, o in path}
            placed = {a for a, _ in path} | {agent}
            for o in range(n):
                if o in used_objects:
                    continue
                child = path + ((agent, o),)
                left = [a for a in range(n) if a not in placed]
                if not left:
                    continue
                reachable.add(child)
                nxt = children.get(child)
                if len(left) == 1:
                    if nxt is not None and nxt != left[0]:
                        raise StructureError(f"path {child}: only agent {left[0]} remains, got {nxt}")
                    stack.append((child, left[0]))
                    continue
                if nxt is None:
                    raise StructureError(f"hierarchy incomplete: no next dictator after {child}")
                if nxt not in left:
                    raise StructureError(f"path {child}: agent {nxt} is already placed or invalid")
                kept[child] = nxt
                stack.append((child, nxt))
        for key in children:
            if key not in reachable:
                raise StructureError(f"path {key} is not reachable in this hierarchy")
        return kept

    @classmethod
    def from_priority(cls, priority: Sequence[int]) -> "Hierarchy":
        priority = check_priority(priority)
        n = len(priority)
        children = {}
        for path in _paths_along(priority):
            if len(path) < n - 1:
                children[path] = priority[len(path)]
        return cls(n, priority[0], children)

    def next_dictator(self, path: Path) -> int:
        if not path:
            return self.root
        if path in self.children:
            return self.children[path]
        placed = {a for a, _ in path}
        left = [a for a in range(self.n) if a not in placed]
        if len(left) == 1:
            return left[0]
        raise KeyError(path)

    def key(self):
        return (self.n, self.root, tuple(sorted(self.children.items())))

    def __eq__(self, other):
        return isinstance(other, Hierarchy) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Hierarchy(n={self.n}, root={self.root}, nodes={len(self.children)})"

    def to_dict(self, objects: Sequence[str] | None = None) -> dict:
        names = list(objects) if objects is not None else object_names(self.n)
        return {
            "n": self.n,
            "root": self.root + 1,
            "children": {
                ",".join(f"{a + 1}:{names[o]}" for a, o in path): agent + 1
                for path, agent in sorted(self.children.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict, objects: Sequence[str] | None = None) -> "Hierarchy":
        n = int(data["n"])
        names = list(objects) if objects is not None else object_names(n)
        lookup = {name: k for k, name in enumerate(names)}
        children = {}
        for key, agent in data["children"].items():
            path = []
            for step in key.split(","):
                a, o = step.split(":")
                path.append((int(a) - 1, lookup[o]))
            children[tuple(path)] = int(agent) - 1
        return cls(n, int(data["root"]) - 1, children)


def _paths_along(priority):
    """Every path a serial dictatorship with ``priority`` can produce."""
    n = len(priority)

    def rec(path):
        yield path
        k = len(path)
        if k == n:
            return
        used = {o for _, o in path}
        for o in range(n):
            if o not in used:
                yield from rec(path + ((priority[k], o),))

    yield from (p for p in rec(()) if p)


def all_hierarchies(n: int) -> Iterator[Hierarchy]:
    """Every complete hierarchy over ``n`` agents; 24 of them when n=3."""

    def expand(frontier, children):
        # frontier: list of (path, agent) nodes whose children are still unset
        if not frontier:
            yield dict(children)
            return
        (path, agent), rest = frontier[0], frontier[1:]
        used = {o for _, o in path}
        placed = {a for a, _ in path} | {agent}
        left = [a for a in range(n) if a not in placed]
        if len(left) <= 1:
            yield from expand(rest, children)
            return
        slots = [path + ((agent, o),) for o in range(n) if o not in used]
        for choice in itertools.product(left, repeat=len(slots)):
            new = dict(children)
            new.update(zip(slots, choice))
            yield from expand(list(zip(slots, choice)) + rest, new)

    for root in range(n):
        for children in expand([((), root)], {}):
            yield Hierarchy(n, root, children)


def sequential_dictatorship(h: Hierarchy, profile: Profile) -> Allocation:
    n = len(profile)
    if n != h.n:
        raise InvalidDomainError(f"hierarchy over {h.n} agents, profile over {n}")
    remaining = set(range(n))
    alloc = [-1] * n
    path: Path = ()
    while len(path) < n:
        agent = h.next_dictator(path)
        obj = top(profile[agent], remaining)
        alloc[agent] = obj
        remaining.discard(obj)
        path = path + ((agent, obj),)
    return tuple(alloc)


def _hierarchy_entries(dom: Domain, h: Hierarchy) -> np.ndarray:
    n = dom.n
    alloc = np.full((dom.size, n), -1, dtype=np.int64)
    full = (1 << n) - 1
    stack = [((), np.arange(dom.size), full)]
    while stack:
        path, rows, free = stack.pop()
        if len(path) == n or rows.size == 0:
            continue
        agent = h.next_dictator(path)
        picks = dom.top_among[dom.profiles[rows, agent], free]
        alloc[rows, agent] = picks
        for o in range(n):
            if free >> o & 1:
                stack.append((path + ((agent, o),), rows[picks == o], free & ~(1 << o)))
    return _kernels.perm_indices(alloc)


def seqd_mechanism(h: Hierarchy) -> Mechanism:
    return Mechanism(
        lambda profile: sequential_dictatorship(h, profile),
        f"seqd(root={h.root + 1})",
        vectorized=lambda dom: _hierarchy_entries(dom, h),
        n=h.n,
    )


# -- constant and counterexample mechanisms ---------------------------------------


def constant_mechanism(x: Sequence[int]) -> Mechanism:
    x = tuple(int(o) for o in x)
    if not is_bijection(x, len(x)):
        raise InvalidDomainError(f"{x} is not an allocation")

    def vectorized(dom):
        return np.full(dom.size, dom.perm_index(x), dtype=np.int64)

    return Mechanism(lambda profile: x, "constant(" + ",".join(map(str, x)) + ")", vectorized, n=len(x))


def _branch(label, cond, vcond, if_true: Mechanism, if_false: Mechanism, n=None) -> Mechanism:
    """``if_true`` where ``cond(profile)`` holds, ``if_false`` elsewhere."""

    def rule(profile):
        return if_true(profile) if cond(profile) else if_false(profile)

    def vectorized(dom):
        mask = vcond(dom.profiles)
        return np.where(mask, materialize(if_true, dom.n).entries, materialize(if_false, dom.n).entries)

    return Mechanism(rule, label, vectorized, n=n)


def _all_distinct(profile):
    return len(set(profile)) == len(profile)


def _v_all_distinct(prof):
    s = np.sort(prof, axis=1)
    return (np.diff(s, axis=1) != 0).all(axis=1)


def _ith_best_of_first(profile):
    """Agent i receives the i-th best object of agent 1's ranking."""
    return tuple(profile[0])


def _ith_best_mechanism(n):
    def vectorized(dom):
        return dom.profiles[:, 0].copy()

    return Mechanism(_ith_best_of_first, "y(R1)", vectorized, n=n)


IDENTITY3 = (0, 1, 2)
SWAP23 = (0, 2, 1)


def _require_n3(*priorities):
    for p in priorities:
        if len(p) != 3:
            raise InvalidDomainError("this mechanism is defined for three agents")


def ex1_sp_violation(pi=IDENTITY3, pi_prime=SWAP23) -> Mechanism:
    """f^pi when agents 2 and 3 report the same ranking, f^pi' otherwise."""
    pi, pi_prime = check_priority(pi), check_priority(pi_prime)
    _require_n3(pi, pi_prime)
    return _branch(
        "ex1_sp_violation",
        lambda R: R[1] == R[2],
        lambda P: P[:, 1] == P[:, 2],
        sd_mechanism(pi),
        sd_mechanism(pi_prime),
        n=3,
    )


def ex2_bossy(pi=IDENTITY3, pi_prime=SWAP23, x: int = 1) -> Mechanism:
    """f^pi when agent 1 ranks object ``x`` second, f^pi' otherwise."""
    pi, pi_prime = check_priority(pi), check_priority(pi_prime)
    _require_n3(pi, pi_prime)
    if not 0 <= x < 3:
        raise InvalidDomainError(f"object {x} outside 0..2")

    def vcond(P):
        return get_domain(3).perms[P[:, 0], 1] == x

    return _branch("ex2_bossy", lambda R: R[0][1] == x, vcond, sd_mechanism(pi), sd_mechanism(pi_prime), n=3)


def pareto_not_gctb(pi: Sequence[int] = IDENTITY3) -> Mechanism:
    """f^pi when agents 1 and 2 agree, the reversed serial dictatorship otherwise."""
    pi = check_priority(pi)
    if len(pi) < 3:
        raise InvalidDomainError("this mechanism needs at least three agents")
    return _branch(
        "pareto_not_gctb",
        lambda R: R[0] == R[1],
        lambda P: P[:, 0] == P[:, 1],
        sd_mechanism(pi),
        sd_mechanism(pi[::-1]),
        n=len(pi),
    )


def gctb_not_pareto(pi: Sequence[int] = IDENTITY3, x: Sequence[int] | None = None) -> Mechanism:
    """Fixed allocation ``x`` when all rankings differ, f^pi otherwise."""
    pi = check_priority(pi)
    x = tuple(range(len(pi))) if x is None else tuple(x)
    return _branch(
        "gctb_not_pareto",
        _all_distinct,
        _v_all_distinct,
        constant_mechanism(x),
        sd_mechanism(pi),
        n=len(pi),
    )


def neutral_not_gctb(pi=IDENTITY3, pi_prime=SWAP23) -> Mechanism:
    """f^pi at unanimous profiles, f^pi' otherwise."""
    pi, pi_prime = check_priority(pi), check_priority(pi_prime)
    _require_n3(pi, pi_prime)
    return _branch(
        "neutral_not_gctb",
        lambda R: R[0] == R[1] == R[2],
        lambda P: (P[:, 0] == P[:, 1]) & (P[:, 1] == P[:, 2]),
        sd_mechanism(pi),
        sd_mechanism(pi_prime),
        n=3,
    )


def gctb_not_nonbossy(pi=IDENTITY3) -> Mechanism:
    """f^pi when agents 2 and 3 agree; otherwise agent i gets agent 1's i-th best object."""
    pi = check_priority(pi)
    _require_n3(pi)
    return _branch(
        "gctb_not_nonbossy",
        lambda R: R[1] == R[2],
        lambda P: P[:, 1] == P[:, 2],
        sd_mechanism(pi),
        _ith_best_mechanism(3),
        n=3,
    )


COUNTEREXAMPLES: dict[str, Callable[..., Mechanism]] = {
    "ex1_sp_violation": ex1_sp_violation,
    "ex2_bossy": ex2_bossy,
    "ex3_constant": lambda x=IDENTITY3: constant_mechanism(x),
    "pareto_not_gctb": pareto_not_gctb,
    "gctb_not_pareto": gctb_not_pareto,
    "neutral_not_gctb": neutral_not_gctb,
    "gctb_not_nonbossy": gctb_not_nonbossy,
}


def counterexample(name: str, **params) -> Mechanism:
    try:
        build = COUNTEREXAMPLES[name]
    except KeyError:
        raise InvalidDomainError(f"unknown counterexample {name!r}; valid names: {', '.join(COUNTEREXAMPLES)}") from None
    m = build(**params)
    m.label = name
    return m


# -- tables --------------------------------------------------------------------------


class MechanismTable:
    """A mechanism written out over every profile: ``entries[r]`` is the
    canonical index of the allocation chosen at profile ``r``."""

    def __init__(self, n: int, entries, objects: Sequence[str] | None = None, label: str = ""):
        dom = get_domain(n)
        entries = np.array(entries, dtype=np.int64)
        if entries.shape != (dom.size,):
            raise StructureError(f"table for n={n} needs {dom.size} entries, got {entries.shape}")
        if entries.size and (entries.min() < 0 or entries.max() >= dom.m):
            raise StructureError("entries must be canonical allocation indices")
        entries.setflags(write=False)
        self.n = n
        self.entries = entries
        self.objects = list(objects) if objects is not None else object_names(n)
        self.label = label
        self._alloc = None

    @property
    def domain(self) -> Domain:
        return get_domain(self.n)

    @property
    def alloc(self) -> np.ndarray:
        """``alloc[r, i]``: object agent ``i`` receives at profile ``r``."""
        if self._alloc is None:
            self._alloc = self.domain.perms[self.entries]
            self._alloc.setflags(write=False)
        return self._alloc

    def allocation(self, index: int) -> Allocation:
        return self.domain.allocation(int(self.entries[index]))

    def __call__(self, profile: Profile) -> Allocation:
        return self.allocation(self.domain.profile_index(profile))

    def as_mechanism(self) -> Mechanism:
        return Mechanism(self, self.label or "table", vectorized=lambda dom: self.entries, n=self.n)

    def key(self) -> bytes:
        return self.n.to_bytes(2, "little") + self.entries.tobytes()

    def __eq__(self, other):
        return isinstance(other, MechanismTable) and self.n == other.n and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.key())

    def __lt__(self, other):
        return (self.n, tuple(self.entries)) < (other.n, tuple(other.entries))

    def __repr__(self):
        return f"MechanismTable(n={self.n}, label={self.label!r})"

    def to_dict(self) -> dict:
        names = self.objects
        return {
            "n": self.n,
            "objects": list(names),
            "entries": [[names[o] for o in row] for row in self.alloc.tolist()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, label: str = "") -> "MechanismTable":
        try:
            n = int(data["n"])
            names = list(data["objects"])
            rows = data["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"table must have keys n, objects, entries ({exc})") from None
        if len(names) != n or len(set(names)) != n:
            raise ParseError(f"expected {n} distinct object names, got {names}")
        lookup = {name: k for k, name in enumerate(names)}
        dom = get_domain(n)
        if len(rows) != dom.size:
            raise ParseError(f"n={n} table needs {dom.size} entries, got {len(rows)}")
        entries = np.empty(dom.size, dtype=np.int64)
        for r, row in enumerate(rows):
            try:
                objs = [lookup[o] for o in row]
            except (KeyError, TypeError):
                raise ParseError(f"entry {r}: unknown object in {row}") from None
            if not is_bijection(objs, n):
                raise ParseError(f"entry {r}: {row} is not an allocation")
            entries[r] = dom.perm_index(objs)
        return cls(n, entries, names, label)

    @classmethod
    def from_json(cls, text: str, label: str = "") -> "MechanismTable":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        return cls.from_dict(data, label)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "MechanismTable":
        with open(path) as fh:
            return cls.from_json(fh.read(), label=str(path))


def materialize(m: Mechanism, n: int | None = None) -> MechanismTable:
    n = m.n if n is None else n
    if n is None:
        raise InvalidDomainError(f"{m.label}: n must be given")
    if m.n is not None and m.n != n:
        raise InvalidDomainError(f"{m.label} is defined for n={m.n}, not n={n}")
    dom = get_domain(n)
    if m.vectorized is not None:
        entries = np.asarray(m.vectorized(dom), dtype=np.int64)
    else:
        entries = materialize_by_rule(m, dom)
    return MechanismTable(n, entries, label=m.label)


def materialize_by_rule(m: Mechanism, dom: Domain) -> np.ndarray:
    """Evaluate ``m`` profile by profile, ignoring any vectorized path."""
    out = np.empty(dom.size, dtype=np.int64)
    for r in range(dom.size):
        alloc = m(dom.profile(r))
        if not is_bijection(alloc, dom.n):
            raise StructureError(f"{m.label} returned {alloc} at profile {r}, not an allocation")
        out[r] = dom.perm_index(alloc)
    return out
