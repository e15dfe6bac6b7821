"""Domain types and canonical enumeration for house allocation problems.

Agents and objects are 0-indexed integers. A preference is a tuple of object
ids, best first; an allocation is a tuple giving each agent's object; a
priority is a tuple of agents, highest first. Preferences and allocations are
both permutations of ``range(n)`` and share one canonical index: their position
in the lexicographic enumeration.

Profiles are indexed row-major over per-agent preference indices, agent 0
varying slowest.
"""
from __future__ import annotations

import itertools
import math
import os
import re
import string
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

Preference = tuple[int, ...]
Profile = tuple[Preference, ...]
Allocation = tuple[int, ...]
Priority = tuple[int, ...]

DEFAULT_PROFILE_CAP = 10**6
CAP_ENV = "HALLOT_PROFILE_CAP"


class HallotError(Exception):
    """Base class for errors raised by this package."""


class InvalidDomainError(HallotError, ValueError):
    pass


class DomainTooLargeError(HallotError, ValueError):
    pass


class ParseError(HallotError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def profile_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_PROFILE_CAP
    try:
        return int(raw)
    except ValueError:
        raise InvalidDomainError(f"{CAP_ENV} must be an integer, got {raw!r}") from None


def check_cap(n: int, cap: int | None = None) -> int:
    """Return the profile count ``(n!)**n``, raising if it exceeds the cap."""
    if n < 1:
        raise InvalidDomainError(f"need at least one agent, got n={n}")
    cap = profile_cap() if cap is None else cap
    size = math.factorial(n) ** n
    if size > cap:
        raise DomainTooLargeError(
            f"n={n} has {size} profiles, above the enumeration cap of {cap} "
            f"(override with {CAP_ENV})"
        )
    return size


def object_name(o: int) -> str:
    if o < 26:
        return string.ascii_lowercase[o]
    return f"o{o + 1}"


def object_names(n: int) -> list[str]:
    return [object_name(o) for o in range(n)]


def agent_name(i: int) -> str:
    return str(i + 1)


def enumerate_preferences(n_objects: int) -> list[Preference]:
    """All strict rankings of ``n_objects`` objects, in lexicographic order."""
    if n_objects < 1:
        raise InvalidDomainError(f"need at least one object, got {n_objects}")
    return list(itertools.permutations(range(n_objects)))


def enumerate_profiles(n: int, cap: int | None = None) -> list[Profile]:
    check_cap(n, cap)
    prefs = enumerate_preferences(n)
    return list(itertools.product(prefs, repeat=n))


def permutation_index(perm: Sequence[int]) -> int:
    """Position of ``perm`` in the lexicographic enumeration of its length."""
    n = len(perm)
    remaining = list(range(n))
    index = 0
    for k, v in enumerate(perm):
        pos = remaining.index(v)
        index += pos * math.factorial(n - 1 - k)
        remaining.pop(pos)
    return index


def top(pref: Preference, available: Iterable[int]) -> int:
    available = set(available)
    if not available:
        raise InvalidDomainError("top of an empty set is undefined")
    for o in pref:
        if o in available:
            return o
    raise InvalidDomainError(f"objects {sorted(available)} not ranked by {pref}")


def lower_contour(pref: Preference, o: int) -> frozenset[int]:
    """Objects ``o`` is weakly preferred to, ``o`` included."""
    return frozenset(pref[pref.index(o):])


def is_monotonic_transformation(new_pref: Preference, old_pref: Preference, o: int) -> bool:
    return lower_contour(old_pref, o) <= lower_contour(new_pref, o)


def unanimous_profile(pref: Preference, n: int | None = None) -> Profile:
    return (tuple(pref),) * (len(pref) if n is None else n)


def is_bijection(alloc: Sequence[int], n: int) -> bool:
    return len(alloc) == n and sorted(alloc) == list(range(n))


class Domain:
    """Array form of the full preference domain for ``n`` agents and objects.

    Attributes are read-only numpy arrays:

    ``perms[p]``      ranking (or allocation) with canonical index ``p``
    ``rank[p, o]``    position of object ``o`` in ranking ``p`` (0 = best)
    ``profiles[r]``   per-agent preference indices of profile ``r``
    ``strides[i]``    profile-index step for a unit change in agent ``i``'s preference
    ``top_among[p, s]`` best object of ranking ``p`` within object bitmask ``s``
    """

    def __init__(self, n: int, cap: int | None = None):
        self.size = check_cap(n, cap)
        self.n = n
        self.m = math.factorial(n)
        perms = np.array(enumerate_preferences(n), dtype=np.int64)
        rank = np.argsort(perms, axis=1).astype(np.int64)
        strides = np.array([self.m ** (n - 1 - i) for i in range(n)], dtype=np.int64)
        grids = np.indices((self.m,) * n, dtype=np.int64).reshape(n, -1).T
        top_among = np.full((self.m, 1 << n), -1, dtype=np.int64)
        for s in range(1, 1 << n):
            members = [o for o in range(n) if s >> o & 1]
            cols = rank[:, members]
            top_among[:, s] = np.asarray(members)[np.argmin(cols, axis=1)]
        self.perms = perms
        self.rank = rank
        self.strides = strides
        self.profiles = np.ascontiguousarray(grids)
        self.top_among = top_among
        self.unanimous_step = int(strides.sum())
        self._perm_lookup = {tuple(int(v) for v in p): k for k, p in enumerate(perms)}
        for a in (perms, rank, strides, self.profiles, top_among):
            a.setflags(write=False)

    def perm_index(self, perm: Sequence[int]) -> int:
        try:
            return self._perm_lookup[tuple(perm)]
        except KeyError:
            raise InvalidDomainError(f"{tuple(perm)} is not a permutation of range({self.n})") from None

    def profile_index(self, profile: Sequence[Sequence[int]]) -> int:
        if len(profile) != self.n:
            raise InvalidDomainError(f"profile has {len(profile)} agents, expected {self.n}")
        return int(sum(self.perm_index(p) * int(s) for p, s in zip(profile, self.strides)))

    def profile(self, index: int) -> Profile:
        return tuple(tuple(int(o) for o in self.perms[p]) for p in self.profiles[index])

    def unanimous_index(self, pref_index: int) -> int:
        return pref_index * self.unanimous_step

    def allocation(self, index: int) -> Allocation:
        return tuple(int(o) for o in self.perms[index])


@lru_cache(maxsize=None)
def _cached_domain(n: int) -> Domain:
    return Domain(n, cap=math.factorial(n) ** n)


def get_domain(n: int) -> Domain:
    """Shared domain for ``n``; the profile cap is re-checked on every call."""
    check_cap(n)
    return _cached_domain(n)


# -- text profile format -------------------------------------------------------

_LINE = re.compile(r"^\s*(\d+)\s*:\s*(.*?)\s*$")


def parse_profile(text: str, objects: Sequence[str] | None = None) -> tuple[list[str], Profile]:
    """Parse lines like ``1: b > a > c``.

    Returns the object names (sorted unless given) and the profile over their
    indices. Blank lines and ``#`` comments are ignored.
    """
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        match = _LINE.match(line)
        if match is None:
            raise ParseError(f"expected '<agent>: x > y > ...', got {raw.strip()!r}", lineno)
        tokens = [t.strip() for t in match.group(2).split(">")]
        if any(not t or len(t.split()) != 1 for t in tokens):
            raise ParseError("object names must be single non-empty tokens", lineno)
        rows.append((lineno, [int(match.group(1))] + tokens))
    if not rows:
        raise ParseError("no agents found")
    return _build_profile(rows, objects)


def _build_profile(rows, objects):
    names = list(objects) if objects is not None else sorted(set(rows[0][1][1:]))
    lookup = {name: k for k, name in enumerate(names)}
    prefs = []
    for expected, (lineno, row) in enumerate(rows, start=1):
        agent, tokens = row[0], row[1:]
        if agent != expected:
            raise ParseError(f"agents must be listed in order; expected {expected}, got {agent}", lineno)
        if sorted(tokens) != sorted(names) or len(set(tokens)) != len(tokens):
            raise ParseError(f"ranking must list each of {names} exactly once", lineno)
        prefs.append(tuple(lookup[t] for t in tokens))
    if len(prefs) != len(names):
        raise ParseError(f"{len(prefs)} agents but {len(names)} objects")
    return names, tuple(prefs)


def format_profile(profile: Profile, objects: Sequence[str] | None = None) -> str:
    names = list(objects) if objects is not None else object_names(len(profile))
    return "\n".join(
        f"{agent_name(i)}: " + " > ".join(names[o] for o in pref) for i, pref in enumerate(profile)
    )
