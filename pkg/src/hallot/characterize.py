"""Membership in the serial and sequential dictatorship families.

Recovery reads the candidate structure off the table and then certifies it by
re-materializing and comparing every profile, so a returned family is always
backed by a full-domain equality check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .axioms import check_gctb, check_gsp, check_iplb, check_lctb, check_sp
from .core import HallotError, Priority
from .mechanisms import Hierarchy, MechanismTable, materialize, sd_mechanism, seqd_mechanism


class NoDictatorError(HallotError):
    """No agent acts as local dictator at some node of the recovery tree."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(message)


@dataclass
class CharacterizationResult:
    family: str  # "serial", "sequential" or "none"
    priority: Priority | None = None
    hierarchy: Hierarchy | None = None
    certificate: dict | None = None

    def to_dict(self, table: MechanismTable | None = None) -> dict:
        objects = table.objects if table is not None else None
        return {
            "family": self.family,
            "priority": None if self.priority is None else [a + 1 for a in self.priority],
            "hierarchy": None if self.hierarchy is None else self.hierarchy.to_dict(objects),
            "certificate": self.certificate,
        }


def recover_priority(t: MechanismTable) -> Priority:
    """Agents ordered by how well they fare at the unanimous profile where
    everyone ranks the objects in label order."""
    x = t.alloc[t.domain.unanimous_index(0)]
    return tuple(int(a) for a in np.argsort(x, kind="stable"))


def _compare(t: MechanismTable, other: MechanismTable) -> dict:
    diff = np.flatnonzero(t.entries != other.entries)
    if diff.size == 0:
        return {"equal": True, "profiles_compared": int(t.entries.size)}
    r = int(diff[0])
    return {
        "equal": False,
        "profiles_compared": int(t.entries.size),
        "mismatch_profile": r,
        "preferences": [">".join(t.objects[o] for o in t.domain.perms[p]) for p in t.domain.profiles[r]],
        "table_allocation": [t.objects[o] for o in t.alloc[r]],
        "expected_allocation": [t.objects[o] for o in other.alloc[r]],
    }


def is_serial_dictatorship(t: MechanismTable) -> CharacterizationResult:
    pi = recover_priority(t)
    cert = _compare(t, materialize(sd_mechanism(pi), t.n))
    if cert["equal"]:
        return CharacterizationResult("serial", priority=pi, hierarchy=Hierarchy.from_priority(pi), certificate=cert)
    cert["candidate_priority"] = [a + 1 for a in pi]
    return CharacterizationResult("none", certificate=cert)


def recover_hierarchy(t: MechanismTable) -> Hierarchy:
    """Rebuild the dictator tree from a table.

    At each node (the picks made so far) the next dictator is the unique
    unplaced agent who gets their best remaining object at every profile that
    reaches the node. Raises :class:`NoDictatorError` naming the first node
    where no agent qualifies.
    """
    dom = t.domain
    n = dom.n
    alloc = t.alloc
    children = {}
    root = None
    full = (1 << n) - 1
    stack = [((), np.arange(dom.size), full)]
    while stack:
        path, rows, free = stack.pop()
        placed = {a for a, _ in path}
        left = [a for a in range(n) if a not in placed]
        if not left:
            continue
        chosen = None
        for a in left:
            best = dom.top_among[dom.profiles[rows, a], free]
            if np.array_equal(alloc[rows, a], best):
                chosen = a
                break
        if chosen is None:
            where = "root" if not path else ",".join(f"{a + 1}:{t.objects[o]}" for a, o in path)
            raise NoDictatorError(path, f"no agent is a dictator at node {where} (depth {len(path) + 1})")
        if not path:
            root = chosen
        elif len(left) > 1:
            children[path] = chosen
        best = dom.top_among[dom.profiles[rows, chosen], free]
        for o in reversed(range(n)):  # pop lowest object first
            if free >> o & 1:
                stack.append((path + ((chosen, o),), rows[best == o], free & ~(1 << o)))
    return Hierarchy(n, root, children)


def characterize(t: MechanismTable) -> CharacterizationResult:
    """Classify ``t`` as a serial dictatorship, a (non-serial) sequential one, or neither."""
    serial = is_serial_dictatorship(t)
    if serial.family == "serial":
        return serial
    try:
        h = recover_hierarchy(t)
    except NoDictatorError as exc:
        cert = dict(serial.certificate)
        cert["hierarchy_failure"] = str(exc)
        return CharacterizationResult("none", certificate=cert)
    cert = _compare(t, materialize(seqd_mechanism(h), t.n))
    if cert["equal"]:
        return CharacterizationResult("sequential", hierarchy=h, certificate=cert)
    return CharacterizationResult("none", certificate=cert)


def is_sequential_dictatorship(t: MechanismTable) -> bool:
    return characterize(t).family in ("serial", "sequential")


def verify_theorem(t: MechanismTable, which: str) -> bool:
    """Whether the axiom side and the family side agree on ``t``.

    ``thm1``: strategy-proof and globally constant tie-breaking iff serial.
    ``thm2``: group strategy-proof and locally constant tie-breaking iff sequential.
    """
    axioms, family = theorem_sides(t, which)
    return axioms == family


def theorem_sides(t: MechanismTable, which: str) -> tuple[bool, bool]:
    if which == "thm1":
        axioms = check_sp(t).holds and check_gctb(t).holds
        return axioms, is_serial_dictatorship(t).family == "serial"
    if which == "thm2":
        axioms = check_gsp(t).holds and check_lctb(t).holds
        return axioms, is_sequential_dictatorship(t)
    raise ValueError(f"which must be 'thm1' or 'thm2', got {which!r}")


def verify_corollary1(t: MechanismTable) -> bool:
    """Strategy-proofness plus globally constant tie-breaking implies the
    identical preferences lower bound."""
    if check_sp(t).holds and check_gctb(t).holds:
        return check_iplb(t).holds
    return True


def verify_corollary2(t: MechanismTable) -> bool:
    axioms = check_gsp(t).holds and check_lctb(t).holds and check_iplb(t).holds
    return axioms == (is_serial_dictatorship(t).family == "serial")
