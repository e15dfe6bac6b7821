"""Exhaustive axiom checkers over mechanism tables.

Each ``check_*`` scans the full profile domain and returns an
:class:`AxiomReport`. On failure the report carries a witness that
:func:`replay` re-validates from the definition alone, using only table
lookups and the order primitives in :mod:`hallot.core`.

Checkers stop at the first violation (lowest canonical profile index, then
agent order) unless ``full=True``, in which case ``violations`` counts them all.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels
from .core import DomainTooLargeError, InvalidDomainError, lower_contour
from .mechanisms import MechanismTable


@dataclass
class AxiomReport:
    axiom: str
    holds: bool
    witness: dict | None = None
    work: int = 0
    violations: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        d = {"axiom": self.axiom, "holds": self.holds, "witness": self.witness, "work": self.work}
        if self.violations is not None:
            d["violations"] = self.violations
        d.update(self.extra)
        return d


@dataclass
class LocalTieBreakRule:
    """For each pair ``(i, j)`` with ``i < j``, the prioritized agent per context.

    A context is the tuple of preference indices of the other agents, in agent order.
    """

    n: int
    rules: dict[tuple[int, int], dict[tuple[int, ...], int]]

    def prioritized(self, i: int, j: int, context: tuple[int, ...]) -> int:
        return self.rules[(min(i, j), max(i, j))][context]

    def to_dict(self, table: MechanismTable) -> dict:
        out = {}
        for (i, j), rule in sorted(self.rules.items()):
            others = [a for a in range(self.n) if a not in (i, j)]
            out[f"{i + 1},{j + 1}"] = {
                ";".join(f"{a + 1}:{_pref_str(table, p)}" for a, p in zip(others, ctx)): agent + 1
                for ctx, agent in sorted(rule.items())
            }
        return out


# -- witness helpers ---------------------------------------------------------------


def _pref_str(t: MechanismTable, p: int) -> str:
    return ">".join(t.objects[o] for o in t.domain.perms[p])


def _alloc_names(t: MechanismTable, r: int) -> list[str]:
    return [t.objects[o] for o in t.alloc[r]]


def _profile_strs(t: MechanismTable, r: int) -> list[str]:
    return [_pref_str(t, p) for p in t.domain.profiles[r]]


def _parse_pref(t: MechanismTable, s: str) -> tuple[int, ...]:
    lookup = {name: k for k, name in enumerate(t.objects)}
    return tuple(lookup[o] for o in s.split(">"))


def _report(axiom, count, work, witness, full, **extra):
    return AxiomReport(axiom, count == 0, witness if count else None, work, count if full else None, extra)


# -- incentive properties --------------------------------------------------------


def check_sp(t: MechanismTable, full: bool = False) -> AxiomReport:
    dom = t.domain
    count, r, i, q = _kernels.sp_scan(dom.profiles, t.alloc, dom.rank, dom.strides, full)
    cells = dom.size * dom.n * dom.m
    witness = None
    if count:
        p = int(dom.profiles[r, i])
        r2 = int(r - p * dom.strides[i] + q * dom.strides[i])
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "agent": i + 1,
            "misreport": _pref_str(t, q),
            "truthful_allotment": t.objects[t.alloc[r, i]],
            "manipulated_allotment": t.objects[t.alloc[r2, i]],
        }
        if not full:
            cells = (r * dom.n + i) * dom.m + q + 1
    return _report("sp", count, cells, witness, full)


def check_nonbossy(t: MechanismTable, full: bool = False) -> AxiomReport:
    dom = t.domain
    count, r, i, q = _kernels.nb_scan(dom.profiles, t.entries, t.alloc, dom.strides, full)
    cells = dom.size * dom.n * dom.m
    witness = None
    if count:
        p = int(dom.profiles[r, i])
        r2 = int(r - p * dom.strides[i] + q * dom.strides[i])
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "agent": i + 1,
            "misreport": _pref_str(t, q),
            "before": _alloc_names(t, r),
            "after": _alloc_names(t, r2),
        }
        if not full:
            cells = (r * dom.n + i) * dom.m + q + 1
    return _report("nb", count, cells, witness, full)


def _coalition_deviations(dom, coalition):
    """Profile indices reached when ``coalition`` jointly reports any preferences."""
    base = np.arange(dom.size, dtype=np.int64)
    for a in coalition:
        base = base - dom.profiles[:, a] * dom.strides[a]
    joint = np.zeros(1, dtype=np.int64)
    for a in coalition:
        joint = (joint[:, None] + np.arange(dom.m, dtype=np.int64)[None, :] * dom.strides[a]).ravel()
    return base[:, None] + joint[None, :]


def check_gsp(t: MechanismTable, mode: str = "auto", full: bool = False) -> AxiomReport:
    """Group strategy-proofness.

    ``direct`` enumerates every coalition and joint misreport (n <= 3 only);
    ``equivalence`` checks strategy-proofness and non-bossiness instead.
    """
    n = t.n
    if mode == "auto":
        mode = "direct" if n <= 3 else "equivalence"
    if mode == "equivalence":
        sp = check_sp(t, full)
        nb = check_nonbossy(t, full)
        count = (sp.violations or 0) + (nb.violations or 0) if full else int(not sp.holds) + int(not nb.holds)
        witness = None
        if not sp.holds:
            witness = {"via": "sp", **sp.witness}
        elif not nb.holds:
            witness = {"via": "nb", **nb.witness}
        return _report("gsp", count, sp.work + nb.work, witness, full, mode="equivalence")
    if mode != "direct":
        raise InvalidDomainError(f"unknown gsp mode {mode!r}")
    if n > 3:
        raise DomainTooLargeError(f"direct group strategy-proofness check is limited to n <= 3, got n={n}")
    dom = t.domain
    rank, prof, alloc = dom.rank, dom.profiles, t.alloc
    count, work, witness = 0, 0, None
    for k in range(1, n + 1):
        for coalition in itertools.combinations(range(n), k):
            dev = _coalition_deviations(dom, coalition)
            weak = np.ones(dev.shape, dtype=bool)
            strict = np.zeros(dev.shape, dtype=bool)
            for a in coalition:
                before = rank[prof[:, a], alloc[:, a]][:, None]
                after = rank[prof[:, a][:, None], alloc[dev, a]]
                weak &= after <= before
                strict |= after < before
            viol = weak & strict
            work += viol.size
            hits = np.argwhere(viol)
            if hits.size == 0:
                continue
            count += len(hits)
            if witness is None:
                r, c = (int(v) for v in hits[0])
                r2 = int(dev[r, c])
                witness = {
                    "profile": r,
                    "preferences": _profile_strs(t, r),
                    "coalition": [a + 1 for a in coalition],
                    "misreports": [_pref_str(t, dom.profiles[r2, a]) for a in coalition],
                    "before": _alloc_names(t, r),
                    "after": _alloc_names(t, r2),
                }
            if not full:
                return _report("gsp", 1, work, witness, full, mode="direct")
    return _report("gsp", count, work, witness, full, mode="direct")


def _monotone_sets(dom):
    """``mono[p, o, q]``: ranking q is a monotonic transformation of ranking p at o."""
    below = dom.rank[:, None, :] >= dom.rank[:, :, None]  # below[p, o, o']: o' in L(o, p)
    below_q = below[None, :, :, :]  # indexed [., q, o, o']
    below_p = below[:, None, :, :]
    # L(o, p) subset of L(o, q) for each (p, q, o)
    sub = (~below_p | below_q).all(axis=3)  # [p, q, o]
    return np.transpose(sub, (0, 2, 1))


def check_monotonic(t: MechanismTable, mode: str = "auto", full: bool = False) -> AxiomReport:
    """Maskin monotonicity.

    ``direct`` tries every profile that transforms all agents at once (n <= 3).
    ``single`` only moves one agent at a time, which is equivalent: a joint
    transformation is a chain of single-agent ones, each leaving the outcome
    in place.
    """
    if mode == "auto":
        mode = "direct" if t.n <= 3 else "single"
    if mode not in ("direct", "single"):
        raise InvalidDomainError(f"unknown monotonicity mode {mode!r}")
    if mode == "direct" and t.n > 3:
        raise DomainTooLargeError(f"direct monotonicity check is limited to n <= 3, got n={t.n}")
    dom = t.domain
    mono = _monotone_sets(dom)
    entries, prof, alloc = t.entries, dom.profiles, t.alloc
    count, work, witness = 0, 0, None
    for r in range(dom.size):
        options = [np.flatnonzero(mono[prof[r, i], alloc[r, i]]) for i in range(dom.n)]
        if mode == "direct":
            targets = np.zeros(1, dtype=np.int64)
            for i, opts in enumerate(options):
                targets = (targets[:, None] + opts[None, :] * dom.strides[i]).ravel()
        else:
            targets = np.concatenate(
                [r - prof[r, i] * dom.strides[i] + opts * dom.strides[i] for i, opts in enumerate(options)]
            )
        work += targets.size
        bad = targets[entries[targets] != entries[r]]
        if bad.size:
            count += bad.size
            if witness is None:
                r2 = int(bad[0])
                witness = {
                    "profile": r,
                    "preferences": _profile_strs(t, r),
                    "transformed": r2,
                    "transformed_preferences": _profile_strs(t, r2),
                    "allocation": _alloc_names(t, r),
                    "new_allocation": _alloc_names(t, r2),
                }
            if not full:
                return _report("monotonic", 1, work, witness, full, mode=mode)
    return _report("monotonic", count, work, witness, full, mode=mode)


# -- efficiency ------------------------------------------------------------------------


def check_pareto(t: MechanismTable, full: bool = False) -> AxiomReport:
    dom = t.domain
    count, r, y, _ = _kernels.pareto_scan(dom.profiles, t.alloc, dom.rank, dom.perms, full)
    cells = dom.size * dom.m
    witness = None
    if count:
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "allocation": _alloc_names(t, r),
            "dominating": [t.objects[o] for o in dom.perms[y]],
        }
        if not full:
            cells = r * dom.m + y + 1
    return _report("pareto", count, cells, witness, full)


def check_pairwise_efficiency(t: MechanismTable, full: bool = False) -> AxiomReport:
    dom = t.domain
    count, r, i, j = _kernels.pairwise_scan(dom.profiles, t.alloc, dom.rank, full)
    cells = dom.size * dom.n * (dom.n - 1) // 2
    witness = None
    if count:
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "agents": [i + 1, j + 1],
            "allocation": _alloc_names(t, r),
        }
    return _report("pairwise", count, cells, witness, full)


# -- fairness ----------------------------------------------------------------------------


def _no_envy(t):
    dom = t.domain
    return _kernels.no_envy(dom.profiles, t.alloc, dom.rank)


def check_envyfree(t: MechanismTable, full: bool = False) -> AxiomReport:
    envy = ~_no_envy(t)
    hits = np.argwhere(envy)
    witness = None
    if hits.size:
        r, i, j = (int(v) for v in hits[0])
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "envier": i + 1,
            "envied": j + 1,
            "allocation": _alloc_names(t, r),
        }
    return _report("envyfree", len(hits), envy.size, witness, full)


def _priority_search(t, envy, axiom, full):
    """Find priorities under which no agent envies a lower-priority agent."""
    dom = t.domain
    any_envy = envy.any(axis=0)
    first_profile = np.argmax(envy, axis=0)
    valid, defeats = [], []
    for pi in itertools.permutations(range(dom.n)):
        blocker = next(
            ((a, b) for a, b in itertools.combinations(pi, 2) if any_envy[a, b]),
            None,
        )
        if blocker is None:
            valid.append(pi)
            if not full:
                break
        else:
            a, b = blocker
            defeats.append({"priority": [x + 1 for x in pi], "profile": int(first_profile[a, b]),
                            "envier": a + 1, "envied": b + 1})
    work = envy.size + len(valid) + len(defeats)
    extra = {}
    if valid:
        extra["priority"] = [x + 1 for x in valid[0]]
        if full:
            extra["priorities"] = [[x + 1 for x in pi] for pi in valid]
        return AxiomReport(axiom, True, None, work, 0 if full else None, extra)
    return AxiomReport(axiom, False, {"defeats": defeats}, work, len(defeats) if full else None, extra)


def check_weak_fairness(t: MechanismTable, full: bool = False) -> AxiomReport:
    """Some priority under which nobody envies a lower-priority agent.

    On success ``extra['priority']`` is the lexicographically first such
    priority (1-indexed); ``full=True`` lists all of them.
    """
    return _priority_search(t, ~_no_envy(t), "weak_fairness", full)


def _identical(t):
    prof = t.domain.profiles
    return prof[:, :, None] == prof[:, None, :]


def check_gctb(t: MechanismTable, mode: int = 2, full: bool = False) -> AxiomReport:
    """Globally constant tie-breaking.

    Mode 1 searches for a priority justifying all envy between agents with
    identical preferences. Mode 2 checks that, for every pair, the direction of
    envy is the same at every profile where the pair agrees.
    """
    if mode == 1:
        report = _priority_search(t, ~_no_envy(t) & _identical(t), "gctb", full)
        report.extra["mode"] = 1
        return report
    if mode != 2:
        raise InvalidDomainError(f"gctb mode must be 1 or 2, got {mode}")
    dom = t.domain
    keep = _no_envy(t)
    prof = dom.profiles
    count, work, witness = 0, 0, None
    for i, j in itertools.combinations(range(dom.n), 2):
        rows = np.flatnonzero(prof[:, i] == prof[:, j])
        direction = keep[rows, i, j]
        work += rows.size
        flips = np.flatnonzero(direction != direction[0])
        if flips.size:
            count += 1
            if witness is None:
                r1, r2 = int(rows[0]), int(rows[flips[0]])
                witness = {
                    "agents": [i + 1, j + 1],
                    "profiles": [r1, r2],
                    "preferences": [_profile_strs(t, r1), _profile_strs(t, r2)],
                    "allocations": [_alloc_names(t, r1), _alloc_names(t, r2)],
                }
            if not full:
                break
    return _report("gctb", count, work, witness, full, mode=2)


def _pair_blocks(t, i, j):
    """Rows where agents i and j agree, and their context ids (others' part of the index)."""
    dom = t.domain
    prof = dom.profiles
    rows = np.flatnonzero(prof[:, i] == prof[:, j])
    ctx = rows - prof[rows, i] * dom.strides[i] - prof[rows, j] * dom.strides[j]
    return rows, ctx


def _context_tuple(t, r, i, j):
    return tuple(int(p) for a, p in enumerate(t.domain.profiles[r]) if a not in (i, j))


def check_lctb(t: MechanismTable, mode: int = 4, full: bool = False) -> AxiomReport:
    """Locally constant tie-breaking.

    Mode 4 checks that the envy direction within an agreeing pair never changes
    while the other agents' preferences stay fixed. Mode 3 instead tries, for
    every pair and context, to pick a prioritized agent that justifies all envy
    there, and returns the resulting rule in ``extra['rule']``.
    """
    if mode not in (3, 4):
        raise InvalidDomainError(f"lctb mode must be 3 or 4, got {mode}")
    dom = t.domain
    keep = _no_envy(t)
    count, work, witness = 0, 0, None
    rules: dict[tuple[int, int], dict[tuple[int, ...], int]] = {}
    for i, j in itertools.combinations(range(dom.n), 2):
        rows, ctx = _pair_blocks(t, i, j)
        work += rows.size
        bad_rows = []
        if mode == 4:
            order = np.lexsort((rows, ctx))
            rows, ctx = rows[order], ctx[order]
            direction = keep[rows, i, j]
            starts = np.flatnonzero(np.r_[True, ctx[1:] != ctx[:-1]])
            lead = direction[starts][np.searchsorted(starts, np.arange(rows.size), side="right") - 1]
            flips = np.flatnonzero(direction != lead)
            for f in flips:
                g = starts[np.searchsorted(starts, f, side="right") - 1]
                bad_rows.append((int(rows[g]), int(rows[f])))
        else:
            rule = {}
            for c in np.unique(ctx):
                block = rows[ctx == c]
                context = _context_tuple(t, block[0], i, j)
                if keep[block, i, j].all():
                    rule[context] = i
                elif keep[block, j, i].all():
                    rule[context] = j
                else:
                    r1 = next(int(r) for r in block if not keep[r, i, j])
                    r2 = next(int(r) for r in block if not keep[r, j, i])
                    bad_rows.append(tuple(sorted((r1, r2))))
            rules[(i, j)] = rule
        if bad_rows:
            count += len(bad_rows)
            if witness is None:
                r1, r2 = min(bad_rows)
                witness = {
                    "agents": [i + 1, j + 1],
                    "context": {str(a + 1): _pref_str(t, dom.profiles[r1, a]) for a in range(dom.n) if a not in (i, j)},
                    "profiles": [r1, r2],
                    "preferences": [_profile_strs(t, r1), _profile_strs(t, r2)],
                    "allocations": [_alloc_names(t, r1), _alloc_names(t, r2)],
                }
            if not full:
                break
    extra = {"mode": mode}
    if mode == 3 and count == 0:
        extra["rule"] = LocalTieBreakRule(dom.n, rules)
    return _report("lctb", count, work, witness, full, **extra)


def check_iplb(t: MechanismTable, full: bool = False) -> AxiomReport:
    """Identical preferences lower bound: nobody does worse than at the
    unanimous profile of their own ranking."""
    dom = t.domain
    count, r, i, _ = _kernels.iplb_scan(dom.profiles, t.alloc, dom.rank, dom.unanimous_step, full)
    witness = None
    if count:
        u = dom.unanimous_index(int(dom.profiles[r, i]))
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "agent": i + 1,
            "allotment": t.objects[t.alloc[r, i]],
            "unanimous_profile": u,
            "unanimous_allotment": t.objects[t.alloc[u, i]],
        }
    return _report("iplb", count, dom.size * dom.n, witness, full)


def relabel_table(dom):
    """``relabel[k, p]``: index of ranking/allocation ``p`` after renaming objects by ``perms[k]``."""
    mapped = dom.perms[:, dom.perms]  # mapped[k, p, pos] = perms[k][perms[p][pos]]
    flat = mapped.reshape(-1, dom.n)
    return _kernels.perm_indices(flat).reshape(dom.m, dom.m)


def check_neutrality(t: MechanismTable, full: bool = False) -> AxiomReport:
    """Renaming objects in every ranking renames the chosen allocation the same way."""
    dom = t.domain
    relabel = relabel_table(dom)
    moved = np.zeros((dom.m, dom.size), dtype=np.int64)
    for i in range(dom.n):
        moved += relabel[:, dom.profiles[:, i]] * dom.strides[i]
    viol = t.entries[moved] != relabel[:, t.entries]
    hits = np.argwhere(viol.T)  # profile-major order
    witness = None
    if hits.size:
        r, k = (int(v) for v in hits[0])
        r2 = int(moved[k, r])
        witness = {
            "profile": r,
            "preferences": _profile_strs(t, r),
            "renaming": {t.objects[o]: t.objects[v] for o, v in enumerate(dom.perms[k])},
            "allocation": _alloc_names(t, r),
            "renamed_profile": r2,
            "renamed_allocation": _alloc_names(t, r2),
        }
    return _report("neutrality", len(hits), viol.size, witness, full)


AXIOMS = {
    "sp": check_sp,
    "gsp": check_gsp,
    "nb": check_nonbossy,
    "monotonic": check_monotonic,
    "pareto": check_pareto,
    "pairwise": check_pairwise_efficiency,
    "envyfree": check_envyfree,
    "weak_fairness": check_weak_fairness,
    "gctb": check_gctb,
    "lctb": check_lctb,
    "iplb": check_iplb,
    "neutrality": check_neutrality,
}

ALIASES = {
    "nonbossy": "nb",
    "non_bossiness": "nb",
    "pairwise_efficiency": "pairwise",
    "weakfair": "weak_fairness",
    "monotonicity": "monotonic",
}


def canonical_axiom(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in AXIOMS:
        raise InvalidDomainError(f"unknown axiom {name!r}; valid: {', '.join(AXIOMS)}")
    return key


def check(t: MechanismTable, axiom: str, full: bool = False, **opts) -> AxiomReport:
    return AXIOMS[canonical_axiom(axiom)](t, full=full, **opts)


# -- witness replay ------------------------------------------------------------------------
# Each branch re-derives the violation from the table's per-profile lookup and
# the definitions in core; nothing here touches the scan kernels.


def _beats(pref, a, b):
    """``a`` strictly preferred to ``b`` under ``pref``."""
    return pref.index(a) < pref.index(b)


def replay(t: MechanismTable, report: AxiomReport) -> bool:
    """True when ``report.witness`` exhibits a genuine violation of ``report.axiom``."""
    w = report.witness
    if w is None:
        return False
    dom = t.domain
    names = {name: k for k, name in enumerate(t.objects)}
    axiom = report.axiom
    if axiom == "gsp" and w.get("via"):
        axiom = w["via"]
    if "profile" in w:
        R = dom.profile(w["profile"])
        x = t(R)
    if axiom == "sp":
        i = w["agent"] - 1
        R2 = R[:i] + (_parse_pref(t, w["misreport"]),) + R[i + 1:]
        return _beats(R[i], t(R2)[i], x[i])
    if axiom == "nb":
        i = w["agent"] - 1
        R2 = R[:i] + (_parse_pref(t, w["misreport"]),) + R[i + 1:]
        y = t(R2)
        return y[i] == x[i] and y != x
    if axiom == "gsp":
        coalition = [a - 1 for a in w["coalition"]]
        R2 = list(R)
        for a, s in zip(coalition, w["misreports"]):
            R2[a] = _parse_pref(t, s)
        y = t(tuple(R2))
        weak = all(not _beats(R[a], x[a], y[a]) for a in coalition)
        return weak and any(_beats(R[a], y[a], x[a]) for a in coalition)
    if axiom == "monotonic":
        R2 = dom.profile(w["transformed"])
        is_transform = all(lower_contour(R[i], x[i]) <= lower_contour(R2[i], x[i]) for i in range(t.n))
        return is_transform and t(R2) != x
    if axiom == "pareto":
        y = tuple(names[o] for o in w["dominating"])
        weak = all(not _beats(R[i], x[i], y[i]) for i in range(t.n))
        return weak and any(_beats(R[i], y[i], x[i]) for i in range(t.n))
    if axiom == "pairwise":
        i, j = (a - 1 for a in w["agents"])
        return _beats(R[i], x[j], x[i]) and _beats(R[j], x[i], x[j])
    if axiom == "envyfree":
        i, j = w["envier"] - 1, w["envied"] - 1
        return _beats(R[i], x[j], x[i])
    if axiom in ("weak_fairness", "gctb") and "defeats" in w:
        identical_only = axiom == "gctb"
        defeated = set()
        for d in w["defeats"]:
            i, j = d["envier"] - 1, d["envied"] - 1
            pi = [a - 1 for a in d["priority"]]
            R = dom.profile(d["profile"])
            x = t(R)
            ok = pi.index(i) < pi.index(j) and _beats(R[i], x[j], x[i])
            if identical_only:
                ok = ok and R[i] == R[j]
            if not ok:
                return False
            defeated.add(tuple(pi))
        return defeated == set(itertools.permutations(range(t.n)))
    if axiom in ("gctb", "lctb"):
        i, j = (a - 1 for a in w["agents"])
        R1, R2 = (dom.profile(r) for r in w["profiles"])
        if R1[i] != R1[j] or R2[i] != R2[j]:
            return False
        if axiom == "lctb" and any(R1[a] != R2[a] for a in range(t.n) if a not in (i, j)):
            return False
        x1, x2 = t(R1), t(R2)
        return (not _beats(R1[i], x1[j], x1[i])) != (not _beats(R2[i], x2[j], x2[i]))
    if axiom == "iplb":
        i = w["agent"] - 1
        U = (R[i],) * t.n
        return _beats(R[i], t(U)[i], x[i])
    if axiom == "neutrality":
        rho = {names[a]: names[b] for a, b in w["renaming"].items()}
        R2 = tuple(tuple(rho[o] for o in pref) for pref in R)
        return t(R2) != tuple(rho[o] for o in x)
    raise InvalidDomainError(f"no replay for axiom {axiom!r}")

