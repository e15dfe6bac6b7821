"""Variable-population house allocation.

A problem picks a subset of potential agents, an equally large subset of
potential objects, and a ranking of those objects for each chosen agent. All
problems over small potential sets are enumerable, so pairwise consistency,
pairwise neutrality and tie-breaking are checked by scanning them all.

Agents and objects keep their global ids inside every problem; rankings and
allocations use those ids.
"""
from __future__ import annotations

import itertools
import re
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

from .axioms import AxiomReport
from .core import InvalidDomainError, ParseError, object_name

ENVY_CASES = ("i_never_envies_j", "i_always_envies_j", "j_never_envies_i", "j_always_envies_i")


@dataclass(frozen=True)
class VarProblem:
    agents: tuple[int, ...]
    objects: tuple[int, ...]
    prefs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.agents or len(self.agents) != len(self.objects):
            raise InvalidDomainError("a problem needs as many objects as agents, at least one")
        if list(self.agents) != sorted(set(self.agents)) or list(self.objects) != sorted(set(self.objects)):
            raise InvalidDomainError("agents and objects must be sorted and distinct")
        if len(self.prefs) != len(self.agents) or any(sorted(p) != list(self.objects) for p in self.prefs):
            raise InvalidDomainError("each agent must rank exactly the problem's objects")

    def pref(self, agent: int) -> tuple[int, ...]:
        return self.prefs[self.agents.index(agent)]

    def restrict(self, agents: Sequence[int], objects: Sequence[int]) -> "VarProblem":
        agents, objects = tuple(sorted(agents)), tuple(sorted(objects))
        keep = set(objects)
        return VarProblem(agents, objects, tuple(tuple(o for o in self.pref(a) if o in keep) for a in agents))

    def format(self) -> str:
        head = "agents: " + ",".join(str(a + 1) for a in self.agents)
        head += "  objects: " + ",".join(object_name(o) for o in self.objects)
        lines = [f"{a + 1}: " + " > ".join(object_name(o) for o in p) for a, p in zip(self.agents, self.prefs)]
        return "\n".join([head] + lines)


class VarMechanism:
    def __init__(self, rule: Callable[[VarProblem], dict], label: str):
        self.rule = rule
        self.label = label

    def __call__(self, problem: VarProblem) -> dict:
        x = self.rule(problem)
        if set(x) != set(problem.agents) or sorted(x.values()) != list(problem.objects):
            raise InvalidDomainError(f"{self.label} returned {x} for {problem}")
        return x

    def __repr__(self):
        return f"VarMechanism({self.label!r})"


@dataclass(frozen=True)
class Potentials:
    agents: int = 3
    objects: int = 3


@lru_cache(maxsize=None)
def enumerate_problems(potentials: Potentials = Potentials()) -> tuple[VarProblem, ...]:
    """All problems over the potential sets, singletons included, by size."""
    out = []
    for k in range(1, min(potentials.agents, potentials.objects) + 1):
        for agents in itertools.combinations(range(potentials.agents), k):
            for objects in itertools.combinations(range(potentials.objects), k):
                rankings = list(itertools.permutations(objects))
                for prefs in itertools.product(rankings, repeat=k):
                    out.append(VarProblem(agents, objects, prefs))
    return tuple(out)


def parse_problem(text: str) -> VarProblem:
    """Parse the header ``agents: 1,3  objects: a,c`` followed by ranking lines."""
    lines = [(k, ln.split("#", 1)[0].strip()) for k, ln in enumerate(text.splitlines(), start=1)]
    lines = [(k, ln) for k, ln in lines if ln]
    if not lines:
        raise ParseError("empty problem")
    lineno, head = lines[0]
    match = re.fullmatch(r"agents:\s*([\d,\s]+?)\s+objects:\s*(.+)", head)
    if match is None:
        raise ParseError("header must read 'agents: 1,3  objects: a,c'", lineno)
    agents = [int(a) - 1 for a in match.group(1).replace(" ", "").split(",")]
    names = [o.strip() for o in match.group(2).split(",")]
    lookup = {object_name(k): k for k in range(26)}
    try:
        objects = [lookup[o] for o in names]
    except KeyError as exc:
        raise ParseError(f"unknown object {exc.args[0]!r}", lineno) from None
    prefs = []
    for (lineno, line), agent in itertools.zip_longest(lines[1:], agents, fillvalue=(None, None)):
        if line is None or agent is None:
            raise ParseError("need exactly one ranking line per listed agent", lineno)
        m = re.fullmatch(r"(\d+)\s*:\s*(.+)", line)
        if m is None or int(m.group(1)) - 1 != agent:
            raise ParseError(f"expected ranking for agent {agent + 1}", lineno)
        try:
            prefs.append(tuple(lookup[t.strip()] for t in m.group(2).split(">")))
        except KeyError as exc:
            raise ParseError(f"unknown object {exc.args[0]!r}", lineno) from None
    try:
        return VarProblem(tuple(agents), tuple(objects), tuple(prefs))
    except InvalidDomainError as exc:
        raise ParseError(str(exc)) from None


# -- corpus ----------------------------------------------------------------------


def _sd(priority, problem, worst=False):
    remaining = set(problem.objects)
    x = {}
    for a in priority:
        if a in problem.agents:
            ranking = problem.pref(a)[::-1] if worst else problem.pref(a)
            pick = next(o for o in ranking if o in remaining)
            x[a] = pick
            remaining.discard(pick)
    return x


def extended_sd(priority: Sequence[int]) -> VarMechanism:
    """Serial dictatorship with a fixed priority over all potential agents."""
    priority = tuple(priority)
    return VarMechanism(lambda p: _sd(priority, p), "extended-sd(" + ",".join(str(a + 1) for a in priority) + ")")


def reversed_pairs_sd(priority: Sequence[int]) -> VarMechanism:
    """Serial dictatorship, except that two-agent problems use the reversed priority."""
    priority = tuple(priority)
    return VarMechanism(
        lambda p: _sd(priority[::-1] if len(p.agents) == 2 else priority, p),
        "reversed-pairs-sd(" + ",".join(str(a + 1) for a in priority) + ")",
    )


def object_biased_sd(priority: Sequence[int], favored: int = 0) -> VarMechanism:
    """Serial dictatorship, except that two agents who both rank ``favored``
    first are served in reversed priority order."""
    priority = tuple(priority)

    def rule(p):
        if len(p.agents) == 2 and all(pref[0] == favored for pref in p.prefs):
            return _sd(priority[::-1], p)
        return _sd(priority, p)

    return VarMechanism(rule, f"object-biased-sd({object_name(favored)})")


def worst_first(priority: Sequence[int]) -> VarMechanism:
    """Agents in priority order each take their worst remaining object."""
    priority = tuple(priority)
    return VarMechanism(lambda p: _sd(priority, p, worst=True),
                        "worst-first(" + ",".join(str(a + 1) for a in priority) + ")")


def constant_by_label() -> VarMechanism:
    """Agents in increasing id receive objects in increasing id, whatever they report."""
    return VarMechanism(lambda p: dict(zip(p.agents, p.objects)), "constant-by-label")


def corpus(potentials: Potentials = Potentials()) -> list[VarMechanism]:
    pis = list(itertools.permutations(range(potentials.agents)))
    out = [extended_sd(pi) for pi in pis]
    out += [reversed_pairs_sd(pis[0]), object_biased_sd(pis[0]), worst_first(pis[0]), constant_by_label()]
    return out


VAR_MECHANISMS = {
    "extended-sd": extended_sd,
    "reversed-pairs-sd": reversed_pairs_sd,
    "object-biased-sd": object_biased_sd,
    "worst-first": worst_first,
    "constant-by-label": lambda priority=None: constant_by_label(),
}


# -- checks ------------------------------------------------------------------------


def _names(objs):
    return [object_name(o) for o in objs]


def _alloc_out(x):
    return {str(a + 1): object_name(o) for a, o in sorted(x.items())}


def check_pairwise_consistency(m: VarMechanism, potentials: Potentials = Potentials()) -> AxiomReport:
    work = 0
    for problem in enumerate_problems(potentials):
        if len(problem.agents) < 2:
            continue
        x = m(problem)
        for i, j in itertools.combinations(problem.agents, 2):
            work += 1
            sub = problem.restrict((i, j), (x[i], x[j]))
            y = m(sub)
            if y != {i: x[i], j: x[j]}:
                witness = {
                    "problem": problem.format(),
                    "allocation": _alloc_out(x),
                    "reduced_problem": sub.format(),
                    "reduced_allocation": _alloc_out(y),
                }
                return AxiomReport("pairwise_consistency", False, witness, work)
    return AxiomReport("pairwise_consistency", True, None, work)


def _order_isomorphisms(p: VarProblem, q: VarProblem):
    """Bijections from p's objects to q's objects that carry both rankings over."""
    for image in itertools.permutations(q.objects):
        sigma = dict(zip(p.objects, image))
        if all(tuple(sigma[o] for o in p.pref(a)) == q.pref(a) for a in p.agents):
            yield sigma


def check_pairwise_neutrality(m: VarMechanism, potentials: Potentials = Potentials()) -> AxiomReport:
    pairs = [p for p in enumerate_problems(potentials) if len(p.agents) == 2]
    by_agents: dict[tuple[int, ...], list[VarProblem]] = {}
    for p in pairs:
        by_agents.setdefault(p.agents, []).append(p)
    work = 0
    for group in by_agents.values():
        for p, q in itertools.product(group, repeat=2):
            for sigma in _order_isomorphisms(p, q):
                work += 1
                x, y = m(p), m(q)
                if y != {a: sigma[o] for a, o in x.items()}:
                    witness = {
                        "problem": p.format(),
                        "image_problem": q.format(),
                        "renaming": {object_name(a): object_name(b) for a, b in sigma.items()},
                        "allocation": _alloc_out(x),
                        "image_allocation": _alloc_out(y),
                    }
                    return AxiomReport("pairwise_neutrality", False, witness, work)
    return AxiomReport("pairwise_neutrality", True, None, work)


def check_var_sp(m: VarMechanism, potentials: Potentials = Potentials()) -> AxiomReport:
    work = 0
    for problem in enumerate_problems(potentials):
        x = m(problem)
        for k, a in enumerate(problem.agents):
            pref = problem.prefs[k]
            for lie in itertools.permutations(problem.objects):
                work += 1
                dev = VarProblem(problem.agents, problem.objects, problem.prefs[:k] + (lie,) + problem.prefs[k + 1:])
                got = m(dev)[a]
                if pref.index(got) < pref.index(x[a]):
                    witness = {"problem": problem.format(), "agent": a + 1,
                               "misreport": " > ".join(_names(lie)),
                               "truthful_allotment": object_name(x[a]), "manipulated_allotment": object_name(got)}
                    return AxiomReport("sp", False, witness, work)
    return AxiomReport("sp", True, None, work)


def check_var_gctb(m: VarMechanism, priority: Sequence[int], potentials: Potentials = Potentials()) -> AxiomReport:
    """Globally constant tie-breaking with respect to the given priority."""
    pos = {a: k for k, a in enumerate(priority)}
    work = 0
    for problem in enumerate_problems(potentials):
        x = None
        for i, j in itertools.combinations(problem.agents, 2):
            if problem.pref(i) != problem.pref(j):
                continue
            x = x or m(problem)
            hi, lo = (i, j) if pos[i] < pos[j] else (j, i)
            pref = problem.pref(hi)
            work += 1
            if pref.index(x[hi]) > pref.index(x[lo]):
                witness = {"problem": problem.format(), "allocation": _alloc_out(x),
                           "higher": hi + 1, "lower": lo + 1}
                return AxiomReport("gctb", False, witness, work)
    return AxiomReport("gctb", True, None, work, extra={"priority": [a + 1 for a in priority]})


def _envies(problem, x, i, j):
    pref = problem.pref(i)
    return pref.index(x[j]) < pref.index(x[i])


@dataclass
class PairClass:
    pair: tuple[int, int]
    case: str | None  # one of ENVY_CASES, or None when incoherent
    prevailing: tuple[str, ...] = ()

    @property
    def coherent(self) -> bool:
        return self.case is not None

    def higher(self) -> int | None:
        """The agent ranked first by the induced order, if coherent."""
        i, j = self.pair
        if self.case in ("i_never_envies_j", "j_always_envies_i"):
            return i
        if self.case in ("j_never_envies_i", "i_always_envies_j"):
            return j
        return None

    def to_dict(self):
        i, j = self.pair
        return {"pair": [i + 1, j + 1], "case": self.case, "description": self.describe(),
                "prevailing": list(self.prevailing)}

    def describe(self) -> str:
        if self.case is None:
            return "incoherent: " + (", ".join(self.prevailing) or "no case prevails")
        i, j = (a + 1 for a in self.pair)
        first, verb, second = self.case.split("_", 1)[0], self.case.split("_")[1], self.case.split("_")[-1]
        who = {"i": i, "j": j}
        return f"{who[first]} {verb} envies {who[second]}"


def classify_pair(m: VarMechanism, i: int, j: int, potentials: Potentials = Potentials()) -> PairClass:
    """Which of the four envy patterns holds for ``i`` and ``j`` across all
    problems containing both. ``case`` is None unless exactly one holds."""
    i, j = min(i, j), max(i, j)
    holds = dict.fromkeys(ENVY_CASES, True)
    for problem in enumerate_problems(potentials):
        if i not in problem.agents or j not in problem.agents:
            continue
        x = m(problem)
        ij, ji = _envies(problem, x, i, j), _envies(problem, x, j, i)
        holds["i_never_envies_j"] &= not ij
        holds["i_always_envies_j"] &= ij
        holds["j_never_envies_i"] &= not ji
        holds["j_always_envies_i"] &= ji
    prevailing = tuple(c for c in ENVY_CASES if holds[c])
    return PairClass((i, j), prevailing[0] if len(prevailing) == 1 else None, prevailing)


@dataclass
class PropositionResult:
    applicable: bool
    holds: bool
    order: tuple[int, ...] | None = None
    relation_ok: bool | None = None
    gctb: AxiomReport | None = None
    reason: str = ""

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {
            "applicable": self.applicable,
            "holds": self.holds,
            "order": None if self.order is None else [a + 1 for a in self.order],
            "relation_ok": self.relation_ok,
            "gctb": None if self.gctb is None else self.gctb.to_dict(),
            "reason": self.reason,
        }


def induced_relation(m: VarMechanism, potentials: Potentials = Potentials()) -> dict[tuple[int, int], bool]:
    """``rel[(i, j)]``: i is weakly above j. Reflexive; built from pair classes."""
    rel = {(a, a): True for a in range(potentials.agents)}
    for i, j in itertools.combinations(range(potentials.agents), 2):
        top_agent = classify_pair(m, i, j, potentials).higher()
        rel[(i, j)] = top_agent == i
        rel[(j, i)] = top_agent == j
    return rel


def is_linear_order(rel, agents) -> bool:
    complete = all(rel[(a, b)] or rel[(b, a)] for a in agents for b in agents)
    antisym = all(not (rel[(a, b)] and rel[(b, a)]) for a in agents for b in agents if a != b)
    trans = all(
        rel[(a, c)] or not (rel[(a, b)] and rel[(b, c)]) for a in agents for b in agents for c in agents
    )
    return complete and antisym and trans


def verify_proposition(m: VarMechanism, potentials: Potentials = Potentials()) -> PropositionResult:
    """Pairwise consistency and pairwise neutrality imply globally constant
    tie-breaking, witnessed by the order built from the pair classes.

    When either pairwise property fails the implication holds vacuously and
    the result is marked not applicable.
    """
    pc = check_pairwise_consistency(m, potentials)
    pn = check_pairwise_neutrality(m, potentials)
    if not (pc.holds and pn.holds):
        failed = [r.axiom for r in (pc, pn) if not r.holds]
        return PropositionResult(False, True, reason="not applicable: fails " + ", ".join(failed))
    agents = range(potentials.agents)
    rel = induced_relation(m, potentials)
    if not is_linear_order(rel, agents):
        return PropositionResult(True, False, relation_ok=False, reason="induced relation is not a linear order")
    order = tuple(sorted(agents, key=lambda a: -sum(rel[(a, b)] for b in agents)))
    gctb = check_var_gctb(m, order, potentials)
    return PropositionResult(True, gctb.holds, order, True, gctb)


def coincides_with_extended_sd(m: VarMechanism, potentials: Potentials = Potentials()):
    """The priority whose extended serial dictatorship equals ``m`` on every problem, if any."""
    problems = enumerate_problems(potentials)
    outputs = [m(p) for p in problems]
    for pi in itertools.permutations(range(potentials.agents)):
        if all(_sd(pi, p) == x for p, x in zip(problems, outputs)):
            return pi
    return None


def verify_varpop_corollary(m: VarMechanism, potentials: Potentials = Potentials()) -> bool:
    axioms = (
        check_var_sp(m, potentials).holds
        and check_pairwise_consistency(m, potentials).holds
        and check_pairwise_neutrality(m, potentials).holds
    )
    return axioms == (coincides_with_extended_sd(m, potentials) is not None)
