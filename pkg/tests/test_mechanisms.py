import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hallot.core import HallotError, get_domain, is_bijection, top
from hallot.mechanisms import (
    COUNTEREXAMPLES,
    Hierarchy,
    MechanismTable,
    StructureError,
    all_hierarchies,
    all_priorities,
    constant_mechanism,
    counterexample,
    materialize,
    materialize_by_rule,
    sd_mechanism,
    sequential_dictatorship,
    seqd_mechanism,
    serial_dictatorship,
)

A, B, C = 0, 1, 2
ABC = (A, B, C)

# root 1; after 1 takes a the next dictator is 2, otherwise 3
H = Hierarchy(3, 0, {((0, A),): 1, ((0, B),): 2, ((0, C),): 2})


def test_sd_identical_preferences():
    assert serial_dictatorship((0, 1, 2), (ABC,) * 3) == (A, B, C)


def test_sd_reversed_priority():
    assert serial_dictatorship((2, 1, 0), (ABC,) * 3) == (C, B, A)


def test_sd_mixed_profile():
    prof = ((B, A, C), (B, C, A), (A, B, C))
    assert serial_dictatorship((0, 1, 2), prof) == (B, C, A)


def test_seqd_first_branch():
    prof = ((A, B, C), (C, A, B), (C, B, A))
    assert sequential_dictatorship(H, prof) == (A, C, B)


def test_seqd_second_branch():
    prof = ((B, A, C), (C, A, B), (C, B, A))
    assert sequential_dictatorship(H, prof) == (B, A, C)


@pytest.mark.parametrize("pi", all_priorities(3))
def test_priority_hierarchy_matches_sd(pi):
    a = materialize(seqd_mechanism(Hierarchy.from_priority(pi)), 3)
    b = materialize(sd_mechanism(pi), 3)
    assert a == b


def test_all_hierarchies_distinct():
    hs = list(all_hierarchies(3))
    assert len(hs) == 24
    assert len(set(hs)) == 24
    assert len({materialize(seqd_mechanism(h), 3).key() for h in hs}) == 24


def test_n2_hierarchies_are_priorities():
    assert len(list(all_hierarchies(2))) == 2


@pytest.mark.parametrize("children", [
    {((0, A),): 1},                                   # missing branches
    {((0, A),): 0, ((0, B),): 1, ((0, C),): 1},       # repeats the root
    {((0, A),): 1, ((0, B),): 2, ((0, C),): 2, ((1, A),): 2},  # unreachable path
])
def test_invalid_hierarchies(children):
    with pytest.raises(StructureError):
        Hierarchy(3, 0, children)


def test_hierarchy_dict_roundtrip():
    for h in all_hierarchies(3):
        d = h.to_dict()
        assert Hierarchy.from_dict(json.loads(json.dumps(d))) == h


def test_constant_mechanism():
    m = constant_mechanism(ABC)
    assert m(((C, B, A),) * 3) == ABC
    t = materialize(m, 3)
    assert len(set(t.entries.tolist())) == 1
    assert t.entries.size == 216


def test_constant_n2():
    t = materialize(constant_mechanism((A, B)), 2)
    assert t.entries.tolist() == [0, 0, 0, 0]


def test_sd_n2_table():
    t = materialize(sd_mechanism((0, 1)), 2)
    assert [t.allocation(r) for r in range(4)] == [(A, B), (A, B), (B, A), (B, A)]


def test_sd_n3_bijections():
    t = materialize(sd_mechanism((0, 1, 2)), 3)
    assert all(is_bijection(t.allocation(r), 3) for r in range(216))


def test_ex1_examples():
    m = counterexample("ex1_sp_violation")
    assert m((ABC,) * 3) == ABC
    assert m((ABC, ABC, (A, C, B))) == (A, B, C)
    # agent 3 takes c ahead of agent 2 on the second branch
    assert m((ABC, (A, C, B), (A, B, C))) == (A, C, B)


def test_ex3_is_constant():
    m = counterexample("ex3_constant")
    assert len(set(materialize(m, 3).entries.tolist())) == 1


def test_unknown_counterexample_lists_names():
    with pytest.raises(HallotError) as info:
        counterexample("nope")
    assert "ex1_sp_violation" in str(info.value)


@pytest.mark.parametrize("name,pi,pi2", [
    ("ex1_sp_violation", (0, 1, 2), (0, 2, 1)),
    ("ex2_bossy", (0, 1, 2), (0, 2, 1)),
    ("neutral_not_gctb", (0, 1, 2), (0, 2, 1)),
    ("pareto_not_gctb", (0, 1, 2), (2, 1, 0)),
])
def test_branch_mechanisms_pick_one_sd(name, pi, pi2):
    t = materialize(counterexample(name), 3)
    a = materialize(sd_mechanism(pi), 3).entries
    b = materialize(sd_mechanism(pi2), 3).entries
    assert np.all((t.entries == a) | (t.entries == b))
    assert np.any(t.entries != a) and np.any(t.entries != b)


@pytest.mark.parametrize("name", sorted(COUNTEREXAMPLES))
def test_vectorized_matches_rule(name):
    m = counterexample(name)
    dom = get_domain(3)
    assert np.array_equal(materialize(m, 3).entries, materialize_by_rule(m, dom))


@pytest.mark.parametrize("x", [A, B, C])
def test_ex2_object_parameter(x):
    m = counterexample("ex2_bossy", x=x)
    dom = get_domain(3)
    assert np.array_equal(materialize(m, 3).entries, materialize_by_rule(m, dom))


def test_sd_recursion_replayed():
    pi = (2, 0, 1)
    t = materialize(sd_mechanism(pi), 3)
    dom = t.domain
    for r in range(dom.size):
        prof = dom.profile(r)
        left = set(range(3))
        for a in pi:
            o = top(prof[a], left)
            assert t.allocation(r)[a] == o
            left.discard(o)


def test_table_json_roundtrip_bit_exact(tmp_path):
    for name in COUNTEREXAMPLES:
        t = materialize(counterexample(name), 3)
        text = t.to_json()
        u = MechanismTable.from_json(text)
        assert u == t
        assert u.to_json() == text
        path = tmp_path / f"{name}.json"
        t.save(path)
        assert MechanismTable.load(path).to_json() == text


def test_table_json_schema():
    d = json.loads(materialize(sd_mechanism((0, 1)), 2).to_json())
    assert d == {"n": 2, "objects": ["a", "b"], "entries": [["a", "b"], ["a", "b"], ["b", "a"], ["b", "a"]]}


@pytest.mark.parametrize("bad", [
    {"n": 2, "objects": ["a", "b"], "entries": [["a", "b"]] * 3},
    {"n": 2, "objects": ["a", "b"], "entries": [["a", "a"]] * 4},
    {"n": 2, "objects": ["a", "b"], "entries": [["a", "z"]] * 4},
])
def test_table_json_rejects_malformed(bad):
    with pytest.raises(HallotError):
        MechanismTable.from_dict(bad)


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(3)), st.integers(0, 215))
def test_table_call_matches_mechanism(pi, r):
    m = sd_mechanism(tuple(pi))
    t = materialize(m, 3)
    prof = t.domain.profile(r)
    assert t(prof) == m(prof)
