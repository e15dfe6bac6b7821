import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hallot.axioms import (
    AXIOMS,
    DomainTooLargeError,
    check,
    check_envyfree,
    check_gctb,
    check_gsp,
    check_iplb,
    check_lctb,
    check_monotonic,
    check_neutrality,
    check_nonbossy,
    check_pairwise_efficiency,
    check_pareto,
    check_sp,
    check_weak_fairness,
    replay,
)
from hallot.core import get_domain
from hallot.mechanisms import (
    MechanismTable,
    all_priorities,
    constant_mechanism,
    counterexample,
    materialize,
    sd_mechanism,
)
from hallot.search import random_tables

A, B, C = 0, 1, 2


def table(name, **params):
    return materialize(counterexample(name, **params), 3)


def sd(*pi):
    return materialize(sd_mechanism(pi), len(pi))


def const(*x):
    return materialize(constant_mechanism(x), len(x))


# -- oracle examples -----------------------------------------------------------------


def test_sd_strategy_proof():
    assert check_sp(sd(0, 1, 2)).holds


def test_ex1_manipulation_from_unanimous_profile():
    t = table("ex1_sp_violation")
    dom = t.domain
    truth = ((A, B, C),) * 3
    lie = ((A, B, C), (A, B, C), (B, C, A))
    assert t(truth)[2] == C
    assert t(lie)[2] == B
    report = check_sp(t)
    assert not report.holds
    w = report.witness
    assert w["profile"] == dom.profile_index(truth)
    assert w["agent"] == 3
    assert (w["truthful_allotment"], w["manipulated_allotment"]) == ("c", "b")


def test_constant_incentive_properties():
    t = const(A, B, C)
    for f in (check_sp, check_nonbossy, check_monotonic, check_iplb):
        assert f(t).holds
    assert check_gsp(t, mode="direct").holds


def test_sd_gsp_direct():
    assert check_gsp(sd(0, 1, 2), mode="direct").holds


def test_ex2_bossy_but_strategy_proof():
    t = table("ex2_bossy")
    assert check_sp(t).holds
    assert not check_gsp(t, mode="equivalence").holds
    report = check_nonbossy(t)
    w = report.witness
    assert w["agent"] == 1
    # agent 1 keeps their object; agents 2 and 3 swap
    assert w["before"][0] == w["after"][0]
    assert w["before"][1:] == w["after"][1:][::-1]


def test_ex1_not_monotonic():
    assert not check_monotonic(table("ex1_sp_violation")).holds


def test_gctb_not_pareto_fails_pareto():
    assert not check_pareto(table("gctb_not_pareto")).holds


def test_constant_n2_pareto_witness():
    t = const(A, B)
    for f in (check_pareto, check_pairwise_efficiency):
        w = f(t).witness
        assert w["preferences"] == ["b>a", "a>b"]
        assert w["allocation"] == ["a", "b"]


def test_envy_always_present():
    w = check_envyfree(sd(0, 1)).witness
    assert w["preferences"] == ["a>b", "a>b"]
    assert (w["envier"], w["envied"]) == (2, 1)


def test_envyfree_n1():
    assert check_envyfree(MechanismTable(1, [0])).holds


@pytest.mark.parametrize("pi", all_priorities(3))
def test_weak_fairness_recovers_priority(pi):
    report = check_weak_fairness(sd(*pi))
    assert report.holds
    assert report.extra["priority"] == [a + 1 for a in pi]


def test_weak_fairness_constant_n2():
    report = check_weak_fairness(const(A, B))
    assert not report.holds
    assert len(report.witness["defeats"]) == 2


def test_weak_fairness_ex2():
    assert not check_weak_fairness(table("ex2_bossy")).holds


def test_weak_fairness_full_lists_all():
    # at n=2 the constant (a,b) rule cannot be weakly fair, but SD can, with one priority
    r = check_weak_fairness(sd(1, 0), full=True)
    assert r.extra["priorities"] == [[2, 1]]


@pytest.mark.parametrize("mode", [1, 2])
def test_gctb_examples(mode):
    r = check_gctb(sd(0, 1, 2), mode=mode)
    assert r.holds
    if mode == 1:
        assert r.extra["priority"] == [1, 2, 3]
    assert not check_gctb(const(A, B, C), mode=mode).holds
    assert check_gctb(table("ex1_sp_violation"), mode=mode).holds


@pytest.mark.parametrize("mode", [3, 4])
def test_lctb_examples(mode):
    assert check_lctb(table("ex2_bossy"), mode=mode).holds
    assert not check_lctb(table("neutral_not_gctb"), mode=mode).holds


def test_lctb_neutral_not_gctb_witness():
    w = check_lctb(table("neutral_not_gctb"), mode=4).witness
    assert w["agents"] == [2, 3]
    first, second = w["preferences"]
    assert first[0] == second[0]                 # same context
    assert first[1] == first[2] == first[0]     # pair agrees with agent 1
    assert second[1] == second[2] != second[0]


def test_lctb_mode3_rule_total():
    r = check_lctb(sd(2, 0, 1), mode=3)
    rule = r.extra["rule"]
    assert set(rule.rules) == {(0, 1), (0, 2), (1, 2)}
    assert all(len(ctx) == 6 for ctx in rule.rules.values())
    assert rule.prioritized(0, 1, (0,)) == 0


def test_iplb_examples():
    assert check_iplb(sd(0, 1, 2)).holds
    assert not check_iplb(table("ex1_sp_violation")).holds
    assert check_iplb(const(A, B, C)).holds


def test_neutrality_examples():
    assert check_neutrality(sd(0, 1, 2)).holds
    assert check_neutrality(table("neutral_not_gctb")).holds
    assert not check_neutrality(table("gctb_not_pareto")).holds


def test_gsp_direct_rejected_for_n4():
    t = sd(0, 1, 2, 3)
    with pytest.raises(DomainTooLargeError):
        check_gsp(t, mode="direct")
    assert check_gsp(t).holds


def test_n4_checks_on_sd():
    t = sd(3, 1, 0, 2)
    for a in ("sp", "nb", "monotonic", "pairwise", "gctb", "iplb"):
        assert check(t, a).holds, a


def test_report_json_shape():
    d = check_sp(table("ex1_sp_violation")).to_dict()
    assert {"axiom", "holds", "witness", "work"} <= set(d)


def test_full_mode_counts():
    r = check_sp(table("ex1_sp_violation"), full=True)
    assert r.violations > 1
    assert r.witness == check_sp(table("ex1_sp_violation")).witness


# -- invariants over the corpus --------------------------------------------------------


def test_gsp_sp_nb_monotonic_agree(corpus):
    for t in corpus:
        direct = check_gsp(t, mode="direct").holds
        assert direct == (check_sp(t).holds and check_nonbossy(t).holds), t.label
        assert direct == check_monotonic(t, mode="direct").holds, t.label
        assert direct == check_monotonic(t, mode="single").holds, t.label


def test_implication_chains(corpus):
    for t in corpus:
        if check_pareto(t).holds:
            assert check_pairwise_efficiency(t).holds
        if check_weak_fairness(t).holds:
            assert check_gctb(t).holds
        if check_gctb(t).holds:
            assert check_lctb(t).holds
        if check_gsp(t).holds and check_lctb(t).holds:
            assert check_pairwise_efficiency(t).holds


def test_formulation_equivalences(corpus):
    for t in corpus:
        assert check_gctb(t, mode=1).holds == check_gctb(t, mode=2).holds, t.label
        assert check_lctb(t, mode=3).holds == check_lctb(t, mode=4).holds, t.label


def test_envy_everywhere(corpus):
    assert not any(check_envyfree(t).holds for t in corpus)


def test_witnesses_replay(corpus):
    for t in corpus:
        for axiom in AXIOMS:
            r = check(t, axiom)
            if not r.holds:
                assert r.witness is not None
                assert replay(t, r), (t.label, axiom)


def test_replay_rejects_forged_witness():
    t = table("ex1_sp_violation")
    r = check_sp(t)
    r.witness = dict(r.witness, misreport="a>b>c")
    assert not replay(t, r)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_random_tables_invariants(seed):
    (t,) = random_tables(3, 1, seed=seed)
    assert check_gctb(t, mode=1).holds == check_gctb(t, mode=2).holds
    assert check_lctb(t, mode=3).holds == check_lctb(t, mode=4).holds
    for axiom in ("sp", "nb", "pareto", "pairwise", "iplb", "neutrality", "lctb"):
        r = check(t, axiom)
        if not r.holds:
            assert replay(t, r)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 3), st.data())
def test_sd_passes_everything(n, data):
    pi = tuple(data.draw(st.permutations(range(n))))
    t = sd(*pi)
    for axiom in AXIOMS:
        if axiom != "envyfree":
            assert check(t, axiom).holds, axiom
