import pytest

from hallot.axioms import check_gctb, check_gsp, check_iplb, check_lctb, check_sp
from hallot.characterize import (
    NoDictatorError,
    characterize,
    is_serial_dictatorship,
    recover_hierarchy,
    recover_priority,
    verify_corollary1,
    verify_corollary2,
    verify_theorem,
)
from hallot.mechanisms import (
    COUNTEREXAMPLES,
    Hierarchy,
    all_hierarchies,
    all_priorities,
    constant_mechanism,
    counterexample,
    materialize,
    sd_mechanism,
    seqd_mechanism,
)

A, B, C = 0, 1, 2
H = Hierarchy(3, 0, {((0, A),): 1, ((0, B),): 2, ((0, C),): 2})


def sd(*pi):
    return materialize(sd_mechanism(pi), len(pi))


@pytest.mark.parametrize("pi", [(1, 0, 2), (0, 1, 2)])
def test_recover_priority_examples(pi):
    assert recover_priority(sd(*pi)) == pi


def test_recover_priority_from_constant():
    t = materialize(constant_mechanism((B, A, C)), 3)
    assert recover_priority(t) == (1, 0, 2)
    assert is_serial_dictatorship(t).family == "none"


def test_serial_roundtrip():
    r = is_serial_dictatorship(sd(2, 0, 1))
    assert r.family == "serial"
    assert r.priority == (2, 0, 1)
    assert r.certificate == {"equal": True, "profiles_compared": 216}


def test_sequential_table_not_serial():
    t = materialize(seqd_mechanism(H), 3)
    r = is_serial_dictatorship(t)
    assert r.family == "none"
    assert "mismatch_profile" in r.certificate
    full = characterize(t)
    assert full.family == "sequential"
    assert full.hierarchy == H


def test_recover_two_branch_hierarchy():
    assert recover_hierarchy(materialize(seqd_mechanism(H), 3)) == H


def test_sd_recovers_priority_shaped_hierarchy():
    assert recover_hierarchy(sd(1, 2, 0)) == Hierarchy.from_priority((1, 2, 0))


def test_ex1_no_dictator_at_depth_two():
    with pytest.raises(NoDictatorError) as info:
        recover_hierarchy(materialize(counterexample("ex1_sp_violation"), 3))
    assert len(info.value.path) == 1
    assert "depth 2" in str(info.value)


@pytest.mark.parametrize("pi", all_priorities(3))
def test_priority_roundtrip_all(pi):
    assert recover_priority(sd(*pi)) == pi


def test_hierarchy_roundtrip_all():
    for h in all_hierarchies(3):
        assert recover_hierarchy(materialize(seqd_mechanism(h), 3)) == h


@pytest.mark.parametrize("name", sorted(COUNTEREXAMPLES))
def test_counterexamples_not_in_either_family(name):
    assert characterize(materialize(counterexample(name), 3)).family == "none"


def test_verify_theorem_cases():
    for pi in all_priorities(3):
        assert verify_theorem(sd(*pi), "thm1")
    assert verify_theorem(materialize(counterexample("ex2_bossy"), 3), "thm2")
    assert verify_theorem(materialize(constant_mechanism((A, B, C)), 3), "thm1")
    with pytest.raises(ValueError):
        verify_theorem(sd(0, 1, 2), "thm3")


def test_verify_corollary2_cases():
    assert verify_corollary2(sd(0, 1, 2))
    seq = materialize(seqd_mechanism(H), 3)
    assert not check_iplb(seq).holds
    assert verify_corollary2(seq)
    assert verify_corollary2(materialize(constant_mechanism((A, B, C)), 3))


def test_result_json():
    d = characterize(materialize(seqd_mechanism(H), 3)).to_dict()
    assert d["family"] == "sequential"
    assert d["priority"] is None
    assert d["hierarchy"] == H.to_dict()


def test_soundness_and_completeness(corpus):
    for t in corpus:
        fam = characterize(t).family
        if fam == "serial":
            assert check_sp(t).holds and check_gctb(t).holds
        if check_sp(t).holds and check_gctb(t).holds:
            assert fam == "serial"
        if check_gsp(t).holds and check_lctb(t).holds:
            assert fam in ("serial", "sequential")
        assert verify_theorem(t, "thm1") and verify_theorem(t, "thm2")
        assert verify_corollary1(t) and verify_corollary2(t)
