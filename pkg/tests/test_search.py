import pytest

from hallot.axioms import check
from hallot.core import DomainTooLargeError
from hallot.search import (
    SearchSpec,
    cross_validate,
    enumerate_mechanisms,
    family_tables,
    table_keys,
)


def run(n, axioms, **kw):
    return enumerate_mechanisms(SearchSpec(n, tuple(axioms), **kw))


def test_n2_sp_gctb_exhaustive():
    r = run(2, ["sp", "gctb"], mode="exhaustive")
    assert len(r.tables) == 2
    assert r.complete
    assert cross_validate(r, "serial")


def test_n2_modes_agree():
    for axioms in (["sp", "gctb"], ["sp"], ["gsp", "lctb"], ["pareto"], ["nb", "iplb"]):
        a = run(2, axioms, mode="exhaustive")
        b = run(2, axioms, mode="propagated")
        assert table_keys(a.tables) == table_keys(b.tables), axioms


def test_dropping_gctb_enlarges():
    both = run(2, ["sp", "gctb"], mode="exhaustive")
    sp_only = run(2, ["sp"], mode="exhaustive")
    assert table_keys(both.tables) < table_keys(sp_only.tables)


def test_n3_sp_gctb():
    r = run(3, ["sp", "gctb"])
    assert len(r.tables) == 6
    assert cross_validate(r, "serial")
    assert not cross_validate(r, "sequential")


def test_n3_gsp_lctb():
    r = run(3, ["gsp", "lctb"])
    assert len(r.tables) == 24
    assert cross_validate(r, "sequential")


@pytest.mark.parametrize("ordering", ["mrv", "index"])
def test_ordering_independence(ordering):
    base = run(3, ["sp", "gctb"])
    other = run(3, ["sp", "gctb"], ordering=ordering)
    assert table_keys(base.tables) == table_keys(other.tables)


def test_ordering_independence_gsp_lctb():
    a = run(3, ["gsp", "lctb"], ordering="seeded")
    b = run(3, ["gsp", "lctb"], ordering="mrv")
    assert table_keys(a.tables) == table_keys(b.tables)


def test_solutions_recheck():
    for t in run(3, ["gsp", "lctb"]).tables:
        for axiom in ("gsp", "lctb", "pairwise"):
            assert check(t, axiom).holds


def test_solutions_sorted():
    tables = run(3, ["gsp", "lctb"]).tables
    assert tables == sorted(tables)


def test_limit_marks_incomplete():
    r = run(3, ["gsp", "lctb"], limit=5)
    assert len(r.tables) == 5
    assert not r.complete


def test_family_sizes():
    assert len(family_tables(3, "serial")) == 6
    assert len(family_tables(3, "sequential")) == 24


@pytest.mark.parametrize("kw", [
    {"n": 3, "axioms": ("sp",), "mode": "exhaustive"},
    {"n": 4, "axioms": ("sp",), "mode": "propagated"},
])
def test_bounds(kw):
    with pytest.raises(DomainTooLargeError):
        SearchSpec(**kw)


def test_unsupported_axiom_rejected():
    with pytest.raises(ValueError):
        SearchSpec(3, ("neutrality",), mode="propagated")


def test_result_json():
    d = run(2, ["sp", "gctb"], mode="exhaustive").to_dict()
    assert d["count"] == 2
    assert set(d) == {"spec", "count", "tables", "nodes", "complete"}
