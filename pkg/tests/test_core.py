import math

import pytest
from hypothesis import given, strategies as st

from hallot.core import (
    DomainTooLargeError,
    InvalidDomainError,
    ParseError,
    enumerate_preferences,
    enumerate_profiles,
    format_profile,
    get_domain,
    is_bijection,
    is_monotonic_transformation,
    lower_contour,
    parse_profile,
    permutation_index,
    top,
    unanimous_profile,
)


@pytest.mark.parametrize("n,prefs,profiles", [(1, 1, 1), (2, 2, 4), (3, 6, 216)])
def test_enumeration_counts(n, prefs, profiles):
    assert len(enumerate_preferences(n)) == prefs
    assert len(enumerate_profiles(n)) == profiles


def test_n4_domain_size():
    assert get_domain(4).size == 331776
    assert get_domain(4).m == 24


def test_n5_exceeds_cap():
    with pytest.raises(DomainTooLargeError):
        enumerate_profiles(5)


def test_cap_env_override(monkeypatch):
    monkeypatch.setenv("HALLOT_PROFILE_CAP", "100")
    with pytest.raises(DomainTooLargeError):
        enumerate_profiles(3)


def test_preferences_lexicographic():
    assert enumerate_preferences(3)[0] == (0, 1, 2)
    assert enumerate_preferences(3)[-1] == (2, 1, 0)
    assert [permutation_index(p) for p in enumerate_preferences(3)] == list(range(6))


def test_top_and_lower_contour():
    pref = (1, 0, 2)  # b > a > c
    assert top(pref, {0, 2}) == 0
    assert top(pref, {2}) == 2
    assert lower_contour(pref, 0) == frozenset({0, 2})
    assert lower_contour(pref, 2) == frozenset({2})


def test_top_of_empty_set_rejected():
    with pytest.raises(ValueError):
        top((0, 1, 2), set())


def test_monotonic_transformation():
    # a moves up from b > a > c to a > b > c: lower contour of a grows
    assert is_monotonic_transformation((0, 1, 2), (1, 0, 2), 0)
    assert not is_monotonic_transformation((1, 2, 0), (1, 0, 2), 0)
    assert is_monotonic_transformation((1, 0, 2), (1, 0, 2), 0)


def test_unanimous_and_bijection():
    assert unanimous_profile((2, 0, 1)) == ((2, 0, 1),) * 3
    assert is_bijection((2, 0, 1), 3)
    assert not is_bijection((0, 0, 1), 3)


def test_profile_index_order():
    dom = get_domain(3)
    assert dom.profile_index(((0, 1, 2),) * 3) == 0
    assert dom.profile_index(((0, 1, 2), (0, 1, 2), (0, 2, 1))) == 1
    assert dom.profile_index(((0, 2, 1), (0, 1, 2), (0, 1, 2))) == 36
    assert dom.unanimous_index(5) == dom.profile_index(((2, 1, 0),) * 3)


def test_profile_index_rejects_bad_input():
    dom = get_domain(3)
    with pytest.raises(InvalidDomainError):
        dom.profile_index(((0, 1, 2), (0, 1, 2)))
    with pytest.raises(InvalidDomainError):
        dom.perm_index((0, 0, 1))


@given(st.integers(0, 215))
def test_profile_roundtrip(r):
    dom = get_domain(3)
    assert dom.profile_index(dom.profile(r)) == r


@given(st.integers(2, 3), st.data())
def test_top_among_matches_definition(n, data):
    dom = get_domain(n)
    p = data.draw(st.integers(0, dom.m - 1))
    s = data.draw(st.integers(1, (1 << n) - 1))
    avail = {o for o in range(n) if s >> o & 1}
    assert dom.top_among[p, s] == top(tuple(dom.perms[p]), avail)


def test_parse_profile():
    names, prof = parse_profile("1: b > a > c\n2: a > b > c\n3: c > b > a\n")
    assert names == ["a", "b", "c"]
    assert prof == ((1, 0, 2), (0, 1, 2), (2, 1, 0))


def test_format_parse_roundtrip():
    prof = ((1, 0, 2), (0, 1, 2), (2, 1, 0))
    text = format_profile(prof)
    assert parse_profile(text)[1] == prof


@pytest.mark.parametrize("text", [
    "1: a > b\n2: b > a > c\n",
    "1: a > a > b\n2: a > b\n",
    "x: a > b\n",
    "1: a > b\n1: b > a\n",
])
def test_parse_profile_errors(text):
    with pytest.raises(ParseError):
        parse_profile(text)


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        parse_profile("1: a > b\n2 b > a\n")
    assert info.value.line == 2


def test_domain_arrays_read_only():
    dom = get_domain(2)
    with pytest.raises(ValueError):
        dom.perms[0, 0] = 1
    assert dom.size == math.factorial(2) ** 2
