"""Prefix exchanges checked against brute-force level permutations.

The oracle view of an exchange at level L (at least its resolution) is
the permutation of level-L words obtained by applying it to each word.
Composition, inversion, distance and image computations must agree
with plain dictionary manipulation under that view.
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from dyadlab.dyadic import (
    Dyadic,
    DyadicError,
    DyadicSet,
    ResolutionError,
    all_words,
    dset,
    int_of_word,
    word_of_int,
)
from dyadlab.transform import (
    IDENTITY,
    NotInvariantError,
    PartialDyadicIso,
    PrefixExchange,
    UndefinedError,
    binary_root,
    embed_level,
    finite_odometer,
    induced,
    midpoint_transposition,
    union_partials,
)


def perm_view(t: PrefixExchange, level: int) -> dict[str, str]:
    """Oracle view: the permutation of level words induced by t."""
    return {w: t.apply_word(w) for w in all_words(level)}


def exchange_strategy(max_level: int = 3):
    def at_level(level: int):
        ws = all_words(level)
        return st.permutations(ws).map(
            lambda images: PrefixExchange(tuple(zip(ws, images)))
        )

    return st.integers(min_value=0, max_value=max_level).flatmap(at_level)


# --- validation -------------------------------------------------------------


def test_rejects_length_changing_rule():
    with pytest.raises(DyadicError):
        PrefixExchange((("0", "10"),))


def test_rejects_overlapping_sources():
    with pytest.raises(DyadicError):
        PrefixExchange((("0", "1"), ("01", "10"), ("1", "0"), ("10", "01")))


def test_rejects_unbalanced_moved_region():
    with pytest.raises(DyadicError):
        PrefixExchange((("00", "01"),))


def test_identity_exchange_is_valid():
    assert IDENTITY.is_identity()
    assert IDENTITY.apply_word("0110") == "0110"
    assert IDENTITY.support().is_empty()


# --- canonical form ---------------------------------------------------------


def test_canonical_strips_identity_rules():
    t = PrefixExchange((("00", "00"), ("01", "10"), ("10", "01"), ("11", "11")))
    assert t.canonical_pairs == (("01", "10"), ("10", "01"))
    assert t == midpoint_transposition(2)


def test_canonical_merges_sibling_rules():
    t = PrefixExchange(
        (("010", "100"), ("011", "101"), ("100", "010"), ("101", "011"))
    )
    assert t.canonical_pairs == (("01", "10"), ("10", "01"))


@given(exchange_strategy(), st.integers(min_value=0, max_value=2))
def test_canonical_preserves_action(t, extra):
    level = t.resolution + extra
    assert perm_view(t.canonical(), level) == perm_view(t, level)


# --- stock transformations --------------------------------------------------


def test_odometer_rules():
    assert finite_odometer(2).pairs == (("0", "1"), ("10", "01"), ("11", "00"))
    assert finite_odometer(4).pairs[-1] == ("1111", "0000")


def test_odometer_adds_one():
    assert finite_odometer(2).apply_word("00") == "10"
    for n in (1, 2, 3, 5):
        t = finite_odometer(n)
        for v in range(1 << n):
            w = word_of_int(v, n)
            assert int_of_word(t.apply_word(w)) == (v + 1) % (1 << n)


def test_odometer_is_one_full_cycle():
    t = finite_odometer(3)
    orbit = t.orbit_of_word("000")
    assert orbit == [word_of_int(v, 3) for v in range(8)]
    assert t.orbit_census() == {8: 1}
    assert t.support().is_full()


def test_odometer_short_word_unresolvable():
    with pytest.raises(ResolutionError):
        finite_odometer(2).apply_word("1")


def test_odometer_carries_cylinder_sets():
    t = finite_odometer(3)
    assert t.apply_set(dset("11")) == dset("00")
    assert t.apply_set(dset("01")) == dset("11")
    for ell in (1, 2, 3):
        assert t.apply_set(dset("1" * ell)) == dset("0" * ell)


def test_midpoint_transposition_rules():
    assert midpoint_transposition(2).pairs == (("01", "10"), ("10", "01"))
    assert midpoint_transposition(1) == PrefixExchange((("0", "1"), ("1", "0")))
    for n in (1, 2, 3, 4):
        u = midpoint_transposition(n)
        assert u.support().measure() == Dyadic.pow2(n - 1)
        assert u.compose(u).is_identity()
        lo, hi = (1 << (n - 1)) - 1, 1 << (n - 1)
        assert int_of_word(u.apply_word(word_of_int(lo, n))) == hi
        assert int_of_word(u.apply_word(word_of_int(hi, n))) == lo


def test_distance_between_odometers():
    # the two adding machines disagree exactly where the shorter wraps
    assert finite_odometer(5).uniform_distance(finite_odometer(2)) == Dyadic.pow2(2)
    for ell in (1, 2, 3):
        d = finite_odometer(ell + 1).uniform_distance(finite_odometer(ell))
        assert d == Dyadic.pow2(ell)


def test_distance_to_identity_is_support_measure():
    u = midpoint_transposition(3)
    assert u.uniform_distance(IDENTITY) == u.support().measure()


# --- embedding and roots ----------------------------------------------------


def test_embed_level_keeps_literal_rules():
    e = embed_level(midpoint_transposition(2), 3)
    assert e.pairs == (
        ("010", "100"),
        ("011", "101"),
        ("100", "010"),
        ("101", "011"),
    )
    assert e == midpoint_transposition(2)
    with pytest.raises(ResolutionError):
        embed_level(midpoint_transposition(2), 1)


def test_binary_root_of_transposition():
    v = binary_root(midpoint_transposition(2), 1)
    assert v.pairs == (
        ("010", "011"),
        ("011", "100"),
        ("100", "101"),
        ("101", "010"),
    )
    assert v.orbit_census() == {4: 1}
    assert v.power(2) == midpoint_transposition(2)
    assert v.power(4).is_identity()
    assert not v.power(2).is_identity()


def test_binary_root_degenerate_cases():
    u = midpoint_transposition(2)
    assert binary_root(u, 0) == u
    assert binary_root(IDENTITY, 3).is_identity()


@given(exchange_strategy(max_level=2), st.integers(min_value=0, max_value=3))
@settings(deadline=None)
def test_binary_root_laws(t, p):
    v = binary_root(t, p)
    assert v.power(1 << p) == t
    assert v.support() == t.support()


# --- group structure against the oracle --------------------------------------


@given(exchange_strategy(), exchange_strategy())
@settings(deadline=None)
def test_compose_matches_oracle(t, s):
    level = max(t.resolution, s.resolution)
    view_t, view_s = perm_view(t, level), perm_view(s, level)
    composed = t.compose(s)
    assert composed.resolution <= level
    assert perm_view(composed, level) == {w: view_t[view_s[w]] for w in view_s}


@given(exchange_strategy())
def test_inverse_matches_oracle(t):
    level = t.resolution
    inverted = {img: w for w, img in perm_view(t, level).items()}
    assert perm_view(t.inverse(), level) == inverted
    assert t.compose(t.inverse()).is_identity()
    assert t.inverse().compose(t).is_identity()


@given(exchange_strategy(), exchange_strategy(), exchange_strategy())
@settings(deadline=None, max_examples=40)
def test_compose_is_associative(t, s, r):
    assert t.compose(s).compose(r) == t.compose(s.compose(r))


@given(exchange_strategy(), st.integers(min_value=-5, max_value=5))
@settings(deadline=None, max_examples=40)
def test_power_matches_repeated_compose(t, k):
    direct = IDENTITY
    step = t if k >= 0 else t.inverse()
    for _ in range(abs(k)):
        direct = step.compose(direct)
    assert t.power(k) == direct


@given(exchange_strategy(), exchange_strategy())
@settings(deadline=None)
def test_distance_matches_oracle(t, s):
    level = max(t.resolution, s.resolution)
    view_t, view_s = perm_view(t, level), perm_view(s, level)
    disagreements = sum(1 for w in view_t if view_t[w] != view_s[w])
    assert t.uniform_distance(s).as_fraction() * (1 << level) == disagreements
    assert t.uniform_distance(s) == s.uniform_distance(t)


@given(exchange_strategy(), exchange_strategy())
@settings(deadline=None)
def test_distance_is_support_of_quotient(t, s):
    d = t.uniform_distance(s)
    assert d == s.inverse().compose(t).support().measure()


@given(exchange_strategy(), exchange_strategy(), exchange_strategy())
@settings(deadline=None, max_examples=40)
def test_distance_is_bi_invariant(t, s, r):
    d = t.uniform_distance(s)
    assert t.compose(r).uniform_distance(s.compose(r)) == d
    assert r.compose(t).uniform_distance(r.compose(s)) == d


@given(exchange_strategy(), st.lists(st.booleans(), min_size=0, max_size=4))
def test_apply_set_matches_oracle(t, bits):
    w = "".join("1" if b else "0" for b in bits)
    level = max(t.resolution, len(w))
    image = {t.apply_word(v) for v in all_words(level) if v.startswith(w)}
    assert set(t.apply_set(dset(w)).refine_to_level(level)) == image


@given(exchange_strategy())
def test_preimage_inverts_image(t):
    s = dset("01", "11")
    assert t.preimage_set(t.apply_set(s)) == s


# --- induced restrictions ----------------------------------------------------


def test_induced_on_invariant_region():
    u = midpoint_transposition(2)
    part = induced(u, dset("011", "101"))
    assert part.pairs == (("011", "101"), ("101", "011"))
    assert part.source() == part.target() == dset("011", "101")


def test_induced_keeps_fixed_cylinders():
    u = midpoint_transposition(2)
    part = induced(u, dset("00", "01", "10"))
    assert part.apply_word("000") == "000"
    assert part.apply_word("011") == "101"


def test_induced_rejects_moving_region():
    with pytest.raises(NotInvariantError):
        induced(midpoint_transposition(2), dset("011", "100"))


@given(exchange_strategy())
def test_induced_on_full_space_recovers_exchange(t):
    part = induced(t, DyadicSet.from_words([""]))
    assert PrefixExchange.from_partial(part) == t


# --- partial isomorphisms -----------------------------------------------------


def test_partial_keeps_identity_rules():
    p = PartialDyadicIso((("00", "00"), ("01", "01")))
    assert p.pairs == (("0", "0"),)
    assert p.is_identity()
    assert p.source() == dset("0")


def test_partial_apply_outside_domain():
    p = PartialDyadicIso((("00", "11"),))
    assert p.apply_word("001") == "111"
    with pytest.raises(UndefinedError):
        p.apply_word("10")
    with pytest.raises(ResolutionError):
        p.apply_word("0")
    assert p.defined_on("00") and not p.defined_on("11")


def test_partial_compose_drops_undefined_pieces():
    first = PartialDyadicIso((("0", "1"),))
    second = PartialDyadicIso((("10", "00"),))
    chained = second.compose(first)
    assert chained.pairs == (("00", "00"),)
    assert chained.source() == dset("00")


def test_partial_compose_associative():
    a = PartialDyadicIso((("0", "1"),))
    b = PartialDyadicIso((("10", "01"), ("11", "00")))
    c = PartialDyadicIso((("01", "10"),))
    assert a.compose(b).compose(c) == a.compose(b.compose(c))


def test_partial_inverse_round_trip():
    p = PartialDyadicIso((("00", "10"), ("01", "11")))
    assert p.inverse().compose(p) == PartialDyadicIso.identity_on(dset("0"))
    assert p.inverse().inverse() == p


def test_partial_restrict_source():
    p = PartialDyadicIso((("0", "1"),))
    r = p.restrict_source(dset("01"))
    assert r.pairs == (("01", "11"),)
    assert p.restrict_target(dset("10")).pairs == (("00", "10"),)


def test_partial_power_shrinks_domain():
    p = PartialDyadicIso((("00", "01"), ("01", "10")))
    assert p.power(2).pairs == (("00", "10"),)
    with pytest.raises(DyadicError):
        p.power(0)


def test_union_partials_checks_disjointness():
    a = PartialDyadicIso((("00", "01"),))
    b = PartialDyadicIso((("01", "00"),))
    assert union_partials([a, b]).source() == dset("0")
    with pytest.raises(DyadicError):
        union_partials([a, a])


def test_from_partial_requires_preserved_domain():
    with pytest.raises(DyadicError):
        PrefixExchange.from_partial(PartialDyadicIso((("00", "11"),)))


def test_exchange_json_round_trip():
    t = finite_odometer(3)
    assert PrefixExchange.from_json(t.to_json()) == t
    p = PartialDyadicIso((("00", "00"), ("01", "10")))
    assert PartialDyadicIso.from_json(p.to_json()) == p
