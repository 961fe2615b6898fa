"""Recovery of commuting factors from powers of their product.

Frozen values below were computed by hand from the congruences: the
least l with 4 l = 1 mod 9 is 7, the least l with 3 l = 1 mod 2 is 1,
and the least l with 2 l = 1 mod 5 is 3.
"""

import random

import pytest

from dyadlab.commuting import (
    FactorSpec,
    NotCoprime,
    SupportsOverlap,
    random_cycle_factor,
    reconstruct_all,
    reconstruct_factor,
    reconstruction_exponent,
)
from dyadlab.dyadic import DyadicError, dset
from dyadlab.transform import (
    IDENTITY,
    PrefixExchange,
    binary_root,
    finite_odometer,
    midpoint_transposition,
)

TWO_CYCLE = PrefixExchange((("00", "01"), ("01", "00")))
THREE_CYCLE = PrefixExchange(
    (("100", "101"), ("101", "110"), ("110", "100"))
)


def test_reconstruction_exponent_frozen_values():
    assert reconstruction_exponent(2, 3, 1) == 1
    assert reconstruction_exponent(3, 2, 2) == 7
    assert reconstruction_exponent(5, 2, 1) == 3


def test_reconstruction_exponent_zeroth_power_is_one():
    assert reconstruction_exponent(3, 2, 0) == 1


def test_reconstruction_exponent_congruence_holds():
    for p, q in ((2, 3), (3, 2), (5, 6), (9, 10), (4, 15)):
        for n in range(4):
            ell = reconstruction_exponent(p, q, n)
            assert ell >= 1
            assert (ell * q**n) % p**n == 1 % p**n


def test_reconstruction_exponent_rejects_shared_factors():
    with pytest.raises(NotCoprime):
        reconstruction_exponent(4, 6, 1)
    with pytest.raises(NotCoprime):
        reconstruction_exponent(2, 2, 1)


def test_factor_spec_accepts_matching_orbits():
    spec = FactorSpec(TWO_CYCLE, 2)
    assert spec.orbit_exponent() == 1
    assert FactorSpec(THREE_CYCLE, 3).orbit_exponent() == 1


def test_factor_spec_rejects_foreign_orbit_length():
    with pytest.raises(DyadicError):
        FactorSpec(TWO_CYCLE, 3)
    with pytest.raises(DyadicError):
        FactorSpec(THREE_CYCLE, 2)


def test_factor_spec_rejects_base_below_two():
    with pytest.raises(DyadicError):
        FactorSpec(TWO_CYCLE, 1)


def test_factor_spec_identity_has_exponent_zero():
    assert FactorSpec(IDENTITY, 7).orbit_exponent() == 0


def test_factor_spec_composite_base_covers_mixed_orbits():
    both = TWO_CYCLE.compose(THREE_CYCLE)
    assert FactorSpec(both, 6).orbit_exponent() == 1


def test_odometer_orbit_is_a_full_power_of_two():
    spec = FactorSpec(finite_odometer(3), 2)
    assert spec.map.orbit_census() == {8: 1}
    assert spec.orbit_exponent() == 3


def test_root_orbits_stay_powers_of_two():
    for n in (2, 3):
        for p in (1, 2):
            spec = FactorSpec(binary_root(midpoint_transposition(n), p), 2)
            for length in spec.map.orbit_census():
                assert length == 1 << length.bit_length() - 1


def test_third_power_of_product_recovers_the_two_cycle():
    product = TWO_CYCLE.compose(THREE_CYCLE)
    assert product.power(3) == TWO_CYCLE


def test_reconstruct_factor_is_exact_on_the_frozen_pair():
    t = FactorSpec(TWO_CYCLE, 2)
    u = FactorSpec(THREE_CYCLE, 3)
    recovered, distance = reconstruct_factor(t, u)
    assert recovered == TWO_CYCLE
    assert distance.is_zero()


def test_reconstruct_factor_against_identity_noise():
    t = FactorSpec(TWO_CYCLE, 2)
    recovered, distance = reconstruct_factor(t, FactorSpec(IDENTITY, 3))
    assert recovered == TWO_CYCLE
    assert distance.is_zero()


def test_reconstruct_factor_rejects_overlap_and_shared_base():
    t = FactorSpec(TWO_CYCLE, 2)
    inside = FactorSpec(
        PrefixExchange((("001", "010"), ("010", "011"), ("011", "001"))), 3
    )
    with pytest.raises(SupportsOverlap):
        reconstruct_factor(t, inside)
    with pytest.raises(NotCoprime):
        reconstruct_factor(t, FactorSpec(binary_root(TWO_CYCLE, 1), 2))


def test_disjoint_supports_commute_exactly():
    rng = random.Random(11)
    for _ in range(12):
        a = random_cycle_factor(rng, dset("0"), 2, 5, cycles=3).map
        b = random_cycle_factor(rng, dset("1"), 3, 5, cycles=2).map
        assert a.compose(b) == b.compose(a)


def test_reconstruct_factor_on_random_coprime_pairs():
    rng = random.Random(23)
    for _ in range(10):
        t = random_cycle_factor(rng, dset("0"), 2, 6, cycles=4)
        u = random_cycle_factor(rng, dset("1"), 3, 6, cycles=3)
        recovered, distance = reconstruct_factor(t, u)
        assert recovered == t.map
        assert distance.is_zero()


def test_reconstruct_all_single_factor_returns_it():
    t = FactorSpec(TWO_CYCLE, 2)
    assert reconstruct_all([t]) == [TWO_CYCLE]


def test_reconstruct_all_recovers_three_coprime_factors():
    rng = random.Random(5)
    for _ in range(5):
        factors = [
            random_cycle_factor(rng, dset("00"), 2, 6, cycles=2),
            random_cycle_factor(rng, dset("01"), 3, 6, cycles=2),
            random_cycle_factor(rng, dset("1"), 5, 6, cycles=2),
        ]
        recovered = reconstruct_all(factors)
        assert recovered == [f.map for f in factors]


def test_reconstruct_all_rejects_bad_collections():
    a = random_cycle_factor(random.Random(1), dset("0"), 2, 5)
    b = random_cycle_factor(random.Random(2), a.map.support(), 3, 8)
    c = random_cycle_factor(random.Random(3), dset("1"), 4, 5)
    with pytest.raises(SupportsOverlap):
        reconstruct_all([a, b])
    with pytest.raises(NotCoprime):
        reconstruct_all([a, c])


def test_random_cycle_factor_validates_capacity():
    with pytest.raises(DyadicError):
        random_cycle_factor(random.Random(0), dset("00"), 5, 2)
