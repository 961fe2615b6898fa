"""Shrinking, witness sweeps, and the free-factor tower.

Frozen values were computed by hand before the implementation: the
greedy shrink of the full space under the level-2 midpoint swap keeps
exactly the cell 01; the stage word counts at depth 1 with one free
generator are 3, 6, 12, 24 with union size 45; the two-stage tower on
cells of measure 1/16 with three-element carriers uses cell measures
1/64 and 1/4096 and leaves slacks 1/64 and 241/4096.
"""

import random

import pytest

from dyadlab.dyadic import FULL, Dyadic, DyadicError, dset
from dyadlab.faithful import (
    DisjointnessPreconditionFailed,
    EpsilonTooLarge,
    HFCertificate,
    LabeledMap,
    NowhereMoving,
    QuarterBoundViolated,
    TranslateFamily,
    disjoint_shrink,
    evaluate_word,
    fp_evaluate,
    fp_label,
    fp_multiply,
    free_product_tower,
    hf_check,
    power_family,
    quarter_shrink,
    _tower_words,
)
from dyadlab.rfactions import action_sequence, translation_action
from dyadlab.transform import (
    IDENTITY,
    PrefixExchange,
    finite_odometer,
    midpoint_transposition,
    random_exchange,
)

U2 = midpoint_transposition(2)
T4 = finite_odometer(4)


def test_shrink_of_full_space_keeps_the_first_moved_cell():
    assert disjoint_shrink(U2, FULL) == dset("01")


def test_shrink_raises_on_fixed_sets():
    with pytest.raises(NowhereMoving):
        disjoint_shrink(IDENTITY, FULL)
    with pytest.raises(NowhereMoving):
        disjoint_shrink(U2, dset("00", "11"))


def test_shrink_output_is_disjoint_from_its_image():
    rng = random.Random(31)
    for _ in range(15):
        t = random_exchange(rng, 3)
        if t.is_identity():
            continue
        shrunk = disjoint_shrink(t, FULL)
        assert not shrunk.measure().is_zero()
        assert shrunk.is_disjoint(t.apply_set(shrunk))


def test_iterated_shrink_separates_all_translates():
    t = finite_odometer(3)
    quotients = [t.power(k) for k in (-2, -1, 1, 2)]
    region = FULL
    for q in quotients:
        region = disjoint_shrink(q, region)
    translates = [t.power(i).apply_set(region) for i in range(-1, 2)]
    for i in range(3):
        for j in range(i + 1, 3):
            assert translates[i].is_disjoint(translates[j])


def test_power_family_labels_and_maps():
    family = power_family(T4, 1)
    assert [m.label for m in family] == ["t^-1", "1", "t"]
    assert family[1].map == IDENTITY
    assert family[2].map == T4


def test_translate_family_rejects_overlaps_and_empty_stages():
    with pytest.raises(DyadicError, match="overlaps"):
        TranslateFamily(
            ((LabeledMap("1", IDENTITY), LabeledMap("u", U2)),),
            (dset("0"),),
        )
    with pytest.raises(DyadicError, match="empty"):
        TranslateFamily(((LabeledMap("1", IDENTITY),),), (dset(),))


QUARTER_B = (dset("0"), dset("00011"))
QUARTER_F = ((LabeledMap("1", IDENTITY),), power_family(T4, 1))


def test_quarter_shrink_frozen_example():
    family = quarter_shrink(QUARTER_B, QUARTER_F)
    assert family.a_seq[0] == dset("0").difference(dset("00011"))
    assert family.a_seq[0].measure() == Dyadic.make(15, 5)
    assert family.a_seq[1] == dset("00011")


def test_quarter_shrink_identity_families_subtract_later_stages():
    b_seq = (FULL, dset("000"))
    f_seq = (
        (LabeledMap("1", IDENTITY),),
        (LabeledMap("1", IDENTITY),),
    )
    family = quarter_shrink(b_seq, f_seq)
    assert family.a_seq[0] == dset("000").complement()
    assert family.a_seq[1] == dset("000")


def test_quarter_shrink_flags_the_offending_stage():
    with pytest.raises(QuarterBoundViolated, match="stage 0"):
        quarter_shrink((dset("0"), dset("0011")), QUARTER_F)


def test_quarter_shrink_requires_disjoint_translates():
    with pytest.raises(DyadicError, match="before shrinking"):
        quarter_shrink(
            (dset("0"), dset("00011")),
            ((LabeledMap("1", IDENTITY), LabeledMap("u", U2)), QUARTER_F[1]),
        )


def test_quarter_family_points_are_moved_by_word_quotients():
    family = quarter_shrink(QUARTER_B, QUARTER_F)
    members = family.f_seq[1]
    for i, f1 in enumerate(members):
        for j, f2 in enumerate(members):
            if i == j:
                continue
            quotient = f2.map.inverse().compose(f1.map)
            assert family.a_seq[1].is_subset(quotient.support())


def test_hf_check_full_support_single_generator():
    report = hf_check((finite_odometer(3),), 1, 3)
    assert report.ok
    assert report.witness == FULL
    assert report.words_checked == 2


def test_hf_check_radius_two_on_a_long_cycle():
    report = hf_check((finite_odometer(5),), 2, 5)
    assert report.ok
    assert report.witness == FULL
    assert report.words_checked == 4


def test_hf_check_finds_the_involution_collapse():
    report = hf_check((U2,), 2, 2)
    assert not report.ok
    assert report.failing_word == (1, 1)
    assert report.witness.measure().is_zero()


def test_hf_check_disjoint_generators_have_no_common_witness():
    a = PrefixExchange((("00", "01"), ("01", "00")))
    b = PrefixExchange((("10", "11"), ("11", "10")))
    report = hf_check((a, b), 1, 2)
    assert not report.ok
    assert report.failing_word == (2,)


def test_evaluate_word_composes_rightmost_first():
    t = finite_odometer(3)
    assert evaluate_word((t,), (1, 1)) == t.power(2)
    assert evaluate_word((t, U2), (1, 2)) == t.compose(U2)
    assert evaluate_word((t,), (1, -1)) == IDENTITY


def test_fp_multiply_merges_and_cancels():
    t1 = (("T", 1),)
    assert fp_multiply(t1, (("T", -1),)) == ()
    assert fp_multiply(t1, (("T", 2),)) == (("T", 3),)
    w = (("L", (1,)), ("T", 1))
    assert fp_multiply(w, (("T", -1), ("L", (-1,)))) == ()
    assert fp_multiply((("L", (1,)),), (("L", (-1, 2)),)) == (("L", (2,)),)
    assert fp_multiply(t1, (("L", (1,)),)) == (("T", 1), ("L", (1,)))


def test_fp_labels_render_alternating_words():
    assert fp_label(()) == "1"
    assert fp_label((("T", 2), ("L", (1, -2)))) == "t^2 x1 x2^-1"
    assert fp_label((("L", (-1,)), ("T", -1))) == "x1^-1 t^-1"


def test_tower_word_counts_at_depth_one():
    _, i_sets, j_sets, h_set = _tower_words(1, 1)
    assert [len(s) for s in i_sets] == [3, 12]
    assert [len(s) for s in j_sets] == [6, 24]
    assert len(h_set) == 45
    _, i0, j0, h0 = _tower_words(1, 0)
    assert [len(s) for s in i0] == [1]
    assert [len(s) for s in j0] == [0]
    assert h0 == {()}


def test_trivial_tower_allocates_one_row():
    result = free_product_tower(
        finite_odometer(3),
        [translation_action(3, 1, 1)],
        [dset("00")],
    )
    assert result.carrier_sizes == (3,)
    assert result.epsilons == (Dyadic.pow2(4),)
    assert result.certificate.depth == 0
    assert result.certificate.slacks == (Dyadic.pow2(4),)
    gen = result.generators[0]
    assert gen.orbit_census() == {3: 1}
    assert gen.support().is_subset(dset("00"))
    assert gen.power(3) == IDENTITY


TOWER_SETS = [dset("0000"), dset("1100")]


def two_stage_tower():
    return free_product_tower(
        T4, action_sequence(3, 1, (1, 2, 3)), TOWER_SETS
    )


def test_two_stage_tower_frozen_accounting():
    result = two_stage_tower()
    assert result.carrier_sizes == (3, 3)
    assert result.epsilons == (Dyadic.pow2(6), Dyadic.pow2(12))
    assert result.certificate.slacks == (
        Dyadic.pow2(6),
        Dyadic.make(241, 12),
    )
    assert len(result.stage_words[0]) == 1
    assert len(result.stage_words[1]) == 45


def test_two_stage_tower_generator_shape():
    result = two_stage_tower()
    gen = result.generators[0]
    # 8 rows of 3 cells; the stage-0 row sits at level 6, so at the
    # uniform resolution 12 its single orbit refines into 64 copies.
    assert gen.orbit_census() == {3: 64 + 7}
    assert gen.power(3) == IDENTITY
    region = dset("0000").union(dset("1100"))
    for i in (-1, 1):
        region = region.union(T4.power(i).apply_set(dset("1100")))
    assert gen.support().is_subset(region)


def test_two_stage_tower_witness_translates_are_disjoint():
    result = two_stage_tower()
    family = result.certificate.family
    seen = []
    for n in range(2):
        for translate in family.translates(n):
            assert not translate.measure().is_zero()
            for earlier in seen:
                assert translate.is_disjoint(earlier)
            seen.append(translate)
    assert len(seen) == 46


def test_perturbation_off_support_keeps_the_witness_family():
    result = two_stage_tower()
    probe = PrefixExchange((("0111", "1111"), ("1111", "0111")))
    assert probe.support().is_disjoint(result.generators[0].support())
    perturbed = [g.compose(probe) for g in result.generators]
    family = result.certificate.family
    for n, words in enumerate(result.stage_words):
        seed = family.a_seq[n]
        for h, member in zip(words, family.f_seq[n]):
            redone = fp_evaluate(T4, perturbed, h).apply_set(seed)
            assert redone == member.map.apply_set(seed)
    rebuilt = TranslateFamily(
        tuple(
            tuple(
                LabeledMap(fp_label(h), fp_evaluate(T4, perturbed, h))
                for h in words
            )
            for words in result.stage_words
        ),
        family.a_seq,
    )
    assert rebuilt.depth == 1


def test_tower_checks_translate_disjointness():
    with pytest.raises(DisjointnessPreconditionFailed):
        free_product_tower(
            T4,
            [translation_action(3, 1, 1)],
            [dset("0000"), dset("1000")],
        )


def test_tower_epsilon_override_and_bound():
    with pytest.raises(EpsilonTooLarge):
        free_product_tower(
            finite_odometer(3),
            [translation_action(3, 1, 1)],
            [dset("00")],
            epsilon_seq=[Dyadic.make(1, 2)],
        )
    result = free_product_tower(
        finite_odometer(3),
        [translation_action(3, 1, 1)],
        [dset("00")],
        epsilon_seq=[Dyadic.pow2(7)],
    )
    assert result.epsilons == (Dyadic.pow2(7),)
    with pytest.raises(DyadicError, match="one epsilon"):
        free_product_tower(
            finite_odometer(3),
            [translation_action(3, 1, 1)],
            [dset("00")],
            epsilon_seq=[Dyadic.pow2(7), Dyadic.pow2(7)],
        )


def test_two_generator_tower_smoke():
    result = free_product_tower(
        T4, action_sequence(3, 2, (1, 2)), TOWER_SETS
    )
    assert len(result.generators) == 2
    assert result.carrier_sizes == (9, 9)
    for gen in result.generators:
        assert gen.power(3) == IDENTITY
    assert len(result.stage_words[1]) == 135
    assert isinstance(result.certificate, HFCertificate)
