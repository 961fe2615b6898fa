"""High-faithfulness machinery: shrinking, witnesses, and towers.

An action is highly faithful when for every finite set of nontrivial
group elements some point is moved by all of them.  Over cylinder
sets this becomes finitely checkable: a prefix exchange moves every
point of its support and no other, so intersecting supports of word
images produces exact witnesses.  The constructions here shrink sets
until their translates are disjoint, and build a free-factor action
on top of a given transformation cell by cell, so that an explicit
family of disjoint translates certifies high faithfulness up to a
requested depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dyadic import (
    EMPTY,
    FULL,
    Dyadic,
    DyadicError,
    DyadicSet,
    Word,
    pow2_below,
)
from .transform import IDENTITY, PrefixExchange
from .rfactions import PointedFiniteAction, embed_finite_action, reduced_words


class NowhereMoving(DyadicError):
    """The transformation fixes the whole set it had to move."""


class QuarterBoundViolated(DyadicError):
    """Consecutive stage measures do not shrink fast enough."""


class DisjointnessPreconditionFailed(DyadicError):
    """Required translates of the stage sets were not disjoint."""


class EpsilonTooLarge(DyadicError):
    """A stage cell measure does not fit under its strict bound."""


def evaluate_word(
    gens: Sequence[PrefixExchange], word: Sequence[int]
) -> PrefixExchange:
    """Image of a signed-letter word, rightmost letter acting first."""
    out = IDENTITY
    for letter in word:
        if letter == 0 or abs(letter) > len(gens):
            raise DyadicError(
                f"letter {letter} is not one of {len(gens)} generators"
            )
        g = gens[abs(letter) - 1]
        out = out.compose(g if letter > 0 else g.inverse())
    return out


def disjoint_shrink(t: PrefixExchange, a: DyadicSet) -> DyadicSet:
    """A nonempty subset of a moved off itself by t.

    Scans the cells of a at the common refinement level in order and
    keeps every cell that neither maps into the kept region nor
    receives one of the kept cells, so the result and its image are
    disjoint by construction.
    """
    level = max(t.resolution, a.level)
    kept: list[Word] = []
    kept_set = set()
    image_set = set()
    for w in a.refine_to_level(level):
        image = t.apply_word(w)
        if image == w:
            continue
        if image in kept_set or w in image_set:
            continue
        kept.append(w)
        kept_set.add(w)
        image_set.add(image)
    if not kept:
        raise NowhereMoving("the transformation fixes every cell of the set")
    return DyadicSet.from_words(kept)


@dataclass(frozen=True)
class LabeledMap:
    """A transformation together with the word naming it."""

    label: str
    map: PrefixExchange


def power_family(t: PrefixExchange, radius: int) -> tuple[LabeledMap, ...]:
    """The labeled powers t**i for |i| <= radius, identity included."""
    if radius < 0:
        raise DyadicError("radius must not be negative")
    members = []
    for i in range(-radius, radius + 1):
        label = "1" if i == 0 else ("t" if i == 1 else f"t^{i}")
        members.append(LabeledMap(label, t.power(i)))
    return tuple(members)


@dataclass(frozen=True)
class TranslateFamily:
    """Stagewise sets whose labeled translates are pairwise disjoint."""

    f_seq: tuple[tuple[LabeledMap, ...], ...]
    a_seq: tuple[DyadicSet, ...]

    def __post_init__(self) -> None:
        if len(self.f_seq) != len(self.a_seq):
            raise DyadicError("stage counts differ")
        for n, a in enumerate(self.a_seq):
            if a.measure().is_zero():
                raise DyadicError(f"stage {n} set is empty")
        acc = EMPTY
        for n, members in enumerate(self.f_seq):
            for member in members:
                translate = member.map.apply_set(self.a_seq[n])
                if not acc.is_disjoint(translate):
                    raise DyadicError(
                        f"translate {member.label} of stage {n}"
                        " overlaps earlier translates"
                    )
                acc = acc.union(translate)

    @property
    def depth(self) -> int:
        return len(self.a_seq) - 1

    def translates(self, n: int) -> list[DyadicSet]:
        return [m.map.apply_set(self.a_seq[n]) for m in self.f_seq[n]]

    def to_json(self) -> dict:
        return {
            "stages": [
                {
                    "members": [m.label for m in members],
                    "set": self.a_seq[n].to_json(),
                }
                for n, members in enumerate(self.f_seq)
            ]
        }


def quarter_shrink(
    b_seq: Sequence[DyadicSet], f_seq: Sequence[Sequence[LabeledMap]]
) -> TranslateFamily:
    """Carve stage sets whose translates are globally disjoint.

    Requires per-stage disjointness of the translates of each b and
    the strict quarter decay |F_n| |F_{n+1}| mu(B_{n+1}) < mu(B_n)/4;
    subtracting every translate of later stages pulled back through
    the current stage then leaves nonempty sets, and the family
    invariant is re-verified exactly on construction.
    """
    if len(b_seq) != len(f_seq):
        raise DyadicError("stage counts differ")
    stages = [tuple(members) for members in f_seq]
    for n, b in enumerate(b_seq):
        acc = EMPTY
        for member in stages[n]:
            translate = member.map.apply_set(b)
            if not acc.is_disjoint(translate):
                raise DyadicError(
                    f"translates of stage {n} overlap before shrinking"
                )
            acc = acc.union(translate)
    for n in range(len(b_seq) - 1):
        lhs = (
            len(stages[n])
            * len(stages[n + 1])
            * b_seq[n + 1].measure().as_fraction()
        )
        if not lhs < b_seq[n].measure().as_fraction() / 4:
            raise QuarterBoundViolated(
                f"stage {n} does not shrink fast enough"
            )
    a_seq = []
    for n, b in enumerate(b_seq):
        removed = EMPTY
        for m in range(1, len(b_seq) - n):
            later = b_seq[n + m]
            for f1 in stages[n]:
                for f2 in stages[n + m]:
                    removed = removed.union(
                        f1.map.preimage_set(f2.map.apply_set(later))
                    )
        a_seq.append(b.difference(removed))
    return TranslateFamily(tuple(stages), tuple(a_seq))


@dataclass(frozen=True)
class HFCheckReport:
    """Outcome of a moving-set sweep over all short words.

    When ok, witness is a nonempty exact set every checked word moves
    pointwise; otherwise failing_word is the first word whose moving
    set emptied the running intersection.
    """

    ok: bool
    radius: int
    level: int
    witness: DyadicSet
    failing_word: tuple[int, ...] | None
    words_checked: int

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "radius": self.radius,
            "level": self.level,
            "witness": self.witness.to_json(),
            "witness_measure": self.witness.measure().to_json(),
            "failing_word": list(self.failing_word)
            if self.failing_word is not None
            else None,
            "words_checked": self.words_checked,
        }


def hf_check(
    generators: Sequence[PrefixExchange], radius: int, level: int
) -> HFCheckReport:
    """Intersect the supports of all nontrivial words up to radius.

    A prefix exchange moves exactly the points of its support, so the
    intersection is precisely the set moved by every word.
    """
    if radius < 1:
        raise DyadicError("radius must be at least 1")
    witness = FULL
    checked = 0
    for word in reduced_words(len(generators), radius):
        checked += 1
        image = evaluate_word(generators, word)
        witness = witness.intersection(image.support())
        if witness.measure().is_zero():
            return HFCheckReport(False, radius, level, EMPTY, word, checked)
    return HFCheckReport(True, radius, level, witness, None, checked)


# Free-product words alternate powers of the base transformation with
# nontrivial free-group words; a letter is ("T", i) with i != 0 or
# ("L", w) with w a nonempty reduced tuple of signed generator indices.
FPLetter = tuple[str, object]
FPWord = tuple[FPLetter, ...]


def _free_reduce(w: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in w:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def fp_multiply(a: FPWord, b: FPWord) -> FPWord:
    """Concatenate two alternating words, cancelling at the seam."""
    out = list(a)
    for letter in b:
        kind, value = letter
        cancelled = False
        while out and out[-1][0] == kind:
            _, prev = out.pop()
            if kind == "T":
                value = prev + value
                if value == 0:
                    cancelled = True
                    break
            else:
                value = _free_reduce(tuple(prev) + tuple(value))
                if not value:
                    cancelled = True
                    break
        if not cancelled:
            out.append((kind, value))
    return tuple(out)


def fp_label(word: FPWord) -> str:
    if not word:
        return "1"
    tokens = []
    for kind, value in word:
        if kind == "T":
            tokens.append("t" if value == 1 else f"t^{value}")
        else:
            for letter in value:
                name = f"x{abs(letter)}"
                tokens.append(name if letter > 0 else name + "^-1")
    return " ".join(tokens)


def fp_evaluate(
    t: PrefixExchange, gens: Sequence[PrefixExchange], word: FPWord
) -> PrefixExchange:
    out = IDENTITY
    for kind, value in word:
        piece = t.power(value) if kind == "T" else evaluate_word(gens, value)
        out = out.compose(piece)
    return out


def _tower_words(m: int, n: int):
    """Stage word sets: the nested products and their union."""
    g_words = [()] + list(reduced_words(m, n))
    g_set = {(() if not w else (("L", w),)) for w in g_words}
    g_prime = g_set - {()}
    f_prime = {(("T", i),) for i in range(-n, n + 1) if i}
    i_sets = [g_set]
    for _ in range(n):
        step = {fp_multiply(g, f) for g in g_prime for f in f_prime}
        i_sets.append(
            {fp_multiply(a, b) for a in step for b in i_sets[-1]}
        )
    j_sets = [
        {fp_multiply(f, w) for f in f_prime for w in i_k} for i_k in i_sets
    ]
    h_set = set().union(*i_sets, *j_sets)
    return g_words, i_sets, j_sets, h_set


@dataclass(frozen=True)
class HFCertificate:
    """Witness family for all stage words, with unused-measure slack."""

    depth: int
    family: TranslateFamily
    slacks: tuple[Dyadic, ...]

    def __post_init__(self) -> None:
        if self.family.depth != self.depth or len(self.slacks) != self.depth + 1:
            raise DyadicError("certificate stages are inconsistent")

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "family": self.family.to_json(),
            "slacks": [s.to_json() for s in self.slacks],
        }


@dataclass(frozen=True)
class TowerResult:
    """Free-factor generator images plus their faithfulness witness."""

    generators: tuple[PrefixExchange, ...]
    certificate: HFCertificate
    epsilons: tuple[Dyadic, ...]
    carrier_sizes: tuple[int, ...]
    stage_words: tuple[tuple[FPWord, ...], ...]

    def to_json(self) -> dict:
        return {
            "generators": [g.to_json() for g in self.generators],
            "certificate": self.certificate.to_json(),
            "epsilons": [e.to_json() for e in self.epsilons],
            "carriers": list(self.carrier_sizes),
        }


def free_product_tower(
    t: PrefixExchange,
    actions: Sequence[PointedFiniteAction],
    a_seq: Sequence[DyadicSet],
    *,
    epsilon_seq: Sequence[Dyadic] | None = None,
) -> TowerResult:
    """Build a free-factor action witnessing high faithfulness.

    Stage n spends the set a_seq[n]: a seed of measure epsilon_n is
    placed together with carrier-sized rows of equal cells, each row
    carrying one finite action via a cycle closure, level by level
    through the stage words.  The translates of the seed under all
    stage words come out pairwise disjoint, and that family, checked
    exactly, is the certificate.  Requires the powers t**i(a_n) for
    |i| <= n to be pairwise disjoint across stages.
    """
    depth = len(a_seq) - 1
    if depth < 0:
        raise DyadicError("need at least one stage set")
    if not actions:
        raise DyadicError("need at least one finite action")
    m = actions[0].m
    if any(act.m != m for act in actions):
        raise DyadicError("actions disagree on the generator count")
    if epsilon_seq is not None and len(epsilon_seq) != depth + 1:
        raise DyadicError("need one epsilon per stage")

    acc = EMPTY
    for n, a in enumerate(a_seq):
        if a.measure().is_zero():
            raise DyadicError(f"stage {n} set is empty")
        for i in range(-n, n + 1):
            translate = t.power(i).apply_set(a)
            if not acc.is_disjoint(translate):
                raise DisjointnessPreconditionFailed(
                    f"t^{i} of stage {n} overlaps earlier translates"
                )
            acc = acc.union(translate)

    gens = [IDENTITY] * m
    stage_words: list[list[FPWord]] = []
    seeds: list[DyadicSet] = []
    slacks: list[Dyadic] = []
    epsilons: list[Dyadic] = []
    carriers: list[int] = []

    for n in range(depth + 1):
        g_words, i_sets, j_sets, h_set = _tower_words(m, n)
        chosen = None
        for act in actions:
            hits = {act.apply_word(w, act.basepoint) for w in g_words}
            if len(hits) == len(g_words):
                chosen = act
                break
        if chosen is None:
            raise DyadicError(
                f"no action separates the {len(g_words)} stage-{n} words"
            )
        k_m = chosen.carrier_size
        carriers.append(k_m)

        bound = a_seq[n].measure().as_fraction() / (k_m * len(h_set))
        if epsilon_seq is None:
            eps = pow2_below(bound)
            if eps.as_fraction() == bound:
                eps = eps * Dyadic.pow2(1)
        else:
            eps = epsilon_seq[n]
            if not eps.as_fraction() < bound:
                raise EpsilonTooLarge(
                    f"stage {n} needs a cell measure below {bound}"
                )
        epsilons.append(eps)

        seed, reservoir = a_seq[n].take_measure(eps)
        row = [seed]
        for _ in range(k_m - 1):
            cell, reservoir = reservoir.take_measure(eps)
            row.append(cell)
        images = embed_finite_action(chosen, row)
        gens = [gens[i].compose(images[i]) for i in range(m)]

        for l in range(n):
            for h in sorted(j_sets[l], key=fp_label):
                head = fp_evaluate(t, gens, h).apply_set(seed)
                cells = [head]
                for _ in range(k_m - 1):
                    cell, reservoir = reservoir.take_measure(eps)
                    cells.append(cell)
                images = embed_finite_action(chosen, cells)
                gens = [gens[i].compose(images[i]) for i in range(m)]
            for h in i_sets[l + 1]:
                inside = fp_evaluate(t, gens, h).apply_set(seed)
                if not inside.is_subset(a_seq[n]):
                    raise DyadicError(
                        f"stage {n} word {fp_label(h)} left the stage set"
                    )

        stage_words.append(sorted(h_set, key=fp_label))
        seeds.append(seed)
        slacks.append(reservoir.measure())

    final = tuple(gens)
    members = tuple(
        tuple(
            LabeledMap(fp_label(h), fp_evaluate(t, final, h))
            for h in words
        )
        for words in stage_words
    )
    family = TranslateFamily(members, tuple(seeds))
    certificate = HFCertificate(depth, family, tuple(slacks))
    return TowerResult(
        final,
        certificate,
        tuple(epsilons),
        tuple(carriers),
        tuple(tuple(words) for words in stage_words),
    )
