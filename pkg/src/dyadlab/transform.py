"""Measure-preserving prefix rewrites of the binary Cantor space.

A prefix exchange sends x = s + y to t + y for finitely many rewrite
rules s -> t with |s| = |t|, and fixes every point no rule covers.
Rule sources must be pairwise incomparable, likewise targets, and the
union of moved cylinders must map onto itself, which makes every
instance an invertible transformation preserving the coin-flipping
measure.  A partial prefix isomorphism drops totality and keeps its
domain explicit, so identity rules are meaningful there and are kept.

Everything is exact: words in, words out, dyadic measures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .dyadic import (
    Dyadic,
    DyadicError,
    DyadicSet,
    ResolutionError,
    Word,
    all_words,
    check_word,
    dset,
    word_of_int,
)


class UndefinedError(DyadicError):
    """A partial map was applied outside its domain."""


class NotInvariantError(DyadicError):
    """A region that had to be carried onto itself was not."""


Pair = tuple[Word, Word]


def _check_incomparable(words: Sequence[Word], what: str) -> None:
    if len(set(words)) != len(words):
        raise DyadicError(f"duplicate {what} words")
    prefixes: set[Word] = set()
    for w in words:
        prefixes.update(w[:i] for i in range(len(w)))
    for w in words:
        if w in prefixes:
            raise DyadicError(f"{what} {w!r} is a prefix of another {what}")


def _validate_pairs(pairs: Sequence[Pair]) -> None:
    for a, b in pairs:
        check_word(a)
        check_word(b)
        if len(a) != len(b):
            raise DyadicError(f"rule {a!r}->{b!r} changes word length")
    _check_incomparable([a for a, _ in pairs], "source")
    _check_incomparable([b for _, b in pairs], "target")


def _merge_sibling_pairs(pairs: Iterable[Pair]) -> tuple[Pair, ...]:
    """Fuse rules s0->t0, s1->t1 into s->t until none are left."""
    cur = set(pairs)
    changed = True
    while changed:
        changed = False
        by_source = dict(cur)
        for a, b in sorted(cur, key=lambda p: -len(p[0])):
            if (a, b) not in cur:
                continue
            if a.endswith("0") and b.endswith("0"):
                mate = (a[:-1] + "1", b[:-1] + "1")
                if by_source.get(mate[0]) == mate[1]:
                    cur.difference_update({(a, b), mate})
                    cur.add((a[:-1], b[:-1]))
                    changed = True
    return tuple(sorted(cur))


_Lookup = tuple[tuple[int, ...], dict[int, dict[Word, Word]], frozenset]


def _build_lookup(pairs: Sequence[Pair]) -> _Lookup:
    by: dict[int, dict[Word, Word]] = {}
    prefixes: set[Word] = set()
    for a, b in pairs:
        by.setdefault(len(a), {})[a] = b
        prefixes.update(a[:i] for i in range(len(a)))
    return tuple(sorted(by)), by, frozenset(prefixes)


@dataclass(frozen=True, eq=False)
class PrefixExchange:
    """Invertible measure-preserving map given by prefix rewrite rules.

    The stored rules are kept verbatim so that deliberately refined
    representations survive round trips.  Equality and hashing go
    through the canonical form (identity rules dropped, sibling rules
    merged), so two exchanges compare equal exactly when they move
    every point the same way.
    """

    pairs: tuple[Pair, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((a, b) for a, b in self.pairs))
        _validate_pairs(self.pairs)
        src = DyadicSet.from_words(a for a, _ in self.pairs)
        tgt = DyadicSet.from_words(b for _, b in self.pairs)
        if src != tgt:
            raise DyadicError("rules do not carry the moved region onto itself")

    # -- canonical form

    @cached_property
    def canonical_pairs(self) -> tuple[Pair, ...]:
        return _merge_sibling_pairs(p for p in self.pairs if p[0] != p[1])

    def canonical(self) -> "PrefixExchange":
        if self.pairs == self.canonical_pairs:
            return self
        return PrefixExchange(self.canonical_pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrefixExchange):
            return NotImplemented
        return self.canonical_pairs == other.canonical_pairs

    def __hash__(self) -> int:
        return hash(self.canonical_pairs)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{a}->{b}" for a, b in self.pairs) + "}"

    # -- pointwise action

    @cached_property
    def _lookup(self) -> _Lookup:
        return _build_lookup(self.canonical_pairs)

    def apply_word(self, w: Word) -> Word:
        """Image prefix of the cylinder at w; w must resolve every rule."""
        check_word(w)
        lengths, by, prefixes = self._lookup
        for length in lengths:
            if length > len(w):
                break
            b = by[length].get(w[:length])
            if b is not None:
                return b + w[length:]
        if w in prefixes:
            raise ResolutionError(f"word {w!r} is too short to resolve the rules")
        return w

    def support(self) -> DyadicSet:
        """Union of the moved cylinders."""
        return DyadicSet.from_words(a for a, _ in self.canonical_pairs)

    @property
    def resolution(self) -> int:
        """Depth beyond which every cylinder maps affinely."""
        return max((len(a) for a, _ in self.canonical_pairs), default=0)

    def is_identity(self) -> bool:
        return not self.canonical_pairs

    def apply_set(self, s: DyadicSet) -> DyadicSet:
        out: list[Word] = []
        for a, b in self.canonical_pairs:
            for w in s.intersection(dset(a)).words:
                out.append(b + w[len(a) :])
        out.extend(s.difference(self.support()).words)
        return DyadicSet.from_words(out)

    def preimage_set(self, s: DyadicSet) -> DyadicSet:
        return self.inverse().apply_set(s)

    # -- group operations

    def inverse(self) -> "PrefixExchange":
        return PrefixExchange(tuple(sorted((b, a) for a, b in self.pairs)))

    def _route(self, a: Word, b: Word, out: list[Pair]) -> None:
        # emit rules for "self after (a -> b)", splitting a until b resolves
        lengths, by, prefixes = self._lookup
        for length in lengths:
            if length > len(b):
                break
            d = by[length].get(b[:length])
            if d is not None:
                out.append((a, d + b[length:]))
                return
        if b in prefixes:
            self._route(a + "0", b + "0", out)
            self._route(a + "1", b + "1", out)
        else:
            out.append((a, b))

    def compose(self, other: "PrefixExchange") -> "PrefixExchange":
        """The exchange acting as self after other, in canonical form."""
        out: list[Pair] = []
        for a, b in other.canonical_pairs:
            self._route(a, b, out)
        untouched = other.support().complement()
        for c, d in self.canonical_pairs:
            for w in untouched.intersection(dset(c)).words:
                out.append((w, d + w[len(c) :]))
        return PrefixExchange(_merge_sibling_pairs(p for p in out if p[0] != p[1]))

    def power(self, k: int) -> "PrefixExchange":
        if k < 0:
            return self.inverse().power(-k)
        result = IDENTITY
        base = self.canonical()
        while k:
            if k & 1:
                result = result.compose(base)
            k >>= 1
            if k:
                base = base.compose(base)
        return result

    def conjugate(self, g: "PrefixExchange") -> "PrefixExchange":
        """g . self . g^-1."""
        return g.compose(self).compose(g.inverse())

    def uniform_distance(self, other: "PrefixExchange") -> Dyadic:
        """Exact measure of the set where the two maps disagree."""
        joint = self._lookup[2] | other._lookup[2]
        total = Dyadic.from_int(0)
        stack = [""]
        while stack:
            w = stack.pop()
            if w in joint:
                stack.append(w + "0")
                stack.append(w + "1")
            elif self.apply_word(w) != other.apply_word(w):
                total = total + Dyadic.pow2(len(w))
        return total

    # -- orbits

    def orbit_of_word(self, w: Word) -> list[Word]:
        """Forward orbit of a cylinder until it returns to itself."""
        orbit = [w]
        cur = self.apply_word(w)
        while cur != w:
            orbit.append(cur)
            cur = self.apply_word(cur)
        return orbit

    def orbit_census(self, level: int | None = None) -> dict[int, int]:
        """Orbit lengths of moved level cylinders, as {length: count}.

        The complement of the support is fixed pointwise and is not
        reported; its measure is available from support().
        """
        if level is None:
            level = self.resolution
        if level < self.resolution:
            raise ResolutionError("census level is finer than the rules allow")
        counts: dict[int, int] = {}
        seen: set[Word] = set()
        for w in self.support().refine_to_level(level):
            if w in seen:
                continue
            orbit = self.orbit_of_word(w)
            seen.update(orbit)
            counts[len(orbit)] = counts.get(len(orbit), 0) + 1
        return counts

    # -- construction and serialization

    @classmethod
    def from_partial(cls, iso: "PartialDyadicIso") -> "PrefixExchange":
        """Extend a domain-preserving partial map by the identity."""
        if iso.source() != iso.target():
            raise DyadicError("partial map does not carry its domain onto itself")
        return cls(tuple(p for p in iso.pairs if p[0] != p[1]))

    def to_json(self) -> list[list[str]]:
        return [[a, b] for a, b in self.pairs]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[str]]) -> "PrefixExchange":
        return cls(tuple((a, b) for a, b in data))


IDENTITY = PrefixExchange(())


@dataclass(frozen=True)
class PartialDyadicIso:
    """Injective measure-preserving map between unions of cylinders.

    Rules are kept in merged canonical form.  Identity rules record
    domain and are kept; dataclass equality therefore means equal maps
    with equal domains.
    """

    pairs: tuple[Pair, ...]

    def __post_init__(self) -> None:
        pairs = tuple((a, b) for a, b in self.pairs)
        _validate_pairs(pairs)
        object.__setattr__(self, "pairs", _merge_sibling_pairs(pairs))

    def source(self) -> DyadicSet:
        return DyadicSet.from_words(a for a, _ in self.pairs)

    def target(self) -> DyadicSet:
        return DyadicSet.from_words(b for _, b in self.pairs)

    def is_identity(self) -> bool:
        return all(a == b for a, b in self.pairs)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{a}->{b}" for a, b in self.pairs) + "}"

    @cached_property
    def _lookup(self) -> _Lookup:
        return _build_lookup(self.pairs)

    def defined_on(self, w: Word) -> bool:
        lengths, by, _ = self._lookup
        return any(
            length <= len(w) and w[:length] in by[length] for length in lengths
        )

    def apply_word(self, w: Word) -> Word:
        check_word(w)
        lengths, by, prefixes = self._lookup
        for length in lengths:
            if length > len(w):
                break
            b = by[length].get(w[:length])
            if b is not None:
                return b + w[length:]
        if w in prefixes:
            raise ResolutionError(f"word {w!r} is too short to resolve the rules")
        raise UndefinedError(f"word {w!r} lies outside the domain")

    def apply_set(self, s: DyadicSet) -> DyadicSet:
        """Image of the part of s inside the domain."""
        out: list[Word] = []
        for a, b in self.pairs:
            for w in s.intersection(dset(a)).words:
                out.append(b + w[len(a) :])
        return DyadicSet.from_words(out)

    def inverse(self) -> "PartialDyadicIso":
        return PartialDyadicIso(tuple((b, a) for a, b in self.pairs))

    def _route(self, a: Word, b: Word, out: list[Pair]) -> None:
        # like PrefixExchange._route, but silently drops undefined pieces
        lengths, by, prefixes = self._lookup
        for length in lengths:
            if length > len(b):
                break
            d = by[length].get(b[:length])
            if d is not None:
                out.append((a, d + b[length:]))
                return
        if b in prefixes:
            self._route(a + "0", b + "0", out)
            self._route(a + "1", b + "1", out)

    def compose(self, other: "PartialDyadicIso") -> "PartialDyadicIso":
        """self after other, defined where the whole chain is defined."""
        out: list[Pair] = []
        for a, b in other.pairs:
            self._route(a, b, out)
        return PartialDyadicIso(tuple(out))

    def power(self, k: int) -> "PartialDyadicIso":
        if k < 1:
            raise DyadicError("partial powers need k >= 1")
        result = self
        for _ in range(k - 1):
            result = self.compose(result)
        return result

    def restrict_source(self, region: DyadicSet) -> "PartialDyadicIso":
        out: list[Pair] = []
        for a, b in self.pairs:
            for w in region.intersection(dset(a)).words:
                out.append((w, b + w[len(a) :]))
        return PartialDyadicIso(tuple(out))

    def restrict_target(self, region: DyadicSet) -> "PartialDyadicIso":
        return self.inverse().restrict_source(region).inverse()

    @classmethod
    def identity_on(cls, region: DyadicSet) -> "PartialDyadicIso":
        return cls(tuple((w, w) for w in region.words))

    def to_json(self) -> list[list[str]]:
        return [[a, b] for a, b in self.pairs]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[str]]) -> "PartialDyadicIso":
        return cls(tuple((a, b) for a, b in data))


def union_partials(parts: Iterable[PartialDyadicIso]) -> PartialDyadicIso:
    """Union of graphs; overlapping sources or targets are rejected."""
    pairs: list[Pair] = []
    for p in parts:
        pairs.extend(p.pairs)
    return PartialDyadicIso(tuple(pairs))


def induced(t: PrefixExchange, region: DyadicSet) -> PartialDyadicIso:
    """Restriction of t to an invariant union of cylinders."""
    if t.apply_set(region) != region:
        raise NotInvariantError("region is not carried onto itself")
    out: list[Pair] = []
    for a, b in t.canonical_pairs:
        for w in region.intersection(dset(a)).words:
            out.append((w, b + w[len(a) :]))
    for w in region.difference(t.support()).words:
        out.append((w, w))
    return PartialDyadicIso(tuple(out))


# -- stock transformations


def finite_odometer(n: int) -> PrefixExchange:
    """Adding machine on the first n coordinates, wrapping at 2^n."""
    if n < 1:
        raise DyadicError("finite_odometer needs n >= 1")
    pairs = [("1" * j + "0", "0" * j + "1") for j in range(n)]
    pairs.append(("1" * n, "0" * n))
    return PrefixExchange(tuple(pairs))


def midpoint_transposition(n: int) -> PrefixExchange:
    """Swap of the two level-n cylinders at values 2^(n-1)-1 and 2^(n-1)."""
    if n < 1:
        raise DyadicError("midpoint_transposition needs n >= 1")
    a = "0" * (n - 1) + "1"
    b = "1" * (n - 1) + "0"
    return PrefixExchange(((a, b), (b, a)))


def embed_level(t: PrefixExchange, level: int) -> PrefixExchange:
    """Rewrite every rule with sources refined to a common level.

    The result acts exactly like t; only the representation changes.
    """
    out: list[Pair] = []
    for a, b in t.pairs:
        if len(a) > level:
            raise ResolutionError(f"rule source {a!r} is deeper than level {level}")
        for e in all_words(level - len(a)):
            out.append((a + e, b + e))
    return PrefixExchange(tuple(sorted(out)))


def binary_root(t: PrefixExchange, p: int) -> PrefixExchange:
    """An exchange v with v^(2^p) = t and the same support.

    The support is refined to a common level and each cell gets a p-bit
    counter tail; the counter steps up, and on wrapping the cell
    advances through t.  For p = 0 the result is t itself.
    """
    if p < 0:
        raise DyadicError("binary_root needs p >= 0")
    base = t.canonical()
    if p == 0 or base.is_identity():
        return base
    out: list[Pair] = []
    top = (1 << p) - 1
    for s in base.support().refine_to_level(base.resolution):
        image = base.apply_word(s)
        for j in range(top):
            out.append((s + word_of_int(j, p), s + word_of_int(j + 1, p)))
        out.append((s + word_of_int(top, p), image + word_of_int(0, p)))
    return PrefixExchange(tuple(sorted(out)))


def random_exchange(rng: random.Random, level: int) -> PrefixExchange:
    """Uniformly random exchange among permutations of level cylinders."""
    words = all_words(level)
    images = list(words)
    rng.shuffle(images)
    return PrefixExchange(tuple(zip(words, images)))
