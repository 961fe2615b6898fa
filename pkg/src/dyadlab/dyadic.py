"""Exact arithmetic on the binary Cantor space.

Subsets of {0,1}^N are handled through finite unions of cylinders N_w,
where w is a finite bit string and N_w is the set of infinite sequences
starting with w.  Every set is kept in a canonical form (prefix-free,
sibling-merged) so that set equality is literal tuple equality and the
Bernoulli(1/2) measure of anything we build is an exact dyadic rational.
No floating point enters any computation here.

Words are plain Python strings over "0"/"1".  The empty string names the
whole space.  Python's string order is exactly the order we want on
words: a proper prefix sorts before its extensions, and otherwise the
first differing bit decides.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator


class DyadicError(ValueError):
    """Base class for errors raised by dyadlab."""


class NotDyadicError(DyadicError):
    """A value that must be a dyadic rational is not one."""


class ResolutionError(DyadicError):
    """A word is too short for the requested operation; refine first."""


Word = str


def check_word(w: Word) -> Word:
    if not isinstance(w, str) or any(c not in "01" for c in w):
        raise DyadicError(f"not a binary word: {w!r}")
    return w


def word_of_int(value: int, length: int) -> Word:
    """Binary word of the given length, least significant bit first."""
    if not 0 <= value < (1 << length):
        raise DyadicError(f"value {value} out of range for length {length}")
    return "".join("1" if (value >> i) & 1 else "0" for i in range(length))


def int_of_word(w: Word) -> int:
    """Inverse of word_of_int: read bits as little-endian binary."""
    return sum(1 << i for i, c in enumerate(w) if c == "1")


def all_words(length: int) -> list[Word]:
    return [word_of_int(v, length) for v in range(1 << length)]


# ---------------------------------------------------------------------------
# dyadic rationals


@dataclass(frozen=True)
class Dyadic:
    """A rational num / 2**exp with num odd or zero.

    exp may be negative, so every integer is representable; zero is
    pinned to (0, 0).  Construct through make() unless the pair is
    already canonical.
    """

    num: int
    exp: int

    def __post_init__(self) -> None:
        if self.num != 0 and self.num % 2 == 0:
            raise NotDyadicError(f"non-canonical numerator {self.num}")
        if self.num == 0 and self.exp != 0:
            raise NotDyadicError("zero must carry exponent 0")

    @staticmethod
    def make(num: int, exp: int) -> "Dyadic":
        """Canonicalize num / 2**exp."""
        if num == 0:
            return Dyadic(0, 0)
        while num % 2 == 0:
            num //= 2
            exp -= 1
        return Dyadic(num, exp)

    @staticmethod
    def from_int(n: int) -> "Dyadic":
        return Dyadic.make(n, 0)

    @staticmethod
    def pow2(exp: int) -> "Dyadic":
        """The value 2**(-exp); exp may be negative."""
        return Dyadic(1, exp)

    @staticmethod
    def from_fraction(f: Fraction) -> "Dyadic":
        d = f.denominator
        if d & (d - 1):
            raise NotDyadicError(f"{f} has non-dyadic denominator")
        return Dyadic.make(f.numerator, d.bit_length() - 1)

    def as_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num, 1 << self.exp)
        return Fraction(self.num << (-self.exp), 1)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        e = max(self.exp, other.exp)
        num = (self.num << (e - self.exp)) + (other.num << (e - other.exp))
        return Dyadic.make(num, e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def __neg__(self) -> "Dyadic":
        return Dyadic.make(-self.num, self.exp) if self.num else self

    def __mul__(self, other) -> "Dyadic":
        if isinstance(other, int):
            return Dyadic.make(self.num * other, self.exp)
        if isinstance(other, Dyadic):
            return Dyadic.make(self.num * other.num, self.exp + other.exp)
        return NotImplemented

    __rmul__ = __mul__

    def _key(self, other: "Dyadic") -> tuple[int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp)

    def __lt__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a < b

    def __le__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other: "Dyadic") -> bool:
        return other < self

    def __ge__(self, other: "Dyadic") -> bool:
        return other <= self

    def is_zero(self) -> bool:
        return self.num == 0

    def to_json(self) -> dict:
        return {"num": self.num, "exp": self.exp}

    @staticmethod
    def from_json(obj: dict) -> "Dyadic":
        return Dyadic.make(int(obj["num"]), int(obj["exp"]))

    def __str__(self) -> str:
        if self.exp <= 0:
            return str(self.num << -self.exp)
        return f"{self.num}/2^{self.exp}"

    __repr__ = __str__


ZERO = Dyadic(0, 0)
ONE = Dyadic(1, 0)


def pow2_above(x: Fraction) -> Dyadic:
    """Smallest power of two strictly greater than x (x > 0)."""
    if x <= 0:
        raise DyadicError("pow2_above expects a positive value")
    val = Fraction(1)
    while val <= x:
        val *= 2
    while val / 2 > x:
        val /= 2
    return Dyadic.from_fraction(val)


def pow2_below(x: Fraction) -> Dyadic:
    """Largest power of two strictly smaller than x (x > 0)."""
    if x <= 0:
        raise DyadicError("pow2_below expects a positive value")
    val = Fraction(1)
    while val >= x:
        val /= 2
    while val * 2 < x:
        val *= 2
    return Dyadic.from_fraction(val)


# ---------------------------------------------------------------------------
# canonical unions of cylinders


def _canonical_words(words: Iterable[Word]) -> tuple[Word, ...]:
    """Prefix-free, sibling-merged normal form of a union of cylinders."""
    ws = sorted({check_word(w) for w in words})
    # absorb words that already lie inside an earlier cylinder; because the
    # list is sorted, the only candidate prefix still alive is the last kept
    kept: list[Word] = []
    for w in ws:
        if kept and w.startswith(kept[-1]):
            continue
        kept.append(w)
    # merge sibling pairs (s0, s1) -> s, cascading upward
    alive = set(kept)
    changed = True
    while changed:
        changed = False
        for w in sorted(alive, key=len, reverse=True):
            if w not in alive or not w:
                continue
            if w[-1] == "0":
                sib = w[:-1] + "1"
                if sib in alive:
                    alive.remove(w)
                    alive.remove(sib)
                    alive.add(w[:-1])
                    changed = True
    return tuple(sorted(alive))


@dataclass(frozen=True)
class DyadicSet:
    """A finite union of cylinders in canonical form.

    Construct through from_words (or the module helpers); the words tuple
    of a live instance is always canonical, so == and hash are structural.
    """

    words: tuple[Word, ...]

    @staticmethod
    def from_words(words: Iterable[Word]) -> "DyadicSet":
        return DyadicSet(_canonical_words(words))

    # -- basic queries ------------------------------------------------

    def is_empty(self) -> bool:
        return not self.words

    def is_full(self) -> bool:
        return self.words == ("",)

    @property
    def level(self) -> int:
        """Deepest word length in the canonical form."""
        return max((len(w) for w in self.words), default=0)

    def measure(self) -> Dyadic:
        total = ZERO
        for w in self.words:
            total = total + Dyadic.pow2(len(w))
        return total

    def contains_word(self, w: Word) -> bool:
        """Does the cylinder N_w lie entirely inside this set?"""
        check_word(w)
        return any(w.startswith(u) for u in self.words)

    def meets_word(self, w: Word) -> bool:
        """Does N_w intersect this set?"""
        check_word(w)
        return any(w.startswith(u) or u.startswith(w) for u in self.words)

    # -- set algebra ----------------------------------------------------

    def union(self, other: "DyadicSet") -> "DyadicSet":
        return DyadicSet.from_words(self.words + other.words)

    def intersection(self, other: "DyadicSet") -> "DyadicSet":
        out = []
        for a in self.words:
            for b in other.words:
                if a.startswith(b):
                    out.append(a)
                elif b.startswith(a):
                    out.append(b)
        return DyadicSet.from_words(out)

    def difference(self, other: "DyadicSet") -> "DyadicSet":
        out: list[Word] = []
        for a in self.words:
            cutters = [b for b in other.words if b.startswith(a) or a.startswith(b)]
            _subtract(a, cutters, out)
        return DyadicSet.from_words(out)

    def complement(self) -> "DyadicSet":
        return FULL.difference(self)

    def is_disjoint(self, other: "DyadicSet") -> bool:
        return all(
            not (a.startswith(b) or b.startswith(a))
            for a in self.words
            for b in other.words
        )

    def is_subset(self, other: "DyadicSet") -> bool:
        # valid on canonical forms: a covered cylinder has a single
        # covering prefix on the other side, or it would have merged
        return all(other.contains_word(a) for a in self.words)

    # -- refinement -------------------------------------------------------

    def refine_to_level(self, level: int) -> tuple[Word, ...]:
        """All level-`level` words whose cylinders compose this set."""
        out: list[Word] = []
        for w in self.words:
            if len(w) > level:
                raise ResolutionError(
                    f"word {w!r} is deeper than level {level}"
                )
            out.extend(w + suffix for suffix in all_words(level - len(w)))
        return tuple(sorted(out))

    def take_measure(self, amount: Dyadic) -> tuple["DyadicSet", "DyadicSet"]:
        """Split off a subset of exact measure `amount`, first in word order.

        Returns (taken, rest).  Raises if amount exceeds the measure.
        """
        if amount < ZERO or self.measure() < amount:
            raise DyadicError("take_measure amount out of range")
        taken: list[Word] = []
        rest: list[Word] = []
        remaining = amount

        def grab(w: Word) -> None:
            nonlocal remaining
            size = Dyadic.pow2(len(w))
            if remaining.is_zero():
                rest.append(w)
            elif size <= remaining:
                taken.append(w)
                remaining = remaining - size
            else:
                grab(w + "0")
                grab(w + "1")

        for w in self.words:
            grab(w)
        if not remaining.is_zero():
            raise DyadicError("take_measure could not realize the amount")
        return DyadicSet.from_words(taken), DyadicSet.from_words(rest)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> list[str]:
        return list(self.words)

    @staticmethod
    def from_json(obj: Iterable[str]) -> "DyadicSet":
        return DyadicSet.from_words(obj)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def __str__(self) -> str:
        inner = ",".join(self.words) if self.words else "empty"
        return "{" + inner + "}"

    __repr__ = __str__


def _subtract(w: Word, cutters: list[Word], out: list[Word]) -> None:
    """Append the cylinders of N_w minus the cutter cylinders to out."""
    if any(w.startswith(c) for c in cutters):
        return
    inner = [c for c in cutters if c.startswith(w) and c != w]
    if not inner:
        out.append(w)
        return
    for bit in "01":
        child = w + bit
        _subtract(child, [c for c in inner if c.startswith(child)], out)


EMPTY = DyadicSet(())
FULL = DyadicSet(("",))


def dset(*words: Word) -> DyadicSet:
    """Shorthand constructor used heavily in tests."""
    return DyadicSet.from_words(words)


def disjoint_union(parts: Iterable[DyadicSet]) -> DyadicSet:
    """Union of pairwise disjoint sets, checked."""
    parts = list(parts)
    total = EMPTY
    for p in parts:
        if not total.is_disjoint(p):
            raise DyadicError("disjoint_union got overlapping parts")
        total = total.union(p)
    return total
