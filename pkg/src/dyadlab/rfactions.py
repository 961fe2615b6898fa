"""Free-group actions on finite sets with q-power element orders.

Truncated power series in non-commuting variables over the q-element
field, with unit constant term, form a finite group in which every
element order is a power of q.  Sending the i-th free generator to
1 + X_i lands the free group in that group, and no nontrivial reduced
word dies at every truncation degree, so the translation actions of
the image groups form a sequence of pointed actions in which every
nontrivial word eventually moves the basepoint.  A finite pointed
action in turn embeds into prefix exchanges through a cycle closure
walking a list of equal-measure cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Iterator, Sequence

from .dyadic import DyadicError, DyadicSet
from .transform import PartialDyadicIso, PrefixExchange, union_partials
from .cycles import PrePCycle, cycle_closure, match_equal_measure


class CarrierTooLarge(DyadicError):
    """A translation action outgrew the configured carrier bound."""


class UnequalMeasures(DyadicError):
    """Cells that had to share one measure did not."""


class NotDisjoint(DyadicError):
    """Cells that had to be pairwise disjoint were not."""


Monomial = tuple[int, ...]
Coefficients = dict[Monomial, int]

_ONE: Coefficients = {(): 1}


def _is_odd_prime(q: int) -> bool:
    if q < 3 or q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def _mul(a: Coefficients, b: Coefficients, q: int, d: int) -> Coefficients:
    out: Coefficients = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if len(ma) + len(mb) <= d:
                m = ma + mb
                c = (out.get(m, 0) + ca * cb) % q
                if c:
                    out[m] = c
                elif m in out:
                    del out[m]
    return out


def _letter_series(letter: int, q: int, d: int) -> Coefficients:
    """Image of a signed one-based letter: 1 + X_i or its inverse."""
    i = abs(letter) - 1
    if letter > 0:
        return {(): 1, (i,): 1} if d >= 1 else {(): 1}
    out: Coefficients = {(): 1}
    for j in range(1, d + 1):
        out[(i,) * j] = (-1) ** j % q
    return out


def _lowest_degree(coeffs: Coefficients) -> int | None:
    degrees = [len(m) for m in coeffs if m]
    return min(degrees) if degrees else None


@dataclass(frozen=True)
class TruncatedSeries:
    """A unit of the degree-truncated free algebra over GF(q).

    Terms hold monomials as tuples of zero-based variable indices with
    nonzero residues mod q, sorted by degree then lexicographically,
    and always include the unit constant term.
    """

    q: int
    m: int
    d: int
    terms: tuple[tuple[Monomial, int], ...]

    def __post_init__(self) -> None:
        if not _is_odd_prime(self.q):
            raise DyadicError(f"{self.q} is not an odd prime")
        if self.m < 1 or self.d < 0:
            raise DyadicError("need at least one variable and degree >= 0")
        expected = tuple(
            sorted(dict(self.terms).items(), key=lambda t: (len(t[0]), t[0]))
        )
        if self.terms != expected:
            raise DyadicError("terms are not in canonical order")
        for mon, c in self.terms:
            if len(mon) > self.d or any(not 0 <= i < self.m for i in mon):
                raise DyadicError(f"monomial {mon} does not fit the algebra")
            if not 0 < c < self.q:
                raise DyadicError(f"coefficient {c} is not a nonzero residue")
        if self.coefficient(()) != 1:
            raise DyadicError("constant term must be 1")

    @classmethod
    def _wrap(cls, coeffs: Coefficients, q: int, m: int, d: int) -> "TruncatedSeries":
        terms = tuple(sorted(coeffs.items(), key=lambda t: (len(t[0]), t[0])))
        return cls(q, m, d, terms)

    @classmethod
    def one(cls, q: int, m: int, d: int) -> "TruncatedSeries":
        return cls._wrap(dict(_ONE), q, m, d)

    @classmethod
    def generator(cls, q: int, m: int, d: int, i: int) -> "TruncatedSeries":
        if not 0 <= i < m:
            raise DyadicError(f"no variable {i} with {m} variables")
        return cls._wrap(_letter_series(i + 1, q, d), q, m, d)

    def _coeffs(self) -> Coefficients:
        return dict(self.terms)

    def _check_same_algebra(self, other: "TruncatedSeries") -> None:
        if (self.q, self.m, self.d) != (other.q, other.m, other.d):
            raise DyadicError("series live in different algebras")

    def coefficient(self, mon: Monomial) -> int:
        return dict(self.terms).get(mon, 0)

    def is_one(self) -> bool:
        return self.terms == (((), 1),)

    def multiply(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_same_algebra(other)
        return self._wrap(
            _mul(self._coeffs(), other._coeffs(), self.q, self.d),
            self.q,
            self.m,
            self.d,
        )

    def inverse(self) -> "TruncatedSeries":
        nil = self._coeffs()
        del nil[()]
        neg = {m: (-c) % self.q for m, c in nil.items()}
        acc: Coefficients = dict(_ONE)
        term: Coefficients = dict(_ONE)
        for _ in range(self.d):
            term = _mul(term, neg, self.q, self.d)
            if not term:
                break
            for mon, c in term.items():
                total = (acc.get(mon, 0) + c) % self.q
                if total:
                    acc[mon] = total
                elif mon in acc:
                    del acc[mon]
        return self._wrap(acc, self.q, self.m, self.d)

    def power(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return self.inverse().power(-k)
        result = dict(_ONE)
        square = self._coeffs()
        while k:
            if k & 1:
                result = _mul(result, square, self.q, self.d)
            k >>= 1
            if k:
                square = _mul(square, square, self.q, self.d)
        return self._wrap(result, self.q, self.m, self.d)

    def order(self) -> int:
        """Multiplicative order, always a power of q."""
        current = self
        k = 0
        while not current.is_one():
            current = current.power(self.q)
            k += 1
            if k > 64:
                raise DyadicError("order computation did not terminate")
        return self.q**k

    def truncate(self, new_d: int) -> "TruncatedSeries":
        if new_d > self.d:
            raise DyadicError("cannot extend a truncated series")
        kept = {m: c for m, c in self.terms if len(m) <= new_d}
        return self._wrap(kept, self.q, self.m, new_d)

    def lowest_degree(self) -> int | None:
        """Degree of the first deviation from 1, or None for the unit."""
        return _lowest_degree(self._coeffs())


def _check_reduced(word: Sequence[int], m: int) -> None:
    for letter in word:
        if letter == 0 or abs(letter) > m:
            raise DyadicError(f"letter {letter} is not one of {m} generators")
    for a, b in zip(word, word[1:]):
        if a == -b:
            raise DyadicError("word is not reduced")


def magnus_image(
    word: Sequence[int], q: int, m: int, d: int
) -> TruncatedSeries:
    """Image of a reduced word under generator i -> 1 + X_i.

    Letters are signed one-based indices, negatives meaning inverses.
    """
    _check_reduced(word, m)
    if not _is_odd_prime(q):
        raise DyadicError(f"{q} is not an odd prime")
    acc: Coefficients = dict(_ONE)
    for letter in word:
        acc = _mul(acc, _letter_series(letter, q, d), q, d)
    return TruncatedSeries._wrap(acc, q, m, d)


def reduced_words(m: int, max_len: int) -> Iterator[tuple[int, ...]]:
    """All nontrivial reduced words of length <= max_len, shortlex."""
    letters = [l for i in range(1, m + 1) for l in (i, -i)]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        grown: list[tuple[int, ...]] = []
        for w in frontier:
            for letter in letters:
                if w and w[-1] == -letter:
                    continue
                nw = w + (letter,)
                grown.append(nw)
                yield nw
        frontier = grown


def freeness_certificate(
    q: int, m: int, max_word: int, max_depth: int
) -> list[tuple[tuple[int, ...], int | None]]:
    """Least truncation degree separating each word from 1.

    Returns one record per nontrivial reduced word of length at most
    max_word, pairing it with the least d <= max_depth at which its
    image differs from 1, or None when no such depth exists.  The
    running products are shared along the word tree, so the sweep
    costs one letter multiplication per word.
    """
    if max_word < 1 or max_depth < 1:
        raise DyadicError("need positive word length and depth")
    letters = [l for i in range(1, m + 1) for l in (i, -i)]
    images = {l: _letter_series(l, q, max_depth) for l in letters}
    records: list[tuple[tuple[int, ...], int | None]] = []
    frontier: list[tuple[tuple[int, ...], Coefficients]] = [((), dict(_ONE))]
    for _ in range(max_word):
        grown: list[tuple[tuple[int, ...], Coefficients]] = []
        for word, acc in frontier:
            for letter in letters:
                if word and word[-1] == -letter:
                    continue
                product = _mul(acc, images[letter], q, max_depth)
                extended = word + (letter,)
                records.append((extended, _lowest_degree(product)))
                grown.append((extended, product))
        frontier = grown
    return records


@dataclass(frozen=True)
class PointedFiniteAction:
    """Generator permutations of a finite carrier with a basepoint."""

    carrier_size: int
    generator_perms: tuple[tuple[int, ...], ...]
    basepoint: int = 0

    def __post_init__(self) -> None:
        if self.carrier_size < 1:
            raise DyadicError("carrier must be nonempty")
        if not 0 <= self.basepoint < self.carrier_size:
            raise DyadicError("basepoint is outside the carrier")
        for perm in self.generator_perms:
            if sorted(perm) != list(range(self.carrier_size)):
                raise DyadicError(f"{perm} does not permute the carrier")

    @property
    def m(self) -> int:
        return len(self.generator_perms)

    def apply_letter(self, letter: int, point: int) -> int:
        if letter == 0 or abs(letter) > self.m:
            raise DyadicError(f"letter {letter} is not one of {self.m} generators")
        perm = self.generator_perms[abs(letter) - 1]
        if letter > 0:
            return perm[point]
        return perm.index(point)

    def apply_word(self, word: Sequence[int], point: int) -> int:
        for letter in reversed(word):
            point = self.apply_letter(letter, point)
        return point

    def moves_basepoint(self, word: Sequence[int]) -> bool:
        return self.apply_word(word, self.basepoint) != self.basepoint

    def generator_order(self, i: int) -> int:
        perm = self.generator_perms[i]
        seen = set()
        order = 1
        for start in range(self.carrier_size):
            if start in seen:
                continue
            length, point = 0, start
            while True:
                point = perm[point]
                length += 1
                seen.add(point)
                if point == start:
                    break
            order = lcm(order, length)
        return order

    def to_json(self) -> dict:
        return {
            "carrier": self.carrier_size,
            "basepoint": self.basepoint,
            "generators": [list(p) for p in self.generator_perms],
        }


def translation_action(
    q: int, m: int, d: int, *, carrier_bound: int = 4096
) -> PointedFiniteAction:
    """Left translation of the group generated by 1 + X_i on itself.

    The carrier is the generated subgroup, discovered breadth first
    from the identity, with the identity as basepoint.
    """
    gens = [
        _letter_series(i + 1, q, d) for i in range(m)
    ]

    def key(coeffs: Coefficients) -> tuple:
        return tuple(sorted(coeffs.items(), key=lambda t: (len(t[0]), t[0])))

    elements: list[Coefficients] = [dict(_ONE)]
    index = {key(_ONE): 0}
    cursor = 0
    while cursor < len(elements):
        current = elements[cursor]
        cursor += 1
        for g in gens:
            new = _mul(g, current, q, d)
            k = key(new)
            if k not in index:
                if len(elements) >= carrier_bound:
                    raise CarrierTooLarge(
                        f"carrier exceeds {carrier_bound} at degree {d}"
                    )
                index[k] = len(elements)
                elements.append(new)
    perms = []
    for g in gens:
        perms.append(
            tuple(index[key(_mul(g, e, q, d))] for e in elements)
        )
    return PointedFiniteAction(len(elements), tuple(perms), 0)


def action_sequence(
    q: int, m: int, depths: Sequence[int], *, carrier_bound: int = 4096
) -> list[PointedFiniteAction]:
    return [
        translation_action(q, m, d, carrier_bound=carrier_bound)
        for d in depths
    ]


def embed_finite_action(
    action: PointedFiniteAction, cells: Sequence[DyadicSet]
) -> tuple[PrefixExchange, ...]:
    """Realize a finite pointed action on a list of equal-measure cells.

    A cycle closure T walks the cells in order; the image of a
    generator moving carrier point k to p acts on the k-th cell as
    T**(p - k).  The images multiply exactly like the permutations
    because they all are powers of the one closure, piece by piece.
    """
    n = action.carrier_size
    if len(cells) != n:
        raise DyadicError(
            f"need {n} cells for a carrier of size {n}, got {len(cells)}"
        )
    for i in range(n):
        for j in range(i + 1, n):
            if not cells[i].is_disjoint(cells[j]):
                raise NotDisjoint(f"cells {i} and {j} overlap")
    measure = cells[0].measure()
    for i, cell in enumerate(cells):
        if cell.measure() != measure:
            raise UnequalMeasures(f"cell {i} has a different measure")
    members = tuple(
        match_equal_measure(cells[i], cells[i + 1]) for i in range(n - 1)
    )
    t_phi = cycle_closure(PrePCycle(members))
    powers: dict[int, PrefixExchange] = {}
    images = []
    for perm in action.generator_perms:
        pieces = []
        for k, cell in enumerate(cells):
            shift = perm[k] - k
            if shift not in powers:
                powers[shift] = t_phi.power(shift)
            moved = powers[shift]
            level = max(moved.resolution, cell.level)
            pairs = tuple(
                (w, moved.apply_word(w))
                for w in cell.refine_to_level(level)
            )
            pieces.append(PartialDyadicIso(pairs))
        images.append(PrefixExchange.from_partial(union_partials(pieces)))
    return tuple(images)
