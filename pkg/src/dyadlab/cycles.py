"""Graphings, pre-cycles and their closures, and constructive matching.

A graphing is a finite list of partial prefix isomorphisms; its cost is
the total measure of their domains.  A pre-p-cycle is a chain of p-1
partial isomorphisms whose ranges feed the next domain and whose cells
are pairwise disjoint; closing it up yields a transformation whose
orbits have cardinality 1 or p.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .dyadic import Dyadic, DyadicError, DyadicSet, ZERO
from .transform import IDENTITY, PartialDyadicIso, PrefixExchange, union_partials


class MeasureMismatch(DyadicError):
    """Two sets that had to carry equal measure did not."""


class InvalidPreCycle(DyadicError):
    """A pre-cycle failed validation; the message lists the violations."""


class IndivisibleCost(DyadicError):
    """A graphing cost could not be split into equal dyadic parts."""


@dataclass(frozen=True)
class Graphing:
    """Finite list of partial isomorphisms generating an equivalence."""

    members: tuple[PartialDyadicIso, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))

    def cost(self) -> Dyadic:
        total = ZERO
        for phi in self.members:
            total = total + phi.source().measure()
        return total

    def to_json(self) -> list[list[list[str]]]:
        return [phi.to_json() for phi in self.members]

    @classmethod
    def from_json(cls, data: Iterable[object]) -> "Graphing":
        return cls(tuple(PartialDyadicIso.from_json(item) for item in data))


@dataclass(frozen=True)
class PrePCycle:
    """Chain of p-1 partial isomorphisms meant to close into a p-cycle."""

    members: tuple[PartialDyadicIso, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def p(self) -> int:
        return len(self.members) + 1


@dataclass(frozen=True)
class CycleReport:
    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def validate_pre_p_cycle(c: PrePCycle) -> CycleReport:
    """Check the chaining and disjointness conditions exactly.

    A break between consecutive pieces is blamed on the earlier piece;
    when the measures already differ the report says so, since no
    reindexing can then repair the chain.
    """
    violations: list[str] = []
    members = c.members
    for i in range(len(members) - 1):
        rng, dom = members[i].target(), members[i + 1].source()
        if rng != dom:
            if rng.measure() != dom.measure():
                violations.append(f"measure mismatch in phi_{i + 1}")
            else:
                violations.append(
                    f"range of phi_{i + 1} is not the domain of phi_{i + 2}"
                )
    cells = [phi.source() for phi in members]
    if members:
        cells.append(members[-1].target())
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if not cells[i].is_disjoint(cells[j]):
                violations.append(f"cells {i + 1} and {j + 1} overlap")
    return CycleReport(not violations, tuple(violations))


def cycle_closure(c: PrePCycle) -> PrefixExchange:
    """Close a valid pre-p-cycle into a transformation of order p.

    The closure acts as each piece on its domain, returns along the
    inverted chain on the final range, and fixes everything else.
    """
    report = validate_pre_p_cycle(c)
    if not report.ok:
        raise InvalidPreCycle("; ".join(report.violations))
    if not c.members:
        return IDENTITY
    chain = c.members[0]
    for phi in c.members[1:]:
        chain = phi.compose(chain)
    closing = chain.inverse()
    return PrefixExchange.from_partial(union_partials([*c.members, closing]))


def match_equal_measure(a: DyadicSet, b: DyadicSet) -> PartialDyadicIso:
    """Deterministic partial isomorphism with domain a and range b.

    Both sets are refined to a common level and the cells are paired in
    lexicographic order, so equal inputs always give the same map and
    match_equal_measure(b, a) is exactly the inverse.
    """
    if a.measure() != b.measure():
        raise MeasureMismatch(
            f"measures differ: {a.measure()} vs {b.measure()}"
        )
    level = max(a.level, b.level)
    return PartialDyadicIso(
        tuple(zip(a.refine_to_level(level), b.refine_to_level(level)))
    )


def split_into_subgraphings(phi: Graphing, m: int) -> list[Graphing]:
    """Split a graphing into m graphings of equal cost.

    Every member's domain is cut left to right into m blocks of equal
    measure; the j-th subgraphing collects the j-th block of each
    member, so the restrictions partition the originals.
    """
    if m < 1:
        raise DyadicError("need m >= 1")
    buckets: list[list[PartialDyadicIso]] = [[] for _ in range(m)]
    for member in phi.members:
        share = member.source().measure().as_fraction() / m
        if share.numerator != 0 and (share.denominator & (share.denominator - 1)):
            raise IndivisibleCost(f"cost share {share} is not dyadic")
        block = Dyadic.from_fraction(share)
        rest = member.source()
        for j in range(m - 1):
            taken, rest = rest.take_measure(block)
            buckets[j].append(member.restrict_source(taken))
        buckets[m - 1].append(member.restrict_source(rest))
    return [Graphing(tuple(bucket)) for bucket in buckets]
