"""Recovering commuting factors from powers of their product.

If T moves points in orbits whose lengths divide powers of p, U does
the same for q coprime to p, and their supports are disjoint, then a
single power of TU returns T exactly: choose N so p^N and q^N kill
both orbit structures and l with l q^N = 1 mod p^N; then (TU)^{l q^N}
acts as T on supp T and as the identity on supp U.  At finite
resolution every orbit is finite, so recovery is exact rather than a
limit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd, prod
from typing import Sequence

from .dyadic import Dyadic, DyadicError, DyadicSet
from .transform import IDENTITY, PrefixExchange
from .cycles import PrePCycle, cycle_closure, match_equal_measure


class NotCoprime(DyadicError):
    """Bases that had to be relatively prime were not."""


class SupportsOverlap(DyadicError):
    """Factors that had to move disjoint regions did not."""


def _power_exponent(length: int, base: int) -> int:
    """Least N with length dividing base**N."""
    acc, n = 1, 0
    while acc % length:
        acc *= base
        n += 1
        if n > 64:
            raise DyadicError(
                f"orbit length {length} does not divide a power of {base}"
            )
    return n


@dataclass(frozen=True)
class FactorSpec:
    """A transformation whose orbit lengths divide powers of one base."""

    map: PrefixExchange
    base: int

    def __post_init__(self) -> None:
        if self.base < 2:
            raise DyadicError("factor base must be at least 2")
        for length in self.map.orbit_census():
            _power_exponent(length, self.base)

    def orbit_exponent(self) -> int:
        """Least N with every orbit length dividing base**N."""
        return max(
            (_power_exponent(length, self.base) for length in self.map.orbit_census()),
            default=0,
        )


def reconstruction_exponent(p: int, q: int, n: int) -> int:
    """Least l with l * q**n = 1 mod p**n, for coprime p and q."""
    if p < 2 or q < 2:
        raise DyadicError("need bases >= 2")
    if n < 0:
        raise DyadicError("need n >= 0")
    if gcd(p, q) != 1:
        raise NotCoprime(f"{p} and {q} share a factor")
    modulus = p**n
    if modulus == 1:
        return 1
    return pow(pow(q, n, modulus), -1, modulus)


def reconstruct_factor(
    t: FactorSpec, u: FactorSpec
) -> tuple[PrefixExchange, Dyadic]:
    """Recover t.map from one power of the product, with its exact error.

    The returned distance is zero whenever the preconditions hold; it
    is reported rather than assumed so certificates can show the check.
    """
    if gcd(t.base, u.base) != 1:
        raise NotCoprime(f"bases {t.base} and {u.base} share a factor")
    if not t.map.support().is_disjoint(u.map.support()):
        raise SupportsOverlap("factor supports overlap")
    n = max(t.orbit_exponent(), u.orbit_exponent())
    ell = reconstruction_exponent(t.base, u.base, n)
    product = t.map.compose(u.map)
    recovered = product.power(ell * u.base**n)
    return recovered, recovered.uniform_distance(t.map)


def reconstruct_all(factors: Sequence[FactorSpec]) -> list[PrefixExchange]:
    """Recover every factor from powers of the full product, exactly."""
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if gcd(factors[i].base, factors[j].base) != 1:
                raise NotCoprime(
                    f"bases {factors[i].base} and {factors[j].base}"
                    " share a factor"
                )
            if not factors[i].map.support().is_disjoint(
                factors[j].map.support()
            ):
                raise SupportsOverlap(f"factors {i} and {j} overlap")
    results: list[PrefixExchange] = []
    for k, t in enumerate(factors):
        others = [f for i, f in enumerate(factors) if i != k]
        if not others:
            results.append(t.map)
            continue
        rest_map = IDENTITY
        for f in others:
            rest_map = rest_map.compose(f.map)
        rest = FactorSpec(rest_map, prod(f.base for f in others))
        recovered, distance = reconstruct_factor(t, rest)
        if not distance.is_zero():
            raise DyadicError(f"factor {k} was not recovered exactly")
        results.append(recovered)
    return results


def random_cycle_factor(
    rng: random.Random,
    region: DyadicSet,
    base: int,
    level: int,
    cycles: int = 1,
) -> FactorSpec:
    """A random factor of the given base moving cylinders inside region.

    Draws `cycles` disjoint groups of `base` level cells and closes
    each group into one cycle, so every orbit length is exactly base.
    """
    if base < 2:
        raise DyadicError("factor base must be at least 2")
    cells = list(region.refine_to_level(level))
    if len(cells) < base * cycles:
        raise DyadicError("region is too small for the requested cycles")
    chosen = rng.sample(cells, base * cycles)
    total = IDENTITY
    for c in range(cycles):
        cluster = chosen[c * base : (c + 1) * base]
        members = tuple(
            match_equal_measure(
                DyadicSet.from_words([cluster[i]]),
                DyadicSet.from_words([cluster[i + 1]]),
            )
            for i in range(base - 1)
        )
        total = total.compose(cycle_closure(PrePCycle(members)))
    return FactorSpec(total, base)
