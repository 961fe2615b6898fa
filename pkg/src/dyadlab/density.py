"""Word eccentricity tables and the small-support generator pipeline.

Level-n cylinders carry an action of the finite symmetric group on 2^n
points.  The adding machine and the midpoint transposition generate all
of it; breadth-first search over the Cayley graph records a minimal
word for every element and the eccentricity kappa(n) of the identity.

The pipeline then plans a sequence of transposition levels n_k, takes
the 2^k-th root of each midpoint transposition, restricts away small
invariant exclusion sets, and multiplies the commuting factors into a
single generator U of small support.  An exact error ledger certifies
d(U^(2^k), U_{n_k}) against the planned bounds, and word synthesis
replays any level-n_k permutation as a word in the working odometer
and U, reporting the exact distance achieved.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

from .dyadic import (
    Dyadic,
    DyadicError,
    DyadicSet,
    EMPTY,
    ZERO,
    all_words,
    int_of_word,
    pow2_above,
    pow2_below,
    word_of_int,
)
from .transform import (
    IDENTITY,
    NotInvariantError,
    PrefixExchange,
    binary_root,
    finite_odometer,
    induced,
    midpoint_transposition,
    union_partials,
)


class TooLarge(DyadicError):
    """The requested exhaustive search does not fit the exact regime."""


class LevelTooSmall(DyadicError):
    """The working level cannot represent every planned factor."""


class DeltaExceeded(DyadicError):
    """An exclusion set is larger than its planned delta allows."""


class NoPlanEntry(DyadicError):
    """No planned factor covers the requested target."""


# -- level permutations

Perm = tuple[int, ...]

SEARCHABLE_LEVELS = (2, 3)


def sigma_perm(n: int) -> Perm:
    """Value permutation of the adding machine at level n."""
    size = 1 << n
    return tuple((v + 1) % size for v in range(size))


def tau_perm(n: int) -> Perm:
    """Value permutation of the midpoint transposition at level n."""
    size = 1 << n
    lo, hi = size // 2 - 1, size // 2
    return tuple(hi if v == lo else lo if v == hi else v for v in range(size))


def compose_perms(x: Perm, g: Perm) -> Perm:
    """x after g."""
    return tuple(x[g[i]] for i in range(len(x)))


def invert_perm(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def exchange_to_perm(t: PrefixExchange, n: int) -> Perm:
    """Action of t on level-n cylinder values; t must resolve at n."""
    return tuple(
        int_of_word(t.apply_word(word_of_int(v, n))) for v in range(1 << n)
    )


def perm_to_exchange(p: Perm, n: int) -> PrefixExchange:
    if sorted(p) != list(range(1 << n)):
        raise DyadicError("not a permutation of level values")
    return PrefixExchange(
        tuple(
            (word_of_int(v, n), word_of_int(p[v], n)) for v in range(1 << n)
        )
    )


def closure_size(gens: Iterable[Perm]) -> int:
    """Size of the group the permutations generate, by multiplication."""
    gens = [tuple(g) for g in gens]
    if not gens:
        return 1
    ident = tuple(range(len(gens[0])))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose_perms(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen)


def _check_level(n: int) -> None:
    if n < 2:
        raise DyadicError("level permutation search needs n >= 2")
    if n not in SEARCHABLE_LEVELS:
        raise TooLarge(f"exhaustive search over ({1 << n})! elements refused")


def generation_check(n: int) -> bool:
    """Do the adding machine and midpoint transposition generate everything?"""
    _check_level(n)
    return closure_size([sigma_perm(n), tau_perm(n)]) == factorial(1 << n)


# minimal-word letters: s = sigma, S = sigma inverse, u = tau
_LETTERS = ("s", "S", "u")


@dataclass(frozen=True)
class WordTable:
    """Minimal words for every level-n permutation, plus the eccentricity."""

    n: int
    kappa: int
    words: dict[Perm, str]

    def word_for(self, p: Perm) -> str:
        try:
            return self.words[p]
        except KeyError:
            raise DyadicError("not a level permutation of this table") from None


@lru_cache(maxsize=None)
def word_table(n: int) -> WordTable:
    """Breadth-first search of the Cayley graph at level n.

    Words compose left to right as maps, rightmost letter acting first;
    the three letters stand for sigma, sigma^-1 and tau.
    """
    _check_level(n)
    gens = {
        "s": sigma_perm(n),
        "S": invert_perm(sigma_perm(n)),
        "u": tau_perm(n),
    }
    ident = tuple(range(1 << n))
    words: dict[Perm, str] = {ident: ""}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for letter in _LETTERS:
            y = compose_perms(x, gens[letter])
            if y not in words:
                words[y] = words[x] + letter
                queue.append(y)
    if len(words) != factorial(1 << n):
        raise DyadicError("generators failed to reach the full group")
    return WordTable(n, max(len(w) for w in words.values()), words)


def kappa_bfs(n: int) -> int:
    """Exact eccentricity of the identity at level n."""
    return word_table(n).kappa


# -- planning


@dataclass(frozen=True)
class GeneratorPlan:
    """Exact parameters for one assembly of the generator U."""

    epsilon: Dyadic
    n_seq: tuple[int, ...]
    delta_seq: tuple[Dyadic, ...]
    eps_seq: tuple[Dyadic, ...]
    kappa_table: tuple[tuple[int, int], ...]
    level: int

    @property
    def factors(self) -> int:
        return len(self.n_seq)

    def kappa(self, n: int) -> int:
        for key, value in self.kappa_table:
            if key == n:
                return value
        raise NoPlanEntry(f"no eccentricity on record for level {n}")

    def tail(self, k: int) -> Fraction:
        """Total support budget of the factors after the k-th."""
        return sum(
            (Fraction(1, 1 << (m - 1)) for m in self.n_seq[k + 1 :]),
            Fraction(0),
        )

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon.to_json(),
            "n_seq": list(self.n_seq),
            "delta_seq": [d.to_json() for d in self.delta_seq],
            "eps_seq": [e.to_json() for e in self.eps_seq],
            "kappa_table": {str(n): k for n, k in self.kappa_table},
            "level": self.level,
            "factors": self.factors,
        }


def plan_sequences(epsilon: Dyadic, factors: int, level: int) -> GeneratorPlan:
    """Greedy minimal transposition levels under the support budget.

    The levels n_k increase, each kappa(n_k) must be computable, and
    the honest budget sum of 2^(-n_k+1) (the exact support measure of
    each transposition) stays strictly under epsilon; that strengthens
    the nominal sum of 2^(-n_k).  The error targets eps_k are raised,
    when necessary, to the smallest power of two that provably covers
    the downstream tail, the per-word odometer truncation, and the
    delta_k exclusion budget; delta_k is then the largest power of two
    under eps_k/(2 kappa(n_k)).
    """
    if factors < 0:
        raise DyadicError("need factors >= 0")
    if not ZERO < epsilon:
        raise DyadicError("need epsilon > 0")
    target = epsilon.as_fraction()
    n_seq: list[int] = []
    committed = Fraction(0)
    prev = 1
    top = max(SEARCHABLE_LEVELS)
    for k in range(factors):
        chosen = None
        for n in range(prev + 1, top + 1):
            remaining = factors - 1 - k
            if n + remaining > top:
                continue
            tail_min = sum(
                (Fraction(1, 1 << (n + i - 1)) for i in range(1, remaining + 1)),
                Fraction(0),
            )
            if committed + Fraction(1, 1 << (n - 1)) + tail_min < target:
                chosen = n
                break
        if chosen is None:
            raise TooLarge(
                "no sequence of searchable levels fits the support budget"
            )
        n_seq.append(chosen)
        committed += Fraction(1, 1 << (chosen - 1))
        prev = chosen
    if n_seq and n_seq[-1] + factors > level:
        raise LevelTooSmall(f"need working level >= {n_seq[-1] + factors}")

    kappa_table = tuple((n, kappa_bfs(n)) for n in sorted(set(n_seq)))
    kappa_of = dict(kappa_table)
    eps_seq: list[Dyadic] = []
    delta_seq: list[Dyadic] = []
    for k, n in enumerate(n_seq):
        kap = kappa_of[n]
        tail = sum(
            (Fraction(1, 1 << (m - 1)) for m in n_seq[k + 1 :]), Fraction(0)
        )
        need = 2 * kap * (Fraction(1, 1 << n) + tail + Fraction(1, 1 << level))
        eps = max(Dyadic.pow2(k + 1), pow2_above(need))
        delta = pow2_below(eps.as_fraction() / (2 * kap))
        eps_seq.append(eps)
        delta_seq.append(delta)

    plan = GeneratorPlan(
        epsilon=epsilon,
        n_seq=tuple(n_seq),
        delta_seq=tuple(delta_seq),
        eps_seq=tuple(eps_seq),
        kappa_table=kappa_table,
        level=level,
    )
    _verify_plan(plan)
    return plan


def _verify_plan(plan: GeneratorPlan) -> None:
    # defensive re-check of everything downstream code relies on
    nominal = sum(
        (Fraction(1, 1 << n) for n in plan.n_seq), Fraction(0)
    )
    if not nominal < plan.epsilon.as_fraction():
        raise DyadicError("planned supports exceed the epsilon budget")
    for k, n in enumerate(plan.n_seq):
        kap = plan.kappa(n)
        half_bound = plan.eps_seq[k].as_fraction() / (2 * kap)
        if not plan.delta_seq[k].as_fraction() < half_bound:
            raise DyadicError("delta_k is not under eps_k/(2 kappa)")
        if k + 1 < plan.factors:
            if not Fraction(1, 1 << (plan.n_seq[k + 1] + 2)) < half_bound:
                raise DyadicError("the next level is not small enough")
    if plan.n_seq and plan.n_seq[-1] + plan.factors > plan.level:
        raise DyadicError("factors do not fit at the working level")


# -- assembly


@dataclass(frozen=True)
class LedgerRow:
    k: int
    n: int
    exact: Dyadic
    bound: Fraction
    slack: Dyadic
    passed: bool

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "exact": self.exact.to_json(),
            "bound": [self.bound.numerator, self.bound.denominator],
            "slack": self.slack.to_json(),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ErrorLedger:
    rows: tuple[LedgerRow, ...]
    support_measure: Dyadic
    epsilon: Dyadic
    ok: bool

    def to_json(self) -> dict:
        return {
            "rows": [row.to_json() for row in self.rows],
            "support_measure": self.support_measure.to_json(),
            "epsilon": self.epsilon.to_json(),
            "ok": self.ok,
        }


def assemble_U(
    plan: GeneratorPlan, b_excl: Sequence[DyadicSet] | None = None
) -> tuple[PrefixExchange, ErrorLedger]:
    """Multiply the restricted roots into U and certify the ledger.

    The k-th factor is the 2^k-th root of the level-n_k midpoint
    transposition, restricted to its support minus the k-th exclusion
    set; exclusion sets must be invariant under the root and smaller
    than delta_k.  All factors have pairwise disjoint supports, so the
    product needs no ordering.
    """
    if b_excl is None:
        b_excl = [EMPTY] * plan.factors
    if len(b_excl) != plan.factors:
        raise DyadicError("need one exclusion set per factor")

    parts = []
    for k, n in enumerate(plan.n_seq):
        root = binary_root(midpoint_transposition(n), k)
        bar = b_excl[k]
        if not bar.measure() < plan.delta_seq[k]:
            raise DeltaExceeded(
                f"exclusion {k} has measure {bar.measure()},"
                f" needs < {plan.delta_seq[k]}"
            )
        if root.apply_set(bar) != bar:
            raise NotInvariantError(f"exclusion {k} is not root-invariant")
        kept = root.support().difference(bar)
        parts.append(induced(root, kept))
    u = PrefixExchange.from_partial(union_partials(parts))

    rows = []
    slack = Dyadic.pow2(plan.level)
    for k, n in enumerate(plan.n_seq):
        exact = u.power(1 << k).uniform_distance(midpoint_transposition(n))
        bound = plan.eps_seq[k].as_fraction() / plan.kappa(n)
        passed = exact.as_fraction() + slack.as_fraction() < bound
        rows.append(LedgerRow(k, n, exact, bound, slack, passed))
    support_measure = u.support().measure()
    ok = all(row.passed for row in rows) and support_measure < plan.epsilon
    return u, ErrorLedger(tuple(rows), support_measure, plan.epsilon, ok)


# -- word synthesis


@dataclass(frozen=True)
class SynthesisResult:
    """A replayed target with its exact distance accounting."""

    k: int
    n: int
    letters: str
    word: tuple[str, ...]
    realized: PrefixExchange
    achieved: Dyadic
    budget: Fraction

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "letters": self.letters,
            "word": list(self.word),
            "achieved": self.achieved.to_json(),
            "budget": [self.budget.numerator, self.budget.denominator],
        }


def synthesize_word(
    target: PrefixExchange,
    plan: GeneratorPlan,
    u: PrefixExchange,
    k: int | None = None,
) -> SynthesisResult:
    """Replay a level-n_k permutation as a word in the odometer and U.

    The minimal word over sigma/tau comes from the level table; sigma
    becomes the level-L adding machine, tau becomes U^(2^k).  The exact
    distance achieved is checked against eps_k plus the per-letter
    truncation slack.
    """
    if k is None:
        candidates = [
            i for i, n in enumerate(plan.n_seq) if n >= target.resolution
        ]
        if not candidates:
            raise NoPlanEntry(
                f"no planned level resolves a target at {target.resolution}"
            )
        k = candidates[0]
    if not 0 <= k < plan.factors:
        raise NoPlanEntry(f"no factor {k} in this plan")
    n = plan.n_seq[k]
    if target.resolution > n:
        raise NoPlanEntry(f"target needs level {target.resolution} > {n}")

    letters = word_table(n).word_for(exchange_to_perm(target, n))
    odometer = finite_odometer(plan.level)
    substitutes = {
        "s": odometer,
        "S": odometer.inverse(),
        "u": u.power(1 << k),
    }
    realized = IDENTITY
    word: list[str] = []
    for letter in letters:
        realized = realized.compose(substitutes[letter])
        if letter == "s":
            word.append("T")
        elif letter == "S":
            word.append("T^-1")
        else:
            word.extend(["U"] * (1 << k))
    achieved = realized.uniform_distance(target)
    budget = plan.eps_seq[k].as_fraction() + Fraction(
        len(letters), 1 << plan.level
    )
    if not achieved.as_fraction() < budget:
        raise DyadicError(
            f"synthesis for {target} missed its budget: {achieved} vs {budget}"
        )
    return SynthesisResult(k, n, letters, tuple(word), realized, achieved, budget)
