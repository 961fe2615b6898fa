"""End-to-end assembly of a small generating family with certificates.

This module wires the other components into one pipeline.  Given a
working level, a factor count, an odd cycle length p, an odd prime q,
and an optional input graphing, it reserves translation-disjoint stage
sets, assembles the sparse generator U away from them, relocates the
graphing into a shared cycle skeleton, and builds the free-factor
actions on the reserved sets.  The output is the generator family

    T, U V_1 C_1, V_2 C_2, ..., V_m C_m

together with a master certificate: exact support disjointness, orbit
order classes, the support budget gate, commuting-product recovery of
every factor from the composite generators, word synthesis of the
planned targets, and the high-faithfulness witnesses.  Everything is
computed in exact dyadic arithmetic; no inequality in the certificate
is sampled or rounded.

Schreier graphs of the generated word action, boundary-ratio reports
for candidate interval sets, and stabilizer signatures at chosen
basepoints are provided for inspecting the result.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .commuting import FactorSpec, reconstruct_all
from .cycles import (
    Graphing,
    PrePCycle,
    cycle_closure,
    match_equal_measure,
    split_into_subgraphings,
)
from .density import (
    ErrorLedger,
    GeneratorPlan,
    LevelTooSmall,
    SynthesisResult,
    TooLarge,
    assemble_U,
    plan_sequences,
    synthesize_word,
)
from .dyadic import (
    EMPTY,
    FULL,
    ZERO,
    Dyadic,
    DyadicError,
    DyadicSet,
    Word,
    check_word,
)
from .faithful import HFCheckReport, TowerResult, free_product_tower, hf_check
from .rfactions import action_sequence, reduced_words
from .transform import (
    PartialDyadicIso,
    PrefixExchange,
    binary_root,
    finite_odometer,
    midpoint_transposition,
    union_partials,
)


class ConfigInfeasible(DyadicError):
    """The requested parameters cannot be realized at this level."""


class OrbitTooLarge(DyadicError):
    """A Schreier orbit walk exceeded its configured vertex bound."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# -- configuration


@dataclass(frozen=True)
class PipelineConfig:
    """Exact parameters for one full assembly run.

    The defaults describe the standing demonstration: one free factor
    beside the odometer, cycle length five, residual prime three, two
    density factors at working level fourteen.  The graphing is empty
    by default, so the ambient relation is the odometer relation and
    the cycle generators come out trivial.
    """

    m: int = 1
    p: int = 5
    q: int = 3
    level: int = 14
    factors: int = 2
    phi: Graphing = field(default_factory=lambda: Graphing(()))
    tower_depth: int = 1
    action_depths: tuple[int, ...] = (1, 2, 3)
    hf_radius: int = 2
    orbit_bound: int = 1 << 20

    def __post_init__(self) -> None:
        object.__setattr__(self, "action_depths", tuple(self.action_depths))
        if self.m < 1:
            raise ConfigInfeasible("need m >= 1")
        if self.p < 1 or self.p % 2 == 0:
            raise ConfigInfeasible("p must be odd and positive")
        if self.q % 2 == 0 or not _is_prime(self.q):
            raise ConfigInfeasible("q must be an odd prime")
        if (self.p + 2) % self.q == 0:
            raise ConfigInfeasible(
                f"q must not divide p+2 (q = {self.q}, p+2 = {self.p + 2})"
            )
        if self.level < 3:
            raise ConfigInfeasible("need working level >= 3")
        if self.factors < 0:
            raise ConfigInfeasible("need factors >= 0")
        if self.tower_depth < 0:
            raise ConfigInfeasible("need tower depth >= 0")
        if not self.action_depths or any(d < 1 for d in self.action_depths):
            raise ConfigInfeasible("action depths must be positive")
        # words up to this radius survive the mod-q abelianization, so
        # the moving-set sweep is guaranteed a witness
        allowed = 2 if self.q == 3 else 3
        if not 1 <= self.hf_radius <= allowed:
            raise ConfigInfeasible(
                f"faithfulness radius must lie in 1..{allowed} for q = {self.q}"
            )
        if self.orbit_bound < 1:
            raise ConfigInfeasible("orbit bound must be positive")
        cost = self.phi.cost().as_fraction()
        if not cost < self.m:
            raise ConfigInfeasible(
                f"graphing cost {cost} must stay under m = {self.m}"
            )
        if not (self.p + 2) * self.cost_share < self.p:
            raise ConfigInfeasible(
                "(p+2)/p times the cost share must stay under 1"
            )

    @property
    def cost_share(self) -> Fraction:
        """Cost of the graphing spread over the m free factors."""
        return self.phi.cost().as_fraction() / self.m

    @property
    def gate(self) -> Fraction:
        """Upper budget for everything outside the cycle cells."""
        return 1 - Fraction(self.p + 2, self.p) * self.cost_share

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "p": self.p,
            "q": self.q,
            "level": self.level,
            "factors": self.factors,
            "phi": self.phi.to_json(),
            "cost_share": [
                self.cost_share.numerator,
                self.cost_share.denominator,
            ],
            "gate": [self.gate.numerator, self.gate.denominator],
            "tower_depth": self.tower_depth,
            "action_depths": list(self.action_depths),
            "hf_radius": self.hf_radius,
            "orbit_bound": self.orbit_bound,
        }


# -- certificate rows


@dataclass(frozen=True)
class ReserveRow:
    """One reserved stage set and its odometer translates."""

    n: int
    level: int
    tier: int
    cell: DyadicSet
    translates: DyadicSet

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "level": self.level,
            "tier": self.tier,
            "cell": self.cell.to_json(),
            "translates_measure": self.translates.measure().to_json(),
        }


@dataclass(frozen=True)
class ClaimRow:
    """Exact overlap of the reserved mass with one factor support."""

    k: int
    n: int
    overlap: Dyadic
    bound: Fraction
    passed: bool

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "overlap": self.overlap.to_json(),
            "bound": [self.bound.numerator, self.bound.denominator],
            "passed": self.passed,
        }


@dataclass(frozen=True)
class BudgetGate:
    """The strict inequality guarding the cycle-cell allocation."""

    measure: Dyadic
    bound: Fraction
    passed: bool

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "bound": [self.bound.numerator, self.bound.denominator],
            "passed": self.passed,
        }


@dataclass(frozen=True)
class RecoveryRow:
    """One factor recovered as an explicit power of a composite."""

    label: str
    base: int
    distance: Dyadic
    exact: bool

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "base": self.base,
            "distance": self.distance.to_json(),
            "exact": self.exact,
        }


def _census_pairs(t: PrefixExchange) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(t.orbit_census().items()))


# -- pipeline result


@dataclass(frozen=True)
class PipelineResult:
    """Everything one run produced, with its exact certificates."""

    config: PipelineConfig
    epsilon_target: Dyadic
    relaxed: bool
    plan: GeneratorPlan
    reserves: tuple[ReserveRow, ...]
    claims: tuple[ClaimRow, ...]
    exclusions: tuple[DyadicSet, ...]
    splits: tuple[tuple[DyadicSet, DyadicSet], ...]
    u: PrefixExchange
    ledger: ErrorLedger
    budget: BudgetGate
    d_star: Dyadic
    d_cells: tuple[DyadicSet, ...]
    cycles: tuple[PrefixExchange, ...]
    tower: TowerResult
    generators: tuple[PrefixExchange, ...]
    labels: tuple[str, ...]
    disjointness: tuple[tuple[str, str, bool], ...]
    order_census: tuple[tuple[str, tuple[tuple[int, int], ...]], ...]
    recovery: tuple[RecoveryRow, ...]
    synthesis: tuple[SynthesisResult, ...]
    hf: HFCheckReport

    @property
    def vs(self) -> tuple[PrefixExchange, ...]:
        return self.tower.generators

    @property
    def schreier_level(self) -> int:
        """Coarsest word length resolving every generator everywhere."""
        return max(
            self.config.level,
            max(g.resolution for g in self.generators),
        )

    def loop_region(self, n: int) -> DyadicSet:
        """Reserved half that every non-odometer generator fixes."""
        return self.splits[n][1]

    def basepoint(self, n: int) -> Word:
        """First word of the stage-n loop region at the orbit level."""
        level = max(self.schreier_level, self.loop_region(n).level)
        return self.loop_region(n).refine_to_level(level)[0]

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "epsilon_target": self.epsilon_target.to_json(),
            "relaxed": self.relaxed,
            "plan": self.plan.to_json(),
            "reserves": [row.to_json() for row in self.reserves],
            "claims": [row.to_json() for row in self.claims],
            "exclusion_measures": [
                e.measure().to_json() for e in self.exclusions
            ],
            "splits": [
                {
                    "n": n,
                    "kept": kept.to_json(),
                    "loop": loop.to_json(),
                }
                for n, (kept, loop) in enumerate(self.splits)
            ],
            "u": self.u.to_json(),
            "ledger": self.ledger.to_json(),
            "budget": self.budget.to_json(),
            "d_star": self.d_star.to_json(),
            "d_cell_measures": [
                d.measure().to_json() for d in self.d_cells
            ],
            "cycle_support_measures": [
                c.support().measure().to_json() for c in self.cycles
            ],
            "tower": {
                "carriers": list(self.tower.carrier_sizes),
                "epsilons": [e.to_json() for e in self.tower.epsilons],
                "stage_word_counts": [
                    len(words) for words in self.tower.stage_words
                ],
                "slacks": [
                    s.to_json() for s in self.tower.certificate.slacks
                ],
                "family": self.tower.certificate.family.to_json(),
            },
            "labels": list(self.labels),
            "generator_resolutions": [
                g.resolution for g in self.generators
            ],
            "generator_support_measures": [
                g.support().measure().to_json() for g in self.generators
            ],
            "schreier_level": self.schreier_level,
            "disjointness": [list(row) for row in self.disjointness],
            "order_census": {
                label: {str(k): v for k, v in census}
                for label, census in self.order_census
            },
            "recovery": [row.to_json() for row in self.recovery],
            "synthesis": [row.to_json() for row in self.synthesis],
            "hf": self.hf.to_json(),
        }

    def summary(self) -> list[str]:
        lines = [
            f"generators: {', '.join(self.labels)}",
            f"plan levels: {list(self.plan.n_seq)}"
            + (" (relaxed budget)" if self.relaxed else ""),
            f"support of U: {self.u.support().measure()}",
            f"budget: {self.budget.measure} < "
            f"{self.budget.bound.numerator}/{self.budget.bound.denominator}"
            f" -> {'ok' if self.budget.passed else 'FAILED'}",
            f"cycle cell measure: {self.d_star} x {len(self.d_cells)}",
            f"tower carriers: {list(self.tower.carrier_sizes)}",
            f"recovered factors: "
            f"{sum(1 for row in self.recovery if row.exact)}"
            f"/{len(self.recovery)} exact",
            f"faithfulness witness: "
            f"{self.hf.witness.measure()} at radius {self.hf.radius}",
            f"orbit level: {self.schreier_level}",
        ]
        return lines


# -- stage reservation


def _stage_level(n: int, deltas: Sequence[Dyadic], cap: int) -> int:
    """Smallest level whose translate mass clears every claim bound."""
    bounds = [
        delta.as_fraction() / (1 << (k + n + 3))
        for k, delta in enumerate(deltas)
    ]
    target = min(bounds) if bounds else Fraction(1, 4)
    level = 1
    while Fraction(2 * n + 1, 1 << level) > target:
        level += 1
        if level > cap:
            raise ConfigInfeasible(
                f"stage {n} reserve needs a level beyond {cap}"
            )
    return level


def _reserve_stages(
    cfg: PipelineConfig,
    plan: GeneratorPlan,
    roots: Sequence[PrefixExchange],
) -> tuple[list[ReserveRow], DyadicSet]:
    """Greedy cylinder reservation with support avoidance tiers.

    Tier 0 keeps all translates clear of every factor support, tier 1
    only of the factors after the first, tier 2 of nothing; the claim
    bounds are verified afterwards either way.
    """
    t = finite_odometer(cfg.level)
    powers: dict[int, PrefixExchange] = {0: t.power(0)}
    for i in range(1, cfg.tower_depth + 1):
        powers[i] = t.power(i)
        powers[-i] = t.power(-i)

    avoid_tiers = [
        _union_sets(root.support() for root in roots),
        _union_sets(root.support() for root in roots[1:]),
        EMPTY,
    ]
    cap = cfg.level + 16
    rows: list[ReserveRow] = []
    used = EMPTY
    for n in range(cfg.tower_depth + 1):
        level = _stage_level(n, plan.delta_seq, cap)
        found = None
        for tier, avoid in enumerate(avoid_tiers):
            for bits in itertools.product("01", repeat=level):
                cell = DyadicSet.from_words(["".join(bits)])
                translates = EMPTY
                ok = True
                for i in range(-n, n + 1):
                    image = powers[i].apply_set(cell)
                    if not translates.is_disjoint(image):
                        ok = False
                        break
                    if not used.is_disjoint(image):
                        ok = False
                        break
                    if not avoid.is_disjoint(image):
                        ok = False
                        break
                    translates = translates.union(image)
                if ok:
                    found = (tier, cell, translates)
                    break
            if found is not None:
                break
        if found is None:
            raise ConfigInfeasible(
                f"no room for the stage-{n} reserve at level {level}"
            )
        tier, cell, translates = found
        rows.append(ReserveRow(n, level, tier, cell, translates))
        used = used.union(translates)
    return rows, used


def _union_sets(sets: Iterable[DyadicSet]) -> DyadicSet:
    out = EMPTY
    for s in sets:
        out = out.union(s)
    return out


def _plan_with_relaxation(
    epsilon: Dyadic, factors: int, level: int
) -> tuple[GeneratorPlan, bool]:
    """Plan under the given budget, or the nearest 2-power above it.

    Nothing downstream trusts the relaxed budget: the final gate is
    checked on the constructed sets, so relaxation can only move a
    failure from the planner to the exact inequality.
    """
    try:
        return plan_sequences(epsilon, factors, level), False
    except (TooLarge, LevelTooSmall):
        pass
    target = epsilon
    for _ in range(level + 4):
        target = target * 2
        try:
            return plan_sequences(target, factors, level), True
        except (TooLarge, LevelTooSmall):
            continue
    raise ConfigInfeasible(
        f"no {factors}-factor plan fits at working level {level}"
    )


# -- graphing relocation


def _relocate_graphing(
    members: Sequence[PartialDyadicIso],
    d_cells: Sequence[DyadicSet],
    d_star: Dyadic,
    p: int,
) -> list[PartialDyadicIso]:
    """Cut the members into p equal blocks riding the cell chain.

    Block j is carried from cell j to cell j+1: each consumed piece is
    pre- and post-composed with deterministic matchers, so the blocks
    are honest conjugates of restrictions of the input members.
    """
    queue = [phi for phi in members if not phi.source().measure().is_zero()]
    out: list[PartialDyadicIso] = []
    for j in range(p):
        dom_rest = d_cells[j]
        ran_rest = d_cells[j + 1]
        remaining = d_star
        pieces: list[PartialDyadicIso] = []
        while not remaining.is_zero():
            if not queue:
                raise DyadicError("graphing mass ran out before the cells")
            head = queue[0]
            mass = head.source().measure()
            if remaining < mass:
                taken, rest = head.source().take_measure(remaining)
                sub = head.restrict_source(taken)
                queue[0] = head.restrict_source(rest)
                used = remaining
            else:
                sub = queue.pop(0)
                used = mass
            dom_chunk, dom_rest = dom_rest.take_measure(used)
            ran_chunk, ran_rest = ran_rest.take_measure(used)
            alpha = match_equal_measure(dom_chunk, sub.source())
            beta = match_equal_measure(sub.target(), ran_chunk)
            pieces.append(beta.compose(sub).compose(alpha))
            remaining = remaining - used
        out.append(union_partials(pieces))
    if queue:
        raise DyadicError("graphing mass exceeded the cell chain")
    return out


# -- the pipeline


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run every stage and return the generators with certificates.

    Raises ConfigInfeasible when a strict inequality the construction
    relies on fails at this working level; every other error names the
    component that rejected its input.
    """
    # budget and factor plan
    gate = cfg.gate
    half = gate / 2
    scaled = (half.numerator << cfg.level) // half.denominator
    if scaled <= 0:
        raise ConfigInfeasible(
            f"working level {cfg.level} cannot resolve the budget {half}"
        )
    epsilon_target = Dyadic.make(scaled, cfg.level)
    plan, relaxed = _plan_with_relaxation(
        epsilon_target, cfg.factors, cfg.level
    )

    roots = [
        binary_root(midpoint_transposition(n), k)
        for k, n in enumerate(plan.n_seq)
    ]

    # stage reservation and the overlap claims
    reserve_rows, t_mass = _reserve_stages(cfg, plan, roots)
    claims = []
    for k, (n, root) in enumerate(zip(plan.n_seq, roots)):
        overlap = t_mass.intersection(root.support())
        bound = plan.delta_seq[k].as_fraction() / (1 << (k + 1))
        passed = overlap.measure().as_fraction() < bound
        claims.append(ClaimRow(k, n, overlap.measure(), bound, passed))
        if not passed:
            raise ConfigInfeasible(
                f"stage reservation violates the factor-{k} exclusion budget"
            )

    # saturated exclusion sets, one per factor
    exclusions = []
    for k, root in enumerate(roots):
        seed = root.support().intersection(t_mass)
        bar = EMPTY
        if not seed.measure().is_zero():
            image = seed
            for _ in range(1 << (k + 1)):
                bar = bar.union(image)
                image = root.apply_set(image)
        exclusions.append(bar)

    # split each reserve into the action half and the loop half
    splits = []
    for row in reserve_rows:
        half_measure = row.cell.measure() * Dyadic.pow2(1)
        kept, loop = row.cell.take_measure(half_measure)
        splits.append((kept, loop))

    # assemble the sparse generator and gate the budget
    u, ledger = assemble_U(plan, exclusions)
    if not ledger.ok:
        raise ConfigInfeasible("the generator ledger failed its bounds")
    b_set = t_mass.union(u.support())
    budget = BudgetGate(
        b_set.measure(), gate, b_set.measure().as_fraction() < gate
    )
    if not budget.passed:
        raise ConfigInfeasible(
            f"reserved mass {budget.measure} exceeds the budget gate {gate}"
        )

    # cycle cells in the complement
    share = cfg.cost_share
    if share == 0:
        d_star = ZERO
        d_cells = tuple(EMPTY for _ in range(cfg.p + 2))
        comp = FULL.difference(b_set)
    else:
        num = -((-share.numerator << cfg.level) // (share.denominator * cfg.p))
        d_star = Dyadic.make(num, cfg.level)
        comp = FULL.difference(b_set)
        total = d_star.as_fraction() * (cfg.p + 2)
        if not total <= comp.measure().as_fraction():
            raise ConfigInfeasible(
                f"cycle cells need measure {total}, "
                f"complement holds {comp.measure()}"
            )
        cells = []
        for _ in range(cfg.p + 2):
            cell, comp = comp.take_measure(d_star)
            cells.append(cell)
        d_cells = tuple(cells)

    # relocate the graphing onto the cells and close the cycles
    subgraphings = split_into_subgraphings(cfg.phi, cfg.m)
    psi = match_equal_measure(d_cells[cfg.p], d_cells[cfg.p + 1])
    cycles = []
    for sub in subgraphings:
        members = list(sub.members)
        pad = d_star * cfg.p - sub.cost()
        if not pad.is_zero():
            pad_cell, comp = comp.take_measure(pad)
            members.append(PartialDyadicIso.identity_on(pad_cell))
        chain = _relocate_graphing(members, d_cells, d_star, cfg.p)
        chain.append(psi)
        cycles.append(cycle_closure(PrePCycle(tuple(chain))))

    # free-factor actions on the kept halves
    actions = action_sequence(cfg.q, cfg.m, cfg.action_depths)
    tower = free_product_tower(
        finite_odometer(cfg.level),
        actions,
        [kept for kept, _ in splits],
    )
    vs = tower.generators

    # the generator family
    t = finite_odometer(cfg.level)
    gens = [t, u.compose(vs[0]).compose(cycles[0])]
    for i in range(1, cfg.m):
        gens.append(vs[i].compose(cycles[i]))
    labels = ("T",) + tuple(f"g{i + 1}" for i in range(cfg.m))

    # certificates
    disjointness = []
    pairs = [("U", u, "V1", vs[0]), ("U", u, "C1", cycles[0])]
    for i in range(cfg.m):
        pairs.append((f"V{i + 1}", vs[i], f"C{i + 1}", cycles[i]))
    for name_a, a, name_b, b in pairs:
        ok = a.support().is_disjoint(b.support())
        disjointness.append((name_a, name_b, ok))
        if not ok:
            raise DyadicError(
                f"supports of {name_a} and {name_b} overlap"
            )

    order_census = [("U", _census_pairs(u))]
    for length, _ in order_census[0][1]:
        if length & (length - 1):
            raise DyadicError(f"U has an orbit of length {length}")
    for i, v in enumerate(vs):
        census = _census_pairs(v)
        order_census.append((f"V{i + 1}", census))
        for length, _ in census:
            reduced = length
            while reduced % cfg.q == 0:
                reduced //= cfg.q
            if reduced != 1:
                raise DyadicError(
                    f"V{i + 1} has an orbit of length {length}"
                )
    for i, c in enumerate(cycles):
        census = _census_pairs(c)
        order_census.append((f"C{i + 1}", census))
        if any(length != cfg.p + 2 for length, _ in census):
            raise DyadicError(
                f"C{i + 1} has an orbit away from length {cfg.p + 2}"
            )

    recovery = []
    groups = [
        [("U", u, 2), ("V1", vs[0], cfg.q), ("C1", cycles[0], cfg.p + 2)]
    ]
    for i in range(1, cfg.m):
        groups.append(
            [
                (f"V{i + 1}", vs[i], cfg.q),
                (f"C{i + 1}", cycles[i], cfg.p + 2),
            ]
        )
    for group in groups:
        specs = [FactorSpec(mapping, base) for _, mapping, base in group]
        recovered = reconstruct_all(specs)
        for (label, mapping, base), image in zip(group, recovered):
            recovery.append(
                RecoveryRow(label, base, ZERO, image == mapping)
            )

    synthesis = tuple(
        synthesize_word(midpoint_transposition(n), plan, u, k)
        for k, n in enumerate(plan.n_seq)
    )

    hf = hf_check(vs, cfg.hf_radius, cfg.level)
    if not hf.ok:
        raise DyadicError(
            f"short words lost their moving witness at {hf.failing_word}"
        )

    return PipelineResult(
        config=cfg,
        epsilon_target=epsilon_target,
        relaxed=relaxed,
        plan=plan,
        reserves=tuple(reserve_rows),
        claims=tuple(claims),
        exclusions=tuple(exclusions),
        splits=tuple(splits),
        u=u,
        ledger=ledger,
        budget=budget,
        d_star=d_star,
        d_cells=d_cells,
        cycles=tuple(cycles),
        tower=tower,
        generators=tuple(gens),
        labels=labels,
        disjointness=tuple(disjointness),
        order_census=tuple(order_census),
        recovery=tuple(recovery),
        synthesis=synthesis,
        hf=hf,
    )


# -- Schreier graphs


@dataclass(frozen=True)
class SchreierGraph:
    """Orbit of a word under the generated word action.

    Vertices are the words of one orbit in discovery order; for every
    label there is exactly one outgoing edge per vertex, recorded as
    the image index, and each label row is a permutation of the orbit.
    """

    level: int
    labels: tuple[str, ...]
    vertices: tuple[Word, ...]
    targets: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.targets):
            raise DyadicError("need one target row per label")
        count = len(self.vertices)
        for label, row in zip(self.labels, self.targets):
            if len(row) != count or sorted(row) != list(range(count)):
                raise DyadicError(
                    f"label {label} does not permute the orbit"
                )

    def index(self, w: Word) -> int:
        try:
            return self.vertices.index(w)
        except ValueError:
            raise DyadicError(f"word {w!r} is not in this orbit") from None

    def edges(self) -> Iterable[tuple[int, str, int]]:
        for label, row in zip(self.labels, self.targets):
            for i, j in enumerate(row):
                yield i, label, j

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "labels": list(self.labels),
            "vertices": list(self.vertices),
            "targets": [list(row) for row in self.targets],
        }


def schreier_orbit(
    generators: Sequence[PrefixExchange],
    w: Word,
    level: int,
    *,
    labels: Sequence[str] | None = None,
    bound: int = 1 << 20,
) -> SchreierGraph:
    """Breadth-first orbit closure with one labeled edge per generator.

    The word length must equal the level and resolve every generator
    rule met along the walk; widen the level when a rule is finer.
    """
    check_word(w)
    if len(w) != level:
        raise DyadicError(f"need a basepoint of length {level}")
    gens = tuple(generators)
    if labels is None:
        labels = tuple(f"g{i + 1}" for i in range(len(gens)))
    else:
        labels = tuple(labels)
    if len(labels) != len(gens):
        raise DyadicError("need one label per generator")
    inverses = [g.inverse() for g in gens]

    order: dict[Word, int] = {w: 0}
    vertices = [w]
    head = 0
    while head < len(vertices):
        v = vertices[head]
        head += 1
        for g in gens:
            image = g.apply_word(v)
            if image not in order:
                order[image] = len(vertices)
                vertices.append(image)
        for g in inverses:
            image = g.apply_word(v)
            if image not in order:
                order[image] = len(vertices)
                vertices.append(image)
        if len(vertices) > bound:
            raise OrbitTooLarge(
                f"orbit of {w!r} exceeded {bound} vertices"
            )
    targets = tuple(
        tuple(order[g.apply_word(v)] for v in vertices) for g in gens
    )
    return SchreierGraph(level, labels, tuple(vertices), targets)


def t_interval(
    graph: SchreierGraph, start: Word, length: int, label: str = "T"
) -> tuple[Word, ...]:
    """Walk length vertices along one label starting at a word."""
    if length < 1:
        raise DyadicError("need a positive interval length")
    if label not in graph.labels:
        raise DyadicError(f"no label {label!r} in this graph")
    row = graph.targets[graph.labels.index(label)]
    idx = graph.index(start)
    out = [start]
    for _ in range(length - 1):
        idx = row[idx]
        word = graph.vertices[idx]
        if word in out:
            raise DyadicError("interval wraps around its orbit")
        out.append(word)
    return tuple(out)


# -- boundary ratios


@dataclass(frozen=True)
class FolnerRow:
    """Exact boundary ratios of one candidate vertex set."""

    index: int
    size: int
    ratios: tuple[tuple[str, Fraction], ...]
    max_ratio: Fraction
    flagged: bool

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "size": self.size,
            "ratios": {
                label: [r.numerator, r.denominator]
                for label, r in self.ratios
            },
            "max_ratio": [
                self.max_ratio.numerator,
                self.max_ratio.denominator,
            ],
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class FolnerReport:
    """Ratio table for a family of candidate sets."""

    rows: tuple[FolnerRow, ...]
    bound: Fraction

    def to_json(self) -> dict:
        return {
            "bound": [self.bound.numerator, self.bound.denominator],
            "rows": [row.to_json() for row in self.rows],
        }


def folner_witness(
    graph: SchreierGraph,
    candidates: Sequence[Sequence[Word]],
    *,
    bound: Fraction | int = 0,
) -> FolnerReport:
    """Exact |gF symdiff F| / |F| per label, per candidate.

    A candidate is flagged when its worst ratio stays within 2/|F|
    plus the bound, the boundary a label-interval inside a path shows.
    """
    bound = Fraction(bound)
    rows = []
    for index, candidate in enumerate(candidates):
        words = list(candidate)
        if not words:
            raise DyadicError(f"candidate {index} is empty")
        indices = {graph.index(w) for w in words}
        if len(indices) != len(words):
            raise DyadicError(f"candidate {index} repeats a vertex")
        size = len(indices)
        ratios = []
        worst = Fraction(0)
        for label, row in zip(graph.labels, graph.targets):
            image = {row[i] for i in indices}
            ratio = Fraction(len(image ^ indices), size)
            ratios.append((label, ratio))
            worst = max(worst, ratio)
        flagged = worst <= Fraction(2, size) + bound
        rows.append(FolnerRow(index, size, tuple(ratios), worst, flagged))
    return FolnerReport(tuple(rows), bound)


# -- stabilizer signatures


@dataclass(frozen=True)
class StabilizerSignature:
    """Short relations of the word action at one basepoint.

    Words are reduced letter tuples over the generator alphabet; the
    set always contains the empty word and is closed under inverses
    within the radius.
    """

    basepoint: Word
    level: int
    radius: int
    words: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "words", tuple(tuple(w) for w in self.words)
        )
        have = set(self.words)
        if () not in have:
            raise DyadicError("a signature must contain the empty word")
        for w in have:
            if tuple(-x for x in reversed(w)) not in have:
                raise DyadicError("a signature must close under inverses")

    def to_json(self) -> dict:
        return {
            "basepoint": self.basepoint,
            "level": self.level,
            "radius": self.radius,
            "words": [list(w) for w in self.words],
        }


def stabilizer_signature(
    generators: Sequence[PrefixExchange],
    w: Word,
    radius: int,
    level: int,
) -> StabilizerSignature:
    """All reduced words up to the radius fixing the basepoint."""
    check_word(w)
    if len(w) != level:
        raise DyadicError(f"need a basepoint of length {level}")
    if radius < 0:
        raise DyadicError("radius must be nonnegative")
    gens = tuple(generators)
    inverses = [g.inverse() for g in gens]
    fixed: list[tuple[int, ...]] = [()]
    for word in reduced_words(len(gens), radius):
        x = w
        for letter in reversed(word):
            if letter > 0:
                x = gens[letter - 1].apply_word(x)
            else:
                x = inverses[-letter - 1].apply_word(x)
        if x == w:
            fixed.append(word)
    return StabilizerSignature(w, level, radius, tuple(fixed))
