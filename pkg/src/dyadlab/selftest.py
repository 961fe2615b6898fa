"""Acceptance criteria as callable checks with deterministic certificates.

Each criterion function returns one JSON-ready row: a name, the case
count, the failure count, and a detail payload holding only exact
values (dyadics and fractions as strings, never floats) so repeated
runs with the same seed serialize to identical bytes.  The test suite
and the command line self-test share these functions.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

from . import __version__
from .assembly import PipelineConfig, folner_witness, run_pipeline, schreier_orbit, t_interval
from .commuting import FactorSpec, random_cycle_factor, reconstruct_all
from .density import (
    assemble_U,
    closure_size,
    perm_to_exchange,
    plan_sequences,
    sigma_perm,
    synthesize_word,
    tau_perm,
)
from .dyadic import Dyadic, DyadicError, DyadicSet, dset
from .faithful import (
    LabeledMap,
    TranslateFamily,
    fp_evaluate,
    fp_label,
    power_family,
    quarter_shrink,
)
from .rfactions import action_sequence, freeness_certificate, translation_action
from .transform import PrefixExchange, binary_root, finite_odometer
from .faithful import free_product_tower

_WORD_BITS = "01"


def _row(criterion: int, name: str, cases: int, failures: int, detail: dict) -> dict:
    return {
        "criterion": criterion,
        "name": name,
        "cases": cases,
        "failures": failures,
        "status": "pass" if failures == 0 else "fail",
        "detail": detail,
    }


def _cell(value: int, level: int) -> DyadicSet:
    word = "".join(_WORD_BITS[(value >> i) & 1] for i in range(level))
    return dset(word)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# -- criterion 1: midpoint supports


def criterion_support(quick: bool) -> dict:
    """Support of the level-n midpoint transposition is 2^{-n+1}."""
    from .transform import midpoint_transposition

    top = 5 if quick else 8
    failures = 0
    measures = {}
    for n in range(2, top + 1):
        u = midpoint_transposition(n)
        measure = u.support().measure()
        measures[str(n)] = str(measure)
        expected = dset("0" * (n - 1) + "1", "1" * (n - 1) + "0")
        if measure != Dyadic.pow2(n - 1) or u.support() != expected:
            failures += 1
    return _row(1, "support-identity", top - 1, failures, {"measures": measures})


# -- criterion 2: binary roots of random permutations


def criterion_roots(quick: bool, seed: int) -> dict:
    """Roots power back exactly, keep supports, and double involutions."""
    rng = random.Random(seed * 1009 + 2)
    trials = 20 if quick else 200
    failures = 0
    involutions = 0
    checks = 0
    for trial in range(trials):
        q = 2 + trial % 3
        perm = list(range(1 << q))
        rng.shuffle(perm)
        u = perm_to_exchange(tuple(perm), q)
        involution = not u.is_identity() and u.power(2).is_identity()
        if involution:
            involutions += 1
        for p in range(1, 5):
            root = binary_root(u, p)
            checks += 1
            if root.power(1 << p) != u:
                failures += 1
            if root.support() != u.support():
                failures += 1
            if involution and not root.power(1 << (p + 1)).is_identity():
                failures += 1
    detail = {"trials": trials, "involutions": involutions, "checks": checks}
    return _row(2, "root-laws", checks, failures, detail)


# -- criterion 3: closure of the two basic permutations


def criterion_generation(quick: bool) -> dict:
    """The rotation and the top swap generate all prefix permutations."""
    levels = (2,) if quick else (2, 3)
    expected = {2: 24, 3: 40320}
    failures = 0
    sizes = {}
    for n in levels:
        size = closure_size([sigma_perm(n), tau_perm(n)])
        sizes[str(n)] = size
        if size != expected[n] or size != math.factorial(1 << n):
            failures += 1
    return _row(3, "generation", len(levels), failures, {"closure_sizes": sizes})


# -- criteria 4 and 5 share the canonical two-factor plan


def _canonical_plan():
    plan = plan_sequences(Dyadic.make(1, 0), 2, 7)
    u, ledger = assemble_U(plan)
    return plan, u, ledger


def criterion_kappa_ledger(quick: bool) -> dict:
    """Two-factor ledger bounds hold exactly at level 7."""
    plan, u, ledger = _canonical_plan()
    failures = 0
    if not ledger.ok:
        failures += 1
    for row in ledger.rows:
        if not row.passed:
            failures += 1
        if not row.exact.as_fraction() <= row.bound:
            failures += 1
    if not ledger.support_measure < plan.epsilon:
        failures += 1
    detail = {
        "kappa": {str(n): plan.kappa(n) for n in plan.n_seq},
        "levels": list(plan.n_seq),
        "support": str(ledger.support_measure),
        "epsilon": str(plan.epsilon),
        "rows": [
            {
                "k": row.k,
                "exact": str(row.exact),
                "bound": _frac(row.bound),
                "slack": str(row.slack),
            }
            for row in ledger.rows
        ],
    }
    return _row(4, "word-ledger", len(ledger.rows) + 1, failures, detail)


def criterion_synthesis(quick: bool) -> dict:
    """Every level-2 permutation is synthesized within its budget."""
    plan, u, _ = _canonical_plan()
    perms = list(itertools.permutations(range(4)))
    if quick:
        perms = perms[:8]
    failures = 0
    worst = Dyadic.make(0, 0)
    letters = 0
    for perm in perms:
        target = perm_to_exchange(perm, 2)
        try:
            result = synthesize_word(target, plan, u, 0)
        except DyadicError:
            failures += 1
            continue
        if not result.achieved.as_fraction() < result.budget:
            failures += 1
        if worst < result.achieved:
            worst = result.achieved
        letters = max(letters, len(result.letters))
    detail = {
        "targets": len(perms),
        "worst_distance": str(worst),
        "longest_word": letters,
    }
    return _row(5, "word-synthesis", len(perms), failures, detail)


# -- criterion 6: commuting reconstruction


def criterion_commuting(quick: bool, seed: int) -> dict:
    """Seeded disjoint factors are recovered exactly from their product."""
    rng = random.Random(seed * 1009 + 6)
    trials = 10 if quick else 100
    bases = (2, 3, 5)
    regions = (dset("00"), dset("01"), dset("1"))
    failures = 0
    for _ in range(trials):
        specs = [
            random_cycle_factor(rng, region, base, 8)
            for region, base in zip(regions, bases)
        ]
        recovered = reconstruct_all(specs)
        for spec, image in zip(specs, recovered):
            if image != spec.map:
                failures += 1
    detail = {"trials": trials, "bases": list(bases), "level": 8}
    return _row(6, "commuting-recovery", trials * len(bases), failures, detail)


# -- criterion 7: residual q-finiteness


def _perm_order(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    order = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        idx = start
        while not seen[idx]:
            seen[idx] = True
            idx = perm[idx]
            length += 1
        order = math.lcm(order, length)
    return order


def criterion_residual(quick: bool) -> dict:
    """Short free words separate over the 3-element field; orders are 3-powers."""
    max_word = 4 if quick else 6
    records = freeness_certificate(3, 2, max_word, 6)
    failures = 0
    histogram: dict[str, int] = {}
    for _, depth in records:
        if depth is None or depth > 6:
            failures += 1
        else:
            histogram[str(depth)] = histogram.get(str(depth), 0) + 1
    depths = (1, 2) if quick else (1, 2, 3)
    orders = []
    for d in depths:
        action = translation_action(3, 2, d)
        for perm in action.generator_perms:
            order = _perm_order(perm)
            orders.append(order)
            reduced = order
            while reduced % 3 == 0:
                reduced //= 3
            if reduced != 1:
                failures += 1
    detail = {
        "words": len(records),
        "separation_depths": histogram,
        "generator_orders": orders,
    }
    return _row(7, "residual-finiteness", len(records) + len(orders), failures, detail)


# -- criterion 8: faithfulness families


def criterion_faithful(quick: bool) -> dict:
    """Quarter shrinking and off-support perturbation keep the witness."""
    failures = 0
    t21 = finite_odometer(21)
    words = power_family(t21, 3)
    b_seq = (_cell(8, 4), _cell(100, 13), _cell(1000, 21))
    family = quarter_shrink(b_seq, (words, words, words))
    translates = []
    for n in range(len(b_seq)):
        for image in family.translates(n):
            if image.measure().is_zero():
                failures += 1
            for earlier in translates:
                if not image.is_disjoint(earlier):
                    failures += 1
            translates.append(image)

    t4 = finite_odometer(4)
    tower = free_product_tower(
        t4,
        action_sequence(3, 1, (1, 2, 3)),
        [dset("0000"), dset("1100")],
    )
    probe = PrefixExchange((("0111", "1111"), ("1111", "0111")))
    for g in tower.generators:
        if not probe.support().is_disjoint(g.support()):
            failures += 1
    perturbed = [g.compose(probe) for g in tower.generators]
    base_family = tower.certificate.family
    matched = 0
    for n, stage in enumerate(tower.stage_words):
        seed_set = base_family.a_seq[n]
        for word, member in zip(stage, base_family.f_seq[n]):
            redone = fp_evaluate(t4, perturbed, word).apply_set(seed_set)
            if redone != member.map.apply_set(seed_set):
                failures += 1
            else:
                matched += 1
    try:
        TranslateFamily(
            tuple(
                tuple(
                    LabeledMap(fp_label(w), fp_evaluate(t4, perturbed, w))
                    for w in stage
                )
                for stage in tower.stage_words
            ),
            base_family.a_seq,
        )
    except DyadicError:
        failures += 1
    detail = {
        "shrink_translates": len(translates),
        "shrunk_measures": [str(a.measure()) for a in family.a_seq],
        "perturbed_translates": matched,
    }
    return _row(8, "faithful-family", len(translates) + matched + 1, failures, detail)


# -- criterion 9: the end-to-end pipeline


def pipeline_config(quick: bool) -> PipelineConfig:
    if quick:
        return PipelineConfig(level=10, factors=1, tower_depth=0)
    return PipelineConfig(m=1, p=5, q=3, level=14, factors=2)


def criterion_pipeline(quick: bool) -> dict:
    """The assembled generators pass every certificate and orbit claim."""
    failures = 0
    try:
        result = run_pipeline(pipeline_config(quick))
    except DyadicError as exc:
        return _row(9, "pipeline", 1, 1, {"error": str(exc)})

    if not result.budget.passed:
        failures += 1
    if not all(ok for _, _, ok in result.disjointness):
        failures += 1
    if not all(row.exact for row in result.recovery):
        failures += 1
    if not result.hf.ok:
        failures += 1

    stages = []
    graph = None
    for n in range(result.config.tower_depth + 1):
        w = result.basepoint(n)
        if graph is None or w not in graph.vertices:
            graph = schreier_orbit(
                result.generators,
                w,
                result.schreier_level,
                labels=result.labels,
                bound=result.config.orbit_bound,
            )
        interval = t_interval(graph, w, 2 * n + 1, "T")
        loops_ok = True
        for word in interval:
            idx = graph.index(word)
            for label, row in zip(graph.labels, graph.targets):
                if label != "T" and row[idx] != idx:
                    loops_ok = False
        if not loops_ok:
            failures += 1
        report = folner_witness(graph, [interval])
        ratios = dict(report.rows[0].ratios)
        if ratios["T"] != Fraction(2, 2 * n + 1):
            failures += 1
        if any(r != 0 for label, r in ratios.items() if label != "T"):
            failures += 1
        if not report.rows[0].flagged:
            failures += 1
        stages.append(
            {
                "n": n,
                "orbit": len(graph.vertices),
                "interval": list(interval),
                "t_ratio": _frac(ratios["T"]),
            }
        )
    detail = {
        "budget": str(result.budget.measure),
        "gate": _frac(result.budget.bound),
        "support_u": str(result.u.support().measure()),
        "relaxed": result.relaxed,
        "orbit_level": result.schreier_level,
        "stages": stages,
    }
    cases = 4 + 4 * (result.config.tower_depth + 1)
    return _row(9, "pipeline", cases, failures, detail)


# -- criterion 10: determinism probe


def _determinism_core(seed: int) -> dict:
    plan, _, ledger = _canonical_plan()
    rng = random.Random(seed * 1009 + 10)
    spec = random_cycle_factor(rng, dset("0"), 3, 6)
    return {
        "plan": plan.to_json(),
        "ledger": ledger.to_json(),
        "factor": spec.map.to_json(),
    }


def criterion_determinism(quick: bool, seed: int) -> dict:
    """The seeded core serializes to identical bytes on repeat runs."""
    import json

    first = json.dumps(_determinism_core(seed), sort_keys=True)
    second = json.dumps(_determinism_core(seed), sort_keys=True)
    failures = 0 if first == second else 1
    import hashlib

    digest = hashlib.sha256(first.encode()).hexdigest()
    return _row(10, "determinism", 1, failures, {"core_digest": digest})


# -- the full certificate


CRITERIA = (
    ("support-identity", lambda quick, seed: criterion_support(quick)),
    ("root-laws", lambda quick, seed: criterion_roots(quick, seed)),
    ("generation", lambda quick, seed: criterion_generation(quick)),
    ("word-ledger", lambda quick, seed: criterion_kappa_ledger(quick)),
    ("word-synthesis", lambda quick, seed: criterion_synthesis(quick)),
    ("commuting-recovery", lambda quick, seed: criterion_commuting(quick, seed)),
    ("residual-finiteness", lambda quick, seed: criterion_residual(quick)),
    ("faithful-family", lambda quick, seed: criterion_faithful(quick)),
    ("pipeline", lambda quick, seed: criterion_pipeline(quick)),
    ("determinism", lambda quick, seed: criterion_determinism(quick, seed)),
)


def selftest_certificate(quick: bool, seed: int = 0) -> dict:
    """Run every criterion and bundle the rows; no timestamps inside."""
    rows = [run(quick, seed) for _, run in CRITERIA]
    return {
        "certificate": "acceptance",
        "version": __version__,
        "quick": quick,
        "seed": seed,
        "criteria": rows,
        "all_passed": all(row["status"] == "pass" for row in rows),
    }


def summary_table(certificate: dict) -> list[str]:
    lines = ["criterion  name                  cases  failures  status"]
    for row in certificate["criteria"]:
        lines.append(
            f"{row['criterion']:>9}  {row['name']:<20}  {row['cases']:>5}"
            f"  {row['failures']:>8}  {row['status']}"
        )
    lines.append(
        "all passed" if certificate["all_passed"] else "FAILURES PRESENT"
    )
    return lines
