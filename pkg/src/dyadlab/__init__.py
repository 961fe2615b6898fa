"""Exact workbench for measure-preserving prefix transformations.

Everything here computes with dyadic rationals and finite prefix
rules, so every certificate in the package is an exact identity
rather than a floating-point estimate.  The math lives in the
submodules; the heavier plumbing (reports, the command line) is
imported on demand from dyadlab.report and dyadlab.cli.
"""

__version__ = "0.1.0"

from .dyadic import (
    Dyadic,
    DyadicError,
    DyadicSet,
    EMPTY,
    FULL,
    ResolutionError,
    ZERO,
    check_word,
    dset,
    pow2_above,
    pow2_below,
)
from .transform import (
    IDENTITY,
    PrefixExchange,
    binary_root,
    finite_odometer,
    midpoint_transposition,
)
from .cycles import (
    Graphing,
    PartialDyadicIso,
    PrePCycle,
    cycle_closure,
    match_equal_measure,
    split_into_subgraphings,
    validate_pre_p_cycle,
)
from .density import (
    GeneratorPlan,
    assemble_U,
    closure_size,
    generation_check,
    kappa_bfs,
    perm_to_exchange,
    plan_sequences,
    synthesize_word,
)
from .commuting import (
    FactorSpec,
    random_cycle_factor,
    reconstruct_all,
    reconstruction_exponent,
)
from .rfactions import (
    PointedFiniteAction,
    TruncatedSeries,
    action_sequence,
    freeness_certificate,
    magnus_image,
    reduced_words,
    translation_action,
)
from .faithful import (
    TranslateFamily,
    TowerResult,
    free_product_tower,
    hf_check,
    power_family,
    quarter_shrink,
)
from .assembly import (
    ConfigInfeasible,
    OrbitTooLarge,
    PipelineConfig,
    PipelineResult,
    SchreierGraph,
    StabilizerSignature,
    folner_witness,
    run_pipeline,
    schreier_orbit,
    stabilizer_signature,
    t_interval,
)

__all__ = [
    "__version__",
    "Dyadic",
    "DyadicError",
    "DyadicSet",
    "EMPTY",
    "FULL",
    "ResolutionError",
    "ZERO",
    "check_word",
    "dset",
    "pow2_above",
    "pow2_below",
    "IDENTITY",
    "PrefixExchange",
    "binary_root",
    "finite_odometer",
    "midpoint_transposition",
    "Graphing",
    "PartialDyadicIso",
    "PrePCycle",
    "cycle_closure",
    "match_equal_measure",
    "split_into_subgraphings",
    "validate_pre_p_cycle",
    "GeneratorPlan",
    "assemble_U",
    "closure_size",
    "generation_check",
    "kappa_bfs",
    "perm_to_exchange",
    "plan_sequences",
    "synthesize_word",
    "FactorSpec",
    "random_cycle_factor",
    "reconstruct_all",
    "reconstruction_exponent",
    "PointedFiniteAction",
    "TruncatedSeries",
    "action_sequence",
    "freeness_certificate",
    "magnus_image",
    "reduced_words",
    "translation_action",
    "TranslateFamily",
    "TowerResult",
    "free_product_tower",
    "hf_check",
    "power_family",
    "quarter_shrink",
    "ConfigInfeasible",
    "OrbitTooLarge",
    "PipelineConfig",
    "PipelineResult",
    "SchreierGraph",
    "StabilizerSignature",
    "folner_witness",
    "run_pipeline",
    "schreier_orbit",
    "stabilizer_signature",
    "t_interval",
]
