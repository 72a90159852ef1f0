"""Top-k certification of voting-based patch defenses from precomputed mutant votes."""
from .certifiers import (
    INFEASIBLE,
    Analyzer,
    BudgetMode,
    CertOutcome,
    conservative_rank_n,
    costcert_certify,
    costcert_mink,
    smallest_tie_cost,
    strategy1_certify,
    strategy2_bounds,
    strategy2_certify,
    strategy2_mink,
)
from .geometry import (
    AblationScheme,
    PatchRegion,
    PatchSpec,
    build_ablation_regions,
    build_patch_regions,
    compute_delta,
    overlapping_ablations,
)
from .kernels import BACKEND
from .votes import (
    LabelSpace,
    SampleVotes,
    VoteTable,
    clean_level,
    ranked_prediction,
    vote_confidence,
)

__version__ = "0.1.0"

__all__ = [
    "INFEASIBLE", "Analyzer", "BudgetMode", "CertOutcome", "conservative_rank_n",
    "costcert_certify", "costcert_mink", "smallest_tie_cost", "strategy1_certify",
    "strategy2_bounds", "strategy2_certify", "strategy2_mink",
    "AblationScheme", "PatchRegion", "PatchSpec", "build_ablation_regions",
    "build_patch_regions", "compute_delta", "overlapping_ablations",
    "BACKEND", "LabelSpace", "SampleVotes", "VoteTable", "clean_level",
    "ranked_prediction", "vote_confidence",
]
