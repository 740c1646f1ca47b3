"""Core stability for committee selection: verification, stable lotteries and rounding."""

from corestable.errors import (
    ConvergenceError,
    CoreStableError,
    DegenerateAttackerError,
    DegenerateBlockerError,
    InfeasibleCommitteeError,
    InstanceTooLargeError,
    InvalidCommitteeError,
    InvalidInstanceError,
    InvalidLotteryError,
    TheoremViolationError,
    UnsupportedCommitteeError,
)
from corestable.generators import gen_cyclic, gen_random, gen_ranking_grid, grid_candidate
from corestable.lottery import (
    FractionalVector,
    GameSolution,
    MWUResult,
    defender_response,
    dependent_round,
    exact_game,
    mwu_lottery,
    mwu_solve,
)
from corestable.model import (
    AdditiveWeights,
    Instance,
    Lottery,
    MultiWeights,
    as_committee,
    committee_weight,
    committees_up_to,
    feasible_committees,
    instance_from_dict,
    load_instance,
    dump_instance,
    make_instance,
    validate_instance,
)
from corestable.preferences import (
    ApprovalModel,
    BudgetModel,
    FacilityModel,
    OracleModel,
    Ordering,
    RankingModel,
    check_monotonicity,
    compare,
    strictly_prefers,
    weakly_prefers,
)
from corestable.rounding import ExactProvider, MWUProvider, RoundingParams, iterated_rounding
from corestable.smallk import (
    SplitAttack,
    attack_success_rates,
    k3_defender,
    same_size_defender,
    verify_exact_small_k,
)
from corestable.stability import (
    StabilityReport,
    blocking_ratio,
    find_worst_blocker,
    lottery_score,
    min_deterministic_c,
    pairwise_score,
    verify_committee,
    verify_lottery,
)

__version__ = "0.1.0"
