"""Opponent-modeling AI for repeated penny matching.

The package predicts a human opponent's next move from an iterated-
reasoning model, tracks a Bayesian belief over the opponent's reasoning
level and switching behavior, and turns the prediction into a decision
policy.  It ships a simulation arena, a live-play HTTP service, and a
command-line interface.
"""

from .arena import (
    ExperimentSummary,
    MatchConfig,
    RoundRecord,
    Transcript,
    TranscriptParseError,
    cumulative_payoff,
    export_transcripts,
    format_transcript,
    import_transcripts,
    parse_transcripts,
    play_match,
    run_experiment,
    run_matches,
    summarize,
)
from .belief import (
    DEFAULT_Q_GRID,
    BeliefInvariantError,
    BeliefState,
    GroupProbability,
    TransitionParams,
    atom_table,
    point_mass,
    predict_group_probability,
    reconstruct_levels,
    uniform_prior,
    update_belief,
    validate_grid,
)
from .game import (
    DEFAULT_THETA,
    LEVEL_CLASSES,
    LOSE_PARTITION,
    WIN_PARTITION,
    GroupPartition,
    RoundDecisions,
    complement,
    group_action,
    level_groups,
    level_prediction,
    payoff,
    softmax_compliance,
)
from .opponents import (
    FakeHuman,
    ReplayExhaustedError,
    ReplayOpponent,
    fake_human_decide,
    fake_human_transition,
    replay_decide,
    sample_fake_human,
)
from .service import SessionStore, build_app
from .strategies import (
    STRATEGY_KINDS,
    RandomSource,
    StrategySeat,
    ai_repeat_probability,
    first_round_decide,
    nash_decide,
    proposed_decide,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefInvariantError",
    "BeliefState",
    "DEFAULT_Q_GRID",
    "DEFAULT_THETA",
    "ExperimentSummary",
    "FakeHuman",
    "GroupPartition",
    "GroupProbability",
    "LEVEL_CLASSES",
    "LOSE_PARTITION",
    "MatchConfig",
    "RandomSource",
    "ReplayExhaustedError",
    "ReplayOpponent",
    "RoundDecisions",
    "RoundRecord",
    "STRATEGY_KINDS",
    "SessionStore",
    "StrategySeat",
    "Transcript",
    "TranscriptParseError",
    "TransitionParams",
    "WIN_PARTITION",
    "ai_repeat_probability",
    "atom_table",
    "build_app",
    "complement",
    "cumulative_payoff",
    "export_transcripts",
    "fake_human_decide",
    "fake_human_transition",
    "first_round_decide",
    "format_transcript",
    "group_action",
    "import_transcripts",
    "level_groups",
    "level_prediction",
    "nash_decide",
    "parse_transcripts",
    "payoff",
    "play_match",
    "point_mass",
    "predict_group_probability",
    "proposed_decide",
    "reconstruct_levels",
    "replay_decide",
    "run_experiment",
    "run_matches",
    "sample_fake_human",
    "softmax_compliance",
    "summarize",
    "uniform_prior",
    "update_belief",
    "validate_grid",
]
