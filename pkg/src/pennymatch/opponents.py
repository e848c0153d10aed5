"""Opponents for the human seat.

``FakeHuman`` is the generative opponent that follows the level model
exactly: it keeps true (typically off-grid) stay probabilities, moves its
reasoning level between groups based on round results, and complies with
its level's prescription through the softmax rule.  ``ReplayOpponent``
plays back a recorded move list verbatim for regression tests and
analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .belief import TransitionParams
from .game import (
    LEVEL_CLASSES,
    RoundDecisions,
    complement,
    level_groups,
    level_prediction,
    softmax_compliance,
)
from .strategies import RandomSource


class ReplayExhaustedError(IndexError):
    """A replay opponent ran out of recorded moves."""


@dataclass(frozen=True)
class FakeHuman:
    """Model-conformant opponent state.

    ``level`` is the current reasoning-level class, ``params`` the true
    group-stay probabilities (free reals in [0, 1]), ``theta`` the softmax
    compliance weight.
    """

    level: int
    params: TransitionParams
    theta: float

    def __post_init__(self) -> None:
        if self.level not in LEVEL_CLASSES:
            raise ValueError(f"level class must be one of {LEVEL_CLASSES}, got {self.level!r}")
        for name, value in zip(TransitionParams._fields, self.params):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")


def sample_fake_human(rng: RandomSource, theta: float) -> FakeHuman:
    """Draw stay probabilities uniformly on [0, 1] and a uniform start level."""
    params = TransitionParams(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform())
    return FakeHuman(level=rng.pick(len(LEVEL_CLASSES)), params=params, theta=theta)


def fake_human_decide(fh: FakeHuman, prev: RoundDecisions, rng: RandomSource) -> int:
    """Play the level-prescribed action with the compliance probability, else flip."""
    prescribed = level_prediction(1, fh.level, prev)
    if rng.bernoulli(softmax_compliance(fh.theta)):
        return prescribed
    return complement(prescribed)


def fake_human_transition(fh: FakeHuman, prev_result_p1: int, rng: RandomSource) -> FakeHuman:
    """Move the reasoning level between groups based on the round result.

    The level stays in its current group with that group's stay probability
    for the result branch, otherwise switches; the realized class is drawn
    uniformly inside the destination pair.  (The two classes of a pair act
    identically on the following round, so the uniform draw only matters
    once the partition changes again.)
    """
    partition = level_groups(prev_result_p1)
    in_group1 = fh.level in partition.group1
    if partition.branch == "win":
        stay = fh.params.q1_plus if in_group1 else fh.params.q2_plus
    else:
        stay = fh.params.q1_minus if in_group1 else fh.params.q2_minus
    current = partition.group1 if in_group1 else partition.group2
    other = partition.group2 if in_group1 else partition.group1
    destination = sorted(current if rng.bernoulli(stay) else other)
    return replace(fh, level=destination[rng.bernoulli(0.5)])


@dataclass(frozen=True)
class ReplayOpponent:
    """Plays back a fixed move list verbatim."""

    moves: tuple[int, ...]

    def __post_init__(self) -> None:
        moves = tuple(self.moves)
        for move in moves:
            if move not in (0, 1):
                raise ValueError(f"replay moves must be 0 or 1, got {move!r}")
        object.__setattr__(self, "moves", moves)


def replay_decide(opponent: ReplayOpponent, round_index: int) -> int:
    """Recorded move for ``round_index``; raises once the recording runs out."""
    if not 0 <= round_index < len(opponent.moves):
        raise ReplayExhaustedError(
            f"replay holds {len(opponent.moves)} moves, round {round_index} requested"
        )
    return opponent.moves[round_index]
