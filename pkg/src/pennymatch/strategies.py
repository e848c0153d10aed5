"""Decision policies for the AI seat.

Two strategies are shipped: the belief-driven policy, which predicts the
level group the opponent will reason in next and leans against the
corresponding action, and the equal-coin baseline, which can neither be
exploited nor exploit.  Every random draw flows through an explicit seeded
stream so a game is replayable bit for bit.
"""

from __future__ import annotations

import numpy as np

from .belief import (
    DEFAULT_Q_GRID,
    BeliefState,
    predict_group_probability,
    uniform_prior,
    update_belief,
)
from .game import DEFAULT_THETA, RoundDecisions, complement, softmax_compliance

STRATEGY_KINDS = ("proposed", "nash")


class RandomSource:
    """Deterministic random stream.

    The same ``(seed, stream)`` pair reproduces the same draw sequence on
    any platform.  ``draws`` counts consumed values so tests can audit draw
    accounting.
    """

    def __init__(self, seed: int, stream: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit non-negative integer, got {seed!r}")
        self.seed = seed
        self.stream = int(stream)
        self.draws = 0
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    def uniform(self) -> float:
        """Next float in [0, 1)."""
        self.draws += 1
        return float(self._gen.random())

    def bernoulli(self, p: float) -> int:
        """1 with probability ``p`` else 0; consumes exactly one draw."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {p!r}")
        return 1 if self.uniform() < p else 0

    def coin(self) -> int:
        """Fair 0/1 draw."""
        return self.bernoulli(0.5)

    def pick(self, count: int) -> int:
        """Uniform index in ``range(count)``; consumes exactly one draw."""
        if count <= 0:
            raise ValueError(f"count must be positive, got {count!r}")
        return min(int(self.uniform() * count), count - 1)

    def state(self) -> dict:
        """Snapshot of the underlying generator state (persistence checks)."""
        return self._gen.bit_generator.state


def ai_repeat_probability(p_group1: float, theta: float = DEFAULT_THETA) -> float:
    """Probability that the AI replays its own previous side.

    Affine and decreasing in the predicted group-1 probability: group 1
    levels chase the AI's previous side, so the more likely they are, the
    more the AI moves away from it.  The endpoints are the softmax
    compliance weight (at 0) and its complement (at 1), and a fully
    uncertain prediction of 0.5 yields a fair coin.
    """
    if not 0.0 <= p_group1 <= 1.0:
        raise ValueError(f"p_group1 must be in [0, 1], got {p_group1!r}")
    compliance = softmax_compliance(theta)
    return compliance - (2.0 * compliance - 1.0) * p_group1


def first_round_decide(rng: RandomSource) -> int:
    """Opening move with no history: fair coin."""
    return rng.coin()


def nash_decide(rng: RandomSource) -> int:
    """Equal-probability side regardless of history."""
    return rng.coin()


def proposed_decide(
    belief: BeliefState,
    prev: RoundDecisions,
    prev_result_p1: int,
    theta: float,
    rng: RandomSource,
) -> int:
    """Belief-driven move for every round after the first.

    Predicts the opponent's level group for the coming round, converts it
    into a repeat-or-flip probability over the AI's own previous side, and
    consumes exactly one random draw.
    """
    if prev is None:
        raise ValueError("no previous round; use first_round_decide for the opener")
    group = predict_group_probability(belief, prev_result_p1)
    repeat = ai_repeat_probability(group.p_group1, theta)
    if rng.bernoulli(repeat):
        return prev.u2
    return complement(prev.u2)


class StrategySeat:
    """Stateful AI seat for one game: strategy kind, rng stream, carried belief.

    The seat decides before seeing the opponent's current move and folds
    the observation in afterwards, so a decision never depends on the move
    it is played against.
    """

    def __init__(
        self,
        kind: str,
        rng: RandomSource,
        *,
        theta: float = DEFAULT_THETA,
        grid=DEFAULT_Q_GRID,
    ):
        if kind not in STRATEGY_KINDS:
            raise ValueError(f"strategy must be one of {STRATEGY_KINDS}, got {kind!r}")
        self.kind = kind
        self.theta = float(theta)
        self.rng = rng
        self.belief: BeliefState | None = (
            uniform_prior(grid) if kind == "proposed" else None
        )

    def move(self, prev: RoundDecisions | None, prev_result_p1: int | None) -> int:
        """Decide the current round; ``prev is None`` marks the opener."""
        if prev is None:
            return first_round_decide(self.rng)
        if self.kind == "nash":
            return nash_decide(self.rng)
        assert self.belief is not None
        return proposed_decide(self.belief, prev, prev_result_p1, self.theta, self.rng)

    def observe(
        self,
        prev: RoundDecisions | None,
        prev_result_p1: int | None,
        observed_u1: int,
    ) -> None:
        """Fold in the opponent's move once a round resolves.

        ``prev`` is the round before the observed one; with no such round
        (the opener) there is nothing to branch on yet and the belief keeps
        its prior.
        """
        if self.kind != "proposed" or prev is None:
            return
        assert self.belief is not None
        self.belief = update_belief(
            self.belief, prev, prev_result_p1, observed_u1, self.theta
        )
