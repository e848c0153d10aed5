"""Rules of the repeated penny-matching game.

Two players simultaneously pick one of two sides (0 = left, 1 = right).
Player 1 earns a point when the choices match, player 2 earns a point when
they differ.  Played repeatedly, anyone who reacts to the previous round in
a predictable way can be exploited, and this module captures exactly that
structure:

* the zero-sum payoff rule,
* the iterated-reasoning prediction table (what a player who thinks k
  steps deep will do next, given the previous round),
* the result-dependent pairing of reasoning levels that are
  indistinguishable from their next action alone,
* the compliance probability of the softmax choice rule used to model
  imperfect play.

Reasoning depth only matters modulo 4 here, so a level is always
represented by its class ``0..3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

LEFT = 0
RIGHT = 1

LEVEL_CLASSES = (0, 1, 2, 3)

DEFAULT_THETA = 1.5

Branch = Literal["win", "lose"]


class RoundDecisions(NamedTuple):
    """One round's pair of choices: ``u1`` for player 1, ``u2`` for player 2."""

    u1: int
    u2: int


@dataclass(frozen=True)
class GroupPartition:
    """Pairing of level classes whose next actions coincide, given who won.

    ``group1`` always contains class 0.  Within either group the two level
    classes prescribe the same next action, and the two groups prescribe
    complementary actions, so a single observed move can reveal the group
    but never the exact class.  ``branch`` names the previous-round result
    (for player 1) that makes the pairing valid.
    """

    group1: frozenset[int]
    group2: frozenset[int]
    branch: Branch


WIN_PARTITION = GroupPartition(frozenset({0, 3}), frozenset({1, 2}), "win")
LOSE_PARTITION = GroupPartition(frozenset({0, 1}), frozenset({2, 3}), "lose")


def checked_decision(value: int) -> int:
    """Validate a binary decision and hand it back."""
    if value not in (LEFT, RIGHT):
        raise ValueError(f"decision must be 0 or 1, got {value!r}")
    return value


def complement(decision: int) -> int:
    """The other side: 0 <-> 1."""
    return 1 - checked_decision(decision)


def payoff(u1: int, u2: int) -> tuple[int, int]:
    """Zero-sum round payoffs; player 1 takes +1 on a match, -1 otherwise."""
    r1 = 1 - 2 * ((checked_decision(u1) + checked_decision(u2)) % 2)
    return r1, -r1


def level_prediction(player: int, level: int, prev: RoundDecisions) -> int:
    """Next decision of ``player`` reasoning at ``level``, after round ``prev``.

    A level-0 reasoner assumes the opponent repeats their previous move and
    best-responds to that; each higher level best-responds to the level
    below it.  Best responses in this game cycle with period 4, hence the
    four-entry tables.
    """
    u1, u2 = prev
    checked_decision(u1)
    checked_decision(u2)
    if level not in LEVEL_CLASSES:
        raise ValueError(f"level class must be one of {LEVEL_CLASSES}, got {level!r}")
    if player == 1:
        table = (u2, 1 - u1, 1 - u2, u1)
    elif player == 2:
        table = (1 - u1, 1 - u2, u1, u2)
    else:
        raise ValueError(f"player must be 1 or 2, got {player!r}")
    return table[level]


def level_groups(prev_result_p1: int) -> GroupPartition:
    """Partition of level classes selected by the previous result for player 1."""
    if prev_result_p1 == 1:
        return WIN_PARTITION
    if prev_result_p1 == -1:
        return LOSE_PARTITION
    raise ValueError(f"round result must be +1 or -1, got {prev_result_p1!r}")


def group_action(partition: GroupPartition, which: int, prev: RoundDecisions) -> int:
    """Shared next action of every level class in one group of ``partition``.

    ``prev`` must actually produce the partition's branch (a win partition
    needs matching previous decisions, a lose partition differing ones);
    the groups only collapse to a single action under the matching result.
    """
    won = prev.u1 == prev.u2
    if won != (partition.branch == "win"):
        raise ValueError(
            f"previous decisions {tuple(prev)} are inconsistent with a "
            f"{partition.branch} partition"
        )
    if which == 1:
        group = partition.group1
    elif which == 2:
        group = partition.group2
    else:
        raise ValueError(f"group selector must be 1 or 2, got {which!r}")
    actions = {level_prediction(1, lvl, prev) for lvl in group}
    (action,) = actions  # both classes in a branch-consistent group agree
    return action


def softmax_compliance(theta: float) -> float:
    """Probability that a softmax chooser plays its prescribed action.

    Equals e^theta / (e^theta + e^-theta); strictly between 0.5 and 1 for
    any positive theta, approaching a coin flip as theta -> 0 and perfect
    compliance as theta grows.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    return 1.0 / (1.0 + math.exp(-2.0 * theta))
