"""Slow reference belief filter used to cross-check the vectorized one.

Works on plain dicts keyed by ``(level, q1_plus, q2_plus, q1_minus,
q2_minus)`` and recomputes everything from first principles.  The only
package code it reuses is the single-round prediction table, which is
itself pinned exhaustively by literal values in test_game.py.  In
particular the level pairing is derived here from that table rather than
imported, so a bookkeeping bug in the package partitions cannot hide.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from pennymatch.game import RoundDecisions, level_prediction

LEVELS = (0, 1, 2, 3)


def level_pairs(prev: RoundDecisions, prev_result: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Group the four levels by predicted action, pair containing level 0 first.

    After any round exactly two distinct predictions exist, so this always
    yields two pairs.  Which levels share a prediction depends only on
    whether the previous round was a match, hence the prev_result argument
    is used purely as a cross-check.
    """
    won = prev.u1 == prev.u2
    if (prev_result > 0) != won:
        raise AssertionError("result inconsistent with decisions")
    by_action: dict[int, list[int]] = {}
    for lvl in LEVELS:
        by_action.setdefault(level_prediction(1, lvl, prev), []).append(lvl)
    pairs = sorted(by_action.values(), key=lambda p: 0 not in p)
    assert len(pairs) == 2 and all(len(p) == 2 for p in pairs)
    return tuple(tuple(p) for p in pairs)  # type: ignore[return-value]


def dense_prior(grid: tuple[float, ...]) -> dict[tuple, float]:
    count = len(LEVELS) * len(grid) ** 4
    return {
        (lvl,) + qs: 1.0 / count
        for lvl in LEVELS
        for qs in itertools.product(grid, repeat=4)
    }


def dense_update(
    atoms: dict[tuple, float],
    prev: RoundDecisions,
    prev_result: int,
    observed: int,
    theta: float,
) -> dict[tuple, float]:
    """One filtering step: level transition, then condition on the observed move.

    The stay probability of the pair containing level 0 is q1 and of the
    other pair q2, with the plus parameters applying after the first
    player won and the minus parameters after a loss.  Mass leaving a pair
    lands in the other pair split in proportion to the prior masses there
    (an even split when both are zero).
    """
    won = prev_result > 0
    pairs = level_pairs(prev, prev_result)
    compliance = 1.0 / (1.0 + math.exp(-2.0 * theta))

    out = {key: 0.0 for key in atoms}
    for (lvl, *qs), mass in atoms.items():
        if mass == 0.0:
            continue
        q1_plus, q2_plus, q1_minus, q2_minus = qs
        side = 0 if lvl in pairs[0] else 1
        if won:
            stay = q1_plus if side == 0 else q2_plus
        else:
            stay = q1_minus if side == 0 else q2_minus
        for dest, weight in ((side, stay), (1 - side, 1.0 - stay)):
            a, b = pairs[dest]
            prior_a = atoms[(a, *qs)]
            prior_b = atoms[(b, *qs)]
            pair_total = prior_a + prior_b
            share_a = prior_a / pair_total if pair_total > 0 else 0.5
            share_b = prior_b / pair_total if pair_total > 0 else 0.5
            out[(a, *qs)] += mass * weight * share_a
            out[(b, *qs)] += mass * weight * share_b

    norm = 0.0
    for (lvl, *qs) in out:
        prescribed = level_prediction(1, lvl, prev)
        likelihood = compliance if observed == prescribed else 1.0 - compliance
        out[(lvl, *qs)] *= likelihood
        norm += out[(lvl, *qs)]
    assert norm > 0.0
    return {key: value / norm for key, value in out.items()}


def as_matrix(atoms: dict[tuple, float], grid: tuple[float, ...]) -> np.ndarray:
    """Dense dict rendered in the package's (level, atom) array layout."""
    combos = list(itertools.product(grid, repeat=4))
    matrix = np.empty((len(LEVELS), len(combos)))
    for lvl in LEVELS:
        for column, qs in enumerate(combos):
            matrix[lvl, column] = atoms[(lvl,) + qs]
    return matrix
