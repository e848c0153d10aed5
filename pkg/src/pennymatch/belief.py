"""Belief tracking over an opponent's reasoning level and switching behavior.

The opponent model has a hidden state per round: the reasoning-level class
(0..3) currently in use, plus four fixed "stay" probabilities describing
how the level moves between the two indistinguishable groups after a win
and after a loss (``q1_plus``, ``q2_plus``, ``q1_minus``, ``q2_minus``).
The stay probabilities are discretized onto a finite grid, so the joint
belief is a probability table over ``4 * len(grid)**4`` atoms.

Each round supplies one observation, the opponent's actual move, whose
likelihood depends only on which group the level belongs to.  The update
therefore runs in group space: propagate group masses through the
stay/switch kernel picked by the previous result, weight each group by the
softmax emission for the observed move, normalize over the whole table,
and finally spread each group's mass back over its two level classes in
proportion to the previous belief, which is the only information available
about the split.

States are immutable values; every update returns a fresh table.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .game import (
    LEVEL_CLASSES,
    Branch,
    GroupPartition,
    RoundDecisions,
    checked_decision,
    group_action,
    level_groups,
    payoff,
    softmax_compliance,
)

DEFAULT_Q_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)

MASS_TOLERANCE = 1e-12

Q_FIELDS = ("q1_plus", "q2_plus", "q1_minus", "q2_minus")

TABLE_FIELDS = ("kappa",) + Q_FIELDS + ("mass",)


class BeliefInvariantError(RuntimeError):
    """The belief table violated normalization or positivity."""


class TransitionParams(NamedTuple):
    """Group-stay probabilities after a win (``plus``) and a loss (``minus``)."""

    q1_plus: float
    q2_plus: float
    q1_minus: float
    q2_minus: float


class GroupProbability(NamedTuple):
    """Predicted probability that the opponent's next level lies in group 1."""

    p_group1: float
    branch: Branch

    @property
    def p_group2(self) -> float:
        return 1.0 - self.p_group1


def validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    """Check a stay-probability grid: non-empty, strictly increasing, inside (0, 1)."""
    values = tuple(float(v) for v in grid)
    if not values:
        raise ValueError("stay-probability grid must be non-empty")
    for v in values:
        if not 0.0 < v < 1.0:
            raise ValueError(f"grid values must lie strictly inside (0, 1), got {v!r}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid values must be strictly increasing")
    return values


_ATOM_CACHE: dict[tuple[float, ...], np.ndarray] = {}


def atom_table(grid: Sequence[float]) -> np.ndarray:
    """``(M, 4)`` array of stay-probability combinations, columns as in Q_FIELDS.

    Rows run in nested product order with ``q1_plus`` varying slowest.  The
    returned array is cached and shared; treat it as read-only.
    """
    key = validate_grid(grid)
    table = _ATOM_CACHE.get(key)
    if table is None:
        g = np.asarray(key, dtype=float)
        mesh = np.meshgrid(g, g, g, g, indexing="ij")
        table = np.stack([m.ravel() for m in mesh], axis=1)
        table.setflags(write=False)
        _ATOM_CACHE[key] = table
    return table


def _atom_index(grid: tuple[float, ...], params: Sequence[float]) -> int:
    """Flat atom index of an on-grid stay-probability combination."""
    values = tuple(float(v) for v in params)
    if len(values) != 4:
        raise ValueError(f"expected 4 stay probabilities, got {len(values)}")
    n = len(grid)
    index = 0
    for value in values:
        try:
            pos = grid.index(value)
        except ValueError:
            raise ValueError(f"{value!r} is not a grid value") from None
        index = index * n + pos
    return index


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Probability table over (level class, stay-probability atom).

    ``mass[k, a]`` is the probability that the opponent currently reasons
    at level class ``k`` with stay probabilities equal to row ``a`` of
    ``atom_table(grid)``.  Instances are treated as immutable values; the
    update functions below allocate fresh arrays and never write back.
    """

    grid: tuple[float, ...]
    mass: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        grid = validate_grid(self.grid)
        object.__setattr__(self, "grid", grid)
        mass = np.asarray(self.mass, dtype=float)
        expected = (len(LEVEL_CLASSES), len(grid) ** 4)
        if mass.shape != expected:
            raise ValueError(f"mass must have shape {expected}, got {mass.shape}")
        object.__setattr__(self, "mass", mass)

    @property
    def atom_count(self) -> int:
        return self.mass.size

    def total_mass(self) -> float:
        return float(self.mass.sum())

    def check(self) -> "BeliefState":
        """Return self, raising BeliefInvariantError unless a distribution."""
        if np.any(self.mass < 0.0):
            raise BeliefInvariantError("negative probability mass")
        total = self.total_mass()
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise BeliefInvariantError(f"total mass {total!r} differs from 1")
        return self

    def level_marginals(self) -> np.ndarray:
        """Marginal probability of each level class, shape (4,)."""
        return self.mass.sum(axis=1)

    def q_means(self) -> TransitionParams:
        """Posterior mean of each stay probability."""
        atoms = atom_table(self.grid)
        weights = self.mass.sum(axis=0)
        return TransitionParams(*(float(weights @ atoms[:, c]) for c in range(4)))

    def atom_mass(self, level: int, params: Sequence[float]) -> float:
        """Mass of one (level, stay-probabilities) atom; params must be on-grid."""
        if level not in LEVEL_CLASSES:
            raise ValueError(f"level class must be one of {LEVEL_CLASSES}, got {level!r}")
        return float(self.mass[level, _atom_index(self.grid, params)])

    def q_marginal_mass(self, params: Sequence[float]) -> float:
        """Mass of one stay-probability atom, summed over level classes."""
        return float(self.mass[:, _atom_index(self.grid, params)].sum())


def uniform_prior(grid: Sequence[float] = DEFAULT_Q_GRID) -> BeliefState:
    """Maximum-entropy starting belief: equal mass on every atom."""
    key = validate_grid(grid)
    count = len(LEVEL_CLASSES) * len(key) ** 4
    mass = np.full((len(LEVEL_CLASSES), len(key) ** 4), 1.0 / count)
    return BeliefState(key, mass)


def point_mass(grid: Sequence[float], level: int, params: Sequence[float]) -> BeliefState:
    """Belief concentrated on a single atom (useful in tests and debugging)."""
    key = validate_grid(grid)
    if level not in LEVEL_CLASSES:
        raise ValueError(f"level class must be one of {LEVEL_CLASSES}, got {level!r}")
    mass = np.zeros((len(LEVEL_CLASSES), len(key) ** 4))
    mass[level, _atom_index(key, params)] = 1.0
    return BeliefState(key, mass)


def _branch_columns(branch: Branch) -> tuple[int, int]:
    return (0, 1) if branch == "win" else (2, 3)


def _group_rows(partition: GroupPartition) -> tuple[tuple[int, int], tuple[int, int]]:
    g1 = tuple(sorted(partition.group1))
    g2 = tuple(sorted(partition.group2))
    return g1, g2  # type: ignore[return-value]


def _propagated_group_mass(
    belief: BeliefState, partition: GroupPartition
) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom group masses after the stay/switch kernel, before observing."""
    atoms = atom_table(belief.grid)
    (i1, j1), (i2, j2) = _group_rows(partition)
    m1 = belief.mass[i1] + belief.mass[j1]
    m2 = belief.mass[i2] + belief.mass[j2]
    c1, c2 = _branch_columns(partition.branch)
    stay1 = atoms[:, c1]
    stay2 = atoms[:, c2]
    flow1 = stay1 * m1 + (1.0 - stay2) * m2
    flow2 = (1.0 - stay1) * m1 + stay2 * m2
    return flow1, flow2


def predict_group_probability(belief: BeliefState, prev_result_p1: int) -> GroupProbability:
    """Probability that the opponent's next level class falls in group 1.

    Marginalizes the current belief over the stay/switch kernel selected by
    the previous round's result, before the next move is observed.
    """
    partition = level_groups(prev_result_p1)
    flow1, _ = _propagated_group_mass(belief, partition)
    p1 = float(flow1.sum())
    return GroupProbability(min(1.0, max(0.0, p1)), partition.branch)


def update_belief(
    belief: BeliefState,
    prev: RoundDecisions,
    prev_result_p1: int,
    observed_u1: int,
    theta: float,
) -> BeliefState:
    """One filtering step: fold the opponent's observed move into the belief.

    The previous round's result selects the partition and stay/switch
    kernel; the observed move is scored against each group's shared
    predicted action with the softmax compliance weight; the normalized
    group masses are then spread back over level classes in the previous
    belief's proportions.

    Raises BeliefInvariantError if the posterior degenerates to all-zero
    mass (impossible while the grid stays inside (0, 1) and theta is
    finite, kept as a hard guard anyway).
    """
    checked_decision(observed_u1)
    if payoff(prev.u1, prev.u2)[0] != prev_result_p1:
        raise ValueError(
            f"result {prev_result_p1!r} does not match previous decisions {tuple(prev)}"
        )
    partition = level_groups(prev_result_p1)
    flow1, flow2 = _propagated_group_mass(belief, partition)
    compliance = softmax_compliance(theta)
    predicted = group_action(partition, 1, prev)
    if observed_u1 == predicted:
        like1, like2 = compliance, 1.0 - compliance
    else:
        like1, like2 = 1.0 - compliance, compliance
    weighted1 = like1 * flow1
    weighted2 = like2 * flow2
    total = float(weighted1.sum() + weighted2.sum())
    if not total > 0.0:
        raise BeliefInvariantError(
            "all-zero posterior: the observation has zero likelihood everywhere"
        )
    group_mass = np.stack([weighted1, weighted2]) / total
    return reconstruct_levels(group_mass, belief, partition)


def reconstruct_levels(
    group_mass: np.ndarray, prior: BeliefState, partition: GroupPartition
) -> BeliefState:
    """Spread per-(group, atom) masses over level classes at the prior's ratios.

    Within each group pair the prior decides the split, with an equal split
    where the prior pair carries no mass at all.  Each pair sums to its
    group cell by construction, so normalized group masses yield a
    normalized belief; a final renormalization pins the total at 1 and
    doubles as an invariant check.
    """
    group_mass = np.asarray(group_mass, dtype=float)
    if group_mass.shape != (2, prior.mass.shape[1]):
        raise ValueError(
            f"group mass must have shape (2, {prior.mass.shape[1]}), got {group_mass.shape}"
        )
    new_mass = np.empty_like(prior.mass)
    for row, (i, j) in enumerate(_group_rows(partition)):
        first = prior.mass[i]
        pair_total = first + prior.mass[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            share = np.where(pair_total > 0.0, first / pair_total, 0.5)
        top = group_mass[row] * share
        new_mass[i] = top
        new_mass[j] = group_mass[row] - top  # exact cell conservation
    total = float(new_mass.sum())
    if abs(total - 1.0) > 1e-9:
        raise BeliefInvariantError(f"reconstructed mass {total!r} is far from 1")
    return BeliefState(prior.grid, new_mass / total)


def belief_rows(belief: BeliefState) -> Iterator[tuple]:
    """Rows ``(kappa, q1_plus, q2_plus, q1_minus, q2_minus, mass)`` in table order."""
    atoms = atom_table(belief.grid)
    for level in LEVEL_CLASSES:
        for a in range(atoms.shape[0]):
            yield (level, *(float(v) for v in atoms[a]), float(belief.mass[level, a]))


def write_belief_table(belief: BeliefState, path) -> None:
    """CSV snapshot of the belief, one row per atom (see TABLE_FIELDS)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_FIELDS)
        for row in belief_rows(belief):
            writer.writerow(row)


def read_belief_table(path) -> BeliefState:
    """Rebuild a belief from a complete CSV snapshot written by write_belief_table."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(TABLE_FIELDS):
            raise ValueError(f"unexpected header {header!r}")
        rows = [
            (int(kappa), float(a), float(b), float(c), float(d), float(m))
            for kappa, a, b, c, d, m in reader
        ]
    grid = tuple(sorted({row[1] for row in rows}))
    key = validate_grid(grid)
    expected = len(LEVEL_CLASSES) * len(key) ** 4
    if len(rows) != expected:
        raise ValueError(f"expected {expected} rows for a complete table, got {len(rows)}")
    mass = np.full((len(LEVEL_CLASSES), len(key) ** 4), np.nan)
    for kappa, a, b, c, d, m in rows:
        if kappa not in LEVEL_CLASSES:
            raise ValueError(f"bad level class {kappa!r}")
        mass[kappa, _atom_index(key, (a, b, c, d))] = m
    if np.isnan(mass).any():
        raise ValueError("table does not cover every atom exactly once")
    return BeliefState(key, mass)
