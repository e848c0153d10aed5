"""Match engine, Monte-Carlo experiment runner, and the transcript file format.

A match is a pure function of its configuration and seed: the AI and the
opponent consume independent sub-streams of the match seed, so recorded
games replay exactly and experiments are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .belief import DEFAULT_Q_GRID, validate_grid
from .game import DEFAULT_THETA, RoundDecisions, payoff
from .opponents import (
    FakeHuman,
    ReplayOpponent,
    fake_human_decide,
    fake_human_transition,
    replay_decide,
    sample_fake_human,
)
from .strategies import STRATEGY_KINDS, RandomSource, StrategySeat

AI_STREAM = 0
OPPONENT_STREAM = 1

TRANSCRIPT_HEADER = "# pennymatch-transcript v1"
SUMMARY_HEADER = "# pennymatch-summary v1"
HISTOGRAM_HEADER = "# pennymatch-histogram v1"

TRANSCRIPTS_FILENAME = "transcripts.txt"
SUMMARY_FILENAME = "summary.csv"
HISTOGRAM_FILENAME = "histogram.csv"

CONFIDENCE_FACTOR = 1.96  # two-sided 95% normal quantile


class TranscriptParseError(ValueError):
    """A transcript file failed to parse; the message names the line."""


@dataclass(frozen=True)
class RoundRecord:
    """One resolved round; ``r1`` is player 1's payoff (player 2 takes -r1)."""

    t: int
    u1: int
    u2: int
    r1: int


def _token(value: str, what: str) -> str:
    if not value or any(ch.isspace() for ch in value):
        raise ValueError(f"{what} must be a non-empty token without whitespace, got {value!r}")
    return value


@dataclass(frozen=True)
class MatchConfig:
    """Identity of one match: who played, for how long, and the seed."""

    ai: str
    opponent: str
    rounds: int
    theta: float
    grid: tuple[float, ...]
    seed: int

    def __post_init__(self) -> None:
        _token(self.ai, "ai")
        _token(self.opponent, "opponent")
        if self.rounds < 1:
            raise ValueError(f"rounds must be positive, got {self.rounds!r}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")
        object.__setattr__(self, "grid", validate_grid(self.grid))
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")


@dataclass(frozen=True)
class Transcript:
    """Complete or partial record of one match."""

    config: MatchConfig
    records: tuple[RoundRecord, ...]


def _opponent_driver(opponent, rng: RandomSource, theta: float):
    """Normalize the opponent argument into (move function, descriptor)."""
    if opponent == "fake-human":
        opponent = sample_fake_human(rng, theta)
    if isinstance(opponent, FakeHuman):
        state = opponent

        def drive(t: int, prev, prev_result) -> int:
            nonlocal state
            if prev is None:
                return rng.coin()
            state = fake_human_transition(state, prev_result, rng)
            return fake_human_decide(state, prev, rng)

        return drive, "fake-human"
    if isinstance(opponent, ReplayOpponent):

        def drive(t: int, prev, prev_result) -> int:
            return replay_decide(opponent, t)

        return drive, "replay"
    raise ValueError(f"unsupported opponent {opponent!r}")


def play_match(
    ai: str,
    opponent,
    rounds: int,
    seed: int,
    *,
    theta: float = DEFAULT_THETA,
    grid: Sequence[float] = DEFAULT_Q_GRID,
) -> Transcript:
    """Run one seeded match and return its transcript.

    ``opponent`` is either the string ``"fake-human"`` (a fresh opponent is
    drawn from the match's opponent stream), an explicit FakeHuman starting
    state, or a ReplayOpponent.  Round 0 has no history: the AI opens with
    a fair coin and a generative opponent does the same from its own
    stream, while a replay opponent plays its recorded opener.
    """
    if ai not in STRATEGY_KINDS:
        raise ValueError(f"ai must be one of {STRATEGY_KINDS}, got {ai!r}")
    if rounds < 1:
        raise ValueError(f"rounds must be positive, got {rounds!r}")
    ai_rng = RandomSource(seed, stream=AI_STREAM)
    opp_rng = RandomSource(seed, stream=OPPONENT_STREAM)
    drive, opponent_name = _opponent_driver(opponent, opp_rng, theta)
    seat = StrategySeat(ai, ai_rng, theta=theta, grid=grid)
    records: list[RoundRecord] = []
    prev: RoundDecisions | None = None
    prev_result: int | None = None
    for t in range(rounds):
        u2 = seat.move(prev, prev_result)
        u1 = drive(t, prev, prev_result)
        r1, _ = payoff(u1, u2)
        seat.observe(prev, prev_result, u1)
        records.append(RoundRecord(t, u1, u2, r1))
        prev = RoundDecisions(u1, u2)
        prev_result = r1
    config = MatchConfig(ai, opponent_name, rounds, float(theta), tuple(grid), seed)
    return Transcript(config, tuple(records))


def cumulative_payoff(transcript: Transcript, player: int) -> list[int]:
    """Running payoff total for one player, one entry per round."""
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player!r}")
    sign = 1 if player == 1 else -1
    totals: list[int] = []
    running = 0
    for record in transcript.records:
        running += sign * record.r1
        totals.append(running)
    return totals


@dataclass(frozen=True)
class ExperimentSummary:
    """Cross-match statistics.

    The mean series and its 95% half-width tube describe the AI seat's
    cumulative payoff by round; the histogram describes final cumulative
    payoffs of the human seat in bins of ``hist_width`` centered on 0.
    """

    rounds: int
    matches: int
    hist_width: int
    mean_ai_cumulative: tuple[float, ...]
    half_width: tuple[float, ...]
    hist_edges: tuple[float, ...]
    hist_counts: tuple[int, ...]


def run_matches(
    n: int, config: MatchConfig, base_seed: int, *, opponent=None
) -> list[Transcript]:
    """Play ``n`` matches from a template config; match i uses base_seed + i.

    ``opponent`` optionally passes a concrete opponent handle (for example a
    ReplayOpponent) when the config's descriptor string is not enough to
    build one; the descriptor still names it in the transcripts.
    """
    if n < 1:
        raise ValueError(f"match count must be positive, got {n!r}")
    handle = opponent if opponent is not None else config.opponent
    return [
        play_match(
            config.ai,
            handle,
            config.rounds,
            base_seed + i,
            theta=config.theta,
            grid=config.grid,
        )
        for i in range(n)
    ]


def _centered_histogram(values: Sequence[int], width: int) -> tuple[tuple, tuple]:
    """Histogram with bins of ``width`` centered on multiples of ``width``.

    Bin k covers [k*width - width/2, k*width + width/2), so one bin is
    always centered on zero.
    """
    if width < 1:
        raise ValueError(f"histogram width must be positive, got {width!r}")
    half = width / 2.0
    k_lo = math.floor((min(values) + half) / width)
    k_hi = math.floor((max(values) + half) / width)
    edges = [k * width - half for k in range(k_lo, k_hi + 2)]
    counts, _ = np.histogram(np.asarray(values), bins=edges)
    return tuple(float(e) for e in edges), tuple(int(c) for c in counts)


def summarize(transcripts: Sequence[Transcript], hist_width: int = 10) -> ExperimentSummary:
    """Reduce finished matches to the cross-match summary statistics."""
    if len(transcripts) < 2:
        raise ValueError("summaries need at least 2 matches")
    rounds = transcripts[0].config.rounds
    for tr in transcripts:
        if tr.config.rounds != rounds or len(tr.records) != rounds:
            raise ValueError("summaries need complete matches with a uniform round count")
    ai_cum = np.array([cumulative_payoff(tr, 2) for tr in transcripts], dtype=float)
    mean = ai_cum.mean(axis=0)
    std = ai_cum.std(axis=0, ddof=1)
    half = CONFIDENCE_FACTOR * std / math.sqrt(len(transcripts))
    finals = [cumulative_payoff(tr, 1)[-1] for tr in transcripts]
    edges, counts = _centered_histogram(finals, hist_width)
    return ExperimentSummary(
        rounds=rounds,
        matches=len(transcripts),
        hist_width=int(hist_width),
        mean_ai_cumulative=tuple(float(v) for v in mean),
        half_width=tuple(float(v) for v in half),
        hist_edges=edges,
        hist_counts=counts,
    )


def run_experiment(
    n: int, config: MatchConfig, base_seed: int, *, hist_width: int = 10
) -> ExperimentSummary:
    """Play ``n`` seeded matches and summarize them."""
    return summarize(run_matches(n, config, base_seed), hist_width)


def _format_header(config: MatchConfig) -> str:
    grid = ",".join(repr(v) for v in config.grid)
    return (
        f"{TRANSCRIPT_HEADER} ai={config.ai} opponent={config.opponent} "
        f"rounds={config.rounds} theta={config.theta!r} grid={grid} seed={config.seed}"
    )


def format_transcript(transcript: Transcript) -> str:
    """Text form of one transcript: header line, then ``t,u1,u2,r1`` per round."""
    lines = [_format_header(transcript.config)]
    for record in transcript.records:
        lines.append(f"{record.t},{record.u1},{record.u2},{record.r1}")
    return "\n".join(lines) + "\n"


def export_transcripts(path, transcripts: Iterable[Transcript]) -> None:
    """Write transcripts to one file (UTF-8, LF terminators)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for transcript in transcripts:
            fh.write(format_transcript(transcript))


def _parse_header(line: str, lineno: int) -> MatchConfig:
    if not line.startswith(TRANSCRIPT_HEADER + " "):
        raise TranscriptParseError(f"line {lineno}: not a transcript header: {line!r}")
    fields: dict[str, str] = {}
    for token in line[len(TRANSCRIPT_HEADER) + 1 :].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise TranscriptParseError(f"line {lineno}: malformed header field {token!r}")
        fields[key] = value
    try:
        return MatchConfig(
            ai=fields["ai"],
            opponent=fields["opponent"],
            rounds=int(fields["rounds"]),
            theta=float(fields["theta"]),
            grid=tuple(float(v) for v in fields["grid"].split(",")),
            seed=int(fields["seed"]),
        )
    except (KeyError, ValueError) as exc:
        raise TranscriptParseError(f"line {lineno}: bad header: {exc}") from None


def parse_transcripts(text: str) -> list[Transcript]:
    """Parse transcript text; raises TranscriptParseError naming the bad line."""
    transcripts: list[Transcript] = []
    config: MatchConfig | None = None
    records: list[RoundRecord] = []

    def flush() -> None:
        nonlocal config, records
        if config is not None:
            transcripts.append(Transcript(config, tuple(records)))
        config = None
        records = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            flush()
            config = _parse_header(line, lineno)
            continue
        if config is None:
            raise TranscriptParseError(f"line {lineno}: record before any header")
        parts = line.split(",")
        if len(parts) != 4:
            raise TranscriptParseError(f"line {lineno}: expected 't,u1,u2,r1', got {line!r}")
        try:
            t, u1, u2, r1 = (int(p) for p in parts)
        except ValueError:
            raise TranscriptParseError(f"line {lineno}: non-integer field in {line!r}") from None
        if t != len(records):
            raise TranscriptParseError(f"line {lineno}: round index {t} out of order")
        if len(records) >= config.rounds:
            raise TranscriptParseError(f"line {lineno}: more rounds than configured")
        if u1 not in (0, 1) or u2 not in (0, 1):
            raise TranscriptParseError(f"line {lineno}: decisions must be 0 or 1")
        if payoff(u1, u2)[0] != r1:
            raise TranscriptParseError(f"line {lineno}: result {r1} inconsistent with decisions")
        records.append(RoundRecord(t, u1, u2, r1))
    flush()
    if not transcripts:
        raise TranscriptParseError("no transcripts found")
    return transcripts


def import_transcripts(path) -> list[Transcript]:
    """Read a transcript file written by export_transcripts."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_transcripts(text)
    except TranscriptParseError as exc:
        raise TranscriptParseError(f"{path}: {exc}") from None


def _shared_config(transcripts: Sequence[Transcript]) -> MatchConfig:
    first = transcripts[0].config
    for tr in transcripts[1:]:
        c = tr.config
        if (c.ai, c.opponent, c.rounds, c.theta, c.grid) != (
            first.ai,
            first.opponent,
            first.rounds,
            first.theta,
            first.grid,
        ):
            raise ValueError("transcripts come from differing configurations")
    return first


def _meta_line(tag: str, summary: ExperimentSummary, config: MatchConfig) -> str:
    grid = ",".join(repr(v) for v in config.grid)
    return (
        f"{tag} matches={summary.matches} rounds={summary.rounds} ai={config.ai} "
        f"opponent={config.opponent} theta={config.theta!r} grid={grid} "
        f"base_seed={config.seed} hist_width={summary.hist_width}"
    )


def format_summary(summary: ExperimentSummary, transcripts: Sequence[Transcript]) -> str:
    """Summary table text: per-round mean AI cumulative payoff and 95% half-width."""
    config = _shared_config(transcripts)
    lines = [
        _meta_line(SUMMARY_HEADER, summary, config),
        "# series: cumulative payoff of the AI seat (player 2), mean over matches",
        "round,mean_ai_cumulative,half_width_95",
    ]
    for idx in range(summary.rounds):
        lines.append(
            f"{idx},{summary.mean_ai_cumulative[idx]!r},{summary.half_width[idx]!r}"
        )
    return "\n".join(lines) + "\n"


def format_histogram(summary: ExperimentSummary, transcripts: Sequence[Transcript]) -> str:
    """Histogram table text: final human-seat payoffs in centered bins."""
    config = _shared_config(transcripts)
    lines = [
        _meta_line(HISTOGRAM_HEADER, summary, config),
        "# bins: final cumulative payoff of the human seat (player 1), half-open [low, high)",
        "bin_low,bin_high,count",
    ]
    for i, count in enumerate(summary.hist_counts):
        lines.append(f"{summary.hist_edges[i]!r},{summary.hist_edges[i + 1]!r},{count}")
    return "\n".join(lines) + "\n"


def write_summary_tables(directory, summary: ExperimentSummary, transcripts) -> None:
    """Write summary.csv and histogram.csv into ``directory``."""
    directory = Path(directory)
    (directory / SUMMARY_FILENAME).write_text(
        format_summary(summary, transcripts), encoding="utf-8"
    )
    (directory / HISTOGRAM_FILENAME).write_text(
        format_histogram(summary, transcripts), encoding="utf-8"
    )
