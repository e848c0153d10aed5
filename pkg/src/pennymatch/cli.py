"""Command-line entry points: interactive play, batch simulation, analysis, serving."""

from __future__ import annotations

import os
import socket
from pathlib import Path

import click

from .arena import (
    AI_STREAM,
    MatchConfig,
    RoundRecord,
    Transcript,
    TRANSCRIPTS_FILENAME,
    cumulative_payoff,
    export_transcripts,
    import_transcripts,
    run_matches,
    summarize,
    write_summary_tables,
)
from .belief import DEFAULT_Q_GRID, validate_grid
from .game import DEFAULT_THETA, RoundDecisions, payoff
from .opponents import ReplayOpponent
from .service import SessionStore, build_app
from .strategies import STRATEGY_KINDS, RandomSource, StrategySeat

SIDE_LABELS = {0: "left", 1: "right"}
GRID_DEFAULT = ",".join(str(v) for v in DEFAULT_Q_GRID)


def _parse_grid(ctx, param, value):
    try:
        return validate_grid(tuple(float(v) for v in value.split(",")))
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "big")
    if not 0 <= seed < 2**64:
        raise click.BadParameter("seed must be a 64-bit non-negative integer")
    return seed


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Penny-matching AI: play against it, simulate it, study it."""


@main.command()
@click.option("--rounds", default=150, show_default=True, type=click.IntRange(min=1))
@click.option("--mode", required=True, type=click.Choice(STRATEGY_KINDS), help="AI strategy.")
@click.option("--theta", default=DEFAULT_THETA, show_default=True, type=float)
@click.option("--q-grid", "grid", default=GRID_DEFAULT, show_default=True, callback=_parse_grid)
@click.option("--seed", type=int, default=None, help="Drawn randomly and printed if omitted.")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Transcript path.  [default: pennymatch-play-<seed>.transcript]",
)
def play(rounds, mode, theta, grid, seed, out):
    """Play one interactive game in the terminal."""
    seed = _resolve_seed(seed)
    if out is None:
        out = Path(f"pennymatch-play-{seed}.transcript")
    seat = StrategySeat(mode, RandomSource(seed, stream=AI_STREAM), theta=theta, grid=grid)
    click.echo(f"seed: {seed}")
    click.echo("you dig for treasure; the ai hides it; matching side wins you a coin")
    records: list[RoundRecord] = []
    prev: RoundDecisions | None = None
    prev_result: int | None = None
    total = 0
    for t in range(rounds):
        ai_move = seat.move(prev, prev_result)  # committed before the prompt
        choice = _prompt_side(t)
        r1, _ = payoff(choice, ai_move)
        seat.observe(prev, prev_result, choice)
        total += r1
        outcome = "you win" if r1 > 0 else "you lose"
        click.echo(
            f"round {t}: you {SIDE_LABELS[choice]}, ai {SIDE_LABELS[ai_move]} "
            f"-> {outcome} | coins {total:+d}"
        )
        records.append(RoundRecord(t, choice, ai_move, r1))
        prev = RoundDecisions(choice, ai_move)
        prev_result = r1
    click.echo(f"final: {total:+d} over {rounds} rounds")
    config = MatchConfig(mode, "human", rounds, float(theta), grid, seed)
    export_transcripts(out, [Transcript(config, tuple(records))])
    click.echo(f"transcript written to {out}")


def _prompt_side(t: int) -> int:
    aliases = {"l": 0, "left": 0, "0": 0, "r": 1, "right": 1, "1": 1}
    while True:
        raw = click.prompt(f"round {t}: dig left or right? [l/r]", prompt_suffix=" ").strip()
        side = aliases.get(raw.lower())
        if side is not None:
            return side
        click.echo("please answer l or r")


def _load_replay(path: str) -> ReplayOpponent:
    try:
        recorded = import_transcripts(path)
    except OSError as exc:
        raise click.ClickException(f"cannot read replay transcript: {exc}")
    except ValueError as exc:
        raise click.ClickException(str(exc))
    return ReplayOpponent(tuple(r.u1 for r in recorded[0].records))


@main.command()
@click.option("--n", required=True, type=click.IntRange(min=2), help="Number of matches.")
@click.option("--rounds", default=150, show_default=True, type=click.IntRange(min=1))
@click.option("--ai", required=True, type=click.Choice(STRATEGY_KINDS))
@click.option(
    "--opponent",
    default="fake-human",
    show_default=True,
    help='"fake-human" or "replay:PATH" (replays the human moves of PATH\'s first transcript).',
)
@click.option("--theta", default=DEFAULT_THETA, show_default=True, type=float)
@click.option("--q-grid", "grid", default=GRID_DEFAULT, show_default=True, callback=_parse_grid)
@click.option("--seed", type=int, default=None, help="Base seed; match i plays with seed+i.")
@click.option("--hist-width", default=10, show_default=True, type=click.IntRange(min=1))
@click.option(
    "--out",
    "out_dir",
    default="simulate-out",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
)
def simulate(n, rounds, ai, opponent, theta, grid, seed, hist_width, out_dir):
    """Run a batch of seeded matches; write transcripts and summary tables."""
    seed = _resolve_seed(seed)
    if opponent == "fake-human":
        opp = "fake-human"
    elif opponent.startswith("replay:"):
        opp = _load_replay(opponent[len("replay:") :])
    else:
        raise click.UsageError(f'opponent must be "fake-human" or "replay:PATH", got {opponent!r}')
    click.echo(f"base seed: {seed}")
    descriptor = "fake-human" if opp == "fake-human" else "replay"
    template = MatchConfig(ai, descriptor, rounds, float(theta), grid, seed)
    transcripts = run_matches(n, template, seed, opponent=opp)
    summary = summarize(transcripts, hist_width)
    out_dir.mkdir(parents=True, exist_ok=True)
    export_transcripts(out_dir / TRANSCRIPTS_FILENAME, transcripts)
    write_summary_tables(out_dir, summary, transcripts)
    finals = [cumulative_payoff(t, 2)[-1] for t in transcripts]
    click.echo(f"matches: {n}  rounds: {rounds}  ai: {ai}")
    click.echo(f"mean final ai payoff: {sum(finals) / n:+.3f}")
    click.echo(f"output written to {out_dir}")


@main.command()
@click.option(
    "--in",
    "in_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
)
@click.option("--hist-width", default=10, show_default=True, type=click.IntRange(min=1))
def analyze(in_dir, hist_width):
    """Recompute summary tables from stored transcripts; report match outcomes."""
    path = in_dir / TRANSCRIPTS_FILENAME
    if not path.exists():
        raise click.ClickException(f"no {TRANSCRIPTS_FILENAME} in {in_dir}")
    try:
        transcripts = import_transcripts(path)
        summary = summarize(transcripts, hist_width)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    write_summary_tables(in_dir, summary, transcripts)
    finals = [cumulative_payoff(t, 2)[-1] for t in transcripts]
    ai_wins = sum(1 for f in finals if f > 0)
    human_wins = sum(1 for f in finals if f < 0)
    ties = len(finals) - ai_wins - human_wins
    click.echo(f"matches: {len(finals)}")
    click.echo(f"ai wins: {ai_wins} ({ai_wins / len(finals):.1%})")
    click.echo(f"human wins: {human_wins}  ties: {ties}")
    click.echo(f"mean final ai payoff: {sum(finals) / len(finals):+.3f}")
    click.echo(f"summary tables rewritten in {in_dir}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option(
    "--data-dir",
    envvar="PENNYMATCH_DATA_DIR",
    default="pennymatch-data",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Event-log directory (env: PENNYMATCH_DATA_DIR).",
)
@click.option(
    "--idle-timeout",
    default=None,
    type=float,
    help="Seconds of inactivity before an open session counts as abandoned.",
)
@click.option(
    "--ui-dir",
    default=None,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Optional static directory to serve at / (a built web client).",
)
def serve(host, port, data_dir, idle_timeout, ui_dir):
    """Serve the live-play HTTP API with event-log persistence."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()
    store = SessionStore(data_dir, idle_timeout=idle_timeout)
    app = build_app(store)
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    click.echo(f"event log: {Path(data_dir) / 'events.jsonl'}")
    click.echo(f"sessions recovered: {len(store.session_ids())}")
    import uvicorn

    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        store.close()


if __name__ == "__main__":
    main()
