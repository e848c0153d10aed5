"""Live-play sessions: the AI seat behind an HTTP API with an event log.

A session owns one or two runs.  The paired-study mode plays two
back-to-back runs whose strategy order is seed-determined and stays
undisclosed until the session completes; the single modes play one run of
the chosen strategy.  The AI's move for a round is committed before the
human's choice arrives, which preserves the simultaneous game despite the
request/response mechanics.  Every state change is appended to the event
log before the response is returned, and replaying the log reproduces the
sessions exactly, beliefs and random streams included.
"""

# no `from __future__ import annotations` here: the HTTP request models are
# defined inside build_app, and stringified annotations on the nested route
# handlers would be unresolvable for the framework

import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .arena import MatchConfig, RoundRecord, Transcript, format_transcript
from .belief import DEFAULT_Q_GRID, validate_grid
from .game import DEFAULT_THETA, RoundDecisions, payoff
from .strategies import RandomSource, StrategySeat

SESSION_MODES = ("proposed", "nash", "paired-study")
PAIRED_RUN_MODES = ("proposed", "nash")

# rng sub-streams: run i draws from stream i; the paired-study order uses
# its own stream so adding runs never shifts existing draw sequences.
ORDER_STREAM = 64

EVENTS_FILENAME = "events.jsonl"


class UnknownSessionError(Exception):
    """No session with that id."""


class SessionNotPlayableError(Exception):
    """The session is complete or expired and accepts no further moves."""


class RoundMismatchError(Exception):
    """The submitted round token does not match the session's current round."""


class TranscriptNotReadyError(Exception):
    """Transcripts are only available once a session completes."""


class SessionValidationError(ValueError):
    """A request carried invalid session parameters."""


class EventLogError(RuntimeError):
    """The event log is inconsistent with deterministic replay."""


@dataclass
class RunState:
    """One run of a session: its strategy seat and resolved rounds."""

    mode: str
    seat: StrategySeat
    records: list[RoundRecord] = field(default_factory=list)
    pending_move: int | None = None

    def prev(self) -> RoundDecisions | None:
        if not self.records:
            return None
        last = self.records[-1]
        return RoundDecisions(last.u1, last.u2)

    def prev_result(self) -> int | None:
        return self.records[-1].r1 if self.records else None

    def human_total(self) -> int:
        return sum(r.r1 for r in self.records)


@dataclass
class Session:
    id: str
    mode: str
    rounds: int
    seed: int
    theta: float
    grid: tuple[float, ...]
    runs: list[RunState]
    created: float
    current_run: int = 0
    status: str = "in-progress"  # in-progress | complete | expired
    last_activity: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def fingerprint(self) -> str:
        """Digest of the full state: records, pending moves, rng streams, beliefs."""
        digest = hashlib.sha256()
        payload = {
            "id": self.id,
            "mode": self.mode,
            "rounds": self.rounds,
            "seed": self.seed,
            "theta": self.theta,
            "grid": list(self.grid),
            "status": self.status,
            "current_run": self.current_run,
            "runs": [
                {
                    "mode": run.mode,
                    "records": [[r.t, r.u1, r.u2, r.r1] for r in run.records],
                    "pending": run.pending_move,
                    "rng": run.seat.rng.state(),
                }
                for run in self.runs
            ],
        }
        digest.update(json.dumps(payload, sort_keys=True, default=str).encode())
        for run in self.runs:
            if run.seat.belief is not None:
                digest.update(run.seat.belief.mass.tobytes())
        return digest.hexdigest()


def _random_seed() -> int:
    return int.from_bytes(os.urandom(8), "big")


class SessionStore:
    """Owns the sessions and the append-only event log.

    ``data_dir=None`` keeps everything in memory.  With a directory, every
    event lands in ``events.jsonl`` (flushed and fsynced before the caller
    sees a response) and the constructor replays the log so a restarted
    process carries on exactly where the previous one stopped.
    """

    def __init__(self, data_dir=None, *, idle_timeout: float | None = None, clock=time.time):
        self._sessions: dict[str, Session] = {}
        self._clock = clock
        self.idle_timeout = idle_timeout
        self._log_lock = threading.Lock()
        self._log_file = None
        self.data_dir = None
        if data_dir is not None:
            self.data_dir = Path(data_dir)
            if not self.data_dir.exists():
                self.data_dir.mkdir(parents=True)
                self.data_dir.chmod(0o700)
            log_path = self.data_dir / EVENTS_FILENAME
            if log_path.exists():
                self._replay_log(log_path)
            self._log_file = open(log_path, "a", encoding="utf-8")

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- event log -------------------------------------------------------

    def _append(self, event: dict) -> None:
        if self._log_file is None:
            return
        with self._log_lock:
            self._log_file.write(json.dumps(event, sort_keys=True) + "\n")
            self._log_file.flush()
            os.fsync(self._log_file.fileno())

    def _replay_log(self, log_path: Path) -> None:
        with open(log_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise EventLogError(f"event log line {lineno}: {exc}") from None
                self._replay_event(event, lineno)

    def _replay_event(self, event: dict, lineno: int) -> None:
        kind = event.get("kind")
        if kind == "created":
            session = self._build_session(
                sid=event["sid"],
                mode=event["mode"],
                rounds=event["rounds"],
                seed=event["seed"],
                theta=event["theta"],
                grid=tuple(event["grid"]),
                now=event["ts"],
            )
            if [run.mode for run in session.runs] != event["run_modes"]:
                raise EventLogError(f"event log line {lineno}: run order mismatch")
            self._sessions[session.id] = session
        elif kind == "move":
            session = self._sessions.get(event["sid"])
            if session is None:
                raise EventLogError(f"event log line {lineno}: move for unknown session")
            if session.status != "in-progress":
                raise EventLogError(f"event log line {lineno}: move on finished session")
            if event["run"] != session.current_run:
                raise EventLogError(f"event log line {lineno}: run index mismatch")
            run = session.runs[session.current_run]
            if event["t"] != len(run.records):
                raise EventLogError(f"event log line {lineno}: round index mismatch")
            record, _ = self._apply_move(session, event["u1"])
            if record.u2 != event["u2"] or record.r1 != event["r1"]:
                raise EventLogError(
                    f"event log line {lineno}: logged move diverges from deterministic replay"
                )
            session.last_activity = event["ts"]
        elif kind == "expired":
            session = self._sessions.get(event["sid"])
            if session is None:
                raise EventLogError(f"event log line {lineno}: expiry for unknown session")
            session.status = "expired"
        elif kind == "completed":
            session = self._sessions.get(event["sid"])
            if session is None or session.status != "complete":
                raise EventLogError(f"event log line {lineno}: completion out of place")
        else:
            raise EventLogError(f"event log line {lineno}: unknown event kind {kind!r}")

    # -- session construction and lookup ---------------------------------

    def _build_session(self, sid, mode, rounds, seed, theta, grid, now) -> Session:
        run_modes = [mode]
        if mode == "paired-study":
            order = list(PAIRED_RUN_MODES)
            if RandomSource(seed, stream=ORDER_STREAM).coin():
                order.reverse()
            run_modes = order
        runs = [
            RunState(m, StrategySeat(m, RandomSource(seed, stream=i), theta=theta, grid=grid))
            for i, m in enumerate(run_modes)
        ]
        runs[0].pending_move = runs[0].seat.move(None, None)
        return Session(
            id=sid,
            mode=mode,
            rounds=rounds,
            seed=seed,
            theta=theta,
            grid=tuple(grid),
            runs=runs,
            created=now,
            last_activity=now,
        )

    def create_session(
        self,
        mode: str,
        rounds: int,
        seed: int | None = None,
        *,
        theta: float = DEFAULT_THETA,
        grid=DEFAULT_Q_GRID,
    ) -> Session:
        if mode not in SESSION_MODES:
            raise SessionValidationError(f"mode must be one of {SESSION_MODES}, got {mode!r}")
        if not isinstance(rounds, int) or isinstance(rounds, bool) or rounds < 1:
            raise SessionValidationError(f"rounds must be a positive integer, got {rounds!r}")
        if seed is None:
            seed = _random_seed()
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise SessionValidationError(f"seed must be a 64-bit non-negative integer")
        try:
            grid = validate_grid(grid)
            if not theta > 0:
                raise ValueError(f"theta must be positive, got {theta!r}")
        except ValueError as exc:
            raise SessionValidationError(str(exc)) from None
        now = self._clock()
        session = self._build_session(uuid.uuid4().hex, mode, rounds, seed, float(theta), grid, now)
        self._append(
            {
                "kind": "created",
                "sid": session.id,
                "ts": now,
                "mode": mode,
                "rounds": rounds,
                "seed": seed,
                "theta": float(theta),
                "grid": list(grid),
                "run_modes": [run.mode for run in session.runs],
            }
        )
        self._sessions[session.id] = session
        return session

    def _get(self, sid: str) -> Session:
        session = self._sessions.get(sid)
        if session is None:
            raise UnknownSessionError(f"unknown session {sid!r}")
        return session

    def _check_expiry(self, session: Session) -> None:
        """Mark an idle in-progress session expired (abandoned)."""
        if (
            self.idle_timeout is not None
            and session.status == "in-progress"
            and self._clock() - session.last_activity > self.idle_timeout
        ):
            session.status = "expired"
            self._append({"kind": "expired", "sid": session.id, "ts": self._clock()})

    # -- play -------------------------------------------------------------

    def _apply_move(self, session: Session, human_choice: int) -> tuple[RoundRecord, bool]:
        """Resolve one round; mutates the session, returns (record, run_complete)."""
        run = session.runs[session.current_run]
        t = len(run.records)
        ai_move = run.pending_move
        assert ai_move is not None
        r1, _ = payoff(human_choice, ai_move)
        # belief update needs the round before the observed one
        run.seat.observe(run.prev(), run.prev_result(), human_choice)
        record = RoundRecord(t, human_choice, ai_move, r1)
        run.records.append(record)
        run_complete = len(run.records) >= session.rounds
        if not run_complete:
            run.pending_move = run.seat.move(RoundDecisions(human_choice, ai_move), r1)
        else:
            run.pending_move = None
            if session.current_run + 1 < len(session.runs):
                session.current_run += 1
                nxt = session.runs[session.current_run]
                nxt.pending_move = nxt.seat.move(None, None)
            else:
                session.status = "complete"
        return record, run_complete

    def submit_move(self, sid: str, human_choice, round_token: dict | None = None) -> dict:
        """Resolve the current round against the pre-committed AI move.

        ``round_token`` optionally pins {"run": i, "round": t}; a mismatch
        raises RoundMismatchError instead of double-playing, which lets a
        client retry an ambiguous request safely.
        """
        session = self._get(sid)
        with session.lock:
            self._check_expiry(session)
            if session.status != "in-progress":
                raise SessionNotPlayableError(f"session is {session.status}")
            if human_choice not in (0, 1):
                raise SessionValidationError(f"choice must be 0 or 1, got {human_choice!r}")
            run_index = session.current_run
            run = session.runs[run_index]
            if round_token is not None:
                expected = {"run": run_index, "round": len(run.records)}
                if {"run": round_token.get("run"), "round": round_token.get("round")} != expected:
                    raise RoundMismatchError(
                        f"expected run {expected['run']} round {expected['round']}"
                    )
            record, run_complete = self._apply_move(session, human_choice)
            now = self._clock()
            session.last_activity = now
            self._append(
                {
                    "kind": "move",
                    "sid": sid,
                    "ts": now,
                    "run": run_index,
                    "t": record.t,
                    "u1": record.u1,
                    "u2": record.u2,
                    "r1": record.r1,
                }
            )
            if session.status == "complete":
                self._append({"kind": "completed", "sid": sid, "ts": now})
            return {
                "id": sid,
                "run": run_index,
                "round": record.t,
                "human_choice": record.u1,
                "ai_choice": record.u2,
                "r1": record.r1,
                "cumulative": run.human_total(),
                "run_complete": run_complete,
                "session_complete": session.status == "complete",
            }

    # -- views -------------------------------------------------------------

    def get_state(self, sid: str) -> dict:
        """Public view; never leaks the strategy order of a paired study in play."""
        session = self._get(sid)
        with session.lock:
            self._check_expiry(session)
            run = session.runs[session.current_run]
            last = run.records[-1] if run.records else None
            completed_totals = [
                r.human_total() for r in session.runs if len(r.records) >= session.rounds
            ]
            view = {
                "id": session.id,
                "status": session.status,
                "mode": session.mode,
                "runs": len(session.runs),
                "rounds_per_run": session.rounds,
                "current_run": session.current_run,
                "round": len(run.records),
                "cumulative": run.human_total(),
                "last_reveal": (
                    {"human": last.u1, "ai": last.u2, "r1": last.r1} if last else None
                ),
                "run_totals": completed_totals,
            }
            if session.status == "complete":
                view["modes_by_run"] = [r.mode for r in session.runs]
            return view

    def get_transcript(self, sid: str) -> str:
        """Transcripts of all runs, disclosed only after completion."""
        session = self._get(sid)
        with session.lock:
            if session.status != "complete":
                raise TranscriptNotReadyError(f"session is {session.status}")
            blocks = []
            for run in session.runs:
                config = MatchConfig(
                    ai=run.mode,
                    opponent="human",
                    rounds=session.rounds,
                    theta=session.theta,
                    grid=session.grid,
                    seed=session.seed,
                )
                blocks.append(format_transcript(Transcript(config, tuple(run.records))))
            return "".join(blocks)

    def session_ids(self) -> list[str]:
        return list(self._sessions)


def build_app(store: SessionStore):
    """FastAPI app exposing the session store."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import PlainTextResponse
    from pydantic import BaseModel

    class CreateSessionBody(BaseModel):
        mode: str
        rounds: int = 150
        seed: int | None = None
        theta: float = DEFAULT_THETA
        grid: list[float] | None = None

    class MoveBody(BaseModel):
        choice: int
        run: int | None = None
        round: int | None = None

    app = FastAPI(title="pennymatch", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            session = store.create_session(
                body.mode,
                body.rounds,
                body.seed,
                theta=body.theta,
                grid=tuple(body.grid) if body.grid is not None else DEFAULT_Q_GRID,
            )
        except SessionValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return store.get_state(session.id)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        try:
            return store.get_state(sid)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{sid}/moves")
    def submit_move(sid: str, body: MoveBody):
        token = None
        if body.round is not None or body.run is not None:
            token = {"run": body.run, "round": body.round}
        try:
            return store.submit_move(sid, body.choice, token)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionNotPlayableError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except RoundMismatchError as exc:
            raise HTTPException(status_code=409, detail=f"round mismatch: {exc}")
        except SessionValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/sessions/{sid}/transcript", response_class=PlainTextResponse)
    def get_transcript(sid: str):
        try:
            return store.get_transcript(sid)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except TranscriptNotReadyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    return app
