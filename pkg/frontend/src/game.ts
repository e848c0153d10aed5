import {
  type CreateSessionRequest,
  type GameService,
  type Reveal,
  type RoundToken,
  type SessionState,
  type Side,
  isConflict,
} from "./api.js";

export type Phase =
  | "idle"
  | "creating"
  | "awaiting-choice"
  | "submitting"
  | "run-break"
  | "complete"
  | "failed";

// Everything the page shows. All numbers are copied from service responses;
// the client never adds up coins or decides win/lose on its own.
export interface ClientGameView {
  phase: Phase;
  sessionId: string | null;
  mode: string | null;
  round: number; // rounds resolved in the current run
  roundsPerRun: number;
  currentRun: number;
  runs: number;
  coins: number;
  reveal: Reveal | null;
  runTotals: number[];
  modesByRun: string[] | null;
  error: string | null;
}

export type Listener = (view: ClientGameView) => void;

const RETRY_MESSAGE =
  "The server could not be reached. Nothing was lost: digging again retries " +
  "this same round, it is never scored twice.";

function initialView(): ClientGameView {
  return {
    phase: "idle",
    sessionId: null,
    mode: null,
    round: 0,
    roundsPerRun: 0,
    currentRun: 0,
    runs: 1,
    coins: 0,
    reveal: null,
    runTotals: [],
    modesByRun: null,
    error: null,
  };
}

export class GameClient {
  private service: GameService;
  private view: ClientGameView = initialView();
  private listeners: Listener[] = [];
  private inFlight = false;
  private token: RoundToken | null = null;

  constructor(service: GameService) {
    this.service = service;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((fn) => fn !== listener);
    };
  }

  snapshot(): ClientGameView {
    return { ...this.view, runTotals: [...this.view.runTotals] };
  }

  private patch(changes: Partial<ClientGameView>): void {
    this.view = { ...this.view, ...changes };
    const snap = this.snapshot();
    for (const listener of [...this.listeners]) {
      listener(snap);
    }
  }

  async start(req: CreateSessionRequest): Promise<void> {
    if (this.view.phase !== "idle" && this.view.phase !== "failed") {
      return;
    }
    this.patch({ ...initialView(), phase: "creating" });
    try {
      const state = await this.service.createSession(req);
      this.adoptState(state);
    } catch (err) {
      this.patch({ phase: "failed", error: describeError(err) });
    }
  }

  // Submit the current round. A second call while a request is pending is
  // ignored, so double clicks cannot double-play a round.
  async choose(side: Side): Promise<void> {
    if (this.view.phase !== "awaiting-choice" || this.inFlight) {
      return;
    }
    const sid = this.view.sessionId;
    const token = this.token;
    if (sid === null || token === null) {
      return;
    }
    this.inFlight = true;
    this.patch({ phase: "submitting", error: null });
    let result;
    try {
      result = await this.service.submitMove(sid, side, token);
    } catch (err) {
      this.inFlight = false;
      if (isConflict(err)) {
        // The move may already be on the books (a retry after a lost
        // response, or play from another tab). The server is the record:
        // re-read it rather than submitting this round again.
        await this.resync(sid);
      } else {
        // Keep the same token so a retry targets the same round.
        this.patch({ phase: "awaiting-choice", error: RETRY_MESSAGE });
      }
      return;
    }
    this.inFlight = false;

    const reveal: Reveal = {
      human: result.human_choice,
      ai: result.ai_choice,
      r1: result.r1,
    };
    if (result.session_complete) {
      await this.finish(sid, reveal, result.cumulative);
    } else if (result.run_complete) {
      this.token = null;
      this.patch({
        phase: "run-break",
        reveal,
        coins: result.cumulative,
        round: result.round + 1,
        runTotals: [...this.view.runTotals, result.cumulative],
      });
    } else {
      this.token = { run: result.run, round: result.round + 1 };
      this.patch({
        phase: "awaiting-choice",
        reveal,
        coins: result.cumulative,
        round: result.round + 1,
      });
    }
  }

  // Leave the between-runs screen and line up the first round of the next run.
  async continueToNextRun(): Promise<void> {
    if (this.view.phase !== "run-break" || this.view.sessionId === null) {
      return;
    }
    await this.resync(this.view.sessionId);
  }

  async refresh(): Promise<void> {
    if (this.view.sessionId !== null) {
      await this.resync(this.view.sessionId);
    }
  }

  dismissError(): void {
    if (this.view.error !== null) {
      this.patch({ error: null });
    }
  }

  private async resync(sid: string): Promise<void> {
    let state: SessionState;
    try {
      state = await this.service.getState(sid);
    } catch (err) {
      this.patch({ error: describeError(err) });
      return;
    }
    this.adoptState(state);
  }

  private async finish(sid: string, reveal: Reveal, lastTotal: number): Promise<void> {
    this.token = null;
    try {
      const state = await this.service.getState(sid);
      this.adoptState(state, reveal);
    } catch (err) {
      // The game is over either way; show what we already know.
      this.patch({
        phase: "complete",
        reveal,
        coins: lastTotal,
        runTotals: [...this.view.runTotals, lastTotal],
        error: describeError(err),
      });
    }
  }

  // Mirror a server state view into the client. Used after creation, after a
  // 409, between runs, and at the end; the reveal override keeps the final
  // round on screen when the server has already reset `last_reveal` scope.
  private adoptState(state: SessionState, reveal?: Reveal): void {
    const shown = reveal ?? state.last_reveal;
    const base = {
      sessionId: state.id,
      mode: state.mode,
      round: state.round,
      roundsPerRun: state.rounds_per_run,
      currentRun: state.current_run,
      runs: state.runs,
      coins: state.cumulative,
      reveal: shown,
      runTotals: [...state.run_totals],
      modesByRun: state.modes_by_run ? [...state.modes_by_run] : null,
      error: null,
    };
    if (state.status === "complete") {
      this.token = null;
      this.patch({ ...base, phase: "complete" });
    } else if (state.status === "in-progress") {
      this.token = { run: state.current_run, round: state.round };
      this.patch({ ...base, phase: "awaiting-choice" });
    } else {
      this.token = null;
      this.patch({ ...base, phase: "failed", error: `session is ${state.status}` });
    }
  }
}

function describeError(err: unknown): string {
  if (err instanceof Error && err.message) {
    return err.message;
  }
  return String(err);
}
