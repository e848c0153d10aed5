import {
  ApiError,
  type CreateSessionRequest,
  type GameService,
  type MoveResult,
  type SessionState,
  type Side,
} from "../src/api.js";

interface RoundRecord {
  t: number;
  u1: Side;
  u2: Side;
  r1: number;
}

export interface FakeOptions {
  // one array of buried-coin sides per run; runs = aiMoves.length
  aiMoves: Side[][];
  runModes: string[]; // real per-run strategies, disclosed only at the end
  seed?: number;
}

// In-memory stand-in for the session service, scripted so tests know where
// every coin is buried. Same round-token and disclosure rules as the server:
// a stale {run, round} gets a 409, and runModes stay hidden while playing.
export class FakeService implements GameService {
  readonly sid = "fake-session";
  rounds = 0;
  mode = "";
  private seed: number;
  private aiMoves: Side[][];
  private runModes: string[];
  private records: RoundRecord[][];
  private currentRun = 0;
  private status: "in-progress" | "complete" = "in-progress";

  // instrumentation for the no-double-submission contract
  attempts = 0; // submitMove calls that reached the service at all
  applied = new Map<string, number>(); // "run:t" -> times that round was scored

  // failure injection
  failBeforeApply = 0; // next N submissions die before touching state
  failAfterApply = 0; // next N submissions score the round, then lose the response
  private held: Array<() => void> = [];
  holdSubmissions = false;

  constructor(opts: FakeOptions) {
    this.aiMoves = opts.aiMoves;
    this.runModes = opts.runModes;
    this.seed = opts.seed ?? 7;
    this.records = opts.aiMoves.map(() => []);
    if (opts.aiMoves.length !== opts.runModes.length) {
      throw new Error("one mode per run required");
    }
  }

  releaseHeld(): void {
    const waiting = this.held;
    this.held = [];
    for (const release of waiting) {
      release();
    }
  }

  async createSession(req: CreateSessionRequest): Promise<SessionState> {
    this.mode = req.mode;
    this.rounds = req.rounds ?? 150;
    for (const moves of this.aiMoves) {
      if (moves.length < this.rounds) {
        throw new Error(`script has ${moves.length} moves, session wants ${this.rounds}`);
      }
    }
    return this.stateView();
  }

  async getState(id: string): Promise<SessionState> {
    this.checkId(id);
    return this.stateView();
  }

  async submitMove(
    id: string,
    choice: Side,
    token: { run: number; round: number },
  ): Promise<MoveResult> {
    this.checkId(id);
    if (this.holdSubmissions) {
      await new Promise<void>((resolve) => this.held.push(resolve));
    }
    if (this.failBeforeApply > 0) {
      this.failBeforeApply -= 1;
      throw new TypeError("fetch failed");
    }
    this.attempts += 1;
    if (this.status !== "in-progress") {
      throw new ApiError(409, `session is ${this.status}`);
    }
    const run = this.currentRun;
    const t = this.records[run]!.length;
    if (token.run !== run || token.round !== t) {
      throw new ApiError(409, `round mismatch: expected run ${run} round ${t}`);
    }
    if (choice !== 0 && choice !== 1) {
      throw new ApiError(400, `choice must be 0 or 1, got ${choice}`);
    }
    const u2 = this.aiMoves[run]![t]!;
    const r1 = choice === u2 ? 1 : -1; // the dig wins exactly on a match
    this.records[run]!.push({ t, u1: choice, u2, r1 });
    const key = `${run}:${t}`;
    this.applied.set(key, (this.applied.get(key) ?? 0) + 1);

    const runComplete = this.records[run]!.length >= this.rounds;
    if (runComplete) {
      if (run + 1 < this.aiMoves.length) {
        this.currentRun = run + 1;
      } else {
        this.status = "complete";
      }
    }
    if (this.failAfterApply > 0) {
      this.failAfterApply -= 1;
      throw new TypeError("fetch failed");
    }
    return {
      id: this.sid,
      run,
      round: t,
      human_choice: choice,
      ai_choice: u2,
      r1,
      cumulative: this.total(run),
      run_complete: runComplete,
      session_complete: this.status === "complete",
    };
  }

  async getTranscript(id: string): Promise<string> {
    this.checkId(id);
    if (this.status !== "complete") {
      throw new ApiError(409, `session is ${this.status}`);
    }
    let text = "";
    this.records.forEach((records, run) => {
      text +=
        `# pennymatch-transcript v1 ai=${this.runModes[run]} opponent=human ` +
        `rounds=${this.rounds} theta=1.5 grid=0.1,0.3,0.5,0.7,0.9 seed=${this.seed}\n`;
      for (const record of records) {
        text += `${record.t},${record.u1},${record.u2},${record.r1}\n`;
      }
    });
    return text;
  }

  private checkId(id: string): void {
    if (id !== this.sid) {
      throw new ApiError(404, `unknown session: ${id}`);
    }
  }

  private total(run: number): number {
    return this.records[run]!.reduce((acc, record) => acc + record.r1, 0);
  }

  private stateView(): SessionState {
    const records = this.records[this.currentRun]!;
    const last = records.length > 0 ? records[records.length - 1]! : null;
    const state: SessionState = {
      id: this.sid,
      status: this.status,
      mode: this.mode,
      runs: this.aiMoves.length,
      rounds_per_run: this.rounds,
      current_run: this.currentRun,
      round: records.length,
      cumulative: this.total(this.currentRun),
      last_reveal: last === null ? null : { human: last.u1, ai: last.u2, r1: last.r1 },
      run_totals: this.records
        .map((records, i) => (records.length >= this.rounds ? this.total(i) : null))
        .filter((total): total is number => total !== null),
    };
    if (this.status === "complete") {
      state.modes_by_run = [...this.runModes];
    }
    return state;
  }
}

// Partial coin sums per round, read back out of the transcript text. This is
// the independent ledger the UI's displayed count is checked against.
export function transcriptCoinSeries(text: string): number[][] {
  const series: number[][] = [];
  let current: number[] | null = null;
  let total = 0;
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      current = [];
      series.push(current);
      total = 0;
    } else if (line.trim() !== "") {
      const parts = line.split(",");
      total += Number(parts[3]);
      current!.push(total);
    }
  }
  return series;
}
