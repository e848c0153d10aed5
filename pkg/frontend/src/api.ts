// Typed client for the pennymatch session service. The browser talks to the
// game exclusively through this surface; nothing in here computes outcomes.

export type Side = 0 | 1; // 0 = left, 1 = right

export interface Reveal {
  human: Side;
  ai: Side;
  r1: number; // +1 when the human's dig matched the buried coin, -1 otherwise
}

export type SessionStatus = "in-progress" | "complete" | "expired";

export interface SessionState {
  id: string;
  status: SessionStatus;
  mode: string;
  runs: number;
  rounds_per_run: number;
  current_run: number;
  round: number; // rounds already resolved in the current run
  cumulative: number; // human coin total for the current run
  last_reveal: Reveal | null;
  run_totals: number[];
  // present only once the whole session is complete; the server hides the
  // per-run strategy order of a paired study while play is in progress
  modes_by_run?: string[];
}

export interface MoveResult {
  id: string;
  run: number;
  round: number;
  human_choice: Side;
  ai_choice: Side;
  r1: number;
  cumulative: number;
  run_complete: boolean;
  session_complete: boolean;
}

export interface CreateSessionRequest {
  mode: string;
  rounds?: number;
  seed?: number;
  theta?: number;
  grid?: number[];
}

// One submission per round: the token pins {run, round} so a retried request
// can never play the same round twice (the server answers 409 instead).
export interface RoundToken {
  run: number;
  round: number;
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export function isConflict(err: unknown): boolean {
  return err instanceof ApiError && err.status === 409;
}

export interface GameService {
  createSession(req: CreateSessionRequest): Promise<SessionState>;
  getState(id: string): Promise<SessionState>;
  submitMove(id: string, choice: Side, token: RoundToken): Promise<MoveResult>;
  getTranscript(id: string): Promise<string>;
}

export class HttpGameService implements GameService {
  private baseUrl: string;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await readDetail(resp));
    }
    return (await resp.json()) as T;
  }

  createSession(req: CreateSessionRequest): Promise<SessionState> {
    return this.request("POST", "/sessions", req);
  }

  getState(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}`);
  }

  submitMove(id: string, choice: Side, token: RoundToken): Promise<MoveResult> {
    return this.request("POST", `/sessions/${encodeURIComponent(id)}/moves`, {
      choice,
      run: token.run,
      round: token.round,
    });
  }

  async getTranscript(id: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions/${encodeURIComponent(id)}/transcript`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await readDetail(resp));
    }
    return resp.text();
  }

  async healthy(): Promise<boolean> {
    try {
      const resp = await fetch(this.baseUrl + "/healthz");
      return resp.ok;
    } catch {
      return false;
    }
  }
}

async function readDetail(resp: Response): Promise<string> {
  try {
    const parsed: unknown = await resp.json();
    if (parsed && typeof parsed === "object" && "detail" in parsed) {
      const detail = (parsed as { detail: unknown }).detail;
      if (typeof detail === "string") {
        return detail;
      }
      return JSON.stringify(detail);
    }
  } catch {
    // body was not JSON; fall back to the status line
  }
  return `${resp.status} ${resp.statusText}`;
}
