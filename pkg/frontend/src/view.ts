import type { Side } from "./api.js";
import type { ClientGameView } from "./game.js";

export interface ViewActions {
  start(mode: string, rounds: number): void;
  dig(side: Side): void;
  continueRun(): void;
  dismissError(): void;
}

const SIDE_NAMES = ["left", "right"] as const;

// Shown between the two games of a paired session. Deliberately says nothing
// about how either opponent plays.
export const INTERSTITIAL_COPY =
  "That game is over. When you are ready, you will play one more game of the " +
  "same length against a different opponent. Take a breather first if you like.";

const PAGE = `
  <header class="topbar">
    <div class="run-label"></div>
    <div class="coins" title="your coins so far">
      <span class="coin-icon">&#x1FA99;</span>
      <span class="coin-count">0</span>
    </div>
    <div class="round-label"></div>
  </header>
  <div class="banner hidden" role="alert">
    <span class="banner-text"></span>
    <button type="button" class="banner-dismiss">dismiss</button>
  </div>
  <main class="scene">
    <section class="start-panel">
      <h1>Beach of Buried Pennies</h1>
      <p>
        Each round a pirate buries a coin under one of two mounds of sand.
        Dig up the right mound and the coin is yours; dig up the wrong one
        and you pay the pirate a coin. The pirate learns how you play.
      </p>
      <form class="start-form">
        <label>
          opponent
          <select class="mode-select">
            <option value="proposed">adaptive pirate</option>
            <option value="nash">coin-flip pirate</option>
            <option value="paired-study">two games, opponents hidden</option>
          </select>
        </label>
        <label>
          rounds
          <input class="rounds-input" type="number" min="1" value="150" />
        </label>
        <button type="submit" class="start-button">start digging</button>
      </form>
    </section>
    <div class="reveal hidden">
      <div class="reveal-outcome"></div>
      <div class="reveal-detail"></div>
    </div>
    <section class="play-panel hidden">
      <div class="prompt">Where do you dig?</div>
      <div class="digsite">
        <button type="button" class="dig dig-left">
          <span class="mound">&#x26F1;&#xFE0F;</span> dig left
        </button>
        <button type="button" class="dig dig-right">
          dig right <span class="mound">&#x26F1;&#xFE0F;</span>
        </button>
      </div>
      <p class="hint">tip: the left and right arrow keys dig too</p>
    </section>
    <section class="interstitial hidden">
      <h2>game complete</h2>
      <div class="interstitial-total"></div>
      <p class="interstitial-copy"></p>
      <button type="button" class="continue-button">start the next game</button>
    </section>
    <section class="summary hidden">
      <h2>all games finished</h2>
      <ol class="summary-runs"></ol>
      <div class="summary-grand"></div>
    </section>
  </main>
`;

export class GameView {
  private root: HTMLElement;
  private actions: ViewActions;

  constructor(root: HTMLElement, actions: ViewActions) {
    this.root = root;
    this.actions = actions;
    root.innerHTML = PAGE;
    this.q(".interstitial-copy").textContent = INTERSTITIAL_COPY;

    this.q<HTMLFormElement>(".start-form").addEventListener("submit", (event) => {
      event.preventDefault();
      const mode = this.q<HTMLSelectElement>(".mode-select").value;
      const rounds = Number(this.q<HTMLInputElement>(".rounds-input").value);
      this.actions.start(mode, rounds);
    });
    this.q(".dig-left").addEventListener("click", () => this.actions.dig(0));
    this.q(".dig-right").addEventListener("click", () => this.actions.dig(1));
    this.q(".continue-button").addEventListener("click", () => this.actions.continueRun());
    this.q(".banner-dismiss").addEventListener("click", () => this.actions.dismissError());
  }

  // Arrow keys mirror the two dig buttons. Returns the unbind function.
  bindKeyboard(target: Document | HTMLElement): () => void {
    const onKey = (event: Event) => {
      const key = (event as KeyboardEvent).key;
      if (key === "ArrowLeft") {
        this.actions.dig(0);
      } else if (key === "ArrowRight") {
        this.actions.dig(1);
      }
    };
    target.addEventListener("keydown", onKey);
    return () => target.removeEventListener("keydown", onKey);
  }

  private q<T extends HTMLElement = HTMLElement>(selector: string): T {
    const el = this.root.querySelector<T>(selector);
    if (el === null) {
      throw new Error(`missing element: ${selector}`);
    }
    return el;
  }

  private show(selector: string, visible: boolean): void {
    this.q(selector).classList.toggle("hidden", !visible);
  }

  render(view: ClientGameView): void {
    const playing = view.phase === "awaiting-choice" || view.phase === "submitting";
    this.show(".start-panel", view.phase === "idle" || view.phase === "failed");
    this.show(".play-panel", playing);
    this.show(".interstitial", view.phase === "run-break");
    this.show(".summary", view.phase === "complete");

    this.renderTopbar(view, playing);
    this.renderBanner(view);
    this.renderReveal(view);
    if (playing) {
      const busy = view.phase === "submitting";
      this.q<HTMLButtonElement>(".dig-left").disabled = busy;
      this.q<HTMLButtonElement>(".dig-right").disabled = busy;
      this.q(".prompt").textContent = busy ? "digging..." : "Where do you dig?";
    }
    if (view.phase === "run-break") {
      this.q(".interstitial-total").textContent = `You finished that game with ${view.coins} coins.`;
    }
    if (view.phase === "complete") {
      this.renderSummary(view);
    }
  }

  private renderTopbar(view: ClientGameView, playing: boolean): void {
    const coins = this.q(".coin-count");
    coins.textContent = String(view.coins);
    // The label never names the strategy while a paired study is running:
    // the player is not supposed to know which opponent is which until the end.
    let runLabel = "";
    if (view.sessionId !== null && view.mode !== null) {
      if (view.runs > 1) {
        runLabel = `game ${Math.min(view.currentRun + 1, view.runs)} of ${view.runs}`;
        if (view.mode === "paired-study" && view.phase !== "complete") {
          runLabel += " (opponent hidden)";
        }
      } else if (view.mode !== "paired-study") {
        runLabel = `opponent: ${view.mode}`;
      }
    }
    this.q(".run-label").textContent = runLabel;
    let roundLabel = "";
    if (playing) {
      roundLabel = `round ${Math.min(view.round + 1, view.roundsPerRun)} / ${view.roundsPerRun}`;
    }
    this.q(".round-label").textContent = roundLabel;
  }

  private renderBanner(view: ClientGameView): void {
    this.show(".banner", view.error !== null);
    this.q(".banner-text").textContent = view.error ?? "";
  }

  // The last revealed round stays on screen through the next decision; it is
  // replaced only by the following round's outcome (and survives onto the
  // between-runs and final screens so the last dig is never swallowed).
  private renderReveal(view: ClientGameView): void {
    const reveal = view.phase === "idle" || view.phase === "creating" ? null : view.reveal;
    this.show(".reveal", reveal !== null);
    if (reveal === null) {
      return;
    }
    const won = reveal.r1 > 0;
    const panel = this.q(".reveal");
    panel.classList.toggle("win", won);
    panel.classList.toggle("lose", !won);
    this.q(".reveal-outcome").textContent = won
      ? "You found the coin! +1"
      : "Empty hole. The pirate keeps a coin. -1";
    this.q(".reveal-detail").textContent =
      `you dug ${SIDE_NAMES[reveal.human]}; the coin was buried ${SIDE_NAMES[reveal.ai]}`;
  }

  private renderSummary(view: ClientGameView): void {
    const list = this.q(".summary-runs");
    list.textContent = "";
    view.runTotals.forEach((total, i) => {
      const item = document.createElement("li");
      const label = view.modesByRun?.[i] ?? "unknown";
      item.textContent = `game ${i + 1} (opponent: ${label}): ${total} coins`;
      list.appendChild(item);
    });
    const grand = view.runTotals.reduce((a, b) => a + b, 0);
    this.q(".summary-grand").textContent = `overall: ${grand} coins`;
  }
}
