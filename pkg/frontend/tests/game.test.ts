import { describe, expect, it } from "vitest";

import type { Side } from "../src/api.js";
import { GameClient, type ClientGameView } from "../src/game.js";
import { FakeService, transcriptCoinSeries } from "./fake_service.js";

function recordCoins(client: GameClient): number[] {
  // coin count after each resolved round, as a subscriber would chart it;
  // consecutive rounds always differ by one coin, so a change marks a resolve
  const seen: number[] = [];
  client.subscribe((view) => {
    if (view.phase === "submitting" || view.reveal === null) {
      return;
    }
    if (view.coins !== seen[seen.length - 1]) {
      seen.push(view.coins);
    }
  });
  return seen;
}

describe("GameClient", () => {
  it("plays a scripted five round session that mirrors the service transcript", async () => {
    const fake = new FakeService({ aiMoves: [[1, 0, 0, 1, 1]], runModes: ["proposed"] });
    const client = new GameClient(fake);
    const human: Side[] = [1, 1, 0, 0, 1];
    const coinsSeen: number[] = [];

    await client.start({ mode: "proposed", rounds: 5 });
    expect(client.snapshot().phase).toBe("awaiting-choice");
    for (const side of human) {
      await client.choose(side);
      coinsSeen.push(client.snapshot().coins);
    }

    expect(client.snapshot().phase).toBe("complete");
    const ledger = transcriptCoinSeries(await fake.getTranscript(fake.sid));
    expect(ledger).toEqual([[1, 0, 1, 0, 1]]);
    expect(coinsSeen).toEqual(ledger[0]);
    expect(fake.attempts).toBe(5);
    expect([...fake.applied.values()]).toEqual([1, 1, 1, 1, 1]);
  });

  it("reveals a win on a match and a loss on a mismatch", async () => {
    const fake = new FakeService({ aiMoves: [[1, 1]], runModes: ["nash"] });
    const client = new GameClient(fake);
    await client.start({ mode: "nash", rounds: 2 });

    await client.choose(1);
    let reveal = client.snapshot().reveal;
    expect(reveal).toEqual({ human: 1, ai: 1, r1: 1 });
    expect(client.snapshot().coins).toBe(1);

    await client.choose(0);
    reveal = client.snapshot().reveal;
    expect(reveal).toEqual({ human: 0, ai: 1, r1: -1 });
    expect(client.snapshot().coins).toBe(0);
  });

  it("ignores a second choice while one is already pending", async () => {
    const fake = new FakeService({ aiMoves: [[0, 0]], runModes: ["nash"] });
    const client = new GameClient(fake);
    await client.start({ mode: "nash", rounds: 2 });

    fake.holdSubmissions = true;
    const first = client.choose(0);
    expect(client.snapshot().phase).toBe("submitting");
    const second = client.choose(1); // the double click
    fake.holdSubmissions = false;
    fake.releaseHeld();
    await Promise.all([first, second]);

    expect(fake.attempts).toBe(1);
    expect(fake.applied.get("0:0")).toBe(1);
    expect(client.snapshot().round).toBe(1);
    expect(client.snapshot().reveal).toEqual({ human: 0, ai: 0, r1: 1 });
  });

  it("offers a retry after a network failure and still plays the round once", async () => {
    const fake = new FakeService({ aiMoves: [[1, 0]], runModes: ["proposed"] });
    const client = new GameClient(fake);
    await client.start({ mode: "proposed", rounds: 2 });

    fake.failBeforeApply = 1;
    await client.choose(1);
    let view = client.snapshot();
    expect(view.phase).toBe("awaiting-choice");
    expect(view.error).toMatch(/never scored twice/);
    expect(view.round).toBe(0);
    expect(fake.applied.size).toBe(0);

    await client.choose(1); // the retry
    view = client.snapshot();
    expect(view.error).toBeNull();
    expect(view.round).toBe(1);
    expect(view.coins).toBe(1);
    expect(fake.applied.get("0:0")).toBe(1);
  });

  it("recovers from a lost response without double playing the round", async () => {
    const fake = new FakeService({ aiMoves: [[1, 0, 1]], runModes: ["proposed"] });
    const client = new GameClient(fake);
    await client.start({ mode: "proposed", rounds: 3 });

    // the move lands server side but the response never arrives
    fake.failAfterApply = 1;
    await client.choose(1);
    expect(client.snapshot().error).toMatch(/never scored twice/);
    expect(fake.applied.get("0:0")).toBe(1);

    // the retry carries the same round token, gets a 409, and resyncs
    await client.choose(0);
    const view = client.snapshot();
    expect(view.phase).toBe("awaiting-choice");
    expect(view.round).toBe(1);
    expect(view.coins).toBe(1); // the recorded move was the original side 1
    expect(view.reveal).toEqual({ human: 1, ai: 1, r1: 1 });
    expect(fake.applied.get("0:0")).toBe(1);
    expect(fake.applied.get("0:1")).toBeUndefined();

    await client.choose(0);
    await client.choose(1);
    expect(client.snapshot().phase).toBe("complete");
    expect([...fake.applied.values()]).toEqual([1, 1, 1]);
  });

  it("walks a paired study through the interstitial and discloses modes at the end", async () => {
    const fake = new FakeService({
      aiMoves: [
        [0, 1],
        [1, 0],
      ],
      runModes: ["nash", "proposed"],
    });
    const client = new GameClient(fake);
    await client.start({ mode: "paired-study", rounds: 2 });

    await client.choose(0);
    expect(client.snapshot().modesByRun).toBeNull();
    await client.choose(1);

    let view = client.snapshot();
    expect(view.phase).toBe("run-break");
    expect(view.coins).toBe(2);
    expect(view.runTotals).toEqual([2]);
    expect(view.modesByRun).toBeNull(); // still hidden between runs

    await client.continueToNextRun();
    view = client.snapshot();
    expect(view.phase).toBe("awaiting-choice");
    expect(view.currentRun).toBe(1);
    expect(view.round).toBe(0);
    expect(view.coins).toBe(0);
    expect(view.reveal).toBeNull();

    await client.choose(0);
    await client.choose(0);
    view = client.snapshot();
    expect(view.phase).toBe("complete");
    expect(view.runTotals).toEqual([2, 0]);
    expect(view.modesByRun).toEqual(["nash", "proposed"]);
  });

  it("refuses to start over the top of a running session", async () => {
    const fake = new FakeService({ aiMoves: [[0]], runModes: ["nash"] });
    const client = new GameClient(fake);
    await client.start({ mode: "nash", rounds: 1 });
    const before = client.snapshot();
    await client.start({ mode: "nash", rounds: 1 });
    expect(client.snapshot()).toEqual(before);
  });

  it("reports every server state change to subscribers and honors unsubscribe", async () => {
    const fake = new FakeService({ aiMoves: [[0, 0]], runModes: ["nash"] });
    const client = new GameClient(fake);
    const phases: string[] = [];
    const unsubscribe = client.subscribe((view: ClientGameView) => phases.push(view.phase));

    await client.start({ mode: "nash", rounds: 2 });
    await client.choose(0);
    expect(phases).toEqual(["creating", "awaiting-choice", "submitting", "awaiting-choice"]);

    unsubscribe();
    await client.choose(0);
    expect(phases.length).toBe(4);
  });

  it("keeps the coin ledger aligned with the transcript even across a lost response", async () => {
    const fake = new FakeService({ aiMoves: [[1, 0, 0, 1, 1]], runModes: ["proposed"] });
    const client = new GameClient(fake);
    const coinsSeen = recordCoins(client);
    await client.start({ mode: "proposed", rounds: 5 });

    fake.failAfterApply = 1;
    await client.choose(1); // lands, response lost
    await client.choose(1); // 409 -> resync shows round 1 awaiting
    for (const side of [1, 0, 0, 1] as Side[]) {
      await client.choose(side);
    }

    expect(client.snapshot().phase).toBe("complete");
    const ledger = transcriptCoinSeries(await fake.getTranscript(fake.sid));
    expect(client.snapshot().coins).toBe(ledger[0]![4]);
    expect([...fake.applied.values()]).toEqual([1, 1, 1, 1, 1]);
    // every displayed total appeared in transcript order, none invented
    expect(coinsSeen).toEqual(ledger[0]);
  });
});
