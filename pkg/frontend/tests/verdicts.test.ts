// Verdict flow: applied, conflict-reconciled, and draft-with-retry paths.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { VerdictFlow } from "../src/verdicts";
import {
  freshState,
  installFixtureServer,
  makeFixtureItem,
  settleServerSide,
  type FixtureState,
} from "./fixtureServer";

let state: FixtureState;
let flow: VerdictFlow;

beforeEach(() => {
  state = freshState([
    makeFixtureItem("i-1", 0.9, "claim one"),
    makeFixtureItem("i-2", 0.8, "claim two"),
  ]);
  installFixtureServer(state);
  flow = new VerdictFlow(new ApiClient("", "reviewer-1"));
});

describe("VerdictFlow", () => {
  it("applies a verdict and reports the server's new status", async () => {
    const outcome = await flow.submit("i-1", "accept", "note");
    expect(outcome.kind).toBe("applied");
    if (outcome.kind === "applied") expect(outcome.item.status).toBe("accepted");
    expect(state.items.get("i-1")!.summary.status).toBe("accepted");
  });

  it("reconciles to server state on conflict", async () => {
    settleServerSide(state, "i-1", "rejected");
    const outcome = await flow.submit("i-1", "accept", "");
    expect(outcome.kind).toBe("conflict");
    if (outcome.kind === "conflict") expect(outcome.detail.status).toBe("rejected");
    // server state untouched by the losing verdict
    expect(state.items.get("i-1")!.summary.status).toBe("rejected");
  });

  it("parks the verdict as a draft on network failure and retries it", async () => {
    state.failNextRequests = 1;
    const outcome = await flow.submit("i-2", "accept", "offline note");
    expect(outcome.kind).toBe("draft");
    expect(flow.hasDraft("i-2")).toBe(true);
    expect(state.items.get("i-2")!.summary.status).toBe("pending");

    const retried = await flow.retryDrafts();
    expect(retried).toHaveLength(1);
    expect(retried[0]!.kind).toBe("applied");
    expect(flow.hasDraft("i-2")).toBe(false);
    expect(state.items.get("i-2")!.summary.status).toBe("accepted");
  });

  it("drops the draft if the retry hits a conflict (server already settled)", async () => {
    state.failNextRequests = 1;
    await flow.submit("i-2", "accept", "");
    settleServerSide(state, "i-2", "rejected");
    const retried = await flow.retryDrafts();
    expect(retried[0]!.kind).toBe("conflict");
    expect(flow.hasDraft("i-2")).toBe(false);
    expect(state.items.get("i-2")!.summary.status).toBe("rejected");
  });
});
