// Queue rendering: API order preserved, scores at two decimals, status chips.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { renderQueue } from "../src/queue";
import { makeFixtureItem } from "./fixtureServer";

function container(): HTMLElement {
  document.body.innerHTML = `<nav id="queue"></nav>`;
  return document.getElementById("queue")!;
}

describe("renderQueue", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders rows exactly in the order the API returned", () => {
    // deliberately not score-sorted: the client must not reorder
    const items = [
      makeFixtureItem("i-b", 0.55, "claim b").summary,
      makeFixtureItem("i-a", 0.91, "claim a").summary,
      makeFixtureItem("i-c", 0.62, "claim c").summary,
    ];
    const element = container();
    renderQueue(element, items, null, { onSelect: () => {} });
    const ids = Array.from(element.querySelectorAll<HTMLElement>(".queue-row")).map(
      (row) => row.dataset.itemId,
    );
    expect(ids).toEqual(["i-b", "i-a", "i-c"]);
  });

  it("formats scores with two decimals", () => {
    const element = container();
    renderQueue(element, [makeFixtureItem("i-1", 0.9, "claim").summary], null, {
      onSelect: () => {},
    });
    expect(element.querySelector(".queue-score")!.textContent).toBe("0.90");
  });

  it("shows a status chip per row reflecting server state", () => {
    const element = container();
    renderQueue(
      element,
      [
        makeFixtureItem("i-1", 0.9, "claim one").summary,
        makeFixtureItem("i-2", 0.8, "claim two", "accepted").summary,
      ],
      null,
      { onSelect: () => {} },
    );
    const chips = Array.from(element.querySelectorAll<HTMLElement>(".chip")).map(
      (chip) => chip.dataset.status,
    );
    expect(chips).toEqual(["pending", "accepted"]);
  });

  it("marks the selected row and fires onSelect with the item id", () => {
    const element = container();
    const onSelect = vi.fn();
    renderQueue(
      element,
      [makeFixtureItem("i-1", 0.9, "one").summary, makeFixtureItem("i-2", 0.8, "two").summary],
      "i-2",
      { onSelect },
    );
    expect(element.querySelector(".queue-row.selected")!.getAttribute("data-item-id")).toBe("i-2");
    (element.querySelector('[data-item-id="i-1"]') as HTMLElement).click();
    expect(onSelect).toHaveBeenCalledWith("i-1");
  });

  it("renders an empty notice instead of a blank pane", () => {
    const element = container();
    renderQueue(element, [], null, { onSelect: () => {} });
    expect(element.textContent).toContain("No flagged claims");
  });

  it("escapes claim text", () => {
    const element = container();
    const item = makeFixtureItem("i-x", 0.5, '<script>alert("x")</script>').summary;
    renderQueue(element, [item], null, { onSelect: () => {} });
    expect(element.querySelector("script")).toBeNull();
    expect(element.querySelector(".queue-claim")!.textContent).toContain("<script>");
  });
});
