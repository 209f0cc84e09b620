import { describe, expect, it } from "vitest";

import { RankingBoard } from "../src/ranking.js";

const FIVE = ["account-hijacking", "wallet-theft", "double-spending-attack", "replay-attack", "transaction-malleability"];

describe("ranking board", () => {
  it("blocks the decisions payload while any candidate is undecided", () => {
    const board = new RankingBoard(FIVE);
    expect(board.isComplete()).toBe(false);
    expect(() => board.decisions()).toThrow(/undecided/);
    for (const id of FIVE) board.keep(id);
    expect(board.isComplete()).toBe(true);
  });

  it("produces contiguous ranks 1..n in display order after reordering", () => {
    const board = new RankingBoard(FIVE);
    for (const id of FIVE) board.keep(id);
    board.move("transaction-malleability", 0);
    board.move("account-hijacking", 4);
    const confirmed = board.decisions().filter((d) => d.decision === "confirmed");
    const ranks = confirmed.map((d) => (d as { rank: number }).rank);
    expect(ranks).toEqual([1, 2, 3, 4, 5]);
    expect(confirmed[0]!.attack_id).toBe("transaction-malleability");
    expect(confirmed[4]!.attack_id).toBe("account-hijacking");
  });

  it("toggling two rejections leaves five confirmations of seven", () => {
    const seven = [...FIVE, "cryptomining", "selfish-mining-attack"];
    const board = new RankingBoard(seven);
    for (const id of seven) board.keep(id);
    board.toggleReject("cryptomining");
    board.toggleReject("selfish-mining-attack");
    const decisions = board.decisions();
    const confirmed = decisions.filter((d) => d.decision === "confirmed");
    const rejected = decisions.filter((d) => d.decision === "rejected");
    expect(confirmed.length).toBe(5);
    expect(rejected.map((d) => d.attack_id).sort()).toEqual([
      "cryptomining",
      "selfish-mining-attack",
    ]);
    // ranks still contiguous: rejected entries free their positions
    expect(confirmed.map((d) => (d as { rank: number }).rank)).toEqual([1, 2, 3, 4, 5]);
  });

  it("toggle twice restores a confirmation", () => {
    const board = new RankingBoard(["alpha-attack"]);
    board.toggleReject("alpha-attack");
    board.toggleReject("alpha-attack");
    expect(board.decisions()).toEqual([
      { attack_id: "alpha-attack", decision: "confirmed", rank: 1 },
    ]);
  });

  it("move clamps to the board bounds", () => {
    const board = new RankingBoard(["a-attack", "b-attack"]);
    board.move("a-attack", 99);
    expect(board.list().map((e) => e.attackId)).toEqual(["b-attack", "a-attack"]);
    board.move("a-attack", -5);
    expect(board.list().map((e) => e.attackId)).toEqual(["a-attack", "b-attack"]);
  });

  it("rejects duplicate or unknown candidates", () => {
    expect(() => new RankingBoard(["x-attack", "x-attack"])).toThrow(/duplicate/);
    const board = new RankingBoard(["x-attack"]);
    expect(() => board.keep("ghost-attack")).toThrow(/unknown/);
  });
});
