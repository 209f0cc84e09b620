/** Ranking board model: drag-ordering plus per-risk keep/reject verdicts.
 * Confirmed ranks are contiguous 1..n by construction (rank = position among
 * kept entries), and the decisions payload is only available once every
 * candidate has a verdict. */

import type { RankDecisionPayload } from "./types.js";

export type Verdict = "undecided" | "keep" | "reject";

export interface BoardEntry {
  attackId: string;
  verdict: Verdict;
}

export class RankingBoard {
  private entries: BoardEntry[];

  constructor(candidateIds: string[]) {
    const unique = new Set(candidateIds);
    if (unique.size !== candidateIds.length) {
      throw new Error("duplicate candidates on the ranking board");
    }
    this.entries = candidateIds.map((attackId) => ({ attackId, verdict: "undecided" }));
  }

  list(): readonly BoardEntry[] {
    return this.entries;
  }

  private indexOf(attackId: string): number {
    const index = this.entries.findIndex((e) => e.attackId === attackId);
    if (index < 0) {
      throw new Error(`unknown candidate ${attackId}`);
    }
    return index;
  }

  /** Drag an entry to a new position; order defines ranks of kept entries. */
  move(attackId: string, to: number): void {
    const from = this.indexOf(attackId);
    const clamped = Math.max(0, Math.min(this.entries.length - 1, to));
    const [entry] = this.entries.splice(from, 1);
    this.entries.splice(clamped, 0, entry!);
  }

  keep(attackId: string): void {
    this.entries[this.indexOf(attackId)]!.verdict = "keep";
  }

  reject(attackId: string): void {
    this.entries[this.indexOf(attackId)]!.verdict = "reject";
  }

  toggleReject(attackId: string): void {
    const entry = this.entries[this.indexOf(attackId)]!;
    entry.verdict = entry.verdict === "reject" ? "keep" : "reject";
  }

  undecided(): string[] {
    return this.entries.filter((e) => e.verdict === "undecided").map((e) => e.attackId);
  }

  /** Submission is blocked while any candidate is undecided. */
  isComplete(): boolean {
    return this.undecided().length === 0;
  }

  confirmedCount(): number {
    return this.entries.filter((e) => e.verdict === "keep").length;
  }

  /** The /rank payload: kept entries ranked 1..n in display order, then
   * rejections. Throws while the board is incomplete. */
  decisions(): RankDecisionPayload[] {
    if (!this.isComplete()) {
      throw new Error(`undecided candidates: ${this.undecided().join(", ")}`);
    }
    const confirmed: RankDecisionPayload[] = this.entries
      .filter((e) => e.verdict === "keep")
      .map((e, index) => ({ attack_id: e.attackId, decision: "confirmed", rank: index + 1 }));
    const rejected: RankDecisionPayload[] = this.entries
      .filter((e) => e.verdict === "reject")
      .map((e) => ({ attack_id: e.attackId, decision: "rejected" }));
    return [...confirmed, ...rejected];
  }
}
