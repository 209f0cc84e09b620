/** KB browser model: a filterable list pane plus a detail pane whose
 * related / contributes links navigate to other records. */

import { ApiClient, AttackQuery } from "./api.js";
import type { AttackRecordPayload } from "./types.js";

export interface KbDetail {
  record: AttackRecordPayload;
  related: string[];
  contributesClosure: string[];
}

export class KbBrowser {
  attacks: AttackRecordPayload[] = [];
  detail: KbDetail | null = null;
  lastQuery: AttackQuery = {};

  constructor(private readonly api: ApiClient) {}

  async search(query: AttackQuery = {}): Promise<AttackRecordPayload[]> {
    this.lastQuery = query;
    this.attacks = await this.api.listAttacks(query);
    return this.attacks;
  }

  async select(slug: string): Promise<KbDetail> {
    const [record, related, closure] = await Promise.all([
      this.api.getAttack(slug),
      this.api.related(slug),
      this.api.contributesClosure(slug),
    ]);
    this.detail = { record, related, contributesClosure: closure };
    return this.detail;
  }

  /** Follow a relation link from the detail pane. */
  async navigate(slug: string): Promise<KbDetail> {
    return this.select(slug);
  }
}
