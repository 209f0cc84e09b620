/** Typed client for the assessment service. All state the workbench shows
 * comes through this client; no business rule lives only in the browser. */

import type {
  AnnotationPayload,
  AttackRecordPayload,
  CountermeasurePayload,
  ErrorBody,
  KbStatsPayload,
  MotivationPayload,
  ProjectSpecPayload,
  RankDecisionPayload,
  SessionDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(`${body.error}: ${body.detail}`);
  }
}

export interface AttackQuery {
  layer?: string[];
  motivation?: string[];
  asset?: string[];
  q?: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const contentType = response.headers.get("content-type") ?? "";
    if (!response.ok) {
      let errorBody: ErrorBody;
      try {
        errorBody = (await response.json()) as ErrorBody;
      } catch {
        errorBody = { error: "HttpError", detail: response.statusText };
      }
      throw new ApiError(response.status, errorBody);
    }
    if (contentType.startsWith("text/")) {
      return response.text();
    }
    return response.json();
  }

  // -- knowledge base ------------------------------------------------------

  listAttacks(query: AttackQuery = {}): Promise<AttackRecordPayload[]> {
    const params = new URLSearchParams();
    for (const layer of query.layer ?? []) params.append("layer", layer);
    for (const m of query.motivation ?? []) params.append("motivation", m);
    for (const asset of query.asset ?? []) params.append("asset", asset);
    if (query.q) params.append("q", query.q);
    const suffix = params.toString() ? `?${params.toString()}` : "";
    return this.request("GET", `/api/kb/attacks${suffix}`) as Promise<AttackRecordPayload[]>;
  }

  getAttack(slug: string): Promise<AttackRecordPayload> {
    return this.request("GET", `/api/kb/attacks/${slug}`) as Promise<AttackRecordPayload>;
  }

  stats(): Promise<KbStatsPayload> {
    return this.request("GET", "/api/kb/stats") as Promise<KbStatsPayload>;
  }

  related(slug: string): Promise<string[]> {
    return this.request("GET", `/api/kb/graph/${slug}/related`) as Promise<string[]>;
  }

  contributesClosure(slug: string): Promise<string[]> {
    return this.request("GET", `/api/kb/graph/${slug}/contributes-closure`) as Promise<string[]>;
  }

  // -- sessions --------------------------------------------------------------

  createSession(project: ProjectSpecPayload): Promise<SessionDoc> {
    return this.request("POST", "/api/sessions", project) as Promise<SessionDoc>;
  }

  getSession(id: string): Promise<SessionDoc> {
    return this.request("GET", `/api/sessions/${id}`) as Promise<SessionDoc>;
  }

  postMotivation(id: string, motivation: MotivationPayload): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/motivations`, motivation) as Promise<SessionDoc>;
  }

  postAnnotation(id: string, annotation: AnnotationPayload): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/annotations`, annotation) as Promise<SessionDoc>;
  }

  identify(id: string): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/identify`) as Promise<SessionDoc>;
  }

  registerNewRisk(
    id: string,
    record: AttackRecordPayload,
    matchedMotivations: string[],
  ): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/new-risk`, {
      record,
      matched_motivations: matchedMotivations,
    }) as Promise<SessionDoc>;
  }

  postAnalysis(id: string, attackId: string, scenario: string): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/analysis`, {
      attack_id: attackId,
      scenario,
    }) as Promise<SessionDoc>;
  }

  rank(id: string, decisions: RankDecisionPayload[]): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/rank`, { decisions }) as Promise<SessionDoc>;
  }

  attachCountermeasures(
    id: string,
    attackId: string,
    countermeasures: CountermeasurePayload[],
  ): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/countermeasures`, {
      attack_id: attackId,
      countermeasures,
    }) as Promise<SessionDoc>;
  }

  finalize(id: string): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${id}/finalize`) as Promise<SessionDoc>;
  }

  report(id: string): Promise<string> {
    return this.request("GET", `/api/sessions/${id}/report`) as Promise<string>;
  }
}
