/** Wizard state: a client-side mirror of the server session.
 *
 * Mutations are submit-then-refresh: the controller posts, adopts the
 * server's document as the new truth, and clears pending edits. The active
 * wizard page can never move ahead of the server's current step; a 409
 * (stale step) triggers a re-sync with the server. Validation messages from
 * the last 4xx response are kept for rendering next to the offending form. */

import { ApiClient, ApiError } from "./api.js";
import type {
  AnnotationPayload,
  AttackRecordPayload,
  CountermeasurePayload,
  MotivationPayload,
  ProjectSpecPayload,
  RankDecisionPayload,
  SessionDoc,
  StepName,
} from "./types.js";

/** Wizard pages in workflow order (the intake page precedes a session). */
export const WIZARD_STEPS: StepName[] = [
  "motivations",
  "domains",
  "identify",
  "analyze",
  "rank",
  "countermeasures",
  "done",
];

const STEP_INDEX = new Map(WIZARD_STEPS.map((step, index) => [step, index]));

export function stepIndex(step: StepName): number {
  const index = STEP_INDEX.get(step);
  if (index === undefined) {
    throw new Error(`unknown wizard step ${step}`);
  }
  return index;
}

export class WizardController {
  session: SessionDoc | null = null;
  validationMessages: string[] = [];
  /** Unsubmitted form state for the page being edited; cleared on success. */
  pendingEdits: Record<string, unknown> = {};
  /** Explicitly viewed page; null means "follow the server's progress". */
  private requestedStep: StepName | null = null;

  constructor(private readonly api: ApiClient) {}

  get sessionId(): string {
    if (!this.session) {
      throw new Error("no session started");
    }
    return this.session.session.id;
  }

  get serverStep(): StepName {
    return this.session ? this.session.session.current_step : "spec";
  }

  /** The page shown: follows the server's progress unless the analyst
   * navigated to an earlier page; never ahead of the server's step. */
  get activeStep(): StepName {
    if (!this.session) {
      return "motivations";
    }
    const server = stepIndex(this.serverStep);
    if (this.requestedStep === null) {
      return WIZARD_STEPS[server]!;
    }
    return WIZARD_STEPS[Math.min(server, stepIndex(this.requestedStep))]!;
  }

  goTo(step: StepName): StepName {
    this.requestedStep = step;
    return this.activeStep;
  }

  async resync(): Promise<void> {
    if (this.session) {
      this.session = await this.api.getSession(this.sessionId);
    }
  }

  /** Run one mutating call; adopt the fresh document, or on failure capture
   * messages (and re-sync when the step went stale). Rethrows. */
  private async submit(call: () => Promise<SessionDoc>): Promise<SessionDoc> {
    try {
      const doc = await call();
      this.session = doc;
      this.pendingEdits = {};
      this.validationMessages = [];
      this.requestedStep = null; // follow the server again after a mutation
      return doc;
    } catch (error) {
      if (error instanceof ApiError) {
        if (error.status === 409) {
          await this.resync();
        }
        if (error.status >= 400 && error.status < 500) {
          this.validationMessages = error.body.violations
            ? error.body.violations.map((v) => `${v.field}: ${v.message}`)
            : [error.body.detail];
        }
      }
      throw error;
    }
  }

  async start(project: ProjectSpecPayload): Promise<SessionDoc> {
    return this.submit(() => this.api.createSession(project));
  }

  async submitMotivation(motivation: MotivationPayload): Promise<SessionDoc> {
    return this.submit(() => this.api.postMotivation(this.sessionId, motivation));
  }

  async submitAnnotation(annotation: AnnotationPayload): Promise<SessionDoc> {
    return this.submit(() => this.api.postAnnotation(this.sessionId, annotation));
  }

  async runIdentification(): Promise<SessionDoc> {
    return this.submit(() => this.api.identify(this.sessionId));
  }

  async registerNewRisk(
    record: AttackRecordPayload,
    matchedMotivations: string[],
  ): Promise<SessionDoc> {
    return this.submit(() => this.api.registerNewRisk(this.sessionId, record, matchedMotivations));
  }

  async submitAnalysis(attackId: string, scenario: string): Promise<SessionDoc> {
    return this.submit(() => this.api.postAnalysis(this.sessionId, attackId, scenario));
  }

  async submitRanking(decisions: RankDecisionPayload[]): Promise<SessionDoc> {
    return this.submit(() => this.api.rank(this.sessionId, decisions));
  }

  async submitCountermeasures(
    attackId: string,
    countermeasures: CountermeasurePayload[],
  ): Promise<SessionDoc> {
    return this.submit(() => this.api.attachCountermeasures(this.sessionId, attackId, countermeasures));
  }

  async finalize(): Promise<SessionDoc> {
    return this.submit(() => this.api.finalize(this.sessionId));
  }

  /** The report preview; identical bytes to GET /api/sessions/{id}/report. */
  async reportPreview(): Promise<string> {
    return this.api.report(this.sessionId);
  }

  candidateIds(): string[] {
    return (this.session?.session.risks ?? []).map((risk) => risk.attack_id);
  }

  unanalyzedCandidates(): string[] {
    return (this.session?.session.risks ?? [])
      .filter((risk) => !risk.scenario)
      .map((risk) => risk.attack_id);
  }
}
