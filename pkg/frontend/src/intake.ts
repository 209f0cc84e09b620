/** Intake questionnaire and the project-spec payload it produces. */

import type { ProjectSpecPayload } from "./types.js";

export interface IntakeQuestion {
  id: string;
  prompt: string;
}

/** The interview protocol shown on the first wizard page, in order. */
export const INTAKE_QUESTIONS: IntakeQuestion[] = [
  { id: "context-1", prompt: "Can you introduce your company briefly?" },
  { id: "context-2", prompt: "What is the main goal of the project? Why is it being developed?" },
  { id: "context-3", prompt: "What technologies do you use (consensus mechanisms, smart contracts, ...)?" },
  { id: "context-4", prompt: "At what stage of design or development is the project?" },
  { id: "context-5", prompt: "Has your company participated in a cybersecurity exercise before?" },
  { id: "context-6", prompt: "What would you like to see achieved at the end of this assessment?" },
  { id: "context-7", prompt: "How could a security risk assessment contribute to the organization?" },
  { id: "scope-1", prompt: "What is the scope of this security risk assessment for you?" },
  { id: "org-1", prompt: "Who is accountable for the top risks?" },
  { id: "org-2", prompt: "How is the project prepared to respond to extreme events?" },
  { id: "org-3", prompt: "Are there contradicting security needs among stakeholders?" },
  { id: "org-4", prompt: "Can the project be deployed with some risks? When is it secure enough?" },
  { id: "risk-1", prompt: "What assets need protection? What target do you wish to have analyzed?" },
  { id: "risk-2", prompt: "What worries you the most concerning your assets?" },
  { id: "risk-3", prompt: "Are you already considering identified risks during development?" },
  { id: "risk-4", prompt: "Are there risks you request to see in the assessment?" },
  { id: "risk-5", prompt: "Are there organizational blind spots that need attention?" },
  { id: "risk-6", prompt: "Are you already taking countermeasures? Which ones?" },
  { id: "risk-7", prompt: "How are you planning on keeping the project secure?" },
  { id: "closing-1", prompt: "Is any crucial information missing? Anything else to add?" },
];

export interface IntakeAnswers {
  organization: string;
  goal: string;
  technologies: string[];
  stage: string;
  scopeStatement: string;
  protectedAssets: string[];
  /** Free answers keyed by question id; unanswered questions are omitted. */
  questionnaire: Record<string, string>;
}

/** Required-field messages; empty when the form may be submitted. */
export function validateIntake(answers: IntakeAnswers): string[] {
  const messages: string[] = [];
  if (!answers.scopeStatement.trim()) {
    messages.push("scope statement is required");
  }
  if (!answers.organization.trim()) {
    messages.push("organization is required");
  }
  return messages;
}

/** Build the POST /api/sessions payload. Questionnaire answers are emitted
 * in catalog order so the server document is deterministic. */
export function buildProjectPayload(answers: IntakeAnswers): ProjectSpecPayload {
  const pairs: [string, string][] = [];
  for (const question of INTAKE_QUESTIONS) {
    const answer = answers.questionnaire[question.id];
    if (answer !== undefined && answer.trim() !== "") {
      pairs.push([question.id, answer]);
    }
  }
  return {
    organization: answers.organization,
    goal: answers.goal,
    technologies: answers.technologies,
    stage: answers.stage,
    scope_statement: answers.scopeStatement,
    protected_assets: answers.protectedAssets,
    intake_answers: pairs,
  };
}
