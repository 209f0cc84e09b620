/** Minimal DOM rendering for the workbench. Everything shown is rebuilt
 * from the controller state after each call, keeping the view a pure
 * function of the server-confirmed documents. */

import { INTAKE_QUESTIONS, IntakeAnswers, buildProjectPayload, validateIntake } from "./intake.js";
import { KbBrowser } from "./kb.js";
import { RankingBoard } from "./ranking.js";
import type { SessionBody } from "./types.js";
import { WIZARD_STEPS, WizardController } from "./wizard.js";

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function renderStepRail(current: string): HTMLElement {
  const items = WIZARD_STEPS.map((step) =>
    el("li", { class: step === current ? "step active" : "step" }, [step]),
  );
  return el("ol", { class: "step-rail" }, items);
}

export function renderValidation(messages: string[]): HTMLElement {
  return el(
    "ul",
    { class: "validation" },
    messages.map((m) => el("li", { class: "validation-message" }, [m])),
  );
}

export function renderIntakeForm(
  onSubmit: (answers: IntakeAnswers) => void,
): HTMLElement {
  const form = el("form", { class: "intake" });
  const field = (name: string, label: string) => {
    const input = el("input", { name, id: `intake-${name}` }) as HTMLInputElement;
    form.append(el("label", { for: `intake-${name}` }, [label]), input);
    return input;
  };
  const organization = field("organization", "Organization");
  const goal = field("goal", "Goal");
  const technologies = field("technologies", "Technologies (comma-separated)");
  const stage = field("stage", "Stage");
  const scope = field("scope", "Scope statement (required)");
  const assets = field("assets", "Protected assets (comma-separated)");

  const questionInputs = new Map<string, HTMLTextAreaElement>();
  for (const question of INTAKE_QUESTIONS) {
    const area = el("textarea", { id: `q-${question.id}` }) as HTMLTextAreaElement;
    form.append(el("label", { for: `q-${question.id}` }, [question.prompt]), area);
    questionInputs.set(question.id, area);
  }

  const errors = el("div", { class: "intake-errors" });
  form.append(errors, el("button", { type: "submit" }, ["Start assessment"]));
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const split = (value: string) =>
      value.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
    const answers: IntakeAnswers = {
      organization: organization.value,
      goal: goal.value,
      technologies: split(technologies.value),
      stage: stage.value,
      scopeStatement: scope.value,
      protectedAssets: split(assets.value),
      questionnaire: Object.fromEntries(
        [...questionInputs].map(([id, area]) => [id, area.value]),
      ),
    };
    const messages = validateIntake(answers);
    errors.replaceChildren(renderValidation(messages));
    if (messages.length === 0) {
      onSubmit(answers);
    }
  });
  return form;
}

export function renderRiskTable(session: SessionBody): HTMLElement {
  const header = el("tr", {}, [
    el("th", {}, ["Attack"]),
    el("th", {}, ["Motivations"]),
    el("th", {}, ["Layers"]),
    el("th", {}, ["Harmed assets"]),
    el("th", {}, ["Status"]),
    el("th", {}, ["Rank"]),
  ]);
  const rows = session.risks.map((risk) =>
    el("tr", { "data-attack": risk.attack_id }, [
      el("td", {}, [risk.name]),
      el("td", {}, [risk.matched_motivations.join(", ")]),
      el("td", {}, [risk.impacted_layers.join(", ")]),
      el("td", {}, [risk.harmed_assets.join(", ")]),
      el("td", {}, [risk.status]),
      el("td", {}, [risk.rank === null ? "-" : String(risk.rank)]),
    ]),
  );
  return el("table", { class: "risks" }, [header, ...rows]);
}

export function renderRankingBoard(
  board: RankingBoard,
  onChange: () => void,
): HTMLElement {
  const list = el("ul", { class: "ranking-board" });
  board.list().forEach((entry, index) => {
    const up = el("button", { type: "button", class: "move-up" }, ["up"]);
    up.addEventListener("click", () => {
      board.move(entry.attackId, index - 1);
      onChange();
    });
    const down = el("button", { type: "button", class: "move-down" }, ["down"]);
    down.addEventListener("click", () => {
      board.move(entry.attackId, index + 1);
      onChange();
    });
    const keep = el("button", { type: "button", class: "keep" }, ["confirm"]);
    keep.addEventListener("click", () => {
      board.keep(entry.attackId);
      onChange();
    });
    const reject = el("button", { type: "button", class: "reject" }, ["reject"]);
    reject.addEventListener("click", () => {
      board.toggleReject(entry.attackId);
      onChange();
    });
    list.append(
      el("li", { class: `verdict-${entry.verdict}`, "data-attack": entry.attackId }, [
        `${index + 1}. ${entry.attackId} [${entry.verdict}]`,
        up,
        down,
        keep,
        reject,
      ]),
    );
  });
  return list;
}

export function renderKbBrowser(browser: KbBrowser, onNavigate: (slug: string) => void): HTMLElement {
  const listPane = el(
    "ul",
    { class: "kb-list" },
    browser.attacks.map((attack) => {
      const link = el("a", { href: `#${attack.id}` }, [attack.name]);
      link.addEventListener("click", () => onNavigate(attack.id));
      return el("li", {}, [link]);
    }),
  );
  const detailPane = el("div", { class: "kb-detail" });
  const detail = browser.detail;
  if (detail) {
    detailPane.append(
      el("h3", {}, [detail.record.name]),
      el("p", {}, [detail.record.description]),
      el("p", {}, [`Layers: ${detail.record.impacted_layers.join(", ")}`]),
      el("p", {}, [`Harmed assets: ${detail.record.harmed_assets.join(", ")}`]),
    );
    const relation = (title: string, slugs: string[]) => {
      const links = slugs.map((slug) => {
        const a = el("a", { href: `#${slug}` }, [slug]);
        a.addEventListener("click", () => onNavigate(slug));
        return el("li", {}, [a]);
      });
      detailPane.append(el("h4", {}, [title]), el("ul", {}, links));
    };
    relation("Related attacks", detail.related);
    relation("Contributes to (transitively)", detail.contributesClosure);
  }
  return el("div", { class: "kb-browser" }, [listPane, detailPane]);
}

export function renderReportPreview(markdown: string): HTMLElement {
  return el("pre", { class: "report-preview" }, [markdown]);
}

export function renderWizard(
  controller: WizardController,
  mount: HTMLElement,
  onIntake: (answers: IntakeAnswers) => void,
): void {
  mount.replaceChildren();
  if (!controller.session) {
    mount.append(renderIntakeForm(onIntake));
    return;
  }
  mount.append(
    renderStepRail(controller.activeStep),
    renderValidation(controller.validationMessages),
    renderRiskTable(controller.session.session),
  );
}

export { buildProjectPayload };
