/** Browser entry point: wires the wizard, the KB browser, and the report
 * preview against the service the page was served next to. */

import { ApiClient } from "./api.js";
import { buildProjectPayload, renderKbBrowser, renderReportPreview, renderWizard } from "./dom.js";
import { KbBrowser } from "./kb.js";
import { WizardController } from "./wizard.js";

const BASE_URL = (window as unknown as { SRAMDA_BASE_URL?: string }).SRAMDA_BASE_URL ?? "";

async function boot(): Promise<void> {
  const api = new ApiClient(BASE_URL);
  const wizard = new WizardController(api);
  const browser = new KbBrowser(api);

  const wizardMount = document.getElementById("wizard");
  const kbMount = document.getElementById("kb-browser");
  const reportMount = document.getElementById("report");
  if (!wizardMount || !kbMount || !reportMount) {
    throw new Error("workbench mount points missing from the page");
  }

  const redraw = async () => {
    renderWizard(wizard, wizardMount, async (answers) => {
      await wizard.start(buildProjectPayload(answers));
      await redraw();
    });
    kbMount.replaceChildren(
      renderKbBrowser(browser, async (slug) => {
        await browser.select(slug);
        await redraw();
      }),
    );
    if (wizard.session && wizard.session.session.current_step === "done") {
      reportMount.replaceChildren(renderReportPreview(await wizard.reportPreview()));
    }
  };

  await browser.search();
  await redraw();
}

boot().catch((error) => {
  console.error("workbench failed to start", error);
});
