/** Browser bootstrap: wires DOM events to the controller and re-renders
 * the panels after every interaction. */

import { ApiClient } from "./api.js";
import { renderApp } from "./render.js";
import { Controller } from "./store.js";

const api = new ApiClient("");
const controller = new Controller(api);

function rerender(): void {
  const rootEl = document.getElementById("app");
  if (rootEl) rootEl.innerHTML = renderApp(controller.state);
}

function bindTopBar(): void {
  const planBtn = document.getElementById("plan-button");
  planBtn?.addEventListener("click", async () => {
    const domain = (document.getElementById("domain-input") as HTMLTextAreaElement).value;
    const problem = (document.getElementById("problem-input") as HTMLTextAreaElement).value;
    await controller.startSession(domain, problem);
    rerender();
  });

  const compareBtn = document.getElementById("compare-button");
  compareBtn?.addEventListener("click", async () => {
    const ids = controller.state.nodes.map((n) => n.id);
    await controller.runCompare(ids, controller.state.metrics);
    rerender();
  });

  const noteBtn = document.getElementById("note-button");
  noteBtn?.addEventListener("click", async () => {
    const input = document.getElementById("note-input") as HTMLInputElement;
    await controller.addAnnotation(input.value);
    input.value = "";
    rerender();
  });
}

function bindDelegatedClicks(): void {
  document.getElementById("app")?.addEventListener("click", async (ev) => {
    const target = ev.target as HTMLElement;
    const stepEl = target.closest<HTMLElement>(".step");
    if (stepEl) {
      await controller.selectStep(Number(stepEl.dataset.plan), Number(stepEl.dataset.step));
      rerender();
      return;
    }
    const altEl = target.closest<HTMLElement>(".alternative");
    if (altEl && altEl.dataset.action) {
      await controller.chooseAlternative(altEl.dataset.action);
      rerender();
      return;
    }
    const nodeEl = target.closest<HTMLElement>(".tree-node");
    if (nodeEl) {
      controller.state.currentPlanId = Number(nodeEl.dataset.plan);
      controller.state.selectedStep = null;
      controller.state.alternatives = [];
      rerender();
    }
  });

  document.getElementById("app")?.addEventListener("change", (ev) => {
    const target = ev.target as HTMLElement;
    if (target.classList.contains("strategy-select")) {
      controller.setStrategy((target as HTMLSelectElement).value);
      rerender();
    } else if (target.classList.contains("window-lb")) {
      controller.state.windowLb = (target as HTMLInputElement).value;
    } else if (target.classList.contains("window-ub")) {
      controller.state.windowUb = (target as HTMLInputElement).value;
    }
  });
}

document.addEventListener("DOMContentLoaded", () => {
  bindTopBar();
  bindDelegatedClicks();
  rerender();
});
