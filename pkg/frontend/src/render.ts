/** Pure HTML renderers.  Every panel is a function from state to a
 * string, which keeps the view logic trivially unit-testable. */

import { CompareDoc, NodeDescriptor } from "./api.js";
import { AppState, STRATEGIES, nodeById } from "./store.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function cost(node: NodeDescriptor): string {
  return node.metrics["makespan"] ?? "-";
}

/** Current-plan panel: numbered steps; the selected one is tinted red. */
export function renderPlanPanel(state: AppState): string {
  const node = state.currentPlanId === null ? undefined : nodeById(state, state.currentPlanId);
  if (!node) return '<div class="plan-panel empty">No plan loaded.</div>';
  if (!node.plan) {
    return `<div class="plan-panel"><h2>Plan ${node.id}</h2>` +
      '<p class="no-plan">No plan exists for this query (behavior (d)).</p></div>';
  }
  const steps = node.steps.map((step, i) => {
    const classes = ["step"];
    if (i === state.selectedStep) classes.push("selected-step"); // light red
    return `<li class="${classes.join(" ")}" data-plan="${node.id}" data-step="${i}">${esc(step)}</li>`;
  });
  return `<div class="plan-panel"><h2>Plan ${node.id}</h2>` +
    `<ol class="steps">${steps.join("")}</ol></div>`;
}

/** Alternative-actions panel; the chosen one is tinted green. */
export function renderAlternatives(state: AppState): string {
  if (state.selectedStep === null) {
    return '<div class="alternatives empty">Select a plan step to see alternatives.</div>';
  }
  if (!state.alternatives.length) {
    return '<div class="alternatives empty">No applicable alternatives at this step.</div>';
  }
  const items = state.alternatives.map((a) => {
    const classes = ["alternative"];
    if (a === state.chosenAlternative) classes.push("chosen-alternative"); // light green
    return `<li class="${classes.join(" ")}" data-action="${esc(a)}">${esc(a)}</li>`;
  });
  return `<div class="alternatives"><h2>Alternative Actions</h2>` +
    `<ul>${items.join("")}</ul></div>`;
}

/** Strategy picker; the time-window variant exposes LB/UB inputs. */
export function renderStrategySelector(state: AppState): string {
  const options = STRATEGIES.map((s) =>
    `<option value="${s}"${s === state.strategy ? " selected" : ""}>${s}</option>`);
  let windowInputs = "";
  if (state.strategy === "time-window") {
    windowInputs =
      `<input class="window-lb" placeholder="LB" value="${esc(state.windowLb)}">` +
      `<input class="window-ub" placeholder="UB" value="${esc(state.windowUb)}">`;
  }
  return `<div class="strategy"><select class="strategy-select">${options.join("")}</select>` +
    windowInputs + `</div>`;
}

/** Plans-generation tree, drawn top-down with the root first. */
export function renderTree(state: AppState): string {
  if (!state.nodes.length) return '<div class="tree empty">No plans yet.</div>';
  const byParent = new Map<number | null, NodeDescriptor[]>();
  for (const n of state.nodes) {
    const list = byParent.get(n.parent) ?? [];
    list.push(n);
    byParent.set(n.parent, list);
  }
  const renderNode = (n: NodeDescriptor): string => {
    const classes = ["tree-node"];
    if (n.id === state.currentPlanId) classes.push("current");
    const fields =
      `<span class="node-id">plan ${n.id}</span>` +
      `<span class="node-cost">cost ${esc(cost(n))}</span>` +
      `<span class="node-suggested">suggested ${esc(n.suggested ?? "-")}</span>` +
      `<span class="node-replaced">replaced ${esc(n.replaced ?? "-")}</span>`;
    const children = (byParent.get(n.id) ?? []).map(renderNode).join("");
    return `<li class="${classes.join(" ")}" data-plan="${n.id}">${fields}` +
      (children ? `<ul>${children}</ul>` : "") + `</li>`;
  };
  const roots = byParent.get(null) ?? [];
  return `<div class="tree"><ul>${roots.map(renderNode).join("")}</ul></div>`;
}

/** Standard bar chart: one bar per plan per metric, widths scaled to the
 * largest value of that metric. */
export function renderBarChart(compare: CompareDoc | null): string {
  if (!compare) return '<div class="charts empty">Run Compare to see charts.</div>';
  const groups = compare.metrics.map((metric) => {
    const values = compare.rows.map((row) => Number(row.values[metric] ?? "0"));
    const max = Math.max(...values, 1e-9);
    const bars = compare.rows.map((row, i) => {
      const pct = Math.round((values[i] / max) * 100);
      const best = compare.best[metric] === row.id ? " best" : "";
      return `<div class="bar${best}" data-plan="${row.id}" data-metric="${esc(metric)}" ` +
        `style="width:${pct}%">plan ${row.id}: ${esc(row.values[metric] ?? "-")}</div>`;
    });
    return `<div class="chart" data-metric="${esc(metric)}"><h3>${esc(metric)}</h3>` +
      bars.join("") + `</div>`;
  });
  return `<div class="charts">${groups.join("")}</div>`;
}

/** Feedback textbox history: annotations, outcomes, and surfaced errors. */
export function renderFeedback(state: AppState): string {
  const items = state.feedback.map((f) => `<li>${esc(f)}</li>`);
  return `<div class="feedback"><ul>${items.join("")}</ul></div>`;
}

export function renderApp(state: AppState): string {
  return [
    renderPlanPanel(state),
    renderStrategySelector(state),
    renderAlternatives(state),
    renderTree(state),
    renderBarChart(state.compareResult),
    renderFeedback(state),
  ].join("\n");
}
