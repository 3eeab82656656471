/** The UI contract, against a mocked API: step click shows alternatives,
 * alternative click grows the tree, Compare draws one bar per plan per
 * metric.  The client never computes planning semantics itself. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  renderAlternatives, renderBarChart, renderFeedback, renderPlanPanel,
  renderStrategySelector, renderTree,
} from "../src/render.js";
import { Controller } from "../src/store.js";
import { Call, mockFetch, node } from "./mockServer.js";

const root = node({
  id: 1,
  plan: "0.0: (move n1 n2) [0.0]\n0.001: (move n2 n3) [0.0]\n",
  steps: ["0.0: (move n1 n2) [0.0]", "0.001: (move n2 n3) [0.0]"],
  metrics: { makespan: "0.001", "step-count": "2.0" },
});

const child = node({
  id: 2,
  parent: 1,
  plan: "0.0: (move n1 n4) [0.0]\n",
  steps: ["0.0: (move n1 n4) [0.0]"],
  suggested: "(move n1 n4)",
  replaced: "(move n1 n2)",
  stepIndex: 0,
  strategy: "after-action",
  behavior: "b",
  rejoinIndex: 1,
  metrics: { makespan: "0.002", "step-count": "3.0" },
});

function sessionRoutes(): Parameters<typeof mockFetch>[0] {
  return [
    (c: Call) => c.method === "POST" && c.url === "/sessions"
      ? { status: 201, body: { sessionId: "s1", rootPlan: root } } : undefined,
    (c: Call) => c.method === "GET" && c.url === "/sessions/s1"
      ? {
          status: 200,
          body: { sessionId: "s1", root: 1, current: 1, nodes: [root],
                  metrics: ["makespan", "step-count"], annotations: [] },
        } : undefined,
    (c: Call) => c.url === "/sessions/s1/plans/1/steps/0/alternatives"
      ? { status: 200, body: { alternatives: ["(move n1 n4)"] } } : undefined,
    (c: Call) => c.method === "POST" && c.url === "/sessions/s1/ask"
      ? { status: 200, body: child } : undefined,
    (c: Call) => c.method === "POST" && c.url === "/sessions/s1/compare"
      ? {
          status: 200,
          body: {
            metrics: ["makespan", "step-count"],
            rows: [
              { id: 1, values: { makespan: "0.001", "step-count": "2.0" } },
              { id: 2, values: { makespan: "0.002", "step-count": "3.0" } },
            ],
            best: { makespan: 1, "step-count": 1 },
          },
        } : undefined,
  ];
}

async function startedController() {
  const { fetchFn, calls } = mockFetch(sessionRoutes());
  const controller = new Controller(new ApiClient("", fetchFn, 0));
  await controller.startSession("(define (domain g))", "(define (problem p))");
  return { controller, calls };
}

describe("workbench workflow", () => {
  it("selecting a step renders its alternatives list", async () => {
    const { controller } = await startedController();
    await controller.selectStep(1, 0);
    expect(controller.state.alternatives).toEqual(["(move n1 n4)"]);
    const html = renderAlternatives(controller.state);
    expect(html).toContain("Alternative Actions");
    expect(html).toContain("(move n1 n4)");
    // the selected step is highlighted in the plan panel
    expect(renderPlanPanel(controller.state)).toContain('class="step selected-step"');
  });

  it("selecting an alternative adds a tree child with id, cost, suggested, replaced", async () => {
    const { controller } = await startedController();
    await controller.selectStep(1, 0);
    const added = await controller.chooseAlternative("(move n1 n4)");
    expect(added?.id).toBe(2);
    expect(controller.state.nodes.map((n) => n.id)).toEqual([1, 2]);
    const html = renderTree(controller.state);
    expect(html).toContain("plan 2");
    expect(html).toContain("cost 0.002");
    expect(html).toContain("suggested (move n1 n4)");
    expect(html).toContain("replaced (move n1 n2)");
    // the child nests under the root, top-down
    expect(html.indexOf("plan 1")).toBeLessThan(html.indexOf("plan 2"));
    // the chosen alternative is highlighted
    expect(renderAlternatives(controller.state)).toContain("chosen-alternative");
  });

  it("compare renders one bar per plan per metric", async () => {
    const { controller } = await startedController();
    await controller.selectStep(1, 0);
    await controller.chooseAlternative("(move n1 n4)");
    await controller.runCompare([1, 2], ["makespan", "step-count"]);
    const html = renderBarChart(controller.state.compareResult);
    const bars = html.match(/class="bar/g) ?? [];
    expect(bars).toHaveLength(4); // 2 plans x 2 metrics
    for (const metric of ["makespan", "step-count"]) {
      for (const plan of [1, 2]) {
        expect(html).toContain(`data-plan="${plan}" data-metric="${metric}"`);
      }
    }
    // the larger value fills the full width
    expect(html).toContain('style="width:100%"');
  });

  it("issues only documented API calls and recomputes nothing locally", async () => {
    const { controller, calls } = await startedController();
    await controller.selectStep(1, 0);
    await controller.chooseAlternative("(move n1 n4)");
    await controller.runCompare([1, 2], ["makespan"]);
    const urls = calls.map((c) => `${c.method} ${c.url}`);
    expect(urls).toEqual([
      "POST /sessions",
      "GET /sessions/s1",
      "GET /sessions/s1/plans/1/steps/0/alternatives",
      "POST /sessions/s1/ask",
      "POST /sessions/s1/compare",
    ]);
  });

  it("window inputs appear only for the time-window strategy", async () => {
    const { controller } = await startedController();
    expect(renderStrategySelector(controller.state)).not.toContain("window-lb");
    controller.setStrategy("time-window");
    expect(renderStrategySelector(controller.state)).toContain("window-lb");
    expect(renderStrategySelector(controller.state)).toContain("window-ub");
    controller.setStrategy("made-up");
    expect(controller.state.strategy).toBe("time-window");
  });

  it("sends window bounds with time-window asks", async () => {
    const { controller, calls } = await startedController();
    await controller.selectStep(1, 0);
    controller.setStrategy("time-window");
    controller.state.windowLb = "10";
    controller.state.windowUb = "20";
    await controller.chooseAlternative("(move n1 n4)");
    const ask = calls.find((c) => c.url.endsWith("/ask"));
    expect((ask?.body as { window: number[] }).window).toEqual([10, 20]);
  });

  it("surfaces API errors in the feedback log", async () => {
    const routes = sessionRoutes();
    routes[3] = (c: Call) => c.method === "POST" && c.url === "/sessions/s1/ask"
      ? { status: 409, body: { code: "stale-suggestion", message: "plan changed" } } : undefined;
    const { fetchFn } = mockFetch(routes);
    const controller = new Controller(new ApiClient("", fetchFn, 0));
    await controller.startSession("d", "p");
    await controller.selectStep(1, 0);
    const added = await controller.chooseAlternative("(move n1 n4)");
    expect(added).toBeNull();
    const html = renderFeedback(controller.state);
    expect(html).toContain("error [stale-suggestion]: plan changed");
  });

  it("renders a planless node as a recorded dead end", async () => {
    const { controller } = await startedController();
    controller.state.nodes.push(node({ id: 3, parent: 1, plan: null, steps: [], behavior: "d" }));
    controller.state.currentPlanId = 3;
    const html = renderPlanPanel(controller.state);
    expect(html).toContain("No plan exists");
  });
});
