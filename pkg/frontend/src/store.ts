/** Client-side view state.  Pure data plus small mutators; all planning
 * semantics stay on the server. */

import { ApiClient, ApiRequestError, CompareDoc, NodeDescriptor } from "./api.js";

export interface AppState {
  sessionId: string | null;
  nodes: NodeDescriptor[];
  currentPlanId: number | null;
  selectedStep: number | null;
  alternatives: string[];
  chosenAlternative: string | null;
  strategy: string;
  windowLb: string;
  windowUb: string;
  compareResult: CompareDoc | null;
  metrics: string[];
  feedback: string[];
}

export const STRATEGIES = ["from-initial", "time-window", "after-action", "segments"];

export function initialState(): AppState {
  return {
    sessionId: null,
    nodes: [],
    currentPlanId: null,
    selectedStep: null,
    alternatives: [],
    chosenAlternative: null,
    strategy: "after-action",
    windowLb: "",
    windowUb: "",
    compareResult: null,
    metrics: [],
    feedback: [],
  };
}

export function log(state: AppState, message: string): void {
  state.feedback.push(message);
}

export function logError(state: AppState, err: unknown): void {
  if (err instanceof ApiRequestError) {
    log(state, `error [${err.body.code}]: ${err.body.message}`);
  } else {
    log(state, `error: ${String(err)}`);
  }
}

export function nodeById(state: AppState, id: number): NodeDescriptor | undefined {
  return state.nodes.find((n) => n.id === id);
}

export class Controller {
  constructor(public api: ApiClient, public state: AppState = initialState()) {}

  async startSession(domain: string, problem: string): Promise<void> {
    try {
      const { sessionId } = await this.api.createSession(domain, problem);
      const doc = await this.api.getSession(sessionId);
      this.state.sessionId = sessionId;
      this.state.nodes = doc.nodes;
      this.state.metrics = doc.metrics;
      this.state.currentPlanId = doc.current;
      this.state.selectedStep = null;
      this.state.alternatives = [];
      this.state.chosenAlternative = null;
      log(this.state, `session started; root plan ${doc.root}`);
    } catch (err) {
      logError(this.state, err);
    }
  }

  /** Clicking a plan step fetches and shows its alternatives. */
  async selectStep(planId: number, step: number): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      const alts = await this.api.getAlternatives(this.state.sessionId, planId, step);
      this.state.currentPlanId = planId;
      this.state.selectedStep = step;
      this.state.alternatives = alts;
      this.state.chosenAlternative = null;
    } catch (err) {
      logError(this.state, err);
    }
  }

  /** Clicking an alternative runs the contrastive query and appends the
   * resulting plan to the tree. */
  async chooseAlternative(action: string): Promise<NodeDescriptor | null> {
    const { sessionId, currentPlanId, selectedStep, strategy } = this.state;
    if (!sessionId || currentPlanId === null || selectedStep === null) return null;
    this.state.chosenAlternative = action;
    const req = { planId: currentPlanId, step: selectedStep, action, strategy } as {
      planId: number; step: number; action: string; strategy: string;
      window?: [number, number];
    };
    if (strategy === "time-window") {
      req.window = [Number(this.state.windowLb), Number(this.state.windowUb)];
    }
    try {
      const node = await this.api.ask(sessionId, req);
      this.state.nodes.push(node);
      this.state.currentPlanId = node.id;
      log(this.state, `plan ${node.id}: behavior (${node.behavior}) via ${node.strategy}`);
      return node;
    } catch (err) {
      logError(this.state, err);
      return null;
    }
  }

  async runCompare(planIds: number[], metrics: string[]): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      this.state.compareResult = await this.api.compare(this.state.sessionId, planIds, metrics);
    } catch (err) {
      logError(this.state, err);
    }
  }

  async addAnnotation(text: string): Promise<void> {
    if (!this.state.sessionId || !text.trim()) return;
    try {
      await this.api.annotate(this.state.sessionId, text);
      log(this.state, `note: ${text}`);
    } catch (err) {
      logError(this.state, err);
    }
  }

  setStrategy(strategy: string): void {
    if (STRATEGIES.includes(strategy)) this.state.strategy = strategy;
  }
}
