/** Thin typed client for the planwhy HTTP API.
 *
 * The UI never interprets PDDL or plans itself; everything it shows
 * comes out of these calls.  `fetchFn` is injectable so tests can mock
 * the server.
 */

export interface NodeDescriptor {
  id: number;
  parent: number | null;
  plan: string | null;
  steps: string[];
  replaced: string | null;
  suggested: string | null;
  stepIndex: number | null;
  strategy: string | null;
  behavior: string | null;
  rejoinIndex: number | null;
  metrics: Record<string, string>;
}

export interface SessionDoc {
  sessionId: string;
  root: number;
  current: number;
  nodes: NodeDescriptor[];
  metrics: string[];
  annotations: string[];
}

export interface CompareRow {
  id: number;
  values: Record<string, string>;
}

export interface CompareDoc {
  metrics: string[];
  rows: CompareRow[];
  best: Record<string, number>;
}

export interface ApiError {
  code: string;
  message: string;
}

export class ApiRequestError extends Error {
  constructor(public status: number, public body: ApiError) {
    super(body.message);
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export interface AskRequest {
  planId: number;
  step: number;
  action: string;
  strategy: string;
  window?: [number, number];
}

async function parseError(res: Response): Promise<ApiRequestError> {
  let body: ApiError = { code: "unknown", message: `HTTP ${res.status}` };
  try {
    const doc = await res.json();
    if (doc && typeof doc.message === "string") body = doc;
    else if (doc && doc.detail) body = { code: "bad-request", message: JSON.stringify(doc.detail) };
  } catch {
    /* non-JSON error body; keep the fallback */
  }
  return new ApiRequestError(res.status, body);
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchFn = (url, init) => fetch(url, init),
    /** Delay between 202 polls; tests set it to 0. */
    public pollIntervalMs: number = 250,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  createSession(domain: string, problem: string): Promise<{ sessionId: string; rootPlan: NodeDescriptor }> {
    return this.request("POST", "/sessions", { domain, problem });
  }

  getSession(sid: string): Promise<SessionDoc> {
    return this.request("GET", `/sessions/${sid}`);
  }

  getPlan(sid: string, planId: number): Promise<NodeDescriptor> {
    return this.request("GET", `/sessions/${sid}/plans/${planId}`);
  }

  async getAlternatives(sid: string, planId: number, step: number): Promise<string[]> {
    const doc = await this.request<{ alternatives: string[] }>(
      "GET", `/sessions/${sid}/plans/${planId}/steps/${step}/alternatives`);
    return doc.alternatives;
  }

  /** Ask a "why not?" question.  Transparently polls when the server
   * answers 202 with a task token. */
  async ask(sid: string, req: AskRequest): Promise<NodeDescriptor> {
    const init: RequestInit = {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    };
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sid}/ask`, init);
    if (res.status === 202) {
      const { token } = (await res.json()) as { token: string };
      return this.pollTask(sid, token);
    }
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as NodeDescriptor;
  }

  private async pollTask(sid: string, token: string): Promise<NodeDescriptor> {
    for (;;) {
      const doc = await this.request<{ status: string; node?: NodeDescriptor }>(
        "GET", `/sessions/${sid}/tasks/${token}`);
      if (doc.status === "done" && doc.node) return doc.node;
      if (this.pollIntervalMs > 0) {
        await new Promise((r) => setTimeout(r, this.pollIntervalMs));
      }
    }
  }

  compare(sid: string, planIds: number[], metrics: string[]): Promise<CompareDoc> {
    return this.request("POST", `/sessions/${sid}/compare`, { planIds, metrics });
  }

  addMetric(sid: string, name: string, kind: string, weights?: Record<string, number>): Promise<{ metrics: string[] }> {
    return this.request("POST", `/sessions/${sid}/metrics`, { name, kind, weights });
  }

  annotate(sid: string, text: string): Promise<{ annotations: string[] }> {
    return this.request("POST", `/sessions/${sid}/annotations`, { text });
  }

  saveWorkspace(sid: string): Promise<{ workspace: string }> {
    return this.request("POST", `/sessions/${sid}/save`);
  }

  loadWorkspace(workspace: string): Promise<{ sessionId: string }> {
    return this.request("POST", "/sessions/load", { workspace });
  }
}
