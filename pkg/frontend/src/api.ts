/**
 * Typed client for the topikos session service.
 *
 * Mirrors the documented HTTP interface exactly; every field the UI
 * renders originates in one of these response shapes.
 */

export interface AncestorRow {
  id: string;
  d: number;
  decay: number;
  sim: number;
  contribution: number;
}

export interface SiblingRow {
  id: string;
  sim: number;
}

export interface Candidate {
  topic_id: string;
  scheme_id: string;
  pref_label: string;
  explanation: string;
  breadcrumb: string[];
  base_sim: number;
  ancestor_bonus: number;
  sibling_bonus: number;
  final_score: number;
  ancestors: AncestorRow[];
  siblings: SiblingRow[];
}

export interface AgentTurn {
  round: number;
  phase: string;
  question: string;
  notice: string;
  candidates: Candidate[];
}

export interface CreateSessionResponse {
  session_id: string;
  turn: AgentTurn;
}

export interface ProvenanceRow {
  round: number;
  action: string;
  phase: string;
}

export interface ResolvedEntity {
  topic_id: string;
  scheme_id: string;
  pref_label: string;
  confidence: number;
  provenance: ProvenanceRow[];
}

export interface ResolutionResponse {
  session_id: string;
  entities: ResolvedEntity[];
}

export type ActionKind =
  | "confirm"
  | "reject"
  | "refine"
  | "broaden"
  | "narrow"
  | "explore_siblings"
  | "done";

export interface Action {
  kind: ActionKind;
  topic_id?: string;
  scheme_id?: string;
  text?: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Network-level failure (server unreachable), as opposed to an API error. */
export class ConnectionError extends Error {}

async function parseBody(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return {};
  }
}

export class TopikosClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ConnectionError(`service unreachable: ${String(err)}`);
    }
    const payload = (await parseBody(response)) as Record<string, unknown>;
    if (!response.ok) {
      const code = typeof payload.code === "string" ? payload.code : `http_${response.status}`;
      const message = typeof payload.message === "string" ? payload.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return payload as T;
  }

  createSession(query: string): Promise<CreateSessionResponse> {
    return this.request("POST", "/v1/sessions", { query });
  }

  step(sessionId: string, action: Action): Promise<AgentTurn> {
    return this.request("POST", `/v1/sessions/${sessionId}/steps`, action);
  }

  finalize(sessionId: string): Promise<AgentTurn> {
    return this.request("POST", `/v1/sessions/${sessionId}/finalize`);
  }

  resolution(sessionId: string): Promise<ResolutionResponse> {
    return this.request("GET", `/v1/sessions/${sessionId}/resolution`);
  }

  health(): Promise<{ status: string; schemes_loaded: number }> {
    return this.request("GET", "/v1/health");
  }
}
