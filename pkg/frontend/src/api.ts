/** Thin typed client for the session service HTTP API.
 *
 * Every helper returns both the parsed payload and the raw response text;
 * the raw text backs the debug drawer, which must show the server bytes
 * verbatim.
 */

export interface Question {
  id: string;
  text: string;
  choices: string[];
}

export interface NextPayload {
  session: string;
  step: number;
  question: Question;
  diagnostics: Record<string, Record<string, number>>;
  remaining: number;
}

export interface TargetBelief {
  probs: number[];
  entropy: number;
}

export interface BeliefPayload {
  session: string;
  step: number;
  status: string;
  targets: Record<string, TargetBelief>;
  joint_entropy: number;
  history: [string, number][];
}

export interface CreatedPayload {
  id: string;
  candidates: string[];
  targets: string[];
  policy: string;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  private fetchImpl: FetchLike;

  constructor(private base = "", fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<{ data: T; raw: string }> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    const raw = await response.text();
    if (!response.ok) {
      let detail = raw;
      try {
        detail = String(JSON.parse(raw).detail ?? raw);
      } catch {
        // non-JSON error body; show it as-is
      }
      throw new ApiError(response.status, detail);
    }
    return { data: JSON.parse(raw) as T, raw };
  }

  async create(
    policy: string,
    seed: number,
    nCandidates: number,
    nTargets: number,
  ): Promise<CreatedPayload> {
    const { data } = await this.request<CreatedPayload>("POST", "/sessions", {
      policy,
      seed,
      n_candidates: nCandidates,
      n_targets: nTargets,
    });
    return data;
  }

  belief(id: string): Promise<{ data: BeliefPayload; raw: string }> {
    return this.request<BeliefPayload>("GET", `/sessions/${id}/belief`);
  }

  next(id: string): Promise<{ data: NextPayload; raw: string }> {
    return this.request<NextPayload>("GET", `/sessions/${id}/next`);
  }

  answer(id: string, answer: number): Promise<{ data: BeliefPayload; raw: string }> {
    return this.request<BeliefPayload>("POST", `/sessions/${id}/answer`, { answer });
  }
}
