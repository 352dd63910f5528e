/** Session view state: a plain snapshot rebuilt from service responses.
 *
 * The store performs no inference of its own; every number it holds came
 * out of an HTTP payload.  One request chain may be in flight at a time,
 * so a second submit while the previous one is resolving is a no-op.
 */

import {
  ApiError,
  BeliefPayload,
  CreatedPayload,
  NextPayload,
  SessionApi,
} from "./api.js";

export type Phase = "idle" | "busy" | "active" | "done" | "error";

export interface SessionState {
  phase: Phase;
  session: CreatedPayload | null;
  question: NextPayload | null;
  belief: BeliefPayload | null;
  beliefRaw: string;
  trace: number[];
  error: string; // banner: start failures leave no partial state
  notice: string; // inline: per-answer validation messages
}

function initial(): SessionState {
  return {
    phase: "idle",
    session: null,
    question: null,
    belief: null,
    beliefRaw: "",
    trace: [],
    error: "",
    notice: "",
  };
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class SessionStore {
  state: SessionState = initial();
  private listeners: Array<() => void> = [];
  private inFlight = false;

  constructor(private api: SessionApi) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener();
  }

  async startFlow(
    policy: string,
    seed: number,
    nCandidates = 20,
    nTargets = 5,
  ): Promise<boolean> {
    if (this.inFlight) return false;
    this.inFlight = true;
    this.set({ ...initial(), phase: "busy" });
    try {
      const session = await this.api.create(policy, seed, nCandidates, nTargets);
      const belief = await this.api.belief(session.id);
      const next = await this.api.next(session.id);
      this.set({
        phase: "active",
        session,
        question: next.data,
        belief: belief.data,
        beliefRaw: belief.raw,
        trace: [belief.data.joint_entropy],
      });
      return true;
    } catch (err) {
      this.set({ ...initial(), phase: "error", error: message(err) });
      return false;
    } finally {
      this.inFlight = false;
    }
  }

  async answerFlow(choice: number): Promise<boolean> {
    const { session, question, phase } = this.state;
    if (this.inFlight || phase !== "active" || !session || !question) return false;
    this.inFlight = true;
    try {
      await this.api.answer(session.id, choice);
      const belief = await this.api.belief(session.id);
      let next: NextPayload | null = null;
      let nextPhase: Phase = "active";
      try {
        next = (await this.api.next(session.id)).data;
      } catch (err) {
        // no questions left: the service reports the session exhausted
        if (err instanceof ApiError && err.status === 409) nextPhase = "done";
        else throw err;
      }
      this.set({
        phase: nextPhase,
        question: next,
        belief: belief.data,
        beliefRaw: belief.raw,
        trace: [...this.state.trace, belief.data.joint_entropy],
        notice: "",
      });
      return true;
    } catch (err) {
      this.set({ notice: message(err) });
      return false;
    } finally {
      this.inFlight = false;
    }
  }
}
