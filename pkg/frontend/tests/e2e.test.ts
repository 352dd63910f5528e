/** Scripted end-to-end session against recorded service traffic.
 *
 * The fixture was captured from the real session service running the
 * two-latent demo instance with the greedy policy: it holds every HTTP
 * exchange of a session that answers three questions, plus the engine's
 * event log.  The replay transport serves those exchanges in order, so
 * these tests check the client against genuine server bytes.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { FetchLike, SessionApi } from "../src/api.js";
import { mount } from "../src/main.js";
import { SessionStore } from "../src/state.js";
import fixture from "./fixtures/r1_greedy_session.json";

interface Exchange {
  method: string;
  path: string;
  request: unknown;
  status: number;
  body: string;
}

const exchanges = fixture.exchanges as Exchange[];
const posedLog = fixture.log.filter((e: any) => e.type === "posed");

function replayFetch(trace: Exchange[] = exchanges): FetchLike & { calls: string[] } {
  const remaining = [...trace];
  const impl = async (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const index = remaining.findIndex(
      (ex) => ex.method === method && ex.path === url,
    );
    if (index < 0) throw new Error(`unexpected request ${method} ${url}`);
    const [ex] = remaining.splice(index, 1);
    impl.calls.push(`${method} ${url}`);
    return {
      ok: ex.status < 400,
      status: ex.status,
      text: async () => ex.body,
    } as Response;
  };
  impl.calls = [] as string[];
  return impl;
}

const SHELL = `
  <form id="start-form">
    <select id="policy"><option value="greedy" selected>greedy</option></select>
    <input id="seed" value="1" />
    <input id="candidates" value="3" />
    <input id="targets" value="3" />
    <button type="submit">start</button>
  </form>
  <main id="app"></main>
`;

function beliefExchange(step: number): Exchange {
  const ex = exchanges.filter(
    (e) => e.method === "GET" && e.path.endsWith("/belief"),
  )[step];
  if (!ex) throw new Error(`no belief exchange for step ${step}`);
  return ex;
}

function start(trace?: Exchange[]): { store: SessionStore; fetch: ReturnType<typeof replayFetch> } {
  document.body.innerHTML = SHELL;
  const fetchImpl = replayFetch(trace);
  const store = mount(document, new SessionApi("", fetchImpl));
  return { store, fetch: fetchImpl };
}

function renderedProbs(target: string): string[] {
  const panel = document.querySelector(`[data-target="${target}"]`);
  expect(panel, `panel for ${target}`).toBeTruthy();
  return Array.from(panel!.querySelectorAll(".prob")).map((n) => n.textContent ?? "");
}

function expectViewMatchesBelief(step: number): void {
  const ex = beliefExchange(step);
  const payload = JSON.parse(ex.body);
  for (const [qid, target] of Object.entries<any>(payload.targets)) {
    expect(renderedProbs(qid)).toEqual(target.probs.map((p: number) => String(p)));
    const entropy = document.querySelector(`[data-target="${qid}"] .entropy`);
    expect(entropy?.getAttribute("data-entropy")).toBe(String(target.entropy));
  }
  expect(document.querySelector(".drawer-body")?.textContent).toBe(ex.body);
}

function shownQuestionId(): string | undefined {
  const button = document.querySelector<HTMLElement>("button.choice");
  return button?.dataset.question;
}

describe("start_flow", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("creates a session and shows the first posed question with target panels", async () => {
    const { store } = start();
    expect(await store.startFlow("greedy", 1, 3, 3)).toBe(true);
    expect(store.state.phase).toBe("active");
    expect(shownQuestionId()).toBe(posedLog[0].question);
    expect(document.querySelectorAll(".target-panel")).toHaveLength(
      fixture.create.n_targets,
    );
    expectViewMatchesBelief(0);
  });

  it("same seed shows the same first question", async () => {
    const first: string[] = [];
    for (let i = 0; i < 2; i++) {
      const { store } = start();
      await store.startFlow("greedy", 1, 3, 3);
      first.push(shownQuestionId() ?? "");
    }
    expect(first[0]).toBe(first[1]);
    expect(first[0]).not.toBe("");
  });

  it("unreachable service shows an error banner and leaves no partial state", async () => {
    document.body.innerHTML = SHELL;
    const failing: FetchLike = async () => {
      throw new Error("connection refused");
    };
    const store = mount(document, new SessionApi("", failing));
    expect(await store.startFlow("greedy", 1, 3, 3)).toBe(false);
    expect(store.state.phase).toBe("error");
    expect(store.state.session).toBeNull();
    expect(store.state.belief).toBeNull();
    expect(document.querySelector(".banner")?.textContent).toContain(
      "connection refused",
    );
    expect(document.querySelectorAll(".target-panel")).toHaveLength(0);
  });
});

describe("answer_flow", () => {
  it("three scripted answers: view tracks belief payloads exactly and questions match the engine log", async () => {
    const { store } = start();
    await store.startFlow("greedy", 1, 3, 3);

    const answers = fixture.answers as number[];
    for (let step = 0; step < answers.length; step++) {
      expect(shownQuestionId()).toBe(posedLog[step].question);
      expect(posedLog[step].step).toBe(step);
      expect(await store.answerFlow(answers[step])).toBe(true);
      expectViewMatchesBelief(step + 1);
    }

    expect(store.state.phase).toBe("done");
    expect(document.querySelector(".done")).toBeTruthy();
    expect(document.querySelectorAll(".history-item")).toHaveLength(answers.length);

    const trace = Array.from(document.querySelectorAll(".trace-value")).map((n) =>
      Number(n.textContent),
    );
    expect(trace).toHaveLength(answers.length + 1);
    for (let i = 1; i < trace.length; i++) {
      expect(trace[i]).toBeLessThanOrEqual(trace[i - 1]);
    }
  });

  it("ignores a second submit while one is in flight", async () => {
    const { store, fetch } = start();
    await store.startFlow("greedy", 1, 3, 3);

    const firstSubmit = store.answerFlow(fixture.answers[0]);
    const secondSubmit = store.answerFlow(fixture.answers[0]);
    expect(await secondSubmit).toBe(false);
    expect(await firstSubmit).toBe(true);
    const answerCalls = fetch.calls.filter((c) => c.startsWith("POST") && c.endsWith("/answer"));
    expect(answerCalls).toHaveLength(1);
  });

  it("click on a choice button submits that answer", async () => {
    const { store, fetch } = start();
    await store.startFlow("greedy", 1, 3, 3);
    const buttons = document.querySelectorAll<HTMLElement>("button.choice");
    buttons[fixture.answers[0]].click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(
      fetch.calls.filter((c) => c.startsWith("POST") && c.endsWith("/answer")),
    ).toHaveLength(1);
    expect(store.state.belief?.step).toBe(1);
  });

  it("shows a validation error inline and keeps the session usable", async () => {
    const trace = [...exchanges.slice(0, 3)];
    trace.splice(3, 0, {
      method: "POST",
      path: exchanges[3].path,
      request: { answer: 99 },
      status: 422,
      body: JSON.stringify({ detail: "answer index must be in [0, 2)" }),
    });
    const { store } = start(trace);
    await store.startFlow("greedy", 1, 3, 3);
    expect(await store.answerFlow(99)).toBe(false);
    expect(store.state.phase).toBe("active");
    expect(document.querySelector(".notice")?.textContent).toContain(
      "answer index must be in [0, 2)",
    );
    expect(shownQuestionId()).toBe(posedLog[0].question);
  });
});
