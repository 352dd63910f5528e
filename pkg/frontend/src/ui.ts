/** DOM rendering for the session view.
 *
 * Probabilities and entropies are displayed with JavaScript's default
 * number-to-string conversion of the parsed payload values, so what the
 * user reads is exactly what the service sent.  The debug drawer shows
 * the last belief response body verbatim.
 */

import { NextPayload } from "./api.js";
import { SessionState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function bar(doc: Document, fraction: number): HTMLElement {
  const outer = el(doc, "div", "bar");
  const inner = el(doc, "div", "bar-fill");
  inner.style.width = `${Math.max(0, Math.min(1, fraction)) * 100}%`;
  outer.appendChild(inner);
  return outer;
}

function renderQuestion(doc: Document, state: SessionState, q: NextPayload): HTMLElement {
  const card = el(doc, "section", "question-card");
  card.appendChild(el(doc, "h2", "question-text", q.question.text));
  card.appendChild(
    el(doc, "p", "question-meta", `step ${q.step} · ${q.remaining} candidates left`),
  );
  const row = el(doc, "div", "choices");
  q.question.choices.forEach((choice, i) => {
    const button = el(doc, "button", "choice", choice);
    button.dataset.choice = String(i);
    button.dataset.question = q.question.id;
    row.appendChild(button);
  });
  card.appendChild(row);
  if (state.notice) card.appendChild(el(doc, "p", "notice", state.notice));

  const eig = q.diagnostics.eig;
  if (eig) {
    const panel = el(doc, "div", "diagnostics");
    panel.appendChild(el(doc, "h3", undefined, "expected information gain"));
    const peak = Math.max(...Object.values(eig), 0) || 1;
    for (const [qid, value] of Object.entries(eig)) {
      const rowEl = el(doc, "div", "eig-row");
      rowEl.appendChild(el(doc, "span", "eig-label", qid));
      rowEl.appendChild(bar(doc, value / peak));
      rowEl.appendChild(el(doc, "span", "eig-value", String(value)));
      panel.appendChild(rowEl);
    }
    card.appendChild(panel);
  }
  return card;
}

function renderTargets(doc: Document, state: SessionState): HTMLElement {
  const wrap = el(doc, "section", "targets");
  const order = state.session?.targets ?? Object.keys(state.belief?.targets ?? {});
  for (const qid of order) {
    const target = state.belief?.targets[qid];
    if (!target) continue;
    const panel = el(doc, "div", "target-panel");
    panel.dataset.target = qid;
    panel.appendChild(el(doc, "h3", undefined, qid));
    target.probs.forEach((p, i) => {
      const row = el(doc, "div", "prob-row");
      row.appendChild(el(doc, "span", "prob-label", `#${i}`));
      row.appendChild(bar(doc, p));
      row.appendChild(el(doc, "span", "prob", String(p)));
      panel.appendChild(row);
    });
    const entropy = el(doc, "p", "entropy", `entropy ${String(target.entropy)}`);
    entropy.dataset.entropy = String(target.entropy);
    panel.appendChild(entropy);
    wrap.appendChild(panel);
  }
  return wrap;
}

function renderTrace(doc: Document, trace: number[]): HTMLElement {
  const panel = el(doc, "section", "trace");
  panel.appendChild(el(doc, "h3", undefined, "joint entropy"));
  const list = el(doc, "ol", "trace-list");
  list.start = 0;
  for (const value of trace) {
    list.appendChild(el(doc, "li", "trace-value", String(value)));
  }
  panel.appendChild(list);
  return panel;
}

function renderHistory(doc: Document, state: SessionState): HTMLElement {
  const panel = el(doc, "section", "history");
  panel.appendChild(el(doc, "h3", undefined, "answered"));
  const list = el(doc, "ul");
  for (const [qid, answer] of state.belief?.history ?? []) {
    list.appendChild(el(doc, "li", "history-item", `${qid} → #${answer}`));
  }
  panel.appendChild(list);
  return panel;
}

export function render(doc: Document, root: HTMLElement, state: SessionState): void {
  root.replaceChildren();
  if (state.error) {
    root.appendChild(el(doc, "div", "banner", state.error));
  }
  if (state.phase === "idle" || state.phase === "error") return;
  if (state.phase === "busy" && !state.session) {
    root.appendChild(el(doc, "p", "loading", "starting session..."));
    return;
  }
  if (state.question) {
    root.appendChild(renderQuestion(doc, state, state.question));
  } else if (state.phase === "done") {
    root.appendChild(el(doc, "p", "done", "no questions left: session complete"));
  }
  root.appendChild(renderTargets(doc, state));
  root.appendChild(renderTrace(doc, state.trace));
  root.appendChild(renderHistory(doc, state));

  const drawer = el(doc, "details", "drawer");
  drawer.appendChild(el(doc, "summary", undefined, "raw belief snapshot"));
  const pre = el(doc, "pre", "drawer-body");
  pre.textContent = state.beliefRaw;
  drawer.appendChild(pre);
  root.appendChild(drawer);
}
