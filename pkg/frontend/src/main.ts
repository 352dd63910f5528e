import { SessionApi } from "./api.js";
import { SessionStore } from "./state.js";
import { render } from "./ui.js";

export function mount(doc: Document, api = new SessionApi()): SessionStore {
  const store = new SessionStore(api);
  const root = doc.getElementById("app");
  if (!root) throw new Error("missing #app container");

  store.subscribe(() => render(doc, root, store.state));

  const form = doc.getElementById("start-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const policy = (doc.getElementById("policy") as HTMLSelectElement).value;
    const seed = Number((doc.getElementById("seed") as HTMLInputElement).value) || 0;
    const candidates =
      Number((doc.getElementById("candidates") as HTMLInputElement).value) || 20;
    const targets =
      Number((doc.getElementById("targets") as HTMLInputElement).value) || 5;
    void store.startFlow(policy, seed, candidates, targets);
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.choice") && target.dataset.choice !== undefined) {
      void store.answerFlow(Number(target.dataset.choice));
    }
  });

  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document);
}
