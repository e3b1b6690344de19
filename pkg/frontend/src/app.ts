/** Page bootstrap: load a user, render, and wire the evaluate /
 * tree-selector / retry interactions through event delegation. */

import { ApiClient } from "./api.js";
import { DashboardState, Verdict, explanationView, featureCards } from "./model.js";
import {
  renderExplanationPanel,
  renderMetricsBar,
  renderRetryBanner,
  renderUserView,
} from "./render.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

const api = new ApiClient(SERVICE_URL);
const state = new DashboardState(api);

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

async function render(): Promise<void> {
  const target = root();
  if (state.error || !state.user) {
    target.innerHTML = renderRetryBanner(state.error ?? "service unreachable");
    return;
  }
  const cards = state.explanation ? featureCards(state.explanation) : [];
  const view = state.explanation
    ? explanationView(state.explanation, state.selectedTree)
    : null;
  target.innerHTML = renderUserView(state.user, cards, view);
  try {
    const metrics = await api.getMetrics();
    target.insertAdjacentHTML("beforeend", renderMetricsBar(metrics));
  } catch {
    // metrics are decorative; the main view stays up
  }
}

async function refresh(userId: string): Promise<void> {
  await state.loadUser(userId);
  if (state.user && state.user.contributions.length && !state.explanation) {
    await state.loadExplanation(state.user.contributions[0].event_id);
  }
  await render();
}

function currentUserId(): string {
  const input = document.getElementById("user-input") as HTMLInputElement | null;
  return input?.value || new URLSearchParams(window.location.search).get("user") || "";
}

document.addEventListener("click", async (raw) => {
  const element = raw.target as HTMLElement;
  const action = element.dataset.action;
  if (!action) {
    return;
  }
  raw.preventDefault();
  if (action === "retry") {
    await refresh(currentUserId());
  } else if (action === "explain") {
    await state.loadExplanation(element.dataset.event as string);
    await render();
  } else if (action === "validate" || action === "reject") {
    await state.evaluate(element.dataset.event as string, action as Verdict);
    await render();
  }
});

document.addEventListener("change", async (raw) => {
  const element = raw.target as HTMLSelectElement;
  if (element.dataset.action === "select-tree" && state.explanation) {
    state.selectTree(Number(element.value));
    const panel = document.querySelector(".explanation-panel");
    if (panel) {
      panel.outerHTML = renderExplanationPanel(
        explanationView(state.explanation, state.selectedTree),
      );
    }
  }
});

document.getElementById("load-user")?.addEventListener("click", () => {
  void refresh(currentUserId());
});

const initial = new URLSearchParams(window.location.search).get("user");
if (initial) {
  void refresh(initial);
}
