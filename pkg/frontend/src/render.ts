/** HTML renderers. Pure string builders so they are testable headless;
 * app.ts injects the output and wires events by delegation. */

import { MetricsResponse, UserResponse } from "./api.js";
import {
  ContributionItem,
  ExplanationView,
  FeatureCard,
  contributionItems,
} from "./model.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderUserHeader(user: UserResponse): string {
  const last = user.contributions[0];
  const lastLine = last
    ? `last contribution: <em>${escapeHtml(last.text_preview)}</em>`
    : "no contributions yet";
  return `
  <header class="user-header">
    <h2>${escapeHtml(user.user_id)}</h2>
    <p>${lastLine}</p>
    <p class="user-stats">
      posts: ${user.post_count} &middot;
      spam tendency: ${(user.spam_tendency * 100).toFixed(1)}% &middot;
      weekly rate: ${user.week_frequency.toFixed(2)}
    </p>
  </header>`;
}

export function renderFeatureCards(cards: FeatureCard[]): string {
  if (!cards.length) {
    return `<section class="feature-cards"><p>no selected features</p></section>`;
  }
  const body = cards
    .map(
      (card) => `
    <div class="feature-card ${card.colorClass}" data-feature="${escapeHtml(card.feature)}">
      <span class="feature-name">${escapeHtml(card.feature)}</span>
      <span class="feature-value">${card.value}</span>
    </div>`,
    )
    .join("");
  return `<section class="feature-cards">${body}</section>`;
}

export function renderContributions(items: ContributionItem[]): string {
  const rows = items
    .map((item) => {
      const verdict = item.evaluated
        ? `<span class="evaluated">evaluated${
            item.feedbackLabel === null ? "" : ` (label ${item.feedbackLabel})`
          }</span>`
        : `
        <button data-action="validate" data-event="${escapeHtml(item.eventId)}">validate</button>
        <button data-action="reject" data-event="${escapeHtml(item.eventId)}">reject</button>`;
      return `
    <li class="contribution" data-event="${escapeHtml(item.eventId)}">
      <a href="#" data-action="explain" data-event="${escapeHtml(item.eventId)}">${escapeHtml(item.eventId)}</a>
      <span class="prediction">${escapeHtml(item.predictedName)} @ ${item.confidencePct}</span>
      <span class="preview">${escapeHtml(item.preview)}</span>
      ${verdict}
    </li>`;
    })
    .join("");
  return `<ul class="contributions">${rows}</ul>`;
}

export function renderTreeSelector(view: ExplanationView): string {
  if (!view.treeIds.length) {
    return "";
  }
  const options = view.treeIds
    .map(
      (id) =>
        `<option value="${id}"${id === view.selectedTree ? " selected" : ""}>tree ${id}</option>`,
    )
    .join("");
  return `<select data-action="select-tree">${options}</select>`;
}

export function renderExplanationPanel(view: ExplanationView): string {
  const steps = view.pathLines.length
    ? `<ol class="path">${view.pathLines.map((l) => `<li>${escapeHtml(l.text)}</li>`).join("")}</ol>`
    : `<p class="path-empty">no path steps (root prediction)</p>`;
  return `
  <section class="explanation-panel">
    <div class="explanation-head">
      ${renderTreeSelector(view)}
      <span class="confidence">confidence ${view.confidencePct}</span>
    </div>
    <p class="headline">${escapeHtml(view.headline)}</p>
    ${steps}
    <p class="nl-text">${escapeHtml(view.text)}</p>
  </section>`;
}

export function renderMetricsBar(metrics: MetricsResponse): string {
  return `
  <footer class="metrics-bar">
    samples: ${metrics.sample_index} &middot;
    accuracy: ${(metrics.accuracy * 100).toFixed(2)}% &middot;
    feedback applied: ${metrics.feedback_applied}
  </footer>`;
}

export function renderRetryBanner(message: string): string {
  return `
  <div class="retry-banner">
    <span>${escapeHtml(message)}</span>
    <button data-action="retry">retry</button>
  </div>`;
}

export function renderUserView(
  user: UserResponse,
  cards: FeatureCard[],
  explanation: ExplanationView | null,
): string {
  return [
    renderUserHeader(user),
    renderFeatureCards(cards),
    renderContributions(contributionItems(user)),
    explanation ? renderExplanationPanel(explanation) : "",
  ].join("\n");
}
