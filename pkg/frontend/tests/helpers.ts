/** Shared fixtures and a scriptable fetch stub. */

import { ExplanationResponse, UserResponse } from "../src/api.js";

export type Route = (init?: RequestInit) => { status: number; body: unknown };

export function mockFetch(routes: Record<string, Route>) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const key = Object.keys(routes).find((k) => url.includes(k));
    if (!key) {
      return new Response("not found", { status: 404 });
    }
    const { status, body } = routes[key](init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

export function userFixture(overrides: Partial<UserResponse> = {}): UserResponse {
  return {
    user_id: "user001",
    post_count: 3,
    spam_tendency: 0.25,
    antiquity_weeks: 4.5,
    week_frequency: 0.67,
    contributions: [
      {
        event_id: "ev1",
        predicted: 1,
        predicted_name: "disinformation",
        confidence: 0.8,
        truth: null,
        evaluated: false,
        feedback_label: null,
        text_preview: "shocking secret exposed",
      },
      {
        event_id: "ev2",
        predicted: 0,
        predicted_name: "non-disinformation",
        confidence: 0.6,
        truth: 0,
        evaluated: true,
        feedback_label: 0,
        text_preview: "fixed a typo in the article",
      },
    ],
    ...overrides,
  };
}

export function explanationFixture(
  overrides: Partial<ExplanationResponse> = {},
): ExplanationResponse {
  return {
    event_id: "ev1",
    predicted: 1,
    predicted_name: "disinformation",
    confidence: 2 / 3,
    majority: 1,
    paths: [
      {
        tree_id: 0,
        steps: [
          { feature: "n_chars", threshold: 120.5, branch: "gt", value: 200 },
          { feature: "aq_wp10stub", threshold: 0.45, branch: "gt", value: 0.7 },
        ],
        prediction: 1,
        distribution: { "0": 0.1, "1": 0.9 },
      },
      {
        tree_id: 2,
        steps: [{ feature: "user_spam_tendency", threshold: 0.2, branch: "gt", value: 0.4 }],
        prediction: 1,
        distribution: { "0": 0.3, "1": 0.7 },
      },
    ],
    top_features: [
      { feature: "n_chars", value: 200, color: "red" },
      { feature: "aq_wp10stub", value: 0.7, color: "yellow" },
      { feature: "user_spam_tendency", value: 0.4, color: "green" },
    ],
    text: "The classifier labeled this revision as disinformation.",
    generator: "template-fallback",
    ...overrides,
  };
}
