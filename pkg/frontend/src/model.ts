/** View models for the dashboard.
 *
 * All domain values (quartile colors, votes, confidence) come from the
 * service verbatim; this layer only shapes them for display. The one
 * mapping owned by the client is verdict-to-label: "validate" confirms
 * the predicted class, "reject" sends the opposite one.
 */

import {
  ApiClient,
  ApiError,
  ContributionView,
  ExplanationResponse,
  QuartileColor,
  UserResponse,
} from "./api.js";

export type Verdict = "validate" | "reject";

export function verdictToLabel(predicted: number, verdict: Verdict): number {
  return verdict === "validate" ? predicted : 1 - predicted;
}

export interface FeatureCard {
  feature: string;
  value: string;
  colorClass: "q-green" | "q-yellow" | "q-red" | "q-none";
}

const COLOR_CLASS: Record<string, FeatureCard["colorClass"]> = {
  green: "q-green",
  yellow: "q-yellow",
  red: "q-red",
};

export function colorClass(color: QuartileColor): FeatureCard["colorClass"] {
  return (color && COLOR_CLASS[color]) || "q-none";
}

export function featureCards(explanation: ExplanationResponse): FeatureCard[] {
  return explanation.top_features.map((f) => ({
    feature: f.feature,
    value: f.value.toPrecision(4),
    colorClass: colorClass(f.color),
  }));
}

export interface ContributionItem {
  eventId: string;
  predictedName: string;
  confidencePct: string;
  preview: string;
  evaluated: boolean;
  feedbackLabel: number | null;
}

export function contributionItems(user: UserResponse): ContributionItem[] {
  return user.contributions.map((c) => ({
    eventId: c.event_id,
    predictedName: c.predicted_name,
    confidencePct: (c.confidence * 100).toFixed(2) + "%",
    preview: c.text_preview,
    evaluated: c.evaluated,
    feedbackLabel: c.feedback_label,
  }));
}

export interface PathLine {
  text: string;
}

export interface ExplanationView {
  treeIds: number[];
  selectedTree: number;
  headline: string;
  pathLines: PathLine[];
  text: string;
  confidencePct: string;
}

export function explanationView(
  explanation: ExplanationResponse,
  selectedTree: number,
): ExplanationView {
  const treeIds = explanation.paths.map((p) => p.tree_id);
  const fallbackTree = treeIds.length ? treeIds[0] : -1;
  const active = treeIds.includes(selectedTree) ? selectedTree : fallbackTree;
  const path = explanation.paths.find((p) => p.tree_id === active);
  const pathLines = path
    ? path.steps.map((s) => ({
        text: `${s.feature} ${s.branch === "le" ? "≤" : ">"} ${s.threshold.toPrecision(4)}`,
      }))
    : [];
  const leafShare = path ? path.distribution[String(path.prediction)] ?? 0 : 0;
  const headline = path
    ? `Tree ${active} of ${treeIds.length} agreeing trees — leaf share ${(leafShare * 100).toFixed(1)}%`
    : "No decision paths for this model";
  return {
    treeIds,
    selectedTree: active,
    headline,
    pathLines,
    text: explanation.text,
    confidencePct: (explanation.confidence * 100).toFixed(2) + "%",
  };
}

/** UI state machine: holds the loaded user, explanation and feedback
 * bookkeeping. Feedback is optimistic: the item is marked evaluated
 * immediately, rolled back when the service rejects it (404), or kept
 * evaluated without our label on conflict (409, someone got there first).
 */
export class DashboardState {
  user: UserResponse | null = null;
  explanation: ExplanationResponse | null = null;
  selectedTree = 0;
  error: string | null = null;
  private inFlight = new Set<string>();

  constructor(private api: ApiClient) {}

  async loadUser(userId: string): Promise<void> {
    try {
      this.user = await this.api.getUser(userId);
      this.error = null;
    } catch (err) {
      this.user = null;
      this.error = describeError(err);
    }
  }

  async loadExplanation(eventId: string): Promise<void> {
    try {
      this.explanation = await this.api.getExplanation(eventId);
      this.selectedTree = this.explanation.paths.length
        ? this.explanation.paths[0].tree_id
        : 0;
      this.error = null;
    } catch (err) {
      this.explanation = null;
      this.error = describeError(err);
    }
  }

  selectTree(treeId: number): void {
    this.selectedTree = treeId;
  }

  contribution(eventId: string): ContributionView | undefined {
    return this.user?.contributions.find((c) => c.event_id === eventId);
  }

  /** Submit a verdict; duplicate clicks while a request is in flight
   * are dropped. Returns true when the feedback was applied. */
  async evaluate(eventId: string, verdict: Verdict): Promise<boolean> {
    const item = this.contribution(eventId);
    if (!item || item.evaluated || this.inFlight.has(eventId)) {
      return false;
    }
    const label = verdictToLabel(item.predicted, verdict);
    this.inFlight.add(eventId);
    item.evaluated = true; // optimistic
    item.feedback_label = label;
    try {
      await this.api.submitFeedback(eventId, label);
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        item.feedback_label = null; // evaluated elsewhere; keep it locked
        return false;
      }
      item.evaluated = false; // roll back
      item.feedback_label = null;
      this.error = describeError(err);
      return false;
    } finally {
      this.inFlight.delete(eventId);
    }
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `service error ${err.status}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
