/** Typed client for the wikiguard service REST API. */

export type QuartileColor = "green" | "yellow" | "red" | null;

export interface TopFeature {
  feature: string;
  value: number;
  color: QuartileColor;
}

export interface PathStep {
  feature: string;
  threshold: number;
  branch: "le" | "gt";
  value: number | null;
}

export interface DecisionPath {
  tree_id: number;
  steps: PathStep[];
  prediction: number;
  distribution: Record<string, number>;
}

export interface ExplanationResponse {
  event_id: string;
  predicted: number;
  predicted_name: string;
  confidence: number;
  majority: number;
  paths: DecisionPath[];
  top_features: TopFeature[];
  text: string;
  generator: "llm" | "template-fallback";
}

export interface ContributionView {
  event_id: string;
  predicted: number;
  predicted_name: string;
  confidence: number;
  truth: number | null;
  evaluated: boolean;
  feedback_label: number | null;
  text_preview: string;
}

export interface UserResponse {
  user_id: string;
  post_count: number;
  spam_tendency: number;
  antiquity_weeks: number;
  week_frequency: number;
  contributions: ContributionView[];
}

export interface FeedbackResponse {
  event_id: string;
  expert_label: number;
  prior_prediction: number;
  timestamp: string;
  applied: boolean;
}

export interface MetricsResponse {
  sample_index: number;
  labeled_samples: number;
  accuracy: number;
  f1_macro: number;
  feedback_applied: number;
}

export interface PredictionResponse {
  event_id: string;
  predicted: number;
  predicted_name: string;
  confidence: number;
  explanation_id: string;
  trained: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const body = await response.text();
      throw new ApiError(response.status, body || response.statusText);
    }
    return (await response.json()) as T;
  }

  postEvent(record: object): Promise<PredictionResponse> {
    return this.request<PredictionResponse>("/events", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  async listUsers(): Promise<string[]> {
    const body = await this.request<{ users: string[] }>("/users");
    return body.users;
  }

  getUser(userId: string): Promise<UserResponse> {
    return this.request<UserResponse>(`/users/${encodeURIComponent(userId)}`);
  }

  getExplanation(eventId: string): Promise<ExplanationResponse> {
    return this.request<ExplanationResponse>(`/explanations/${encodeURIComponent(eventId)}`);
  }

  getMetrics(): Promise<MetricsResponse> {
    return this.request<MetricsResponse>("/metrics");
  }

  submitFeedback(eventId: string, label: number): Promise<FeedbackResponse> {
    return this.request<FeedbackResponse>("/feedback", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ event_id: eventId, label }),
    });
  }
}
