"""Per-prediction explanations: decision paths, quartile-colored top
features and a natural-language summary.

Path extraction replays a tree dump (the checkpoint JSON structure), so
it never touches live model state. For forests, trees that disagree
with the majority vote are filtered out before display; the retained
share is exactly the reported confidence.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import httpx

from .errors import UnsupportedModelError

logger = logging.getLogger(__name__)

CLASS_NAMES = {0: "non-disinformation", 1: "disinformation"}

DEFAULT_LLM_MODEL = "gpt-3.5-turbo"
LLM_TIMEOUT_S = 10.0

PROMPT_TEMPLATE = (
    "Our Machine Learning model has predicted that this text {text} is "
    "classified as {category} with a confidence of {confidence}%. "
    "The most relevant path features are: [{features}]. "
    "Generate a human-explainable text that summarizes the decision made "
    "by the classifier."
)

PROMPT_PARSE_RE = re.compile(
    r"this text (?P<text>.*) is classified as (?P<category>.*?) with a "
    r"confidence of (?P<confidence>[\d.]+)%\. The most relevant path "
    r"features are: \[(?P<features>.*)\]\.",
    re.DOTALL,
)


@dataclass
class PathStep:
    feature: str
    threshold: float
    branch: str  # "le" or "gt"
    value: Optional[float]


@dataclass
class DecisionPath:
    tree_id: int
    steps: list[PathStep]
    prediction: int
    distribution: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "tree_id": self.tree_id,
            "steps": [
                {
                    "feature": s.feature,
                    "threshold": s.threshold,
                    "branch": s.branch,
                    "value": s.value,
                }
                for s in self.steps
            ],
            "prediction": self.prediction,
            "distribution": {str(k): v for k, v in self.distribution.items()},
        }


@dataclass
class Explanation:
    event_id: str
    predicted: int
    confidence: float
    majority: int
    paths: list[DecisionPath]
    top_features: list[dict]
    text: str
    generator: str

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "predicted": self.predicted,
            "predicted_name": CLASS_NAMES[self.predicted],
            "confidence": self.confidence,
            "majority": self.majority,
            "paths": [p.to_dict() for p in self.paths],
            "top_features": self.top_features,
            "text": self.text,
            "generator": self.generator,
        }


def _walk_tree(root: dict, x: dict) -> tuple[list[PathStep], dict]:
    steps = []
    node = root
    while not node["leaf"]:
        value = x.get(node["feature"])
        if value is None:
            left_weight = node["left"]["weight"]
            right_weight = node["right"]["weight"]
            go_left = left_weight >= right_weight
        else:
            go_left = value <= node["threshold"]
        steps.append(
            PathStep(
                feature=node["feature"],
                threshold=node["threshold"],
                branch="le" if go_left else "gt",
                value=value,
            )
        )
        node = node["left"] if go_left else node["right"]
    return steps, node


def _leaf_outcome(leaf: dict) -> tuple[int, dict[int, float]]:
    w0, w1 = leaf["counts"]
    total = w0 + w1
    if total <= 0:
        return 0, {0: 0.5, 1: 0.5}
    return (1 if w1 > w0 else 0), {0: w0 / total, 1: w1 / total}


def extract_paths(dump: dict, x: dict) -> list[DecisionPath]:
    """Replay the routing of ``x`` through each tree of a model dump."""
    kind = dump.get("kind")
    if kind == "hatc":
        roots = [dump["root"]]
    elif kind == "arfc":
        roots = dump["trees"]
    else:
        raise UnsupportedModelError(f"model kind {kind!r} has no decision paths")
    paths = []
    for tree_id, root in enumerate(roots):
        steps, leaf = _walk_tree(root, x)
        prediction, distribution = _leaf_outcome(leaf)
        paths.append(DecisionPath(tree_id, steps, prediction, distribution))
    return paths


def filter_minority_trees(paths: Sequence[DecisionPath]) -> tuple[list[DecisionPath], int]:
    """Drop trees that disagree with the majority vote (tie -> class 0)."""
    if not paths:
        raise UnsupportedModelError("no paths to filter")
    ones = sum(p.prediction for p in paths)
    majority = 1 if ones > len(paths) - ones else 0
    retained = [p for p in paths if p.prediction == majority]
    return retained, majority


def quartile_color(value: float, quartiles) -> Optional[str]:
    """green / yellow / red when the value exceeds Q1 / Q2 / Q3."""
    if quartiles is None:
        return None
    q1, q2, q3 = quartiles
    if value > q3:
        return "red"
    if value > q2:
        return "yellow"
    if value > q1:
        return "green"
    return None


def top_selected_features(
    selected: dict[str, float], tracker, quantiles, k: int = 3
) -> list[dict]:
    """The k selected features with the highest running variance.

    Ties break toward the lexicographically smaller id. Fewer than k
    selected features simply yields fewer entries.
    """
    ranked = sorted(selected, key=lambda f: (-tracker.variance(f), f))[:k]
    report = []
    for feature in ranked:
        value = selected[feature]
        color = quartile_color(value, quantiles.quartiles(feature)) if quantiles else None
        report.append({"feature": feature, "value": value, "color": color})
    return report


def build_prompt(text: str, category: str, confidence: float, features: Sequence[str]) -> str:
    """Fill the summary-generation prompt; confidence as a 2-decimal percent."""
    return PROMPT_TEMPLATE.format(
        text=text,
        category=category,
        confidence=f"{confidence * 100.0:.2f}",
        features=", ".join(features),
    )


def parse_prompt(prompt: str) -> dict:
    """Inverse of :func:`build_prompt`, used to verify round-trips."""
    match = PROMPT_PARSE_RE.search(prompt)
    if match is None:
        raise ValueError("prompt does not match the template")
    features = match.group("features")
    return {
        "text": match.group("text"),
        "category": match.group("category"),
        "confidence": float(match.group("confidence")) / 100.0,
        "features": [f.strip() for f in features.split(",")] if features else [],
    }


def fallback_text(category: str, confidence: float, features: Sequence[str]) -> str:
    listing = ", ".join(features) if features else "no specific features"
    return (
        f"The classifier labeled this revision as {category} with "
        f"{confidence * 100.0:.2f}% confidence. The decision relied mainly "
        f"on: {listing}."
    )


class LlmClient:
    """Minimal chat-completion client with a deterministic fallback.

    Configured through ``LLM_ENDPOINT`` / ``LLM_API_KEY`` / ``LLM_MODEL``
    or constructor arguments; a custom ``transport`` enables recorded
    responses in tests. Generation failures never propagate: the caller
    always gets text, tagged with its origin.
    """

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        model: Optional[str] = None,
        timeout: float = LLM_TIMEOUT_S,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint if endpoint is not None else os.environ.get("LLM_ENDPOINT")
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.model = model if model is not None else os.environ.get("LLM_MODEL", DEFAULT_LLM_MODEL)
        self.timeout = timeout
        self.transport = transport

    def generate(self, prompt: str, fallback: str) -> tuple[str, str]:
        if not self.endpoint:
            return fallback, "template-fallback"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            with httpx.Client(transport=self.transport, timeout=self.timeout) as client:
                response = client.post(self.endpoint, json=payload, headers=headers)
                response.raise_for_status()
                body = response.json()
            text = body["choices"][0]["message"]["content"]
            return text, "llm"
        except Exception as exc:  # any transport/shape failure falls back
            logger.warning("LLM generation failed (%s); using template fallback", exc)
            return fallback, "template-fallback"


def build_explanation(
    event_id: str,
    content: str,
    predicted: int,
    confidence: float,
    selected: dict[str, float],
    tracker,
    quantiles,
    model_dump: Optional[dict],
    llm: Optional[LlmClient] = None,
) -> Explanation:
    """Assemble the full explanation for one stored prediction."""
    paths: list[DecisionPath] = []
    majority = predicted
    if model_dump is not None:
        try:
            all_paths = extract_paths(model_dump, selected)
            paths, majority = filter_minority_trees(all_paths)
        except UnsupportedModelError:
            paths = []
    top = top_selected_features(selected, tracker, quantiles)
    category = CLASS_NAMES[predicted]
    feature_names = [t["feature"] for t in top]
    prompt = build_prompt(content, category, confidence, feature_names)
    fallback = fallback_text(category, confidence, feature_names)
    client = llm if llm is not None else LlmClient()
    text, generator = client.generate(prompt, fallback)
    return Explanation(
        event_id=event_id,
        predicted=predicted,
        confidence=confidence,
        majority=majority,
        paths=paths,
        top_features=top,
        text=text,
        generator=generator,
    )
