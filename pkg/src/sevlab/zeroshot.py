"""Client for the external zero-shot classification service.

Wire contract: POST {"text": ..., "candidate_labels": [...]} and receive
{"labels": [...], "scores": [...]} as parallel arrays with scores in
[0, 1]. Transient failures retry with capped exponential backoff.

Endpoints of the form "stub://<name>" are served in-process by a
deterministic stand-in that derives a score distribution from a hash of
the text, so pipelines can run offline and reproducibly.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import requests

__all__ = ["ZeroShotError", "ZeroShotClient", "stub_scores"]

ENDPOINT_ENV = "ZEROSHOT_ENDPOINT"
TOKEN_ENV = "ZEROSHOT_TOKEN"


class ZeroShotError(RuntimeError):
    """Raised when the service is unreachable or violates the contract."""


def stub_scores(text: str, labels: tuple[str, ...]) -> dict[str, float]:
    """Deterministic pseudo-scores: a softmax over hash-derived logits."""
    logits = []
    for label in labels:
        digest = hashlib.sha256(f"{label}\x1f{text}".encode("utf-8")).digest()
        logits.append(int.from_bytes(digest[:8], "big") / 2**64 * 4.0)
    peak = max(logits)
    expo = [math.exp(v - peak) for v in logits]
    total = sum(expo)
    return {label: e / total for label, e in zip(labels, expo)}


@dataclass
class ZeroShotClient:
    """HTTP client with retries and an optional persistent response cache.

    The cache is keyed by (sha256 of text, labelset) and stored as an
    append-only JSONL file, so repeated runs never re-query the service
    for text it has already scored.
    """

    endpoint: str
    token: str | None = None
    timeout: float = 30.0
    max_attempts: int = 4
    backoff_base: float = 0.25
    backoff_cap: float = 4.0
    cache_path: str | Path | None = None

    def __post_init__(self) -> None:
        self._cache: dict[str, dict[str, float]] = {}
        if self.cache_path is not None:
            self.cache_path = Path(self.cache_path)
            if self.cache_path.exists():
                for line in self.cache_path.read_text("utf-8").splitlines():
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._cache[rec["key"]] = rec["scores"]

    @classmethod
    def from_env(cls, **kwargs) -> "ZeroShotClient":
        endpoint = os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise ZeroShotError(f"{ENDPOINT_ENV} is not set")
        return cls(endpoint=endpoint, token=os.environ.get(TOKEN_ENV), **kwargs)

    def classify(self, text: str, labels: tuple[str, ...]) -> dict[str, float]:
        """Score the candidate labels for one text, via cache when possible."""
        key = self._key(text, labels)
        if key in self._cache:
            return dict(self._cache[key])
        if self.endpoint.startswith("stub://"):
            scores = stub_scores(text, labels)
        else:
            scores = self._request(text, labels)
        self._cache[key] = scores
        if self.cache_path is not None:
            with open(self.cache_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": key, "scores": scores}) + "\n")
        return dict(scores)

    @staticmethod
    def _key(text: str, labels: tuple[str, ...]) -> str:
        text_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return f"{text_hash}|{','.join(labels)}"

    def _request(self, text: str, labels: tuple[str, ...]) -> dict[str, float]:
        payload = {"text": text, "candidate_labels": list(labels)}
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(min(self.backoff_base * 2 ** (attempt - 1), self.backoff_cap))
            try:
                response = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = ZeroShotError(f"service returned {response.status_code}")
                continue
            if response.status_code != 200:
                raise ZeroShotError(
                    f"service returned {response.status_code}: {response.text[:200]}"
                )
            return self._parse(response, labels)
        raise ZeroShotError(
            f"service unreachable after {self.max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _parse(response, labels: tuple[str, ...]) -> dict[str, float]:
        try:
            body = response.json()
            got_labels = body["labels"]
            got_scores = body["scores"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ZeroShotError(f"malformed response: {exc}") from exc
        if len(got_labels) != len(got_scores):
            raise ZeroShotError("labels and scores arrays differ in length")
        if set(got_labels) != set(labels):
            raise ZeroShotError(
                f"response labels {sorted(got_labels)} do not match requested {sorted(labels)}"
            )
        scores = {}
        for label, score in zip(got_labels, got_scores):
            score = float(score)
            if not 0.0 <= score <= 1.0:
                raise ZeroShotError(f"score {score} for {label!r} outside 0..1")
            scores[label] = score
        return scores
