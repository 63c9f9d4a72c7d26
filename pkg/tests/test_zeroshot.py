import json

import pytest
import requests

from sevlab.bdi import SEVERITY_LABELS
from sevlab.labeling import argmax_severe, zeroshot_label
from sevlab.zeroshot import ZeroShotClient, ZeroShotError, stub_scores

from conftest import make_doc


class FakeResponse:
    def __init__(self, status_code=200, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text or json.dumps(body)

    def json(self):
        if self._body is None:
            raise ValueError("no json")
        return self._body


class ScriptedPost:
    """Stands in for requests.post; pops one scripted outcome per call."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def __call__(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def client(**kw):
    kw.setdefault("endpoint", "http://zs.test/classify")
    kw.setdefault("backoff_base", 0.0)
    return ZeroShotClient(**kw)


def response_for(scores: dict):
    return FakeResponse(body={"labels": list(scores), "scores": list(scores.values())})


class TestClient:
    def test_argmax_and_confidence(self, monkeypatch):
        scores = {lbl: 0.02 for lbl in SEVERITY_LABELS}
        scores["Severe"] = 0.9
        monkeypatch.setattr(requests, "post", ScriptedPost([response_for(scores)]))
        got = client().classify("text", SEVERITY_LABELS)
        label, confidence = argmax_severe(got)
        assert label == "Severe"
        assert confidence == pytest.approx(0.9)

    def test_label_mismatch_rejected(self, monkeypatch):
        monkeypatch.setattr(
            requests, "post", ScriptedPost([response_for({"happy": 0.6, "sad": 0.4})])
        )
        with pytest.raises(ZeroShotError, match="do not match"):
            client().classify("text", SEVERITY_LABELS)

    def test_tie_breaks_to_more_severe(self, monkeypatch):
        scores = {lbl: 0.04 for lbl in SEVERITY_LABELS}
        scores["Moderate"] = 0.4
        scores["Severe"] = 0.4
        monkeypatch.setattr(requests, "post", ScriptedPost([response_for(scores)]))
        got = client().classify("text", SEVERITY_LABELS)
        assert argmax_severe(got)[0] == "Severe"

    def test_retry_then_success(self, monkeypatch):
        good = response_for({lbl: 1 / 6 for lbl in SEVERITY_LABELS})
        scripted = ScriptedPost(
            [requests.ConnectionError("down"), FakeResponse(status_code=503, body={}), good]
        )
        monkeypatch.setattr(requests, "post", scripted)
        got = client().classify("text", SEVERITY_LABELS)
        assert len(scripted.calls) == 3
        assert set(got) == set(SEVERITY_LABELS)

    def test_retries_exhausted(self, monkeypatch):
        scripted = ScriptedPost([requests.ConnectionError("down")] * 4)
        monkeypatch.setattr(requests, "post", scripted)
        with pytest.raises(ZeroShotError, match="unreachable after 4 attempts"):
            client().classify("text", SEVERITY_LABELS)
        assert len(scripted.calls) == 4

    def test_client_error_not_retried(self, monkeypatch):
        scripted = ScriptedPost([FakeResponse(status_code=401, body={}, text="denied")])
        monkeypatch.setattr(requests, "post", scripted)
        with pytest.raises(ZeroShotError, match="401"):
            client().classify("text", SEVERITY_LABELS)
        assert len(scripted.calls) == 1

    def test_malformed_response(self, monkeypatch):
        monkeypatch.setattr(
            requests, "post", ScriptedPost([FakeResponse(body={"labels": ["a"]})])
        )
        with pytest.raises(ZeroShotError, match="malformed"):
            client().classify("text", SEVERITY_LABELS)

    def test_parallel_array_length_check(self, monkeypatch):
        body = {"labels": list(SEVERITY_LABELS), "scores": [0.5]}
        monkeypatch.setattr(requests, "post", ScriptedPost([FakeResponse(body=body)]))
        with pytest.raises(ZeroShotError, match="differ in length"):
            client().classify("text", SEVERITY_LABELS)

    def test_score_range_check(self, monkeypatch):
        scores = {lbl: 0.1 for lbl in SEVERITY_LABELS}
        scores["Mild"] = 1.2
        monkeypatch.setattr(requests, "post", ScriptedPost([response_for(scores)]))
        with pytest.raises(ZeroShotError, match="outside 0..1"):
            client().classify("text", SEVERITY_LABELS)

    def test_token_header_sent(self, monkeypatch):
        scripted = ScriptedPost([response_for({lbl: 1 / 6 for lbl in SEVERITY_LABELS})])
        monkeypatch.setattr(requests, "post", scripted)
        client(token="sekrit").classify("text", SEVERITY_LABELS)
        assert scripted.calls[0]["headers"]["Authorization"] == "Bearer sekrit"


class TestStub:
    def test_deterministic_distribution(self):
        a = stub_scores("some text", SEVERITY_LABELS)
        b = stub_scores("some text", SEVERITY_LABELS)
        assert a == b
        assert sum(a.values()) == pytest.approx(1.0)
        assert all(0 <= v <= 1 for v in a.values())

    def test_different_texts_differ(self):
        assert stub_scores("one", SEVERITY_LABELS) != stub_scores("two", SEVERITY_LABELS)

    def test_stub_endpoint_never_touches_network(self, monkeypatch):
        def boom(*a, **kw):
            raise AssertionError("network was called")

        monkeypatch.setattr(requests, "post", boom)
        c = ZeroShotClient(endpoint="stub://test")
        got = c.classify("text", SEVERITY_LABELS)
        assert set(got) == set(SEVERITY_LABELS)


class TestCache:
    def test_cache_round_trip(self, tmp_path, monkeypatch):
        cache = tmp_path / "cache.jsonl"
        scripted = ScriptedPost([response_for({lbl: 1 / 6 for lbl in SEVERITY_LABELS})])
        monkeypatch.setattr(requests, "post", scripted)
        first = client(cache_path=cache).classify("text", SEVERITY_LABELS)
        assert len(scripted.calls) == 1

        def boom(*a, **kw):
            raise AssertionError("cache miss hit the network")

        monkeypatch.setattr(requests, "post", boom)
        second = client(cache_path=cache).classify("text", SEVERITY_LABELS)
        assert second == first


class TestZeroShotVote:
    def test_vote_fields(self):
        class FixedClient:
            def classify(self, text, labels):
                scores = {lbl: 0.02 for lbl in labels}
                scores["Moderate"] = 0.9
                return scores

        v = zeroshot_label(make_doc("anything"), FixedClient(), created_at=7)
        assert v.source == "zeroshot"
        assert v.label == "Moderate"
        assert v.confidence == pytest.approx(0.9)
        assert v.created_at == 7
