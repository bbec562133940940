"""Chat backends behind the gate: a deterministic stub and an external
chat-completion client. The stub needs no network and no credentials, so
tests and demos run hermetically; the external backend speaks the common
chat-completions JSON shape against any configured endpoint."""

from __future__ import annotations

import hashlib
import os

import httpx

from ..config import ChatBackendConfig
from ..errors import UpstreamError, ValidationError

SYSTEM_PREAMBLE = (
    "You are a study assistant embedded in a learning environment. "
    "Answer the learner's question clearly and briefly."
)

_STUB_TEMPLATES = (
    "Let's reason about it step by step: {topic}. Focus on what the text "
    "says explicitly before drawing conclusions.",
    "A useful angle on {topic}: compare the claims in the passage with "
    "your own experience, then re-read the relevant paragraph.",
    "Regarding {topic} - look for the sentence that defines the key term; "
    "the correct options usually restate it in different words.",
    "Two things matter for {topic}: what the author states directly, and "
    "what the question is actually asking. Check both.",
)


class StubChatBackend:
    """Canned replies keyed by a hash of the request text: deterministic,
    instant, offline."""

    mode = "stub"

    def reply(self, message: str) -> str:
        digest = hashlib.sha256(message.encode("utf-8")).hexdigest()
        template = _STUB_TEMPLATES[int(digest[:8], 16) % len(_STUB_TEMPLATES)]
        topic = message.strip()[:80] or "your question"
        return f"{template.format(topic=topic)} [stub:{digest[:12]}]"


class ExternalChatBackend:
    """Minimal chat-completions client for a configured HTTP endpoint."""

    mode = "external"

    def __init__(self, cfg: ChatBackendConfig):
        if not cfg.endpoint:
            raise ValidationError("external chat backend requires an endpoint")
        self.cfg = cfg

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.cfg.auth_token_env:
            token = os.environ.get(self.cfg.auth_token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def reply(self, message: str) -> str:
        payload = {
            "model": self.cfg.model or "default",
            "messages": [
                {"role": "system", "content": SYSTEM_PREAMBLE},
                {"role": "user", "content": message},
            ],
        }
        try:
            resp = httpx.post(
                self.cfg.endpoint,
                json=payload,
                headers=self._headers(),
                timeout=self.cfg.timeout_seconds,
            )
        except httpx.TimeoutException as exc:
            raise UpstreamError(f"chat backend timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise UpstreamError(f"chat backend unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise UpstreamError(f"chat backend returned {resp.status_code}")
        if resp.status_code >= 400:
            raise UpstreamError(
                f"chat backend rejected the request ({resp.status_code})",
                retry_after_seconds=30,
            )
        try:
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise UpstreamError(f"chat backend reply malformed: {exc}") from exc


def make_backend(cfg: ChatBackendConfig):
    if cfg.mode == "stub":
        return StubChatBackend()
    if cfg.mode == "external":
        return ExternalChatBackend(cfg)
    raise ValidationError(f"unknown chat backend mode {cfg.mode!r}")
