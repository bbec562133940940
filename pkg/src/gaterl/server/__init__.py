"""Live gate service: decision core, chat backends, HTTP app."""

from .app import SessionStore, create_app, iso_utc, parse_timestamp
from .chat import ExternalChatBackend, StubChatBackend, make_backend
from .core import CONDITIONS, GateDecision, GateSessionCore, obs_as_dict, replay_events

__all__ = [
    "CONDITIONS",
    "ExternalChatBackend",
    "GateDecision",
    "GateSessionCore",
    "SessionStore",
    "StubChatBackend",
    "create_app",
    "iso_utc",
    "make_backend",
    "obs_as_dict",
    "parse_timestamp",
    "replay_events",
]
