"""Gateway service: transport envelopes, durable logging, REST API, replay."""

from .transport import Envelope, InProcessChannel, DirectoryChannel, publish, poll
from .store import LogStore, LogRow
from .service import GatewayConfig, Gateway, create_app, replay_session

__all__ = [
    "Envelope",
    "InProcessChannel",
    "DirectoryChannel",
    "publish",
    "poll",
    "LogStore",
    "LogRow",
    "GatewayConfig",
    "Gateway",
    "create_app",
    "replay_session",
]
