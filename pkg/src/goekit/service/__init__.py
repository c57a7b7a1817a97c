"""HTTP service wrapping the scoring core."""

from .app import API_PREFIX, ServiceConfig, create_app
from .sessions import ConflictError, SessionError, SessionManager, UnknownSession

__all__ = [
    "API_PREFIX",
    "ServiceConfig",
    "create_app",
    "ConflictError",
    "SessionError",
    "SessionManager",
    "UnknownSession",
]
