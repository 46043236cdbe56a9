from .app import create_app
from .events import EventStore, SessionEvent

__all__ = ["create_app", "EventStore", "SessionEvent"]
