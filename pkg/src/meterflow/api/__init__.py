"""HTTP/JSON facade and its supporting state."""

from .app import create_app
from .service import AnalyticsService

__all__ = ["create_app", "AnalyticsService"]
