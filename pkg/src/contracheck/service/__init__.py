"""HTTP review service: detection over page text, a reviewer queue, and
verdict persistence."""

from .app import AnalysisJob, ReviewService, create_app
from .store import (
    HumanVerdict,
    ItemNotFoundError,
    ReviewItem,
    ReviewStore,
    VerdictConflictError,
    locate_highlight,
)

__all__ = [
    "AnalysisJob",
    "HumanVerdict",
    "ItemNotFoundError",
    "ReviewItem",
    "ReviewService",
    "ReviewStore",
    "VerdictConflictError",
    "create_app",
    "locate_highlight",
]
