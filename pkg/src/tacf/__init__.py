"""Tri-attention correlation-filter tracking."""

from .tracker import KCCTracker, TACFTracker

__all__ = ["KCCTracker", "TACFTracker"]
