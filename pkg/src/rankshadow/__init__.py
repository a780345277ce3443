"""Closedness of rank-restricted PSD coordinate shadows.

Classify entry patterns, build minimum-rank PSD completions, generate
divergent witness sequences, and cross-check everything with an
independent completion oracle.
"""

__version__ = "0.1.0"

from .classify import ClosureVerdict, Status, classify  # noqa: E402
from .completion import PartialMatrix, complete_for_verdict, project  # noqa: E402
from .graph import PatternGraph  # noqa: E402

__all__ = ["ClosureVerdict", "PartialMatrix", "PatternGraph", "Status", "classify",
           "complete_for_verdict", "project", "__version__"]
