"""Exception hierarchy shared by all rankshadow modules."""


class RankShadowError(Exception):
    """Base class for every error raised by this package."""


class GraphError(RankShadowError, ValueError):
    """Malformed pattern graph, or a graph outside an operation's domain."""


class NotPSD(RankShadowError, ValueError):
    """A matrix required to be positive semidefinite is not."""

    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = float(eigenvalue)
        super().__init__(message or f"matrix is not PSD (eigenvalue {self.eigenvalue:.3e})")


class RangeViolation(RankShadowError, ValueError):
    """range(B) is not contained in range(A); no PSD completion exists."""


class RankExceeded(RankShadowError, ValueError):
    """Input rank exceeds the requested rank bound."""


class RecipeInapplicable(RankShadowError):
    """No constructive completion recipe applies to this verdict/data."""


class RankOutOfRange(RankShadowError, ValueError):
    pass


class AuditFailed(RankShadowError):
    """A certificate claim did not survive re-verification."""

    def __init__(self, claim, detail=""):
        self.claim = claim
        self.detail = detail
        super().__init__(f"{claim}: {detail}" if detail else claim)


class WitnessError(RankShadowError, ValueError):
    """Witness family preconditions are not met by the supplied anchors."""


class NotATriangle(WitnessError):
    pass


class PathClosesCycle(WitnessError):
    pass


class NotAClique(WitnessError):
    pass


class PairInvalid(WitnessError):
    pass


class UnsupportedPattern(WitnessError):
    pass


class LoopsUnsupported(RankShadowError, ValueError):
    pass


class NonConvergence(RankShadowError):
    """Iterative solver stopped at max_iters; ``report`` holds the last state."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
