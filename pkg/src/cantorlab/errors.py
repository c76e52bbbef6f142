"""Exception hierarchy shared by every cantorlab module."""


class CantorLabError(Exception):
    """Base class; the CLI turns these into structured error reports."""


# measures
class MalformedSpec(CantorLabError):
    pass


class LocalizeOnNullCylinder(CantorLabError):
    pass


class TailToleranceUnreachable(CantorLabError):
    pass


class InconsistentReduction(CantorLabError):
    pass


class TruncationTooSmall(CantorLabError):
    pass


class DepthExceeded(CantorLabError):
    pass


# machines
class BudgetExceeded(CantorLabError):
    pass


class NonPrefixFreeDomain(CantorLabError):
    """The prefix-free interpreter halted on two comparable programs (interpreter bug)."""


class CoverageGap(CantorLabError):
    pass


class TailUncertifiable(CantorLabError):
    pass


# tests / sampler / entropy
class MassBoundViolated(CantorLabError):
    pass


class QuadratureNonConvergent(CantorLabError):
    pass


class NullCylinder(CantorLabError):
    pass


class SupportViolation(CantorLabError):
    pass


# cli
class UnknownExperiment(CantorLabError):
    pass


class InvalidManifest(CantorLabError):
    pass
