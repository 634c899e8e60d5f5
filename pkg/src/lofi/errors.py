"""Exception hierarchy shared by all pipeline stages.

Every error carries a distinct process exit code so the CLI can surface
module failures as machine-parsable one-liners.
"""


class LofiError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1

    @property
    def code_name(self) -> str:
        return type(self).__name__


class InputOutputError(LofiError):
    """A referenced file is missing or unreadable."""

    exit_code = 3


class ConfigError(LofiError):
    """Invalid configuration value or malformed config file."""

    exit_code = 4


class CollinearAnchors(LofiError):
    """Three of the four calibration anchors are (nearly) collinear."""

    exit_code = 10


class SingularSystem(LofiError):
    """The calibration system is rank-deficient or the matrix is not invertible."""

    exit_code = 11


class PointAtInfinity(LofiError):
    """Projective application produced a vanishing homogeneous component."""

    exit_code = 12


class SchemaError(LofiError):
    """An input file does not match its declared schema."""

    exit_code = 20


class NonFiniteValue(LofiError):
    """NaN or infinity encountered where finite values are required."""

    exit_code = 21


class NegativeGap(LofiError):
    """Consecutive packet timestamps decreased; stream was not normalized."""

    exit_code = 22


class TooShort(LofiError):
    """Input has fewer elements than the operation requires."""

    exit_code = 23


class EmptyLabels(LofiError):
    """Alignment requested against an empty label stream."""

    exit_code = 30


class OutOfRegion(LofiError):
    """A coordinate lies outside the region grid beyond the clamp tolerance."""

    exit_code = 40


class EmptyTrain(LofiError):
    """Nearest-neighbor lookup against an empty training set."""

    exit_code = 41


class EmptyInput(LofiError):
    """Evaluation over an empty set of produced labels."""

    exit_code = 42
