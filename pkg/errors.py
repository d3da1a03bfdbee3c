"""Exception hierarchy shared by every csi2video package.

Each category carries the process exit code the CLI maps it to.
"""


class Csi2VideoError(Exception):
    exit_code = 1


class ConfigError(Csi2VideoError):
    exit_code = 2


class UnknownConfigKey(ConfigError):
    pass


class InvalidConfigValue(ConfigError):
    pass


class FormatError(Csi2VideoError):
    """A byte stream or text artifact could not be parsed or produced."""
    exit_code = 2


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class RangeOverflow(FormatError):
    pass


class DataError(Csi2VideoError):
    exit_code = 4


class ShapeMismatch(DataError):
    pass


class EmptySeries(DataError):
    pass


class IndivisiblePacketCount(DataError):
    pass


class EmptyDataset(DataError):
    pass


class FrameCountMismatch(DataError):
    pass


class NotScalar(DataError):
    pass


class DomainError(Csi2VideoError):
    exit_code = 4


class ZeroCfr(DomainError):
    pass


class VerificationError(Csi2VideoError):
    exit_code = 5
