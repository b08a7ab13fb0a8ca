"""Exception hierarchy shared by all modules."""


class RfpaError(Exception):
    """Base class for every error raised by this package."""


# --- configuration -------------------------------------------------------

class ConfigError(RfpaError, ValueError):
    """A system parameter violates one of the validity invariants."""


class NonPositiveParameter(ConfigError):
    pass


class NonIntegerChipLength(ConfigError):
    pass


class SampleRateTooLow(ConfigError):
    pass


class BandwidthExceeded(ConfigError):
    pass


class TooManyTxAntennas(ConfigError):
    pass


class TooFewTxAntennas(ConfigError):
    pass


class TooFewRxAntennas(ConfigError):
    pass


class NonIntegerAlphabet(ConfigError):
    pass


class NonPowerOfTwoAlphabet(ConfigError):
    pass


class AlphabetMismatch(ConfigError):
    pass


# --- codec ---------------------------------------------------------------

class InsufficientBits(RfpaError, ValueError):
    pass


class OverflowGuard(RfpaError, ArithmeticError):
    pass


class InvalidHopSet(RfpaError, ValueError):
    """Hop codes that do not factor into a codebook (subset, permutation)."""


# --- waveform / channel --------------------------------------------------

class PlanLengthMismatch(RfpaError, ValueError):
    pass


class DimensionMismatch(RfpaError, ValueError):
    pass


class ZeroRateScheme(RfpaError, ValueError):
    pass


# --- receiver ------------------------------------------------------------

class RankDeficientChannel(RfpaError, ArithmeticError):
    pass


class SearchSpaceTooLarge(RfpaError, ValueError):
    pass


# --- ambiguity / harness -------------------------------------------------

class DelayOutOfRange(RfpaError, ValueError):
    pass


class GridTooLarge(RfpaError, ValueError):
    pass
