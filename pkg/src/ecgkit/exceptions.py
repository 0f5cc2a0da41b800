"""Exception hierarchy.

Everything raised on purpose by ecgkit derives from :class:`EcgKitError`, so
callers can catch the whole family. The CLI maps the three top-level branches
(configuration, I/O, validation) onto distinct exit codes.
"""


class EcgKitError(Exception):
    """Base class for all ecgkit errors."""


class ConfigError(EcgKitError, ValueError):
    """Bad or unknown configuration keys/values."""


class FormatError(EcgKitError, IOError):
    """A file could not be parsed."""


class ValidationError(EcgKitError, ValueError):
    """Input violates a documented precondition or invariant."""


# core / io
class MissingLead(ValidationError):
    pass


class DuplicateLead(ValidationError):
    pass


class UnknownLead(ValidationError):
    pass


class NonFiniteSample(ValidationError):
    pass


class MalformedHeader(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


# preprocess
class FrequencyAboveNyquist(ValidationError):
    pass


class InvalidBand(ValidationError):
    pass


class SignalTooShort(ValidationError):
    pass


class ConstantSignal(ValidationError):
    pass


# symbolic
class SampleOutOfRange(ValidationError):
    pass


class EmptyCorpus(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    pass


# assemble
class EmptyConversation(ValidationError):
    pass


class MissingSignalPlaceholder(ValidationError):
    """Rendered conversation does not contain exactly one signal placeholder."""


class SignalTokenTruncated(ValidationError):
    pass


class BudgetInfeasible(ValidationError):
    pass


class SpanOutOfRange(ValidationError):
    pass


# eval
class FewerThanTwoModels(ValidationError):
    pass


class InvalidScoreTable(ValidationError):
    pass
