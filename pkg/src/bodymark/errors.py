"""Exception hierarchy shared across the package."""


class BodymarkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BodymarkError):
    """Invalid or inconsistent configuration (bad sizes, counts, files)."""


class GenerationError(BodymarkError):
    """A primitive could not be generated within the retry budget."""


class SamplingExhaustedError(GenerationError):
    """Rejection sampling ran out of tries; the domain is implausibly sparse."""


class PngDecodeError(BodymarkError):
    """Byte stream is not a PNG this codec can decode."""
