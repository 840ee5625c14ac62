"""Exception hierarchy shared across the package."""


class AerogenError(Exception):
    """Base class for all package-specific errors."""


class OutOfBoundsError(AerogenError, ValueError):
    """A position falls outside the permitted world bounds."""


class ConfigError(AerogenError, ValueError):
    """Invalid configuration value (weights, ranges, policies, ...)."""


class SpawnSpecError(AerogenError, ValueError):
    """Malformed spawn-rule string. Carries the offending token."""

    def __init__(self, token: str, message: str):
        super().__init__(message)
        self.token = token


class IntegrityError(AerogenError, RuntimeError):
    """Buffers, manifests, or files disagree with the state that produced them."""


class AlignmentError(AerogenError, ValueError):
    """Distribution alignment is impossible; reports the target mass the
    source cannot cover."""

    def __init__(self, message: str, uncovered_mass: float = 1.0):
        super().__init__(message)
        self.uncovered_mass = uncovered_mass


class ProtocolError(AerogenError, ValueError):
    """Malformed wire message or framing violation."""


class MessageDecodeError(ProtocolError):
    """A fully framed message whose body is not a JSON object.

    The frame was consumed whole, so the stream is still aligned and the
    connection may continue after an error reply.
    """


class DegenerateBoxError(AerogenError, ValueError):
    """A zero-area box where a proper rectangle is required."""
