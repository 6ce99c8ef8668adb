"""Exception hierarchy shared across the engine."""


class TextcfError(Exception):
    """Base class for all engine errors."""


class InputError(TextcfError):
    """Caller violated a precondition (bad text, position, config value...)."""


class GatewayError(TextcfError):
    """A model backend failed or returned a malformed response."""


class CapabilityError(TextcfError):
    """A gateway was asked for a capability it does not expose."""


class DegenerateEmbeddingError(TextcfError):
    """An embedding had zero norm, so cosine similarity is undefined."""


class EmptyProposalError(TextcfError):
    """Mask infilling produced no usable substitute for a position."""

    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(message or f"no substitute proposals left for position {position}")
