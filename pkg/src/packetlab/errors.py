"""Exception hierarchy shared by all packetlab modules."""


class PacketLabError(Exception):
    """Base class for every error raised by packetlab."""


class DomainError(PacketLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(PacketLabError, ValueError):
    """A numerical or physical precondition of an operation is violated."""


class AnalysisError(PacketLabError, RuntimeError):
    """Post-processing could not extract the requested quantity."""
