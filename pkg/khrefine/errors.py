from typing import Any, ClassVar


class KhRefineError(ValueError):
    """
    Base class for every error raised on purpose by khrefine.

    Each subclass carries the process exit code the CLI reports for it, and
    keyword context (crossing index, edge label, q, ...) that is serialized
    next to the message.
    """

    #: Exit code reported by the command line front end.
    exit_code: ClassVar[int] = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            "context": self.context,
        }


class DiagramError(KhRefineError):
    exit_code = 2


class PDSyntaxError(DiagramError):
    pass


class EdgeLabelError(DiagramError):
    pass


class OrientationError(DiagramError):
    pass


class PlanarityError(DiagramError):
    pass


class PreconditionError(KhRefineError):
    exit_code = 3


class NotAKnotError(PreconditionError):
    pass


class InvalidSignAssignment(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class InvalidMoveError(PreconditionError):
    pass


class ParityError(PreconditionError):
    pass


class MissingMirrorOperation(PreconditionError):
    pass


class UnsupportedModulus(PreconditionError):
    pass


class EmptyScanRange(PreconditionError):
    pass


class OperationFileError(KhRefineError):
    exit_code = 4


class FingerprintMismatch(OperationFileError):
    pass


class OperationDimensionError(OperationFileError):
    pass
