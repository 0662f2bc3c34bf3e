"""Exception types shared across the toolkit.

Grouped by failure domain so the CLI can map whole families to exit codes:
container/format problems, capacity violations, and integrity violations
(missing or corrupted embedded data).
"""


class NnstegoError(Exception):
    """Base class for all toolkit errors."""


class ContainerError(NnstegoError):
    """Problems with the tensor container file format."""


class MalformedHeader(ContainerError):
    """Header length prefix or header text does not follow the format."""


class OffsetOverlap(ContainerError):
    """Two tensor data regions overlap or are out of order."""


class TruncatedData(ContainerError):
    """Declared tensor offsets reach beyond the end of the file."""


class MissingTensor(ContainerError):
    """A tensor required by name is not present in the model."""


class ShapeMismatch(ContainerError):
    """Tensor shapes are inconsistent with the requested layer structure."""


class CodecError(NnstegoError):
    """Bit-level float codec failures."""


class NotPinned(CodecError):
    """Leading byte of a word is outside the pin set; the parameter does not
    carry an encoded triplet."""


class CapacityError(NnstegoError):
    """Payload cannot fit the selected carrier."""


class PayloadTooLarge(CapacityError):
    pass


class LayerTooSmall(CapacityError):
    """Layer has too few neurons to hold the embedded header."""


class EmptyPayload(CapacityError):
    pass


class IntegrityError(NnstegoError):
    """Embedded data is absent, unsupported, or fails verification."""


class NoStegoHeader(IntegrityError):
    """No valid embedded header found (magic mismatch or implausible fields)."""


class UnsupportedVersion(IntegrityError):
    pass


class DigestMismatch(IntegrityError):
    """Extracted payload does not match the digest recorded at embed time."""


class TrainingError(NnstegoError):
    pass


class NonFiniteLoss(TrainingError):
    """Training loss became NaN or infinite."""
