"""Exception hierarchy shared by all t2ieval modules.

Every error raised by the library derives from T2IEvalError so the CLI can
map any library failure to exit code 2 while usage errors stay at 64.
"""


class T2IEvalError(Exception):
    """Base class for all t2ieval errors."""


# --- statistics / linear algebra ---

class FewerThanTwoSamples(T2IEvalError):
    pass


class NonFiniteInput(T2IEvalError):
    pass


class DimensionMismatch(T2IEvalError):
    pass


class NotSymmetric(T2IEvalError):
    pass


class IndefiniteMatrix(T2IEvalError):
    pass


class NumericalFailure(T2IEvalError):
    pass


# --- similarity / losses ---

class ZeroVector(T2IEvalError):
    pass


class NonSquare(T2IEvalError):
    pass


class NonFinite(T2IEvalError):
    pass


class EmptyBatch(T2IEvalError):
    pass


class EmptyInput(T2IEvalError):
    pass


# --- binary formats / bundles ---

class IoFailure(T2IEvalError):
    pass


class ShapeMismatch(T2IEvalError):
    pass


class BadMagic(T2IEvalError):
    pass


class UnsupportedVersion(T2IEvalError):
    pass


class UnsupportedDtype(T2IEvalError):
    pass


class TruncatedFile(T2IEvalError):
    pass


class TrailingBytes(T2IEvalError):
    pass


class NonFiniteValue(T2IEvalError):
    pass


class MissingFile(T2IEvalError):
    pass


class ManifestMismatch(T2IEvalError):
    pass


class OffsetsInvalid(T2IEvalError):
    pass
