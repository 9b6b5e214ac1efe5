"""Exception hierarchy shared by every jivelab module."""


class JiveError(ValueError):
    """Base class for all numerical / contract failures raised by jivelab."""


class RankDeficient(JiveError):
    pass


class InvalidRank(JiveError):
    pass


class NotSquare(JiveError):
    pass


class NotSymmetric(JiveError):
    pass


class DimensionMismatch(JiveError):
    pass


class DimensionOverflow(JiveError):
    """Requested bases do not fit in the ambient dimension."""


class NonFinite(JiveError):
    pass


class InvalidTheta(JiveError):
    pass


class UnidentifiableTheta(InvalidTheta):
    """theta == 0: unique subspaces aligned, shared subspace not identifiable."""


class OddK(JiveError):
    pass


class SchemeConstraint(JiveError):
    pass


class EmptyList(JiveError):
    pass


class UnknownIdentity(JiveError):
    pass


class UnknownPreset(JiveError):
    pass


class InsufficientData(JiveError):
    pass


class NonpositiveError(JiveError):
    pass


class MatrixFormatError(JiveError):
    pass
