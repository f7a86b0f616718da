"""Exception hierarchy for the eigengaze package."""


class EigengazeError(Exception):
    """Base class for all package errors."""


# --- image parsing / construction ---

class MalformedHeader(EigengazeError):
    pass


class SampleCountMismatch(EigengazeError):
    pass


class SampleOutOfRange(EigengazeError):
    pass


class ZeroImage(EigengazeError):
    pass


class EmptyOcclusion(EigengazeError):
    pass


class SideTooSmall(EigengazeError):
    pass


# --- linear algebra ---

class NoConvergence(EigengazeError):
    def __init__(self, message, off_norm=None):
        super().__init__(message)
        self.off_norm = off_norm


class DegenerateInput(EigengazeError):
    pass


class AllZero(EigengazeError):
    pass


# --- eigenspace construction / persistence ---

class DegenerateSet(EigengazeError):
    pass


class DimensionMismatch(EigengazeError):
    pass


class BadMagic(EigengazeError):
    pass


class VersionMismatch(EigengazeError):
    pass


class CorruptField(EigengazeError):
    pass


# --- registry ---

class DuplicateObject(EigengazeError):
    pass


class InsufficientData(EigengazeError):
    pass


class EmptyRegistryNoViews(EigengazeError):
    pass


# --- recognition / evaluation ---

class EmptyRegistry(EigengazeError):
    pass


class EmptyQuerySet(EigengazeError):
    pass


class DimsTooLarge(EigengazeError):
    pass


class NoImages(EigengazeError):
    pass
