"""Exception types raised across the package.

Everything derives from :class:`RefineError`. The CLI maps
:class:`ModelFileError` to exit code 4 and any other :class:`DataError`
to exit code 3.
"""


class RefineError(Exception):
    pass


class DataError(RefineError):
    """Bad or unusable input data."""


class EmptyCorpus(DataError, ValueError):
    pass


class EmptyData(DataError, ValueError):
    pass


class EmptyInput(DataError, ValueError):
    pass


class ShapeMismatch(DataError, ValueError):
    pass


class InvalidWeights(DataError, ValueError):
    pass


class TooFewSamples(DataError, ValueError):
    pass


class SingularSystem(DataError, ArithmeticError):
    pass


class FileNotFound(DataError, FileNotFoundError):
    pass


class SchemaMismatch(DataError):
    pass


class EmptyFile(DataError):
    pass


class TestCountTooLarge(DataError, ValueError):
    __test__ = False  # keep pytest from collecting this


class MissingLabels(DataError):
    pass


class ModelFileError(RefineError):
    """A model file could not be written or read back."""


class ModelIOError(ModelFileError, OSError):
    pass


class BadMagic(ModelFileError):
    pass


class VersionUnsupported(ModelFileError):
    pass


class ChecksumMismatch(ModelFileError):
    pass


class DegenerateStage(UserWarning):
    """A refinement stage found no samples to compensate and was left as identity."""
