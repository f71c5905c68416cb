"""Exception types raised across the package."""


class CausalSynthError(Exception):
    """Base class for all package errors."""


class CycleError(CausalSynthError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"adding edge {edge[0]}->{edge[1]} would create a directed cycle")


class DatasetError(CausalSynthError, ValueError):
    """Malformed tabular input (ragged rows, non-finite values, duplicate names)."""


class DegenerateColumnError(CausalSynthError, ValueError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("constant column(s): " + ", ".join(map(str, self.columns)))


class SampleTooSmallError(CausalSynthError, ValueError):
    pass


class DegenerateInputError(CausalSynthError, ValueError):
    pass


class SingularKernelError(CausalSynthError, ArithmeticError):
    pass


class EnumerationLimitError(CausalSynthError, ValueError):
    pass


class FitFailureError(CausalSynthError, RuntimeError):
    pass


class ShapeError(CausalSynthError, ValueError):
    pass


class NodeCountMismatch(CausalSynthError, ValueError):
    pass


class TooFewReferenceRows(CausalSynthError, ValueError):
    pass
