class StairsolveError(Exception):
    """Base class for every error raised by stairsolve."""


class InvalidArgumentError(StairsolveError, ValueError):
    pass


class ChainValidationError(StairsolveError):
    pass


class NotAGeneratorError(ChainValidationError):
    pass


class AmbiguousConventionError(ChainValidationError):
    pass


class ReducibleChainError(ChainValidationError):
    pass


class MatrixMarketParseError(StairsolveError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class PrepareFailedError(StairsolveError):
    def __init__(self, block_index: int, message: str = "diagonal block is singular"):
        super().__init__(f"block {block_index}: {message}")
        self.block_index = block_index


class DenseLimitError(StairsolveError):
    pass


class DivergedError(StairsolveError):
    def __init__(self, iteration: int, message: str = "iterate is not a positive finite vector"):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


class NumericFailureError(StairsolveError):
    pass


class NotAStochasticSplittingError(StairsolveError):
    pass
