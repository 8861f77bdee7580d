"""Exception hierarchy. Every error carries a short machine-parsable code
used by the CLI for single-line error reporting."""


class StableFieldError(Exception):
    """Base class for all library errors."""

    code = "error"


class DomainError(StableFieldError):
    """Argument outside the mathematical domain of an operation."""

    code = "domain"


class DimensionMismatchError(StableFieldError):
    """Objects with incompatible lattice dimensions."""

    code = "dimension-mismatch"


class RegionOverlapError(StableFieldError):
    """Rectangles in a region union are not pairwise disjoint."""

    code = "region-overlap"

    def __init__(self, index_a, index_b):
        self.index_a = index_a
        self.index_b = index_b
        super().__init__(f"rectangles {index_a} and {index_b} overlap")


class ModelInvalidError(StableFieldError):
    """Coefficient/innovation model violates its validity inequality."""

    code = "model-invalid"


class CenteringError(StableFieldError):
    """Innovation centering/symmetry requirement violated."""

    code = "centering"


class SolverError(StableFieldError):
    """Root finder could not certify a solution."""

    code = "solver"


class DivergenceError(StableFieldError):
    """Normalizer equation has no solution within the bracket growth limit."""

    code = "divergence"


class NumericError(StableFieldError):
    """Quadrature or other numeric routine failed its accuracy target."""

    code = "numeric"


class InapplicableError(StableFieldError):
    """A diagnostic bound's hypotheses do not hold (e.g. infinite norm)."""

    code = "inapplicable"


class ConfigError(StableFieldError):
    """Experiment configuration failed to parse or validate."""

    code = "config"


class GateError(StableFieldError):
    """A run was refused by a precondition gate (e.g. rectangle-count growth)."""

    code = "gate"
