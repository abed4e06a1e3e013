"""Exception types shared across the package.

The CLI maps HypothesisError (and SpecParseError) to exit code 2 and I/O
failures to exit code 3; everything else is a bug.
"""


class SpecParseError(ValueError):
    """Malformed kernel/coefficient/lattice/config specification."""


class HypothesisError(ValueError):
    """A theorem hypothesis or operation precondition is violated."""


class DivergentIntegralError(HypothesisError):
    """A spectral integral required to be finite diverges."""


class NonConvergenceError(RuntimeError):
    """An iterative evaluation failed to converge within its budget."""
