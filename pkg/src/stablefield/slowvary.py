"""Slowly varying functions L used in tail normalization.

Every family is constant on (0, cutoff) for some cutoff >= 1: below the
cutoff the value is frozen rather than extrapolated.  The zero-argument
convention |x|^p * L(1/|x|) = 0 at x = 0 is implemented in
:func:`weighted_term`, never by evaluating L at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["SlowVary", "constant", "pareto_canonical", "log_power", "tabulated"]


@dataclass(frozen=True)
class SlowVary:
    """A slowly varying function with a frozen head.

    kind is one of "constant", "pareto", "log_power", "tabulated"; params
    holds the family parameters.  Instances are immutable and safe to share
    across workers.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "constant":
            if self.params["value"] <= 0:
                raise DomainError("constant L must be positive")
        elif self.kind == "pareto":
            a = self.params["alpha"]
            if not 0 < a < 2:
                raise DomainError(
                    f"pareto-canonical L requires alpha in (0, 2), got {a}"
                )
        elif self.kind == "log_power":
            if self.params["exponent"] < 0:
                raise DomainError("log-power exponent must be nonnegative")
        elif self.kind == "tabulated":
            grid = np.asarray(self.params["grid"], dtype=float)
            vals = np.asarray(self.params["values"], dtype=float)
            if grid.ndim != 1 or grid.shape != vals.shape or grid.size < 2:
                raise DomainError("tabulated L needs matching 1-d grid/values")
            if grid[0] < 1.0 or np.any(np.diff(grid) <= 0):
                raise DomainError("tabulated grid must be sorted and start at >= 1")
            if np.any(vals <= 0):
                raise DomainError("tabulated values must be positive")
            object.__setattr__(self, "params", {"grid": grid, "values": vals})
        else:
            raise DomainError(f"unknown slow-variation kind {self.kind!r}")

    @property
    def cutoff(self) -> float:
        """Largest b such that the function is frozen (constant) on (0, b)."""
        if self.kind == "constant":
            return 1.0
        if self.kind == "pareto":
            a = self.params["alpha"]
            # truncated second moment of the unit-Pareto family crosses 1 here
            return (2.0 / a) ** (1.0 / (2.0 - a))
        if self.kind == "log_power":
            return math.e
        return float(self.params["grid"][0])

    def eval(self, x):
        """Evaluate L(x) for x > 0 (scalar or ndarray, elementwise).

        Raises DomainError on any nonpositive argument.
        """
        arr = np.asarray(x, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("L is defined for positive arguments only")
        out = self._eval_positive(arr)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def _eval_positive(self, arr):
        if self.kind == "constant":
            return np.full_like(arr, self.params["value"])
        if self.kind == "pareto":
            a = self.params["alpha"]
            xc = np.maximum(arr, self.cutoff)
            return 1.0 - xc ** (a - 2.0)
        if self.kind == "log_power":
            e = self.params["exponent"]
            return np.maximum(1.0, np.log(arr)) ** e
        grid = self.params["grid"]
        vals = self.params["values"]
        # linear in log x, clamped at both ends
        return np.interp(np.log(np.maximum(arr, grid[0])), np.log(grid), vals)

    def envelope(self, delta: float) -> tuple[float, float]:
        """Return (K, d) with d <= delta and L(x) <= K * x**d for all x >= 1.

        Bounded families report d = 0.  Used by truncation-tail bounds.
        """
        if delta < 0:
            raise DomainError("envelope slack must be nonnegative")
        if self.kind == "constant":
            return self.params["value"], 0.0
        if self.kind == "pareto":
            return 1.0, 0.0
        if self.kind == "tabulated":
            return float(np.max(self.params["values"])), 0.0
        e = self.params["exponent"]
        if e == 0.0:
            return 1.0, 0.0
        if delta == 0.0:
            raise DomainError("log-power L is unbounded; needs delta > 0")
        # sup over x>=1 of (ln x)^e / x^delta is attained at ln x = e/delta
        k = max(1.0, (e / delta) ** e * math.exp(-e))
        return k, delta

    def ratio_check(self, u: float, x: float) -> float:
        """L(u*x)/L(x); tends to 1 as x grows, for every fixed u > 0."""
        return self.eval(u * x) / self.eval(x)


def constant(value: float = 1.0) -> SlowVary:
    return SlowVary("constant", {"value": float(value)})


def pareto_canonical(alpha: float) -> SlowVary:
    """The L of the unit-Pareto tail family: 1 - x**(alpha-2) above the cutoff."""
    return SlowVary("pareto", {"alpha": float(alpha)})


def log_power(exponent: float) -> SlowVary:
    return SlowVary("log_power", {"exponent": float(exponent)})


def tabulated(grid, values) -> SlowVary:
    return SlowVary("tabulated", {"grid": grid, "values": values})


def weighted_term(L: SlowVary, alpha: float, b, scale: float):
    """One normalized tail summand (|b|/scale)**alpha * L(scale/|b|).

    Exactly 0.0 where b == 0 (the zero-argument convention).  b may be a
    scalar or ndarray; scale must be positive.
    """
    if scale <= 0:
        raise DomainError("scale must be positive")
    if not 0 < alpha <= 2:
        raise DomainError("alpha must lie in (0, 2]")
    arr = np.abs(np.asarray(b, dtype=float))
    out = np.zeros_like(arr)
    nz = arr > 0
    if np.any(nz):
        r = arr[nz] / scale
        out[nz] = r**alpha * L._eval_positive(1.0 / r)
    if np.ndim(b) == 0:
        return float(out)
    return out
