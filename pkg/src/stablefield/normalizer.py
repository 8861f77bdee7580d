"""Normalizing constants: the smallest x >= 1 bringing the weighted tail
energy F(x) = sum_i (|b_i|/x)^alpha L(x/|b_i|) down to 1, plus the
condition diagnostics evaluated at the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, GateError
from .slowvary import SlowVary
from .stable import StableLaw, StableLimitLaw
from .weights import WeightField

__all__ = ["NormalizerResult", "solve_Bn", "check_conditions", "limit_law",
           "rectangle_growth_gate"]

_BRACKET_FACTOR = 4.0
_MAX_BRACKET_STEPS = 200
_SCAN_POINTS = 4096


@dataclass(frozen=True)
class NormalizerResult:
    B_n: float
    residual: float
    s_plus: float
    s_minus: float
    c_hat: float
    rho_n: float
    boundary: bool = False
    fallback_used: bool = False

    @property
    def A1(self) -> float:
        return self.s_plus + self.s_minus


def _energy_fn(field: WeightField, alpha: float, L: SlowVary):
    mags = np.abs(field.values[field.values != 0.0]).ravel()
    if mags.size == 0:
        raise DomainError("cannot normalize an identically zero field")
    powered = mags**alpha

    if L.kind == "constant":
        total = float(np.sum(powered)) * L.params["value"]

        def F(x: float) -> float:
            return total * x**-alpha

    else:

        def F(x: float) -> float:
            return x**-alpha * float(
                np.sum(powered * L._eval_positive(x / mags))
            )

    return F


def solve_Bn(field: WeightField, alpha: float, L: SlowVary,
             tol: float = 1e-10) -> NormalizerResult:
    """Solve the implicit normalizer equation by bracketing + bisection.

    F is exactly nonincreasing for constant L; for other families
    monotonicity is verified on a 32-point log grid and on failure the
    infimum is located by a dense grid scan instead.  Returns B_n = 1 with
    a boundary flag when F(1) <= 1 already.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if not 0 < alpha <= 2:
        raise DomainError("alpha must lie in (0, 2]")
    F = _energy_fn(field, alpha, L)

    f1 = F(1.0)
    if f1 <= 1.0:
        return _finalize(field, alpha, L, 1.0, abs(f1 - 1.0),
                         boundary=True, fallback=False)

    lo, hi = 1.0, 1.0
    for _ in range(_MAX_BRACKET_STEPS):
        lo = hi
        hi *= _BRACKET_FACTOR
        if F(hi) <= 1.0:
            break
    else:
        raise DivergenceError(
            "F never reached 1 within the bracket growth limit; "
            "the field's tail energy diverges for this (alpha, L)"
        )

    fallback = False
    if L.kind != "constant" and not _monotone_on_grid(F, 1.0, hi):
        lo, hi = _grid_scan(F, 1.0, hi)
        fallback = True

    while (hi - lo) / hi > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    B = hi
    return _finalize(field, alpha, L, B, abs(F(B) - 1.0),
                     boundary=False, fallback=fallback)


def _monotone_on_grid(F, lo, hi, points=32):
    xs = np.exp(np.linspace(math.log(lo), math.log(hi), points))
    vals = [F(float(x)) for x in xs]
    return all(b <= a * (1.0 + 1e-12) for a, b in zip(vals, vals[1:]))


def _grid_scan(F, lo, hi):
    """First grid cell where F crosses below 1 (infimum bracket)."""
    xs = np.exp(np.linspace(math.log(lo), math.log(hi), _SCAN_POINTS))
    prev = xs[0]
    for x in xs[1:]:
        if F(float(x)) <= 1.0:
            return float(prev), float(x)
        prev = x
    return float(xs[-2]), float(xs[-1])


def _finalize(field, alpha, L, B, residual, boundary, fallback):
    cond = check_conditions(field, alpha, L, B)
    return NormalizerResult(
        B_n=B,
        residual=residual,
        s_plus=cond["S1"],
        s_minus=cond["S2"],
        c_hat=cond["S1"],
        rho_n=cond["A2"],
        boundary=boundary,
        fallback_used=fallback,
    )


def check_conditions(field: WeightField, alpha: float, L: SlowVary,
                     B_n: float) -> dict:
    """Condition sums at c_i = b_i / B_n.

    A1 is returned as the exact float sum S1 + S2, so the partition
    identity holds to the bit.
    """
    if B_n <= 0:
        raise DomainError("normalizer must be positive")
    vals = field.values.ravel()
    c = vals / B_n
    mags = np.abs(c)

    def part(mask):
        m = mags[mask]
        if m.size == 0:
            return 0.0
        return float(np.sum(m**alpha * L._eval_positive(1.0 / m)))

    s1 = part(c > 0)
    s2 = part(c < 0)
    return {
        "A1": s1 + s2,
        "A2": float(np.max(mags)) if mags.size else 0.0,
        "S1": s1,
        "S2": s2,
    }


def limit_law(c_hat: float, alpha: float, c_alpha: float,
              beta: float = 0.0) -> StableLimitLaw:
    """Limit distribution c^(1/alpha) S' - (1-c)^(1/alpha) S''."""
    if not 0 <= c_hat <= 1:
        raise DomainError("c_hat must lie in [0, 1]")
    return StableLimitLaw(c_hat, StableLaw(alpha, c_alpha, beta))


def rectangle_growth_gate(j_count: int, B_n: float, q: float) -> None:
    """Refuse long-range runs whose rectangle count outgrows the normalizer.

    Requires J <= B_n^q / log(B_n); raises GateError otherwise.
    """
    if q < 1:
        raise DomainError("conjugate exponent q must be >= 1")
    if B_n <= 1.0:
        raise GateError(
            f"rectangle-count gate needs B_n > 1, got B_n = {B_n:.6g}"
        )
    limit = B_n**q / math.log(B_n)
    if j_count > limit:
        raise GateError(
            f"J = {j_count} exceeds B_n^q / log B_n = {limit:.6g} "
            f"(B_n = {B_n:.6g}, q = {q:.3g})"
        )
