"""The alpha-stable reference law and the two-sided mixture limit law.

Parameterization follows the characteristic-function form used throughout
this package:

    phi(t) = exp(-c |t|^alpha (1 - i beta tau(alpha, t))),
    tau(alpha, t) = sgn(t) tan(pi alpha / 2)  (alpha != 1),  0  (alpha = 1),

with c > 0 and beta in [-1, 1].  tau vanishes identically for alpha = 2.
Densities and distribution functions come from Fourier inversion with
oscillatory-weight quadrature; sampling uses the Chambers-Mallows-Stuck
transform, whose scale/skew inputs coincide with (c^(1/alpha), beta) in
this parameterization.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.special import sici

from .errors import DomainError, NumericError

__all__ = ["StableLaw", "StableLimitLaw"]

# beyond t* with c t*^alpha = 40 the inversion integrand is below 4e-18
_LOG_CUT = 40.0
_QUAD_LIMIT = 800
_ABS_TOL = 1e-8
# tan-grid CDF table used for bulk evaluation (KS statistics)
_TABLE_NODES = 4001
_TABLE_UMAX = math.pi / 2 - 1.2e-4


def _quad_weighted(f, lower, upper, weight, wvar):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, lower, upper, weight=weight, wvar=wvar,
                        limit=_QUAD_LIMIT, epsabs=1e-11, epsrel=1e-11)
    if err > 1e-6:
        raise NumericError(
            f"inversion quadrature achieved {err:.2e} (target {_ABS_TOL:.0e})"
        )
    return val


def _quad_split(f, lower, upper, weight, wvar):
    """Weighted quadrature with geometric breakpoints.

    The integrands have power-law layers spanning many octaves between the
    analytic cutoff and the exponential roll-off; handing quadpack one
    panel per few decades keeps its error estimates honest.
    """
    cuts = [lower]
    level = max(lower, 1e-6)
    while level * 1e4 < upper:
        level *= 1e4
        if level > cuts[-1]:
            cuts.append(level)
    cuts.append(upper)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi > lo:
            total += _quad_weighted(f, lo, hi, weight, wvar)
    return total


@dataclass(frozen=True)
class StableLaw:
    """Stable law with tail index alpha, scale constant c_alpha, skew beta."""

    alpha: float
    c_alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.c_alpha <= 0:
            raise DomainError("c_alpha must be positive")
        if not -1 <= self.beta <= 1:
            raise DomainError("beta must lie in [-1, 1]")
        if self.alpha == 1.0 and self.beta != 0.0:
            raise DomainError("alpha = 1 requires a symmetric law (beta = 0)")
        if self.alpha == 2.0 and self.beta != 0.0:
            # tau vanishes at alpha = 2; normalize so equal laws compare equal
            object.__setattr__(self, "beta", 0.0)

    @property
    def _tan(self) -> float:
        if self.alpha in (1.0, 2.0):
            return 0.0
        return math.tan(math.pi * self.alpha / 2.0)

    @property
    def _tstar(self) -> float:
        return (_LOG_CUT / self.c_alpha) ** (1.0 / self.alpha)

    @property
    def scale(self) -> float:
        return self.c_alpha ** (1.0 / self.alpha)

    def charfn(self, t):
        """Characteristic function, elementwise on scalars or arrays."""
        tt = np.asarray(t, dtype=float)
        mag = self.c_alpha * np.abs(tt) ** self.alpha
        phase = self.c_alpha * self.beta * self._tan * np.sign(tt) * np.abs(tt) ** self.alpha
        out = np.exp(-mag + 1j * phase)
        if np.ndim(t) == 0:
            return complex(out)
        return out

    def pdf(self, x: float) -> float:
        """Density by inversion: (1/pi) Re int_0^inf e^{-itx} phi(t) dt."""
        a, c, b, T = self.alpha, self.c_alpha, self.beta, self._tan
        ts = self._tstar
        f_even = lambda t: math.exp(-c * t**a) * math.cos(c * b * T * t**a)
        val = _quad_weighted(f_even, 0.0, ts, "cos", x)
        if b != 0.0:
            f_odd = lambda t: math.exp(-c * t**a) * math.sin(c * b * T * t**a)
            val += _quad_weighted(f_odd, 0.0, ts, "sin", x)
        return max(val / math.pi, 0.0)

    def cdf(self, x: float) -> float:
        """Distribution function by inversion of phi(t)/t.

        The 1/t singularity is split off analytically: the constant part of
        the integrand integrates to a sine-integral term, the remainder is
        regular enough for oscillatory-weight quadrature above a cutoff
        whose discarded head is below 1e-13.  Integration is split at 1 so
        the quadrature nodes of the near-zero panel cannot collapse onto
        t = 0 by cancellation; the max() clamp guards the one node that can
        still underflow for extreme arguments.
        """
        a, c, b, T = self.alpha, self.c_alpha, self.beta, self._tan
        ts = self._tstar
        if abs(x) > 64.0:
            A, B = self._phase_normalized_tail(x)
        else:
            A = 0.0
            if b != 0.0:
                eps = min((1e-13 * a / (c * abs(b) * abs(T))) ** (1.0 / a),
                          1e-3)
                f_a = lambda t: (math.exp(-c * max(t, eps) ** a)
                                 * math.sin(c * b * T * max(t, eps) ** a)
                                 / max(t, eps))
                A = _quad_split(f_a, eps, ts, "cos", x)
            eps = min((1e-13 * (a + 1)
                       / (c * max(abs(x), 1.0))) ** (1.0 / (a + 1)), 1e-3)
            f_b = lambda t: (math.exp(-c * max(t, eps) ** a)
                             * math.cos(c * b * T * max(t, eps) ** a)
                             - 1.0) / max(t, eps)
            B = _quad_split(f_b, eps, ts, "sin", x)
        si = float(sici(ts * x)[0])
        val = 0.5 - A / math.pi + (B + si) / math.pi
        return min(max(val, 0.0), 1.0)

    def _phase_normalized_tail(self, x: float):
        """The two inversion integrals after substituting u = t|x|.

        For large |x| the direct form asks the quadrature to resolve a
        near-zero singular layer against an enormous frequency; in u the
        oscillation has unit frequency and the envelope varies on the
        scale |x|, which adaptive panels handle.
        """
        a, c, b, T = self.alpha, self.c_alpha, self.beta, self._tan
        ax = abs(x)
        emax = self._tstar * ax
        A = 0.0
        if b != 0.0:
            emin = ax * min(
                (1e-13 * a / (c * abs(b) * abs(T))) ** (1.0 / a), 1e-3
            )
            f_a = lambda u: (math.exp(-c * (max(u, emin) / ax) ** a)
                             * math.sin(c * b * T * (max(u, emin) / ax) ** a)
                             / max(u, emin))
            A = _quad_split(f_a, emin, emax, "cos", 1.0)
        emin = ax * min(
            (1e-13 * (a + 1) / (c * ax)) ** (1.0 / (a + 1)), 1e-3
        )
        f_b = lambda u: (math.exp(-c * (max(u, emin) / ax) ** a)
                         * math.cos(c * b * T * (max(u, emin) / ax) ** a)
                         - 1.0) / max(u, emin)
        B = math.copysign(1.0, x) * _quad_split(f_b, emin, emax, "sin", 1.0)
        return A, B

    def cdf_batch(self, xs) -> np.ndarray:
        """Vectorized CDF through a cached monotone interpolation table.

        Table error is below ~2e-5 everywhere (exact quadrature at the
        nodes, monotone cubic in between, per-point quadrature outside the
        covered range), which is negligible against Monte Carlo KS scales.
        """
        xs = np.asarray(xs, dtype=float)
        interp, lo, hi = _cdf_table(self.alpha, self.c_alpha, self.beta)
        out = np.empty(xs.shape)
        inside = (xs >= lo) & (xs <= hi)
        if np.any(inside):
            u = np.arctan(xs[inside] / self.scale)
            u = np.clip(u, -_TABLE_UMAX, _TABLE_UMAX)
            out[inside] = np.clip(interp(u), 0.0, 1.0)
        for idx in np.flatnonzero(~inside):
            out[idx] = self.cdf(float(xs[idx]))
        return out

    def sample(self, rng, size=None):
        """Chambers-Mallows-Stuck draws matching charfn exactly.

        rng is a numpy Generator; pass independent per-worker streams for
        concurrent use.
        """
        V = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
        if self.alpha == 1.0:
            return self.c_alpha * np.tan(V)
        W = rng.exponential(1.0, size)
        a, b = self.alpha, self.beta
        T = self._tan
        B = math.atan(b * T) / a
        S = (1.0 + b * b * T * T) ** (1.0 / (2.0 * a))
        out = (
            S
            * np.sin(a * (V + B))
            / np.cos(V) ** (1.0 / a)
            * (np.cos(V - a * (V + B)) / W) ** ((1.0 - a) / a)
        )
        return self.scale * out


@lru_cache(maxsize=32)
def _cdf_table(alpha, c_alpha, beta):
    law = StableLaw(alpha, c_alpha, beta)
    u = np.linspace(-_TABLE_UMAX, _TABLE_UMAX, _TABLE_NODES)
    x = law.scale * np.tan(u)
    if beta == 0.0:
        # symmetric: evaluate the right half and mirror
        half = (_TABLE_NODES - 1) // 2
        right = np.array([law.cdf(float(v)) for v in x[half:]])
        f = np.concatenate([1.0 - right[:0:-1], right])
    else:
        f = np.array([law.cdf(float(v)) for v in x])
    f = np.maximum.accumulate(f)  # guard against quadrature-level wiggles
    return PchipInterpolator(u, f, extrapolate=False), x[0], x[-1]


@dataclass(frozen=True)
class StableLimitLaw:
    """Law of c^(1/alpha) S' - (1-c)^(1/alpha) S'' with S', S'' iid ~ base.

    The product characteristic function collapses to a single stable law
    with the same c_alpha and skew beta*(2c - 1), which pdf/cdf/sampling
    delegate to; charfn keeps the two-factor form.
    """

    c: float
    base: StableLaw

    def __post_init__(self):
        if not 0 <= self.c <= 1:
            raise DomainError("mixture weight must lie in [0, 1]")

    def reduced(self) -> StableLaw:
        return StableLaw(
            self.base.alpha, self.base.c_alpha,
            self.base.beta * (2.0 * self.c - 1.0),
        )

    @property
    def alpha(self) -> float:
        return self.base.alpha

    def charfn(self, t):
        a = self.base.alpha
        pos = self.base.charfn(self.c ** (1.0 / a) * np.asarray(t, dtype=float))
        neg = self.base.charfn((1.0 - self.c) ** (1.0 / a) * np.asarray(t, dtype=float))
        out = pos * np.conj(neg)
        if np.ndim(t) == 0:
            return complex(out)
        return out

    def pdf(self, x: float) -> float:
        return self.reduced().pdf(x)

    def cdf(self, x: float) -> float:
        return self.reduced().cdf(x)

    def cdf_batch(self, xs) -> np.ndarray:
        return self.reduced().cdf_batch(xs)

    def sample(self, rng, size=None):
        return self.reduced().sample(rng, size)
