"""Coefficient fields of the moving-average random field.

Four parametric families plus arbitrary finite-support fields.  Each family
knows its own convergence inequalities, so truncation windows come with
analytic bounds on the discarded tail energy sum(|a_i|^alpha * L(1/|a_i|)).

Tail bounds use a Potter-type envelope L(x) <= K * x^delta (delta = 0 for
bounded L), reducing every bound to a pure power-law comparison with a
slightly smaller exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.special import gammaln, zeta

from .errors import DimensionMismatchError, InapplicableError, ModelInvalidError
from .lattice import Rect
from .slowvary import SlowVary

__all__ = [
    "CoefficientModel",
    "DoublyGeometric",
    "Farima",
    "Isotropic",
    "Anisotropic",
    "Finite",
    "SupportPlan",
    "summability_report",
]

REPORT_CAP = 2048  # per-axis window cap used by summability_report


@dataclass(frozen=True)
class SupportPlan:
    """Truncation window for an infinite-support coefficient field.

    margins[l] is the kept coefficient range along axis l: indices
    0..margins[l] for one-sided kinds, -margins[l]..margins[l] otherwise.
    tail_bound bounds the alpha-energy outside the window; truncated is set
    when a cap prevented reaching the eps_tail target.
    """

    margins: tuple
    tail_bound: float
    truncated: bool
    eps_target: float


class CoefficientModel:
    """Common interface: scalar coefficients, kernels, and tail analytics."""

    d: int
    one_sided = False
    separable = False

    def coeff(self, i) -> float:
        if len(i) != self.d:
            raise DimensionMismatchError(
                f"index has dimension {len(i)}, model has {self.d}"
            )
        return self._coeff(tuple(int(v) for v in i))

    def kernel_block(self, lower, upper) -> np.ndarray:
        """Dense array of a_m over the lattice box [lower, upper]."""
        raise NotImplementedError

    def ell1_finite(self) -> bool:
        raise NotImplementedError

    def check_existence(self, alpha: float, L: SlowVary) -> None:
        """Raise ModelInvalidError when the field is not almost-surely defined."""
        raise NotImplementedError

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None) -> SupportPlan:
        raise NotImplementedError

    def p_norm(self, p: float) -> tuple[float, float]:
        """(lower bound on ||a||_p, bound on the p-energy left out of it)."""
        raise NotImplementedError

    # envelope slack: half the available exponent room, capped at alpha/2
    def _envelope(self, alpha, L, slack_exponent):
        request = min(alpha / 2.0, slack_exponent / 2.0)
        K, delta = L.envelope(request)
        return K, alpha - delta


def _grow_margins(bound_fn, eps_tail, caps, start=4):
    """Double a scalar window parameter until bound < eps_tail or cap hit."""
    m = start
    cap = min(caps) if caps is not None else 1 << 24
    while bound_fn(m) > eps_tail:
        if m >= cap:
            return cap, bound_fn(cap), True
        m = min(2 * m, cap)
    b = bound_fn(m)
    return m, b, b > eps_tail


class DoublyGeometric(CoefficientModel):
    """a_{j1,j2} = theta^j1 * rho^j2 on the nonnegative quadrant of Z^2."""

    one_sided = True
    separable = True
    d = 2

    def __init__(self, theta: float, rho: float):
        if not (abs(theta) < 1 and abs(rho) < 1):
            raise ModelInvalidError("doubly geometric model needs |theta|, |rho| < 1")
        self.theta = float(theta)
        self.rho = float(rho)

    def _coeff(self, i):
        if i[0] < 0 or i[1] < 0:
            return 0.0
        return self.theta ** i[0] * self.rho ** i[1]

    def axis_sequence(self, axis: int, maxj: int) -> np.ndarray:
        base = self.theta if axis == 0 else self.rho
        return base ** np.arange(maxj + 1, dtype=float)

    def kernel_block(self, lower, upper):
        axes = [
            np.where(
                np.arange(lo, hi + 1) >= 0,
                (self.theta if l == 0 else self.rho)
                ** np.maximum(np.arange(lo, hi + 1), 0),
                0.0,
            )
            for l, (lo, hi) in enumerate(zip(lower, upper))
        ]
        return reduce(np.multiply.outer, axes)

    def ell1_finite(self):
        return True

    def check_existence(self, alpha, L):
        pass  # geometric decay beats every alpha in (0, 2] and slowly varying L

    def _axis_tail(self, base, a, m):
        r = abs(base) ** a
        return r ** (m + 1) / (1.0 - r)

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None):
        K, a = self._envelope(alpha, L, alpha)  # no exponent constraint here
        s1 = 1.0 / (1.0 - abs(self.theta) ** a)
        s2 = 1.0 / (1.0 - abs(self.rho) ** a)

        def bound(m):
            t1 = self._axis_tail(self.theta, a, m)
            t2 = self._axis_tail(self.rho, a, m)
            return K * (s1 * s2 - (s1 - t1) * (s2 - t2))

        m, b, trunc = _grow_margins(bound, eps_tail, caps)
        return SupportPlan((m, m), b, trunc, eps_tail)

    def p_norm(self, p):
        v = 1.0 / ((1.0 - abs(self.theta) ** p) * (1.0 - abs(self.rho) ** p))
        return v ** (1.0 / p), 0.0


def _farima_axis(beta: float, maxj: int) -> np.ndarray:
    """Coefficients Gamma(j+beta)/(Gamma(beta) j!) via the stable recurrence."""
    j = np.arange(maxj, dtype=float)
    out = np.empty(maxj + 1)
    out[0] = 1.0
    if maxj:
        out[1:] = np.cumprod((j + beta) / (j + 1.0))
    return out


class Farima(CoefficientModel):
    """Product of two one-sided fractional-difference filters on Z^2."""

    one_sided = True
    separable = True
    d = 2

    def __init__(self, beta1: float, beta2: float):
        if not (0 < beta1 < 1 and 0 < beta2 < 1):
            raise ModelInvalidError("fractional exponents must lie in (0, 1)")
        self.betas = (float(beta1), float(beta2))

    def _coeff(self, i):
        if i[0] < 0 or i[1] < 0:
            return 0.0
        return math.exp(
            sum(
                gammaln(j + b) - gammaln(b) - gammaln(j + 1)
                for j, b in zip(i, self.betas)
            )
        )

    def axis_sequence(self, axis, maxj):
        return _farima_axis(self.betas[axis], maxj)

    def kernel_block(self, lower, upper):
        axes = []
        for l, (lo, hi) in enumerate(zip(lower, upper)):
            seq = np.zeros(hi - lo + 1)
            if hi >= 0:
                vals = _farima_axis(self.betas[l], hi)
                seq[max(0, -lo):] = vals[max(lo, 0):]
            axes.append(seq)
        return reduce(np.multiply.outer, axes)

    def ell1_finite(self):
        return False  # axis terms decay like j^(beta-1) with beta > 0

    def check_existence(self, alpha, L):
        for k, b in enumerate(self.betas):
            if (1.0 - b) * alpha <= 1.0:
                raise ModelInvalidError(
                    f"(1 - beta_{k+1}) * alpha = {(1 - b) * alpha:.4f} <= 1: "
                    "field is not defined"
                )

    def _slack(self, alpha):
        # largest delta keeping (1-beta)(alpha-delta) > 1 on both axes
        return min(alpha - 1.0 / (1.0 - b) for b in self.betas)

    def _axis_tail(self, beta, a, m):
        # c_j < j^(beta-1)/Gamma(beta) for j >= 1 (Gautschi), so the tail is
        # dominated by a Hurwitz zeta value
        s = a * (1.0 - beta)
        return math.gamma(beta) ** (-a) * float(zeta(s, m + 1))

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None):
        self.check_existence(alpha, L)
        K, a = self._envelope(alpha, L, self._slack(alpha))

        # window energy evaluated numerically up to J0, extended by the
        # zeta comparison beyond, so the bound stays O(1) per probe
        J0 = 1 << 16
        w0 = [float(np.sum(_farima_axis(b, J0) ** a)) for b in self.betas]

        def axis_window(k, m):
            if m <= J0:
                return float(np.sum(_farima_axis(self.betas[k], m) ** a))
            return w0[k] + self._axis_tail(self.betas[k], a, J0)

        def bound(m):
            w = [axis_window(k, m) for k in range(2)]
            t = [self._axis_tail(b, a, m) for b in self.betas]
            return K * ((w[0] + t[0]) * (w[1] + t[1]) - w[0] * w[1])

        m, bnd, trunc = _grow_margins(bound, eps_tail, caps, start=16)
        return SupportPlan((m, m), bnd, trunc, eps_tail)

    def p_norm(self, p):
        for b in self.betas:
            if p * (1.0 - b) <= 1.0:
                raise InapplicableError(
                    f"||a||_p infinite: p*(1-beta) = {p * (1 - b):.4f} <= 1"
                )
        J = 10_000
        w = [np.sum(_farima_axis(b, J) ** p) for b in self.betas]
        t = [self._axis_tail(b, p, J) for b in self.betas]
        lower = (w[0] * w[1]) ** (1.0 / p)
        return lower, (w[0] + t[0]) * (w[1] + t[1]) - w[0] * w[1]


def _shell_tail(d: int, s: float, m: int) -> float:
    """Bound sum over sup-norm shells > m of ||i||^-s by integral comparison."""
    if s <= d:
        return math.inf
    return 2 * d * 3 ** (d - 1) * m ** (d - s) / (s - d)


class Isotropic(CoefficientModel):
    """a_i = ||i||^-beta (Euclidean norm) with a settable value at the origin."""

    def __init__(self, beta: float, d: int = 2, a0: float = 1.0):
        if beta <= 0:
            raise ModelInvalidError("isotropic decay exponent must be positive")
        self.beta = float(beta)
        self.d = int(d)
        self.a0 = float(a0)

    def _coeff(self, i):
        if all(v == 0 for v in i):
            return self.a0
        return float(np.linalg.norm(i)) ** (-self.beta)

    def kernel_block(self, lower, upper):
        grids = np.meshgrid(
            *[np.arange(lo, hi + 1, dtype=float) for lo, hi in zip(lower, upper)],
            indexing="ij",
        )
        sq = sum(g * g for g in grids)
        with np.errstate(divide="ignore"):
            out = sq ** (-self.beta / 2.0)
        out[sq == 0] = self.a0
        return out

    def ell1_finite(self):
        return self.beta > self.d

    def check_existence(self, alpha, L):
        if alpha * self.beta <= self.d:
            raise ModelInvalidError(
                f"alpha*beta = {alpha * self.beta:.4f} <= d = {self.d}: "
                "field is not defined"
            )

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None):
        self.check_existence(alpha, L)
        slack = (alpha * self.beta - self.d) / self.beta
        K, a = self._envelope(alpha, L, slack)

        def bound(m):
            return K * _shell_tail(self.d, a * self.beta, m)

        m, b, trunc = _grow_margins(bound, eps_tail, caps)
        return SupportPlan((m,) * self.d, b, trunc, eps_tail)

    def p_norm(self, p):
        if p * self.beta <= self.d:
            raise InapplicableError(
                f"||a||_p infinite: p*beta = {p * self.beta:.4f} <= d = {self.d}"
            )
        M = 64
        block = self.kernel_block((-M,) * self.d, (M,) * self.d)
        lower = float(np.sum(np.abs(block) ** p)) ** (1.0 / p)
        return lower, _shell_tail(self.d, p * self.beta, M)


class Anisotropic(CoefficientModel):
    """a_i = (sum_l |i_l|^beta_l)^-gamma; decay rate differs by direction."""

    def __init__(self, betas, gamma: float, a0: float = 1.0):
        if any(b <= 0 for b in betas) or gamma <= 0:
            raise ModelInvalidError("anisotropic exponents must be positive")
        self.betas = tuple(float(b) for b in betas)
        self.gamma = float(gamma)
        self.d = len(self.betas)
        self.a0 = float(a0)

    @property
    def Q(self) -> float:
        return sum(1.0 / b for b in self.betas)

    def _coeff(self, i):
        if all(v == 0 for v in i):
            return self.a0
        return sum(abs(v) ** b for v, b in zip(i, self.betas)) ** (-self.gamma)

    def kernel_block(self, lower, upper):
        grids = np.meshgrid(
            *[np.arange(lo, hi + 1, dtype=float) for lo, hi in zip(lower, upper)],
            indexing="ij",
        )
        base = sum(np.abs(g) ** b for g, b in zip(grids, self.betas))
        with np.errstate(divide="ignore"):
            out = base ** (-self.gamma)
        out[base == 0] = self.a0
        return out

    def ell1_finite(self):
        return self.gamma > self.Q

    def check_existence(self, alpha, L):
        if alpha * self.gamma <= self.Q:
            raise ModelInvalidError(
                f"alpha*gamma = {alpha * self.gamma:.4f} <= Q = {self.Q:.4f}: "
                "field is not defined"
            )

    def _level_extents(self, level):
        return tuple(
            int(math.ceil(level ** (1.0 / b))) - 1 for b in self.betas
        )

    def _level_tail(self, s, level):
        """Tail of sum (sum|i_l|^beta_l)^-s outside the level box, by Abel
        summation against the box-count envelope 3^d m^Q."""
        Q = self.Q
        if s <= Q:
            return math.inf
        c = 3**self.d * s * 2**Q
        return c * (level ** (Q - s - 1.0) + level ** (Q - s) / (s - Q))

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None):
        self.check_existence(alpha, L)
        slack = (alpha * self.gamma - self.Q) / self.gamma
        K, a = self._envelope(alpha, L, slack)
        s = a * self.gamma

        level_caps = None
        if caps is not None:
            level_caps = [int((c + 1) ** b) for c, b in zip(caps, self.betas)]

        def bound(level):
            return K * self._level_tail(s, level)

        level, b, trunc = _grow_margins(bound, eps_tail, level_caps)
        return SupportPlan(self._level_extents(level), b, trunc, eps_tail)

    def p_norm(self, p):
        if p * self.gamma <= self.Q:
            raise InapplicableError(
                f"||a||_p infinite: p*gamma = {p * self.gamma:.4f} <= Q = {self.Q:.4f}"
            )
        level = 256
        ext = self._level_extents(level)
        block = self.kernel_block(tuple(-e for e in ext), ext)
        lower = float(np.sum(np.abs(block) ** p)) ** (1.0 / p)
        return lower, self._level_tail(p * self.gamma, level)


class Finite(CoefficientModel):
    """Arbitrary finite-support coefficients given as {index: value}."""

    def __init__(self, entries: dict):
        if not entries:
            raise ModelInvalidError("finite model needs at least one coefficient")
        keys = [tuple(int(v) for v in k) for k in entries]
        self.d = len(keys[0])
        if any(len(k) != self.d for k in keys):
            raise DimensionMismatchError("finite support indices disagree on d")
        self.entries = {k: float(v) for k, v in zip(keys, entries.values())}

    def _coeff(self, i):
        return self.entries.get(i, 0.0)

    def support_box(self) -> Rect:
        lo = tuple(min(k[l] for k in self.entries) for l in range(self.d))
        hi = tuple(max(k[l] for k in self.entries) for l in range(self.d))
        return Rect(lo, hi)

    def kernel_block(self, lower, upper):
        shape = tuple(hi - lo + 1 for lo, hi in zip(lower, upper))
        out = np.zeros(shape)
        for k, v in self.entries.items():
            pos = tuple(kk - lo for kk, lo in zip(k, lower))
            if all(0 <= pp < ss for pp, ss in zip(pos, shape)):
                out[pos] = v
        return out

    def ell1_finite(self):
        return True

    def check_existence(self, alpha, L):
        pass

    def support_plan(self, alpha, L, eps_tail=1e-6, caps=None):
        box = self.support_box()
        ext = tuple(
            max(abs(lo), abs(hi)) for lo, hi in zip(box.lower, box.upper)
        )
        return SupportPlan(ext, 0.0, False, eps_tail)

    def p_norm(self, p):
        v = sum(abs(a) ** p for a in self.entries.values()) ** (1.0 / p)
        return v, 0.0


def summability_report(model: CoefficientModel, alpha: float, L: SlowVary,
                       eps_tail: float = 1e-6) -> dict:
    """Summability diagnostics for a coefficient field.

    Returns ell1_finite (analytic criterion per family), the truncated energy
    sum(|a_i|^alpha L(1/|a_i|)) over the eps_tail window (capped per axis),
    and the analytic bound on what the window leaves out.  Raises
    ModelInvalidError when the existence inequality fails.
    """
    model.check_existence(alpha, L)
    plan = model.support_plan(
        alpha, L, eps_tail, caps=(REPORT_CAP,) * model.d
    )
    if isinstance(model, Finite):
        box = model.support_box()
        block = model.kernel_block(box.lower, box.upper)
    elif model.one_sided:
        block = model.kernel_block((0,) * model.d, plan.margins)
    else:
        block = model.kernel_block(
            tuple(-m for m in plan.margins), plan.margins
        )
    mags = np.abs(block)
    nz = mags > 0
    total = float(np.sum(mags[nz] ** alpha * L.eval(1.0 / mags[nz])))
    return {
        "ell1_finite": model.ell1_finite(),
        "alpha_sum": total,
        "tail_bound": plan.tail_bound,
        "margins": plan.margins,
        "truncated": plan.truncated,
    }
