"""Scalar foundations: precision modes, the gamma function and Gauss-Jacobi rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, PoleError

DEFAULT_EXTENDED_BITS = 256
# Power-basis assembly in binary64 cancels badly as N grows: Caputo rows stop
# annihilating constants to 1e-12 from N = 6, monomial exactness drops below
# 1e-9 from N = 10.
EXTENDED_THRESHOLD = 6


@dataclass(frozen=True)
class PrecisionMode:
    """Arithmetic used for coefficient expansion and matrix assembly.

    ``bits=None`` means native binary64; otherwise an mpmath working precision
    of at least 128 bits.
    """

    bits: int | None = None

    def __post_init__(self):
        if self.bits is not None and (int(self.bits) != self.bits or self.bits < 128):
            raise DomainError(f"extended precision needs an integer bit count >= 128, got {self.bits}")

    @classmethod
    def double(cls) -> PrecisionMode:
        return cls(None)

    @classmethod
    def extended(cls, bits: int = DEFAULT_EXTENDED_BITS) -> PrecisionMode:
        return cls(bits)

    @classmethod
    def for_degree(cls, N: int) -> PrecisionMode:
        """Default policy: binary64 up to N = 5, 256 bits from N = 6."""
        return cls.extended() if N >= EXTENDED_THRESHOLD else cls.double()

    @classmethod
    def parse(cls, text: str) -> PrecisionMode:
        """Parse ``double``, ``extended`` or ``extended:<bits>``."""
        text = text.strip().lower()
        if text == "double":
            return cls.double()
        if text == "extended":
            return cls.extended()
        if text.startswith("extended:"):
            return cls.extended(int(text.split(":", 1)[1]))
        raise DomainError(f"unknown precision mode {text!r}")

    @property
    def is_extended(self) -> bool:
        return self.bits is not None

    def __str__(self) -> str:
        return f"extended:{self.bits}" if self.is_extended else "double"


def _check_pole(x: float) -> None:
    if x <= 0 and float(x).is_integer():
        raise PoleError(f"gamma function has a pole at {x}")


def gamma_fn(x: float) -> float:
    """Real gamma function in binary64.

    Raises PoleError at 0, -1, -2, ...
    """
    x = float(x)
    _check_pole(x)
    return math.gamma(x)


def gamma_ratio(num: float, den: float) -> float:
    """Gamma(num) / Gamma(den), returning 0 when ``den`` is a pole."""
    _check_pole(num)
    if den <= 0 and float(den).is_integer():
        return 0.0
    return math.gamma(num) / math.gamma(den)


def gamma_mp(x) -> mpmath.mpf:
    """Gamma in the current mpmath working precision."""
    x = mpmath.mpf(x)
    _check_pole(float(x))
    return mpmath.gamma(x)


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Gauss rule for the weight ``(1-s)**gamma_exp * (1+s)**delta_exp`` on (-1, 1)."""

    gamma_exp: float
    delta_exp: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract the last axis of ``values`` (samples at the nodes) with the weights."""
        return np.asarray(values) @ self.weights


def jacobi_weight_integral(gamma_exp: float, delta_exp: float) -> float:
    """Integral of (1-s)^gamma_exp (1+s)^delta_exp over (-1, 1)."""
    a, b = gamma_exp, delta_exp
    return 2.0 ** (a + b + 1) * math.exp(math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 2))


def jacobi_eval(n: int, a, b, x):
    """(P_n^{(a,b)}(x), d/dx P_n^{(a,b)}(x)) by the three-term recurrence.

    Works for floats, numpy arrays (any float dtype) and mpmath numbers.
    """

    def value(n, a, b):
        ab = a + b
        p_prev, p = 1, (a - b) / 2 + (ab + 2) * x / 2
        if n == 0:
            return p_prev
        for k in range(2, n + 1):
            c = 2 * k + ab
            p_prev, p = p, (
                ((c - 1) * (a * a - b * b) + (c - 2) * (c - 1) * c * x) * p
                - 2 * (k + a - 1) * (k + b - 1) * c * p_prev
            ) / (2 * k * (k + ab) * (c - 2))
        return p

    return value(n, a, b), (n + a + b + 1) / 2 * value(n - 1, a + 1, b + 1)


def _weight_constant(M: int, a, b, gamma, factorial):
    return 2 ** (a + b + 1) * gamma(M + a + 1) * gamma(M + b + 1) / (gamma(M + a + b + 1) * factorial(M))


def _polish_rule(nodes: np.ndarray, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Newton-refine Golub-Welsch nodes and evaluate the closed-form weights in extra precision.

    Eigenvector-based weights lose up to ~1e-12 relative accuracy on the small
    end weights, which shows up directly in the fractional derivatives. The
    refinement runs vectorized in long double where that type is wider than
    binary64, and in mpmath otherwise.
    """
    if np.finfo(np.longdouble).eps < 1e-18:
        return _polish_longdouble(nodes, a, b)
    return _polish_mpmath(nodes, a, b)


def _polish_longdouble(nodes: np.ndarray, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    M = len(nodes)
    ld = np.longdouble
    am, bm = ld(a), ld(b)
    x = nodes.astype(ld)
    for _ in range(2):
        p, dp = jacobi_eval(M, am, bm, x)
        x = x - p / dp
    _, dp = jacobi_eval(M, am, bm, x)
    with mpmath.workprec(96):
        const = ld(str(_weight_constant(M, mpmath.mpf(a), mpmath.mpf(b), mpmath.gamma, mpmath.factorial)))
    return x.astype(float), (const / ((1 - x * x) * dp * dp)).astype(float)


def _polish_mpmath(nodes: np.ndarray, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    M = len(nodes)
    out_x, out_w = np.empty(M), np.empty(M)
    with mpmath.workprec(128):
        am, bm = mpmath.mpf(a), mpmath.mpf(b)
        const = _weight_constant(M, am, bm, mpmath.gamma, mpmath.factorial)
        for i, x0 in enumerate(nodes):
            x = mpmath.mpf(float(x0))
            for _ in range(3):
                p, dp = jacobi_eval(M, am, bm, x)
                x -= p / dp
            _, dp = jacobi_eval(M, am, bm, x)
            out_x[i] = float(x)
            out_w[i] = float(const / ((1 - x * x) * dp * dp))
    return out_x, out_w


@lru_cache(maxsize=256)
def gauss_jacobi_rule(gamma_exp: float, delta_exp: float, M: int) -> QuadRule:
    """M-point Gauss-Jacobi rule: Golub-Welsch nodes, Newton-polished, closed-form weights.

    Exact for polynomials of degree <= 2M-1 against the Jacobi weight.
    """
    a, b = float(gamma_exp), float(delta_exp)
    if a <= -1 or b <= -1:
        raise DomainError(f"Jacobi exponents must exceed -1, got ({a}, {b})")
    if int(M) != M or M < 1:
        raise DomainError(f"rule order must be a positive integer, got {M}")
    M = int(M)

    k = np.arange(M, dtype=float)
    ab = a + b
    diag = np.empty(M)
    diag[0] = (b - a) / (ab + 2)
    if M > 1:
        kk = k[1:]
        diag[1:] = (b * b - a * a) / ((2 * kk + ab) * (2 * kk + ab + 2))

    off = np.empty(max(M - 1, 0))
    if M > 1:
        # k = 1 written with the (k + a + b) factor cancelled; it is 0/0 when a + b = -1
        off[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
        kk = k[2:]
        off[1:] = (
            4 * kk * (kk + a) * (kk + b) * (kk + ab)
            / ((2 * kk + ab) ** 2 * (2 * kk + ab + 1) * (2 * kk + ab - 1))
        )
    nodes = eigh_tridiagonal(diag, np.sqrt(off), eigvals_only=True)
    nodes, weights = _polish_rule(nodes, a, b)

    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(a, b, nodes, weights)
