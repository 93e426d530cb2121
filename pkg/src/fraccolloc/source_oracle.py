"""Fractional derivatives of analytic functions by quadrature, and manufactured sources.

This path never touches the differentiation matrices: boundary terms come
from closed-form derivatives and the weakly singular remainder integral is
done with a Gauss-Jacobi rule that absorbs the kernel singularity.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError
from .grids import CollocationGrid
from .lagrange import Anchor
from .numerics import gamma_fn, gauss_jacobi_rule

ArrayFn = Callable[[np.ndarray], np.ndarray]


def default_quadrature_order(N: int) -> int:
    return 2 * N + 8


@dataclass(frozen=True)
class AnalyticFunction1D:
    """A smooth function of one variable with closed-form derivatives.

    ``derivs[k]`` evaluates the k-th derivative (``derivs[0]`` is the function).
    """

    name: str
    derivs: tuple[ArrayFn, ...]

    def __call__(self, x):
        return self.derivs[0](np.asarray(x, dtype=float))

    @property
    def max_order(self) -> int:
        return len(self.derivs) - 1

    def derivative(self, order: int, x):
        if order > self.max_order:
            raise DomainError(f"{self.name}: derivative of order {order} not available")
        return self.derivs[order](np.asarray(x, dtype=float))

    def power(self, m: int) -> AnalyticFunction1D:
        """The function raised to a positive integer power, derivatives up to order 2."""
        if m == 1:
            return self
        if m < 1 or int(m) != m:
            raise DomainError(f"power must be a positive integer, got {m}")
        f0, f1, f2 = self.derivs[:3]
        return AnalyticFunction1D(
            f"({self.name})^{m}",
            (
                lambda x: f0(x) ** m,
                lambda x: m * f0(x) ** (m - 1) * f1(x),
                lambda x: m * (m - 1) * f0(x) ** (m - 2) * f1(x) ** 2 + m * f0(x) ** (m - 1) * f2(x),
            ),
        )


def polynomial_function(coeffs: Sequence[float], name: str = "polynomial") -> AnalyticFunction1D:
    """Polynomial with ascending coefficients; every derivative is available."""
    p = Polynomial(coeffs)
    derivs = tuple(p.deriv(k) for k in range(p.degree() + 3))
    return _PolynomialFunction(name, tuple(lambda x, q=q: q(x) for q in derivs), p)


@dataclass(frozen=True)
class _PolynomialFunction(AnalyticFunction1D):
    poly: Polynomial = field(default=None, repr=False)

    def power(self, m: int) -> AnalyticFunction1D:
        if m < 1 or int(m) != m:
            raise DomainError(f"power must be a positive integer, got {m}")
        return polynomial_function((self.poly**m).coef, f"({self.name})^{m}")


COS_PI_PLUS_ONE = AnalyticFunction1D(
    "cos(pi x) + 1",
    (
        lambda x: np.cos(np.pi * x) + 1.0,
        lambda x: -np.pi * np.sin(np.pi * x),
        lambda x: -np.pi**2 * np.cos(np.pi * x),
    ),
)
SIN = AnalyticFunction1D("sin x", (np.sin, np.cos, lambda x: -np.sin(x)))
EXP_SQUARE = AnalyticFunction1D(
    "exp(x^2)",
    (
        lambda x: np.exp(x * x),
        lambda x: 2 * x * np.exp(x * x),
        lambda x: (2 + 4 * x * x) * np.exp(x * x),
    ),
)


def rl_deriv_analytic_monomial(gamma_exp: float, alpha: float, side: Anchor | str, interval, x):
    """Riemann-Liouville derivative of (x-a)^gamma (left) or (x-b)^gamma (right).

    For non-integer gamma on the right the function is read as (b-x)^gamma.
    """
    side = Anchor(side)
    a, b = interval
    x = np.asarray(x, dtype=float)
    ratio = gamma_fn(gamma_exp + 1) / gamma_fn(gamma_exp + 1 - alpha)
    if side is Anchor.LEFT:
        return ratio * (x - a) ** (gamma_exp - alpha)
    sign = (-1.0) ** gamma_exp if float(gamma_exp).is_integer() else 1.0
    return sign * ratio * (b - x) ** (gamma_exp - alpha)


def rl_deriv_quadrature(
    v: AnalyticFunction1D,
    alpha: float,
    side: Anchor | str,
    interval,
    x,
    M: int = 40,
):
    """Riemann-Liouville derivative of ``v`` at interior points ``x``.

    Boundary series in the derivatives of ``v`` at the anchor plus the
    remainder integral of ``v^(n)`` against the Abel kernel, integrated with an
    M-point Gauss-Jacobi rule on the mapped interval.
    """
    side = Anchor(side)
    a, b = (float(t) for t in interval)
    x = np.asarray(x, dtype=float)
    if np.any((x <= a) | (x >= b)):
        raise DomainError("quadrature oracle needs points strictly inside the interval")
    alpha = float(alpha)
    n = math.ceil(alpha) if not alpha.is_integer() else int(alpha) + 1
    kernel_exp = n - alpha - 1

    if side is Anchor.LEFT:
        h = x - a
        total = sum(
            v.derivative(k, a) * h ** (k - alpha) / gamma_fn(k + 1 - alpha) for k in range(n)
        )
        rule = gauss_jacobi_rule(kernel_exp, 0.0, M)
        xi = (x[..., None] + a) / 2 + h[..., None] * rule.nodes / 2
    else:
        h = b - x
        total = sum(
            (-1) ** k * v.derivative(k, b) * h ** (k - alpha) / gamma_fn(k + 1 - alpha) for k in range(n)
        )
        rule = gauss_jacobi_rule(0.0, kernel_exp, M)
        xi = (x[..., None] + b) / 2 + h[..., None] * rule.nodes / 2
    integral = rule.integrate(v.derivative(n, xi)) * (h / 2) ** (n - alpha)
    sign = (-1) ** n if side is Anchor.RIGHT else 1
    return total + sign * integral / gamma_fn(n - alpha)


@dataclass(frozen=True)
class TimeFactor:
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    name: str = ""


@dataclass(frozen=True)
class ManufacturedCase:
    """Separable exact solution u = T(t) * prod_s X_s(x_s) and its example defaults.

    ``boundary`` is ``"dirichlet"`` (values of u on the boundary) or
    ``"robin"`` (u - u_x at -1, u + u_x at +1, as in the mixed example).
    """

    key: str
    time: TimeFactor
    space: tuple[AnalyticFunction1D, ...]
    m: int = 1
    boundary: str = "dirichlet"
    defaults: dict = field(default_factory=lambda: {"kappa": 1.0, "nu": 1.0, "p": 0.5, "q": 0.5})

    @property
    def dimensionality(self) -> int:
        return len(self.space)

    def exact(self, t: float, *coords):
        val = self.time.value(t)
        for f, c in zip(self.space, coords):
            val = val * f(c)
        return val

    def exact_dx(self, axis: int, t: float, *coords):
        val = self.time.value(t)
        for s, (f, c) in enumerate(zip(self.space, coords)):
            val = val * (f.derivative(1, c) if s == axis else f(c))
        return val


QUADRATIC_TIME = TimeFactor(lambda t: t * t + 1.0, lambda t: 2.0 * t, "t^2 + 1")
HALF_EXP_TIME = TimeFactor(lambda t: math.exp(t / 2), lambda t: 0.5 * math.exp(t / 2), "exp(t/2)")
STEADY_TIME = TimeFactor(lambda t: 1.0, lambda t: 0.0, "1")

CATALOG: dict[str, ManufacturedCase] = {
    "example1": ManufacturedCase("example1", QUADRATIC_TIME, (COS_PI_PLUS_ONE,)),
    "example2": ManufacturedCase("example2", HALF_EXP_TIME, (SIN,), boundary="robin"),
    "example3": ManufacturedCase("example3", QUADRATIC_TIME, (EXP_SQUARE, EXP_SQUARE)),
    "example5": ManufacturedCase("example5", QUADRATIC_TIME, (EXP_SQUARE, EXP_SQUARE), m=2),
    # steady polynomial vanishing at +-1, for oracle and fixed-point tests
    "polynomial": ManufacturedCase(
        "polynomial", STEADY_TIME, (polynomial_function([1.0, 0.5, -2.0, -0.5, 1.0], "(1-x^2)^2 + x(x^2-1)/2"),)
    ),
}


def get_case(key: str) -> ManufacturedCase:
    try:
        return CATALOG[key]
    except KeyError:
        raise DomainError(f"unknown example key {key!r}; known: {sorted(CATALOG)}") from None


@dataclass(frozen=True)
class SourceParams:
    alpha: float
    kappa: float = 1.0
    nu: float = 1.0
    p: float = 0.5
    q: float = 0.5


class SourceField:
    """Manufactured source on the interior collocation points of one grid.

    Because the exact solution is separable, the spatial factors (including
    the expensive fractional derivatives of X^m) are computed once; each time
    level then only combines them with T(t), T'(t) and T(t)^m. Values per time
    level are cached.
    """

    def __init__(self, case: ManufacturedCase, params: SourceParams, grid: CollocationGrid, M: int | None = None):
        self.case = case
        self.params = params
        self.grid = grid
        self.M = M or default_quadrature_order(grid.N)
        x = grid.interior
        interval = grid.interval
        self._value, self._grad, self._frac, self._value_m = [], [], [], []
        for f in case.space:
            fm = f.power(case.m)
            left = rl_deriv_quadrature(fm, params.alpha, Anchor.LEFT, interval, x, self.M)
            right = rl_deriv_quadrature(fm, params.alpha, Anchor.RIGHT, interval, x, self.M)
            self._value.append(f(x))
            self._grad.append(f.derivative(1, x))
            self._value_m.append(fm(x))
            self._frac.append(params.p * left + params.q * right)
        self._cache: dict[float, np.ndarray] = {}

    def _outer(self, factors: list[np.ndarray]) -> np.ndarray:
        out = factors[0]
        for f in factors[1:]:
            out = np.multiply.outer(out, f)
        return out

    def __call__(self, t: float) -> np.ndarray:
        t = float(t)
        if t in self._cache:
            return self._cache[t]
        case, prm = self.case, self.params
        T, dT = case.time.value(t), case.time.derivative(t)
        d = case.dimensionality
        f = dT * self._outer(self._value)
        for s in range(d):
            frac = [self._frac[r] if r == s else self._value_m[r] for r in range(d)]
            grad = [self._grad[r] if r == s else self._value[r] for r in range(d)]
            f = f - prm.kappa * T**case.m * self._outer(frac) + prm.nu * T * self._outer(grad)
        f.setflags(write=False)
        self._cache[t] = f
        return f


def manufactured_source(
    case: ManufacturedCase,
    params: SourceParams,
    grid: CollocationGrid,
    t: float,
    M: int | None = None,
) -> np.ndarray:
    """f = u_t - kappa sum_s grad^alpha_s u^m + nu sum_s d_s u at interior points.

    Returns shape (N-1,) in 1D and (N-1, N-1) indexed [r, s] in 2D.
    """
    return SourceField(case, params, grid, M)(t)
