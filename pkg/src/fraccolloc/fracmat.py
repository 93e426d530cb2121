"""Fractional and first-order differentiation matrices on collocation grids.

Entry ``[j, i]`` of every matrix is the derivative of the i-th cardinal
polynomial evaluated at node ``x_j``, so ``D @ u(x)`` differentiates the
interpolant of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .errors import AnchorMismatchError, DomainError
from .grids import CollocationGrid, Family, legendre_eval
from .lagrange import Anchor, PowerBasisCoeffs, expand_lagrange
from .numerics import PrecisionMode, gamma_ratio


class Kind(str, Enum):
    RL_LEFT = "rl-left"
    RL_RIGHT = "rl-right"
    CAPUTO_LEFT = "caputo-left"
    CAPUTO_RIGHT = "caputo-right"
    FIRST = "first"

    @property
    def anchor(self) -> Anchor | None:
        if self in (Kind.RL_LEFT, Kind.CAPUTO_LEFT):
            return Anchor.LEFT
        if self in (Kind.RL_RIGHT, Kind.CAPUTO_RIGHT):
            return Anchor.RIGHT
        return None

    @property
    def is_caputo(self) -> bool:
        return self in (Kind.CAPUTO_LEFT, Kind.CAPUTO_RIGHT)


@dataclass(frozen=True, eq=False)
class DiffMatrix:
    """Dense (N+1)x(N+1) operator. Rows listed in ``undefined_rows`` hold NaN."""

    kind: Kind
    alpha: float
    grid: CollocationGrid
    entries: np.ndarray
    undefined_rows: frozenset[int]

    @property
    def defined_rows(self) -> np.ndarray:
        return np.array([j for j in range(self.grid.N + 1) if j not in self.undefined_rows], dtype=int)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Matrix-vector product; undefined rows come back as NaN."""
        return self.entries @ np.asarray(values, dtype=float)


def integer_order(alpha: float) -> int:
    """n = ceil(alpha), the integer with n - 1 < alpha < n."""
    return math.ceil(alpha)


def _validate_alpha(alpha: float, N: int) -> float:
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError(f"fractional order must be positive, got {alpha}")
    if alpha.is_integer():
        raise DomainError(
            f"fractional order must be non-integer, got {alpha}; use first_order_matrix for integer orders"
        )
    if integer_order(alpha) > N:
        raise DomainError(f"need N >= ceil(alpha) = {integer_order(alpha)}, got N={N}")
    return alpha


def _coeffs_for(grid: CollocationGrid, anchor: Anchor, coeffs: PowerBasisCoeffs | None) -> PowerBasisCoeffs:
    if coeffs is None:
        return expand_lagrange(grid, anchor)
    if coeffs.anchor is not anchor:
        raise AnchorMismatchError(f"expected {anchor.value}-anchored coefficients, got {coeffs.anchor.value}")
    if coeffs.N != grid.N or (coeffs.grid_key and coeffs.grid_key != grid.key()):
        raise AnchorMismatchError("coefficients were computed on a different grid")
    return coeffs


def _fractional(grid: CollocationGrid, alpha: float, kind: Kind, coeffs: PowerBasisCoeffs | None) -> DiffMatrix:
    N = grid.N
    alpha = _validate_alpha(alpha, N)
    anchor = kind.anchor
    pb = _coeffs_for(grid, anchor, coeffs)
    n = integer_order(alpha)
    kmax = N - n if kind.is_caputo else N
    ks = np.arange(kmax + 1)
    exponents = N - ks - alpha
    # alpha is non-integer, so no exponent is 0 and 0**0 never arises
    assert np.all(exponents != 0)

    if anchor is Anchor.LEFT:
        base_float = grid.points - grid.a
    else:
        base_float = grid.b - grid.points
    undefined = frozenset(int(j) for j in np.flatnonzero(base_float == 0)) if not kind.is_caputo else frozenset()
    rows = [j for j in range(N + 1) if j not in undefined]

    if pb.precision.is_extended:
        with mpmath.workprec(pb.precision.bits):
            a_mp = mpmath.mpf(alpha)
            factors = []
            for k in ks:
                g = mpmath.gamma(N - k + 1) * mpmath.rgamma(N - k + 1 - a_mp)
                if anchor is Anchor.RIGHT and (N - k) % 2:
                    g = -g
                factors.append(g)
            P = np.empty((len(rows), kmax + 1), dtype=object)
            for r, j in enumerate(rows):
                if anchor is Anchor.LEFT:
                    base = mpmath.mpf(float(grid.points[j])) - mpmath.mpf(grid.a)
                else:
                    base = mpmath.mpf(grid.b) - mpmath.mpf(float(grid.points[j]))
                for k in ks:
                    e = N - int(k) - a_mp
                    P[r, k] = factors[k] * (base**e if base != 0 else mpmath.mpf(0))
            block = P.dot(pb.coeffs[:, : kmax + 1].T)
            block = np.array([[float(v) for v in row] for row in block], dtype=float).reshape(len(rows), N + 1)
    else:
        factors = np.array([gamma_ratio(N - k + 1, N - k + 1 - alpha) for k in ks])
        if anchor is Anchor.RIGHT:
            factors = factors * (-1.0) ** (N - ks)
        base = base_float[rows]
        with np.errstate(divide="ignore"):
            P = np.where(base[:, None] > 0, np.abs(base[:, None]) ** exponents[None, :], 0.0) * factors[None, :]
        block = P @ np.asarray(pb.coeffs, dtype=float)[:, : kmax + 1].T

    entries = np.full((N + 1, N + 1), np.nan)
    entries[rows] = block
    entries.setflags(write=False)
    return DiffMatrix(kind, alpha, grid, entries, undefined)


def rl_left_matrix(grid: CollocationGrid, alpha: float, coeffs: PowerBasisCoeffs | None = None) -> DiffMatrix:
    """Left Riemann-Liouville matrix; the row at x = a is undefined."""
    return _fractional(grid, alpha, Kind.RL_LEFT, coeffs)


def rl_right_matrix(grid: CollocationGrid, alpha: float, coeffs: PowerBasisCoeffs | None = None) -> DiffMatrix:
    """Right Riemann-Liouville matrix; the row at x = b is undefined."""
    return _fractional(grid, alpha, Kind.RL_RIGHT, coeffs)


def caputo_left_matrix(grid: CollocationGrid, alpha: float, coeffs: PowerBasisCoeffs | None = None) -> DiffMatrix:
    return _fractional(grid, alpha, Kind.CAPUTO_LEFT, coeffs)


def caputo_right_matrix(grid: CollocationGrid, alpha: float, coeffs: PowerBasisCoeffs | None = None) -> DiffMatrix:
    return _fractional(grid, alpha, Kind.CAPUTO_RIGHT, coeffs)


def first_order_matrix(grid: CollocationGrid) -> DiffMatrix:
    """Closed-form first-derivative matrix for Legendre or Chebyshev Gauss-Lobatto points."""
    N = grid.N
    x = grid.reference_points
    diff = x[:, None] - x[None, :]  # x_j - x_i
    np.fill_diagonal(diff, 1.0)
    if grid.family is Family.LEGENDRE:
        p, _ = legendre_eval(N, x)
        D = (p[:, None] / p[None, :]) / diff
        np.fill_diagonal(D, 0.0)
        D[0, 0] = -N * (N + 1) / 4.0
        D[N, N] = N * (N + 1) / 4.0
    else:
        c = np.ones(N + 1)
        c[0] = c[N] = 2.0
        idx = np.arange(N + 1)
        sign = (-1.0) ** (idx[:, None] + idx[None, :])
        D = (c[:, None] / c[None, :]) * sign / diff
        inner = x[1:N]
        D[idx[1:N], idx[1:N]] = -inner / (2.0 * (1.0 - inner**2))
        D[0, 0] = -(2.0 * N * N + 1) / 6.0
        D[N, N] = (2.0 * N * N + 1) / 6.0
    D = D * (2.0 / (grid.b - grid.a))
    D.setflags(write=False)
    return DiffMatrix(Kind.FIRST, 1.0, grid, D, frozenset())


def diff_matrix(
    kind: Kind | str,
    grid: CollocationGrid,
    alpha: float | None = None,
    precision: PrecisionMode | None = None,
) -> DiffMatrix:
    """Build any of the five matrix kinds, expanding coefficients with the given precision."""
    kind = Kind(kind)
    if kind is Kind.FIRST:
        return first_order_matrix(grid)
    if alpha is None:
        raise DomainError(f"{kind.value} matrix needs an order alpha")
    coeffs = expand_lagrange(grid, kind.anchor, precision)
    return _fractional(grid, alpha, kind, coeffs)
