"""Power-basis expansion of Lagrange cardinal polynomials.

Row ``i`` of the coefficient matrix holds the ``c_{i,k}`` with

    l_i(x) = sum_k c_{i,k} (x - anchor)^(N - k)

where the anchor is the left (a) or right (b) end of the grid interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .errors import DomainError, DuplicateNodeError, SingularSystemError
from .grids import CollocationGrid, legendre_lobatto
from .numerics import PrecisionMode


class Anchor(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, eq=False)
class PowerBasisCoeffs:
    """Expansion coefficients; an object array of mpf when ``precision`` is extended."""

    anchor: Anchor
    anchor_value: float
    N: int
    coeffs: np.ndarray
    precision: PrecisionMode
    grid_key: tuple = ()

    def as_float(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


def _shifted_nodes(grid: CollocationGrid, anchor: Anchor, precision: PrecisionMode):
    anchor_value = grid.a if anchor is Anchor.LEFT else grid.b
    if precision.is_extended:
        shift = mpmath.mpf(anchor_value)
        z = np.array([mpmath.mpf(float(x)) - shift for x in grid.points], dtype=object)
    else:
        z = np.asarray(grid.points, dtype=float) - anchor_value
    return anchor_value, z


def _check_distinct(points: np.ndarray) -> None:
    if len(np.unique(points)) != len(points):
        raise DuplicateNodeError("collocation nodes must be pairwise distinct")


def _henrici_row(z: np.ndarray, i: int, one):
    """Monic coefficients of prod_{j != i} (y - z_j), highest power first, scaled by 1/prod(z_i - z_j)."""
    others = np.delete(z, i)
    m = len(others)
    # power sums s_1..s_m of the roots
    powers = np.empty(m, dtype=z.dtype)
    s = np.empty(m + 1, dtype=z.dtype)
    powers[:] = others
    for k in range(1, m + 1):
        s[k] = powers.sum()
        powers = powers * others
    c = np.empty(m + 1, dtype=z.dtype)
    c[0] = one
    for k in range(1, m + 1):
        # c_k = -(1/k) (s_k c_0 + s_{k-1} c_1 + ... + s_1 c_{k-1})
        c[k] = -np.dot(s[k:0:-1], c[:k]) / k
    denom = one
    for zj in others:
        denom = denom * (z[i] - zj)
    return c / denom


def expand_lagrange(
    grid: CollocationGrid,
    anchor: Anchor | str = Anchor.LEFT,
    precision: PrecisionMode | None = None,
) -> PowerBasisCoeffs:
    """Expand every cardinal polynomial with the Newton power-sum recurrence."""
    anchor = Anchor(anchor)
    precision = precision or PrecisionMode.for_degree(grid.N)
    _check_distinct(grid.points)
    if precision.is_extended:
        with mpmath.workprec(precision.bits):
            anchor_value, z = _shifted_nodes(grid, anchor, precision)
            rows = [_henrici_row(z, i, mpmath.mpf(1)) for i in range(grid.N + 1)]
    else:
        anchor_value, z = _shifted_nodes(grid, anchor, precision)
        rows = [_henrici_row(z, i, 1.0) for i in range(grid.N + 1)]
    coeffs = np.array(rows, dtype=object if precision.is_extended else float)
    coeffs.setflags(write=False)
    return PowerBasisCoeffs(anchor, anchor_value, grid.N, coeffs, precision, grid.key())


def _bjorck_pereyra(z: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve sum_k a_k z_j^k = rhs_j (ascending powers) for every column of ``rhs``.

    Newton divided differences followed by conversion to the monomial basis;
    accurate to high relative precision when the nodes are ordered and of one sign.
    """
    n = len(z)
    a = rhs.copy()
    for k in range(n - 1):
        for j in range(n - 1, k, -1):
            gap = z[j] - z[j - k - 1]
            if gap == 0:
                raise SingularSystemError("Vandermonde system is singular (repeated node)", float("inf"))
            a[j] = (a[j] - a[j - 1]) / gap
    for k in range(n - 2, -1, -1):
        for j in range(k, n - 1):
            a[j] = a[j] - z[k] * a[j + 1]
    return a


def expand_lagrange_vandermonde(
    grid: CollocationGrid,
    anchor: Anchor | str = Anchor.LEFT,
    precision: PrecisionMode | None = None,
) -> PowerBasisCoeffs:
    """Same expansion obtained by solving the Vandermonde system in powers of (x_j - anchor).

    The system is solved with the Bjorck-Pereyra algorithm on |x_j - anchor|,
    which is ordered and nonnegative for either anchor.
    """
    anchor = Anchor(anchor)
    precision = precision or PrecisionMode.for_degree(grid.N)
    _check_distinct(grid.points)
    N = grid.N
    # right anchor: x - b = -w with w = b - x >= 0, so a_k(z) = (-1)^k a_k(w)
    sign = 1 if anchor is Anchor.LEFT else -1
    if precision.is_extended:
        with mpmath.workprec(precision.bits):
            anchor_value, z = _shifted_nodes(grid, anchor, precision)
            w = sign * z
            order = np.argsort([float(v) for v in w])
            eye = np.array([[mpmath.mpf(int(i == j)) for j in range(N + 1)] for i in range(N + 1)], dtype=object)
            ascending = _bjorck_pereyra(w[order], eye[order])
            flips = np.array([mpmath.mpf(sign) ** k for k in range(N + 1)], dtype=object)
            ascending = ascending * flips[:, None]
    else:
        anchor_value, z = _shifted_nodes(grid, anchor, precision)
        w = sign * z
        order = np.argsort(w)
        ascending = _bjorck_pereyra(w[order], np.eye(N + 1)[order])
        ascending = ascending * (float(sign) ** np.arange(N + 1))[:, None]
    # column i of ``ascending`` holds l_i in ascending powers; rows of coeffs run from power N down
    coeffs = np.ascontiguousarray(ascending[::-1].T)
    coeffs.setflags(write=False)
    return PowerBasisCoeffs(anchor, anchor_value, N, coeffs, precision, grid.key())


def reconstruction_residual(grid: CollocationGrid, pb: PowerBasisCoeffs) -> float:
    """max_{i,j} |sum_k c_{i,k} (x_j - anchor)^(N-k) - delta_ij|, evaluated in pb's precision."""
    N = pb.N
    exponents = np.arange(N, -1, -1)
    if pb.precision.is_extended:
        with mpmath.workprec(pb.precision.bits):
            _, z = _shifted_nodes(grid, pb.anchor, pb.precision)
            P = np.array([[zj**int(e) for e in exponents] for zj in z], dtype=object)
            R = P.dot(pb.coeffs.T) - np.eye(N + 1, dtype=int)
            return float(max(abs(v) for v in R.ravel()))
    _, z = _shifted_nodes(grid, pb.anchor, pb.precision)
    P = z[:, None] ** exponents[None, :]
    return float(np.max(np.abs(P @ pb.coeffs.T - np.eye(N + 1))))


def coeff_error_report(N: int, bits: int = 256, method: str = "henrici") -> float:
    """Largest absolute error of binary64 Legendre-Lobatto coefficients against an extended reference.

    ``method`` selects the binary64 expansion: ``"henrici"`` (power-sum
    recurrence, the default expansion) or ``"vandermonde"`` (Bjorck-Pereyra).
    """
    builders = {"henrici": expand_lagrange, "vandermonde": expand_lagrange_vandermonde}
    if method not in builders:
        raise DomainError(f"unknown expansion method {method!r}; choose from {sorted(builders)}")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    grid = legendre_lobatto(int(N))
    approx = builders[method](grid, Anchor.LEFT, PrecisionMode.double()).coeffs
    exact = expand_lagrange(grid, Anchor.LEFT, PrecisionMode.extended(bits)).coeffs
    return float(max(abs(float(e) - a) for e, a in zip(exact.ravel(), approx.ravel())))
