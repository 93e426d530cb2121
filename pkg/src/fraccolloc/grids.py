"""Gauss-Lobatto collocation grids on arbitrary intervals."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConvergenceError, DomainError

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-15


class Family(str, Enum):
    LEGENDRE = "legendre"
    CHEBYSHEV = "chebyshev"


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    """N+1 Gauss-Lobatto points on ``interval``.

    ``reference_points`` are the same nodes on [-1, 1]; ``weights`` are the
    Legendre-Gauss-Lobatto quadrature weights (None for Chebyshev).
    """

    family: Family
    N: int
    interval: tuple[float, float]
    points: np.ndarray
    reference_points: np.ndarray
    weights: np.ndarray | None = None

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    def key(self) -> tuple:
        """Hashable identity, used for caching derived operators."""
        return (self.family.value, self.N, self.interval)


def _validate(N: int, interval: tuple[float, float]) -> tuple[int, tuple[float, float]]:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be an integer >= 1, got {N}")
    a, b = (float(v) for v in interval)
    if not a < b:
        raise DomainError(f"interval must satisfy a < b, got ({a}, {b})")
    return int(N), (a, b)


def _map(ref: np.ndarray, a: float, b: float) -> np.ndarray:
    # midpoint form keeps odd-symmetric reference nodes bitwise symmetric on [-1, 1]
    x = (a + b) / 2.0 + (b - a) / 2.0 * ref
    x[0], x[-1] = a, b
    return x


def _freeze(*arrays: np.ndarray | None) -> None:
    for arr in arrays:
        if arr is not None:
            arr.setflags(write=False)


def chebyshev_lobatto(N: int, interval: tuple[float, float] = (-1.0, 1.0)) -> CollocationGrid:
    """Points -cos(pi i / N), i = 0..N, mapped onto ``interval``."""
    N, (a, b) = _validate(N, interval)
    # sine form is exactly odd-symmetric in floating point, unlike -cos
    ref = np.sin(np.pi * (2 * np.arange(N + 1) - N) / (2 * N))
    points = _map(ref, a, b)
    _freeze(ref, points)
    return CollocationGrid(Family.CHEBYSHEV, N, (a, b), points, ref)


def legendre_eval(N: int, x):
    """Return (P_N(x), P_N'(x)) by the three-term recurrence.

    The derivative uses P'_{k+1} = P'_{k-1} + (2k+1) P_k, which is regular at +-1.
    """
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    dp_prev, dp = np.zeros_like(x), np.ones_like(x)
    if N == 0:
        p, dp = p_prev, dp_prev
    for k in range(1, N):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        dp_next = dp_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    if x.ndim == 0:
        return float(p), float(dp)
    return p, dp


def _legendre_lobatto_reference(N: int) -> np.ndarray:
    """Roots of (1 - x^2) P_N'(x) on [-1, 1], exactly odd-symmetric."""
    ref = np.empty(N + 1)
    ref[0], ref[-1] = -1.0, 1.0
    half = (N - 1) // 2  # interior roots strictly in (-1, 0)
    if half:
        x = -np.cos(np.pi * np.arange(1, half + 1) / N)
        for _ in range(NEWTON_MAX_ITER):
            p, dp = legendre_eval(N, x)
            # P_N'' from the Legendre ODE, valid away from +-1
            ddp = (2 * x * dp - N * (N + 1) * p) / (1 - x * x)
            dx = dp / ddp
            x = x - dx
            if np.max(np.abs(dx)) <= NEWTON_TOL:
                break
        else:
            raise ConvergenceError(
                f"Legendre-Lobatto Newton iteration did not converge for N={N}",
                residual=float(np.max(np.abs(dx))),
            )
        ref[1 : half + 1] = x
        ref[N - half : N] = -x[::-1]
    if N % 2 == 0:
        ref[N // 2] = 0.0
    return ref


def legendre_lobatto(N: int, interval: tuple[float, float] = (-1.0, 1.0)) -> CollocationGrid:
    """Legendre-Gauss-Lobatto points and quadrature weights on ``interval``."""
    N, (a, b) = _validate(N, interval)
    ref = _legendre_lobatto_reference(N)
    p, _ = legendre_eval(N, ref)
    weights = 2.0 / (N * (N + 1) * p**2) * (b - a) / 2.0
    points = _map(ref, a, b)
    _freeze(ref, points, weights)
    return CollocationGrid(Family.LEGENDRE, N, (a, b), points, ref, weights)


def make_grid(family: Family | str, N: int, interval: tuple[float, float] = (-1.0, 1.0)) -> CollocationGrid:
    family = Family(family)
    if family is Family.LEGENDRE:
        return legendre_lobatto(N, interval)
    return chebyshev_lobatto(N, interval)
