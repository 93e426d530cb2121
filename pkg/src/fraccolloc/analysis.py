"""Error norms, convergence sweeps and dense eigenvalues of iteration matrices."""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .grids import CollocationGrid, Family, make_grid
from .numerics import PrecisionMode

PRECISION_FLOOR = 1e-13
QR_ITERATIONS_PER_EIGENVALUE = 30


def norm_weights(grid: CollocationGrid) -> np.ndarray:
    """Discrete L2 weights: Legendre-Gauss-Lobatto or Chebyshev-Gauss-Lobatto quadrature weights."""
    if grid.weights is not None:
        return grid.weights
    N = grid.N
    w = np.full(N + 1, math.pi / N)
    w[[0, N]] /= 2
    return w * (grid.b - grid.a) / 2


def error_norms(numeric, exact, weights) -> tuple[float, float]:
    """(max |e|, sqrt(sum e^2 w)) in 1D, or with w_r w_s for 2D arrays."""
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise DomainError(f"shape mismatch: {numeric.shape} vs {exact.shape}")
    w = np.asarray(weights, dtype=float)
    if numeric.ndim == 2:
        w = np.outer(w, w)
    if w.shape != numeric.shape:
        raise DomainError(f"weights of shape {w.shape} do not match values of shape {numeric.shape}")
    diff = numeric - exact
    if diff.size == 0:
        return 0.0, 0.0
    return float(np.max(np.abs(diff))), float(np.sqrt(np.sum(diff * diff * w)))


@dataclass
class ConvergenceTable:
    example: str
    family: str
    alpha: float
    tau: float
    t: float
    rows: list[tuple[int, float, float]] = field(default_factory=list)

    def add(self, N: int, linf: float, l2: float) -> None:
        if self.rows and N <= self.rows[-1][0]:
            raise DomainError("rows must have strictly increasing N")
        self.rows.append((int(N), float(linf), float(l2)))

    @property
    def Ns(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def linf(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def l2(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    def pre_floor_range(self, floor: float = PRECISION_FLOOR) -> list[tuple[int, float]]:
        """Leading (N, L2) rows before the error curve flattens.

        Stops after the first row at or below ``floor``, and before the first row
        that fails to halve the previous error (a floor set by time stepping or
        roundoff rather than by N).
        """
        keep: list[tuple[int, float]] = []
        for N, _, l2 in self.rows:
            if keep and l2 > 0.5 * keep[-1][1]:
                break
            keep.append((N, l2))
            if l2 <= floor:
                break
        return keep

    def pre_floor_slope(self, floor: float = PRECISION_FLOOR) -> float:
        """Least-squares slope of log10(L2) against N over the pre-floor rows."""
        keep = self.pre_floor_range(floor)
        if len(keep) < 2:
            raise DomainError("need at least two pre-floor rows to fit a slope")
        N, e = np.array(keep).T
        return float(np.polyfit(N, np.log10(np.maximum(e, 1e-300)), 1)[0])


def run_case(
    example: str,
    family: str,
    alpha: float,
    N: int,
    tau: float,
    t_final: float,
    precision: str | None = None,
    quadrature_order: int | None = None,
) -> tuple[float, float]:
    """Solve one manufactured case and return its (L_inf, L2) errors at t_final."""
    from .solver1d import manufactured_problem_1d, solve_1d
    from .solver2d import grid_mesh, manufactured_problem_2d, solve_2d
    from .source_oracle import get_case

    case = get_case(example)
    grid = make_grid(family, N)
    prec = PrecisionMode.parse(precision) if precision else None
    w = norm_weights(grid)
    if case.dimensionality == 1:
        prb = manufactured_problem_1d(case, grid, alpha, tau, t_final, precision=prec, quadrature_order=quadrature_order)
        state, _ = solve_1d(prb)
        return error_norms(state.values, case.exact(t_final, grid.points), w)
    prb = manufactured_problem_2d(case, grid, alpha, tau, t_final, precision=prec, quadrature_order=quadrature_order)
    state, _ = solve_2d(prb)
    X, Y = grid_mesh(grid)
    return error_norms(state.values, case.exact(t_final, X, Y), w)


def _run_cell(args):
    return run_case(*args)


def convergence_sweep(
    example: str,
    family: Family | str,
    alphas: Sequence[float],
    Ns: Sequence[int],
    tau: float,
    t_final: float,
    precision: str | None = None,
    jobs: int = 1,
) -> list[ConvergenceTable]:
    """One table per alpha; cells run in a process pool when ``jobs > 1``."""
    family = Family(family).value
    Ns = sorted(set(int(n) for n in Ns))
    if not Ns:
        raise DomainError("N list must not be empty")
    if not alphas:
        raise DomainError("alpha list must not be empty")
    cells = [(example, family, float(a), N, tau, t_final, precision) for a in alphas for N in Ns]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    tables = []
    it = iter(results)
    for a in alphas:
        table = ConvergenceTable(example, family, float(a), tau, t_final)
        for N in Ns:
            table.add(N, *next(it))
        tables.append(table)
    return tables


# ---------------------------------------------------------------- eigenvalues


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # complex
    source: str = ""

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if len(self.eigenvalues) else 0.0


def _balance(A: np.ndarray) -> np.ndarray:
    """Diagonal similarity by powers of two making row and column norms comparable."""
    A = A.copy()
    n = A.shape[0]
    radix, sqrdx = 2.0, 4.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.sum(np.abs(A[:, i])) - abs(A[i, i])
            r = np.sum(np.abs(A[i, :])) - abs(A[i, i])
            if c == 0 or r == 0:
                continue
            g, f, s = r / radix, 1.0, c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def _hessenberg(A: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    H = A.copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _hqr(H: np.ndarray) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR with deflation."""
    a = H.copy()
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = np.sum(np.abs(a))
    nn = n - 1
    t = 0.0
    eps = np.finfo(float).eps
    while nn >= 0:
        its = 0
        while True:
            # look for a single small subdiagonal element
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= eps * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:  # one root
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:  # two roots
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == QR_ITERATIONS_PER_EIGENVALUE:
                raise ConvergenceError(
                    f"QR iteration did not converge for eigenvalue {nn}",
                    residual=abs(a[nn, nn - 1]),
                )
            if its in (10, 20):  # exceptional shift
                t += x
                a[np.arange(nn + 1), np.arange(nn + 1)] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            # find two consecutive small subdiagonal elements
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p, q, r = p / s, q / s, r / s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= eps * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            # double QR step on rows l..nn and columns m..nn
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p, q, r = p / x, q / x, r / x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x, y, z = p / s, q / s, r / s
                q, r = q / p, r / p
                last = k != nn - 1
                # row modification
                cols = slice(k, nn + 1)
                pr = a[k, cols] + q * a[k + 1, cols]
                if last:
                    pr = pr + r * a[k + 2, cols]
                    a[k + 2, cols] -= pr * z
                a[k + 1, cols] -= pr * y
                a[k, cols] -= pr * x
                # column modification
                rows = slice(l, min(nn, k + 3) + 1)
                pc = x * a[rows, k] + y * a[rows, k + 1]
                if last:
                    pc = pc + z * a[rows, k + 2]
                    a[rows, k + 2] -= pc * r
                a[rows, k + 1] -= pc * q
                a[rows, k] -= pc
    return wr + 1j * wi


def eigenvalues_dense(matrix, source: str = "") -> Spectrum:
    """All eigenvalues of a real square matrix: balancing, Hessenberg reduction, shifted QR."""
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"need a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    if A.shape[0] == 0:
        return Spectrum(np.zeros(0, dtype=complex), source)
    ev = _hqr(_hessenberg(_balance(A)))
    order = np.lexsort((ev.imag, ev.real))
    return Spectrum(ev[order], source)


def eigen_residuals(matrix, spectrum: Spectrum) -> np.ndarray:
    """Smallest singular value of A - lambda I for each eigenvalue, relative to ||A||_2."""
    A = np.asarray(matrix, dtype=float)
    nrm = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    eye = np.eye(A.shape[0])
    return np.array([np.linalg.svd(A - lam * eye, compute_uv=False)[-1] / nrm for lam in spectrum.eigenvalues])


def spectral_radius(matrix) -> float:
    return eigenvalues_dense(matrix).radius
