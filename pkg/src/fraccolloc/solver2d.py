"""Two-dimensional scheme on the square: Kronecker-product operators, the linear
theta-scheme, and the Crank-Nicolson scheme for u^m nonlinearities solved by Newton.

Interior unknowns are ordered with the x index running fastest,
u_{1,1}, ..., u_{N-1,1}, u_{1,2}, ..., i.e. ``vec(U) = U[1:N, 1:N].ravel(order="F")``
for arrays indexed ``U[r, s]`` = u(x_r, y_s).
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, SingularSystemError
from .fracmat import first_order_matrix, rl_left_matrix, rl_right_matrix
from .grids import CollocationGrid
from .lagrange import Anchor, expand_lagrange
from .numerics import PrecisionMode
from .solver1d import PQ_SUM_TOL, SINGULAR_RCOND, steps
from .source_oracle import ManufacturedCase, SourceField, SourceParams

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 25
ROUNDOFF_SAFETY = 8.0
EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Problem2D:
    grid: CollocationGrid
    alpha: float
    tau: float
    T: float
    kappa: float = 1.0
    nu: float = 1.0
    p: float = 0.5
    q: float = 0.5
    m: int = 1
    theta: float = 0.5
    boundary: Callable[[np.ndarray, np.ndarray, float], np.ndarray] = field(
        default=lambda x, y, t: np.zeros(np.broadcast(x, y).shape)
    )
    initial: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(
        default=lambda x, y: np.zeros(np.broadcast(x, y).shape)
    )
    source: ManufacturedCase | None = None
    precision: PrecisionMode | None = None
    quadrature_order: int | None = None

    def __post_init__(self):
        if not 1 < self.alpha < 2:
            raise DomainError(f"alpha must lie in (1, 2), got {self.alpha}")
        if self.kappa < 0 or self.nu < 0:
            raise DomainError("kappa and nu must be nonnegative")
        if self.p < 0 or self.q < 0 or abs(self.p + self.q - 1) > PQ_SUM_TOL:
            raise DomainError(f"need p, q >= 0 with p + q = 1, got p={self.p}, q={self.q}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if self.m > 1 and self.theta != 0.5:
            raise DomainError("the nonlinear scheme is Crank-Nicolson; theta must be 0.5")
        if not 0 <= self.theta <= 1:
            raise DomainError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        steps(self.T, self.tau)
        if self.source is not None:
            if self.source.dimensionality != 2:
                raise DomainError(f"source case {self.source.key} is not two-dimensional")
            if self.source.m != self.m:
                raise DomainError(f"source case {self.source.key} has m={self.source.m}, problem has m={self.m}")


@dataclass(frozen=True)
class State2D:
    t: float
    values: np.ndarray  # (N+1, N+1), [r, s]


@dataclass(frozen=True, eq=False)
class KronOperators:
    """Dense operators on the (N-1)^2 interior unknowns.

    ``frac_1d``/``first_1d`` are the interior rows (all N+1 columns) of the 1D
    fractional and advection operators, used to fold boundary data.
    """

    M_linear: np.ndarray
    D_F: np.ndarray
    D_I: np.ndarray
    E: np.ndarray
    frac_1d: np.ndarray
    first_1d: np.ndarray


def vec(U: np.ndarray) -> np.ndarray:
    """Interior of a full grid array as a vector, x index fastest."""
    N = U.shape[0] - 1
    return U[1:N, 1:N].ravel(order="F")


def unvec(v: np.ndarray, N: int) -> np.ndarray:
    return np.asarray(v).reshape((N - 1, N - 1), order="F")


def assemble_kron(problem: Problem2D) -> KronOperators:
    grid = problem.grid
    N = grid.N
    precision = problem.precision or PrecisionMode.for_degree(N)
    L = rl_left_matrix(grid, problem.alpha, expand_lagrange(grid, Anchor.LEFT, precision)).entries
    R = rl_right_matrix(grid, problem.alpha, expand_lagrange(grid, Anchor.RIGHT, precision)).entries
    D = first_order_matrix(grid).entries
    inner = slice(1, N)
    frac = problem.kappa * (problem.p * L[inner] + problem.q * R[inner])  # (N-1, N+1)
    first = -problem.nu * D[inner]
    I = np.eye(N - 1)

    def both_axes(block):
        return np.kron(I, block) + np.kron(block, I)

    D_F = both_axes(frac[:, inner])
    D_I = both_axes(first[:, inner])
    M = D_F + D_I
    E = np.eye((N - 1) ** 2)
    for arr in (M, D_F, D_I, E, frac, first):
        arr.setflags(write=False)
    return KronOperators(M, D_F, D_I, E, frac, first)


def grid_mesh(grid: CollocationGrid) -> tuple[np.ndarray, np.ndarray]:
    """X[r, s] = x_r, Y[r, s] = y_s."""
    return np.meshgrid(grid.points, grid.points, indexing="ij")


def boundary_values(problem: Problem2D, t: float) -> np.ndarray:
    """g on the boundary of the full grid, zeros inside."""
    X, Y = grid_mesh(problem.grid)
    G = np.asarray(problem.boundary(X, Y, t), dtype=float).copy()
    G[1:-1, 1:-1] = 0.0
    return G


def _fold(ops: KronOperators, G: np.ndarray, m: int) -> np.ndarray:
    """Contributions of the boundary columns of the 1D operators, applied along x and y."""
    N = G.shape[0] - 1
    inner = slice(1, N)
    Gm = G**m
    out = (ops.frac_1d @ Gm)[:, inner] + (Gm @ ops.frac_1d.T)[inner, :]
    out += (ops.first_1d @ G)[:, inner] + (G @ ops.first_1d.T)[inner, :]
    return out.ravel(order="F")


class _Sources:
    """f~ at time levels: interior source plus folded boundary data, cached."""

    def __init__(self, problem: Problem2D, ops: KronOperators):
        self.problem = problem
        self.ops = ops
        self.field = None
        if problem.source is not None:
            params = SourceParams(problem.alpha, problem.kappa, problem.nu, problem.p, problem.q)
            self.field = SourceField(problem.source, params, problem.grid, problem.quadrature_order)
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, t: float) -> np.ndarray:
        t = float(t)
        if t not in self._cache:
            f = _fold(self.ops, boundary_values(self.problem, t), self.problem.m)
            if self.field is not None:
                f = f + self.field(t).ravel(order="F")
            self._cache[t] = f
        return self._cache[t]


def boundary_folded_source(problem: Problem2D, t: float, ops: KronOperators | None = None) -> np.ndarray:
    """Length (N-1)^2 vector f(x_r, y_s, t) plus the boundary-column contributions."""
    return _Sources(problem, ops or assemble_kron(problem))(t)


def _lu(matrix: np.ndarray):
    lu, piv = scipy.linalg.lu_factor(matrix)
    d = np.abs(np.diag(lu))
    if d.min() <= SINGULAR_RCOND * max(d.max(), 1.0):
        raise SingularSystemError("system matrix is singular", np.linalg.cond(matrix))
    return lu, piv


def _assemble_state(problem: Problem2D, interior: np.ndarray, t: float) -> State2D:
    N = problem.grid.N
    U = boundary_values(problem, t)
    U[1:N, 1:N] = unvec(interior, N)
    return State2D(t, U)


class LinearScheme2D:
    """(E - theta tau M) U^{k+1} = (E + (1-theta) tau M) U^k + tau (theta f~^{k+1} + (1-theta) f~^k)."""

    def __init__(self, problem: Problem2D, ops: KronOperators | None = None):
        self.problem = problem
        self.ops = ops or assemble_kron(problem)
        th, tau = problem.theta, problem.tau
        self.lu = _lu(self.ops.E - th * tau * self.ops.M_linear)
        self.rhs_matrix = self.ops.E + (1 - th) * tau * self.ops.M_linear
        self.sources = _Sources(problem, self.ops)

    def step(self, state: State2D) -> State2D:
        prb = self.problem
        th, tau = prb.theta, prb.tau
        t1 = state.t + tau
        rhs = self.rhs_matrix @ vec(state.values) + tau * (
            th * self.sources(t1) + (1 - th) * self.sources(state.t)
        )
        return _assemble_state(prb, scipy.linalg.lu_solve(self.lu, rhs), t1)


def step_linear_2d(problem: Problem2D, state: State2D, scheme: LinearScheme2D | None = None) -> State2D:
    return (scheme or LinearScheme2D(problem)).step(state)


@dataclass(frozen=True)
class NewtonReport:
    iterations: int
    residual: float


class NonlinearScheme2D:
    """Crank-Nicolson with u^m in the fractional term; each step solved by Newton.

    F(U) = (E - tau/2 D_I) U - tau/2 D_F U^m - (E + tau/2 D_I) U^k - tau/2 D_F (U^k)^m
           - tau/2 (f~^{k+1} + f~^k)

    Converged once max|F| <= tol, or <= 8 eps (|A||U| + tau/2 |D_F||U|^m + |c|) when
    that rounding bound of F exceeds tol (large N, where 1e-12 is below roundoff).
    """

    def __init__(
        self,
        problem: Problem2D,
        ops: KronOperators | None = None,
        tol: float = NEWTON_TOL,
        max_iter: int = NEWTON_MAX_ITER,
    ):
        if not tol > 0:
            raise DomainError(f"Newton tolerance must be positive, got {tol}")
        self.problem = problem
        self.ops = ops or assemble_kron(problem)
        self.tol = tol
        self.max_iter = max_iter
        h = problem.tau / 2
        self.lhs_linear = self.ops.E - h * self.ops.D_I
        self.rhs_linear = self.ops.E + h * self.ops.D_I
        self.sources = _Sources(problem, self.ops)
        self.reports: list[NewtonReport] = []
        self._abs_lhs = np.abs(self.lhs_linear)
        self._abs_DF = np.abs(self.ops.D_F)

    def step(self, state: State2D) -> State2D:
        prb, ops = self.problem, self.ops
        m, h = prb.m, prb.tau / 2
        t1 = state.t + prb.tau
        uk = vec(state.values)
        const = self.rhs_linear @ uk + h * (ops.D_F @ uk**m) + h * (self.sources(t1) + self.sources(state.t))
        u = uk.copy()
        for it in range(1, self.max_iter + 1):
            F = self.lhs_linear @ u - h * (ops.D_F @ u**m) - const
            J = self.lhs_linear - h * m * ops.D_F * (u ** (m - 1))[None, :]
            u = u - scipy.linalg.lu_solve(_lu(J), F)
            res = float(np.max(np.abs(self.lhs_linear @ u - h * (ops.D_F @ u**m) - const)))
            # F cannot be evaluated more accurately than its componentwise rounding bound
            floor = ROUNDOFF_SAFETY * EPS * float(
                np.max(self._abs_lhs @ np.abs(u) + h * (self._abs_DF @ np.abs(u) ** m) + np.abs(const))
            )
            if res <= max(self.tol, floor):
                self.reports.append(NewtonReport(it, res))
                return _assemble_state(prb, u, t1)
        raise ConvergenceError(f"Newton did not converge in {self.max_iter} iterations at t={t1}", residual=res)


def newton_step_nonlinear(
    problem: Problem2D,
    state: State2D,
    scheme: NonlinearScheme2D | None = None,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> State2D:
    return (scheme or NonlinearScheme2D(problem, tol=tol, max_iter=max_iter)).step(state)


def make_scheme(problem: Problem2D, ops: KronOperators | None = None, nonlinear: bool | None = None):
    """Linear theta-scheme for m = 1, Newton-based Crank-Nicolson otherwise (or when forced)."""
    if nonlinear is None:
        nonlinear = problem.m > 1
    return NonlinearScheme2D(problem, ops) if nonlinear else LinearScheme2D(problem, ops)


def solve_2d(
    problem: Problem2D,
    snapshot_times: Sequence[float] = (),
    scheme=None,
) -> tuple[State2D, dict[float, State2D]]:
    scheme = scheme or make_scheme(problem)
    n = steps(problem.T, problem.tau)
    wanted = {}
    for s in snapshot_times:
        k = steps(s, problem.tau)
        if k > n:
            raise DomainError(f"snapshot time {s} is past the final time {problem.T}")
        wanted.setdefault(k, float(s))
    X, Y = grid_mesh(problem.grid)
    state = State2D(0.0, np.asarray(problem.initial(X, Y), dtype=float))
    snaps = {}
    for k in range(n + 1):
        if k:
            state = scheme.step(state)
        if k in wanted:
            snaps[wanted[k]] = state
    return state, snaps


def manufactured_problem_2d(
    case: ManufacturedCase,
    grid: CollocationGrid,
    alpha: float,
    tau: float,
    T: float,
    theta: float = 0.5,
    precision: PrecisionMode | None = None,
    quadrature_order: int | None = None,
    **coefficients,
) -> Problem2D:
    """Problem whose exact solution is ``case``, with Dirichlet data taken from it."""
    if case.dimensionality != 2:
        raise DomainError(f"{case.key} is not a 2D case")
    coef = {**case.defaults, **coefficients}
    return Problem2D(
        grid=grid,
        alpha=alpha,
        tau=tau,
        T=T,
        m=case.m,
        theta=theta,
        boundary=lambda x, y, t: case.exact(t, x, y),
        initial=lambda x, y: case.exact(0.0, x, y),
        source=case,
        precision=precision,
        quadrature_order=quadrature_order,
        **coef,
    )


def iteration_matrix_2d(problem: Problem2D, ops: KronOperators | None = None) -> np.ndarray:
    """(E - theta tau M)^-1 (E + (1-theta) tau M) of the linear scheme."""
    ops = ops or assemble_kron(problem)
    th, tau = problem.theta, problem.tau
    lu = _lu(ops.E - th * tau * ops.M_linear)
    return scipy.linalg.lu_solve(lu, ops.E + (1 - th) * tau * ops.M_linear)
