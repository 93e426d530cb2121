"""Collocation in space and the theta-scheme in time for the 1D equation

    u_t = kappa (p D_left^alpha + q D_right^alpha) u - nu u_x + f   on (a, b),

with Robin-type closures alpha_1 u(a) - beta_1 u_x(a) = g_1 and
alpha_2 u(b) + beta_2 u_x(b) = g_2.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularSystemError
from .fracmat import DiffMatrix, first_order_matrix, rl_left_matrix, rl_right_matrix
from .grids import CollocationGrid
from .lagrange import Anchor, expand_lagrange
from .numerics import PrecisionMode
from .source_oracle import ManufacturedCase, SourceField, SourceParams

# relative pivot size below which a factorization is reported as singular
SINGULAR_RCOND = 1e-14
PQ_SUM_TOL = 1e-12


@dataclass(frozen=True)
class RobinCondition:
    """coef_u * u + sign * coef_du * u_x = g(t) at one end (sign is -1 at a, +1 at b)."""

    coef_u: float
    coef_du: float
    g: Callable[[float], float] = field(default=lambda t: 0.0)

    def __post_init__(self):
        if self.coef_u < 0 or self.coef_du < 0:
            raise DomainError("boundary coefficients must be nonnegative")
        if self.coef_u == 0 and self.coef_du == 0:
            raise DomainError("boundary coefficients must not both vanish")

    @property
    def is_dirichlet(self) -> bool:
        return self.coef_du == 0

    @classmethod
    def dirichlet(cls, g: Callable[[float], float] | float = 0.0) -> RobinCondition:
        return cls(1.0, 0.0, g if callable(g) else (lambda t, v=float(g): v))


@dataclass(frozen=True)
class Problem1D:
    grid: CollocationGrid
    alpha: float
    tau: float
    T: float
    kappa: float = 1.0
    nu: float = 1.0
    p: float = 0.5
    q: float = 0.5
    theta: float = 0.5
    left: RobinCondition = field(default_factory=RobinCondition.dirichlet)
    right: RobinCondition = field(default_factory=RobinCondition.dirichlet)
    initial: Callable[[np.ndarray], np.ndarray] = field(default=lambda x: np.zeros_like(x))
    source: ManufacturedCase | None = None
    levy_feller: bool = False
    precision: PrecisionMode | None = None
    quadrature_order: int | None = None

    def __post_init__(self):
        if not 1 < self.alpha < 2:
            raise DomainError(f"alpha must lie in (1, 2), got {self.alpha}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be nonnegative, got {self.kappa}")
        if self.nu < 0:
            raise DomainError(f"nu must be nonnegative, got {self.nu}")
        if self.p < 0 or self.q < 0:
            raise DomainError(f"p and q must be nonnegative, got p={self.p}, q={self.q}")
        if not self.levy_feller and abs(self.p + self.q - 1) > PQ_SUM_TOL:
            raise DomainError(f"p + q must equal 1 outside Levy-Feller mode, got {self.p + self.q}")
        if not 0 <= self.theta <= 1:
            raise DomainError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if self.T < 0:
            raise DomainError(f"final time must be nonnegative, got {self.T}")
        steps(self.T, self.tau)
        if self.source is not None and self.source.dimensionality != 1:
            raise DomainError(f"source case {self.source.key} is not one-dimensional")

    @property
    def is_dirichlet(self) -> bool:
        return self.left.is_dirichlet and self.right.is_dirichlet


@dataclass(frozen=True)
class SolutionState:
    t: float
    values: np.ndarray


def steps(T: float, tau: float) -> int:
    """Number of steps; T/tau must be an integer to 1e-9."""
    ratio = T / tau
    n = round(ratio)
    if abs(ratio - n) > 1e-9:
        raise DomainError(f"T/tau = {ratio} is not an integer")
    return int(n)


@dataclass(frozen=True, eq=False)
class Operators1D:
    """Matrices of one problem. ``A`` is the interior block of rows 1..N-1, all columns."""

    left: DiffMatrix
    right: DiffMatrix
    first: DiffMatrix
    A: np.ndarray

    @property
    def A_int(self) -> np.ndarray:
        return self.A[:, 1:-1]


def assemble_operator_1d(problem: Problem1D) -> Operators1D:
    grid = problem.grid
    precision = problem.precision or PrecisionMode.for_degree(grid.N)
    L = rl_left_matrix(grid, problem.alpha, expand_lagrange(grid, Anchor.LEFT, precision))
    R = rl_right_matrix(grid, problem.alpha, expand_lagrange(grid, Anchor.RIGHT, precision))
    D = first_order_matrix(grid)
    inner = slice(1, grid.N)
    A = (
        problem.kappa * (problem.p * L.entries[inner] + problem.q * R.entries[inner])
        - problem.nu * D.entries[inner]
    )
    A.setflags(write=False)
    return Operators1D(L, R, D, A)


def boundary_rows(problem: Problem1D, D: np.ndarray) -> np.ndarray:
    """The two rows of the discrete boundary equations, shape (2, N+1)."""
    N = problem.grid.N
    rows = np.zeros((2, N + 1))
    rows[0, 0] = problem.left.coef_u
    rows[0] -= problem.left.coef_du * D[0]
    rows[1, N] = problem.right.coef_u
    rows[1] += problem.right.coef_du * D[N]
    return rows


def boundary_residual(problem: Problem1D, ops: Operators1D, state: SolutionState) -> np.ndarray:
    rows = boundary_rows(problem, ops.first.entries)
    rhs = np.array([problem.left.g(state.t), problem.right.g(state.t)])
    return rows @ state.values - rhs


def _lu(matrix: np.ndarray):
    lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.min() <= SINGULAR_RCOND * max(d.max(), 1.0):
        raise SingularSystemError("time-stepping matrix is singular", np.linalg.cond(matrix))
    return lu, piv


class ThetaScheme1D:
    """Full (N+1) system: PDE rows at interior nodes, boundary equations at 0 and N.

    The left-hand matrix is time independent, so it is factorized once.
    """

    def __init__(self, problem: Problem1D, ops: Operators1D | None = None):
        self.problem = problem
        self.ops = ops or assemble_operator_1d(problem)
        grid = problem.grid
        N = grid.N
        th, tau = problem.theta, problem.tau
        A = self.ops.A
        eye = np.eye(N + 1)[1:N]
        lhs = np.empty((N + 1, N + 1))
        lhs[1:N] = eye - th * tau * A
        lhs[[0, N]] = boundary_rows(problem, self.ops.first.entries)
        self.rhs_matrix = eye + (1 - th) * tau * A
        self.lu = _lu(lhs)
        self._source = None
        if problem.source is not None:
            params = SourceParams(problem.alpha, problem.kappa, problem.nu, problem.p, problem.q)
            self._source = SourceField(problem.source, params, grid, problem.quadrature_order)

    def source(self, t: float) -> np.ndarray:
        if self._source is None:
            return np.zeros(self.problem.grid.N - 1)
        return self._source(t)

    def step(self, state: SolutionState) -> SolutionState:
        prb = self.problem
        N, th, tau = prb.grid.N, prb.theta, prb.tau
        t_next = state.t + tau
        rhs = np.empty(N + 1)
        rhs[1:N] = self.rhs_matrix @ state.values + tau * (
            th * self.source(t_next) + (1 - th) * self.source(state.t)
        )
        rhs[0] = prb.left.g(t_next)
        rhs[N] = prb.right.g(t_next)
        return SolutionState(t_next, scipy.linalg.lu_solve(self.lu, rhs))


def step_theta(problem: Problem1D, state: SolutionState, scheme: ThetaScheme1D | None = None) -> SolutionState:
    return (scheme or ThetaScheme1D(problem)).step(state)


def solve_boundary_2x2(problem: Problem1D, D: np.ndarray, interior: np.ndarray, t: float) -> tuple[float, float]:
    """Boundary values from interior values by the eliminated 2x2 system.

    Equivalent to the boundary rows of the full system; kept for cross-checking.
    """
    N = problem.grid.N
    rows = boundary_rows(problem, D)
    M = rows[:, [0, N]]
    rhs = np.array([problem.left.g(t), problem.right.g(t)]) - rows[:, 1:N] @ interior
    u0, uN = np.linalg.solve(M, rhs)
    return float(u0), float(uN)


def solve_1d(
    problem: Problem1D,
    snapshot_times: Sequence[float] = (),
    scheme: ThetaScheme1D | None = None,
) -> tuple[SolutionState, dict[float, SolutionState]]:
    """March from U^0 = h(x_j) to T; also return states at the requested times."""
    scheme = scheme or ThetaScheme1D(problem)
    n = steps(problem.T, problem.tau)
    wanted = {}
    for s in snapshot_times:
        k = steps(s, problem.tau)
        if k > n:
            raise DomainError(f"snapshot time {s} is past the final time {problem.T}")
        wanted.setdefault(k, float(s))
    state = SolutionState(0.0, np.asarray(problem.initial(problem.grid.points), dtype=float))
    snaps = {}
    for k in range(n + 1):
        if k:
            state = scheme.step(state)
        if k in wanted:
            snaps[wanted[k]] = state
    return state, snaps


def levy_feller_pq(alpha: float, vartheta: float) -> tuple[float, float]:
    if not 1 < alpha < 2:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    if abs(vartheta) >= 2 - alpha:
        raise DomainError(f"|vartheta| must be below 2 - alpha = {2 - alpha}, got {vartheta}")
    s = math.sin(alpha * math.pi)
    p = -math.sin((alpha - vartheta) * math.pi / 2) / s
    q = -math.sin((alpha + vartheta) * math.pi / 2) / s
    return p, q


def levy_feller_problem(
    alpha: float,
    vartheta: float,
    N: int,
    tau: float = 0.1,
    T: float = 1.0,
    grid: CollocationGrid | None = None,
    nu: float = 1.0,
    precision: PrecisionMode | None = None,
) -> Problem1D:
    """Source-free Levy-Feller problem with u(x, 0) = sin(pi (x+1)/2) and zero Dirichlet data."""
    from .grids import legendre_lobatto

    p, q = levy_feller_pq(alpha, vartheta)
    grid = grid or legendre_lobatto(N)
    a, b = grid.interval
    return Problem1D(
        grid=grid,
        alpha=alpha,
        tau=tau,
        T=T,
        kappa=1.0,
        nu=nu,
        p=p,
        q=q,
        initial=lambda x: np.sin(np.pi * (x - a) / (b - a)),
        levy_feller=True,
        precision=precision,
    )


def manufactured_problem_1d(
    case: ManufacturedCase,
    grid: CollocationGrid,
    alpha: float,
    tau: float,
    T: float,
    theta: float = 0.5,
    precision: PrecisionMode | None = None,
    quadrature_order: int | None = None,
    **coefficients,
) -> Problem1D:
    """Problem whose exact solution is ``case``; boundary data are taken from it."""
    if case.dimensionality != 1:
        raise DomainError(f"{case.key} is not a 1D case")
    coef = {**case.defaults, **coefficients}
    a, b = grid.interval
    if case.boundary == "robin":
        left = RobinCondition(1.0, 1.0, lambda t: case.exact(t, a) - case.exact_dx(0, t, a))
        right = RobinCondition(1.0, 1.0, lambda t: case.exact(t, b) + case.exact_dx(0, t, b))
    else:
        left = RobinCondition.dirichlet(lambda t: float(case.exact(t, a)))
        right = RobinCondition.dirichlet(lambda t: float(case.exact(t, b)))
    return Problem1D(
        grid=grid,
        alpha=alpha,
        tau=tau,
        T=T,
        theta=theta,
        left=left,
        right=right,
        initial=lambda x: case.exact(0.0, x),
        source=case,
        precision=precision,
        quadrature_order=quadrature_order,
        **coef,
    )


def iteration_matrix_1d(problem: Problem1D, ops: Operators1D | None = None) -> np.ndarray:
    """G = (I - theta tau A_int)^-1 (I + (1-theta) tau A_int) for homogeneous Dirichlet data."""
    if not problem.is_dirichlet:
        raise DomainError("iteration matrix is defined for Dirichlet boundaries")
    ops = ops or assemble_operator_1d(problem)
    A = ops.A_int
    eye = np.eye(A.shape[0])
    th, tau = problem.theta, problem.tau
    lhs = eye - th * tau * A
    lu = _lu(lhs)
    return scipy.linalg.lu_solve(lu, eye + (1 - th) * tau * A)
