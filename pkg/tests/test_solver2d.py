import numpy as np
import pytest

from fraccolloc.analysis import error_norms, norm_weights, spectral_radius
from fraccolloc.errors import ConvergenceError, DomainError
from fraccolloc.fracmat import first_order_matrix, rl_left_matrix, rl_right_matrix
from fraccolloc.grids import make_grid
from fraccolloc.solver1d import Problem1D, assemble_operator_1d
from fraccolloc.solver2d import (
    LinearScheme2D,
    NonlinearScheme2D,
    Problem2D,
    State2D,
    assemble_kron,
    boundary_folded_source,
    grid_mesh,
    iteration_matrix_2d,
    make_scheme,
    manufactured_problem_2d,
    newton_step_nonlinear,
    solve_2d,
    step_linear_2d,
    unvec,
    vec,
)
from fraccolloc.source_oracle import get_case


def _spatial_residual(N, t=0.0):
    case = get_case("example3")
    g = make_grid("legendre", N)
    problem = manufactured_problem_2d(case, g, 1.5, 0.1, 1.0)
    ops = assemble_kron(problem)
    X, Y = grid_mesh(g)
    u_t = 2 * t * case.exact(0.0, X, Y)
    r = ops.M_linear @ vec(case.exact(t, X, Y)) + boundary_folded_source(problem, t, ops) - vec(u_t)
    return np.max(np.abs(r))


def test_single_interior_point():
    g = make_grid("legendre", 2)
    problem = Problem2D(grid=g, alpha=1.5, tau=0.1, T=0.1, kappa=0.7, p=0.3, q=0.7)
    ops = assemble_kron(problem)
    L = rl_left_matrix(g, 1.5).entries[1, 1]
    R = rl_right_matrix(g, 1.5).entries[1, 1]
    assert first_order_matrix(g).entries[1, 1] == 0.0
    assert ops.M_linear.shape == (1, 1)
    assert ops.M_linear[0, 0] == pytest.approx(2 * 0.7 * (0.3 * L + 0.7 * R), rel=1e-14)


def test_operator_shapes_and_identity():
    N = 6
    ops = assemble_kron(Problem2D(grid=make_grid("chebyshev", N), alpha=1.3, tau=0.1, T=0.1))
    for M in (ops.M_linear, ops.D_F, ops.D_I, ops.E):
        assert M.shape == ((N - 1) ** 2, (N - 1) ** 2)
    np.testing.assert_array_equal(ops.E, np.eye((N - 1) ** 2))
    np.testing.assert_allclose(ops.D_F + ops.D_I, ops.M_linear, rtol=0, atol=1e-13)


def test_vec_ordering_x_fastest():
    U = np.arange(25.0).reshape(5, 5)  # U[r, s] with r the x index
    v = vec(U)
    assert v[0] == U[1, 1] and v[1] == U[2, 1] and v[3] == U[1, 2]
    np.testing.assert_array_equal(unvec(v, 4), U[1:4, 1:4])


@pytest.mark.parametrize("family", ["legendre", "chebyshev"])
def test_kronecker_consistency(family):
    N = 7
    g = make_grid(family, N)
    kw = dict(grid=g, alpha=1.6, tau=0.1, T=0.1, kappa=1.3, nu=0.4, p=0.8, q=0.2)
    ops = assemble_kron(Problem2D(**kw))
    A = assemble_operator_1d(Problem1D(**kw)).A  # (N-1, N+1)
    x = g.points
    fx = x**7 - 2 * x**3 + 0.5
    fy = np.cos(x) + x**2  # only its samples matter for the tensor identity
    U = np.multiply.outer(fx, fy)
    expected = np.multiply.outer(A @ fx, fy)[:, 1:N] + np.multiply.outer(fx, A @ fy)[1:N, :]
    # M_linear acts on interior unknowns; boundary rows of U enter through the fold
    problem = Problem2D(**kw, boundary=lambda X, Y, t: np.multiply.outer(fx, fy))
    got = ops.M_linear @ vec(U) + boundary_folded_source(problem, 0.0, ops)
    np.testing.assert_allclose(got, expected.ravel(order="F"), rtol=0, atol=1e-9 * np.max(np.abs(expected)))


def test_homogeneous_boundary_fold_is_plain_source():
    g = make_grid("legendre", 6)
    problem = Problem2D(grid=g, alpha=1.5, tau=0.1, T=0.2)
    np.testing.assert_array_equal(boundary_folded_source(problem, 0.1), 0.0)


def test_constant_boundary_fold_is_time_independent():
    g = make_grid("legendre", 6)
    problem = Problem2D(grid=g, alpha=1.5, tau=0.1, T=0.2, boundary=lambda x, y, t: np.ones(np.broadcast(x, y).shape))
    ops = assemble_kron(problem)
    np.testing.assert_array_equal(boundary_folded_source(problem, 0.0, ops), boundary_folded_source(problem, 0.2, ops))


def test_example3_discrete_residual_at_t0_N10():
    assert _spatial_residual(10) <= 1e-8


def test_example3_discrete_residual_decays_spectrally():
    r = [_spatial_residual(N) for N in (8, 12, 16, 20)]
    assert all(b < a / 10 for a, b in zip(r, r[1:]))
    assert r[-1] <= 1e-10


def test_example3_linear_solve():
    case = get_case("example3")
    g = make_grid("legendre", 12)
    state, _ = solve_2d(manufactured_problem_2d(case, g, 1.5, 0.1, 1.0))
    X, Y = grid_mesh(g)
    linf, _ = error_norms(state.values, case.exact(1.0, X, Y), norm_weights(g))
    assert linf <= 1e-5


def test_zero_problem_stays_zero_and_small_tau_step_is_identity():
    g = make_grid("chebyshev", 8)
    state, _ = solve_2d(Problem2D(grid=g, alpha=1.4, tau=0.25, T=1.0))
    np.testing.assert_array_equal(state.values, 0.0)
    case = get_case("example3")
    problem = manufactured_problem_2d(case, g, 1.4, 1e-12, 1e-12)
    X, Y = grid_mesh(g)
    U0 = State2D(0.0, case.exact(0.0, X, Y))
    U1 = step_linear_2d(problem, U0)
    assert np.max(np.abs(U1.values - U0.values)) <= 1e-9


def test_m1_nonlinear_path_matches_linear():
    case = get_case("example3")
    g = make_grid("legendre", 8)
    problem = manufactured_problem_2d(case, g, 1.5, 0.1, 0.5)
    lin, _ = solve_2d(problem, scheme=LinearScheme2D(problem))
    newton = NonlinearScheme2D(problem)
    non, _ = solve_2d(problem, scheme=newton)
    assert np.max(np.abs(lin.values - non.values)) <= 1e-11
    assert {r.iterations for r in newton.reports} == {1}
    assert isinstance(make_scheme(problem), LinearScheme2D)


def test_example5_newton_and_table_value():
    case = get_case("example5")
    g = make_grid("legendre", 10)
    problem = manufactured_problem_2d(case, g, 1.5, 0.1, 1.0)
    scheme = make_scheme(problem)
    assert isinstance(scheme, NonlinearScheme2D)
    state, _ = solve_2d(problem, scheme=scheme)
    assert len(scheme.reports) == 10
    assert max(r.iterations for r in scheme.reports) <= 6
    assert max(r.residual for r in scheme.reports) <= 1e-12
    X, Y = grid_mesh(g)
    linf, l2 = error_norms(state.values, case.exact(1.0, X, Y), norm_weights(g))
    assert linf == pytest.approx(1.322e-4, rel=0.05)
    assert l2 == pytest.approx(1.338e-4, rel=0.05)


@pytest.mark.parametrize("key", ["example3", "example5"])
def test_axis_symmetry(key):
    case = get_case(key)
    g = make_grid("chebyshev", 9)
    problem = manufactured_problem_2d(case, g, 1.7, 0.1, 0.5)
    _, snaps = solve_2d(problem, [0.1, 0.2, 0.3, 0.4, 0.5])
    for s in snaps.values():
        assert np.max(np.abs(s.values - s.values.T)) <= 1e-10


def test_newton_failure_reported():
    case = get_case("example5")
    problem = manufactured_problem_2d(case, make_grid("legendre", 6), 1.5, 0.1, 0.1)
    X, Y = grid_mesh(problem.grid)
    with pytest.raises(ConvergenceError) as info:
        newton_step_nonlinear(problem, State2D(0.0, case.exact(0.0, X, Y)), max_iter=1, tol=1e-300)
    assert info.value.residual is not None
    with pytest.raises(DomainError):
        NonlinearScheme2D(problem, tol=0.0)


def test_iteration_matrix_2d_is_stable():
    problem = manufactured_problem_2d(get_case("example3"), make_grid("legendre", 10), 1.5, 0.1, 1.0)
    assert spectral_radius(iteration_matrix_2d(problem)) <= 1 + 1e-10


@pytest.mark.parametrize(
    "kw",
    [
        {"alpha": 2.5},
        {"m": 0},
        {"m": 2, "theta": 1.0},
        {"p": 0.9, "q": 0.9},
        {"tau": 0.3},
        {"source": get_case("example1")},
        {"source": get_case("example5")},
    ],
)
def test_problem_validation(kw):
    base = dict(grid=make_grid("legendre", 6), alpha=1.5, tau=0.1, T=1.0)
    with pytest.raises(DomainError):
        Problem2D(**{**base, **kw})
