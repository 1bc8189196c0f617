import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gauss_w6_inner, manufactured_spec, psi_pieces
from rkhsbvp.bench import builtin_example
from rkhsbvp.expr import parse_expression
from rkhsbvp.problem import BVPSpec, homogenize
from rkhsbvp.solver import (
    GramMatrixError,
    NodeSet,
    build_basis,
    collocation_residual,
    evaluate_solution,
    gram_matrix,
    gram_schmidt,
    parseval_partial_norms,
    psi_eval,
    solve_collocation,
    solve_linear,
    solve_nonlinear,
)

GRID = np.linspace(0.0, 1.0, 11)


@pytest.fixture(scope="module")
def sol41(K, h41):
    return solve_linear(h41, 36, K)


def zero_data_spec():
    return BVPSpec((0.0, 1.0), parse_expression("0"), (0, 0, 0, 0, 0))


def test_node_set_validation():
    assert NodeSet.uniform(1).points.tolist() == [0.5]
    assert len(NodeSet.uniform(36)) == 36
    for bad in ([0.2, 0.2], [0.5, 0.1], [-0.1, 0.5], [np.nan]):
        with pytest.raises(ValueError):
            NodeSet(bad)


def test_psi_vanishes_at_left_end(K):
    assert abs(psi_eval(K, np.zeros(5), 0.4, 0.0, 0)) <= 1e-15
    assert abs(psi_eval(K, np.zeros(5), 0.4, 1.0, 1)) <= 1e-14


def test_psi_order_rejected(K):
    with pytest.raises(ValueError):
        psi_eval(K, np.zeros(5), 0.4, 0.3, 6)


def test_psi_matches_eta_finite_difference(K):
    x, node = 0.3, 0.7

    def d5(step):
        f = [K(x, node + j * step) for j in (-3, -2, -1, 1, 2, 3)]
        return (-f[0] + 4 * f[1] - 5 * f[2] + 5 * f[3] - 4 * f[4] + f[5]) / (2 * step**5)

    step = 1e-2
    richardson = (4 * d5(step / 2) - d5(step)) / 3
    assert psi_eval(K, np.zeros(5), node, x) == pytest.approx(richardson, rel=1e-4)


def test_psi_includes_operator_terms(K):
    f = np.array([-1.0, 0, 0, 0, 0])
    expected = K(0.3, 0.6, 0, 5) - K(0.3, 0.6, 0, 0)
    assert psi_eval(K, f, 0.6, 0.3) == pytest.approx(expected, rel=1e-12)


def test_gram_single_node_positive(K):
    G = gram_matrix(K, [0.37], np.array([[0, 0, 0, 0, 0, 1.0]]))
    assert G.shape == (1, 1) and G[0, 0] > 0


def test_gram_symmetric_before_averaging(K, h41):
    nodes = NodeSet.uniform(8)
    G = gram_matrix(K, nodes, h41.coefficients(nodes.points), symmetrize=False)
    assert np.abs(G - G.T).max() <= 1e-9


def test_gram_matches_quadrature_oracle(K, h41):
    nodes = np.array([0.1, 0.35, 0.6, 0.9])
    op = h41.coefficients(nodes)
    G = gram_matrix(K, nodes, op)
    psis = [psi_pieces(K.region_coeffs, op[i], nodes[i]) for i in range(4)]
    Q = np.array([[gauss_w6_inner(psis[i], psis[j]) for j in range(4)] for i in range(4)])
    np.testing.assert_allclose(G, Q, rtol=1e-6)


def test_gram_rejects_nonfinite(K):
    op = np.array([[0, 0, 0, 0, 0, 1.0], [np.inf, 0, 0, 0, 0, 1.0]])
    with pytest.raises(FloatingPointError, match="index 1"):
        gram_matrix(K, [0.2, 0.4], op)


def test_gram_schmidt_examples():
    np.testing.assert_array_equal(gram_schmidt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(gram_schmidt(np.array([[4.0]])), [[0.5]])


def test_gram_schmidt_random_spd():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(6, 6))
    G = A @ A.T + 6 * np.eye(6)
    B = gram_schmidt(G)
    assert np.allclose(np.triu(B, 1), 0)
    assert np.all(np.diag(B) > 0)
    np.testing.assert_allclose(B @ G @ B.T, np.eye(6), atol=1e-12)


def test_gram_schmidt_reports_pivot():
    with pytest.raises(GramMatrixError) as info:
        gram_schmidt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.pivot == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31))
def test_gram_schmidt_property(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    G = A @ A.T + n * np.eye(n)
    B = gram_schmidt(G)
    np.testing.assert_allclose(B @ G @ B.T, np.eye(n), atol=1e-10)


def test_solve_linear_example_41(sol41):
    assert abs(evaluate_solution(sol41, 0.5) - 0.412180317) <= 1e-5


def test_solve_linear_manufactured(K):
    # known red: the projection converges like h^2, giving about 1.46e-6 here
    h = homogenize(manufactured_spec())
    s = solve_linear(h, 20, K)
    xs = np.linspace(0, 1, 101)
    assert np.abs(s(xs) - xs**3 * (1 - xs) ** 2).max() <= 1e-6


def test_zero_data_gives_zero(K):
    h = homogenize(zero_data_spec())
    for solve in (solve_linear, solve_collocation):
        assert np.all(solve(h, 10, K)(GRID) == 0.0)
    assert np.all(parseval_partial_norms(h, 10, K) == 0.0)


def test_solve_linear_rejects_nonlinear(K):
    with pytest.raises(ValueError):
        solve_linear(homogenize(builtin_example("4.2")), 10, K)


def test_collocation_agrees_with_series(K, h41, sol41):
    c = solve_collocation(h41, 36, K)
    assert np.abs(c(GRID) - sol41(GRID)).max() <= 1e-8


def test_collocation_single_node(K):
    h = homogenize(manufactured_spec())
    s = solve_collocation(h, [0.5], K)
    assert abs(collocation_residual(s)[0]) <= 1e-9


def test_residual_at_nodes(sol41):
    assert np.abs(collocation_residual(sol41)).max() <= 1e-7


def test_nonlinear_example_42(K):
    s = solve_nonlinear(homogenize(builtin_example("4.2")), 36, 1e-10, 25, K)
    assert s.converged and s.n_iter <= 10
    assert abs(evaluate_solution(s, 0.6) - np.exp(0.6)) <= 1e-5


def test_nonlinear_example_43(K):
    # known red: converged iterate is discretisation limited at about 1.6e-6
    s = solve_nonlinear(homogenize(builtin_example("4.3")), 36, 1e-10, 25, K)
    assert s.converged
    assert abs(evaluate_solution(s, 0.5) - np.log(1.5)) <= 1e-6


def test_nonlinear_on_linear_problem(K, h41, sol41):
    s = solve_nonlinear(h41, 36, 1e-10, 25, K)
    assert s.n_iter == 1 and s.converged
    assert np.abs(s(GRID) - sol41(GRID)).max() <= 1e-12


def test_nonlinear_flags_nonconvergence(K):
    s = solve_nonlinear(homogenize(builtin_example("4.2")), 12, 1e-30, 1, K)
    assert not s.converged and s.n_iter == 1


def test_nonlinear_domain_error_propagates(K):
    from rkhsbvp.expr import ExpressionDomainError

    spec = BVPSpec((0.0, 1.0), parse_expression("ln(u - 5)"), (0, 0, 0, 0, 0))
    with pytest.raises(ExpressionDomainError):
        solve_nonlinear(homogenize(spec), 8, K=K)


def test_evaluate_solution_boundaries(sol41):
    assert abs(evaluate_solution(sol41, 1.0)) <= 1e-9
    assert abs(evaluate_solution(sol41, 0.0) - 0.0) <= 1e-7
    assert evaluate_solution(sol41, 0.0, 1) == pytest.approx(1.0, abs=1e-7)


def test_evaluate_solution_derivative_fd(sol41):
    step = 1e-5
    fd = (evaluate_solution(sol41, 0.4 + step) - evaluate_solution(sol41, 0.4 - step)) / (2 * step)
    assert evaluate_solution(sol41, 0.4, 1) == pytest.approx(fd, rel=1e-6)


def test_evaluate_solution_general_interval(K):
    spec = BVPSpec((1.0, 3.0), parse_expression("0"), (2, 0, 0, 2, 0), exact=parse_expression("2"))
    s = solve_linear(homogenize(spec), 8, K)
    np.testing.assert_allclose(s(np.array([1.0, 2.0, 3.0])), 2.0, atol=1e-12)
    with pytest.raises(ValueError):
        s(0.5)


def test_parseval_monotone(K, h41):
    S = parseval_partial_norms(h41, 36, K)
    assert S.size == 36
    assert np.all(np.diff(S) >= -1e-12)


def test_parseval_bounded_by_exact_norm(K):
    # |u|^2 for x^3 (1-x)^2: 3!^2 + (-48)^2 + 120^2 with a zero 6th derivative
    S = parseval_partial_norms(homogenize(manufactured_spec()), 20, K)
    assert S[-1] <= 16740 * (1 + 1e-9)
    assert S[-1] == pytest.approx(16740, rel=1e-3)


def test_orthonormality_defect(K, h41):
    basis = build_basis(K, 36, h41.coefficients(NodeSet.uniform(36).points))
    assert basis.orthonormality_defect() <= 1e-8
