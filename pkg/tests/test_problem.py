import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rkhsbvp.bench import builtin_example
from rkhsbvp.expr import parse_expression
from rkhsbvp.problem import (
    BVPSpec,
    ProblemFileError,
    homogenize,
    load_problem,
    map_point_back,
    parse_problem,
    shift_polynomial,
)

E = math.e


def hermite_oracle(bc, a, b):
    """Quartic coefficients from the raw 5x5 system in monomials of x."""
    rows = []
    for x, k in ((a, 0), (a, 1), (a, 2), (b, 0), (b, 1)):
        rows.append([math.perm(i, k) * x ** (i - k) if i >= k else 0.0 for i in range(5)])
    return np.linalg.solve(np.array(rows), np.asarray(bc, dtype=float))


def five_conditions(p, a, b):
    return np.array([p(a), p(a, 1), p(a, 2), p(b), p(b, 1)])


def test_zero_shift():
    p = shift_polynomial((0, 0, 0, 0, 0), 0, 1)
    assert np.all(p.coeffs == 0)


def test_shift_example_41():
    bc = (0, 1, 0, 0, -E)
    p = shift_polynomial(bc, 0.0, 1.0)
    np.testing.assert_allclose(p.coeffs, hermite_oracle(bc, 0, 1), atol=1e-13)
    np.testing.assert_allclose(p.coeffs, [0, 1, 0, E - 3, 2 - E], atol=1e-13)
    assert abs(p(1.0)) <= 1e-12
    assert p(1.0, 1) == pytest.approx(-E, abs=1e-12)


def test_shift_example_42():
    bc = (1, 1, 1, E, E)
    p = shift_polynomial(bc, 0.0, 1.0)
    np.testing.assert_allclose(p.coeffs, hermite_oracle(bc, 0, 1), atol=1e-13)
    np.testing.assert_allclose(five_conditions(p, 0.0, 1.0), bc, atol=1e-12)
    assert p(0.0) == 1.0 and p(0.0, 2) == pytest.approx(1.0)


def test_shift_requires_ordered_interval():
    with pytest.raises(ValueError):
        shift_polynomial((0, 0, 0, 0, 0), 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=5, max_size=5),
    st.floats(-3, 3),
    st.floats(0.1, 4),
)
def test_shift_conditions_property(bc, a, width):
    b = a + width
    p = shift_polynomial(bc, a, b)
    scale = 1 + max(abs(v) for v in bc)
    np.testing.assert_allclose(five_conditions(p, a, b), bc, atol=1e-10 * scale * (1 + abs(a)) ** 4)


def test_homogenize_identity():
    spec = BVPSpec((0.0, 1.0), parse_expression("x"), (0, 0, 0, 0, 0))
    h = homogenize(spec)
    assert np.all(h.shift.coeffs == 0) and h.h == 1.0
    assert h.rhs(0.4, 0.0)[0] == pytest.approx(0.4)


def test_homogenized_exact_41_satisfies_zero_bcs():
    h = homogenize(builtin_example("4.1"))
    spec = h.spec
    # exact u = x(1-x)e^x - p; its derivatives from the product rule
    c = np.polynomial.polynomial.polysub([0, 1, -1], [0])
    def y(x, k):
        # d^k [q(x) e^x] = e^x sum_j C(k,j) q^(j)(x)
        return math.exp(x) * sum(
            math.comb(k, j) * np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(c, j))
            for j in range(k + 1)
        )
    for x, k in ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1)):
        assert abs(y(x, k) - h.shift(x, k)) <= 1e-12
    np.testing.assert_allclose(h.exact_u([0.0, 1.0]), 0.0, atol=1e-12)
    assert spec.linear_coeffs[0] == parse_expression("-1")


def test_homogenized_rhs_43_at_origin():
    h = homogenize(builtin_example("4.3"))
    assert h.shift(0.0) == 0.0
    assert h.rhs(0.0, 0.0)[0] == pytest.approx(24.0, abs=1e-12)


def test_homogenize_general_interval():
    spec = parse_problem("interval = 1 3\nrhs = 0\nbc = 1 0 0 1 0\nexact = 1\n")
    h = homogenize(spec)
    assert h.h == 2.0
    np.testing.assert_allclose(h.shift([1.0, 2.0, 3.0]), 1.0, atol=1e-12)
    assert h.rhs(0.5, 0.0)[0] == 0.0


def test_coefficients_scaling():
    spec = parse_problem("interval = 0 2\nf4 = 1\nf0 = x\nrhs = 0\nbc = 0 0 0 0 0\n")
    op = homogenize(spec).coefficients([0.5])
    assert op.shape == (1, 6)
    assert op[0, 5] == 1.0
    assert op[0, 4] == pytest.approx(2.0)
    assert op[0, 0] == pytest.approx(32.0)


def test_map_point_back():
    h = homogenize(builtin_example("4.1"))
    assert map_point_back(h, 0.3) == 0.3
    h2 = homogenize(parse_problem("interval = 1 3\nrhs = 0\nbc = 0 0 0 0 0\n"))
    assert map_point_back(h2, 0.5) == 2.0
    for t in np.linspace(0, 1, 7):
        assert abs(h2.to_unit(map_point_back(h2, t)) - t) <= 1e-15
    with pytest.raises(ValueError):
        map_point_back(h2, 1.5)


FILE_41 = """\
# linear fifth-order test problem
name = example 4.1
interval = 0 1
f0 = -1
rhs = -15*exp(x) - 10*x*exp(x)
bc = 0, 1, 0, 0, -exp(1)
exact = x*(1 - x)*exp(x)
"""


def test_load_problem_file(tmp_path):
    path = tmp_path / "p41.bvp"
    path.write_text(FILE_41)
    spec = load_problem(path)
    assert spec.bc == pytest.approx((0, 1, 0, 0, -E))
    assert spec.name == "example 4.1"
    from rkhsbvp.expr import eval_expression

    assert eval_expression(spec.exact, 0.5) == pytest.approx(0.412180317, abs=1e-9)


def test_y_alias_in_rhs():
    spec = parse_problem("interval = 0 1\nrhs = exp(-x)*y^2\nbc = 1 1 1 exp(1) 0\n")
    assert not spec.is_linear


@pytest.mark.parametrize(
    "text, key",
    [
        ("rhs = 0\nbc = 0 0 0 0\n", "bc"),
        ("rhs = 0\nbc = 0 0 0 0 0\ncolour = red\n", "colour"),
        ("rhs = 0\nrhs = 1\nbc = 0 0 0 0 0\n", "rhs"),
        ("interval = 0 1\nbc = 0 0 0 0 0\n", "rhs"),
        ("rhs = 0\nbc = 0 0 0 0 0\nf2 = u\n", "f2"),
        ("rhs = 0\nbc = 0 0 0 0 0\ninterval = 1 0\n", "interval"),
        ("rhs = 0\nbc = 0 x 0 0 0\n", "bc"),
        ("rhs = 1 +\nbc = 0 0 0 0 0\n", "rhs"),
        ("interval = 0 1\nrhs 0\nbc = 0 0 0 0 0\n", ":2:"),
    ],
)
def test_problem_file_errors(text, key):
    if "interval" not in text:
        text = "interval = 0 1\n" + text
    with pytest.raises(ProblemFileError, match=key):
        parse_problem(text)


def test_interval_is_required():
    with pytest.raises(ProblemFileError, match="interval"):
        parse_problem("rhs = 0\nbc = 0 0 0 0 0\n")


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_problem(tmp_path / "nope.bvp")
