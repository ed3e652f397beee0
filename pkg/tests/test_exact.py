from fractions import Fraction as F

import pytest

from cardcsp.exact import (QE, as_fraction, fraction_str, make_qe, nearest_multiple,
                           nullspace_exact, scalar_sign, solve_linear_exact,
                           sqrt_scalar, sqrt_upper)


def test_rational_radicand_collapses():
    assert sqrt_scalar(F(1, 4)) == F(1, 2)
    assert sqrt_scalar(F(9, 16)) == F(3, 4)
    assert make_qe(F(1, 3), 2, F(1, 4)) == F(1, 3) + 1


def test_irrational_stays_extended():
    s = sqrt_scalar(F(2, 9))
    assert isinstance(s, QE)
    assert s * s == F(2, 9)
    assert float(s) == pytest.approx((2 / 9) ** 0.5)


def test_field_operations():
    r = F(2, 9)
    x = make_qe(F(1, 2), F(3), r)
    y = make_qe(F(-1), F(1, 3), r)
    assert (x + y) - y == x
    assert (x * y) / y == x
    assert x * x.inverse() == 1
    assert x ** 3 == x * x * x
    assert x ** 0 == 1
    assert -(-x) == x
    assert 2 * x == x + x
    assert 1 / sqrt_scalar(F(2)) == sqrt_scalar(F(2)) / 2


def test_mixed_radicands_rejected():
    with pytest.raises(ValueError):
        sqrt_scalar(F(2)) + sqrt_scalar(F(3))


def test_sign_and_ordering():
    s2 = sqrt_scalar(F(2))
    assert scalar_sign(s2 - 1) == 1          # sqrt2 > 1
    assert scalar_sign(s2 - 2) == -1         # sqrt2 < 2
    assert make_qe(3, -2, F(2)) > 0          # 3 > 2 sqrt 2
    assert make_qe(-3, 2, F(2)) < 0
    assert make_qe(-1, 1, F(2)) > 0          # sqrt2 > 1
    assert s2 > F(7, 5) and s2 < F(3, 2)
    assert abs(make_qe(0, -1, F(2))) == s2


def test_as_fraction_guards():
    assert as_fraction(F(3, 7)) == F(3, 7)
    with pytest.raises(ValueError):
        as_fraction(sqrt_scalar(F(2)))


def test_fraction_str():
    assert fraction_str(F(-3, 7)) == "-3/7"
    assert fraction_str(sqrt_scalar(F(2, 9))) == "0 + 1*sqrt(2/9)"


def test_sqrt_upper_bounds():
    for x in (F(2), F(3), F(27), F(5, 7)):
        up = sqrt_upper(x)
        assert up * up >= x
        assert float(up) == pytest.approx(float(x) ** 0.5, rel=1e-12)
    assert sqrt_upper(F(0)) == 0
    assert sqrt_upper(F(4)) == 2


def test_nearest_multiple_ties_away_from_zero():
    g = F(1, 4)
    assert nearest_multiple(F(3, 10), g) == F(1, 4)
    assert nearest_multiple(F(1, 8), g) == F(1, 4)       # tie rounds up
    assert nearest_multiple(F(-1, 8), g) == F(-1, 4)     # tie rounds down
    assert nearest_multiple(F(0), g) == 0
    assert nearest_multiple(F(7, 8), g) == F(1)


def test_solve_linear_exact():
    m = [[F(2), F(1)], [F(1), F(3)]]
    b = [F(5), F(10)]
    x = solve_linear_exact(m, b)
    assert [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]] == b
    with pytest.raises(ValueError):
        solve_linear_exact([[F(1), F(2)], [F(2), F(4)]], [F(1), F(1)])


def test_solve_linear_exact_quadratic_field():
    s = sqrt_scalar(F(2))
    m = [[1 + s, F(1)], [F(1), 2 - s]]
    b = [s, F(3)]
    x = solve_linear_exact(m, b)
    assert m[0][0] * x[0] + m[0][1] * x[1] == b[0]
    assert m[1][0] * x[0] + m[1][1] * x[1] == b[1]


def test_nullspace_exact():
    # x + y + z = 0 over 3 unknowns: two free directions, exact kernel
    basis = nullspace_exact([[F(1), F(1), F(1)]], 3)
    assert len(basis) == 2
    for vec in basis:
        assert sum(vec) == 0
