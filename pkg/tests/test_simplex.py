"""The exact-rational simplex: textbook optima, degeneracy, edge cases."""

from fractions import Fraction as F

import pytest

from nmavc.errors import LPInfeasibleError, LPUnboundedError
from nmavc.simplex import solve_min


def test_basic_maximization_as_minimization():
    # max 3x + 2y s.t. x + y <= 4, x + 3y <= 6  ->  (4, 0), value 12.
    x, value = solve_min(
        c=[F(-3), F(-2)],
        a_ub=[[F(1), F(1)], [F(1), F(3)]],
        b_ub=[F(4), F(6)],
    )
    assert value == -12
    assert x == [F(4), F(0)]


def test_equality_constraint():
    # min x + y s.t. x + 2y = 3  ->  y = 3/2.
    x, value = solve_min(
        c=[F(1), F(1)],
        a_eq=[[F(1), F(2)]],
        b_eq=[F(3)],
    )
    assert value == F(3, 2)
    assert x == [F(0), F(3, 2)]


def test_negative_rhs_inequality():
    # min x s.t. -x <= -2  (i.e. x >= 2).
    x, value = solve_min(c=[F(1)], a_ub=[[F(-1)]], b_ub=[F(-2)])
    assert value == 2 and x == [F(2)]


def test_infeasible():
    with pytest.raises(LPInfeasibleError):
        solve_min(
            c=[F(1)],
            a_ub=[[F(1)], [F(-1)]],
            b_ub=[F(1), F(-2)],  # x <= 1 and x >= 2
        )


def test_unbounded():
    with pytest.raises(LPUnboundedError):
        solve_min(c=[F(-1)], a_ub=[[F(-1)]], b_ub=[F(0)])


def test_beale_cycling_example_terminates():
    # Beale's classic degenerate program; Dantzig's rule cycles on it,
    # Bland's rule must terminate at value -1/20.
    c = [F(-3, 4), F(150), F(-1, 50), F(6)]
    a_ub = [
        [F(1, 4), F(-60), F(-1, 25), F(9)],
        [F(1, 2), F(-90), F(-1, 50), F(3)],
        [F(0), F(0), F(1), F(0)],
    ]
    b_ub = [F(0), F(0), F(1)]
    x, value = solve_min(c, a_ub, b_ub)
    assert value == F(-1, 20)


def test_exact_fractions_survive():
    x, value = solve_min(
        c=[F(1, 3), F(1, 7)],
        a_ub=[[F(-1), F(0)], [F(0), F(-1)]],
        b_ub=[F(-1, 11), F(-1, 13)],
    )
    assert x == [F(1, 11), F(1, 13)]
    assert value == F(1, 33) + F(1, 91)


def test_redundant_equalities():
    # Duplicated equality rows leave a basic artificial at zero; the
    # solver must drive it out or drop the row.
    x, value = solve_min(
        c=[F(1), F(1)],
        a_eq=[[F(1), F(1)], [F(1), F(1)], [F(2), F(2)]],
        b_eq=[F(2), F(2), F(4)],
    )
    assert value == 2
