import random
from fractions import Fraction

import mpmath as mp
import pytest

from gl2g2 import curves as C
from gl2g2 import jetexpr as J


def test_family_invariants():
    with pytest.raises(ValueError):
        C.CuspidalSexticFamily((Fraction(0),) * 4, Fraction(1), Fraction(1),
                               Fraction(1))
    with pytest.raises(ValueError):
        C.CuspidalSexticFamily((Fraction(0),) * 4, Fraction(1), Fraction(2),
                               Fraction(0))


def test_parametrize_special_values():
    rng = random.Random(0)
    fam = C.random_family(rng)
    with mp.workdps(50):
        x0, y0 = C.parametrize(fam, 0)
        # lam = 0 lands on the double point (p1, -Q(p1))
        assert abs(x0 - C._to_mp(fam.p1)) < mp.mpf(10) ** -45
        assert abs(y0 + C._to_mp_poly([C._to_mp(c) for c in fam.q], x0)) \
            < mp.mpf(10) ** -40
        # lam -> infinity approaches x = p2
        xb, _ = C.parametrize(fam, 10 ** 8)
        assert abs(xb - C._to_mp(fam.p2)) < 1e-10
    with pytest.raises(ZeroDivisionError):
        C.parametrize(fam, mp.mpc(0, 1))


def test_parametrization_lies_on_curve():
    rng = random.Random(1)
    for _ in range(10):
        fam = C.random_family(rng)
        lam = Fraction(rng.randint(-50, 50), rng.randint(1, 9))
        assert C.implicit_residual(fam, lam) < mp.mpf(10) ** -30


def test_genus_count():
    rep = C.genus_count()
    assert rep.smooth_genus == 10
    assert rep.delta_invariants == (1, 1, 8)
    assert rep.genus == 0


def test_branch_derivative_atoms():
    ctx, ys = C.solution_branch_derivatives(1)
    R, c, ii = ctx.symbols("R", "ii", "c")  # noqa: F841 - order check below
    R = ctx.symbol("R")
    c = ctx.symbol("c")
    ii = ctx.symbol("ii")
    x, p1, p2 = ctx.symbols("x", "p1", "p2")
    q1, q2, q3 = ctx.symbols("q1", "q2", "q3")
    # y' = -Q'(x) + (3/2) i c R (2x - p1 - p2)
    expect = (-(q1 + 2 * q2 * x + 3 * q3 * x ** 2)
              + Fraction(3, 2) * ii * c * R * (2 * x - p1 - p2))
    assert J.is_zero(ys[1] - expect)


def test_ode_residual_identically_zero_and_numeric():
    rep = C.ode_residual_check(points=6, digits=50, seed=3)
    assert rep.identically_zero
    assert rep.max_residual < 1e-30
    assert rep.branches == (1, -1)


def test_ode_residual_special_family():
    # Q = 0, P = x^2 - 1 (p3 = 1, p1 = 1, p2 = -1)
    fam = C.CuspidalSexticFamily((Fraction(0),) * 4, Fraction(1), Fraction(-1),
                                 Fraction(1))
    rep = C.ode_residual_check(fam, points=5, digits=50, seed=4)
    assert rep.max_residual < 1e-30


def test_branch_point_guard():
    ctx, ys = C.solution_branch_derivatives(1)
    residual = ys[7] - (Fraction(21, 5) * ys[6] * ys[5] / ys[4]
                        - Fraction(84, 25) * ys[5] ** 3 / ys[4] ** 2)
    # x -> p1 hits the radical branch point; the construction restrictions
    # reject the point
    with pytest.raises((J.PoleError, J.BranchError)):
        J.evaluate(residual,
                   {"x": Fraction(1), "p1": Fraction(1), "p2": Fraction(2),
                    "c": Fraction(1), "q0": 0, "q1": 0, "q2": 0, "q3": 0},
                   digits=40, branches={"ii": mp.mpc(0, 1)})


def test_coframe_consistency():
    rep = C.coframe_consistency_check(samples=3, digits=50, seed=5)
    assert rep.max_proportionality_residual < 1e-20
    assert rep.q0_pattern_ok
    assert rep.linear_in_variations
