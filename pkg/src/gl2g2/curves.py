"""The two-cusp sextic family and its certification.

The curves (y + Q(x))^2 + P(x)^3 = 0, with Q a general cubic and P a
general quadratic written through its roots, are rational: the printed
parametrization is checked to satisfy the implicit equation, the genus
arithmetic is transcribed (the delta-invariant 8 of the non-ordinary
quadruple point at infinity is taken as given data, not recomputed), and
the family is certified to solve the 7th-order equation of the catalog.

The solution branch y = -Q(x) +- i p3^(3/2) ((x-p1)(x-p2))^(3/2) is
differentiated symbolically with two adjoined square roots (R for the
quadratic under the 3/2 power and a formal imaginary unit); the residual
against the right-hand side is identically zero in the quotient ring, and
is additionally evaluated at random rational points in high precision,
which is the certification the report carries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import jetexpr as J

__all__ = [
    "CuspidalSexticFamily",
    "random_family",
    "parametrize",
    "implicit_residual",
    "genus_count",
    "GenusReport",
    "solution_branch_derivatives",
    "ode_residual_check",
    "OdeResidualReport",
    "coframe_consistency_check",
    "CoframeConsistencyReport",
]


@dataclass(frozen=True)
class CuspidalSexticFamily:
    """Parameters: cubic coefficients q0..q3, quadratic roots p1 != p2 and
    leading coefficient p3 != 0."""

    q: tuple
    p1: object
    p2: object
    p3: object

    def __post_init__(self):
        if len(self.q) != 4:
            raise ValueError("the cubic needs 4 coefficients")
        if self.p1 == self.p2:
            raise ValueError("degenerate family: equal quadratic roots")
        if self.p3 == 0:
            raise ValueError("degenerate family: vanishing leading "
                             "coefficient")

    def Q(self, x):
        q = self.q
        return q[0] + q[1] * x + q[2] * x ** 2 + q[3] * x ** 3

    def P(self, x):
        return self.p3 * (x - self.p2) * (x - self.p1)


def random_family(rng):
    q = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(4))
    while True:
        p1 = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        p2 = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        if p1 != p2:
            break
    p3 = Fraction(rng.randint(1, 9), rng.randint(1, 5))
    return CuspidalSexticFamily(q, p1, p2, p3)


def parametrize(family, lam, digits=50):
    """The printed rational parametrization at a parameter value."""
    with mp.workdps(digits):
        lam = _to_mp(lam)
        denom = lam ** 2 + 1
        if mp.fabs(denom) < mp.mpf(10) ** (-(digits - 10)):
            raise ZeroDivisionError("parametrization pole at lam = +-i")
        p1, p2, p3 = (_to_mp(family.p1), _to_mp(family.p2), _to_mp(family.p3))
        x = (p1 + p2 * lam ** 2) / denom
        y = (p3 ** mp.mpf("1.5") * (p1 - p2) ** 3 * lam ** 3 / denom ** 3
             - _to_mp_poly(family.q, x))
        return x, y


def _to_mp(v):
    if isinstance(v, Fraction):
        return mp.mpf(v.numerator) / mp.mpf(v.denominator)
    return mp.mpc(v)


def _to_mp_poly(q, x):
    return q[0] + q[1] * x + q[2] * x ** 2 + q[3] * x ** 3


def implicit_residual(family, lam, digits=50):
    """|(y+Q)^2 + P^3| at the parametrized point."""
    with mp.workdps(digits):
        x, y = parametrize(family, lam, digits)
        yQ = y + _to_mp_poly([_to_mp(c) for c in family.q], x)
        p1, p2, p3 = (_to_mp(family.p1), _to_mp(family.p2), _to_mp(family.p3))
        P = p3 * (x - p2) * (x - p1)
        return mp.fabs(yQ ** 2 + P ** 3)


@dataclass(frozen=True)
class GenusReport:
    smooth_genus: int
    delta_invariants: tuple
    genus: int


def genus_count():
    """Degree-genus arithmetic for the sextic: two nodes-with-cusp double
    points and the quadruple point at infinity with delta-invariant 8 (the
    latter transcribed, not recomputed)."""
    smooth = (6 - 1) * (6 - 2) // 2
    deltas = (1, 1, 8)
    return GenusReport(smooth, deltas, smooth - sum(deltas))


# ---------------------------------------------------------------------------
# the solution branch and its derivatives
# ---------------------------------------------------------------------------


def solution_branch_derivatives(sign=1):
    """Symbolic derivatives y, y', ..., y^(7) of the branch
    y = -Q(x) + sign * i * c * R^3, with R^2 = (x-p1)(x-p2), c = p3^(3/2)
    formal, and a formal imaginary unit.

    Returns (context, [y, y1, ..., y7])."""
    ctx = J.Context(
        coords=("x",),
        params=("q0", "q1", "q2", "q3", "p1", "p2", "c"),
        radicals=(("R", 2, "(x - p1)*(x - p2)"), ("ii", 2, -1)),
    )
    x = ctx.symbol("x")
    q = [ctx.symbol("q%d" % k) for k in range(4)]
    Q = q[0] + q[1] * x + q[2] * x ** 2 + q[3] * x ** 3
    y = -Q + sign * ctx.symbol("ii") * ctx.symbol("c") * ctx.symbol("R") ** 3
    derivatives = [y]
    for _ in range(7):
        derivatives.append(J.partial(derivatives[-1], "x"))
    return ctx, derivatives


@dataclass(frozen=True)
class OdeResidualReport:
    max_residual: float
    points: int
    branches: tuple
    digits: int
    identically_zero: bool


def ode_residual_check(family=None, points=20, digits=50, seed=0,
                       guard=Fraction(1, 100)):
    """Certify that the branch solves the catalog 7th-order equation.

    The residual y^(7) - F(y^(4), y^(5), y^(6)) is built symbolically (it
    reduces to zero in the quotient ring, which is reported) and evaluated
    at ``points`` random rational x per branch, at ``digits`` working
    digits, skipping points closer than ``guard`` to a branch point.
    Returns the maximal absolute residual over both branch signs.
    """
    rng = random.Random(seed)
    families = [family] if family is not None else []
    if family is None:
        families = [random_family(rng) for _ in range(points)]
    max_res = mp.mpf(0)
    identically = True
    for sgn in (1, -1):
        ctx, ys = solution_branch_derivatives(sgn)
        y4, y5, y6, y7 = ys[4], ys[5], ys[6], ys[7]
        residual = y7 - (Fraction(21, 5) * y6 * y5 / y4
                         - Fraction(84, 25) * y5 ** 3 / y4 ** 2)
        identically = identically and (residual.frac == 0)
        with mp.workdps(digits):
            done = 0
            attempts = 0
            while done < points:
                attempts += 1
                if attempts > 50 * points:
                    raise ArithmeticError("could not find enough admissible "
                                          "sample points")
                fam = families[done % len(families)] if families else \
                    random_family(rng)
                xv = Fraction(rng.randint(-60, 60), rng.randint(1, 11))
                if abs(xv - fam.p1) < guard or abs(xv - fam.p2) < guard:
                    continue
                base = (xv - fam.p1) * (xv - fam.p2)
                if base == 0:
                    continue
                cval = _to_mp(fam.p3) ** mp.mpf("1.5")
                assign = {"x": xv, "p1": fam.p1, "p2": fam.p2, "c": cval,
                          "q0": fam.q[0], "q1": fam.q[1], "q2": fam.q[2],
                          "q3": fam.q[3]}
                branches = {"ii": mp.mpc(0, 1)}
                if base < 0:
                    branches["R"] = mp.sqrt(mp.mpc(base.numerator)
                                            / base.denominator)
                try:
                    val = J.evaluate(residual, assign, digits=digits,
                                     branches=branches)
                except (J.PoleError, ZeroDivisionError):
                    continue
                max_res = max(max_res, mp.fabs(val))
                done += 1
    return OdeResidualReport(
        max_residual=float(max_res),
        points=points,
        branches=(1, -1),
        digits=digits,
        identically_zero=identically,
    )


# ---------------------------------------------------------------------------
# the null-polynomial extraction along the family
# ---------------------------------------------------------------------------


def _variation_polynomial():
    """The degree-6 polynomial part of the normal variation.

    Works over the chart (lam; q, p1, p2, p3-as-c^2/3 ...): the implicit
    equation is differentiated in its seven parameters, evaluated on the
    parametrized curve, divided by -dF/dy, and multiplied by (lam^2+1)^3.
    Returns (context, [coefficients of lam^0 .. lam^6]), each coefficient
    linear in the formal variations dq0..dq3, dp1, dp2, dp3.
    """
    ctx = J.Context(
        coords=("lam",),
        params=("q0", "q1", "q2", "q3", "p1", "p2", "p3",
                "dq0", "dq1", "dq2", "dq3", "dp1", "dp2", "dp3"),
        radicals=(("c", 2, "p3^3"),),  # c = p3^(3/2)
    )
    lam = ctx.symbol("lam")
    p1, p2, p3, c = ctx.symbols("p1", "p2", "p3", "c")
    denom = lam ** 2 + 1
    x = (p1 + p2 * lam ** 2) / denom
    yQ = c * (p1 - p2) ** 3 * lam ** 3 / denom ** 3   # y + Q on the curve
    P = p3 * (x - p2) * (x - p1)
    # partials of (y+Q)^2 + P^3 in the seven parameters, on the curve
    dF = ctx.zero()
    for a in range(4):
        dF = dF + 2 * yQ * x ** a * ctx.symbol("dq%d" % a)
    dF = dF + 3 * P ** 2 * ((x - p2) * (x - p1) * ctx.symbol("dp3")
                            - p3 * (x - p1) * ctx.symbol("dp2")
                            - p3 * (x - p2) * ctx.symbol("dp1"))
    dy = -dF / (2 * yQ)
    poly = dy * denom ** 3
    lam_index = ctx._gen_index["lam"]
    den = poly.frac.denom
    if any(monom[lam_index] for monom, _ in den.terms()):
        raise ArithmeticError("variation did not reduce to a polynomial in "
                              "the curve parameter")
    den_expr = J.JetExpression(ctx, ctx.field.new(den, ctx.ring.one))
    coeffs = []
    for k in range(7):
        target = {}
        for monom, coeff in poly.frac.numer.terms():
            if monom[lam_index] == k:
                m2 = list(monom)
                m2[lam_index] = 0
                target[tuple(m2)] = coeff
        num = ctx.ring.from_dict(target)
        coeffs.append(J.JetExpression(ctx, ctx.field.new(num, ctx.ring.one))
                      / den_expr)
    # no lam-degree above 6
    for monom, _ in poly.frac.numer.terms():
        if monom[lam_index] > 6:
            raise ArithmeticError("variation polynomial exceeds degree 6")
    return ctx, coeffs


@dataclass(frozen=True)
class CoframeConsistencyReport:
    samples: int
    max_proportionality_residual: float
    q0_pattern_ok: bool
    linear_in_variations: bool


def coframe_consistency_check(samples=5, digits=50, seed=0, tolerance=None):
    """The variation polynomial reproduces the catalog coframe.

    At random rational parameter draws, the seven binomial-normalized
    coefficient covectors of the variation polynomial are compared with the
    catalog coframe covectors divided by the conformal factor; they agree
    up to a single common constant per draw (the pairing reverses the index
    order, a relabeling of the two quantic variables).
    """
    from . import extalg as E
    if tolerance is None:
        tolerance = mp.mpf(10) ** (-20)
    ctx, coeffs = _variation_polynomial()
    from math import comb
    cof = E.coframe_catalog("cusp")
    om = cof.conformal_factor
    stripped = [[f.coefficient((jj,)) / om for jj in range(7)]
                for f in cof.forms]
    coords = cof.chart.coords  # p1, p2, p3, q0..q3
    variations = ("dp1", "dp2", "dp3", "dq0", "dq1", "dq2", "dq3")
    rng = random.Random(seed)
    max_resid = mp.mpf(0)
    q0_ok = True
    linear_ok = True
    with mp.workdps(digits):
        for _ in range(samples):
            fam = random_family(rng)
            if fam.p3 <= 0:
                fam = CuspidalSexticFamily(fam.q, fam.p1, fam.p2, -fam.p3)
            base = {"p1": fam.p1, "p2": fam.p2, "p3": fam.p3,
                    "q0": fam.q[0], "q1": fam.q[1], "q2": fam.q[2],
                    "q3": fam.q[3]}
            # curve-side covectors: v^(8-j) corresponds to catalog theta^j
            curve = []
            for k in range(7):
                row = []
                for var in variations:
                    assign = dict(base)
                    for v2 in variations:
                        assign[v2] = Fraction(1 if v2 == var else 0)
                    row.append(J.evaluate(coeffs[k], assign, digits=digits)
                               / comb(6, k))
                curve.append(row)
            cat = []
            for jrow in range(7):
                row = []
                for var in variations:
                    cname = var[1:]
                    col = coords.index(cname)
                    cexpr = stripped[jrow][col]
                    row.append(mp.mpc(0) if cexpr.frac == 0 else
                               J.evaluate(cexpr, base, digits=digits))
                cat.append(row)
            # theta^j matches lam-degree 7-j; one common ratio for all j
            ratio = None
            for jth in range(1, 8):
                crow = curve[7 - jth]
                trow = cat[jth - 1]
                for a, b in zip(crow, trow):
                    if mp.fabs(b) > mp.mpf(10) ** (-15):
                        r = a / b
                        if ratio is None:
                            ratio = r
                        else:
                            max_resid = max(max_resid, mp.fabs(r - ratio))
            # q0-only variation hits the even lam-degrees: theta^(1,3,5,7)
            assign = dict(base)
            for v2 in variations:
                assign[v2] = Fraction(1 if v2 == "dq0" else 0)
            for k in range(7):
                val = J.evaluate(coeffs[k], assign, digits=digits)
                expect_nonzero = (k % 2 == 0)
                if expect_nonzero != bool(mp.fabs(val) > mp.mpf(10) ** -15):
                    q0_ok = False
            # superposition: value at (dq1 + dq2) equals the sum
            a1 = dict(base, **{v: Fraction(0) for v in variations})
            a1["dq1"] = Fraction(1)
            a2 = dict(base, **{v: Fraction(0) for v in variations})
            a2["dq2"] = Fraction(1)
            a12 = dict(base, **{v: Fraction(0) for v in variations})
            a12["dq1"] = Fraction(1)
            a12["dq2"] = Fraction(1)
            for k in range(7):
                lhs = J.evaluate(coeffs[k], a12, digits=digits)
                rhs = (J.evaluate(coeffs[k], a1, digits=digits)
                       + J.evaluate(coeffs[k], a2, digits=digits))
                if mp.fabs(lhs - rhs) > tolerance:
                    linear_ok = False
    return CoframeConsistencyReport(
        samples=samples,
        max_proportionality_residual=float(max_resid),
        q0_pattern_ok=q0_ok,
        linear_in_variations=linear_ok,
    )
