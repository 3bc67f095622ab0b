"""Contact invariants of 7th-order ODEs and the torsion-type classifier.

The five vanishing conditions deciding whether y^(7) = F carries the
GL(2,R) structure on its solution space are assembled verbatim, with
exact integer coefficients (the largest is 65883440), from the partial
derivatives F_k = dF/dy^(k) and the total derivative D.  The general
order-n first condition is built from the same six-term shape and, at
n = 6, equals 1/245 of the 7th-order one; that identity is checked as a
polynomial identity over a formal right-hand side whose derivatives are
opaque symbols.

Once all five conditions vanish, the Fernandez-Gray type of the induced
conformal split-G2 structure is read off five further contact
expressions: the scalar-part, 14-part and 27-part witnesses, and the two
computable components of the derivative of the Lee form.  The 3-part of
that derivative has no printed closed form and is only reported as
implied zero when the 14-part witness vanishes.

Note the index convention in the Lee-form conditions: (DF)_66 is the
second y6-partial of the total derivative of F, not the total derivative
of F_66; the two orders differ and both are implemented under distinct
names.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import jetexpr as J
from .jetexpr import JetExpression, OdeDefinition

__all__ = [
    "WunschmannReport",
    "FGTypeReport",
    "ClassificationReport",
    "GeometryNotAdmittedError",
    "w1_general",
    "w1_general_formal",
    "wunschmann7",
    "wunschmann7_formal",
    "fg_conditions",
    "classify",
    "catalog",
    "catalog_names",
    "FormalDerivation",
    "Witness",
]


class GeometryNotAdmittedError(Exception):
    """The ODE does not satisfy the vanishing conditions; torsion-type
    classification is not applicable."""


# ---------------------------------------------------------------------------
# ODE catalog
# ---------------------------------------------------------------------------

_CATALOG_TEXT = {
    "trivial": "0",
    "cusp": "21/5*u*t/s - 84/25*t^3/s^2",
    "submax": "7*u*s/r + 49/10*t^2/r - 28*t*s^2/r^2 + 35/2*s^4/r^3",
    "example2": "(420*q^2*u^2 + 2520*q*s*t^2 - 1680*q*r*u*t - 2100*q*s^2*u"
                " - 504*p*t^3 + 1680*r^2*t^2 - 6300*t*r*s^2 + 840*t*u*p*s"
                " + 2625*s^4 - 280*u^2*r*p + 2800*u*r^2*s)"
                " / (360*q^2*t - 1200*r*q*s - 240*r*t*p + 800*r^3 + 300*s^2*p)",
}


def catalog_names():
    return sorted(_CATALOG_TEXT) + ["example4"]


def catalog(name):
    """Named 7th-order ODEs: trivial, cusp, submax, example2, example4."""
    if name in _CATALOG_TEXT:
        ctx = J.jet_context(6)
        return OdeDefinition(7, ctx.parse(_CATALOG_TEXT[name]), name)
    if name == "example4":
        # y^(7) = (y^(6))^(7/6), carried by the sixth root w of y6
        ctx = J.jet_context(6, radicals=[("w", 6, "y6")])
        rhs = ctx.symbol("y6") * ctx.symbol("w")
        return OdeDefinition(7, rhs, "example4")
    raise KeyError("unknown ODE %r; available: %s"
                   % (name, ", ".join(catalog_names())))


# ---------------------------------------------------------------------------
# derivative atoms
# ---------------------------------------------------------------------------


class _ConcreteOde:
    """Partial-derivative and total-derivative atoms of a concrete ODE."""

    def __init__(self, ode):
        self.ode = ode
        self.ctx = ode.ctx
        self.n = ode.order - 1
        self._partials = {}

    def F_partial(self, k):
        if k not in self._partials:
            name = "y" if k == 0 else "y%d" % k
            self._partials[k] = J.partial(self.ode.rhs, name)
        return self._partials[k]

    def D(self, expr):
        return J.total_derivative(expr, self.ode)

    def partial(self, expr, k):
        return J.partial(expr, "y" if k == 0 else "y%d" % k)


class FormalDerivation:
    """Atoms of a generic right-hand side: all partials are opaque symbols.

    Symbols F, F0..F6, D1F0..D1F6, D2F0..D2F6 generate a polynomial ring;
    the derivation maps each D^a F_k to D^(a+1) F_k and extends by the
    Leibniz rule, which is all the six-term shape and the five assembled
    conditions ever use.
    """

    def __init__(self, n=6, depth=2):
        self.n = n
        names = ["F"]
        names += ["F%d" % k for k in range(n + 1)]
        for a in range(1, depth + 1):
            names += ["D%dF%d" % (a, k) for k in range(n + 1)]
        self.depth = depth
        self.ctx = J.Context(coords=(), params=tuple(names))
        self._image = {}
        for k in range(n + 1):
            chain = ["F%d" % k] + ["D%dF%d" % (a, k) for a in range(1, depth + 1)]
            for a in range(len(chain) - 1):
                self._image[chain[a]] = self.ctx.symbol(chain[a + 1])

    def F_partial(self, k):
        return self.ctx.symbol("F%d" % k)

    def D(self, expr):
        total = self.ctx.zero()
        for name, image in self._image.items():
            de = J.partial(expr, name)
            if de.frac != 0:
                total = total + de * image
        return total


# ---------------------------------------------------------------------------
# the vanishing conditions
# ---------------------------------------------------------------------------


def w1_general(n, rhs_or_ode):
    """The order-n first vanishing condition, all six printed terms:

    D^2 F_n - 6/(n+1) F_n D(F_n) + 4/(n+1)^2 F_n^3 - 6/n D(F_(n-1))
    + 12/(n(n+1)) F_n F_(n-1) + 12/(n(n-1)) F_(n-2).
    """
    if n < 2:
        raise ValueError("the order-n condition needs n >= 2")
    if isinstance(rhs_or_ode, OdeDefinition):
        ode = rhs_or_ode
    else:
        ode = OdeDefinition(n + 1, rhs_or_ode, "anonymous")
    if ode.order != n + 1:
        raise ValueError("ODE order %d does not match n = %d" % (ode.order, n))
    return _w1_shape(_ConcreteOde(ode), n)


def _w1_shape(o, n):
    Fn, Fn1, Fn2 = o.F_partial(n), o.F_partial(n - 1), o.F_partial(n - 2)
    DFn = o.D(Fn)
    return (o.D(DFn)
            - Fraction(6, n + 1) * Fn * DFn
            + Fraction(4, (n + 1) ** 2) * Fn ** 3
            - Fraction(6, n) * o.D(Fn1)
            + Fraction(12, n * (n + 1)) * Fn * Fn1
            + Fraction(12, n * (n - 1)) * Fn2)


def w1_general_formal(n=6):
    """The order-n condition over a formal right-hand side."""
    return _w1_shape(FormalDerivation(n), n), FormalDerivation(n)


def _wunschmann_terms(o):
    """The five 7th-order conditions as (coefficient, factor-list) tables.

    Transcribed term by term; every product is spelled out so the table
    doubles as data for the re-keyed transcription check in the tests.
    """
    F = {k: o.F_partial(k) for k in range(7)}
    DF = {k: o.D(F[k]) for k in range(1, 7)}
    DDF = {k: o.D(DF[k]) for k in (2, 3, 4, 5, 6)}

    W1 = [(245, [DDF[6]]), (-245, [DF[5]]), (98, [F[4]]),
          (-210, [DF[6], F[6]]), (70, [F[5], F[6]]), (20, [F[6]] * 3)]

    W2 = [(6860, [DDF[5]]), (-10976, [DF[4]]), (6615, [DF[6], DF[6]]),
          (6860, [F[3]]), (-8330, [DF[6], F[5]]), (1715, [F[5], F[5]]),
          (-1960, [DF[5], F[6]]), (1568, [F[4], F[6]]),
          (-1890, [DF[6], F[6], F[6]]), (1190, [F[5], F[6], F[6]]),
          (135, [F[6]] * 4)]

    W3 = [(9604, [DDF[4]]), (-24010, [DF[3]]), (15435, [DF[5], DF[6]]),
          (24010, [F[2]]), (-14749, [DF[6], F[4]]), (-5145, [DF[5], F[5]]),
          (4459, [F[4], F[5]]), (-2744, [DF[4], F[6]]),
          (6615, [DF[6], DF[6], F[6]]), (3430, [F[3], F[6]]),
          (-6615, [DF[6], F[5], F[6]]), (1470, [F[5], F[5], F[6]]),
          (-2205, [DF[5], F[6], F[6]]), (2107, [F[4], F[6], F[6]]),
          (-1890, [DF[6], F[6], F[6], F[6]]), (945, [F[5]] + [F[6]] * 3),
          (135, [F[6]] * 5)]

    W4 = [(336140, [DDF[3]]), (-1344560, [DF[2]]), (180075, [DF[5], DF[5]]),
          (432180, [DF[4], DF[6]]), (2352980, [F[1]]),
          (-624260, [DF[6], F[3]]), (-216090, [DF[5], F[4]]),
          (64827, [F[4], F[4]]), (-144060, [DF[4], F[5]]),
          (154350, [DF[6], DF[6], F[5]]), (192080, [F[3], F[5]]),
          (-102900, [DF[6], F[5], F[5]]), (17150, [F[5]] * 3),
          (-96040, [DF[3], F[6]]), (308700, [DF[5], DF[6], F[6]]),
          (192080, [F[2], F[6]]), (-246960, [DF[6], F[4], F[6]]),
          (-154350, [DF[5], F[5], F[6]]), (113190, [F[4], F[5], F[6]]),
          (-61740, [DF[4], F[6], F[6]]),
          (132300, [DF[6], DF[6], F[6], F[6]]),
          (89180, [F[3], F[6], F[6]]),
          (-176400, [DF[6], F[5], F[6], F[6]]),
          (47775, [F[5], F[5], F[6], F[6]]),
          (-44100, [DF[5]] + [F[6]] * 3), (35280, [F[4]] + [F[6]] * 3),
          (-37800, [DF[6]] + [F[6]] * 4), (22050, [F[5]] + [F[6]] * 4),
          (2700, [F[6]] * 6)]

    W5 = [(2352980, [DDF[2]]), (-16470860, [DF[1]]),
          (1512630, [DF[4], DF[5]]), (2268945, [DF[3], DF[6]]),
          (-5126135, [DF[6], F[2]]), (-1512630, [DF[5], F[3]]),
          (-907578, [DF[4], F[4]]), (648270, [DF[6], DF[6], F[4]]),
          (907578, [F[3], F[4]]), (-756315, [DF[3], F[5]]),
          (1080450, [DF[5], DF[6], F[5]]), (1596665, [F[2], F[5]]),
          (-1080450, [DF[6], F[4], F[5]]), (-360150, [DF[5], F[5], F[5]]),
          (288120, [F[4], F[5], F[5]]), (-672280, [DF[2], F[6]]),
          (540225, [DF[5], DF[5], F[6]]),
          (1296540, [DF[4], DF[6], F[6]]), (2352980, [F[1], F[6]]),
          (-1620675, [DF[6], F[3], F[6]]), (-864360, [DF[5], F[4], F[6]]),
          (324135, [F[4], F[4], F[6]]), (-648270, [DF[4], F[5], F[6]]),
          (926100, [DF[6], DF[6], F[5], F[6]]),
          (756315, [F[3], F[5], F[6]]),
          (-771750, [DF[6], F[5], F[5], F[6]]),
          (154350, [F[5], F[5], F[5], F[6]]),
          (-324135, [DF[3], F[6], F[6]]),
          (926100, [DF[5], DF[6], F[6], F[6]]),
          (732305, [F[2], F[6], F[6]]),
          (-926100, [DF[6], F[4], F[6], F[6]]),
          (-617400, [DF[5], F[5], F[6], F[6]]),
          (524790, [F[4], F[5], F[6], F[6]]),
          (-185220, [DF[4]] + [F[6]] * 3),
          (396900, [DF[6], DF[6]] + [F[6]] * 3),
          (231525, [F[3]] + [F[6]] * 3),
          (-661500, [DF[6], F[5]] + [F[6]] * 3),
          (209475, [F[5], F[5]] + [F[6]] * 3),
          (-132300, [DF[5]] + [F[6]] * 4), (119070, [F[4]] + [F[6]] * 4),
          (-113400, [DF[6]] + [F[6]] * 5), (75600, [F[5]] + [F[6]] * 5),
          (8100, [F[6]] * 7), (65883440, [o.F_partial(0)])]

    return [W1, W2, W3, W4, W5]


@dataclass(frozen=True)
class Witness:
    """A zero-tested expression with the mode that decided it."""

    expression: JetExpression
    is_zero: bool
    mode: str

    def render(self):
        if isinstance(self.expression, (int, Fraction)):
            return str(self.expression)
        return J.render(self.expression)


def _zero_test(expr, points=64, seed=0, force_probabilistic=False):
    """Zero test with mode tracking.

    An expression whose construction went through radical symbols is
    decided probabilistically (on its pre-reduction image when one is
    retained) and cross-checked against the exact normal form; anything
    else is decided by the normal form alone.  ``force_probabilistic``
    runs the sampled path even when the normal form is already decisive,
    which is how radical right-hand sides are certified.
    """
    if isinstance(expr, (int, Fraction)):
        return Witness(expr, expr == 0, "exact-normal-form")
    radical_path = (force_probabilistic or expr.has_radicals()
                    or expr._raw is not None)
    if not radical_path:
        return Witness(expr, J.is_zero(expr), "exact-normal-form")
    prob = J.is_zero_probabilistic(expr, points=points, seed=seed)
    exact = expr.frac == 0
    if prob != exact:
        raise J.InconsistencyError(
            "normal-form and probabilistic zero tests disagree")
    return Witness(expr, prob, "probabilistic-%dpt" % points)


@dataclass(frozen=True)
class WunschmannReport:
    witnesses: tuple  # five Witness values, W1..W5
    order_n_first: JetExpression = None

    @property
    def vanishing(self):
        return tuple(w.is_zero for w in self.witnesses)

    @property
    def admits_structure(self):
        return all(self.vanishing)


def wunschmann7(ode, points=64, seed=0, include_general_first=False):
    """All five 7th-order vanishing conditions, assembled and zero-tested.

    Witnesses built from a rational right-hand side are decided by the
    exact normal form; radical-bearing ones (fractional powers in the
    right-hand side) are decided probabilistically at ``points`` random
    places and cross-checked against the normal form.
    ``include_general_first`` also attaches the order-6 instance of the
    general six-term shape (1/245 of the first condition).
    """
    if ode.order != 7:
        raise ValueError("the five conditions are specific to order 7")
    o = _ConcreteOde(ode)
    ctx = ode.ctx
    force = ode.rhs.has_radicals()
    tables = _wunschmann_terms(o)
    witnesses = []
    for i, table in enumerate(tables):
        expr = J.combination(ctx, table)
        witnesses.append(_zero_test(expr, points=points, seed=seed + i,
                                    force_probabilistic=force))
    general = _w1_shape(o, 6) if include_general_first else None
    return WunschmannReport(tuple(witnesses), order_n_first=general)


def wunschmann7_formal():
    """The five conditions over a formal right-hand side; the first one is
    245 times the order-6 instance of the general shape."""
    o = FormalDerivation(6)
    tables = _wunschmann_terms(o)
    exprs = [J.combination(o.ctx, t) for t in tables]
    return exprs, o


@dataclass(frozen=True)
class FGTypeReport:
    lam: Witness
    tau2: Witness
    tau3: Witness
    dtheta_v7: Witness
    dtheta_v11: Witness
    dtheta_v3: str          # "implied_zero" | "unknown"
    type_label: tuple       # subset of ("W1", "W2", "W3", "W4")
    lee_form_closed: object  # True | False | "unknown"


def fg_conditions(ode, wunschmann=None, points=64, seed=0):
    """Torsion-type witnesses of the induced conformal structure.

    Applicable only when all five vanishing conditions hold; otherwise
    :class:`GeometryNotAdmittedError` is raised (never a silent
    classification).
    """
    if ode.order != 7:
        raise ValueError("classification is specific to order 7")
    wunschmann = wunschmann or wunschmann7(ode, points=points, seed=seed)
    if not wunschmann.admits_structure:
        raise GeometryNotAdmittedError(
            "vanishing conditions fail: %r" % (wunschmann.vanishing,))
    o = _ConcreteOde(ode)
    F5, F6 = o.F_partial(5), o.F_partial(6)
    F55 = o.partial(F5, 5)
    F64 = o.partial(F6, 4)
    F65 = o.partial(F6, 5)
    F66 = o.partial(F6, 6)
    F665 = o.partial(F66, 5)
    F664 = o.partial(F66, 4)
    F655 = o.partial(F65, 5)
    F666 = o.partial(F66, 6)
    DF6 = o.D(F6)
    DF66_tap = o.D(F66)              # total after partial
    DF = o.D(o.ode.rhs)
    DF_6 = o.partial(DF, 6)          # partial after total
    DF_66 = o.partial(DF_6, 6)

    lam_expr = (F66 * (9 * DF6 - Fraction(9, 7) * F6 ** 2 - 15 * F5)
                + 12 * F65 * F6 + 14 * F55 - Fraction(84, 5) * F64)
    tau2_expr = 21 * DF66_tap + 14 * F65 + 15 * F6 * F66
    tau3_expr = F66
    v7_expr = (DF_66 * F66 + Fraction(3, 2) * DF_6 * F666
               - Fraction(12, 7) * F666 * F6 ** 2 - 4 * F666 * F5
               + 2 * F665 * F6 - Fraction(14, 5) * F664
               + Fraction(7, 3) * F655 - Fraction(4, 3) * F66 * F65
               - Fraction(16, 7) * F66 ** 2 * F6)
    v11_expr = F666

    lam = _zero_test(lam_expr, points, seed + 11)
    tau2 = _zero_test(tau2_expr, points, seed + 12)
    tau3 = _zero_test(tau3_expr, points, seed + 13)
    v7 = _zero_test(v7_expr, points, seed + 14)
    v11 = _zero_test(v11_expr, points, seed + 15)

    dtheta_v3 = "implied_zero" if tau2.is_zero else "unknown"
    label = []
    if not lam.is_zero:
        label.append("W1")
    if not tau2.is_zero:
        label.append("W2")
    if not tau3.is_zero:
        label.append("W3")
    torsion_free = (lam.is_zero and tau2.is_zero and tau3.is_zero
                    and v7.is_zero and v11.is_zero)
    if not torsion_free:
        # the Lee form itself is gauge-dependent; its class is absent only
        # when the whole structure is gauge-equivalent to the torsion-free one
        label.append("W4")
    if not (v7.is_zero and v11.is_zero):
        lee_closed = False
    elif dtheta_v3 == "implied_zero":
        lee_closed = True
    else:
        lee_closed = "unknown"
    return FGTypeReport(lam=lam, tau2=tau2, tau3=tau3, dtheta_v7=v7,
                        dtheta_v11=v11, dtheta_v3=dtheta_v3,
                        type_label=tuple(label), lee_form_closed=lee_closed)


@dataclass(frozen=True)
class ClassificationReport:
    ode_name: str
    rhs_text: str
    wunschmann: WunschmannReport
    admits_structure: bool
    fg: FGTypeReport = None
    fg_applicable: bool = False


def classify(ode, points=64, seed=0):
    """Full pipeline: vanishing conditions, then torsion type when they hold."""
    w = wunschmann7(ode, points=points, seed=seed)
    fg = None
    if w.admits_structure:
        fg = fg_conditions(ode, wunschmann=w, points=points, seed=seed)
    return ClassificationReport(
        ode_name=ode.name,
        rhs_text=J.render(ode.rhs),
        wunschmann=w,
        admits_structure=w.admits_structure,
        fg=fg,
        fg_applicable=fg is not None,
    )
