"""Classical invariant theory of binary forms over abstract coefficients.

A binary form of degree n is stored in the binomial convention: the
coefficient list (c_0, ..., c_n) represents

    Q(X1, X2) = sum_i  C(n, i) * c_i * X1^i * X2^(n-i),

so c_i is the i-th "theta" coefficient of the defining quantic.  The
coefficients may be exact rationals, jet expressions, or formal frame
symbols; the algorithms only use addition, multiplication, and
multiplication by rational scalars, so any commutative Q-algebra whose
elements support the Python operators works.

The p-th transvectant is implemented with the classical alternating sign,

    <Q, R>_p = (1/p!) sum_i (-1)^i C(p, i)
               * d^p Q / dX1^(p-i) dX2^i  *  d^p R / dX1^i dX2^(p-i),

which is forced by the discriminant example at n=2, by the vanishing of
odd self-transvectants, and by the closed form of the quadratic
invariant; a transcription of the formula without the sign satisfies
none of these.

The quadratic invariant of an even form is normalized here so that the
coefficient of theta^1 * theta^(n+1) is 1 (the shape in which its n=2
and n=6 expansions are usually displayed); every derived quantity
reports its exact proportionality constant against the transvectant
value, so conformal-class statements lose nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import mpmath as mp

from .jetexpr import Context, JetExpression, is_zero as _expr_is_zero

__all__ = [
    "BinaryForm",
    "MultilinearFrameValue",
    "I0Expansion",
    "PolarizedMetric",
    "PhiTrilinear",
    "EquianharmonicResult",
    "transvectant",
    "invariant_I0",
    "i0_closed_form_coeffs",
    "i0_of_coeffs",
    "polarized_metric",
    "metric_signature",
    "phi_trilinear",
    "equianharmonic_check",
    "gl2_substitute",
    "frame_context",
    "frame_form",
    "PRINTED_PHI_COEFFS",
]


def _is_zero(c):
    if isinstance(c, JetExpression):
        return _expr_is_zero(c)
    return c == 0


def _scale(c, f):
    if f == 1:
        return c
    return c * f if not isinstance(c, int) else Fraction(c) * f


class BinaryForm:
    """Homogeneous degree-n form in the binomial convention."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != degree + 1:
            raise ValueError("degree-%d form needs %d coefficients, got %d"
                             % (degree, degree + 1, len(coeffs)))
        self.degree = degree
        self.coeffs = coeffs

    @classmethod
    def from_raw(cls, degree, raw):
        """Build from plain monomial coefficients of X1^i X2^(n-i)."""
        raw = tuple(raw)
        return cls(degree, [_scale(raw[i], Fraction(1, comb(degree, i)))
                            for i in range(degree + 1)])

    def raw(self):
        """Monomial coefficients: raw_i = C(n,i) * c_i."""
        return tuple(_scale(self.coeffs[i], Fraction(comb(self.degree, i)))
                     for i in range(self.degree + 1))

    def __eq__(self, other):
        if not isinstance(other, BinaryForm):
            return NotImplemented
        if self.degree != other.degree:
            return False
        return all(_is_zero(a - b) for a, b in zip(self.coeffs, other.coeffs))

    def __repr__(self):
        return "BinaryForm(%d, %r)" % (self.degree, list(self.coeffs))

    def is_zero(self):
        return all(_is_zero(c) for c in self.coeffs)


def _diff_x1(raw):
    # d/dX1 of sum raw_k X1^k X2^(n-k)
    return tuple(_scale(raw[k + 1], Fraction(k + 1)) for k in range(len(raw) - 1))


def _diff_x2(raw):
    n = len(raw) - 1
    return tuple(_scale(raw[k], Fraction(n - k)) for k in range(n))


def _diff_many(raw, dx1, dx2):
    for _ in range(dx1):
        raw = _diff_x1(raw)
    for _ in range(dx2):
        raw = _diff_x2(raw)
    return raw


def _raw_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if _is_zero(ai):
            continue
        for j, bj in enumerate(b):
            if _is_zero(bj):
                continue
            cur = out[i + j]
            out[i + j] = ai * bj if isinstance(cur, int) and cur == 0 else cur + ai * bj
    return tuple(out)


def _raw_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def transvectant(q, r, p):
    """The p-th transvectant <q, r>_p, a form of degree n + m - 2p."""
    n, m = q.degree, r.degree
    if p > min(n, m):
        raise ValueError("transvectant order %d exceeds min degree %d" % (p, min(n, m)))
    if p < 0:
        raise ValueError("transvectant order must be non-negative")
    qraw, rraw = q.raw(), r.raw()
    out = None
    for i in range(p + 1):
        dq = _diff_many(qraw, p - i, i)
        dr = _diff_many(rraw, i, p - i)
        term = _raw_mul(dq, dr)
        sign = -1 if i % 2 else 1
        term = tuple(_scale(t, Fraction(sign * comb(p, i))) for t in term)
        out = term if out is None else _raw_add(out, term)
    out = tuple(_scale(t, Fraction(1, factorial(p))) for t in out)
    return BinaryForm.from_raw(n + m - 2 * p, out)


# ---------------------------------------------------------------------------
# frame-symbol values
# ---------------------------------------------------------------------------


def frame_context(n=6, prefixes=("v",)):
    """Context whose parameters are the frame components v1..v(n+1), etc."""
    params = tuple("%s%d" % (p, i) for p in prefixes for i in range(1, n + 2))
    return Context(coords=(), params=params)


def frame_form(ctx, n, prefix):
    """Degree-n form whose binomial coefficients are the formal symbols."""
    return BinaryForm(n, [ctx.symbol("%s%d" % (prefix, i + 1)) for i in range(n + 1)])


@dataclass(frozen=True)
class MultilinearFrameValue:
    """Polynomial in formal frame symbols with declared per-vector degrees."""

    expr: JetExpression
    arities: dict  # prefix -> homogeneous degree in that vector's symbols

    def __post_init__(self):
        ctx = self.expr.ctx
        idx_by_prefix = {p: [i for i, nm in enumerate(ctx._names)
                             if nm.startswith(p) and nm[len(p):].isdigit()]
                         for p in self.arities}
        for monom, _ in self.expr.frac.numer.terms():
            for p, deg in self.arities.items():
                got = sum(monom[i] for i in idx_by_prefix[p])
                if got != deg:
                    raise ValueError(
                        "monomial has degree %d in %r-symbols, expected %d"
                        % (got, p, deg))

    def coefficient(self, assignment):
        """Coefficient of a squarefree monomial, e.g. {'v': 2, 'w': 5}
        selecting v2*w5."""
        ctx = self.expr.ctx
        target = [0] * len(ctx._names)
        for prefix, index in assignment.items():
            target[ctx._gen_index["%s%d" % (prefix, index)]] += 1
        num, den = self.expr.frac.numer, self.expr.frac.denom
        zero_mon = (0,) * len(ctx._names)
        dc = dict(den.terms())
        if list(dc) != [zero_mon]:
            raise ValueError("frame value must be polynomial")
        c = dict(num.terms()).get(tuple(target))
        if c is None:
            return Fraction(0)
        f = Fraction(int(c.numerator), int(c.denominator))
        d = dc[zero_mon]
        return f / Fraction(int(d.numerator), int(d.denominator))


def i0_closed_form_coeffs(n):
    """Coefficient of theta^(i+1)*theta^(n+1-i) in the normalized quadratic
    invariant (leading coefficient 1)."""
    if n % 2:
        raise ValueError("the quadratic invariant vanishes for odd degree")
    k = n // 2
    out = {}
    for i in range(k):
        out[(i, n - i)] = Fraction((-1) ** i * comb(n, i))
    out[(k, k)] = Fraction((-1) ** k * comb(n, k), 2)
    return out


def i0_of_coeffs(coeffs):
    """Normalized quadratic invariant of a concrete coefficient list."""
    n = len(coeffs) - 1
    table = i0_closed_form_coeffs(n)
    total = None
    for (i, j), w in table.items():
        term = _scale(coeffs[i] * coeffs[j], w)
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class I0Expansion:
    value: MultilinearFrameValue
    ratio_to_transvectant: Fraction  # <Q,Q>_n = ratio * value
    ratio_to_closed_form: Fraction   # raw closed form = ratio * value


def invariant_I0(n, ctx=None, prefix="v"):
    """The quadratic invariant of an even degree-n form, as a polynomial in
    the frame symbols, normalized to leading coefficient 1.

    Reports the constants relating it to the transvectant <Q,Q>_n and to
    the raw closed form 2*sum_i (-1)^i C(2k,i) t^(i+1) t^(2k+1-i) + ...
    """
    if n % 2:
        raise ValueError("the quadratic invariant vanishes for odd degree")
    ctx = ctx or frame_context(n, (prefix,))
    v = frame_form(ctx, n, prefix)
    expr = i0_of_coeffs(v.coeffs)
    value = MultilinearFrameValue(expr, {prefix: 2})
    # <Q,Q>_n reduces to 2 * n! * c_0 * c_n + ... ; the exact ratio is
    # computed rather than asserted.
    tv = transvectant(v, v, n)
    assert tv.degree == 0
    ratio = _poly_ratio(tv.coeffs[0], expr)
    return I0Expansion(value, ratio, Fraction(2))


def _poly_ratio(a, b):
    """The constant c with a == c * b, both jet expressions; raises if the
    ratio is not a single constant."""
    q = a / b
    return q.as_fraction()


@dataclass(frozen=True)
class PolarizedMetric:
    value: MultilinearFrameValue  # bilinear in v and w symbols
    ratio_to_I0: Fraction         # g(V,V) = ratio * I0(V)


def polarized_metric(n, ctx=None):
    """The symmetric bilinear form g(X, Y) = <X, Y>_n on frame vectors."""
    if n % 2:
        raise ValueError("odd n gives an antisymmetric pairing, not a metric")
    ctx = ctx or frame_context(n, ("v", "w"))
    X = frame_form(ctx, n, "v")
    Y = frame_form(ctx, n, "w")
    g = transvectant(X, Y, n).coeffs[0]
    gvv = transvectant(X, X, n).coeffs[0]
    i0 = i0_of_coeffs(X.coeffs)
    return PolarizedMetric(MultilinearFrameValue(g, {"v": 1, "w": 1}),
                           _poly_ratio(gvv, i0))


def metric_signature(n):
    """Signature (positives, negatives) of the polarized metric over the
    real theta-basis, by exact congruence diagonalization."""
    pm = polarized_metric(n)
    dim = n + 1
    G = [[pm.value.coefficient({"v": i + 1, "w": j + 1})
          for j in range(dim)] for i in range(dim)]
    return _signature_of_symmetric(G)


def _signature_of_symmetric(G):
    G = [row[:] for row in G]
    m = len(G)
    pos = neg = 0
    used = [False] * m
    for _ in range(m):
        # pick a nonzero diagonal pivot, or create one from an off-diagonal
        piv = None
        for i in range(m):
            if not used[i] and G[i][i] != 0:
                piv = i
                break
        if piv is None:
            pair = None
            for i in range(m):
                if used[i]:
                    continue
                for j in range(m):
                    if not used[j] and j != i and G[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break  # remaining block is zero
            i, j = pair
            for k in range(m):  # row/col op: e_i -> e_i + e_j
                G[i][k] = G[i][k] + G[j][k]
            for k in range(m):
                G[k][i] = G[k][i] + G[k][j]
            piv = i
        d = G[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        used[piv] = True
        for i in range(m):
            if used[i] or G[i][piv] == 0:
                continue
            f = Fraction(G[i][piv], d)
            for k in range(m):
                G[i][k] = G[i][k] - f * G[piv][k]
            for k in range(m):
                G[k][i] = G[k][i] - f * G[k][piv]
    return (pos, neg)


# Printed expansion of the compatible three-form on the 7-dimensional
# frame: coefficients of theta^i ^ theta^j ^ theta^k, i<j<k.
PRINTED_PHI_COEFFS = {
    (2, 3, 7): Fraction(3),
    (1, 5, 6): Fraction(3),
    (1, 4, 7): Fraction(-1),
    (2, 4, 6): Fraction(-6),
    (3, 4, 5): Fraction(15),
}


@dataclass(frozen=True)
class PhiTrilinear:
    value: MultilinearFrameValue            # trilinear in v, w, z
    form_coefficients: dict                  # (i<j<k) -> Fraction
    printed_ratio: Fraction                  # extracted = ratio * printed


def phi_trilinear(ctx=None):
    """phi(X, Y, Z) = <<X, Y>_3, Z>_6 on degree-6 frame vectors.

    The trilinear value is totally antisymmetric; its coefficient 3-form
    is proportional to the printed expansion, and the single
    proportionality constant is reported.
    """
    ctx = ctx or frame_context(6, ("v", "w", "z"))
    X = frame_form(ctx, 6, "v")
    Y = frame_form(ctx, 6, "w")
    Z = frame_form(ctx, 6, "z")
    inner = transvectant(X, Y, 3)
    phi = transvectant(inner, Z, 6).coeffs[0]
    value = MultilinearFrameValue(phi, {"v": 1, "w": 1, "z": 1})
    coeffs = {}
    for i in range(1, 8):
        for j in range(i + 1, 8):
            for k in range(j + 1, 8):
                c = value.coefficient({"v": i, "w": j, "z": k})
                if c != 0:
                    coeffs[(i, j, k)] = c
    ratios = set()
    for idx, printed in PRINTED_PHI_COEFFS.items():
        ratios.add(Fraction(coeffs.get(idx, Fraction(0))) / printed)
    extra = set(coeffs) - set(PRINTED_PHI_COEFFS)
    if extra or len(ratios) != 1 or 0 in ratios:
        raise ArithmeticError("trilinear extraction does not match the printed "
                              "three-form: ratios %r, extra terms %r"
                              % (ratios, sorted(extra)))
    ratio = ratios.pop()
    return PhiTrilinear(value, coeffs, ratio)


# ---------------------------------------------------------------------------
# GL(2) substitution action
# ---------------------------------------------------------------------------


def gl2_substitute(form, a, b, c, d):
    """The substitution action (A . Q)(X1, X2) = Q(a X1 + b X2, c X1 + d X2).

    For an invariant of weight w one has I(A . Q) = det(A)^w I(Q).
    """
    n = form.degree
    raw = form.raw()
    out = [0] * (n + 1)
    # (a X1 + b X2)^k (c X1 + d X2)^(n-k), collected by X1-degree
    for k, coeff in enumerate(raw):
        if _is_zero(coeff):
            continue
        first = [Fraction(comb(k, i)) * Fraction(a) ** i * Fraction(b) ** (k - i)
                 for i in range(k + 1)]
        second = [Fraction(comb(n - k, j)) * Fraction(c) ** j *
                  Fraction(d) ** (n - k - j) for j in range(n - k + 1)]
        for i, fi in enumerate(first):
            for j, sj in enumerate(second):
                term = _scale(coeff, fi * sj)
                cur = out[i + j]
                out[i + j] = term if isinstance(cur, int) and cur == 0 else cur + term
    return BinaryForm.from_raw(n, out)


# ---------------------------------------------------------------------------
# equianharmonic quartics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquianharmonicResult:
    is_equianharmonic: bool
    i0_value: complex
    cross_ratio: complex
    roots: tuple


def _cross_ratio(z1, z2, z3, z4):
    # (z1-z3)(z2-z4) / ((z1-z4)(z2-z3)), with points at infinity dropping
    # their two factors
    INF = None

    def d(a, b):
        return 1 if a is INF or b is INF else a - b

    return (d(z1, z3) * d(z2, z4)) / (d(z1, z4) * d(z2, z3))


def equianharmonic_check(coeffs, tolerance=1e-9, digits=50, separation=1e-20):
    """Whether a numeric quartic has vanishing quadratic invariant, together
    with the cross-ratio of its four roots.

    Convention: roots are taken in the chart x = X2/X1 (a vanishing leading
    coefficient contributes a root at infinity); the cross-ratio is
    (z1-z3)(z2-z4)/((z1-z4)(z2-z3)) over the computed root order.  When the
    invariant vanishes the cross-ratio satisfies L^2 - L + 1 = 0 within
    tolerance: the equianharmonic configuration.
    """
    if len(coeffs) != 5:
        raise ValueError("a quartic needs 5 binomial-convention coefficients")
    with mp.workdps(digits):
        cs = [mp.mpmathify(c.numerator) / mp.mpmathify(c.denominator)
              if isinstance(c, Fraction) else mp.mpmathify(c) for c in coeffs]
        i0 = cs[0] * cs[4] - 4 * cs[1] * cs[3] + 3 * cs[2] ** 2
        # q(x) = sum_i C(4,i) c_i x^(4-i); leading coefficient c_0
        poly = [cs[0], 4 * cs[1], 6 * cs[2], 4 * cs[3], cs[4]]
        roots = []
        while poly and mp.fabs(poly[0]) < mp.mpf(10) ** (-(digits - 10)):
            poly = poly[1:]
            roots.append(None)  # root at infinity by degree drop
        if len(poly) <= 1:
            raise ArithmeticError("quartic is too degenerate for root extraction")
        finite = mp.polyroots(poly, maxsteps=200, extraprec=4 * digits)
        roots.extend(finite)
        if len(roots) != 4:
            raise ArithmeticError("expected 4 roots")
        fin = [r for r in roots if r is not None]
        for i in range(len(fin)):
            for j in range(i + 1, len(fin)):
                if mp.fabs(fin[i] - fin[j]) < separation:
                    raise ArithmeticError("repeated root: configuration is "
                                          "degenerate")
        cr = _cross_ratio(*roots)
        is_eq = mp.fabs(i0) < tolerance
        if is_eq:
            resid = cr ** 2 - cr + 1
            if mp.fabs(resid) > mp.sqrt(mp.mpf(tolerance)):
                raise ArithmeticError(
                    "invariant vanishes but cross-ratio misses the "
                    "equianharmonic condition: residual %s" % mp.nstr(resid))
        return EquianharmonicResult(bool(is_eq), complex(i0), complex(cr),
                                    tuple(complex(r) if r is not None else None
                                          for r in roots))
