"""Exact symbolic kernel over jet and chart coordinates.

Expressions are multivariate rational functions with arbitrary-precision
rational coefficients, optionally extended by *radical symbols*: named
m-th roots ``w`` with a single defining relation ``w^m = base`` where the
base is a radical-free polynomial in the other symbols.  Every expression
is kept in a canonical normal form,

  * numerator and denominator are coprime polynomials with a normalized
    sign (the reduced form of the backing sparse-fraction arithmetic),
  * powers of every radical symbol are reduced below its index,
  * denominators are radical-free (rationalized).

The quotient by the radical relations is an integral domain as long as
each relation is irreducible over the field generated by the remaining
symbols, which holds for all relations used here (roots of independent
coordinates, of linear combinations of coordinates, and of rational
constants).  Under that assumption the normal form of a zero expression
is literally zero, so the exact zero test is sound and complete.

A probabilistic zero test is provided as an independent cross-check: the
expression is evaluated at random points of GF(p) for a fixed 62-bit
prime p, with radical symbols instantiated by consistent m-th roots mod
p.  For a nonzero rational function whose numerator and denominator have
total degree at most d, a single random point evaluates to zero with
probability at most 2*d/p (Schwartz-Zippel, counting denominator
collisions), so k points give a failure bound of (2*d/p)**k.  With
p > 2**61, d < 2**20 and k = 32 the bound is below 2**-1280, far under
the 2**-40 budget used by the verification suites.

Expression grammar accepted by :meth:`Context.parse` (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = { "-" } power ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] integer | "(" [ "-" ] integer ")" ;
    atom     = identifier | integer | "(" expr ")" ;

with identifiers ``[a-zA-Z_][a-zA-Z0-9_]*`` and standard precedence.
Rational literals appear as ``a/b`` through the division operator, which
is exact.  ``^`` is right-associative with integer exponents.

All values are immutable after construction; every operation is a pure
function, so expressions may be shared freely across threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
from sympy.polys.domains import QQ
from sympy.polys.fields import field as _sympy_field

__all__ = [
    "Context",
    "JetExpression",
    "OdeDefinition",
    "Radical",
    "JetError",
    "ParseError",
    "UnknownSymbolError",
    "PoleError",
    "BranchError",
    "InconclusiveError",
    "InconsistencyError",
    "jet_context",
    "parse",
    "partial",
    "total_derivative",
    "is_zero",
    "is_zero_probabilistic",
    "evaluate",
    "render",
    "JET_ALIASES",
    "SZ_PRIME",
]


class JetError(Exception):
    """Base class for kernel errors."""


class ParseError(JetError):
    def __init__(self, message, position):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


class UnknownSymbolError(ParseError):
    pass


class PoleError(JetError):
    """Evaluation point lies on a denominator zero of the construction."""


class BranchError(JetError):
    """A radical was evaluated off the positive real axis with no declared branch."""


class InconclusiveError(JetError):
    """Every sampled point of a probabilistic zero test hit a pole."""


class InconsistencyError(JetError):
    """Exact and probabilistic zero tests disagree; the engine is unsound."""


# 62-bit prime for Schwartz-Zippel evaluation.  Chosen so that
#   * (p-1) is coprime to 3 and 5: cube and fifth roots mod p are unique
#     and always exist, only square roots need a residue check;
#   * p = 1 mod 4 and 2, 3, 5 are quadratic non-residues: the constant
#     radical bases -1, 6, 10 and 15 all have square roots mod p.
SZ_PRIME = 2305843009213693973

assert SZ_PRIME % 8 == 5 and SZ_PRIME % 3 == 2 and SZ_PRIME % 5 == 3

# Jet coordinate aliases used by the 7th-order catalog (y1..y6 canonical).
JET_ALIASES = {"p": "y1", "q": "y2", "r": "y3", "s": "y4", "t": "y5", "u": "y6"}


def _to_qq(value):
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    raise TypeError("expected int or Fraction, got %r" % (value,))


@dataclass(frozen=True)
class Radical:
    """An adjoined m-th root: ``name ** index == base``."""

    name: str
    index: int
    base: object  # radical-free PolyElement of the owning context


class Context:
    """A set of named symbols with optional adjoined radicals.

    ``coords`` are the differentiable coordinates (jet or chart), ``params``
    are opaque constants; both enter the ground field the same way and the
    distinction only matters to callers who differentiate.  Radicals are
    declared as ``(name, index, base_text)`` triples; bases are parsed in
    the radical-free part of the context and must stay radical-free.
    """

    def __init__(self, coords=(), params=(), radicals=(), aliases=None):
        coords = tuple(coords)
        params = tuple(params)
        rad_specs = tuple(radicals)
        names = coords + params + tuple(r[0] for r in rad_specs)
        if not names:
            raise ValueError("a context needs at least one symbol")
        if len(set(names)) != len(names):
            raise ValueError("duplicate symbol names in %r" % (names,))
        self.coords = coords
        self.params = params
        self.aliases = dict(aliases or {})
        self._names = names
        self.field, *gens = _sympy_field(list(names) or ["_dummy"], QQ)
        self.ring = self.field.ring
        self._gen_index = {n: i for i, n in enumerate(names)}
        # Parse radical bases in declaration order; a base may mention
        # coords and params only (bases stay radical-free).
        self.radicals = {}
        self._rad_order = ()
        for name, index, base in rad_specs:
            if not (isinstance(index, int) and index >= 2):
                raise ValueError("radical index must be an integer >= 2")
            base_poly = self._base_poly(base)
            rad_idx = {self._gen_index[r[0]] for r in rad_specs}
            if rad_idx & self._support(base_poly):
                raise ValueError("radical base %r must be radical-free" % (base,))
            if base_poly == self.ring.zero:
                raise ValueError("radical base must be nonzero")
            self.radicals[name] = Radical(name, index, base_poly)
            self._rad_order = tuple(self.radicals)

    def _base_poly(self, base):
        if isinstance(base, str):
            expr = self.parse(base, _allow_radicals=False)
            if expr.frac.denom != self.ring.one:
                raise ValueError("radical base must be a polynomial: %r" % base)
            return expr.frac.numer
        if isinstance(base, (int, Fraction)):
            if Fraction(base).denominator != 1:
                raise ValueError("radical base must be a polynomial")
            return self.ring.ground_new(_to_qq(int(base)))
        raise TypeError("radical base must be text or integer")

    @staticmethod
    def _support(poly):
        used = set()
        for monom, _ in poly.terms():
            for i, e in enumerate(monom):
                if e:
                    used.add(i)
        return used

    # -- construction -------------------------------------------------

    def zero(self):
        return JetExpression(self, self.field.zero)

    def one(self):
        return JetExpression(self, self.field.one)

    def rational(self, numerator, denominator=1):
        f = Fraction(numerator, denominator)
        num = self.ring.ground_new(_to_qq(f))
        return JetExpression(self, self.field.new(num, self.ring.one))

    def symbol(self, name):
        name = self.aliases.get(name, name)
        if name not in self._gen_index:
            raise KeyError("symbol %r not declared in context" % name)
        gen = self.field.gens[self._gen_index[name]]
        return JetExpression(self, gen)

    def symbols(self, *names):
        return tuple(self.symbol(n) for n in names)

    def parse(self, text, _allow_radicals=True):
        return _Parser(self, text, _allow_radicals).parse()

    def extended(self, coords=(), params=(), radicals=()):
        """A new context with extra symbols; existing expressions lift."""
        rad_specs = [(r.name, r.index, _render_poly(self, r.base))
                     for r in self.radicals.values()]
        rad_specs += list(radicals)
        return Context(self.coords + tuple(coords),
                       self.params + tuple(params),
                       rad_specs, self.aliases)

    def lift(self, expr):
        """Re-home an expression from another context into this one.

        Symbols are matched by name; every symbol used by the expression
        (and any radical it references) must exist here, and shared
        radicals must agree on index and base.
        """
        if expr.ctx is self:
            return expr
        src = expr.ctx
        used = (Context._support(expr.frac.numer) |
                Context._support(expr.frac.denom))
        for p in expr.restrictions:
            used |= Context._support(p)
        used_names = {src._names[i] for i in used}
        missing = used_names - set(self._names)
        if missing:
            raise ValueError("cannot lift: symbols %r absent here" % sorted(missing))
        for rname, rad in src.radicals.items():
            if rname not in used_names:
                continue
            mine = self.radicals.get(rname)
            if mine is None or mine.index != rad.index or \
                    self._move_poly(src, rad.base) != mine.base:
                raise ValueError("radical %r differs between contexts" % rname)

        def move(poly):
            return self._move_poly(src, poly)

        frac = self.field.new(move(expr.frac.numer), move(expr.frac.denom))
        restr = frozenset(move(p) for p in expr.restrictions)
        return JetExpression(self, frac, restr)

    def _move_poly(self, src, poly):
        out = {}
        for monom, coeff in poly.terms():
            m2 = [0] * len(self._names)
            for i, e in enumerate(monom):
                if e:
                    m2[self._gen_index[src._names[i]]] = e
            out[tuple(m2)] = coeff
        return self.ring.from_dict(out)

    # -- helpers used by JetExpression ---------------------------------

    def _radical_gen_indices(self):
        return [(self._gen_index[n], self.radicals[n]) for n in self._rad_order]

    def __repr__(self):
        rads = ",".join("%s^%d" % (r.name, r.index) for r in self.radicals.values())
        return "Context(coords=%r, params=%r, radicals=[%s])" % (
            self.coords, self.params, rads)


def jet_context(order=6, params=(), radicals=()):
    """The standard jet context: x, y, y1..y_order plus the p..u aliases."""
    coords = ("x", "y") + tuple("y%d" % k for k in range(1, order + 1))
    aliases = {a: c for a, c in JET_ALIASES.items() if c in coords}
    return Context(coords, params, radicals, aliases)


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------


def _reduce_radicals(ctx, poly):
    """Rewrite every radical power at or above its index using w^m = base."""
    rads = ctx._radical_gen_indices()
    if not rads:
        return poly
    ring = ctx.ring
    out = ring.zero
    for monom, coeff in poly.terms():
        m = list(monom)
        extra = None
        for gi, rad in rads:
            e = m[gi]
            if e >= rad.index:
                q, r = divmod(e, rad.index)
                m[gi] = r
                piece = rad.base ** q
                extra = piece if extra is None else extra * piece
        term = ring.from_dict({tuple(m): coeff})
        out += term if extra is None else term * extra
    return out


def _radical_degrees(ctx, poly, gi):
    """Split ``poly`` by the exponent of the radical generator ``gi``."""
    ring = ctx.ring
    parts = {}
    for monom, coeff in poly.terms():
        e = monom[gi]
        m = list(monom)
        m[gi] = 0
        parts.setdefault(e, {})[tuple(m)] = coeff
    return {e: ring.from_dict(d) for e, d in parts.items()}


def _normalize(ctx, frac):
    """Canonical form: radical powers reduced, denominator radical-free."""
    if not ctx.radicals:
        return frac
    num = _reduce_radicals(ctx, frac.numer)
    den = _reduce_radicals(ctx, frac.denom)
    rad_gis = [gi for gi, _ in ctx._radical_gen_indices()]
    guard = 0
    while True:
        present = [gi for gi in rad_gis if gi in Context._support(den)]
        if not present:
            break
        guard += 1
        if guard > 8 * len(rad_gis) + 8:
            raise JetError("radical rationalization did not terminate")
        gi = present[0]
        rad = next(r for g, r in ctx._radical_gen_indices() if g == gi)
        parts = _radical_degrees(ctx, den, gi)
        if len(parts) == 1:
            # monomial in w: 1/(c*w^k) = w^(m-k)/(c*base)
            (k, c), = parts.items()
            w_gen_monom = [0] * len(ctx._names)
            w_gen_monom[gi] = rad.index - k
            num = _reduce_radicals(
                ctx, num * ctx.ring.from_dict({tuple(w_gen_monom): QQ(1)}))
            den = c * rad.base
        else:
            # den = h(w): 1/h = inv_num/inv_den mod (w^m - base), inv_den w-free
            inv_num, inv_den = _invert_radical_poly(ctx, parts, rad, gi)
            num = _reduce_radicals(ctx, num * inv_num)
            den = inv_den
        den = _reduce_radicals(ctx, den)
    return ctx.field.new(num, den)


def _invert_radical_poly(ctx, parts, rad, gi):
    """Invert h(w) modulo w^m - base via extended Euclid over the field
    of radical-free fractions.  Returns (numer, denom) of 1/h with the
    denominator radical-free."""
    field = ctx.field
    m = rad.index
    base = field.new(rad.base, ctx.ring.one)

    def as_coeff_list(d, deg):
        return [field.new(d.get(e, ctx.ring.zero), ctx.ring.one)
                for e in range(deg + 1)]

    h = as_coeff_list(parts, max(parts))
    mod = [(-base) if e == 0 else (field.one if e == m else field.zero)
           for e in range(m + 1)]

    def deg(p):
        for i in range(len(p) - 1, -1, -1):
            if p[i] != 0:
                return i
        return -1

    def trim(p):
        d = deg(p)
        return p[: d + 1] if d >= 0 else []

    def polymul(a, b):
        out = [field.zero] * (len(a) + len(b) - 1) if a and b else []
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                if bj == 0:
                    continue
                out[i + j] = out[i + j] + ai * bj
        return trim(out)

    def polysub(a, b):
        n = max(len(a), len(b))
        out = [(a[i] if i < len(a) else field.zero) -
               (b[i] if i < len(b) else field.zero) for i in range(n)]
        return trim(out)

    def polydivmod(a, b):
        a = list(a)
        db, qout = deg(b), [field.zero] * max(len(a) - len(b) + 1, 1)
        inv_lead = field.one / b[db]
        while deg(a) >= db:
            da = deg(a)
            c = a[da] * inv_lead
            qout[da - db] = c
            for i in range(db + 1):
                a[da - db + i] = a[da - db + i] - c * b[i]
            a = trim(a) + [field.zero] * 0
            if not a:
                break
        return trim(qout), trim(a)

    # extended Euclid: s*h + t*mod = g
    r0, r1 = trim(mod), trim(h)
    s0, s1 = [], [field.one]
    while deg(r1) > 0:
        q, r2 = polydivmod(r0, r1)
        r0, r1 = r1, r2
        s0, s1 = s1, polysub(s0, polymul(q, s1))
        if deg(r1) < 0:
            raise JetError("radical relation is reducible; zero divisor met")
    unit = r1[0]  # nonzero field element
    inv_coeffs = [c / unit for c in s1]
    # assemble sum inv_k * w^k as a single fraction
    total = field.zero
    for k, c in enumerate(inv_coeffs):
        w_monom = [0] * len(ctx._names)
        w_monom[gi] = k
        wk = field.new(ctx.ring.from_dict({tuple(w_monom): QQ(1)}), ctx.ring.one)
        total = total + c * wk
    return total.numer, total.denom


# ---------------------------------------------------------------------------
# expression values
# ---------------------------------------------------------------------------


class JetExpression:
    """Immutable rational expression over a :class:`Context`.

    Arithmetic normalizes eagerly.  ``restrictions`` carries the numerators
    of every divisor met while building the expression, so that evaluation
    can reject points where the construction divided by zero even when the
    quotient itself simplified.
    """

    __slots__ = ("ctx", "frac", "restrictions", "_raw")

    # keep pre-normalization images only while they stay small; beyond this
    # the probabilistic cross-check of the reduction step is skipped
    _RAW_TERM_CAP = 20000

    def __init__(self, ctx, frac, restrictions=frozenset()):
        self.ctx = ctx
        normalized = _normalize(ctx, frac)
        self.frac = normalized
        self.restrictions = restrictions
        # One-step pre-normalization image, kept when the radical reduction
        # actually rewrote something, so the probabilistic zero test can
        # confirm that reduction independently.
        raw = None
        if ctx.radicals and frac != normalized:
            if len(frac.numer) + len(frac.denom) <= self._RAW_TERM_CAP:
                raw = frac
        self._raw = raw

    # -- coercion ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, JetExpression):
            if other.ctx is not self.ctx:
                raise ValueError("mixed contexts; lift explicitly")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.rational(other)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return JetExpression(self.ctx, self.frac + other.frac,
                             self.restrictions | other.restrictions)

    __radd__ = __add__

    def __neg__(self):
        return JetExpression(self.ctx, -self.frac, self.restrictions)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return JetExpression(self.ctx, self.frac - other.frac,
                             self.restrictions | other.restrictions)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return JetExpression(self.ctx, self.frac * other.frac,
                             self.restrictions | other.restrictions)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.frac == 0:
            raise ZeroDivisionError("division by identically zero expression")
        restr = self.restrictions | other.restrictions | {other.frac.numer}
        return JetExpression(self.ctx, self.frac / other.frac, restr)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            if self.frac == 0:
                raise ZeroDivisionError("negative power of zero expression")
            return JetExpression(self.ctx, self.frac ** n,
                                 self.restrictions | {self.frac.numer})
        return JetExpression(self.ctx, self.frac ** n, self.restrictions)

    # -- structure -----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.rational(other)
        if not isinstance(other, JetExpression):
            return NotImplemented
        return self.ctx is other.ctx and self.frac == other.frac

    def __hash__(self):
        return hash((id(self.ctx), self.frac))

    def __repr__(self):
        return "JetExpression(%s)" % render(self)

    def has_radicals(self):
        gis = {gi for gi, _ in self.ctx._radical_gen_indices()}
        return bool(gis & (Context._support(self.frac.numer) |
                           Context._support(self.frac.denom)))

    def free_symbols(self):
        used = Context._support(self.frac.numer) | Context._support(self.frac.denom)
        names = set()
        for i in sorted(used):
            name = self.ctx._names[i]
            if name in self.ctx.radicals:
                names |= {self.ctx._names[j]
                          for j in Context._support(self.ctx.radicals[name].base)}
            else:
                names.add(name)
        return names

    def as_fraction(self):
        """Exact Fraction value of a constant expression."""
        num, den = self.frac.numer, self.frac.denom
        if Context._support(num) | Context._support(den):
            raise ValueError("expression is not constant")
        zero_mon = (0,) * len(self.ctx._names)
        cn = dict(num.terms()).get(zero_mon, QQ(0))
        cd = dict(den.terms()).get(zero_mon, QQ(1))
        return Fraction(int(cn.numerator), int(cn.denominator)) / \
            Fraction(int(cd.numerator), int(cd.denominator))


# ---------------------------------------------------------------------------
# parser / renderer
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, ctx, text, allow_radicals=True):
        self.ctx = ctx
        self.text = text
        self.pos = 0
        self.allow_radicals = allow_radicals
        self.tokens = self._tokenize(text)
        self.i = 0

    @staticmethod
    def _tokenize(text):
        toks = []
        i, n = 0, len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if c.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                toks.append(("int", text[i:j], i))
                i = j
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                toks.append(("name", text[i:j], i))
                i = j
                continue
            if c in "+-*/^()":
                toks.append((c, c, i))
                i += 1
                continue
            raise ParseError("unexpected character %r" % c, i)
        toks.append(("end", "", n))
        return toks

    def _peek(self):
        return self.tokens[self.i]

    def _next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        expr = self._expr()
        kind, _, pos = self._peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos)
        return expr

    def _expr(self):
        value = self._term()
        while self._peek()[0] in "+-":
            op = self._next()[0]
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self):
        value = self._unary()
        while self._peek()[0] in "*/":
            op, _, pos = self._next()
            rhs = self._unary()
            if op == "/":
                if rhs.frac == 0:
                    raise ParseError("division by zero", pos)
                value = value / rhs
            else:
                value = value * rhs
        return value

    def _unary(self):
        sign = 1
        while self._peek()[0] == "-":
            self._next()
            sign = -sign
        value = self._power()
        return value if sign == 1 else -value

    def _power(self):
        base = self._atom()
        if self._peek()[0] == "^":
            self._next()
            exp = self._exponent()
            if exp < 0 and base.frac == 0:
                raise ParseError("zero to a negative power", self._peek()[2])
            return base ** exp
        return base

    def _exponent(self):
        kind, val, pos = self._next()
        if kind == "(":
            inner = self._exponent()
            k2, _, p2 = self._next()
            if k2 != ")":
                raise ParseError("expected ')' in exponent", p2)
            return inner
        neg = False
        if kind == "-":
            neg = True
            kind, val, pos = self._next()
        if kind != "int":
            raise ParseError("expected integer exponent", pos)
        return -int(val) if neg else int(val)

    def _atom(self):
        kind, val, pos = self._next()
        if kind == "int":
            return self.ctx.rational(int(val))
        if kind == "name":
            name = self.ctx.aliases.get(val, val)
            if name in self.ctx.radicals and not self.allow_radicals:
                raise UnknownSymbolError("radical %r not allowed here" % val, pos)
            if name not in self.ctx._gen_index:
                raise UnknownSymbolError(
                    "unknown symbol %r (declare it as a parameter)" % val, pos)
            return self.ctx.symbol(name)
        if kind == "(":
            inner = self._expr()
            k2, _, p2 = self._next()
            if k2 != ")":
                raise ParseError("expected ')'", p2)
            return inner
        raise ParseError("unexpected token %r" % val, pos)


def parse(ctx, text):
    return ctx.parse(text)


def combination(ctx, terms):
    """Sum of coefficient * product-of-factors with one final reduction.

    ``terms`` is an iterable of (Fraction, [JetExpression, ...]).  Numerators
    and denominators are multiplied raw and accumulated over a running
    common denominator; the single final cancellation makes identically
    zero combinations (the typical case for identity checking) cheap, since
    no gcd ever runs on the intermediate swell.
    """
    N = ctx.ring.zero
    D = ctx.ring.one
    restr = set()
    for coeff, factors in terms:
        tn = ctx.ring.ground_new(_to_qq(Fraction(coeff)))
        td = ctx.ring.one
        for f in factors:
            tn = tn * f.frac.numer
            td = td * f.frac.denom
            restr |= f.restrictions
        N, D = _accumulate(N, D, tn, td)
    return JetExpression(ctx, ctx.field.new(N, D), frozenset(restr))


def _accumulate(N, D, tn, td):
    """(N/D) + (tn/td) unreduced, with divisibility fast paths so towers of
    a common denominator never hit a polynomial gcd."""
    if td == D:
        return N + tn, D
    q, r = divmod(td, D)
    if not r:  # D | td
        return N * q + tn, td
    q, r = divmod(D, td)
    if not r:  # td | D
        return N + tn * q, D
    g = D.gcd(td)
    d_over = td.quo(g)
    return N * d_over + tn * D.quo(g), D * d_over


def sum_expressions(exprs, ctx):
    """Sum many expressions with one final cancellation.

    Accumulates numerators over a running common denominator (lcm via one
    gcd per distinct denominator), instead of re-reducing after every
    pairwise addition; the difference is decisive for long sums of
    rational functions sharing a denominator."""
    N = ctx.ring.zero
    D = ctx.ring.one
    restr = set()
    for e in exprs:
        if isinstance(e, (int, Fraction)):
            e = ctx.rational(e)
        if e.frac == 0:
            restr |= e.restrictions
            continue
        n, d = e.frac.numer, e.frac.denom
        restr |= e.restrictions
        N, D = _accumulate(N, D, n, d)
    return JetExpression(ctx, ctx.field.new(N, D), frozenset(restr))


def _render_coeff(c):
    num, den = int(c.numerator), int(c.denominator)
    return str(num) if den == 1 else "%d/%d" % (num, den)


def _render_poly(ctx, poly):
    if not poly:
        return "0"
    parts = []
    for monom, coeff in poly.terms():
        factors = []
        for i, e in enumerate(monom):
            if e == 1:
                factors.append(ctx._names[i])
            elif e > 1:
                factors.append("%s^%d" % (ctx._names[i], e))
        cstr = _render_coeff(abs_coeff(coeff))
        body = "*".join(factors)
        if body:
            term = body if cstr == "1" else "%s*%s" % (cstr, body)
        else:
            term = cstr
        parts.append(("-" if coeff < 0 else "+", term))
    first_sign, first_term = parts[0]
    out = ("-" if first_sign == "-" else "") + first_term
    for sign, term in parts[1:]:
        out += " %s %s" % (sign, term)
    return out


def abs_coeff(c):
    return -c if c < 0 else c


def render(expr):
    """Canonical text form; stable, and re-parses to the same normal form."""
    num, den = expr.frac.numer, expr.frac.denom
    ns = _render_poly(expr.ctx, num)
    if den == expr.ctx.ring.one:
        return ns
    return "(%s)/(%s)" % (ns, _render_poly(expr.ctx, den))


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------


def partial(expr, symbol):
    """Formal partial derivative with respect to a coordinate or parameter.

    Radical symbols follow the chain rule of their defining relation:
    d(w)/dv = (d(base)/dv) * w / (index * base).
    """
    ctx = expr.ctx
    name = ctx.aliases.get(symbol, symbol)
    if name not in ctx._gen_index or name in ctx.radicals:
        raise KeyError("not a declared coordinate or parameter: %r" % symbol)
    gen = ctx.field.gens[ctx._gen_index[name]]
    total = expr.frac.diff(gen)
    for rname in ctx._rad_order:
        rad = ctx.radicals[rname]
        rgen = ctx.field.gens[ctx._gen_index[rname]]
        dfdw = expr.frac.diff(rgen)
        if dfdw == 0:
            continue
        dbase = rad.base.diff(ctx.ring.gens[ctx._gen_index[name]])
        if not dbase:
            continue
        base_f = ctx.field.new(rad.base, ctx.ring.one)
        dw = ctx.field.new(dbase, ctx.ring.one) * rgen / (rad.index * base_f)
        total = total + dfdw * dw
    restr = expr.restrictions
    if ctx.radicals:
        restr = restr | {ctx.radicals[r].base for r in ctx._rad_order
                         if expr.frac.diff(ctx.field.gens[ctx._gen_index[r]]) != 0}
    return JetExpression(ctx, total, restr)


@dataclass(frozen=True)
class OdeDefinition:
    """An ODE y^(order) = rhs on the jet space of order-1 jets below it."""

    order: int
    rhs: JetExpression
    name: str = ""

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be positive")
        n = self.order - 1
        allowed = {"x", "y"} | {"y%d" % k for k in range(1, n + 1)}
        extra = self.rhs.free_symbols() - allowed - set(self.rhs.ctx.params)
        if extra:
            raise ValueError(
                "rhs references jet coordinates above y%d: %r" % (n, sorted(extra)))

    @property
    def ctx(self):
        return self.rhs.ctx


def total_derivative(expr, ode):
    """The total derivative along solutions:
    D = d/dx + sum_k y_k d/dy_(k-1) + rhs * d/dy_n."""
    ctx = expr.ctx
    if ode.ctx is not ctx:
        raise ValueError("expression and ODE live in different contexts")
    n = ode.order - 1
    parts = [partial(expr, "x")]
    prev = "y"
    for k in range(1, n + 1):
        yk = ctx.symbol("y%d" % k)
        parts.append(yk * partial(expr, prev))
        prev = "y%d" % k
    parts.append(ode.rhs * partial(expr, "y%d" % n))
    return sum_expressions(parts, ctx)


# ---------------------------------------------------------------------------
# zero testing
# ---------------------------------------------------------------------------


def _eval_poly_mod(ctx, poly, point, p):
    total = 0
    for monom, coeff in poly.terms():
        cn = int(coeff.numerator) % p
        cd = int(coeff.denominator) % p
        val = cn * pow(cd, p - 2, p) % p
        for i, e in enumerate(monom):
            if e:
                val = val * pow(point[i], e, p) % p
        total = (total + val) % p
    return total


def _sqrt_mod(a, p):
    """Tonelli-Shanks; None when a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _nth_root_mod(a, m, p):
    """Some m-th root of a mod p, or None if no root exists.

    Requires gcd(odd_part(m), p-1) == 1, which SZ_PRIME guarantees for
    all radical indices in use (built from 2, 3 and 5).
    """
    a %= p
    if a == 0:
        return 0
    t = m
    s = 0
    while t % 2 == 0:
        t //= 2
        s += 1
    if t > 1:
        from math import gcd
        if gcd(t, p - 1) != 1:
            raise JetError("prime incompatible with radical index %d" % m)
        a = pow(a, pow(t, -1, p - 1), p)
    for _ in range(s):
        a = _sqrt_mod(a, p)
        if a is None:
            return None
    return a


def _sz_sample(ctx, frac, restrictions, rng, p):
    """Evaluate frac at one random consistent point of GF(p).

    Returns an element of GF(p), or None when the point must be rejected
    (denominator or restriction vanished, or a radical had no root)."""
    names = ctx._names
    point = [0] * len(names)
    for i, name in enumerate(names):
        if name not in ctx.radicals:
            point[i] = rng.randrange(1, p)
    for rname in ctx._rad_order:
        rad = ctx.radicals[rname]
        bval = _eval_poly_mod(ctx, rad.base, point, p)
        root = _nth_root_mod(bval, rad.index, p)
        if root is None:
            return None
        point[ctx._gen_index[rname]] = root
    den = _eval_poly_mod(ctx, frac.denom, point, p)
    if den == 0:
        return None
    for rpoly in restrictions:
        if _eval_poly_mod(ctx, rpoly, point, p) == 0:
            return None
    num = _eval_poly_mod(ctx, frac.numer, point, p)
    return num * pow(den, p - 2, p) % p


def is_zero_probabilistic(expr, points=32, seed=0, prime=SZ_PRIME):
    """Schwartz-Zippel zero test at ``points`` random points of GF(prime).

    Radical symbols are instantiated by consistent roots mod p; any
    consistent instantiation of an identically zero expression evaluates
    to zero, and a nonzero one survives with the documented bound.
    Raises :class:`InconclusiveError` if every sample hit a pole.
    """
    rng = random.Random(seed)
    frac = expr._raw if expr._raw is not None else expr.frac
    good = 0
    attempts = 0
    max_attempts = 40 * points + 100
    while good < points:
        attempts += 1
        if attempts > max_attempts:
            if good == 0:
                raise InconclusiveError(
                    "all %d sampled points hit poles or missing roots" % attempts)
            break
        val = _sz_sample(expr.ctx, frac, expr.restrictions, rng, prime)
        if val is None:
            continue
        if val != 0:
            return False
        good += 1
    return True


def is_zero(expr, seed=0):
    """True iff the expression is identically zero on its domain.

    Radical-free path: exact (canonical reduced fraction).  Radical path:
    normal form modulo the defining relations, cross-checked at 32 random
    points of GF(SZ_PRIME) whenever a pre-reduction image is available;
    disagreement raises :class:`InconsistencyError`.
    """
    if isinstance(expr, (int, Fraction)):
        return expr == 0
    exact = expr.frac == 0
    if not expr.ctx.radicals:
        return exact
    involved = expr.has_radicals() or expr._raw is not None
    if not involved:
        return exact
    try:
        prob = is_zero_probabilistic(expr, points=32, seed=seed)
    except InconclusiveError:
        raise
    if prob != exact:
        raise InconsistencyError(
            "normal-form zero test (%s) disagrees with probabilistic test (%s) "
            "for %s" % (exact, prob, render(expr)))
    return exact


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _eval_poly_exact(ctx, poly, values):
    total = Fraction(0)
    for monom, coeff in poly.terms():
        val = Fraction(int(coeff.numerator), int(coeff.denominator))
        for i, e in enumerate(monom):
            if e:
                val *= values[i] ** e
        total += val
    return total


def _eval_poly_numeric(ctx, poly, values):
    total = mp.mpc(0)
    for monom, coeff in poly.terms():
        val = mp.mpf(int(coeff.numerator)) / mp.mpf(int(coeff.denominator))
        term = mp.mpc(val)
        for i, e in enumerate(monom):
            if e:
                term *= values[i] ** e
        total += term
    return total


def evaluate(expr, assignment, digits=50, branches=None):
    """Evaluate at a point.

    Exact Fraction result when the expression is radical-free and all
    values are rational; otherwise an mpmath complex at ``digits`` working
    digits.  Radicals take the principal real root when their base value
    is positive real; any other base value requires a declared branch
    (an explicit value, or an integer k selecting principal * e^(2*pi*i*k/m)).
    """
    ctx = expr.ctx
    assignment = {ctx.aliases.get(k, k): v for k, v in assignment.items()}
    missing = expr.free_symbols() - set(assignment)
    if missing:
        raise ValueError("assignment missing symbols: %r" % sorted(missing))

    rad_gis = {gi for gi, _ in ctx._radical_gen_indices()}
    restr_radical = any(rad_gis & Context._support(p)
                        for p in expr.restrictions)
    exact_ok = (not expr.has_radicals() and not restr_radical and
                all(isinstance(v, (int, Fraction))
                    for k, v in assignment.items()))
    if exact_ok:
        values = [Fraction(assignment.get(n, 0)) for n in ctx._names]
        den = _eval_poly_exact(ctx, expr.frac.denom, values)
        if den == 0:
            raise PoleError("denominator vanishes at the point")
        for rpoly in expr.restrictions:
            if _eval_poly_exact(ctx, rpoly, values) == 0:
                raise PoleError("construction divided by zero at the point")
        return _eval_poly_exact(ctx, expr.frac.numer, values) / den

    frac_support = (Context._support(expr.frac.numer) |
                    Context._support(expr.frac.denom))
    with mp.workdps(digits):
        values = [mp.mpc(0)] * len(ctx._names)
        for i, n in enumerate(ctx._names):
            if n in assignment:
                v = assignment[n]
                if isinstance(v, Fraction):
                    values[i] = mp.mpf(v.numerator) / mp.mpf(v.denominator)
                else:
                    values[i] = mp.mpc(v)
        for rname in ctx._rad_order:
            rad = ctx.radicals[rname]
            bval = _eval_poly_numeric(ctx, rad.base, values)
            gi = ctx._gen_index[rname]
            branch = (branches or {}).get(rname)
            # a radical appearing only in construction restrictions is
            # instantiated on any branch: only vanishing matters there
            restriction_only = gi not in frac_support
            if branch is not None and not isinstance(branch, int):
                wval = mp.mpc(branch)
                if mp.fabs(wval ** rad.index - bval) > mp.mpf(10) ** (-digits // 2):
                    raise BranchError("declared branch for %r does not satisfy "
                                      "its defining relation" % rname)
            else:
                if mp.fabs(mp.im(bval)) == 0 and mp.re(bval) >= 0:
                    wval = mp.mpf(mp.re(bval)) ** (mp.mpf(1) / rad.index)
                elif branch is None and not restriction_only:
                    raise BranchError(
                        "radical %r evaluated off the positive real axis; "
                        "declare a branch" % rname)
                else:
                    wval = bval ** (mp.mpf(1) / rad.index)
                if isinstance(branch, int) and branch:
                    wval *= mp.exp(2j * mp.pi * branch / rad.index)
            values[gi] = wval
        tol = mp.mpf(10) ** (-(digits - 5))
        den = _eval_poly_numeric(ctx, expr.frac.denom, values)
        if mp.fabs(den) < tol:
            raise PoleError("denominator vanishes at the point")
        for rpoly in expr.restrictions:
            if mp.fabs(_eval_poly_numeric(ctx, rpoly, values)) < tol:
                raise PoleError("construction divided by zero at the point")
        return _eval_poly_numeric(ctx, expr.frac.numer, values) / den
