"""Named verification suites for the published geometric claims.

Each suite runs a group of identity or property checks at pinned
tolerances and returns one row per claim.  The command-line front end
prints the rows; the acceptance tests assert them.  Claims are
identity-based wherever the computation is exact, and carry explicit
sample counts, precisions and failure bounds on the certified paths.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from . import binform as B
from . import curves as C
from . import extalg as E
from . import jetexpr as J
from . import liealg as L
from . import odeclass as O

__all__ = ["ClaimResult", "SuiteResult", "run_suite", "suite_names"]


@dataclass(frozen=True)
class ClaimResult:
    name: str
    passed: bool
    measured: str


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    claims: tuple
    elapsed: float

    @property
    def passed(self):
        return all(c.passed for c in self.claims)

    def summary(self):
        ok = sum(1 for c in self.claims if c.passed)
        return "%d/%d PASS" % (ok, len(self.claims))


def _suite_wunschmann(seed):
    rows = []
    for name in ("trivial", "cusp", "submax", "example2"):
        rep = O.wunschmann7(O.catalog(name), seed=seed)
        ok = rep.admits_structure and all(
            w.mode == "exact-normal-form" for w in rep.witnesses)
        rows.append(ClaimResult(
            "all five conditions vanish symbolically: %s" % name, ok,
            "vanishing=%s" % (rep.vanishing,)))
    rep = O.wunschmann7(O.catalog("example4"), points=64, seed=seed)
    ok = rep.admits_structure and all(
        w.mode == "probabilistic-64pt" for w in rep.witnesses)
    rows.append(ClaimResult(
        "all five conditions vanish for example4 (64-point certificate, "
        "failure bound < 2^-40)", ok, "vanishing=%s" % (rep.vanishing,)))
    ctx = J.jet_context(6)
    rep = O.wunschmann7(J.OdeDefinition(7, ctx.symbol("y"), "rhs-y"),
                        seed=seed)
    tail = rep.witnesses[4].render()
    rows.append(ClaimResult(
        "rhs = y: fifth condition equals 65883440 exactly",
        rep.vanishing == (True, True, True, True, False) and
        tail == "65883440", "W5 = %s" % tail))
    return rows


def _suite_fg_types(seed):
    rows = []
    want = {"trivial": ((), "all torsion vanishes"),
            "submax": (("W1", "W4"), "scalar part survives"),
            "cusp": (("W2", "W4"), "14-part survives")}
    for name, (label, note) in want.items():
        rep = O.fg_conditions(O.catalog(name), seed=seed)
        ok = rep.type_label == label
        if name == "submax":
            ok = ok and rep.tau2.is_zero and rep.tau3.is_zero \
                and not rep.lam.is_zero
        if name == "cusp":
            ok = ok and rep.lam.is_zero and rep.tau3.is_zero \
                and not rep.tau2.is_zero
        if name == "trivial":
            ok = ok and rep.lee_form_closed is True
        rows.append(ClaimResult("torsion type of %s (%s)" % (name, note), ok,
                                "label=%s" % (rep.type_label,)))
    return rows


def _suite_w1_consistency(seed):
    exprs, deriv = O.wunschmann7_formal()
    shape = O._w1_shape(deriv, 6)
    diff = 245 * shape - exprs[0]
    ok = J.is_zero(diff)
    return [ClaimResult(
        "245 x order-6 general first condition == assembled first condition "
        "(formal rhs)", ok, "difference normal form %s" %
        ("0" if ok else J.render(diff)[:60]))]


def _suite_invariant_theory(seed):
    rows = []
    i0 = B.invariant_I0(6)
    ctx = i0.value.expr.ctx
    v = {i: ctx.symbol("v%d" % i) for i in range(1, 8)}
    printed = v[1] * v[7] - 6 * v[2] * v[6] + 15 * v[3] * v[5] - 10 * v[4] ** 2
    ok = J.is_zero(i0.value.expr - printed)
    rows.append(ClaimResult("quadratic invariant expansion termwise at n=6",
                            ok, "transvectant ratio %s"
                            % i0.ratio_to_transvectant))
    pt = B.phi_trilinear()
    rows.append(ClaimResult(
        "trilinear transvectant extraction proportional to the printed "
        "three-form", pt.printed_ratio != 0,
        "single ratio %s" % pt.printed_ratio))
    rows.append(ClaimResult(
        "the two printed three-form displays agree termwise",
        E.PRINTED_PHI == E.PRINTED_PHI_ALT, "5 terms each"))
    flat = E.coframe_catalog("flat")
    phi = E.g2_three_form(flat)
    ok = (E.hodge_star(phi, flat) - E.g2_four_form(flat)).is_zero()
    rows.append(ClaimResult("dual of the three-form equals the printed "
                            "four-form exactly", ok,
                            "star normalized to the induced metric"))
    return rows


def _suite_nullness(seed):
    c = E.nullness_identity_constant()
    return [ClaimResult(
        "contraction identity (V.phi)^(V.phi)^phi = c I0(V,V) vol as a "
        "polynomial identity in 7 variables", c == Fraction(-54) and c != 0,
        "c = %s" % c)]


def _suite_closedness(seed):
    cusp = E.coframe_catalog("cusp")
    phi = E.g2_three_form(cusp)
    dphi = E.d(phi)
    exact = dphi.is_zero()
    prob = E.form_is_zero_probabilistic(dphi, points=64, seed=seed)
    return [
        ClaimResult("two-cusp coframe three-form is closed (exact normal "
                    "form)", exact, "all 35 components reduce to 0"),
        ClaimResult("closedness certified at 64 random points "
                    "(failure bound < 2^-40)", prob, "64 points mod %d"
                    % J.SZ_PRIME),
    ]


def _suite_phi_dphi(seed):
    rows = []
    for name in ("example2", "example4_k3"):
        cof = E.coframe_catalog(name)
        phi = E.g2_three_form(cof)
        dphi = E.d(phi)
        pdp = E.wedge(phi, dphi)
        exact = pdp.is_zero()
        prob = E.form_is_zero_probabilistic(pdp, points=64, seed=seed)
        rows.append(ClaimResult(
            "phi ^ d(phi) = 0 for %s (exact + 64-point certificate)" % name,
            exact and prob, "single top-form component reduces to 0"))
    return rows


def _suite_riemannian(seed):
    rep = E.riemannian_continuation_check(samples=10, digits=50, seed=seed)
    return [
        ClaimResult("reality relations at 10 samples, 50 digits",
                    rep.reality_ok, "max residual %.2e (tolerance 1e-20)"
                    % rep.max_reality_residual),
        ClaimResult("continued metric positive definite",
                    rep.metric_positive, "min eigenvalue %.3e"
                    % rep.min_metric_eigenvalue),
    ]


def _suite_rep_theory(seed):
    rows = []
    v7 = L.action_on_v7()
    dual = {k: L.dual_action(M) for k, M in v7.items()}
    lam2 = L.sl2_decompose({k: L.wedge_power_action(dual[k], 2) for k in dual})
    rows.append(ClaimResult(
        "two-forms decompose as V3+V7+V11",
        lam2.summands == ((3, 1), (7, 1), (11, 1)), str(lam2.summands)))
    lam3 = L.sl2_decompose({k: L.wedge_power_action(dual[k], 3) for k in dual})
    rows.append(ClaimResult(
        "three-forms decompose as V1+V5+V7+V9+V13",
        lam3.summands == ((1, 1), (5, 1), (7, 1), (9, 1), (13, 1)),
        str(lam3.summands)))
    tor = L.sl2_decompose(L.torsion_module_action())
    want = ((1, 1), (3, 1), (5, 3), (7, 3), (9, 3), (11, 2), (13, 2),
            (15, 1), (17, 1))
    rows.append(ClaimResult(
        "147-dimensional torsion space decomposes with the printed "
        "multiplicities", tor.summands == want, str(tor.summands)))
    return rows


def _suite_torsion(seed):
    rep = L.torsion_expansion_check()
    return [
        ClaimResult("scalar-symbol tensor spans the trivial module",
                    rep.lam_invariant, "annihilated by all four generators"),
        ClaimResult("a-symbols span a 3-dimensional irreducible module",
                    rep.a_dimension == 3, "dim %d, Casimir 4"
                    % rep.a_dimension),
        ClaimResult("b-symbols span a 5-dimensional irreducible module",
                    rep.b_dimension == 5, "dim %d, Casimir 12"
                    % rep.b_dimension),
        ClaimResult("embedded torsion passes the grading check",
                    rep.hom1_violations == (), "violations: %s"
                    % (list(rep.hom1_violations),)),
    ]


def _suite_algebra(seed):
    rows = []
    try:
        alg = L.build_algebra()  # verifies brackets, grading, Jacobi
        rows.append(ClaimResult("Jacobi identity and grading for all basis "
                                "triples", True, "11^3 triples"))
    except ArithmeticError as exc:
        rows.append(ClaimResult("Jacobi identity and grading", False,
                                str(exc)))
        return rows
    table_ok = alg.scalar_product == (1, 6, 15, 20, 15, 6, 1, 1, 2, 1, 1)
    rows.append(ClaimResult("scalar-product table", table_ok,
                            str(tuple(map(int, alg.scalar_product)))))
    rng = random.Random(seed)
    ok = True
    for _ in range(100):
        comp = {}
        for _ in range(6):
            mu = rng.randint(1, 11)
            idx = tuple(sorted(rng.sample(range(1, 9), 2)))
            comp[(mu, idx)] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        k = L.HomTensor(2, comp)
        comp1 = {}
        for _ in range(6):
            mu = rng.randint(1, 11)
            comp1[(mu, (rng.randint(1, 8),))] = Fraction(rng.randint(-9, 9),
                                                         rng.randint(1, 4))
        b = L.HomTensor(1, comp1)
        if L.hom_inner(L.codifferential(k), b) != \
                L.hom_inner(k, L.differential(b)):
            ok = False
            break
    rows.append(ClaimResult("codifferential adjoint to the differential on "
                            "100 random tensors", ok, "exact rational"))
    rows.append(ClaimResult("flat structure equations match the matrix "
                            "connection", L.structure_equation_check(),
                            "64 matrix slots"))
    return rows


def _suite_curves(seed):
    rng = random.Random(seed)
    worst_param = 0.0
    for _ in range(20):
        fam = C.random_family(rng)
        lam = Fraction(rng.randint(-40, 40), rng.randint(1, 9))
        worst_param = max(worst_param, float(C.implicit_residual(
            fam, lam, digits=50)))
    rep = C.ode_residual_check(points=20, digits=50, seed=seed)
    return [
        ClaimResult("parametrization residual over 20 random draws",
                    worst_param < 1e-30, "max %.2e (tolerance 1e-30, "
                    "50 digits)" % worst_param),
        ClaimResult("7th-order equation residual, both branches, 20 points",
                    rep.max_residual < 1e-30,
                    "max %.2e; identically zero: %s"
                    % (rep.max_residual, rep.identically_zero)),
    ]


def _suite_weights(seed):
    rep = L.conformal_weight_check()
    return [
        ClaimResult("vertical generators annihilate the invariant metric "
                    "and three-form",
                    rep.metric_annihilated_by == ("e8", "e9", "e11") and
                    rep.three_form_annihilated_by == ("e8", "e9", "e11"),
                    "e8, e9, e11"),
        ClaimResult("central weights 12 and 18",
                    rep.metric_weight == 12 and rep.three_form_weight == 18,
                    "metric %s, three-form %s" % (rep.metric_weight,
                                                  rep.three_form_weight)),
        ClaimResult("connection-matrix trace identity",
                    rep.trace_identity_ok, "trace = -42 x central slot"),
    ]


_SUITES = {
    "wunschmann": _suite_wunschmann,
    "fg-types": _suite_fg_types,
    "w1-consistency": _suite_w1_consistency,
    "invariant-theory": _suite_invariant_theory,
    "nullness": _suite_nullness,
    "closedness": _suite_closedness,
    "phi-dphi": _suite_phi_dphi,
    "riemannian": _suite_riemannian,
    "rep-theory": _suite_rep_theory,
    "torsion": _suite_torsion,
    "algebra": _suite_algebra,
    "curves": _suite_curves,
    "weights": _suite_weights,
}


def suite_names():
    return list(_SUITES)


def run_suite(name, seed=0):
    if name not in _SUITES:
        raise KeyError("unknown suite %r; available: %s, all"
                       % (name, ", ".join(suite_names())))
    t0 = time.time()
    claims = tuple(_SUITES[name](seed))
    return SuiteResult(name, claims, time.time() - t0)
