import random
from fractions import Fraction

import pytest

from gl2g2 import jetexpr as J
from gl2g2 import odeclass as O


# ---------------------------------------------------------------------------
# independently re-keyed copies of the five conditions (atoms as symbols,
# parsed text mirroring the printed layout line by line)
# ---------------------------------------------------------------------------

REKEYED = {
    1: "245*D2F6 - 245*D1F5 + 98*F4 - 210*D1F6*F6 + 70*F5*F6 + 20*F6^3",
    2: "6860*D2F5 - 10976*D1F4 + 6615*D1F6^2 + 6860*F3 - 8330*D1F6*F5"
       " + 1715*F5^2 - 1960*D1F5*F6 + 1568*F4*F6 - 1890*D1F6*F6^2"
       " + 1190*F5*F6^2 + 135*F6^4",
    3: "9604*D2F4 - 24010*D1F3 + 15435*D1F5*D1F6 + 24010*F2 - 14749*D1F6*F4"
       " - 5145*D1F5*F5 + 4459*F4*F5 - 2744*D1F4*F6 + 6615*D1F6^2*F6"
       " + 3430*F3*F6 - 6615*D1F6*F5*F6 + 1470*F5^2*F6 - 2205*D1F5*F6^2"
       " + 2107*F4*F6^2 - 1890*D1F6*F6^3 + 945*F5*F6^3 + 135*F6^5",
    4: "336140*D2F3 - 1344560*D1F2 + 180075*D1F5^2 + 432180*D1F4*D1F6"
       " + 2352980*F1 - 624260*D1F6*F3 - 216090*D1F5*F4 + 64827*F4^2"
       " - 144060*D1F4*F5 + 154350*D1F6^2*F5 + 192080*F3*F5"
       " - 102900*D1F6*F5^2 + 17150*F5^3 - 96040*D1F3*F6"
       " + 308700*D1F5*D1F6*F6 + 192080*F2*F6 - 246960*D1F6*F4*F6"
       " - 154350*D1F5*F5*F6 + 113190*F4*F5*F6 - 61740*D1F4*F6^2"
       " + 132300*D1F6^2*F6^2 + 89180*F3*F6^2 - 176400*D1F6*F5*F6^2"
       " + 47775*F5^2*F6^2 - 44100*D1F5*F6^3 + 35280*F4*F6^3"
       " - 37800*D1F6*F6^4 + 22050*F5*F6^4 + 2700*F6^6",
    5: "2352980*D2F2 - 16470860*D1F1 + 1512630*D1F4*D1F5"
       " + 2268945*D1F3*D1F6 - 5126135*D1F6*F2 - 1512630*D1F5*F3"
       " - 907578*D1F4*F4 + 648270*D1F6^2*F4 + 907578*F3*F4"
       " - 756315*D1F3*F5 + 1080450*D1F5*D1F6*F5 + 1596665*F2*F5"
       " - 1080450*D1F6*F4*F5 - 360150*D1F5*F5^2 + 288120*F4*F5^2"
       " - 672280*D1F2*F6 + 540225*D1F5^2*F6 + 1296540*D1F4*D1F6*F6"
       " + 2352980*F1*F6 - 1620675*D1F6*F3*F6 - 864360*D1F5*F4*F6"
       " + 324135*F4^2*F6 - 648270*D1F4*F5*F6 + 926100*D1F6^2*F5*F6"
       " + 756315*F3*F5*F6 - 771750*D1F6*F5^2*F6 + 154350*F5^3*F6"
       " - 324135*D1F3*F6^2 + 926100*D1F5*D1F6*F6^2 + 732305*F2*F6^2"
       " - 926100*D1F6*F4*F6^2 - 617400*D1F5*F5*F6^2 + 524790*F4*F5*F6^2"
       " - 185220*D1F4*F6^3 + 396900*D1F6^2*F6^3 + 231525*F3*F6^3"
       " - 661500*D1F6*F5*F6^3 + 209475*F5^2*F6^3 - 132300*D1F5*F6^4"
       " + 119070*F4*F6^4 - 113400*D1F6*F6^5 + 75600*F5*F6^5 + 8100*F6^7"
       " + 65883440*F0",
}


def test_transcription_against_rekeyed_copy():
    exprs, deriv = O.wunschmann7_formal()
    rng = random.Random(17)
    names = [n for n in deriv.ctx.params]
    for trial in range(3):
        point = {n: Fraction(rng.randint(-20, 20), rng.randint(1, 7))
                 for n in names}
        for i in range(5):
            mine = J.evaluate(exprs[i], point)
            other = J.evaluate(deriv.ctx.parse(REKEYED[i + 1]), point)
            assert mine == other, "condition %d differs from re-keyed copy" % (i + 1)


def test_formal_w1_matches_general_shape():
    # 245 * (order-6 general shape) == the first assembled condition,
    # termwise over a formal right-hand side
    exprs, deriv = O.wunschmann7_formal()
    w1_shape = O._w1_shape(deriv, 6)
    assert J.is_zero(245 * w1_shape - exprs[0])


# ---------------------------------------------------------------------------
# the vanishing conditions on the catalog
# ---------------------------------------------------------------------------

def test_trivial_all_vanish():
    rep = O.wunschmann7(O.catalog("trivial"))
    assert rep.vanishing == (True,) * 5


def test_cusp_and_submax_vanish():
    for name in ("cusp", "submax"):
        rep = O.wunschmann7(O.catalog(name))
        assert rep.vanishing == (True,) * 5
        assert all(w.mode == "exact-normal-form" for w in rep.witnesses)


def test_example2_vanishes_exactly():
    rep = O.wunschmann7(O.catalog("example2"))
    assert rep.vanishing == (True,) * 5
    assert all(w.mode == "exact-normal-form" for w in rep.witnesses)


def test_example4_vanishes_probabilistically():
    rep = O.wunschmann7(O.catalog("example4"))
    assert rep.vanishing == (True,) * 5
    assert all(w.mode == "probabilistic-64pt" for w in rep.witnesses)


def test_rhs_y_fails_with_exact_tail_value():
    ctx = J.jet_context(6)
    rep = O.wunschmann7(J.OdeDefinition(7, ctx.symbol("y"), "rhs-y"))
    assert rep.vanishing == (True, True, True, True, False)
    assert rep.witnesses[4].render() == "65883440"


def test_wrong_order_rejected():
    ctx = J.jet_context(3)
    ode = J.OdeDefinition(4, ctx.symbol("y2"), "low")
    with pytest.raises(ValueError):
        O.wunschmann7(ode)


# ---------------------------------------------------------------------------
# the general order-n condition
# ---------------------------------------------------------------------------

def test_w1_general_zero_rhs():
    for n in (2, 4, 6):
        ctx = J.jet_context(n)
        assert J.is_zero(O.w1_general(n, ctx.zero()))


def test_w1_general_n2_hand_oracle():
    # F = y2^2 at n=2: D(F2) = 2F, D^2(F2) = 4 y2 F, so the six-term shape
    # collapses to -(4/9) y2^3
    ctx = J.jet_context(2)
    y2 = ctx.symbol("y2")
    got = O.w1_general(2, y2 ** 2)
    assert J.is_zero(got + Fraction(4, 9) * y2 ** 3)


def test_w1_general_rejects_small_n():
    ctx = J.jet_context(1)
    with pytest.raises(ValueError):
        O.w1_general(1, ctx.zero())


# ---------------------------------------------------------------------------
# torsion-type conditions
# ---------------------------------------------------------------------------

def test_fg_trivial_torsion_free():
    rep = O.fg_conditions(O.catalog("trivial"))
    assert rep.type_label == ()
    assert rep.lee_form_closed is True
    assert rep.dtheta_v3 == "implied_zero"


def test_fg_cusp_type():
    rep = O.fg_conditions(O.catalog("cusp"))
    assert rep.type_label == ("W2", "W4")
    assert rep.lam.is_zero and rep.tau3.is_zero
    assert not rep.tau2.is_zero
    # hand value of the 14-part witness: 294/(5 y4)
    ctx = O.catalog("cusp").ctx
    # rebuild to compare in the same context
    ode = O.catalog("cusp")
    rep = O.fg_conditions(ode)
    y4 = ode.ctx.symbol("y4")
    assert J.is_zero(rep.tau2.expression - Fraction(294, 5) / y4)


def test_fg_submax_type():
    ode = O.catalog("submax")
    rep = O.fg_conditions(ode)
    assert rep.type_label == ("W1", "W4")
    assert rep.tau2.is_zero and rep.tau3.is_zero
    assert not rep.lam.is_zero
    # hand value of the scalar witness: 98/(5 y3)
    y3 = ode.ctx.symbol("y3")
    assert J.is_zero(rep.lam.expression - Fraction(98, 5) / y3)
    # the Lee form is closed for this geometry
    assert rep.lee_form_closed is True


def test_fg_not_applicable_reported():
    ctx = J.jet_context(6)
    ode = J.OdeDefinition(7, ctx.symbol("y"), "rhs-y")
    with pytest.raises(O.GeometryNotAdmittedError):
        O.fg_conditions(ode)


def test_fg_example2_matches_coframe_side():
    # ODE-side witnesses: scalar and 14-part vanish, 27-part survives --
    # the same pattern the coframe-side decomposition shows
    rep = O.fg_conditions(O.catalog("example2"))
    assert rep.lam.is_zero
    assert rep.tau2.is_zero
    assert not rep.tau3.is_zero
    assert rep.type_label == ("W3", "W4")
    assert rep.lee_form_closed is True


def test_fg_example4():
    rep = O.fg_conditions(O.catalog("example4"))
    assert rep.lam.is_zero
    assert not rep.tau3.is_zero
    assert rep.lee_form_closed is False  # no closing conformal gauge


def test_example4_atom_oracles():
    # hand-differentiated closed forms for the fractional-power rhs
    ode = O.catalog("example4")
    ctx = ode.ctx
    w, u = ctx.symbol("w"), ctx.symbol("y6")
    F6 = J.partial(ode.rhs, "y6")
    assert J.is_zero(F6 - Fraction(7, 6) * w)
    F66 = J.partial(F6, "y6")
    assert J.is_zero(F66 - Fraction(7, 36) * w / u)
    Dw = J.total_derivative(w, ode)
    assert J.is_zero(Dw - w ** 2 * Fraction(1, 6))


# ---------------------------------------------------------------------------
# classifier pipeline
# ---------------------------------------------------------------------------

def test_classify_catalog_types():
    assert O.classify(O.catalog("trivial")).fg.type_label == ()
    assert O.classify(O.catalog("cusp")).fg.type_label == ("W2", "W4")
    assert O.classify(O.catalog("submax")).fg.type_label == ("W1", "W4")


def test_classify_non_admitting():
    ctx = J.jet_context(6)
    rep = O.classify(J.OdeDefinition(7, ctx.symbol("y"), "rhs-y"))
    assert not rep.admits_structure
    assert rep.fg is None and not rep.fg_applicable


def test_contact_invariance_spot_check():
    # x -> x, y -> 2y maps the trivial equation to itself; the reports agree
    ctx = J.jet_context(6)
    before = O.classify(O.catalog("trivial"))
    after = O.classify(J.OdeDefinition(7, ctx.zero(), "rescaled-trivial"))
    assert before.wunschmann.vanishing == after.wunschmann.vanishing
    assert before.fg.type_label == after.fg.type_label


def test_catalog_names_and_errors():
    assert set(O.catalog_names()) == {"trivial", "cusp", "submax", "example2",
                                      "example4"}
    with pytest.raises(KeyError):
        O.catalog("none-such")


def test_wunschmann_report_carries_general_first_on_request():
    ode = O.catalog("cusp")
    rep = O.wunschmann7(ode, include_general_first=True)
    assert rep.order_n_first is not None
    # 245 x the general shape equals the first assembled condition
    assert J.is_zero(245 * rep.order_n_first - rep.witnesses[0].expression)
    assert O.wunschmann7(ode).order_n_first is None
