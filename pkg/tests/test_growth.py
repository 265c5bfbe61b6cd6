"""Order functions, proximity, Jensen residuals, growth tables, error-term fits."""

import math

import numpy as np
import pytest

from nevlab.exprlang import parse, to_meromorphic
from nevlab.geometry import DivisorSpec, Hyperplane, P1xP1Flat, ProjectiveFS, TorusCurve
from nevlab.growth import (
    GrowthTable,
    LineBundle,
    canonical_bundle,
    circle_mean,
    fit_sfr,
    jensen_residual,
    log_plus_xi_mean,
    order_function,
    proximity,
)
from nevlab.jets import CurveMap

RNG = np.random.default_rng(17)


def _p1_curve(text):
    return CurveMap(ProjectiveFS(1), (parse(text), parse("1")))


def _example1():
    return CurveMap(
        P1xP1Flat(),
        (to_meromorphic(parse("exp(z)")), to_meromorphic(parse("(exp(z)+1)/(exp(z)-1)"))),
    )


# -- order function -----------------------------------------------------------


def test_order_function_exp_growth_rate():
    curve = _p1_curve("exp(z)")
    b = LineBundle((1,))
    t10 = order_function(curve, b, 10.0)
    t20 = order_function(curve, b, 20.0)
    # T(r) = r/pi + O(1) for e^z; the increment isolates the slope
    assert t20 - t10 == pytest.approx(10.0 / math.pi, abs=0.05)
    assert t10 == pytest.approx(10.0 / math.pi, abs=0.5)


def test_order_function_additive_in_degrees():
    curve = _example1()
    t11 = order_function(curve, LineBundle((1, 1)), 8.0)
    t10 = order_function(curve, LineBundle((1, 0)), 8.0)
    t01 = order_function(curve, LineBundle((0, 1)), 8.0)
    assert t11 == pytest.approx(t10 + t01, rel=1e-9)


def test_order_function_monotone_in_r():
    curve = _p1_curve("exp(z)")
    b = LineBundle((1,))
    vals = [order_function(curve, b, r) for r in (2.0, 5.0, 10.0, 15.0)]
    assert all(b2 > a for a, b2 in zip(vals, vals[1:]))


def test_canonical_bundle_degrees():
    assert canonical_bundle(ProjectiveFS(2)).degrees == (-3,)
    assert canonical_bundle(P1xP1Flat()).degrees == (-2, -2)


def test_order_function_deterministic():
    curve = _p1_curve("exp(z)")
    b = LineBundle((1,))
    assert order_function(curve, b, 12.5) == order_function(curve, b, 12.5)


# -- proximity ----------------------------------------------------------------


def test_proximity_exp_at_infinity():
    # mean of 0.5*log(1 + e^{2 r cos t}); frozen independent quadrature values
    curve = _p1_curve("exp(z)")
    inf_pt = Hyperplane((0.0, 1.0))
    assert proximity(curve, inf_pt, 10.0) == pytest.approx(3.196227459546, abs=1e-4)
    assert proximity(curve, inf_pt, 5.0) == pytest.approx(1.618070621572, abs=1e-4)


def test_proximity_identity_curve_closed_form():
    # f = z against {w = 0}: m(r) = 0.5*log((1+r^2)/r^2) exactly
    curve = _p1_curve("z")
    zero_pt = Hyperplane((1.0, 0.0))
    r = math.e
    assert proximity(curve, zero_pt, r) == pytest.approx(
        0.5 * math.log((1 + r * r) / (r * r)), abs=1e-8
    )


def test_proximity_nonnegative():
    curve = _example1()
    for comp in (TorusCurve(1, 1, 3.0), TorusCurve(2, -1, 1.5)):
        assert proximity(curve, comp, 6.0) >= 0.0


# -- first main theorem (conservation) -----------------------------------------


def test_fmt_bounded_variation():
    from nevlab.rootcount import Disc, N_trunc, locate_zeros
    from nevlab.smt import pullback_entire

    curve = _p1_curve("exp(z)")
    b = LineBundle((1,))
    # divisor {w = 1}: N carries the growth
    comp = Hyperplane((1.0, -1.0))
    h = pullback_entire(curve, comp)
    radii = [5.0, 10.0, 20.0]
    zs = locate_zeros(h, Disc(0j, max(radii) * 1.001))
    vals = [
        order_function(curve, b, r) - proximity(curve, comp, r) - N_trunc(zs, r, 16)
        for r in radii
    ]
    assert max(vals) - min(vals) <= 0.7


# -- circle means and Jensen ----------------------------------------------------


def test_circle_mean_constant():
    assert circle_mean(lambda z: np.full_like(z, 2.5, dtype=float), 3.0) == pytest.approx(2.5)


def test_circle_mean_log_abs_linear():
    # mean of log|z - a| over |z| = r is log r for |a| < r (Jensen)
    a = 0.7 + 0.2j
    val = circle_mean(lambda z: np.log(np.abs(z - a)), 4.0)
    assert val == pytest.approx(math.log(4.0), abs=1e-8)


def test_jensen_residual_corpus():
    texts = [
        "exp(z)",
        "exp(z) - 1",
        "z^2 - 2",
        "(z - 1.7)*(z + 3*i)",  # roots kept off the integration circles
        "z^3 + z + 1",
        "exp(2*z) + z",
    ]
    for text in texts:
        for r in (2.0, 5.0, 10.0):
            assert jensen_residual(parse(text), r) <= 1e-5


# -- growth table and error-term model ------------------------------------------


def _synthetic_table(radii):
    t = tuple(r / math.pi for r in radii)
    return GrowthTable(
        radii=tuple(radii),
        t_cols=(("T:O(1)", t),),
        n_cols=(),
        m_cols=(),
    )


def test_fit_sfr_recovers_log_slope():
    radii = [float(r) for r in np.geomspace(5, 40, 16)]
    table = _synthetic_table(radii)
    margins = [-(2.0 + 1.0 * math.log(r)) for r in radii]  # deficit 2 + log r
    model = fit_sfr(table, margins, eps=0.05)
    assert model.c1 == pytest.approx(1.0, abs=1e-6)
    assert model.c2 == pytest.approx(0.0, abs=1e-6)
    assert model.c0 >= 2.0 - 1e-9
    # the fitted allowance covers every non-exceptional deficit
    for r, m in zip(radii, margins):
        if r not in model.exceptional:
            assert model.allowance(r, r / math.pi) + m >= -1e-9


def test_fit_sfr_exceptional_fraction():
    radii = [float(r) for r in np.geomspace(5, 40, 20)]
    table = _synthetic_table(radii)
    margins = [-1.0] * len(radii)
    margins[7] = -1e6  # a single spike should be discarded as exceptional
    model = fit_sfr(table, margins, eps=0.05)
    assert len(model.exceptional) == 1
    assert model.exceptional[0] == pytest.approx(radii[7])


def test_growth_table_csv_deterministic():
    table = _synthetic_table([5.0, 10.0, 20.0])
    assert table.to_csv() == table.to_csv()
    assert table.to_csv().endswith("\n")
    assert table.to_csv().splitlines()[0].startswith("r,")


# -- log+ xi means ---------------------------------------------------------------


def test_log_plus_xi_mean_small_relative_to_T():
    curve = _example1()
    D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 3.0),))
    r = 20.0
    mean = log_plus_xi_mean(curve, D, r)
    t = order_function(curve, LineBundle((1, 1)), r)
    assert mean >= 0.0
    assert mean / t <= 0.2
