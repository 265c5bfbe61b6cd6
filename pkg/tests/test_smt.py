"""Degeneracy probes and desk-scale second-main-theorem reports."""

import json

import numpy as np
import pytest

from nevlab.exprlang import parse, to_meromorphic
from nevlab.geometry import DivisorSpec, Hyperplane, P1xP1Flat, ProjectiveFS, TorusCurve
from nevlab.jets import CurveMap
from nevlab.smt import (
    HypothesisError,
    check_cartan,
    check_general,
    check_smt7,
    condition_check_smt7,
    degeneracy_probe,
    pullback_entire,
)

GRID = [float(r) for r in np.geomspace(4, 20, 8)]


def _p1xp1(f_text, g_text):
    return CurveMap(
        P1xP1Flat(), (to_meromorphic(parse(f_text)), to_meromorphic(parse(g_text)))
    )


def _example1():
    return _p1xp1("exp(z)", "(exp(z)+1)/(exp(z)-1)")


# -- degeneracy dichotomy -------------------------------------------------------


def test_probe_flat_relation():
    v = degeneracy_probe(_p1xp1("exp(z)", "exp(2*z)"))
    assert v.kind == "flat_relation"
    assert (v.m, v.n) == (2, -1)
    assert v.c == pytest.approx(1.0, abs=1e-8)


def test_probe_projective_linear():
    curve = CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("exp(z)")))
    v = degeneracy_probe(curve)
    assert v.kind == "projective_linear"
    a = np.asarray(v.coefficients)
    # the relation must annihilate (1, e^z, e^z): a1 + a2 = 0, a0 = 0
    assert abs(a[0]) <= 1e-8
    assert abs(a[1] + a[2]) <= 1e-8


def test_probe_nondegenerate():
    v = degeneracy_probe(_example1())
    assert v.kind == "nondegenerate"
    assert v.evidence > 1e-3


# -- pullbacks -------------------------------------------------------------------


def test_pullback_torus_curve():
    from nevlab.exprlang import evaluate_expr

    h = pullback_entire(_example1(), TorusCurve(1, 1, 3.0))
    # x*y = 3 pulls back to a multiple of e^{2z} - 2e^z + 3
    ref = parse("exp(2*z) - 2*exp(z) + 3")
    zs = [0.3 + 0.1j, -0.5 + 0.7j, 1.1 - 0.2j]
    ratios = [evaluate_expr(h, z) / evaluate_expr(ref, z) for z in zs]
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-10)
    assert ratios[0] == pytest.approx(ratios[2], rel=1e-10)


def test_pullback_hyperplane():
    from nevlab.exprlang import evaluate_expr

    curve = CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("z")))
    h = pullback_entire(curve, Hyperplane((2.0, -1.0, 3.0)))
    z = 0.4 + 0.2j
    assert evaluate_expr(h, z) == pytest.approx(2 - np.exp(z) + 3 * z, rel=1e-12)


# -- report coherence -------------------------------------------------------------


def test_cartan_report_coherent():
    curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    hyps = [Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, -1.0))]
    report = check_cartan(curve, hyps, GRID, 0.05)
    assert report.verdict == "pass"
    for r, lhs, rhs, margin, ok in zip(
        report.radii, report.lhs, report.rhs, report.margin, report.passes
    ):
        assert margin == pytest.approx(rhs - lhs, abs=1e-12)
        assert ok == (margin >= 0)
    payload = json.loads(report.to_json())
    assert payload["verdict"] == "pass"
    assert payload["theorem"] == report.theorem


def test_cartan_scale_invariance():
    curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    base = [Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, -1.0))]
    scaled = [
        Hyperplane((3.0, 0.0)),
        Hyperplane((0.0, -2.0j)),
        Hyperplane((0.5 + 0.5j, -0.5 - 0.5j)),
    ]
    a = check_cartan(curve, base, GRID, 0.05)
    b = check_cartan(curve, scaled, GRID, 0.05)
    assert np.allclose(a.lhs, b.lhs, atol=1e-10)
    assert np.allclose(a.rhs, b.rhs, atol=1e-10)
    assert a.verdict == b.verdict


def test_cartan_counting_cross_assembly():
    """The report's counting contribution matches an independent assembly."""
    from nevlab.rootcount import Disc, N_trunc, locate_zeros

    curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    hyps = [Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, -1.0))]
    report = check_cartan(curve, hyps, GRID, 0.05)
    rmax = max(GRID)
    acc = np.zeros(len(GRID))
    for comp in hyps:
        h = pullback_entire(curve, comp)
        zs = locate_zeros(h, Disc(0j, rmax * 1.001))
        acc += [N_trunc(zs, r, 1) for r in GRID]
    base_rhs = np.asarray(report.rhs) - np.asarray(report.allowance)
    assert np.allclose(base_rhs, acc, atol=1e-8)


def test_cartan_rejects_degenerate_curve():
    curve = CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("exp(z)")))
    hyps = [
        Hyperplane((1.0, 0.0, 0.0)),
        Hyperplane((0.0, 1.0, 0.0)),
        Hyperplane((0.0, 0.0, 1.0)),
        Hyperplane((1.0, 1.0, 1.0)),
    ]
    with pytest.raises(HypothesisError):
        check_cartan(curve, hyps, GRID, 0.05)


def test_general_report_runs_on_p1():
    curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    D = DivisorSpec(
        ProjectiveFS(1),
        (Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, -1.0))),
    )
    report = check_general(curve, D, GRID, 0.05)
    assert report.verdict == "pass"


# -- product-target theorem --------------------------------------------------------


def test_smt7_report_passes_example1():
    curve = _example1()
    D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 3.0),))
    report = check_smt7(curve, D, GRID, 0.05)
    assert report.verdict == "pass"
    assert report.derived is not None


def test_smt7_corner_condition_failure():
    # (e^z, e^{z^2}) approaches a boundary corner: condition check must fail
    curve = _p1xp1("exp(z)", "exp(z^2)")
    D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 2.0),))
    diag = condition_check_smt7(curve, D, r_max=20.0)
    assert diag["corner_distance_certificate"] <= 0.05
    with pytest.raises(HypothesisError):
        check_smt7(curve, D, GRID, 0.05)


def test_smt7_corner_condition_passes_example1():
    curve = _example1()
    D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 3.0),))
    diag = condition_check_smt7(curve, D, r_max=20.0)
    assert diag["corner_distance_certificate"] > 0.05
