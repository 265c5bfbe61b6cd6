"""Acceptance gate: ten desk-scale criteria, one printed verdict line each."""

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from nevlab.cli import EXIT_HYPOTHESIS, EXIT_PASS, run_scenario
from nevlab.exprlang import evaluate, mero_value, parse, to_meromorphic
from nevlab.geometry import DivisorSpec, Hyperplane, P1xP1Flat, ProjectiveFS, TorusCurve
from nevlab.growth import LineBundle, jensen_residual, order_function, proximity
from nevlab.jets import CurveMap, JetsError, cr_residual, flat_wronskian_closed_form, wronskian
from nevlab.rootcount import Disc, N_trunc, locate_zeros
from nevlab.smt import check_cartan, check_smt7, degeneracy_probe, pullback_entire

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "nevlab" / "scenarios"
GRID16 = [float(r) for r in np.geomspace(5, 40, 16)]
RNG = np.random.default_rng(20260824)


def _verdict(num, ok, detail):
    line = f"ACCEPTANCE {num:2d}: {'PASS' if ok else 'FAIL'} -- {detail}"
    print(line, file=sys.stderr)
    assert ok, line


def _p1xp1(f_text, g_text):
    return CurveMap(
        P1xP1Flat(), (to_meromorphic(parse(f_text)), to_meromorphic(parse(g_text)))
    )


def _example1():
    return _p1xp1("exp(z)", "(exp(z)+1)/(exp(z)-1)")


def _random_points(count, radius):
    r = radius * np.sqrt(RNG.random(count))
    th = 2 * np.pi * RNG.random(count)
    return r * np.exp(1j * th)


# 1 ---------------------------------------------------------------------------


def test_acceptance_01_zero_counting_exactness():
    h = parse("exp(z) - 1")
    worst_loc = 0.0
    ok = True
    for radius in (7.0, 10.0, 20.0, 50.0):
        zs = locate_zeros(h, Disc(0j, radius))
        expect = [
            2j * math.pi * k for k in range(-9, 10) if 2 * math.pi * abs(k) < radius
        ]
        ok &= len(zs.zeros) == len(expect)
        ok &= all(m == 1 for _, m in zs.zeros)
        remaining = list(expect)
        for z, _ in zs.zeros:
            best = min(remaining, key=lambda t: abs(z - t))
            remaining.remove(best)
            worst_loc = max(worst_loc, abs(z - best))
    ok &= worst_loc <= 1e-8
    zs10 = locate_zeros(h, Disc(0j, 10.0))
    n1 = N_trunc(zs10, 10.0, 1)
    ok &= abs(n1 - 3.231992) <= 1e-5
    _verdict(1, ok, f"zero enumeration exact, worst location error {worst_loc:.2e}, "
                    f"N_1(10) = {n1:.6f}")


# 2 ---------------------------------------------------------------------------


def test_acceptance_02_jensen_corpus():
    corpus = []
    # 15 random polynomials, degree <= 6, planted roots kept off the circles
    for _ in range(15):
        deg = int(RNG.integers(1, 7))
        parts = []
        for _ in range(deg):
            while True:
                rad = 4.0 * RNG.random() + 0.05
                if all(abs(rad - c) > 0.05 for c in (1.0, 2.0, 5.0, 10.0)):
                    break
            th = 2 * math.pi * RNG.random()
            z0 = rad * np.exp(1j * th)
            parts.append(f"(z - ({z0.real:.12g}+{z0.imag:.12g}i))")
        corpus.append("*".join(parts))
    corpus += [f"exp(z) - ({c})" for c in ("2", "3", "0.5", "1+1i", "-2")]
    assert len(corpus) >= 20
    worst = 0.0
    for text in corpus:
        h = parse(text)
        for r in (2.0, 5.0, 10.0):
            worst = max(worst, jensen_residual(h, r))
    ok = worst <= 1e-5
    _verdict(2, ok, f"Jensen residual over {len(corpus)} functions x 3 radii, "
                    f"worst {worst:.2e} (<= 1e-5)")


# 3 ---------------------------------------------------------------------------


def test_acceptance_03_fmt_boundedness():
    curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    bundle = LineBundle((1,))
    radii = [5.0, 12.0, 25.0, 50.0]
    t_vals = {r: order_function(curve, bundle, r) for r in radii}
    # divisor {w = inf}: N == 0, T - m stays bounded
    inf_pt = Hyperplane((0.0, 1.0))
    diffs_inf = [t_vals[r] - proximity(curve, inf_pt, r) for r in radii]
    var_inf = max(diffs_inf) - min(diffs_inf)
    # divisor {w = 1}: the counting function carries the growth
    one_pt = Hyperplane((1.0, -1.0))
    zs = locate_zeros(pullback_entire(curve, one_pt), Disc(0j, max(radii) * 1.001))
    diffs_one = [
        t_vals[r] - proximity(curve, one_pt, r) - N_trunc(zs, r, 16) for r in radii
    ]
    var_one = max(diffs_one) - min(diffs_one)
    ok = var_inf <= 0.7 and var_one <= 0.7
    _verdict(3, ok, f"FMT variation over [5,50]: {{w=inf}} {var_inf:.3f}, "
                    f"{{w=1}} {var_one:.3f} (<= 0.7)")


# 4 ---------------------------------------------------------------------------


def _random_exp_poly():
    a = int(RNG.integers(1, 4))
    b = int(RNG.integers(-3, 4))
    c = RNG.standard_normal() + 1j * RNG.standard_normal()
    num = f"exp({a}*z) + ({c.real:.6f}+{c.imag:.6f}i)*z^2 + 1"
    den = f"exp({b}*z) + 2" if RNG.random() < 0.5 else "1"
    return f"({num})/({den})"


def test_acceptance_04_wronskian_oracle_equivalence():
    worst = 0.0
    checked = 0
    for _ in range(10):
        curve = _p1xp1(_random_exp_poly(), _random_exp_poly())
        F, G = curve.components
        for z in _random_points(100, 2.0):
            z = complex(z)
            try:
                w = wronskian(curve, z)
                w0 = flat_wronskian_closed_form(F, G, z)
            except JetsError:
                continue  # singular point for the curve: not a regular point
            worst = max(worst, abs(w - w0) / (1.0 + abs(w0)))
            checked += 1
    ok = worst <= 1e-10 and checked >= 900
    _verdict(4, ok, f"flat Wronskian oracle over {checked} regular points, "
                    f"worst scaled error {worst:.2e} (<= 1e-10)")


# 5 ---------------------------------------------------------------------------


def _random_projective_curve(n):
    # moderate frequencies and coefficients keep the O(h^2) truncation error
    # of the fixed 1e-4 stencil below the 1e-5 tolerance even at points where
    # the Wronskian itself vanishes (there the (1+|W|) normalization gives no
    # extra headroom and the raw third-derivative scale must be small enough)
    comps = ["1"]
    freqs = RNG.permutation(np.arange(1, 4))[:n]
    for k, a in enumerate(freqs):
        c = 0.5 * RNG.standard_normal()
        comps.append(f"exp({int(a)}*z) + ({c:.6f})*z^{k + 1}")
    return CurveMap(ProjectiveFS(n), tuple(parse(s) for s in comps))


def test_acceptance_05_fs_wronskian_holomorphy():
    worst = 0.0
    for n, count in ((2, 10), (3, 5)):
        for _ in range(count):
            curve = _random_projective_curve(n)
            for z in _random_points(100 // (1 if n == 2 else 2), 0.6):
                worst = max(worst, cr_residual(curve, complex(z), 1e-4))
    ok = worst <= 1e-5
    _verdict(5, ok, f"CR residual of the projective Wronskian, worst {worst:.2e} "
                    f"(<= 1e-5, step 1e-4)")


# 6 ---------------------------------------------------------------------------


def test_acceptance_06_degeneracy_dichotomy():
    v1 = degeneracy_probe(_p1xp1("exp(z)", "exp(2*z)"))
    ok1 = v1.kind == "flat_relation" and (v1.m, v1.n) == (2, -1) and abs(v1.c - 1) <= 1e-8
    v2 = degeneracy_probe(
        CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("exp(z)")))
    )
    ok2 = v2.kind == "projective_linear"
    v3 = degeneracy_probe(_example1())
    ok3 = v3.kind == "nondegenerate" and v3.evidence > 1e-3
    ok = ok1 and ok2 and ok3
    _verdict(6, ok, f"dichotomy: flat(2,-1,1)={ok1}, projective_linear={ok2}, "
                    f"nondegenerate evidence {v3.evidence:.3f} > 1e-3")


# 7 ---------------------------------------------------------------------------


def test_acceptance_07_product_curve_identity():
    curve = _example1()
    F, G = curve.components
    worst = 0.0
    count = 0
    for z in _random_points(260, 5.0):
        z = complex(z)
        fv = evaluate(F, z)
        gv = evaluate(G, z)
        if not (fv.is_finite and gv.is_finite):
            continue
        worst = max(worst, abs((fv.value - 1) * (gv.value - 1) - 2))
        count += 1
    e = math.e
    expected = 2 * e * (e**2 + 1) / (e**2 - 1) ** 2 * mero_value(F, 1.0) * mero_value(G, 1.0)
    w1 = wronskian(curve, 1.0 + 0j)
    ok = count >= 200 and worst <= 1e-12 and abs(w1 - expected) <= 1e-4
    _verdict(7, ok, f"(x-1)(y-1)=2 over {count} points, worst {worst:.2e}; "
                    f"W(1) = {w1.real:.6f} vs closed form {expected.real:.6f}")


# 8 ---------------------------------------------------------------------------


def test_acceptance_08_cartan_desk_check():
    # n = 1: f = e^z against the points 0, infinity, -1
    curve1 = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
    hyps1 = [Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, 1.0))]
    rep1 = check_cartan(curve1, hyps1, GRID16, 0.05)
    ratios = [
        m / t for m, t, r in zip(rep1.margin, rep1.lhs, rep1.radii)
        if r not in rep1.exceptional
    ]
    window_ok = all(-0.05 <= q <= 1.1 for q in ratios)
    # n = 2: linearly nondegenerate exponential curve, four lines
    curve2 = CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("exp(2*z)")))
    hyps2 = [
        Hyperplane((1.0, 0.0, 0.0)),
        Hyperplane((0.0, 1.0, 0.0)),
        Hyperplane((0.0, 0.0, 1.0)),
        Hyperplane((1.0, 1.0, 1.0)),
    ]
    rep2 = check_cartan(curve2, hyps2, GRID16, 0.05)
    ok = rep1.verdict == "pass" and rep2.verdict == "pass" and window_ok
    _verdict(8, ok, f"Cartan n=1 {rep1.verdict}, n=2 {rep2.verdict}; "
                    f"margin/T in [{min(ratios):.3f}, {max(ratios):.3f}] "
                    f"within [-0.05, 1.1]")


# 9 ---------------------------------------------------------------------------


def test_acceptance_09_torus_divisor_desk_check():
    curve = _example1()
    D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 3.0),))
    report = check_smt7(curve, D, GRID16, 0.05)
    # the table carries the log+ xi circle means; Lemma-type smallness
    t_primary = dict(report.table.t_cols)[report.table.t_cols[0][0]]
    ratios = [
        x / t for r, x, t in zip(report.table.radii, report.table.logxi, t_primary)
        if r >= 20.0
    ]
    small_ok = ratios and max(ratios) <= 0.2
    ok = report.verdict == "pass" and small_ok
    _verdict(9, ok, f"torus-divisor verdict {report.verdict}; "
                    f"max logxi/T for r >= 20 is {max(ratios):.4f} (<= 0.2)")


# 10 --------------------------------------------------------------------------


def test_acceptance_10_determinism(tmp_path):
    names = sorted(p.stem for p in SCENARIOS.glob("*.ini"))
    byte_identical = True
    for name in names:
        outs = []
        for threads, tag in ((1, "t1"), (4, "tN")):
            out = tmp_path / tag / name
            code = run_scenario(SCENARIOS / f"{name}.ini", out, threads=threads)
            assert code in (EXIT_PASS, EXIT_HYPOTHESIS)
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        byte_identical &= files_a == files_b
        for fname in files_a:
            byte_identical &= (
                (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
            )
    _verdict(10, byte_identical,
             f"bundled corpus ({len(names)} scenarios) byte-identical "
             f"across thread counts")
