"""Second-main-theorem inequality reports, degeneracy probing, and the
hypothesis diagnostics for the product-target torus-divisor inequality.

Report conventions: rhs includes the fitted allowance, margin = rhs - lhs,
and a radius passes when margin >= 0.  The allowance is the fitted model of
the inequality's error term, capped by a generous multiple of
(1 + log r + log+ T) so a genuinely failing inequality still fails.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exprlang import Add, Const, Expr, Mul, PowInt, Sub, _simplify
from .geometry import (
    BoundaryComponent,
    DivisorSpec,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TorusCurve,
    dim,
    general_position_check,
    is_totally_geodesic,
)
from .growth import (
    GrowthTable,
    LineBundle,
    SfrModel,
    canonical_bundle,
    component_label,
    fit_sfr,
    log_plus_xi_mean,
    order_function,
    proximity,
)
from .jets import CurveMap, covariant_jets, ChartSelectionError, JetsError
from .rootcount import Disc, N_trunc, locate_zeros

__all__ = [
    "SmtReport",
    "DegeneracyVerdict",
    "SmtError",
    "HypothesisError",
    "DegeneracyUnresolvedError",
    "degeneracy_probe",
    "check_general",
    "check_cartan",
    "check_smt7",
    "condition_check_smt7",
    "pullback_entire",
]

ALLOWANCE_CAP = 25.0
PROBE_COUNT = 64


class SmtError(Exception):
    pass


class HypothesisError(SmtError):
    def __init__(self, name: str, detail: str, extra: dict | None = None):
        super().__init__(f"hypothesis {name} failed: {detail}")
        self.name = name
        self.detail = detail
        self.extra = extra or {}


class DegeneracyUnresolvedError(SmtError):
    pass


# ---------------------------------------------------------------------------
# Degeneracy probe


@dataclass(frozen=True)
class DegeneracyVerdict:
    kind: str  # "nondegenerate" | "flat_relation" | "projective_linear"
    evidence: float  # max normalized |W| over probe points
    m: int | None = None
    n: int | None = None
    c: complex | None = None
    coefficients: tuple | None = None


def _probe_points():
    k = np.arange(PROBE_COUNT)
    return 0.8 * np.exp(2j * np.pi * k / PROBE_COUNT) + 0.1j


def _normalized_wronskian(curve: CurveMap, z: complex) -> float:
    n = dim(curve.target)
    frame = covariant_jets(curve, z, n)
    det = abs(np.linalg.det(frame.matrix))
    # normalize by the cancellation scale of each row, not the row norm:
    # a row that vanishes by exact cancellation must not amplify roundoff
    scale = 1.0
    for s in frame.scales:
        scale *= s
    if scale == 0.0:
        return 0.0
    return det / scale


def degeneracy_probe(curve: CurveMap) -> DegeneracyVerdict:
    """Classify the curve as nondegenerate or exhibit the degeneracy witness."""
    evid = 0.0
    for z in _probe_points():
        try:
            evid = max(evid, _normalized_wronskian(curve, complex(z)))
        except JetsError:
            continue
    if evid > 1e-8:
        return DegeneracyVerdict("nondegenerate", evid)
    if isinstance(curve.target, P1xP1Flat):
        from .exprlang import compile_expr

        F, G = curve.components
        zs = _probe_points()
        NF = compile_expr(F.num)(zs)
        DF = compile_expr(F.den)(zs)
        NG = compile_expr(G.num)(zs)
        DG = compile_expr(G.den)(zs)
        pairs = [
            (m, n)
            for s in range(1, 17)
            for m in range(0, 9)
            for n in range(-8, 9)
            if abs(m) + abs(n) == s
            and math.gcd(abs(m), abs(n)) == 1
            and (m > 0 or (m == 0 and n > 0))
        ]
        for m, n in pairs:
            with np.errstate(all="ignore"):
                num = NF ** max(m, 0) * DF ** max(-m, 0) * NG ** max(n, 0) * DG ** max(-n, 0)
                den = DF ** max(m, 0) * NF ** max(-m, 0) * DG ** max(n, 0) * NG ** max(-n, 0)
                vals = num / den
            if not np.all(np.isfinite(vals)):
                continue
            mean = complex(np.mean(vals))
            scale = max(1.0, abs(mean) ** 2)
            var = float(np.mean(np.abs(vals - mean) ** 2)) / scale
            if var <= 1e-10 and mean != 0:
                return DegeneracyVerdict("flat_relation", evid, m=m, n=n, c=mean)
        raise DegeneracyUnresolvedError(
            "degenerate, relation unresolved within exponent bound 8"
        )
    if isinstance(curve.target, ProjectiveFS):
        from .exprlang import compile_expr

        zs = _probe_points()
        mat = np.stack([compile_expr(g)(zs) for g in curve.components], axis=1)
        mat = mat / np.linalg.norm(mat, axis=1, keepdims=True)
        _, sing, vh = np.linalg.svd(mat)
        if sing[-1] <= 1e-10 * sing[0]:
            a = vh[-1].conj()
            # canonical scaling: largest entry 1, then first nonzero positive
            a = a / a[np.argmax(np.abs(a))]
            for v in a:
                if abs(v) > 1e-12:
                    a = a / (v / abs(v))
                    break
            a = np.where(np.abs(a) < 1e-12, 0.0, a)
            return DegeneracyVerdict(
                "projective_linear", evid, coefficients=tuple(complex(v) for v in a)
            )
        raise DegeneracyUnresolvedError("degenerate, no hyperplane relation resolved")
    raise SmtError("degeneracy probe implemented for the compact targets")


# ---------------------------------------------------------------------------
# Divisor pullbacks as entire functions


def _expr_pow(base: Expr, k: int) -> Expr:
    if k == 0:
        return Const(1 + 0j)
    if k == 1:
        return base
    return PowInt(base, k)


def pullback_entire(curve: CurveMap, comp) -> Expr:
    """Entire function whose zeros are the pullback divisor of the component."""
    if isinstance(curve.target, ProjectiveFS):
        if not isinstance(comp, Hyperplane):
            raise SmtError("projective pullbacks take hyperplanes")
        terms = [
            Mul(Const(complex(a)), g)
            for a, g in zip(comp.coefficients, curve.components)
            if a != 0
        ]
        acc = terms[0]
        for t in terms[1:]:
            acc = Add(acc, t)
        return _simplify(acc)
    if isinstance(curve.target, P1xP1Flat):
        F, G = curve.components
        if isinstance(comp, BoundaryComponent):
            return {
                "x0": F.num,
                "xinf": F.den,
                "y0": G.num,
                "yinf": G.den,
            }[comp.which]
        if isinstance(comp, TorusCurve):
            m, n, c = comp.m, comp.n, comp.c
            lead = Mul(
                Mul(_expr_pow(F.num, max(m, 0)), _expr_pow(F.den, max(-m, 0))),
                Mul(_expr_pow(G.num, max(n, 0)), _expr_pow(G.den, max(-n, 0))),
            )
            tail = Mul(
                Mul(_expr_pow(F.den, max(m, 0)), _expr_pow(F.num, max(-m, 0))),
                Mul(_expr_pow(G.den, max(n, 0)), _expr_pow(G.num, max(-n, 0))),
            )
            return _simplify(Sub(lead, Mul(Const(complex(c)), tail)))
    raise SmtError(f"no pullback recipe for component {comp!r}")


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True, eq=False)
class SmtReport:
    theorem: str
    radii: tuple
    lhs: tuple
    rhs: tuple  # counting terms plus allowance
    margin: tuple  # rhs - lhs
    allowance: tuple
    exceptional: tuple
    passes: tuple
    verdict: str  # "pass" | "fail"
    hypotheses: dict
    model: SfrModel
    table: GrowthTable | None = None
    derived: dict | None = None

    def to_json(self) -> str:
        payload = {
            "theorem": self.theorem,
            "radii": list(self.radii),
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "margin": list(self.margin),
            "allowance": list(self.allowance),
            "exceptional": list(self.exceptional),
            "passes": list(self.passes),
            "verdict": self.verdict,
            "hypotheses": self.hypotheses,
            "model": {
                "c0": self.model.c0,
                "c1": self.model.c1,
                "c2": self.model.c2,
                "eps": self.model.eps,
            },
        }
        if self.derived is not None:
            payload["derived"] = self.derived
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _capped_allowance(model: SfrModel, r: float, t: float) -> float:
    cap = ALLOWANCE_CAP * (1.0 + math.log(r) + math.log(max(t, 1.0)))
    return min(model.allowance(r, t), cap)


def _assemble(
    theorem: str,
    radii,
    lhs,
    base_rhs,
    t_primary,
    eps: float,
    hypotheses: dict,
    table: GrowthTable,
) -> SmtReport:
    radii = tuple(float(r) for r in radii)
    margins0 = [b - l for b, l in zip(base_rhs, lhs)]
    model = fit_sfr(table, margins0, eps)
    allowance = tuple(
        _capped_allowance(model, r, t) for r, t in zip(radii, t_primary)
    )
    rhs = tuple(b + a for b, a in zip(base_rhs, allowance))
    margin = tuple(v - l for v, l in zip(rhs, lhs))
    exc = set(model.exceptional)
    passes = tuple(bool(m >= 0.0) for m in margin)
    verdict = (
        "pass"
        if all(p for p, r in zip(passes, radii) if r not in exc)
        else "fail"
    )
    return SmtReport(
        theorem=theorem,
        radii=radii,
        lhs=tuple(float(v) for v in lhs),
        rhs=rhs,
        margin=margin,
        allowance=allowance,
        exceptional=model.exceptional,
        passes=passes,
        verdict=verdict,
        hypotheses=hypotheses,
        model=model,
        table=table,
    )


def _counting_columns(curve: CurveMap, components, radii, levels):
    """N_k columns per component at the requested truncation levels."""
    rmax = max(radii)
    cols = []
    zero_sets = {}
    for comp in components:
        h = pullback_entire(curve, comp)
        zs = locate_zeros(h, Disc(0j, rmax * (1.0 + 1e-3)))
        zero_sets[component_label(comp)] = zs
        for k in levels:
            vals = tuple(N_trunc(zs, float(r), k) for r in radii)
            cols.append((f"N{k}:{component_label(comp)}", vals))
    return cols, zero_sets


def _build_table(curve, divisors, radii, bundles, xi_divisors, n_cols):
    t_cols = tuple(
        (b.label(), tuple(order_function(curve, b, float(r)) for r in radii))
        for b in bundles
    )
    m_cols = tuple(
        (
            component_label(comp),
            tuple(proximity(curve, comp, float(r)) for r in radii),
        )
        for comp in divisors.components
    )
    logxi = None
    if xi_divisors is not None:
        logxi = tuple(
            log_plus_xi_mean(curve, xi_divisors, float(r)) for r in radii
        )
    return GrowthTable(tuple(radii), t_cols, tuple(n_cols), m_cols, logxi)


def check_general(curve: CurveMap, divisors: DivisorSpec, grid, eps: float) -> SmtReport:
    """General inequality: T(r, L(D)) + T(r, K) <= sum N_n + allowance."""
    n = dim(curve.target)
    verdict = degeneracy_probe(curve)
    if verdict.kind != "nondegenerate":
        raise HypothesisError("degeneracy", f"curve is degenerate ({verdict.kind})",
                              _degeneracy_extra(verdict))
    for comp in divisors.components:
        if not is_totally_geodesic(curve.target, comp):
            raise HypothesisError("geodesy", f"{component_label(comp)} not totally geodesic")
    _check_snc(divisors)
    radii = sorted(float(r) for r in grid)
    comps = divisors.components
    if isinstance(curve.target, ProjectiveFS):
        ld = LineBundle((len(comps),))
    else:
        bd = [sum(x) for x in zip(*(c.bidegree for c in comps))]
        ld = LineBundle(tuple(bd))
    n_cols, _ = _counting_columns(curve, comps, radii, [n])
    table = _build_table(curve, divisors, radii, (ld,), divisors, n_cols)
    t_ld = table.t_cols[0][1]
    kan = canonical_bundle(curve.target)
    t_k = tuple(order_function(curve, kan, r) for r in radii)
    lhs = tuple(a + b for a, b in zip(t_ld, t_k))
    base_rhs = tuple(
        sum(col[1][i] for col in n_cols) for i in range(len(radii))
    )
    hyp = {
        "degeneracy": "nondegenerate",
        "geodesy": "pass",
        "snc": "pass",
        "subharmonicity": "via holomorphy of the connection Wronskian",
    }
    return _assemble("thm1_1", radii, lhs, base_rhs, t_ld, eps, hyp, table)


def check_cartan(curve: CurveMap, hyperplanes, grid, eps: float) -> SmtReport:
    """Truncated hyperplane inequality: (q - n - 1) T <= sum N_n + allowance."""
    if not isinstance(curve.target, ProjectiveFS):
        raise SmtError("hyperplane check requires a projective target")
    n = curve.target.n
    if n > 3:
        warnings.warn("hyperplane check beyond dimension 3 is outside the verified range")
    if not general_position_check(list(hyperplanes)):
        raise HypothesisError("general_position", "hyperplanes not in general position")
    verdict = degeneracy_probe(curve)
    if verdict.kind != "nondegenerate":
        raise HypothesisError("degeneracy", f"curve is degenerate ({verdict.kind})",
                              _degeneracy_extra(verdict))
    radii = sorted(float(r) for r in grid)
    q = len(hyperplanes)
    divisors = DivisorSpec(curve.target, tuple(hyperplanes))
    n_cols, _ = _counting_columns(curve, hyperplanes, radii, [n])
    table = _build_table(curve, divisors, radii, (LineBundle((1,)),), divisors, n_cols)
    t1 = table.t_cols[0][1]
    lhs = tuple((q - n - 1) * t for t in t1)
    base_rhs = tuple(sum(col[1][i] for col in n_cols) for i in range(len(radii)))
    hyp = {
        "general_position": "pass",
        "degeneracy": "nondegenerate",
    }
    return _assemble("cartan", radii, lhs, base_rhs, t1, eps, hyp, table)


BOUNDARY = tuple(BoundaryComponent(w) for w in ("x0", "xinf", "y0", "yinf"))


def condition_check_smt7(curve: CurveMap, D: DivisorSpec, r_max: float = 40.0) -> dict:
    """Diagnostics for the torus-divisor inequality's hypotheses.

    (iii) is a sampled certificate (minimum chordal distance from the image
    to the four torus-fixed points over a radial-angular grid), not a proof.
    """
    comps = [c for c in D.components if isinstance(c, TorusCurve)]
    prop = []
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            a, b = comps[i], comps[j]
            if a.m * b.n - a.n * b.m == 0:
                prop.append((component_label(a), component_label(b)))
    snc_ok = not prop
    from .jets import _p1xp1_homogeneous

    radii = np.linspace(r_max / 100.0, r_max, 100)
    angles = 2.0 * np.pi * np.arange(100) / 100.0
    zs = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    with np.errstate(all="ignore"):
        NF, DF, NG, DG = _p1xp1_homogeneous(curve, zs)
        X = np.sqrt(np.abs(NF) ** 2 + np.abs(DF) ** 2)
        Y = np.sqrt(np.abs(NG) ** 2 + np.abs(DG) ** 2)
        chi_x0, chi_xinf = np.abs(NF) / X, np.abs(DF) / X
        chi_y0, chi_yinf = np.abs(NG) / Y, np.abs(DG) / Y
        dists = [
            np.hypot(chi_x0, chi_y0),
            np.hypot(chi_x0, chi_yinf),
            np.hypot(chi_xinf, chi_y0),
            np.hypot(chi_xinf, chi_yinf),
        ]
        cert = float(min(np.nanmin(d) for d in dists))
    return {
        "snc": "pass" if snc_ok else "fail",
        "snc_proportional_pairs": prop,
        "geodesy": "pass",
        "corner_distance_certificate": cert,
        "corner_certificate_threshold": 0.05,
        "corner_certificate_radius": r_max,
        "corner_certificate_grid": len(zs),
        "corner_certificate_note": "sampled, not proven",
    }


def check_smt7(curve: CurveMap, D: DivisorSpec, grid, eps: float) -> SmtReport:
    """Torus-divisor inequality on the product target:
    T(r, O(m,n)) <= sum N_2(D_i) + 2 sum N_1(E_j) + allowance."""
    if not isinstance(curve.target, P1xP1Flat):
        raise SmtError("torus-divisor check requires the product target")
    comps = [c for c in D.components if isinstance(c, TorusCurve)]
    if not comps:
        raise SmtError("divisor needs at least one torus-curve component")
    diag = condition_check_smt7(curve, D, r_max=max(float(r) for r in grid))
    if diag["snc"] != "pass":
        raise HypothesisError("snc", f"proportional pairs {diag['snc_proportional_pairs']}")
    if diag["corner_distance_certificate"] <= diag["corner_certificate_threshold"]:
        raise HypothesisError(
            "corner_avoidance",
            f"sampled corner distance {diag['corner_distance_certificate']:.4g} <= 0.05",
            {"certificate": diag["corner_distance_certificate"]},
        )
    verdict = degeneracy_probe(curve)
    if verdict.kind != "nondegenerate":
        raise HypothesisError("degeneracy", f"curve is degenerate ({verdict.kind})",
                              _degeneracy_extra(verdict))
    radii = sorted(float(r) for r in grid)
    bid = [sum(x) for x in zip(*(c.bidegree for c in comps))]
    ld = LineBundle(tuple(bid))
    d_cols, _ = _counting_columns(curve, comps, radii, [2])
    e_cols, _ = _counting_columns(curve, BOUNDARY, radii, [1])
    n_cols = tuple(d_cols) + tuple(e_cols)
    table = _build_table(curve, D, radii, (ld,), D, n_cols)
    t_ld = table.t_cols[0][1]
    lhs = t_ld
    base_rhs = tuple(
        sum(col[1][i] for col in d_cols) + 2.0 * sum(col[1][i] for col in e_cols)
        for i in range(len(radii))
    )
    hyp = dict(diag)
    hyp["degeneracy"] = "nondegenerate"
    report = _assemble("smt7", radii, lhs, base_rhs, t_ld, eps, hyp, table)
    # derived variant with the canonical twist: T(r, O(m-4, n-4)) <= sum N_2 + allowance
    ld2 = LineBundle((bid[0] - 4, bid[1] - 4))
    lhs2 = tuple(order_function(curve, ld2, r) for r in radii)
    base2 = tuple(sum(col[1][i] for col in d_cols) for i in range(len(radii)))
    margins2 = [b - l for b, l in zip(base2, lhs2)]
    model2 = fit_sfr(table, margins2, eps)
    allow2 = tuple(_capped_allowance(model2, r, t) for r, t in zip(radii, t_ld))
    rhs2 = tuple(b + a for b, a in zip(base2, allow2))
    margin2 = tuple(v - l for v, l in zip(rhs2, lhs2))
    exc2 = set(model2.exceptional)
    verdict2 = "pass" if all(
        m >= 0 for m, r in zip(margin2, radii) if r not in exc2
    ) else "fail"
    derived = {
        "bundle": ld2.label(),
        "lhs": list(lhs2),
        "rhs": list(rhs2),
        "margin": list(margin2),
        "verdict": verdict2,
    }
    return SmtReport(
        theorem=report.theorem,
        radii=report.radii,
        lhs=report.lhs,
        rhs=report.rhs,
        margin=report.margin,
        allowance=report.allowance,
        exceptional=report.exceptional,
        passes=report.passes,
        verdict=report.verdict,
        hypotheses=report.hypotheses,
        model=report.model,
        table=report.table,
        derived=derived,
    )


def _degeneracy_extra(verdict: DegeneracyVerdict) -> dict:
    extra: dict = {"kind": verdict.kind}
    if verdict.kind == "flat_relation":
        extra["relation"] = {
            "m": verdict.m,
            "n": verdict.n,
            "c": [verdict.c.real, verdict.c.imag],
        }
    if verdict.kind == "projective_linear":
        extra["coefficients"] = [[v.real, v.imag] for v in verdict.coefficients]
    return extra


def _check_snc(divisors: DivisorSpec):
    comps = divisors.components
    hyps = [c for c in comps if isinstance(c, Hyperplane)]
    if hyps and len(hyps) == len(comps):
        if not general_position_check(hyps):
            raise HypothesisError("snc", "hyperplanes not in general position")
        return
    torus = [c for c in comps if isinstance(c, TorusCurve)]
    for i in range(len(torus)):
        for j in range(i + 1, len(torus)):
            a, b = torus[i], torus[j]
            if a.m * b.n - a.n * b.m == 0:
                raise HypothesisError(
                    "snc",
                    f"{component_label(a)} and {component_label(b)} have proportional exponents",
                )
