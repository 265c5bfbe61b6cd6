"""Covariant jets, connection Wronskians, and the auxiliary function xi.

Jets are computed from exact closed forms: chart-coordinate derivatives come
from symbolic differentiation of the entire numerator/denominator data, and
the Christoffel contributions use the hand-derived tensor values.  Orders are
capped at the target dimension (at most 3), for which the jet recursion
expands to explicit formulas.

Charts are chosen adaptively at each point: the chart minimizing the maximal
coordinate modulus wins, ties broken by chart index.  Wronskians are reported
in the reference chart (the standard affine chart) whenever the point lies in
it, via the exact Jacobian factor of the chart change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exprlang import (
    Expr,
    MeromorphicFn,
    compile_expr,
    differentiate,
    evaluate,
    is_entire,
)
from .geometry import (
    BallBergman,
    BoundaryComponent,
    DivisorSpec,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TargetSpace,
    TorusCurve,
    christoffel_at,
    christoffel_derivative_at,
    dim,
)

__all__ = [
    "CurveMap",
    "JetFrame",
    "XiValue",
    "JetsError",
    "ChartSelectionError",
    "WronskianSingularityError",
    "covariant_jets",
    "wronskian",
    "wronskian_in_chart",
    "flat_wronskian_closed_form",
    "xi_at",
    "xi_on_points",
    "cr_residual",
]

MAX_JET_ORDER = 3


class JetsError(Exception):
    pass


class ChartSelectionError(JetsError):
    pass


class WronskianSingularityError(JetsError):
    pass


# ---------------------------------------------------------------------------
# Curves


@dataclass(frozen=True)
class CurveMap:
    """A holomorphic curve into one of the supported targets.

    Components: for the projective target, a homogeneous tuple of n+1 entire
    expressions; for the product target, the pair (F, G) of meromorphic
    functions; for the ball, a tuple of meromorphic functions.
    """

    target: TargetSpace
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        from .exprlang import PROBE_POINTS, evaluate_expr

        if isinstance(self.target, ProjectiveFS):
            if len(comps) != self.target.n + 1:
                raise JetsError(f"need {self.target.n + 1} homogeneous components")
            for g in comps:
                if not isinstance(g, Expr) or not is_entire(g):
                    raise JetsError("projective components must be entire expressions")
            for p in PROBE_POINTS:
                if max(abs(evaluate_expr(g, p)) for g in comps) <= 0.0:
                    raise JetsError("homogeneous components share a zero at a probe point")
        elif isinstance(self.target, P1xP1Flat):
            if len(comps) != 2 or not all(isinstance(f, MeromorphicFn) for f in comps):
                raise JetsError("product-target curve needs a pair of meromorphic functions")
            from .exprlang import is_constant

            if all(is_constant(f.num) and is_constant(f.den) for f in comps):
                raise JetsError("both components are constant")
        elif isinstance(self.target, BallBergman):
            if len(comps) != self.target.n or not all(
                isinstance(f, MeromorphicFn) for f in comps
            ):
                raise JetsError("ball curve needs n meromorphic components")
        else:
            raise JetsError(f"unknown target {self.target!r}")


@dataclass(frozen=True, eq=False)
class JetFrame:
    z: complex
    chart: int
    coords: np.ndarray  # chart coordinates of f(z)
    matrix: np.ndarray  # matrix[j-1, k-1] = f^{(j)k} in the chart frame
    scales: tuple = ()  # per-row cancellation scale (sum of term norms)


@dataclass(frozen=True)
class XiValue:
    value: float
    status: str = "finite"  # "finite" | "overflow" | "at_divisor_singularity"


# ---------------------------------------------------------------------------
# Chart data


def _num_den_pairs(curve: CurveMap, chart: int) -> list[tuple[Expr, Expr]]:
    if isinstance(curve.target, ProjectiveFS):
        c = chart
        return [(g, curve.components[c]) for i, g in enumerate(curve.components) if i != c]
    if isinstance(curve.target, P1xP1Flat):
        F, G = curve.components
        ex, ey = chart % 2, chart // 2
        xpair = (F.num, F.den) if ex == 0 else (F.den, F.num)
        ypair = (G.num, G.den) if ey == 0 else (G.den, G.num)
        return [xpair, ypair]
    if isinstance(curve.target, BallBergman):
        return [(f.num, f.den) for f in curve.components]
    raise JetsError(f"unknown target {curve.target!r}")


_CHART_CACHE: dict = {}


def _chart_callables(curve: CurveMap, chart: int):
    """Compiled derivatives (orders 0..MAX_JET_ORDER) of each coordinate's num/den."""
    key = (curve, chart)
    data = _CHART_CACHE.get(key)
    if data is None:
        data = []
        for num, den in _num_den_pairs(curve, chart):
            nd, dd = [num], [den]
            for _ in range(MAX_JET_ORDER):
                nd.append(differentiate(nd[-1]))
                dd.append(differentiate(dd[-1]))
            data.append(
                ([compile_expr(e) for e in nd], [compile_expr(e) for e in dd])
            )
        _CHART_CACHE[key] = data
    return data


def _quotient_derivs(u: list[complex], v: list[complex], order: int) -> list[complex]:
    """Derivatives of u/v at a point from derivatives of u and v.

    Uses u^(k) = sum_j C(k,j) f^(j) v^(k-j) solved for f^(k).
    """
    if v[0] == 0:
        raise ChartSelectionError("coordinate denominator vanishes in selected chart")
    f = [u[0] / v[0]]
    for k in range(1, order + 1):
        acc = u[k]
        for j in range(k):
            acc -= math.comb(k, j) * f[j] * v[k - j]
        f.append(acc / v[0])
    return f


def chart_count(target: TargetSpace) -> int:
    if isinstance(target, ProjectiveFS):
        return target.n + 1
    if isinstance(target, P1xP1Flat):
        return 4
    return 1


def _coord_magnitudes(curve: CurveMap, chart: int, z: complex) -> list[float]:
    mags = []
    for num, den in _num_den_pairs(curve, chart):
        nv = complex(compile_expr(num)(z))
        dv = complex(compile_expr(den)(z))
        if dv != 0:
            mags.append(abs(nv) / abs(dv))
        elif nv != 0:
            mags.append(math.inf)
        else:
            v = evaluate(MeromorphicFn(num, den), z)
            mags.append(abs(v.value) if v.is_finite else math.inf)
    return mags


def choose_chart(curve: CurveMap, z: complex) -> int:
    best, best_val = None, math.inf
    for chart in range(chart_count(curve.target)):
        m = max(_coord_magnitudes(curve, chart, z))
        if m < best_val:
            best, best_val = chart, m
    if best is None or not math.isfinite(best_val) or best_val > 1e12:
        raise ChartSelectionError(f"no usable chart at z={z}")
    return best


# ---------------------------------------------------------------------------
# Jets


def covariant_jets(curve: CurveMap, z: complex, order: int, chart: int | None = None) -> JetFrame:
    """Jet frame rows f^(j)k, 1 <= j <= order, in the chart frame."""
    n = dim(curve.target)
    if order < 1 or order > n:
        raise JetsError(f"jet order must lie in 1..{n}")
    if chart is None:
        chart = choose_chart(curve, z)
    data = _chart_callables(curve, chart)
    derivs = np.empty((order + 1, n), dtype=complex)
    for k, (nd, dd) in enumerate(data):
        u = [complex(fn(z)) for fn in nd[: order + 1]]
        v = [complex(fn(z)) for fn in dd[: order + 1]]
        f = _quotient_derivs(u, v, order)
        derivs[:, k] = f
    w = derivs[0]
    rows = np.empty((order, n), dtype=complex)
    d1 = derivs[1]
    rows[0] = d1
    scales = [float(np.linalg.norm(d1))]
    if order >= 2:
        gamma = christoffel_at(curve.target, w).values  # [i, j, k]
        d2 = derivs[2]
        t2 = np.einsum("i,j,ijk->k", d1, d1, gamma)
        rows[1] = d2 + t2
        scales.append(float(np.linalg.norm(d2) + np.linalg.norm(t2)))
    if order >= 3:
        dgamma = christoffel_derivative_at(curve.target, w)  # [a, i, j, k]
        d3 = derivs[3]
        t3a = 3.0 * np.einsum("i,j,ijk->k", d2, d1, gamma)
        t3b = np.einsum("i,a,b,abj,ijk->k", d1, d1, d1, gamma, gamma)
        t3c = np.einsum("i,j,a,aijk->k", d1, d1, d1, dgamma)
        rows[2] = d3 + t3a + t3b + t3c
        scales.append(
            float(
                np.linalg.norm(d3)
                + np.linalg.norm(t3a)
                + np.linalg.norm(t3b)
                + np.linalg.norm(t3c)
            )
        )
    return JetFrame(z=complex(z), chart=chart, coords=w, matrix=rows, scales=tuple(scales))


def _jacobian_det_to_reference(curve: CurveMap, frame: JetFrame) -> complex:
    """det of d(reference coords)/d(chart coords) at the curve point."""
    target = curve.target
    if isinstance(target, BallBergman):
        return 1.0 + 0j
    if isinstance(target, P1xP1Flat):
        det = 1.0 + 0j
        ex, ey = frame.chart % 2, frame.chart // 2
        for eps, coord in ((ex, frame.coords[0]), (ey, frame.coords[1])):
            if eps == 1:
                if coord == 0:
                    raise WronskianSingularityError("point outside the reference chart")
                det *= -1.0 / coord**2
        return det
    c = frame.chart
    if c == 0:
        return 1.0 + 0j
    n = target.n
    idxs = [i for i in range(n + 1) if i != c]  # coordinate labels in chart c
    v = {idx: frame.coords[pos] for pos, idx in enumerate(idxs)}
    v0 = v[0]
    if v0 == 0:
        raise WronskianSingularityError("point outside the reference chart")
    jac = np.zeros((n, n), dtype=complex)
    for row, k in enumerate(range(1, n + 1)):  # reference coordinates u^k
        for col, j in enumerate(idxs):
            if k == c:
                jac[row, col] = -1.0 / v0**2 if j == 0 else 0.0
            else:
                jac[row, col] = (1.0 if j == k else 0.0) / v0
                if j == 0:
                    jac[row, col] += -v[k] / v0**2
    return complex(np.linalg.det(jac))


def wronskian_in_chart(curve: CurveMap, z: complex, chart: int | None = None) -> tuple[complex, int]:
    n = dim(curve.target)
    frame = covariant_jets(curve, z, n, chart=chart)
    return complex(np.linalg.det(frame.matrix)), frame.chart


def wronskian(curve: CurveMap, z: complex) -> complex:
    """Connection Wronskian in the reference (standard affine) chart frame."""
    n = dim(curve.target)
    frame = covariant_jets(curve, z, n)
    det = complex(np.linalg.det(frame.matrix))
    return det * _jacobian_det_to_reference(curve, frame)


# ---------------------------------------------------------------------------
# Closed-form flat Wronskian on the product target


def _mero_derivs(fn: MeromorphicFn, z: complex, order: int) -> list[complex]:
    nd, dd = [fn.num], [fn.den]
    for _ in range(order):
        nd.append(differentiate(nd[-1]))
        dd.append(differentiate(dd[-1]))
    u = [complex(compile_expr(e)(z)) for e in nd]
    v = [complex(compile_expr(e)(z)) for e in dd]
    return _quotient_derivs(u, v, order)


def flat_wronskian_closed_form(F: MeromorphicFn, G: MeromorphicFn, z: complex) -> complex:
    """det[[F'/F, G'/G], [(F'/F)', (G'/G)']] * F * G."""
    f = _mero_derivs(F, z, 2)
    g = _mero_derivs(G, z, 2)
    if f[0] == 0 or g[0] == 0:
        raise WronskianSingularityError("closed form undefined at a zero of F or G")
    lf = f[1] / f[0]
    lg = g[1] / g[0]
    lfp = f[2] / f[0] - lf * lf
    lgp = g[2] / g[0] - lg * lg
    return (lf * lgp - lg * lfp) * f[0] * g[0]


# ---------------------------------------------------------------------------
# Section norms (homogeneous, scale-normalized)


def _hyperplane_norms_sq(curve: CurveMap, zs: np.ndarray, comps) -> np.ndarray:
    g = np.stack([compile_expr(c)(zs) for c in curve.components])  # (n+1, N)
    g2 = np.sum(np.abs(g) ** 2, axis=0)
    out = np.ones(zs.shape, dtype=float)
    for h in comps:
        a = h.array()
        pairing = np.abs(np.tensordot(a, g, axes=(0, 0))) ** 2
        out = out * pairing / (np.linalg.norm(a) ** 2 * g2)
    return out


def _p1xp1_homogeneous(curve: CurveMap, zs):
    F, G = curve.components
    NF = compile_expr(F.num)(zs)
    DF = compile_expr(F.den)(zs)
    NG = compile_expr(G.num)(zs)
    DG = compile_expr(G.den)(zs)
    return NF, DF, NG, DG


def torus_section_norm_sq(comp: TorusCurve, NF, DF, NG, DG) -> np.ndarray:
    """Squared section norm of the torus-curve divisor at homogeneous values."""
    m, n, c = comp.m, comp.n, comp.c
    top = (
        NF ** max(m, 0) * DF ** max(-m, 0) * NG ** max(n, 0) * DG ** max(-n, 0)
        - c * DF ** max(m, 0) * NF ** max(-m, 0) * DG ** max(n, 0) * NG ** max(-n, 0)
    )
    X2 = np.abs(NF) ** 2 + np.abs(DF) ** 2
    Y2 = np.abs(NG) ** 2 + np.abs(DG) ** 2
    return np.abs(top) ** 2 / (X2 ** abs(m) * Y2 ** abs(n) * (1.0 + abs(c)) ** 2)


def boundary_section_norm_sq(comp: BoundaryComponent, NF, DF, NG, DG) -> np.ndarray:
    X2 = np.abs(NF) ** 2 + np.abs(DF) ** 2
    Y2 = np.abs(NG) ** 2 + np.abs(DG) ** 2
    top = {"x0": NF, "xinf": DF, "y0": NG, "yinf": DG}[comp.which]
    bottom = X2 if comp.which in ("x0", "xinf") else Y2
    return np.abs(top) ** 2 / bottom


def _torus_boundary_norm_sq(NF, DF, NG, DG) -> np.ndarray:
    """Squared norm of the section cutting out the full boundary divisor E."""
    X2 = np.abs(NF) ** 2 + np.abs(DF) ** 2
    Y2 = np.abs(NG) ** 2 + np.abs(DG) ** 2
    return 16.0 * np.abs(NF * DF) ** 2 * np.abs(NG * DG) ** 2 / (X2**2 * Y2**2)


# ---------------------------------------------------------------------------
# xi


def xi_on_points(curve: CurveMap, divisors: DivisorSpec, zs) -> np.ndarray:
    """Vectorized xi for curves into the product target.

    Boundary components listed in the divisor are skipped: the boundary is
    always accounted for through the tau factor of the denominator.
    """
    if not isinstance(curve.target, P1xP1Flat):
        raise JetsError("xi_on_points is specific to the product target")
    zs = np.asarray(zs, dtype=complex)
    with np.errstate(all="ignore"):
        NF, DF, NG, DG = _p1xp1_homogeneous(curve, zs)
        F, G = curve.components
        NF1 = compile_expr(differentiate(F.num))(zs)
        DF1 = compile_expr(differentiate(F.den))(zs)
        NG1 = compile_expr(differentiate(G.num))(zs)
        DG1 = compile_expr(differentiate(G.den))(zs)
        NF2 = compile_expr(differentiate(differentiate(F.num)))(zs)
        DF2 = compile_expr(differentiate(differentiate(F.den)))(zs)
        NG2 = compile_expr(differentiate(differentiate(G.num)))(zs)
        DG2 = compile_expr(differentiate(differentiate(G.den)))(zs)

        # logarithmic derivative F'/F = A/B and its z-derivative
        A_f = NF1 * DF - NF * DF1
        B_f = NF * DF
        Ap_f = NF2 * DF - NF * DF2
        Bp_f = NF1 * DF + NF * DF1
        A_g = NG1 * DG - NG * DG1
        B_g = NG * DG
        Ap_g = NG2 * DG - NG * DG2
        Bp_g = NG1 * DG + NG * DG1

        lf = A_f / B_f
        lg = A_g / B_g
        lfp = (Ap_f * B_f - A_f * Bp_f) / B_f**2
        lgp = (Ap_g * B_g - A_g * Bp_g) / B_g**2
        det = lf * lgp - lg * lfp

        X2 = np.abs(NF) ** 2 + np.abs(DF) ** 2
        Y2 = np.abs(NG) ** 2 + np.abs(DG) ** 2
        numer = (
            np.abs(det) ** 2
            * np.abs(NF * DF) ** 2
            * np.abs(NG * DG) ** 2
            / (X2**2 * Y2**2)
        )
        denom = _torus_boundary_norm_sq(NF, DF, NG, DG)
        for comp in divisors.components:
            if isinstance(comp, TorusCurve):
                denom = denom * torus_section_norm_sq(comp, NF, DF, NG, DG)
        xi = numer / denom
    return xi


def _fs_wronskian_invariant_sq(curve: CurveMap, zs: np.ndarray) -> np.ndarray:
    """|W|^2 * s^-(n+1) on the projective target, vectorized.

    Works chartwise (chart with the largest homogeneous coordinate) and uses
    the contracted closed forms of the FS Christoffel terms: for d = f^(1),
    q_j = <wbar, f^(j)>, the correction terms reduce to
      order 2:  -2 q1 d1 / s
      order 3:  -3 (q1 d2 + q2 d1)/s + 6 q1^2 d1 / s^2.
    """
    n = curve.target.n
    zs = np.asarray(zs, dtype=complex)
    N = zs.shape[0]
    # homogeneous derivatives, scaled per point by the largest coordinate
    fns = []
    for g in curve.components:
        ds = [g]
        for _ in range(n):
            ds.append(differentiate(ds[-1]))
        fns.append([compile_expr(e) for e in ds])
    with np.errstate(all="ignore"):
        G = np.stack(
            [np.stack([np.asarray(f(zs), dtype=complex) for f in comp]) for comp in fns]
        )  # shape (n+1, n+1 orders, N)
        scale = np.max(np.abs(G[:, 0, :]), axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        G = G / scale
        chart = np.argmax(np.abs(G[:, 0, :]), axis=0)  # (N,)
        out = np.full(N, np.nan)
        for c in range(n + 1):
            mask = chart == c
            if not np.any(mask):
                continue
            u = G[:, :, mask]  # (n+1 comps, orders, M)
            idxs = [i for i in range(n + 1) if i != c]
            v = u[c]  # (orders, M)
            # chart-coordinate derivatives via the quotient recurrence
            f = np.empty((n + 1, n, u.shape[2]), dtype=complex)  # (orders, coords, M)
            for k in range(n + 1):
                acc = np.stack([u[i, k] for i in idxs])  # (coords, M)
                for j in range(k):
                    acc -= math.comb(k, j) * f[j] * v[k - j][None, :]
                f[k] = acc / v[0][None, :]
            w = f[0]
            wb = np.conj(w)
            s = 1.0 + np.sum(np.abs(w) ** 2, axis=0)
            d1 = f[1]
            rows = [d1]
            if n >= 2:
                q1 = np.sum(wb * d1, axis=0)
                rows.append(f[2] - 2.0 * q1[None, :] * d1 / s[None, :])
            if n >= 3:
                q2 = np.sum(wb * f[2], axis=0)
                rows.append(
                    f[3]
                    - 3.0 * (q1[None, :] * f[2] + q2[None, :] * d1) / s[None, :]
                    + 6.0 * (q1**2)[None, :] * d1 / s[None, :] ** 2
                )
            mat = np.stack(rows)  # (n, coords, M)
            if n == 1:
                det = mat[0, 0]
            elif n == 2:
                det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
            else:
                det = (
                    mat[0, 0] * (mat[1, 1] * mat[2, 2] - mat[1, 2] * mat[2, 1])
                    - mat[0, 1] * (mat[1, 0] * mat[2, 2] - mat[1, 2] * mat[2, 0])
                    + mat[0, 2] * (mat[1, 0] * mat[2, 1] - mat[1, 1] * mat[2, 0])
                )
            out[mask] = np.abs(det) ** 2 / s ** (n + 1)
    return out


def xi_fs_on_points(curve: CurveMap, divisors: DivisorSpec, zs) -> np.ndarray:
    """Vectorized xi for curves into the projective target."""
    if not isinstance(curve.target, ProjectiveFS):
        raise JetsError("xi_fs_on_points is specific to the projective target")
    zs = np.asarray(zs, dtype=complex)
    numer = _fs_wronskian_invariant_sq(curve, zs)
    comps = [c for c in divisors.components if isinstance(c, Hyperplane)]
    with np.errstate(all="ignore"):
        denom = _hyperplane_norms_sq(curve, zs, comps)
        return numer / denom


def xi_at(curve: CurveMap, divisors: DivisorSpec, z: complex) -> XiValue:
    """xi(z) = |W|^2 Omega(f(z)) / product of squared section norms."""
    if isinstance(curve.target, P1xP1Flat):
        val = float(xi_on_points(curve, divisors, np.asarray([z]))[0])
        if not np.isfinite(val):
            # distinguish a divisor hit (denominator zero) from blow-up
            NF, DF, NG, DG = _p1xp1_homogeneous(curve, np.asarray([z]))
            denom = _torus_boundary_norm_sq(NF, DF, NG, DG)
            for comp in divisors.components:
                if isinstance(comp, TorusCurve):
                    denom = denom * torus_section_norm_sq(comp, NF, DF, NG, DG)
            if float(denom[0]) == 0.0:
                return XiValue(math.inf, "at_divisor_singularity")
            return XiValue(math.inf, "overflow")
        if val > 1e300:
            return XiValue(val, "overflow")
        return XiValue(max(val, 0.0), "finite")
    if isinstance(curve.target, ProjectiveFS):
        n = curve.target.n
        try:
            frame = covariant_jets(curve, z, n)
            det = complex(np.linalg.det(frame.matrix))
        except JetsError:
            return XiValue(math.inf, "overflow")
        s = 1.0 + float(np.sum(np.abs(frame.coords) ** 2))
        numer = abs(det) ** 2 / s ** (n + 1)
        comps = [c for c in divisors.components if isinstance(c, Hyperplane)]
        denom = float(_hyperplane_norms_sq(curve, np.asarray([z]), comps)[0])
        if denom == 0.0:
            return XiValue(math.inf, "at_divisor_singularity")
        with np.errstate(all="ignore"):
            val = numer / denom
        if not np.isfinite(val) or val > 1e300:
            return XiValue(math.inf, "overflow")
        return XiValue(float(val), "finite")
    raise JetsError("xi is defined for the projective and product targets")


# ---------------------------------------------------------------------------
# Cauchy-Riemann residual


def cr_residual(curve: CurveMap, z: complex, h: float) -> float:
    """|dbar W| by central differences on a 4-point stencil, normalized.

    The whole stencil is evaluated in the chart selected at z.
    """
    if not isinstance(curve.target, (ProjectiveFS, BallBergman)):
        raise JetsError("CR residual applies to the projective and ball targets")
    chart = choose_chart(curve, z)
    w0, _ = wronskian_in_chart(curve, z, chart=chart)
    try:
        wpx, _ = wronskian_in_chart(curve, z + h, chart=chart)
        wmx, _ = wronskian_in_chart(curve, z - h, chart=chart)
        wpy, _ = wronskian_in_chart(curve, z + 1j * h, chart=chart)
        wmy, _ = wronskian_in_chart(curve, z - 1j * h, chart=chart)
    except ChartSelectionError as exc:
        raise JetsError("stencil crosses a chart boundary") from exc
    dbar = ((wpx - wmx) + 1j * (wpy - wmy)) / (4.0 * h)
    return abs(dbar) / (1.0 + abs(w0))
