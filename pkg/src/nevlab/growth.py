"""Nevanlinna growth functionals: order function, proximity, Jensen checks,
circle means of log+ xi, and the allowance model for the error term.

The order function is computed from the area-integral definition
T(r) = int_1^r dt/t int_{|z|<t} (pullback curvature density), reduced to a
single radial integral against the kernel log(r / max(rho, 1)).  Circle means
use doubling trapezoid quadrature; all node sequences are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .exprlang import Expr, MeromorphicFn, compile_expr, differentiate, is_entire
from .geometry import (
    BoundaryComponent,
    DivisorSpec,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TargetSpace,
    TorusCurve,
    dim,
)
from .jets import (
    CurveMap,
    _hyperplane_norms_sq,
    _p1xp1_homogeneous,
    boundary_section_norm_sq,
    torus_section_norm_sq,
    xi_on_points,
    xi_at,
)
from .rootcount import Disc, ZeroSet, locate_zeros, N_trunc

__all__ = [
    "LineBundle",
    "GrowthTable",
    "SfrModel",
    "GrowthError",
    "QuadratureError",
    "order_function",
    "proximity",
    "jensen_residual",
    "log_plus_xi_mean",
    "fit_sfr",
    "canonical_bundle",
    "component_bundle",
    "component_label",
    "circle_mean",
]


class GrowthError(Exception):
    pass


class QuadratureError(GrowthError):
    pass


MAX_CIRCLE_NODES = 1 << 17
MAX_RADIAL_NODES = 1 << 14


# ---------------------------------------------------------------------------
# Line bundles


@dataclass(frozen=True)
class LineBundle:
    """O(d) on projective space (degrees of length 1) or O(m, n) on the
    product of two projective lines (degrees of length 2)."""

    degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.degrees) not in (1, 2):
            raise GrowthError("line bundle needs 1 or 2 degrees")

    def label(self) -> str:
        return "O(" + ",".join(str(d) for d in self.degrees) + ")"


def canonical_bundle(target: TargetSpace) -> LineBundle:
    if isinstance(target, ProjectiveFS):
        return LineBundle((-target.n - 1,))
    if isinstance(target, P1xP1Flat):
        return LineBundle((-2, -2))
    raise GrowthError("canonical bundle implemented for the compact targets")


def component_bundle(comp) -> LineBundle:
    """Line bundle of the divisor component (for a single component)."""
    if isinstance(comp, Hyperplane):
        return LineBundle((1,))
    if isinstance(comp, (TorusCurve, BoundaryComponent)):
        return LineBundle(comp.bidegree)
    raise GrowthError(f"unknown divisor component {comp!r}")


def component_label(comp) -> str:
    if isinstance(comp, Hyperplane):
        return "H(" + ";".join(f"{c.real:g}{c.imag:+g}i" for c in comp.coefficients) + ")"
    if isinstance(comp, TorusCurve):
        return f"C({comp.m};{comp.n};{comp.c.real:g}{comp.c.imag:+g}i)"
    if isinstance(comp, BoundaryComponent):
        return f"E({comp.which})"
    raise GrowthError(f"unknown divisor component {comp!r}")


# ---------------------------------------------------------------------------
# Curvature densities (with respect to planar Lebesgue measure)


def _p1_density(fn: MeromorphicFn):
    """Density (1/pi) |n'd - nd'|^2 / (|n|^2 + |d|^2)^2, scale-guarded."""
    nf = compile_expr(fn.num)
    df = compile_expr(fn.den)
    npf = compile_expr(differentiate(fn.num))
    dpf = compile_expr(differentiate(fn.den))

    def dens(z):
        with np.errstate(all="ignore"):
            n, d = np.asarray(nf(z)), np.asarray(df(z))
            scale = np.maximum(np.abs(n), np.abs(d))
            scale = np.where(scale > 0, scale, 1.0)
            n, d = n / scale, d / scale
            w = (np.asarray(npf(z)) / scale) * d - n * (np.asarray(dpf(z)) / scale)
            out = np.abs(w) ** 2 / (np.abs(n) ** 2 + np.abs(d) ** 2) ** 2 / np.pi
        return out

    return dens


def _fs_density(curve: CurveMap):
    """FS pullback density on the homogeneous representative, scale-guarded."""
    comps = curve.components
    fns = [compile_expr(g) for g in comps]
    dfns = [compile_expr(differentiate(g)) for g in comps]

    def dens(z):
        with np.errstate(all="ignore"):
            g = np.stack([np.asarray(f(z), dtype=complex) for f in fns])
            gp = np.stack([np.asarray(f(z), dtype=complex) for f in dfns])
            scale = np.max(np.abs(g), axis=0)
            scale = np.where(scale > 0, scale, 1.0)
            g, gp = g / scale, gp / scale
            g2 = np.sum(np.abs(g) ** 2, axis=0)
            gp2 = np.sum(np.abs(gp) ** 2, axis=0)
            cross = np.abs(np.sum(gp * np.conj(g), axis=0)) ** 2
            out = (gp2 * g2 - cross) / g2**2 / np.pi
        return out

    return dens


_ANGULAR_CACHE: dict = {}


def _angular_integral(dens, key, rho: float) -> float:
    """Integral of the density over the circle |z| = rho, times rho."""
    if rho == 0.0:
        return 0.0
    ck = (key, rho)
    cached = _ANGULAR_CACHE.get(ck)
    if cached is not None:
        return cached
    nodes = 64
    prev = math.nan
    while nodes <= MAX_CIRCLE_NODES:
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        vals = np.asarray(dens(rho * np.exp(1j * theta)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"curvature density not finite on |z| = {rho}")
        cur = float(np.mean(vals)) * 2.0 * np.pi * rho
        if math.isfinite(prev) and abs(cur - prev) <= 1e-9 + 1e-8 * abs(cur):
            _ANGULAR_CACHE[ck] = cur
            return cur
        prev = cur
        nodes *= 2
    _ANGULAR_CACHE[ck] = prev
    return prev


def _radial_T(dens, key, r: float) -> float:
    """T(r) = int_0^r A(rho) log(r / max(rho,1)) drho by doubling Simpson."""
    if r < 1.0:
        raise GrowthError("order function starts at radius 1")
    if r == 1.0:
        return 0.0

    def simpson(a: float, b: float, f, n: int) -> float:
        x = np.linspace(a, b, n + 1)
        y = np.array([f(t) for t in x])
        h = (b - a) / n
        return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))

    def f_inner(rho):  # rho in [0, 1]: kernel is the constant log r
        return _angular_integral(dens, key, rho) * math.log(r)

    def f_outer(rho):  # rho in [1, r]
        return _angular_integral(dens, key, rho) * math.log(r / rho)

    total = None
    n = 32
    while n <= MAX_RADIAL_NODES:
        cur = simpson(0.0, 1.0, f_inner, n) + simpson(1.0, r, f_outer, n)
        if total is not None and abs(cur - total) <= 1e-9 + 1e-7 * abs(cur):
            return cur
        total = cur
        n *= 2
    raise QuadratureError(f"order-function quadrature did not converge at r = {r}")


_T_CACHE: dict = {}


def _t_p1_factor(fn: MeromorphicFn, r: float) -> float:
    key = ("p1", fn, r)
    v = _T_CACHE.get(key)
    if v is None:
        v = _radial_T(_p1_density(fn), ("p1", fn), r)
        _T_CACHE[key] = v
    return v


def _t_fs(curve: CurveMap, r: float) -> float:
    key = ("fs", curve, r)
    v = _T_CACHE.get(key)
    if v is None:
        v = _radial_T(_fs_density(curve), ("fs", curve), r)
        _T_CACHE[key] = v
    return v


def order_function(curve: CurveMap, bundle: LineBundle, r: float) -> float:
    """Order function T_f(r, bundle) with base radius 1."""
    target = curve.target
    if isinstance(target, ProjectiveFS):
        if len(bundle.degrees) != 1:
            raise GrowthError("projective target takes a single-degree bundle")
        return bundle.degrees[0] * _t_fs(curve, r)
    if isinstance(target, P1xP1Flat):
        if len(bundle.degrees) != 2:
            raise GrowthError("product target takes a bidegree bundle")
        m, n = bundle.degrees
        F, G = curve.components
        out = 0.0
        if m != 0:
            out += m * _t_p1_factor(F, r)
        if n != 0:
            out += n * _t_p1_factor(G, r)
        return out
    raise GrowthError("order function implemented for the compact targets")


# ---------------------------------------------------------------------------
# Circle means


def circle_mean(
    values,
    r: float,
    max_bad_fraction: float = 0.05,
    rtol: float = 1e-6,
    atol: float = 1e-9,
) -> float:
    """Mean over |z| = r of a real-valued vectorized function of z.

    Nonfinite nodes (singular hits) are masked out and the mean renormalized;
    node counts double until two consecutive levels agree.
    """
    nodes = 64
    prev = math.nan
    while nodes <= MAX_CIRCLE_NODES:
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        vals = np.asarray(values(r * np.exp(1j * theta)), dtype=float)
        good = np.isfinite(vals)
        if not np.any(good):
            raise QuadratureError(f"no finite quadrature nodes on |z| = {r}")
        if np.count_nonzero(~good) > max_bad_fraction * nodes:
            raise QuadratureError(f"too many singular nodes on |z| = {r}")
        cur = float(np.mean(vals[good]))
        if math.isfinite(prev) and abs(cur - prev) <= atol + rtol * abs(cur):
            return cur
        prev = cur
        nodes *= 2
    raise QuadratureError(f"circle mean did not converge on |z| = {r}")


def _section_norm_sq_fn(curve: CurveMap, component):
    if isinstance(curve.target, ProjectiveFS):
        if not isinstance(component, Hyperplane):
            raise GrowthError("projective proximity takes a hyperplane")
        return lambda zs: _hyperplane_norms_sq(curve, np.asarray(zs), [component])
    if isinstance(curve.target, P1xP1Flat):

        def norms(zs):
            NF, DF, NG, DG = _p1xp1_homogeneous(curve, np.asarray(zs))
            if isinstance(component, TorusCurve):
                return torus_section_norm_sq(component, NF, DF, NG, DG)
            if isinstance(component, BoundaryComponent):
                return boundary_section_norm_sq(component, NF, DF, NG, DG)
            raise GrowthError(f"unknown component {component!r}")

        return norms
    raise GrowthError("proximity implemented for the compact targets")


def proximity(curve: CurveMap, component, r: float) -> float:
    """m(r, component) = circle mean of log+ (1 / section norm)."""
    if r < 1.0:
        raise GrowthError("proximity starts at radius 1")
    norm_sq = _section_norm_sq_fn(curve, component)

    def vals(zs):
        with np.errstate(all="ignore"):
            s = np.asarray(norm_sq(zs), dtype=float)
            out = np.maximum(0.0, -0.5 * np.log(s))
            out = np.where(s > 0, out, np.nan)
        return out

    return circle_mean(vals, r)


# ---------------------------------------------------------------------------
# Jensen


def jensen_residual(h: Expr, r: float) -> float:
    """|mean_r log|h| - mean_1 log|h| - N(r, zeros of h)| (base circle |z|=1)."""
    if not is_entire(h):
        raise GrowthError("Jensen residual requires an entire expression")
    if r < 1.0:
        raise GrowthError("Jensen residual needs r >= 1")
    fn = compile_expr(h)

    def logabs(zs):
        with np.errstate(all="ignore"):
            a = np.abs(np.asarray(fn(zs), dtype=complex))
            return np.where(a > 0, np.log(a), np.nan)

    mean_r = circle_mean(logabs, r)
    mean_1 = circle_mean(logabs, 1.0)
    zeros = locate_zeros(h, Disc(0j, r * (1.0 + 1e-3)))
    return abs(mean_r - mean_1 - N_trunc(zeros, r, 16))


# ---------------------------------------------------------------------------
# log+ xi circle means


def log_plus_xi_mean(curve: CurveMap, divisors: DivisorSpec, r: float) -> float:
    """Circle mean of log+ xi with singular-node exclusion."""
    if isinstance(curve.target, P1xP1Flat):

        def vals(zs):
            with np.errstate(all="ignore"):
                xi = np.asarray(xi_on_points(curve, divisors, zs), dtype=float)
                out = np.where(xi > 1.0, np.log(np.maximum(xi, 1.0)), 0.0)
                out = np.where(np.isfinite(xi), out, np.nan)
            return out

        return circle_mean(vals, r, atol=1e-7)

    if isinstance(curve.target, ProjectiveFS):
        from .jets import xi_fs_on_points

        def vals_fs(zs):
            with np.errstate(all="ignore"):
                xi = np.asarray(xi_fs_on_points(curve, divisors, zs), dtype=float)
                out = np.where(xi > 1.0, np.log(np.maximum(xi, 1.0)), 0.0)
                out = np.where(np.isfinite(xi), out, np.nan)
            return out

        return circle_mean(vals_fs, r, atol=1e-7)

    raise GrowthError("log+ xi means implemented for the compact targets")


# ---------------------------------------------------------------------------
# Growth table


@dataclass(frozen=True)
class GrowthTable:
    """Per-radius growth functionals; the first T column is the primary one
    (the bundle entering the inequality's left-hand side)."""

    radii: tuple
    t_cols: tuple  # of (label, tuple of values)
    n_cols: tuple  # of (label like "N1:...", tuple of values)
    m_cols: tuple  # of (label, tuple of values)
    logxi: tuple | None = None

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise GrowthError("radius grid must be strictly ascending")
        for label, vals in self.t_cols + self.n_cols:
            if len(vals) != len(radii):
                raise GrowthError(f"column {label} has wrong length")
            if any(b < a - 1e-6 for a, b in zip(vals, vals[1:])):
                raise GrowthError(f"column {label} must be nondecreasing")

    def primary_T(self) -> tuple:
        return self.t_cols[0][1]

    def to_csv(self) -> str:
        header = ["r"]
        cols = [self.radii]
        for label, vals in self.t_cols:
            header.append(f"T:{label}")
            cols.append(vals)
        for label, vals in self.n_cols:
            header.append(label)
            cols.append(vals)
        for label, vals in self.m_cols:
            header.append(f"m:{label}")
            cols.append(vals)
        if self.logxi is not None:
            header.append("logxi")
            cols.append(self.logxi)
        lines = [",".join(header)]
        for i in range(len(self.radii)):
            lines.append(",".join(f"{col[i]:.12g}" for col in cols))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Allowance model


@dataclass(frozen=True)
class SfrModel:
    """Allowance c0 + c1 log r + c2 log+ T(r) for the inequality error term."""

    c0: float
    c1: float
    c2: float
    eps: float
    exceptional: tuple  # radii discarded from the fit

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise GrowthError("allowance slopes must be nonnegative")

    def allowance(self, r: float, t_value: float) -> float:
        return max(
            0.0,
            self.c0 + self.c1 * math.log(r) + self.c2 * math.log(max(t_value, 1.0)),
        )


def fit_sfr(table: GrowthTable, margins, eps: float) -> SfrModel:
    """Fit the allowance model to the deficits (positive parts of -margins).

    The worst floor(eps * M) radii are discarded as the exceptional set.  The
    least-squares fit (c1, c2 >= 0) is then lifted by raising c0 so that the
    model covers every retained deficit (an upper envelope anchored at the
    fitted slopes); for deficits lying exactly on the model the lift is zero.
    """
    radii = np.asarray(table.radii, dtype=float)
    margins = np.asarray(margins, dtype=float)
    M = len(radii)
    if M < 8:
        raise GrowthError("allowance fit needs at least 8 radii")
    if not (0.0 <= eps <= 0.1):
        raise GrowthError("eps must lie in [0, 0.1]")
    tvals = np.asarray(table.primary_T(), dtype=float)
    deficits = np.maximum(0.0, -margins)
    n_drop = int(math.floor(eps * M))
    order = sorted(range(M), key=lambda i: (-deficits[i], i))
    dropped = sorted(order[:n_drop])
    keep = np.array([i for i in range(M) if i not in set(dropped)], dtype=int)
    exceptional = tuple(float(radii[i]) for i in dropped)
    d = deficits[keep]
    if np.all(d == 0.0):
        return SfrModel(0.0, 0.0, 0.0, eps, exceptional)
    A = np.column_stack(
        [np.ones(len(keep)), np.log(radii[keep]), np.log(np.maximum(tvals[keep], 1.0))]
    )
    res = lsq_linear(A, d, bounds=([-np.inf, 0.0, 0.0], [np.inf, np.inf, np.inf]))
    # log+ T is often nearly collinear with log r; prefer the pure-log-r model
    # when it explains the deficits equally well
    res2 = lsq_linear(A[:, :2], d, bounds=([-np.inf, 0.0], [np.inf, np.inf]))
    if res2.cost <= res.cost + 1e-12 * (1.0 + res.cost):
        c0, c1, c2 = float(res2.x[0]), float(res2.x[1]), 0.0
    else:
        c0, c1, c2 = (float(v) for v in res.x)
    model = A @ np.array([c0, c1, c2])
    lift = float(np.max(d - model))
    if lift > 0:
        c0 += lift
    return SfrModel(c0, c1, c2, eps, exceptional)
