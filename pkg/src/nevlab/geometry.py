"""Target spaces, their metrics and Christoffel symbols, and divisor data.

Three fixed targets: projective space with the Fubini-Study metric, the
product of two projective lines carrying the flat logarithmic connection of
the torus action, and the unit ball with a Bergman-type metric.  All metric
and Christoffel values come from hand-derived closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Union

import numpy as np

__all__ = [
    "ProjectiveFS",
    "P1xP1Flat",
    "BallBergman",
    "TargetSpace",
    "HermitianMetric",
    "ChristoffelTensor",
    "Hyperplane",
    "TorusCurve",
    "BoundaryComponent",
    "DivisorComponent",
    "DivisorSpec",
    "GeometryError",
    "ChartDomainError",
    "SingularMetricError",
    "dim",
    "metric_at",
    "christoffel_at",
    "christoffel_derivative_at",
    "is_totally_geodesic",
    "general_position_check",
]


class GeometryError(Exception):
    pass


class ChartDomainError(GeometryError):
    pass


class SingularMetricError(GeometryError):
    pass


# ---------------------------------------------------------------------------
# Targets


@dataclass(frozen=True)
class ProjectiveFS:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("projective space dimension must be >= 1")


@dataclass(frozen=True)
class P1xP1Flat:
    pass


@dataclass(frozen=True)
class BallBergman:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("ball dimension must be >= 1")


TargetSpace = Union[ProjectiveFS, P1xP1Flat, BallBergman]


def dim(target: TargetSpace) -> int:
    if isinstance(target, P1xP1Flat):
        return 2
    return target.n


# ---------------------------------------------------------------------------
# Metric and connection values


@dataclass(frozen=True, eq=False)
class HermitianMetric:
    point: tuple
    matrix: np.ndarray  # matrix[i, j] = g_{i jbar}


@dataclass(frozen=True, eq=False)
class ChristoffelTensor:
    point: tuple
    values: np.ndarray  # values[i, j, k] = Gamma_{ij}^k


def _aspoint(w) -> np.ndarray:
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    return w


def metric_at(target: TargetSpace, w) -> HermitianMetric:
    """Metric matrix g_{i jbar} at a chart point.

    For the flat product target the metric is the torus-invariant one,
    diag(1/|x|^2, 1/|y|^2); its Levi-Civita connection is the flat one.
    """
    w = _aspoint(w)
    n = dim(target)
    if w.shape != (n,):
        raise GeometryError(f"expected a point of dimension {n}")
    if isinstance(target, ProjectiveFS):
        s = 1.0 + float(np.vdot(w, w).real)
        g = np.eye(n, dtype=complex) / s - np.outer(np.conj(w), w) / s**2
        return HermitianMetric(tuple(w), g)
    if isinstance(target, BallBergman):
        t = 1.0 - float(np.vdot(w, w).real)
        if t <= 0:
            raise ChartDomainError("point outside the unit ball")
        g = np.eye(n, dtype=complex) / t + np.outer(np.conj(w), w) / t**2
        return HermitianMetric(tuple(w), g)
    if isinstance(target, P1xP1Flat):
        x, y = w
        if x == 0 or y == 0:
            raise ChartDomainError("flat chart requires x != 0 and y != 0")
        g = np.diag([1.0 / abs(x) ** 2, 1.0 / abs(y) ** 2]).astype(complex)
        return HermitianMetric(tuple(w), g)
    raise TypeError(f"unknown target {target!r}")


def _metric_derivative(target: TargetSpace, w: np.ndarray) -> np.ndarray:
    """Closed-form holomorphic derivatives d[i, j, l] = del_i g_{j lbar}."""
    n = dim(target)
    wb = np.conj(w)
    eye = np.eye(n)
    if isinstance(target, ProjectiveFS):
        s = 1.0 + float(np.vdot(w, w).real)
        d = (
            -np.einsum("jl,i->ijl", eye, wb) / s**2
            - np.einsum("il,j->ijl", eye, wb) / s**2
            + 2.0 * np.einsum("i,j,l->ijl", wb, wb, w) / s**3
        )
        return d
    if isinstance(target, BallBergman):
        t = 1.0 - float(np.vdot(w, w).real)
        d = (
            np.einsum("jl,i->ijl", eye, wb) / t**2
            + np.einsum("il,j->ijl", eye, wb) / t**2
            + 2.0 * np.einsum("i,j,l->ijl", wb, wb, w) / t**3
        )
        return d
    if isinstance(target, P1xP1Flat):
        x, y = w
        d = np.zeros((2, 2, 2), dtype=complex)
        # del_x (1/(x xbar)) = -1/(x^2 xbar), similarly in y
        d[0, 0, 0] = -1.0 / (x**2 * np.conj(x))
        d[1, 1, 1] = -1.0 / (y**2 * np.conj(y))
        return d
    raise TypeError(f"unknown target {target!r}")


def christoffel_at(target: TargetSpace, w) -> ChristoffelTensor:
    """Christoffel symbols Gamma_{ij}^k of the target's connection at w.

    Computed as (del_i g_{j lbar}) g^{lbar k} from the closed-form metric
    derivative and the inverse metric matrix.
    """
    w = _aspoint(w)
    g = metric_at(target, w).matrix
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularMetricError(f"metric condition number {cond:.3g} too large")
    dg = _metric_derivative(target, w)
    ginv = np.linalg.inv(g)  # ginv[l, k] = g^{lbar k}
    gamma = np.einsum("ijl,lk->ijk", dg, ginv)
    return ChristoffelTensor(tuple(w), gamma)


def christoffel_derivative_at(target: TargetSpace, w) -> np.ndarray:
    """Holomorphic derivative dG[a, i, j, k] = del_a Gamma_{ij}^k (closed form)."""
    w = _aspoint(w)
    n = dim(target)
    wb = np.conj(w)
    eye = np.eye(n)
    sym = np.einsum("ik,j->ijk", eye, wb) + np.einsum("jk,i->ijk", eye, wb)
    if isinstance(target, ProjectiveFS):
        s = 1.0 + float(np.vdot(w, w).real)
        # Gamma = -sym / s, del_a s = wbar_a
        return np.einsum("ijk,a->aijk", sym, wb) / s**2
    if isinstance(target, BallBergman):
        t = 1.0 - float(np.vdot(w, w).real)
        if t <= 0:
            raise ChartDomainError("point outside the unit ball")
        # Gamma = sym / t, del_a t = -wbar_a
        return np.einsum("ijk,a->aijk", sym, wb) / t**2
    if isinstance(target, P1xP1Flat):
        x, y = w
        if x == 0 or y == 0:
            raise ChartDomainError("flat chart requires x != 0 and y != 0")
        d = np.zeros((2, 2, 2, 2), dtype=complex)
        d[0, 0, 0, 0] = 1.0 / x**2
        d[1, 1, 1, 1] = 1.0 / y**2
        return d
    raise TypeError(f"unknown target {target!r}")


# ---------------------------------------------------------------------------
# Divisor components


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane in P^n given by homogeneous coefficients of length n+1."""

    coefficients: tuple

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=complex)
        if a.ndim != 1 or len(a) < 2:
            raise GeometryError("hyperplane needs >= 2 homogeneous coefficients")
        if not np.any(np.abs(a) > 0):
            raise GeometryError("hyperplane coefficient vector must be nonzero")
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in a))

    def array(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)


@dataclass(frozen=True)
class TorusCurve:
    """Closure of {x^m y^n = c} in the product of two projective lines.

    Exponents are normalized so gcd(|m|, |n|) = 1 with a canonical sign; the
    constant of a non-primitive input is replaced by its principal root, which
    selects one irreducible component of the reducible input divisor.
    """

    m: int
    n: int
    c: complex
    normalized_from: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.c == 0:
            raise GeometryError("torus curve constant must be nonzero")
        if self.m == 0 and self.n == 0:
            raise GeometryError("torus curve exponents cannot both vanish")
        g = math.gcd(abs(self.m), abs(self.n))
        m, n, c, note = self.m, self.n, complex(self.c), self.normalized_from
        if g > 1:
            note = (m, n, c)
            m, n, c = m // g, n // g, c ** (1.0 / g)
        if m < 0 or (m == 0 and n < 0):
            note = note or (m, n, c)
            m, n, c = -m, -n, 1.0 / c
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", complex(c))
        object.__setattr__(self, "normalized_from", note)

    @property
    def bidegree(self) -> tuple[int, int]:
        """Degrees of the defining section in the two factors."""
        return abs(self.m), abs(self.n)


@dataclass(frozen=True)
class BoundaryComponent:
    """One of the four boundary lines of the torus in the product target."""

    which: str  # "x0" | "xinf" | "y0" | "yinf"

    def __post_init__(self):
        if self.which not in ("x0", "xinf", "y0", "yinf"):
            raise GeometryError(f"unknown boundary component {self.which!r}")

    @property
    def bidegree(self) -> tuple[int, int]:
        return (1, 0) if self.which in ("x0", "xinf") else (0, 1)


DivisorComponent = Union[Hyperplane, TorusCurve, BoundaryComponent]


@dataclass(frozen=True)
class DivisorSpec:
    target: TargetSpace
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        for comp in comps:
            _check_component(self.target, comp)
        hyps = [c for c in comps if isinstance(c, Hyperplane)]
        for a, b in combinations(hyps, 2):
            if _proportional(a.array(), b.array()):
                raise GeometryError("hyperplane components must be pairwise non-proportional")


def _check_component(target: TargetSpace, comp: DivisorComponent):
    if isinstance(comp, Hyperplane):
        if not isinstance(target, ProjectiveFS):
            raise GeometryError("hyperplane components require a projective target")
        if len(comp.coefficients) != target.n + 1:
            raise GeometryError(
                f"hyperplane needs {target.n + 1} coefficients, got {len(comp.coefficients)}"
            )
    elif isinstance(comp, (TorusCurve, BoundaryComponent)):
        if not isinstance(target, P1xP1Flat):
            raise GeometryError("torus/boundary components require the product target")
    else:
        raise GeometryError(f"unknown divisor component {comp!r}")


def _proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.vstack([a / np.linalg.norm(a), b / np.linalg.norm(b)])
    return np.linalg.svd(m, compute_uv=False)[-1] <= tol


def is_totally_geodesic(target: TargetSpace, component: DivisorComponent) -> bool:
    """Every representable component is totally geodesic for its connection.

    Hyperplanes are the linear subspaces of the projective target; torus
    curves are affine-linear in logarithmic coordinates.  This validates the
    component/target pairing and returns True.
    """
    _check_component(target, component)
    return True


def general_position_check(hyperplanes: list) -> bool:
    """True iff every subset of at most n+1 hyperplanes is linearly independent."""
    arrays = []
    for h in hyperplanes:
        a = h.array() if isinstance(h, Hyperplane) else np.asarray(h, dtype=complex)
        arrays.append(a / np.linalg.norm(a))
    if not arrays:
        return True
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise GeometryError("hyperplane coefficient vectors have mixed lengths")
    d = lengths.pop()  # d = n + 1
    k = min(len(arrays), d)
    for subset in combinations(arrays, k):
        m = np.vstack(subset)
        if k == d:
            if abs(np.linalg.det(m)) <= 1e-10:
                return False
        else:
            if np.linalg.svd(m, compute_uv=False)[-1] <= 1e-10:
                return False
    return True
