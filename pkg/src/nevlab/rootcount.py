"""Zero localization by the argument principle and truncated counting functions.

Zeros of an entire function inside a disc are found by recursive quadrisection
of the disc's bounding box, with winding numbers evaluated on circumscribed
discs.  Everything is deterministic: fixed node doublings, a fixed jitter
sequence for contour-grazing zeros, and a canonical output ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exprlang import Expr, compile_expr, differentiate, is_entire

__all__ = [
    "Disc",
    "ZeroSet",
    "RootCountError",
    "WindingConvergenceError",
    "MultiplicityOverflowError",
    "winding_number",
    "locate_zeros",
    "n_trunc",
    "N_trunc",
]

MULTIPLICITY_CAP = 16
TERMINAL_DIAMETER = 1e-9
MAX_NODES = 1 << 20
MIN_NODES = 64


class RootCountError(Exception):
    pass


class WindingConvergenceError(RootCountError):
    pass


class MultiplicityOverflowError(RootCountError):
    pass


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0):
            raise RootCountError("disc radius must be positive")


@dataclass(frozen=True)
class ZeroSet:
    """Zeros (location, multiplicity) inside an enclosing disc.

    Locations are localized to within TERMINAL_DIAMETER and sorted by
    (|z|, arg z).  The multiplicities sum to the winding number of the
    enclosing disc.
    """

    zeros: tuple  # of (complex, int)
    disc: Disc
    localization_radius: float = TERMINAL_DIAMETER

    def total(self) -> int:
        return sum(m for _, m in self.zeros)


def _winding_raw(h_fn, hp_fn, disc: Disc, nodes: int) -> float:
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    z = disc.center + disc.radius * np.exp(1j * theta)
    with np.errstate(all="ignore"):
        val = hp_fn(z) / h_fn(z) * (z - disc.center)
    val = np.asarray(val, dtype=complex)
    if not np.all(np.isfinite(val)):
        return math.nan
    return float(np.mean(val).real)


def _winding_with_radius(h: Expr, disc: Disc) -> tuple[int, float]:
    if not is_entire(h):
        raise RootCountError("winding_number requires an entire expression")
    h_fn = compile_expr(h)
    hp_fn = compile_expr(differentiate(h))
    # deterministic jitter sequence guards against contour-grazing zeros;
    # steps grow geometrically so a zero blocks at most a couple of levels;
    # early attempts get a modest node budget, the last one the full budget
    for j in range(0, 8):
        radius = disc.radius * (1.0 + 1e-6 * (4**j - 1))
        d = Disc(disc.center, radius)
        cap = MAX_NODES if j == 7 else (1 << 14)
        prev = math.nan
        nodes = MIN_NODES
        while nodes <= cap:
            raw = _winding_raw(h_fn, hp_fn, d, nodes)
            if math.isfinite(raw) and abs(raw - round(raw)) < 0.1:
                if math.isfinite(prev) and round(prev) == round(raw):
                    return int(round(raw)), radius
                prev = raw
            else:
                prev = math.nan
            nodes *= 2
        # next jitter radius
    raise WindingConvergenceError(
        f"winding integral did not stabilize on disc({disc.center}, {disc.radius})"
    )


def winding_number(h: Expr, disc: Disc) -> int:
    """(1/2 pi i) contour integral of h'/h over the disc boundary."""
    return _winding_with_radius(h, disc)[0]


@dataclass(frozen=True)
class _Box:
    x0: float
    y0: float
    x1: float
    y1: float

    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def circumdisc(self) -> Disc:
        half = 0.5 * max(self.x1 - self.x0, self.y1 - self.y0)
        return Disc(self.center(), half * math.sqrt(2.0) + 1e-300)

    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def split(self) -> list["_Box"]:
        xm = 0.5 * (self.x0 + self.x1)
        ym = 0.5 * (self.y0 + self.y1)
        return [
            _Box(self.x0, self.y0, xm, ym),
            _Box(xm, self.y0, self.x1, ym),
            _Box(self.x0, ym, xm, self.y1),
            _Box(xm, ym, self.x1, self.y1),
        ]


def locate_zeros(h: Expr, disc: Disc) -> ZeroSet:
    """All zeros of h in the disc, with multiplicities, to within 1e-9."""
    total, used_radius = _winding_with_radius(h, disc)
    if total > 64:
        raise RootCountError(f"winding number {total} exceeds the localization budget")
    if total == 0:
        return ZeroSet((), disc)
    r = disc.radius
    c = disc.center
    # irrational sub-box offset keeps zeros off the dyadic subdivision grid
    # (a zero on a box corner sits exactly on circumscribed contours and
    # makes the winding quadrature needlessly slow)
    off = complex(0.6180339887498949e-2, 0.4142135623730951e-2) * r
    c0 = c + off
    half = r * 1.03
    root_box = _Box(c0.real - half, c0.imag - half, c0.real + half, c0.imag + half)
    candidates: list[tuple[complex, int]] = []
    stack = [root_box]
    while stack:
        box = stack.pop(0)  # breadth-first, deterministic scan order
        w = winding_number(h, box.circumdisc())
        if w == 0:
            continue
        if box.diameter() <= TERMINAL_DIAMETER:
            if w > MULTIPLICITY_CAP:
                raise MultiplicityOverflowError(
                    f"unresolved cluster of winding {w} at {box.center()}"
                )
            candidates.append((box.center(), w))
            continue
        stack.extend(box.split())
    # circumscribed discs overlap: deduplicate nearby candidates, first wins
    zeros: list[tuple[complex, int]] = []
    for z, w in candidates:
        if abs(z - c) > used_radius:
            continue
        if any(abs(z - z0) <= 2.0 * TERMINAL_DIAMETER for z0, _ in zeros):
            continue
        # refine multiplicity on a tight disc around the candidate
        m = winding_number(h, Disc(z, 64.0 * TERMINAL_DIAMETER))
        if m > MULTIPLICITY_CAP:
            raise MultiplicityOverflowError(f"multiplicity {m} exceeds cap at {z}")
        if m > 0:
            zeros.append((z, m))
    zeros.sort(key=lambda t: (abs(t[0]), math.atan2(t[0].imag, t[0].real)))
    zs = ZeroSet(tuple(zeros), disc)
    if zs.total() != total:
        raise RootCountError(
            f"multiplicity conservation failed: {zs.total()} localized vs winding {total}"
        )
    return zs


def n_trunc(zeros: ZeroSet, t: float, k: int) -> int:
    """Truncated unintegrated counting: sum of min(mult, k) over |z| < t."""
    if not (1 <= k <= MULTIPLICITY_CAP):
        raise RootCountError("truncation level must lie in 1..16")
    if t > zeros.disc.radius * (1.0 + 1e-12):
        raise RootCountError("t exceeds the localized region")
    return sum(min(m, k) for z, m in zeros.zeros if abs(z) < t)


def N_trunc(zeros: ZeroSet, r: float, k: int) -> float:
    """Truncated integrated counting function with base radius 1.

    Zeros with |z| <= 1 contribute min(mult, k) * log r; zeros with
    1 < |z| < r contribute min(mult, k) * log(r / |z|).
    """
    if r < 1.0:
        raise RootCountError("counting integral starts at radius 1")
    if not (1 <= k <= MULTIPLICITY_CAP):
        raise RootCountError("truncation level must lie in 1..16")
    if r > zeros.disc.radius * (1.0 + 1e-12):
        raise RootCountError("r exceeds the localized region")
    acc = 0.0
    for z, m in zeros.zeros:
        a = abs(z)
        if a >= r:
            continue
        acc += min(m, k) * (math.log(r) if a <= 1.0 else math.log(r / a))
    return acc
