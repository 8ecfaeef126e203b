"""Piecewise-linear homotopies with breakpoints moving affinely in time.

A leg is a list of spans.  Inside one span every breakpoint ``(r(t), v(t))``
is an affine function of ``t``, so every action is affine in ``t`` on each
sub-interval where no segment slope is an integer.  Event times are then
roots of affine equations and stay exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import pairwise
from typing import Iterable, Optional, Sequence

from .core import ManifoldParams, PLProfile, format_fraction, integers_between, to_fraction, zero_profile
from .spectrum import VARIANTS, ActionSource, levels_for_degree


class CaseMismatch(ValueError):
    """Parameters or data do not satisfy the defining inequalities of a case."""


class CaseDataError(ValueError):
    """Case data is internally inconsistent (landmarks, slopes, or target profile)."""


# ---------------------------------------------------------------------------
# affine functions of time


@dataclass(frozen=True)
class Affine:
    """``a + b*t`` with rational coefficients."""

    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", to_fraction(self.a))
        object.__setattr__(self, "b", to_fraction(self.b))

    @classmethod
    def lerp(cls, x0, x1) -> "Affine":
        """The affine function equal to ``x0`` at 0 and ``x1`` at 1."""
        x0, x1 = to_fraction(x0), to_fraction(x1)
        return cls(x0, x1 - x0)

    def __call__(self, t) -> Fraction:
        return self.a + self.b * t

    def __add__(self, other):
        if isinstance(other, Affine):
            return Affine(self.a + other.a, self.b + other.b)
        return Affine(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Affine):
            return Affine(self.a - other.a, self.b - other.b)
        return Affine(self.a - other, self.b)

    def __neg__(self):
        return Affine(-self.a, -self.b)

    def __mul__(self, c):
        return Affine(self.a * c, self.b * c)

    __rmul__ = __mul__

    def reparam(self, lo: Fraction, hi: Fraction) -> "Affine":
        """Compose with ``t = lo + (hi - lo) s``."""
        return Affine(self.a + self.b * lo, self.b * (hi - lo))

    def meet(self, other: "Affine") -> tuple[str, Optional[Fraction]]:
        """``("identical", None)``, ``("never", None)`` or ``("once", t)``."""
        d = self - other
        if d.b == 0:
            return ("identical", None) if d.a == 0 else ("never", None)
        return "once", -d.a / d.b

    def text(self) -> str:
        if self.b == 0:
            return format_fraction(self.a)
        return f"{format_fraction(self.a)} + {format_fraction(self.b)}*t"


# ---------------------------------------------------------------------------
# legs


@dataclass(frozen=True)
class Breakpoint:
    id: str
    r: Affine
    v: Affine


@dataclass(frozen=True)
class Span:
    t0: Fraction
    t1: Fraction
    points: tuple[Breakpoint, ...]

    def at(self, t: Fraction) -> list[tuple[Fraction, Fraction]]:
        out: list[tuple[Fraction, Fraction]] = []
        for bp in self.points:
            r, v = bp.r(t), bp.v(t)
            if out and out[-1][0] == r:
                if out[-1][1] != v:
                    raise ValueError(f"coincident breakpoints disagree at r = {r}, t = {t}")
                continue
            out.append((r, v))
        return out


@dataclass(frozen=True)
class HomotopyLeg:
    """One homotopy leg on ``t in [0, 1]``.

    ``kind`` is ``"Fold"``, ``"Line1"``, ``"Line2"`` or ``"StraightLine"``;
    ``info`` carries the fold index or the case number.  ``absorbed`` lists
    ``(t, r)`` for kinks of the target swallowed by the clamp line.
    """

    kind: str
    spans: tuple[Span, ...]
    info: tuple[tuple[str, object], ...] = ()
    absorbed: tuple[tuple[Fraction, Fraction], ...] = ()

    def span_at(self, t: Fraction) -> Span:
        t = to_fraction(t)
        if not 0 <= t <= 1:
            raise ValueError("t must lie in [0, 1]")
        if t == self.spans[0].t0:
            return self.spans[0]
        for sp in self.spans:
            if sp.t0 < t <= sp.t1:
                return sp
        raise AssertionError("spans do not cover [0, 1]")

    def profile_at(self, t) -> PLProfile:
        """The profile at time ``t``; at a span boundary the earlier span is used."""
        t = to_fraction(t)
        return PLProfile(tuple(self.span_at(t).at(t)))

    def restrict(self, lo, hi) -> "HomotopyLeg":
        """The sub-leg on ``[lo, hi]`` reparametrized to ``[0, 1]``."""
        lo, hi = to_fraction(lo), to_fraction(hi)
        if not 0 <= lo < hi <= 1:
            raise ValueError("need 0 <= lo < hi <= 1")
        spans = []
        for sp in self.spans:
            a, b = max(sp.t0, lo), min(sp.t1, hi)
            if a >= b:
                continue
            pts = tuple(Breakpoint(bp.id, bp.r.reparam(lo, hi), bp.v.reparam(lo, hi)) for bp in sp.points)
            spans.append(Span((a - lo) / (hi - lo), (b - lo) / (hi - lo), pts))
        absorbed = tuple(((t - lo) / (hi - lo), r) for t, r in self.absorbed if lo < t < hi)
        return HomotopyLeg(self.kind, tuple(spans), self.info, absorbed)


def straight_line_leg(g0: PLProfile, g1: PLProfile, kind: str = "StraightLine",
                      info: tuple = ()) -> HomotopyLeg:
    """``t*g1 + (1-t)*g0`` on the union of both breakpoint sets."""
    if g0.R != g1.R:
        raise ValueError("profiles live on different domains")
    radii = sorted(set(g0.radii) | set(g1.radii))
    pts = tuple(Breakpoint(f"r={format_fraction(r)}", Affine(r), Affine.lerp(g0(r), g1(r))) for r in radii)
    return HomotopyLeg(kind, (Span(Fraction(0), Fraction(1), pts),), info)


def _extended_from(f: PLProfile, idx: int) -> PLProfile:
    # f on [r_idx, R], extended to r = 0 along the segment to the right of r_idx
    s = f.slopes()[idx]
    r, v = f.points[idx]
    return PLProfile(((Fraction(0), v - s * r),) + f.points[idx:])


def fold_stages(f: PLProfile) -> list[PLProfile]:
    """``0, g_1, ..., g_K, f`` where ``g_i`` keeps the ``i - 1`` right-most kinks."""
    s = f.slopes()
    kink_idx = [i for i in range(1, len(f.points) - 1) if s[i - 1] != s[i]]
    stages = [zero_profile(f.R)]
    for idx in reversed(kink_idx):
        stages.append(_extended_from(f, idx))
    stages.append(f)
    return stages


def fold_homotopy(f: PLProfile) -> list[HomotopyLeg]:
    """Straight-line legs from the zero profile to ``f`` unfolding one kink at a time."""
    stages = fold_stages(f)
    legs = []
    for i, (a, b) in enumerate(pairwise(stages)):
        radii = set(a.radii) | set(b.radii)
        if all(a(r) == b(r) for r in radii):
            continue
        legs.append(straight_line_leg(a, b, "Fold", (("stage", i + 1),)))
    return legs


# ---------------------------------------------------------------------------
# the two case homotopies


def case_number(p: ManifoldParams) -> int:
    if p.N == 0:
        return 2
    if p.lambda_sign == 0:
        return 5
    if p.lambda_sign < 0:
        return 4
    return 1 if p.n * p.gamma_hat >= p.N * p.R else 3


@dataclass(frozen=True)
class CaseData:
    """Landmarks and slopes around the tracked generator plus the target profile ``g``.

    ``m0`` and ``m1`` are the slopes of ``g`` out of ``r = 0`` and into
    ``r = R``; ``eps`` is the construction parameter.
    """

    params: ManifoldParams
    r1: Fraction
    r2: Fraction
    r3: Fraction
    m0: Fraction
    m1: Fraction
    eps: Fraction
    g: PLProfile
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("r1", "r2", "r3", "m0", "m1", "eps"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))

    @property
    def R(self) -> Fraction:
        return self.params.R

    @property
    def delta1(self) -> Fraction:
        return self.R - self.r1

    @property
    def delta3(self) -> Fraction:
        return self.R - self.r3

    @property
    def case(self) -> int:
        return case_number(self.params)

    def g1(self) -> PLProfile:
        R = self.R
        return PLProfile(((0, R - self.m0 * self.r1), (self.r1, R), (self.r2, 0), (self.r3, R),
                          (R, R + self.m1 * (R - self.r3))))

    def validate(self) -> None:
        R, g = self.R, self.g
        if not 0 < self.r1 < self.r2 < self.r3 < R:
            raise CaseDataError("need 0 < r1 < r2 < r3 < R")
        if not -1 < self.m0 < 0:
            raise CaseDataError("need -1 < m0 < 0")
        if not 0 < self.m1 < 1:
            raise CaseDataError("need 0 < m1 < 1")
        if g.R != R:
            raise CaseDataError("target profile lives on the wrong domain")
        if (g(self.r1), g(self.r2), g(self.r3)) != (R, 0, R):
            raise CaseDataError("target profile must take values R, 0, R at r1, r2, r3")
        if any(self.r1 < r < self.r3 and r != self.r2 for r in g.radii):
            raise CaseDataError("target profile must be linear on [r1, r2] and [r2, r3]")
        s = g.slopes()
        if s[0] != self.m0 or s[-1] != self.m1:
            raise CaseDataError("m0 and m1 must be the first and last slopes of the target profile")
        if g.points[-1][1] <= 0:
            raise CaseDataError("target profile must be positive at r = R")
        for k in (R / (self.r2 - self.r1), R / (self.r3 - self.r2)):
            if k.denominator == 1:
                raise CaseDataError("the tracked generator has an integer slope")
        p = self.params
        if self.case == 3 and p.n * p.gamma_hat - p.N * (R - self.eps) >= 0:
            raise CaseMismatch("this case needs n*gamma_hat - N*(R - eps) < 0")


def _h1(data: CaseData) -> HomotopyLeg:
    R, r1, r2, r3, m0, m1 = data.R, data.r1, data.r2, data.r3, data.m0, data.m1
    c = data.case
    if c in (1, 2, 4):
        rt = Affine(r2, r1 - r2)
        pts = (
            Breakpoint("y", Affine(0), Affine(0, R) - rt * m0),
            Breakpoint("r(t)", rt, Affine(0, R)),
            Breakpoint("r2", Affine(r2), Affine(0)),
            Breakpoint("r3", Affine(r3), Affine(R)),
            Breakpoint("R", Affine(R), Affine(R + m1 * (R - r3))),
        )
    else:
        rt = Affine(r2, r3 - r2)
        pts = (
            Breakpoint("y", Affine(0), Affine(R - m0 * r1)),
            Breakpoint("r1", Affine(r1), Affine(R)),
            Breakpoint("r2", Affine(r2), Affine(0)),
            Breakpoint("r(t)", rt, Affine(0, R)),
            Breakpoint("R", Affine(R), Affine(0, R) + (Affine(R) - rt) * m1),
        )
    return HomotopyLeg("Line1", (Span(Fraction(0), Fraction(1), pts),), (("case", c),))


def _clamp_line(alpha: Fraction, rho: Fraction, R: Fraction, drop: Fraction):
    # the descending line alpha*(r - rho) + R - drop*t, as a function of (r, t)
    return lambda r, t: alpha * (r - rho) + R - drop * t


def _region(g: PLProfile, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    return [(r, g(r)) for r in sorted({lo, hi} | {r for r in g.radii if lo < r < hi})]


def _region_points(verts, alpha, rho, R, drop, tm) -> list[Breakpoint]:
    L = _clamp_line(alpha, rho, R, drop)
    lo, hi = verts[0][0], verts[-1][0]
    out = []
    for i, (r, v) in enumerate(verts):
        above = v > L(r, tm)
        if above:
            out.append(Breakpoint(f"g@{format_fraction(r)}", Affine(r), Affine(v)))
        elif r in (lo, hi):
            name = "y" if r == 0 else ("R" if r == R else f"L@{format_fraction(r)}")
            out.append(Breakpoint(name, Affine(r), Affine(alpha * (r - rho) + R, -drop)))
        if i + 1 < len(verts):
            r2, v2 = verts[i + 1]
            if above != (v2 > L(r2, tm)):
                s = (v2 - v) / (r2 - r)
                x = Affine((v - s * r - R + alpha * rho) / (alpha - s), drop / (alpha - s))
                val = Affine(alpha * (x.a - rho) + R, alpha * x.b - drop)
                out.append(Breakpoint(f"x@{format_fraction(r)}", x, val))
    return out


def clamp_drop(data: CaseData) -> Fraction:
    """How far the clamp lines descend over the second leg.

    At least ``2R``; more if ``g`` dips below ``-R`` near a clamp region, so
    that the leg really ends at ``g``.
    """
    R, g = data.R, data.g
    need = 2 * R
    for (lo, hi, alpha, rho) in ((Fraction(0), data.r1, data.m0, data.r1), (data.r3, R, data.m1, data.r3)):
        L = _clamp_line(alpha, rho, R, Fraction(0))
        for r, v in _region(g, lo, hi):
            need = max(need, L(r, 0) - v)
    return need


def _h2(data: CaseData) -> HomotopyLeg:
    R, g = data.R, data.g
    drop = clamp_drop(data)
    regions = ((_region(g, Fraction(0), data.r1), data.m0, data.r1),
               (_region(g, data.r3, R), data.m1, data.r3))
    times = {Fraction(0), Fraction(1)}
    absorbed = []
    for verts, alpha, rho in regions:
        L = _clamp_line(alpha, rho, R, drop)
        for r, v in verts:
            if r in (data.r1, data.r3):
                continue
            gap = L(r, 0) - v
            if gap < 0:
                raise CaseDataError(f"target profile rises above the first clamp line at r = {r}")
            tv = gap / drop
            if 0 < tv < 1:
                times.add(tv)
                absorbed.append((tv, r))
    middle = tuple(Breakpoint(f"g@{format_fraction(r)}", Affine(r), Affine(g(r)))
                   for r in g.radii if data.r1 < r < data.r3)
    spans = []
    for a, b in pairwise(sorted(times)):
        tm = (a + b) / 2
        left = _region_points(regions[0][0], regions[0][1], regions[0][2], R, drop, tm)
        right = _region_points(regions[1][0], regions[1][1], regions[1][2], R, drop, tm)
        spans.append(Span(a, b, tuple(left) + middle + tuple(right)))
    return HomotopyLeg("Line2", tuple(spans), (("case", data.case), ("drop", drop)), tuple(sorted(absorbed)))


def moving_kink_leg(data: CaseData) -> HomotopyLeg:
    """Only the first leg, from ``g0`` to ``g1``."""
    data.validate()
    return _h1(data)


def case_homotopies(case: int, data: CaseData) -> tuple[HomotopyLeg, HomotopyLeg]:
    """The moving-kink leg from ``g0`` to ``g1`` and the clamp leg from ``g1`` to ``g``."""
    if case != data.case:
        raise CaseMismatch(f"parameters dispatch to case {data.case}, not case {case}")
    data.validate()
    return _h1(data), _h2(data)


# ---------------------------------------------------------------------------
# action tracks


@dataclass(frozen=True)
class ActionTrack:
    """One action as an affine function of time on ``[t0, t1]``.

    ``point`` names the breakpoint the action sits on; ``variant`` fixes
    which degree formula applies.  The value is
    ``-l*r(t) + v(t) + k*sigma*gamma_hat`` for kinks and ``v(t) + k*sigma*gamma_hat``
    at the two ends of the domain.
    """

    kind: str
    point: str
    variant: str
    l: Optional[int]
    j: Optional[int]
    k: int
    degree: int
    r: Affine
    value: Affine
    t0: Fraction
    t1: Fraction

    def key(self) -> tuple:
        return (self.kind, self.point, self.variant, self.l, self.j, self.k)

    def at(self, t) -> Fraction:
        return self.value(t)

    def live(self, t) -> bool:
        return self.t0 <= t <= self.t1

    def source_at(self, t) -> ActionSource:
        if self.kind in ("KinkDown", "KinkUp"):
            return ActionSource(self.kind, self.r(t), self.l)
        if self.kind == "YIntercept":
            return ActionSource("YIntercept", l=self.l)
        return ActionSource("Exterior", j=self.j)

    def describe(self) -> str:
        lvl = f" l={self.l}" if self.l is not None else ""
        jj = f" j={self.j}" if self.j is not None else ""
        return f"{self.kind}@{self.point}{lvl}{jj} k={self.k} deg={self.degree}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "point": self.point, "variant": self.variant, "l": self.l,
                "j": self.j, "k": self.k, "degree": self.degree, "value": self.value.text(),
                "t0": format_fraction(self.t0), "t1": format_fraction(self.t1)}


def _slope_limit(dv: Affine, dr: Affine, t: Fraction) -> Optional[Fraction]:
    if dr(t) != 0:
        return dv(t) / dr(t)
    if dv(t) == 0:
        return None  # constant ratio on the span
    raise ValueError("a segment collapses to zero width with non-zero rise")


def integer_slope_times(dv: Affine, dr: Affine, t0: Fraction, t1: Fraction) -> list[tuple[Fraction, int]]:
    """Times in the open interval where the slope ``dv/dr`` is an integer."""
    s0, s1 = _slope_limit(dv, dr, t0), _slope_limit(dv, dr, t1)
    if s0 is None or s1 is None:
        s = dv.b / dr.b if dr.b else None
        if s is not None and s.denominator == 1:
            raise ValueError("a segment slope is identically an integer")
        return []
    out = []
    lo, hi = min(s0, s1), max(s0, s1)
    for L in range(math.ceil(lo), math.floor(hi) + 1):
        c0, c1 = dv.a - L * dr.a, dv.b - L * dr.b
        if c1 == 0:
            if c0 == 0:
                raise ValueError("a segment slope is identically an integer")
            continue
        t = -c0 / c1
        if t0 < t < t1:
            out.append((t, L))
    return out


def _positive_interval(ga: Fraction, gb: Fraction, lo: Fraction, hi: Fraction) -> Optional[tuple[Fraction, Fraction]]:
    """Closure of ``{t in (lo, hi) : ga + gb*t > 0}``, or ``None`` when empty."""
    if gb == 0:
        return (lo, hi) if ga > 0 else None
    root = -ga / gb
    a, b = (max(lo, root), hi) if gb > 0 else (lo, min(hi, root))
    return (a, b) if a < b else None


def _meet_intervals(*ivs):
    if any(iv is None for iv in ivs):
        return None
    a, b = max(iv[0] for iv in ivs), min(iv[1] for iv in ivs)
    return (a, b) if a < b else None


def _slope_range(dv: Affine, dr: Affine, u: Fraction, w: Fraction) -> tuple[Fraction, Fraction]:
    s0, s1 = _slope_limit(dv, dr, u), _slope_limit(dv, dr, w)
    if s0 is None or s1 is None:
        s0 = s1 = dv.b / dr.b
    return min(s0, s1), max(s0, s1)


def _span_tracks(span: Span, p: ManifoldParams, degrees: Sequence[int]) -> list[ActionTrack]:
    """Actions on one span, each live on the closed interval where its level condition holds.

    A kink level ``l`` sits strictly between the two adjacent slopes
    ``dv/dr``; with ``dr > 0`` inside the span this is a pair of linear
    inequalities ``dv - l*dr > 0`` (or ``< 0``) in ``t``.
    """
    u, w = span.t0, span.t1
    pts = span.points
    segs = [(b.v - a.v, b.r - a.r) for a, b in pairwise(pts)]
    shift = p.shift
    out = []

    def k_for(c: int, l: int, d: int) -> Optional[int]:
        num = d - c + 2 * l * p.n
        if p.N == 0:
            return 0 if num == 0 else None
        q, rem = divmod(num, 2 * p.N)
        return None if rem else q

    for i in range(1, len(pts) - 1):
        (dvl, drl), (dvr, drr) = segs[i - 1], segs[i]
        lo1, hi1 = _slope_range(dvl, drl, u, w)
        lo2, hi2 = _slope_range(dvr, drr, u, w)
        bp = pts[i]
        for l in range(math.floor(min(lo1, lo2)), math.ceil(max(hi1, hi2)) + 1):
            la, lb = dvl.a - l * drl.a, dvl.b - l * drl.b  # positive iff left slope > l
            ra, rb = dvr.a - l * drr.a, dvr.b - l * drr.b
            above_l = _positive_interval(la, lb, u, w)
            below_l = _positive_interval(-la, -lb, u, w)
            above_r = _positive_interval(ra, rb, u, w)
            below_r = _positive_interval(-ra, -rb, u, w)
            for kind, iv in (("KinkDown", _meet_intervals(above_l, below_r)),
                             ("KinkUp", _meet_intervals(below_l, above_r))):
                if iv is None:
                    continue
                variants = ("down_upper", "down_lower") if kind == "KinkDown" else ("up_upper", "up_lower")
                for var in variants:
                    c = VARIANTS[var](p.n)
                    for d in degrees:
                        k = k_for(c, l, d)
                        if k is not None:
                            out.append(ActionTrack(kind, bp.id, var, l, None, k, d, bp.r,
                                                   bp.v - bp.r * l + k * shift, iv[0], iv[1]))
    dv0, dr0 = segs[0]
    lo0, hi0 = _slope_range(dv0, dr0, u, w)
    c = VARIANTS["y_intercept"](p.n)
    for l0 in range(math.floor(lo0), math.floor(hi0) + 1):
        iv = _meet_intervals(_positive_interval(dv0.a - l0 * dr0.a, dv0.b - l0 * dr0.b, u, w),
                             _positive_interval((l0 + 1) * dr0.a - dv0.a, (l0 + 1) * dr0.b - dv0.b, u, w))
        if iv is None:
            continue
        for d in degrees:
            k = k_for(c, l0, d)
            if k is not None:
                out.append(ActionTrack("YIntercept", pts[0].id, "y_intercept", l0, None, k, d, pts[0].r,
                                       pts[0].v + k * shift, iv[0], iv[1]))
    last = pts[-1]
    for pos, j in enumerate(p.exterior_morse_indices):
        for d in degrees:
            k = k_for(j - p.n, 0, d)  # degree j - n + 2*N*k
            if k is not None:
                out.append(ActionTrack("Exterior", last.id, f"exterior{pos}", None, j, k, d, last.r,
                                       last.v + k * shift, u, w))
    return out


def _merge(pieces: list[ActionTrack]) -> list[ActionTrack]:
    pieces = sorted(pieces, key=lambda a: (repr(a.key()), a.degree, a.t0))
    out: list[ActionTrack] = []
    for a in pieces:
        if out:
            b = out[-1]
            if (b.key() == a.key() and b.degree == a.degree and b.t1 == a.t0
                    and b.value == a.value and b.r == a.r):
                out[-1] = ActionTrack(b.kind, b.point, b.variant, b.l, b.j, b.k, b.degree,
                                      b.r, b.value, b.t0, a.t1)
                continue
        out.append(a)
    out.sort(key=lambda a: (a.t0, a.degree, a.kind, a.point, a.variant, a.l or 0, a.j or 0, a.k))
    return out


def track_actions(leg: HomotopyLeg, p: ManifoldParams, degrees: Iterable[int]) -> list[ActionTrack]:
    """Every action of the requested degrees along the leg, as affine pieces."""
    degrees = sorted(set(degrees))
    pieces = []
    for span in leg.spans:
        pieces.extend(_span_tracks(span, p, degrees))
    return _merge(pieces)


def live_values(tracks: Sequence[ActionTrack], t, degree: int) -> list[Fraction]:
    """Values of the tracks of one degree that are live at an interior time ``t``."""
    return sorted(a.at(t) for a in tracks if a.degree == degree and a.t0 < t < a.t1)


# ---------------------------------------------------------------------------
# events

EVENT_RANK = {"LegBoundary": 0, "KinkAbsorbed": 1, "SlopeHitsInteger": 2, "Collision": 3}


@dataclass(frozen=True)
class Event:
    time: Fraction
    kind: str
    degree: Optional[int] = None
    tracks: tuple[int, ...] = ()
    degenerate: bool = False
    details: tuple[tuple[str, object], ...] = ()

    def sort_key(self) -> tuple:
        return (self.time, EVENT_RANK[self.kind], self.degree if self.degree is not None else -10**9,
                self.tracks, repr(self.details))

    def to_json(self, tracks: Optional[Sequence[ActionTrack]] = None) -> dict:
        d: dict = {"t": format_fraction(self.time), "kind": self.kind}
        det = dict(self.details)
        if self.degree is not None:
            det["degree"] = self.degree
        if self.degenerate:
            det["degenerate"] = True
        if self.tracks:
            det["tracks"] = [tracks[i].describe() if tracks else i for i in self.tracks]
        d["details"] = {k: (format_fraction(v) if isinstance(v, Fraction) else v) for k, v in det.items()}
        return d


def _candidate_pairs(tracks: Sequence[ActionTrack]) -> list[tuple[int, int]]:
    """Pairs whose value ranges overlap, found by a sweep over padded float intervals.

    The padding is far above float rounding, so no true meeting is lost;
    every candidate is re-checked exactly by the caller.
    """
    boxes = []
    for i, a in enumerate(tracks):
        v0, v1 = float(a.value(a.t0)), float(a.value(a.t1))
        pad = 1e-9 * (1 + abs(v0) + abs(v1))
        boxes.append((min(v0, v1) - pad, max(v0, v1) + pad, i))
    boxes.sort()
    out = []
    active: list[tuple[float, int]] = []
    for lo, hi, i in boxes:
        active = [(h, j) for h, j in active if h >= lo]
        out.extend((min(i, j), max(i, j)) for _, j in active)
        active.append((hi, i))
    out.sort()
    return out


def detect_events(leg: HomotopyLeg, tracks: Sequence[ActionTrack],
                  focus: Optional[Iterable[int]] = None) -> list[Event]:
    """Leg boundaries, slope events, absorbed kinks and pairwise track collisions.

    With ``focus`` only collisions involving one of the given track indices
    are reported.  Identically equal tracks give a single degenerate event at
    the start of their common interval.  Two pieces that merely touch at a
    shared end point are a hand-off, not a collision.
    """
    events = [Event(Fraction(0), "LegBoundary"), Event(Fraction(1), "LegBoundary")]
    for sp in leg.spans:
        for a, b in pairwise(sp.points):
            for t, L in integer_slope_times(b.v - a.v, b.r - a.r, sp.t0, sp.t1):
                events.append(Event(t, "SlopeHitsInteger", details=(("segment", f"{a.id}-{b.id}"), ("level", L))))
    for t, r in leg.absorbed:
        events.append(Event(t, "KinkAbsorbed", details=(("r", r),)))
    focus_set = set(focus) if focus is not None else None
    for i, j in _candidate_pairs(tracks):
        if focus_set is not None and i not in focus_set and j not in focus_set:
            continue
        A, B = tracks[i], tracks[j]
        lo, hi = max(A.t0, B.t0), min(A.t1, B.t1)
        if lo > hi:
            continue
        how, t = A.value.meet(B.value)
        deg = min(A.degree, B.degree)
        if how == "identical":
            if lo < hi or (A.t0 == B.t0 == lo):
                events.append(Event(lo, "Collision", deg, (i, j), True))
            continue
        if how == "never" or not lo <= t <= hi:
            continue
        if lo == hi and (A.t1 == lo or B.t1 == lo) and (A.t0 == lo or B.t0 == lo):
            continue  # hand-off between consecutive pieces
        if 0 < t < 1:
            events.append(Event(t, "Collision", deg, (i, j)))
    events.sort(key=Event.sort_key)
    return events


def events_to_jsonl(events: Sequence[Event], tracks: Optional[Sequence[ActionTrack]] = None) -> str:
    return "\n".join(json.dumps(e.to_json(tracks)) for e in events) + ("\n" if events else "")
