"""Exact scalars, manifold parameters and piecewise-linear radial profiles.

Every action value and slope is stored divided by 2*pi, so a stored value
``q`` stands for the real number ``2*pi*q``.  Radii are plain rationals.
With this normalization all the action formulas used downstream are
rational, and ``fractions.Fraction`` gives exact arithmetic throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

RationalLike = Union[Fraction, int, str]


# ---------------------------------------------------------------------------
# errors


class ProfileError(ValueError):
    """Base class for profile construction failures."""


class SlopeConditionViolation(ProfileError):
    def __init__(self, segment: int, slope: Fraction, reason: str):
        self.segment = segment
        self.slope = slope
        self.reason = reason
        super().__init__(f"slope condition violated on segment {segment}: slope {slope} {reason}")


class DomainError(ProfileError):
    pass


class DomainMismatch(ProfileError):
    pass


class ParamsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalars


def to_fraction(x: RationalLike) -> Fraction:
    """Parse an exact rational. Floats are rejected on purpose."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_fraction(q: Fraction) -> str:
    """Render ``q`` as ``p/q`` (integers keep the ``/1`` so parsing is uniform)."""
    return f"{q.numerator}/{q.denominator}"


@total_ordering
class Infinity:
    """The extended value +inf; compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return not isinstance(other, Infinity)

    def __hash__(self):
        return hash("radial_barcodes.inf")

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"


INF = Infinity()
ExtendedScalar = Union[Fraction, Infinity]


def is_finite(x: ExtendedScalar) -> bool:
    return not isinstance(x, Infinity)


# --- rigorous enclosures of pi --------------------------------------------


def _arctan_inv_scaled(x: int, scale: int) -> int:
    # arctan(1/x) * scale by the alternating Taylor series, truncated terms
    total = 0
    power = scale // x
    x2 = x * x
    k = 0
    while power:
        term = power // (2 * k + 1)
        total = total - term if k % 2 else total + term
        power //= x2
        k += 1
    return total


def pi_bounds(digits: int) -> tuple[Fraction, Fraction]:
    """Rationals ``lo < pi < hi`` with ``hi - lo`` about ``10**-digits``."""
    guard = 10
    scale = 10 ** (digits + guard)
    approx = 4 * (4 * _arctan_inv_scaled(5, scale) - _arctan_inv_scaled(239, scale))
    # each series loses at most a few units per term through floor division
    slack = 10 ** (guard // 2)
    return Fraction(approx - slack, scale), Fraction(approx + slack, scale)


@dataclass(frozen=True)
class Quantity:
    """A real number of the form ``2*pi*two_pi + raw`` with rational parts.

    Used for constants such as ``2*pi*R - (4*pi + 7)*eps`` that mix
    2pi-normalized terms with raw real-unit terms.  Comparisons are exact:
    the sign is decided with shrinking rational enclosures of pi.
    """

    two_pi: Fraction = Fraction(0)
    raw: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "two_pi", to_fraction(self.two_pi))
        object.__setattr__(self, "raw", to_fraction(self.raw))

    def __add__(self, other: "Quantity") -> "Quantity":
        return Quantity(self.two_pi + other.two_pi, self.raw + other.raw)

    def __sub__(self, other: "Quantity") -> "Quantity":
        return Quantity(self.two_pi - other.two_pi, self.raw - other.raw)

    def __neg__(self) -> "Quantity":
        return Quantity(-self.two_pi, -self.raw)

    def scale(self, c: Fraction) -> "Quantity":
        return Quantity(self.two_pi * c, self.raw * c)

    def sign(self) -> int:
        a, b = self.two_pi, self.raw
        if a == 0:
            return (b > 0) - (b < 0)
        digits = 20
        while True:
            lo, hi = pi_bounds(digits)
            v1, v2 = 2 * a * lo + b, 2 * a * hi + b
            if v1 > 0 and v2 > 0:
                return 1
            if v1 < 0 and v2 < 0:
                return -1
            digits *= 2  # pi is irrational, so this terminates

    def _cmp(self, other) -> int:
        if not isinstance(other, Quantity):
            other = Quantity(0, to_fraction(other))
        return (self - other).sign()

    def __eq__(self, other):
        if not isinstance(other, Quantity):
            return NotImplemented
        return self.two_pi == other.two_pi and self.raw == other.raw

    def __hash__(self):
        return hash((self.two_pi, self.raw))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def to_decimal(self, sig: int = 20) -> Decimal:
        lo, hi = pi_bounds(sig + 15)
        with localcontext() as ctx:
            ctx.prec = sig + 15
            pi_mid = Decimal((lo + hi).numerator) / Decimal(2 * (lo + hi).denominator)
            val = 2 * pi_mid * (Decimal(self.two_pi.numerator) / Decimal(self.two_pi.denominator))
            val += Decimal(self.raw.numerator) / Decimal(self.raw.denominator)
            ctx.prec = sig
            return +val

    def symbolic(self) -> str:
        return f"2*pi*({format_fraction(self.two_pi)}) + ({format_fraction(self.raw)})"

    def to_json(self) -> dict:
        return {
            "twoPiCoefficient": format_fraction(self.two_pi),
            "raw": format_fraction(self.raw),
            "symbolic": self.symbolic(),
            "decimal": str(self.to_decimal()),
        }


def decimal_string(q: Fraction, sig: int = 20) -> str:
    """Display-only decimal rendering of an exact rational."""
    with localcontext() as ctx:
        ctx.prec = sig
        return str(Decimal(q.numerator) / Decimal(q.denominator))


# ---------------------------------------------------------------------------
# manifold data


@dataclass(frozen=True)
class ManifoldParams:
    """Monotonicity data for the ambient closed symplectic manifold.

    ``gamma_hat`` is the rationality constant divided by 2*pi and
    ``lambda_sign`` is the sign of the monotonicity constant.
    """

    n: int
    N: int
    gamma_hat: Fraction
    lambda_sign: int
    R: Fraction
    exterior_morse_indices: tuple[int, ...] = (0,)

    def __post_init__(self):
        object.__setattr__(self, "gamma_hat", to_fraction(self.gamma_hat))
        object.__setattr__(self, "R", to_fraction(self.R))
        object.__setattr__(self, "exterior_morse_indices", tuple(sorted(self.exterior_morse_indices)))
        if self.n < 1:
            raise ParamsError("n must be a positive integer")
        if self.N < 0:
            raise ParamsError("N must be non-negative")
        if self.lambda_sign not in (-1, 0, 1):
            raise ParamsError("lambda_sign must be -1, 0 or +1")
        if self.R <= 0:
            raise ParamsError("R must be positive")
        if self.gamma_hat < 0:
            raise ParamsError("gamma_hat must be non-negative")
        if self.N == 0 and self.gamma_hat != 0:
            raise ParamsError("N = 0 forces gamma_hat = 0")
        if self.lambda_sign == 0 and self.gamma_hat != 0:
            raise ParamsError("lambda_sign = 0 forces gamma_hat = 0")
        if self.gamma_hat != 0 and 2 * self.R > self.gamma_hat:
            raise ParamsError("need 2R <= gamma_hat when gamma_hat is non-zero")
        idx = self.exterior_morse_indices
        if not idx or 0 not in idx:
            raise ParamsError("exterior Morse indices must be non-empty and contain 0")
        if any(j < 0 or j > 2 * self.n - 1 for j in idx):
            raise ParamsError("exterior Morse indices must lie in [0, 2n-1]")

    @property
    def shift(self) -> Fraction:
        """Action change per recapping step, sigma(lambda) * gamma_hat."""
        return self.lambda_sign * self.gamma_hat

    @property
    def D(self) -> int:
        return math.gcd(2 * self.n, 2 * self.N)


# ---------------------------------------------------------------------------
# piecewise-linear profiles


Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class PLProfile:
    """A piecewise-linear function on ``[0, R]`` given by its breakpoints.

    The constructor checks only the domain (strictly increasing radii from 0
    to R).  ``make_profile`` additionally enforces the slope condition.
    """

    points: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple((to_fraction(r), to_fraction(v)) for r, v in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise DomainError("a profile needs at least two breakpoints")
        if pts[0][0] != 0:
            raise DomainError("first breakpoint must sit at r = 0")
        for i in range(len(pts) - 1):
            if pts[i + 1][0] == pts[i][0]:
                raise DomainError(f"duplicate radius {pts[i][0]}")
            if pts[i + 1][0] < pts[i][0]:
                raise DomainError("radii must be strictly increasing")

    @property
    def R(self) -> Fraction:
        return self.points[-1][0]

    @property
    def radii(self) -> tuple[Fraction, ...]:
        return tuple(r for r, _ in self.points)

    @property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for _, v in self.points)

    def slopes(self) -> list[Fraction]:
        p = self.points
        return [(p[i + 1][1] - p[i][1]) / (p[i + 1][0] - p[i][0]) for i in range(len(p) - 1)]

    def __call__(self, r: RationalLike) -> Fraction:
        r = to_fraction(r)
        p = self.points
        if r < 0 or r > self.R:
            raise DomainError(f"r = {r} outside [0, {self.R}]")
        lo, hi = 0, len(p) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if p[mid][0] <= r:
                lo = mid
            else:
                hi = mid
        (r0, v0), (r1, v1) = p[lo], p[hi]
        if r == r1:
            return v1
        return v0 + (v1 - v0) * (r - r0) / (r1 - r0)

    def slope_violations(self) -> list[SlopeConditionViolation]:
        out = []
        s = self.slopes()
        for i, m in enumerate(s):
            if m.denominator == 1:
                out.append(SlopeConditionViolation(i, m, f"is the integer {m.numerator}"))
        if abs(s[-1]) >= 1:
            out.append(SlopeConditionViolation(len(s) - 1, s[-1], "into r = R has |s| >= 1"))
        return out

    def satisfies_slope_condition(self) -> bool:
        return not self.slope_violations()

    def simplified(self) -> "PLProfile":
        """Drop interior breakpoints where the slope does not change."""
        p = list(self.points)
        keep = [p[0]]
        for i in range(1, len(p) - 1):
            a, b, c = keep[-1], p[i], p[i + 1]
            if (b[1] - a[1]) * (c[0] - b[0]) != (c[1] - b[1]) * (b[0] - a[0]):
                keep.append(b)
        keep.append(p[-1])
        return PLProfile(tuple(keep))

    def scaled(self, c: RationalLike) -> "PLProfile":
        c = to_fraction(c)
        return PLProfile(tuple((r, c * v) for r, v in self.points))

    # text serialization: header ``R=p/q`` then one ``r v`` pair per line

    def to_text(self) -> str:
        lines = [f"R={format_fraction(self.R)}"]
        lines += [f"{format_fraction(r)} {format_fraction(v)}" for r, v in self.points]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, validate: bool = True) -> "PLProfile":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("R="):
            raise DomainError("profile text must start with a header line R=p/q")
        R = to_fraction(lines[0][2:])
        pts = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise DomainError(f"malformed breakpoint line: {ln!r}")
            pts.append((to_fraction(parts[0]), to_fraction(parts[1])))
        prof = make_profile(pts, R) if validate else _checked_domain(pts, R)
        return prof


def _checked_domain(points: Sequence[tuple[RationalLike, RationalLike]], R: RationalLike | None) -> PLProfile:
    prof = PLProfile(tuple(points))
    if R is not None and prof.R != to_fraction(R):
        raise DomainError(f"breakpoints end at r = {prof.R}, not at R = {to_fraction(R)}")
    return prof


def make_profile(points: Sequence[tuple[RationalLike, RationalLike]], R: RationalLike | None = None) -> PLProfile:
    """Build a profile and enforce the slope condition.

    Raises ``DomainError`` when the radii are not strictly increasing from 0
    to ``R`` and ``SlopeConditionViolation`` (the first offending segment)
    when some slope is an integer or the final slope has ``|s| >= 1``.
    """
    prof = _checked_domain(points, R)
    bad = prof.slope_violations()
    if bad:
        raise bad[0]
    return prof


@dataclass(frozen=True)
class Kink:
    """An interior breakpoint where the slope changes.

    ``Down`` is a peak (left slope above right slope), ``Up`` a valley.
    ``crossed_levels`` lists the integers strictly between the two slopes.
    """

    r: Fraction
    value: Fraction
    left_slope: Fraction
    right_slope: Fraction

    @property
    def orientation(self) -> str:
        return "Down" if self.left_slope > self.right_slope else "Up"

    @property
    def crossed_levels(self) -> tuple[int, ...]:
        return integers_between(self.left_slope, self.right_slope)


def integers_between(a: Fraction, b: Fraction) -> tuple[int, ...]:
    """Integers strictly between ``a`` and ``b`` in increasing order."""
    lo, hi = min(a, b), max(a, b)
    return tuple(range(math.floor(lo) + 1, math.ceil(hi)))


def zero_profile(R: RationalLike) -> PLProfile:
    """The constant-zero function; flat, so it does not satisfy the slope condition."""
    return PLProfile(((Fraction(0), Fraction(0)), (to_fraction(R), Fraction(0))))


def _same_domain(profiles: Iterable[PLProfile]) -> Fraction:
    Rs = {p.R for p in profiles}
    if len(Rs) != 1:
        raise DomainMismatch(f"profiles live on different domains: {sorted(Rs)}")
    return Rs.pop()


def linear_combine(coeffs: Sequence[RationalLike], profiles: Sequence[PLProfile]) -> PLProfile:
    """Pointwise ``sum c_i f_i`` on the union of breakpoints (slopes not re-checked)."""
    if len(coeffs) != len(profiles):
        raise ValueError("need one coefficient per profile")
    if not profiles:
        raise ValueError("need at least one profile")
    _same_domain(profiles)
    cs = [to_fraction(c) for c in coeffs]
    radii = sorted({r for p in profiles for r in p.radii})
    pts = tuple((r, sum((c * p(r) for c, p in zip(cs, profiles)), Fraction(0))) for r in radii)
    return PLProfile(pts)


def sup_distance(f: PLProfile, g: PLProfile) -> Fraction:
    """Exact L-infinity distance; the difference is PL so breakpoints suffice."""
    _same_domain((f, g))
    radii = set(f.radii) | set(g.radii)
    return max(abs(f(r) - g(r)) for r in radii)


def oscillation(f: PLProfile) -> Fraction:
    """``max f - min f`` over ``[0, R]`` in 2pi-units."""
    vs = f.values
    return max(vs) - min(vs)
