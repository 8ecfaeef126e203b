"""Indexed action spectra of piecewise-linear radial profiles.

Four kinds of sources produce actions:

* a peak (``KinkDown``) or valley (``KinkUp``) at radius ``r`` together with
  an integer level ``l`` strictly between its two slopes, with base value
  ``-l*r + f(r)``;
* the y-intercept, with base value ``f(0)``;
* an exterior critical point of Morse index ``j``, with base value ``f(R)``.

Recapping by ``k`` adds ``k * sigma * gamma_hat`` to the value and ``2*N*k``
to the degree.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .core import Kink, ManifoldParams, PLProfile, format_fraction

KIND_ORDER = {"KinkDown": 0, "KinkUp": 1, "YIntercept": 2, "Exterior": 3}

# Degree offsets c in ``degree = -2*l*n + c + 2*N*k`` for each source variant.
VARIANTS = {
    "down_upper": lambda n: n,
    "down_lower": lambda n: -n + 1,
    "up_upper": lambda n: n - 1,
    "up_lower": lambda n: -n,
    "y_intercept": lambda n: -n,
}
KIND_VARIANTS = {
    "KinkDown": ("down_upper", "down_lower"),
    "KinkUp": ("up_upper", "up_lower"),
    "YIntercept": ("y_intercept",),
}


class NoSolution(ValueError):
    pass


@dataclass(frozen=True)
class ActionSource:
    kind: str
    r: Optional[Fraction] = None
    l: Optional[int] = None
    j: Optional[int] = None

    @staticmethod
    def kink(k: Kink, l: int) -> "ActionSource":
        return ActionSource("KinkDown" if k.orientation == "Down" else "KinkUp", k.r, l)

    def sort_key(self) -> tuple:
        return (
            KIND_ORDER[self.kind],
            self.r if self.r is not None else Fraction(-1),
            self.l if self.l is not None else 0,
            self.j if self.j is not None else -1,
        )

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.r is not None:
            out["r"] = format_fraction(self.r)
        if self.l is not None:
            out["l"] = self.l
        if self.j is not None:
            out["j"] = self.j
        return out


@dataclass(frozen=True)
class IndexedAction:
    value: Fraction
    degree: int
    source: ActionSource
    k: int

    def sort_key(self) -> tuple:
        return (self.value, self.degree, self.source.sort_key(), self.k)

    def to_json(self) -> dict:
        return {
            "value": format_fraction(self.value),
            "degree": self.degree,
            "source": self.source.to_json(),
            "k": self.k,
        }


def base_degrees(kind: str, n: int, l: int = 0, j: int = 0) -> tuple[int, ...]:
    """Degrees before recapping for one source."""
    if kind == "Exterior":
        return (j - n,)
    return tuple(-2 * l * n + VARIANTS[v](n) for v in KIND_VARIANTS[kind])


# ---------------------------------------------------------------------------
# kinks


def classify_kinks(f: PLProfile) -> list[Kink]:
    """Interior breakpoints where the slope changes; endpoints never count."""
    s = f.slopes()
    out = []
    for i in range(1, len(f.points) - 1):
        if s[i - 1] != s[i]:
            r, v = f.points[i]
            out.append(Kink(r, v, s[i - 1], s[i]))
    return out


def y_intercept_level(f: PLProfile) -> int:
    """The integer ``l`` with ``l < s < l + 1`` for the slope ``s`` out of r = 0."""
    s = f.slopes()[0]
    if s.denominator == 1:
        raise ValueError("slope out of the y-axis is an integer")
    return math.floor(s)


# ---------------------------------------------------------------------------
# degree equations


def levels_for_degree(lo: int, hi: int, n: int, N: int, c: int, d: int) -> Iterator[tuple[int, int]]:
    """All ``(l, k)`` with ``lo <= l <= hi`` and ``-2*l*n + c + 2*N*k == d``.

    With ``N == 0`` only ``k = 0`` is allowed.
    """
    if lo > hi:
        return
    if N == 0:
        num = c - d
        if num % (2 * n) == 0:
            l = num // (2 * n)
            if lo <= l <= hi:
                yield l, 0
        return
    # need 2n*l = c - d (mod 2N)
    D = math.gcd(2 * n, 2 * N)
    if (c - d) % D:
        return
    M = 2 * N // D
    if M == 1:
        l0 = 0
    else:
        l0 = ((c - d) // D) * pow((2 * n // D) % M, -1, M) % M
    first = lo + ((l0 - lo) % M)
    for l in range(first, hi + 1, M):
        yield l, (d - c + 2 * l * n) // (2 * N)


@dataclass(frozen=True)
class DegreeFamily:
    """Integer solutions ``l = l0 + l_step*z``, ``k = k0 + k_step*z`` (z any integer).

    Equivalently ``-l = -l0 - (2N/D) z`` and ``k = k0 + (2n/D) z``.
    """

    target: int
    variant: str
    l0: int
    k0: int
    l_step: int
    k_step: int

    def at(self, z: int) -> tuple[int, int]:
        return self.l0 + self.l_step * z, self.k0 + self.k_step * z

    def z_for_level(self, l: int) -> Optional[int]:
        q, rem = divmod(l - self.l0, self.l_step)
        return None if rem else q


def solve_degree_parametrization(target: int, p: ManifoldParams, variant: str = "down_lower") -> DegreeFamily:
    """Parametrize all ``(l, k)`` solving ``-2*l*n + c + 2*N*k = target``.

    ``c`` is fixed by the variant (``down_lower`` means ``c = -n + 1``).
    The base solution has ``0 <= k0 < 2n/D``.
    """
    n, N = p.n, p.N
    if N == 0:
        raise ValueError("the parametrization needs N != 0")
    c = VARIANTS[variant](n)
    D = math.gcd(2 * n, 2 * N)
    if (c - target) % D:
        raise NoSolution(f"gcd(2n, 2N) = {D} does not divide {c - target}")
    k_step, l_step = 2 * n // D, 2 * N // D
    for k0 in range(k_step):
        num = c + 2 * N * k0 - target
        if num % (2 * n) == 0:
            return DegreeFamily(target, variant, num // (2 * n), k0, l_step, k_step)
    raise AssertionError("unreachable: divisibility already checked")


# ---------------------------------------------------------------------------
# enumeration


def kink_actions(kink: Kink, p: ManifoldParams, d: int) -> Iterator[IndexedAction]:
    levels = kink.crossed_levels
    if not levels:
        return
    kind = "KinkDown" if kink.orientation == "Down" else "KinkUp"
    for variant in KIND_VARIANTS[kind]:
        c = VARIANTS[variant](p.n)
        for l, k in levels_for_degree(levels[0], levels[-1], p.n, p.N, c, d):
            value = -l * kink.r + kink.value + k * p.shift
            yield IndexedAction(value, d, ActionSource(kind, kink.r, l), k)


def enumerate_spectrum(f: PLProfile, p: ManifoldParams, d: int) -> list[IndexedAction]:
    """Every indexed action of degree exactly ``d`` (a sorted multiset)."""
    out: list[IndexedAction] = []
    for kink in classify_kinks(f):
        out.extend(kink_actions(kink, p, d))
    l = y_intercept_level(f)
    c = VARIANTS["y_intercept"](p.n)
    for _, k in levels_for_degree(l, l, p.n, p.N, c, d):
        out.append(IndexedAction(f.points[0][1] + k * p.shift, d, ActionSource("YIntercept", l=l), k))
    fR = f.points[-1][1]
    for j in p.exterior_morse_indices:
        base = j - p.n
        if p.N == 0:
            if base == d:
                out.append(IndexedAction(fR, d, ActionSource("Exterior", j=j), 0))
        elif (d - base) % (2 * p.N) == 0:
            k = (d - base) // (2 * p.N)
            out.append(IndexedAction(fR + k * p.shift, d, ActionSource("Exterior", j=j), k))
    out.sort(key=IndexedAction.sort_key)
    return out


def spectrum_range(f: PLProfile, p: ManifoldParams, degrees: range) -> list[IndexedAction]:
    out = [a for d in degrees for a in enumerate_spectrum(f, p, d)]
    out.sort(key=IndexedAction.sort_key)
    return out


def multiplicities(actions: list[IndexedAction]) -> Counter:
    """Multiplicity of each ``(value, degree)`` pair."""
    return Counter((a.value, a.degree) for a in actions)


def spectrum_to_json(actions: list[IndexedAction]) -> str:
    ordered = sorted(actions, key=IndexedAction.sort_key)
    return json.dumps([a.to_json() for a in ordered], indent=2)


# ---------------------------------------------------------------------------
# genericity


@dataclass(frozen=True)
class KinkActionReport:
    distinct: bool
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.distinct


def _residue(x: Fraction, modulus: Fraction) -> Fraction:
    return x - math.floor(x / modulus) * modulus


def has_distinct_kink_actions(f: PLProfile, p: ManifoldParams) -> KinkActionReport:
    """Check that no two kink actions coincide and none meets f(0) or f(R).

    With a non-zero shift ``sigma*gamma_hat`` values are compared modulo
    that shift, which captures every recapping ``k`` at once.  With a zero
    shift (``gamma_hat = 0``) base values are compared directly.
    """
    shift = abs(p.shift)
    ends = {"YIntercept": f.points[0][1], "Exterior": f.points[-1][1]}

    def key(x: Fraction) -> Fraction:
        return _residue(x, shift) if shift else x

    seen: dict[Fraction, tuple[Fraction, int, Fraction]] = {}
    end_keys = defaultdict(list)
    for name, v in ends.items():
        end_keys[key(v)].append((name, v))
    for kink in classify_kinks(f):
        for l in kink.crossed_levels:
            base = -l * kink.r + kink.value
            kb = key(base)
            if kb in seen:
                r0, l0, b0 = seen[kb]
                return KinkActionReport(False, {
                    "rule": "two kink triples share an action",
                    "first": {"r": format_fraction(r0), "l": l0, "k": 0},
                    "second": {"r": format_fraction(kink.r), "l": l,
                               "k": int((b0 - base) / p.shift) if shift else 0},
                })
            if kb in end_keys:
                name, v = end_keys[kb][0]
                return KinkActionReport(False, {
                    "rule": "kink action meets an endpoint action",
                    "kink": {"r": format_fraction(kink.r), "l": l, "k": 0},
                    "endpoint": name,
                    "k": int((base - v) / p.shift) if shift else 0,
                })
            seen[kb] = (kink.r, l, base)
    return KinkActionReport(True)
