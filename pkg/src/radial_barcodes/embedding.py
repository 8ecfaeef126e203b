"""Generator profiles, the coefficient-to-profile map and the headline constants.

All values are in 2pi-units like the rest of the package; constants that
mix ``2*pi*x`` with a raw ``eps`` are returned as :class:`Quantity`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import (ManifoldParams, PLProfile, Quantity, RationalLike, format_fraction, linear_combine,
                   oscillation, sup_distance, to_fraction, zero_profile)
from .homotopy import CaseData, CaseMismatch
from .spectrum import classify_kinks, has_distinct_kink_actions


class ParameterError(ValueError):
    pass


class SupportError(ValueError):
    pass


class CannotPerturb(ValueError):
    pass


class VolumeError(ValueError):
    pass


class ScenarioError(ValueError):
    pass


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class Landmarks:
    lo: Fraction
    hi: Fraction
    r1: Fraction
    r2: Fraction
    r3: Fraction
    width: Fraction  # width of the flat neighbourhoods at both ends of the support

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class GeneratorFamily:
    R: Fraction
    epsilon: Fraction
    profiles: tuple[PLProfile, ...]
    landmarks: tuple[Landmarks, ...]

    @property
    def count(self) -> int:
        return len(self.profiles)


def _nudged(R: Fraction, run: Fraction) -> Fraction:
    # shrink a run so that R / run is a half-integer whenever it was an integer
    s = R / run
    if s.denominator == 1:
        run = R / (s + Fraction(1, 2))
    return run


def generator_interval(R: Fraction, eps: Fraction, i: int) -> tuple[Fraction, Fraction]:
    """``[R - eps + eps/2**i, R - eps + eps/2**(i-1)]``."""
    base = R - eps
    return base + eps / 2 ** i, base + eps / 2 ** (i - 1)


def build_generators(p: ManifoldParams, eps: RationalLike, m: int,
                     offset: Fraction = Fraction(1, 10), width: Fraction = Fraction(1, 20)) -> GeneratorFamily:
    """The tent-pair generators ``f_1..f_m`` with disjoint supports near ``r = R``.

    ``offset`` and ``width`` are fractions of the support length: ``r1`` and
    ``r3`` sit ``offset*|I|`` either side of the midpoint ``r2`` and the flat
    neighbourhoods at both ends of the support are ``width*|I|`` wide.  Runs
    giving an integer slope are shrunk until the slope is a half-integer.
    """
    eps = to_fraction(eps)
    R = p.R
    if m < 1:
        raise ParameterError("need at least one generator")
    if not 0 < eps < R:
        raise ParameterError("need 0 < eps < R")
    if not (0 < width and 0 < offset and offset + width < Fraction(1, 2)):
        raise ParameterError("landmark fractions must satisfy 0 < offset, 0 < width, offset + width < 1/2")
    profiles, marks = [], []
    for i in range(1, m + 1):
        lo, hi = generator_interval(R, eps, i)
        L = hi - lo
        r2 = (lo + hi) / 2
        off = _nudged(R, offset * L)
        w = width * L
        ramp = _nudged(R, L / 2 - off - w)
        w = L / 2 - off - ramp
        r1, r3 = r2 - off, r2 + off
        pts = [(Fraction(0), Fraction(0))] if lo > 0 else []
        pts += [(lo, Fraction(0)), (lo + w, Fraction(0)), (r1, R), (r2, Fraction(0)), (r3, R),
                (hi - w, Fraction(0)), (hi, Fraction(0))]
        if hi < R:
            pts.append((R, Fraction(0)))
        for s in (R / off, R / ramp):
            if s.denominator == 1:
                raise ParameterError("could not make the generator slopes non-integer")
        profiles.append(PLProfile(tuple(pts)))
        marks.append(Landmarks(lo, hi, r1, r2, r3, w))
    return GeneratorFamily(R, eps, tuple(profiles), tuple(marks))


@dataclass(frozen=True)
class EmbeddingPoint:
    """A finitely supported coefficient sequence ``(a_1, a_2, ...)``, optionally with ``a_0``."""

    coefficients: tuple[Fraction, ...]
    a0: Optional[Fraction] = None

    def __post_init__(self):
        cs = tuple(to_fraction(c) for c in self.coefficients)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coefficients", cs)
        if self.a0 is not None:
            object.__setattr__(self, "a0", to_fraction(self.a0))
        if any(not 0 <= c <= 1 for c in cs):
            raise ParameterError("coefficients a_i (i >= 1) must lie in [0, 1]")

    @property
    def support(self) -> int:
        return len(self.coefficients)

    def padded(self, m: int) -> tuple[Fraction, ...]:
        return self.coefficients + (Fraction(0),) * (m - len(self.coefficients))


def sup_norm_difference(a: EmbeddingPoint, b: EmbeddingPoint) -> Fraction:
    m = max(a.support, b.support)
    diffs = [x - y for x, y in zip(a.padded(m), b.padded(m))]
    if a.a0 is not None or b.a0 is not None:
        diffs.append((a.a0 or 0) - (b.a0 or 0))
    return max((abs(d) for d in diffs), default=Fraction(0))


def combine(coeffs: Sequence[RationalLike], fam: GeneratorFamily) -> PLProfile:
    """``sum c_i f_i`` for arbitrary rational ``c_i``; no slope check."""
    cs = [to_fraction(c) for c in coeffs]
    if len(cs) > fam.count:
        raise SupportError(f"coefficients reach index {len(cs)} but only {fam.count} generators exist")
    if not any(cs):
        return zero_profile(fam.R)
    return linear_combine(cs, fam.profiles[:len(cs)]).simplified()


def phi_profile(a: EmbeddingPoint, fam: GeneratorFamily) -> PLProfile:
    return combine(a.coefficients, fam)


# ---------------------------------------------------------------------------
# perturbation


_PRIME = 10007


def perturb_to_generic(f: PLProfile, p: ManifoldParams, eps: RationalLike,
                       pinned: Sequence[tuple[RationalLike, RationalLike]] = (), seed: int = 0,
                       first_slope: Optional[Fraction] = None, last_slope: Optional[Fraction] = None,
                       accept: Optional[Callable[[PLProfile], bool]] = None,
                       attempts: int = 64) -> PLProfile:
    """Move breakpoint values slightly so the profile becomes valid and generic.

    Kink radii never move and pinned points keep their values.  With
    ``first_slope``/``last_slope`` the end values are solved for so the first
    and last segments get those slopes.  Among valid candidates the first
    with pairwise distinct kink actions wins; otherwise the first valid one.
    Candidates are drawn from ``random.Random(seed)``, so output is
    deterministic.
    """
    eps = to_fraction(eps)
    pin = {to_fraction(r): to_fraction(v) for r, v in pinned}
    f = f.simplified()
    for r, v in pin.items():
        if r not in f.radii or f(r) != v:
            raise CannotPerturb(f"pinned point ({format_fraction(r)}, {format_fraction(v)}) is not a breakpoint of f")
    kinks = [k.r for k in classify_kinks(f)]

    def valid(g: PLProfile) -> bool:
        if not g.satisfies_slope_condition():
            return False
        if [k.r for k in classify_kinks(g)] != kinks or sup_distance(f, g) >= eps:
            return False
        if first_slope is not None and g.slopes()[0] != first_slope:
            return False
        if last_slope is not None and g.slopes()[-1] != last_slope:
            return False
        return accept is None or accept(g)

    def shaped(vals: list[Fraction]) -> PLProfile:
        rs = f.radii
        if first_slope is not None and rs[0] not in pin:
            vals[0] = vals[1] - first_slope * (rs[1] - rs[0])
        if last_slope is not None and rs[-1] not in pin:
            vals[-1] = vals[-2] + last_slope * (rs[-1] - rs[-2])
        return PLProfile(tuple(zip(rs, vals)))

    def pinned_clash(g: PLProfile) -> bool:
        # a coincidence among pinned kinks cannot be removed by moving free values
        w = has_distinct_kink_actions(g, p).witness or {}
        rs = [w.get("first", {}).get("r"), w.get("second", {}).get("r")]
        return all(r is not None and to_fraction(r) in pin for r in rs)

    first_valid = None
    for cand in (f, shaped(list(f.values))):
        if valid(cand):
            if has_distinct_kink_actions(cand, p):
                return cand
            first_valid = first_valid or cand
            if pinned_clash(cand):
                return cand
    free = [i for i, r in enumerate(f.radii) if r not in pin]
    if not free:
        if first_valid is not None:
            return first_valid
        raise CannotPerturb("every breakpoint is pinned and the profile is not valid")
    rng = random.Random(seed)
    scale = eps / (_PRIME * 1000)
    for _ in range(attempts):
        vals = list(f.values)
        for i in free:
            vals[i] += scale * rng.randint(-1000, 1000)
        g = shaped(vals)
        if valid(g):
            if has_distinct_kink_actions(g, p):
                return g
            first_valid = first_valid or g
            if pinned_clash(g):
                return first_valid
    if first_valid is not None:
        return first_valid
    raise CannotPerturb("no admissible perturbation found")


def default_slopes(eps: Fraction, r1: Fraction) -> tuple[Fraction, Fraction]:
    """``m0`` with ``0 < -m0*r1 < eps`` in real units, and ``m1 = eps``."""
    return -7 * eps / (88 * r1), eps


def case_data_for(p: ManifoldParams, eps: RationalLike, a: EmbeddingPoint | Sequence[RationalLike],
                  fam: GeneratorFamily, seed: int = 0) -> CaseData:
    """Case data for the generator carrying the largest coefficient of ``a``.

    The target profile is that generator (coefficient 1) made generic with
    end slopes ``m0`` and ``m1`` and the three landmarks pinned.
    """
    eps = to_fraction(eps)
    cs = a.coefficients if isinstance(a, EmbeddingPoint) else tuple(to_fraction(c) for c in a)
    if not any(cs):
        raise CaseMismatch("the zero profile has no kink to track")
    k = max(range(len(cs)), key=lambda i: (abs(cs[i]), -i))
    if k >= fam.count:
        raise SupportError("coefficient index beyond the generator family")
    lm = fam.landmarks[k]
    m0, m1 = default_slopes(eps, lm.r1)
    R = p.R
    g = perturb_to_generic(fam.profiles[k], p, eps, [(lm.r1, R), (lm.r2, 0), (lm.r3, R)], seed,
                           first_slope=m0, last_slope=m1, accept=lambda h: h.points[-1][1] > 0)
    data = CaseData(p, lm.r1, lm.r2, lm.r3, m0, m1, eps, g, (f"generator {k + 1}",))
    data.validate()
    return data


# ---------------------------------------------------------------------------
# headline constants


@dataclass(frozen=True)
class HoferWindow:
    lower: Quantity
    oscillation: Fraction
    upper: Fraction
    raw_lower: Quantity = field(compare=False)

    def to_json(self) -> dict:
        return {"lower": self.lower.to_json(), "rawLower": self.raw_lower.to_json(),
                "oscillation": format_fraction(self.oscillation), "upper": format_fraction(self.upper)}


def hofer_window(a: EmbeddingPoint, b: EmbeddingPoint, p: ManifoldParams, eps: RationalLike,
                    fam: GeneratorFamily) -> HoferWindow:
    """Lower and upper bounds on the distance between the images of ``a`` and ``b``.

    ``lower = 2*pi*R*|a-b| - (4*pi + 7)*eps`` clamped at 0, ``upper = 4*pi*R*|a-b|``,
    and ``oscillation`` is the computed ``max - min`` of the difference profile.
    """
    eps = to_fraction(eps)
    d = sup_norm_difference(a, b)
    m = max(a.support, b.support)
    diff = [x - y for x, y in zip(b.padded(m), a.padded(m))]
    osc = oscillation(combine(diff, fam)) if any(diff) else Fraction(0)
    raw = Quantity(p.R * d - 2 * eps, -7 * eps)
    lower = raw if raw > Quantity(0, 0) else Quantity(Fraction(0), Fraction(0))
    return HoferWindow(lower, osc, 2 * p.R * d, raw)


def ball_volume(n: int, R: RationalLike) -> Fraction:
    """Symplectic volume of the ball of capacity ``2*pi*R`` as a coefficient of ``(2*pi)**n``."""
    R = to_fraction(R)
    if n < 1 or R <= 0:
        raise ParameterError("need n >= 1 and R > 0")
    return R ** n


def f0_profile(p: ManifoldParams, eps: RationalLike, delta: RationalLike) -> PLProfile:
    """The plateau-and-tent profile supported in ``[0, R - eps - delta]``.

    Values: ``R`` on ``[0, R - 4eps]``, ``0`` at ``R - 3eps``, ``R`` at
    ``R - 2eps`` and ``0`` on ``[R - eps - delta, R]``.  Plateaus are flat,
    so the result still has to go through :func:`perturb_to_generic`.
    """
    eps, delta = to_fraction(eps), to_fraction(delta)
    R = p.R
    if not 0 < 4 * eps < R:
        raise ParameterError("need 0 < 4*eps < R")
    if not 0 < delta < eps:
        raise ParameterError("need 0 < delta < eps")
    zero = Fraction(0)
    return PLProfile(((zero, R), (R - 4 * eps, R), (R - 3 * eps, zero), (R - 2 * eps, R),
                      (R - eps - delta, zero), (R, zero)))


@dataclass(frozen=True)
class VolumeConstants:
    C: Quantity
    lower_bound: Quantity
    ball: Fraction
    ratio: Fraction  # Vol(B) / Vol(M)

    def to_json(self) -> dict:
        return {"C": self.C.to_json(), "lowerBound": self.lower_bound.to_json(),
                "ballVolume": format_fraction(self.ball), "volumeRatio": format_fraction(self.ratio)}


def volume_constants(p: ManifoldParams, eps: RationalLike, vol_m: RationalLike,
                       a: EmbeddingPoint, convention: str = "omega^n") -> VolumeConstants:
    """Constants of the volume-based embedding bound.

    ``vol_m`` is the volume of ``M`` as a coefficient of ``(2*pi)**n`` (so
    ``4*pi`` on the 2-sphere is ``2``).  ``C = 2*pi*R*Vol(B)/Vol(M) - eps``.
    The lower bound is the better of the two branches (largest coefficient
    among ``a_i``, ``i >= 1``, or ``|a_0|``).  With ``convention="omega^n/n!"``
    both volumes are divided by ``n!``, which leaves every ratio unchanged.
    """
    eps, vol_m = to_fraction(eps), to_fraction(vol_m)
    if convention not in ("omega^n", "omega^n/n!"):
        raise ParameterError(f"unknown volume convention {convention!r}")
    n, R = p.n, p.R
    ball = ball_volume(n, R)
    if vol_m <= ball:
        raise VolumeError("Vol(M) must exceed the volume of the ball")
    ratio = ball / vol_m
    C = Quantity(R * ratio, -eps)
    small = ball_volume(n, R - 4 * eps) if R > 4 * eps else Fraction(0)
    shell = ball - small
    top = max((abs(a.a0) if a.a0 is not None else Fraction(0),) + a.coefficients)
    lead = Quantity(R * small / vol_m * top, 0)
    budget = max(Quantity(2 * eps, 7 * eps), Quantity(R * shell / vol_m, 0))
    return VolumeConstants(C, lead - budget, ball, ratio)


# ---------------------------------------------------------------------------
# scenario files


SCENARIO_KEYS = ("n", "N", "gamma2pi", "lambda_sign", "R", "epsilon", "m", "a", "b", "a0", "seed",
                 "exterior", "vol_m")


@dataclass(frozen=True)
class Scenario:
    params: ManifoldParams
    epsilon: Fraction
    m: int
    a: tuple[Fraction, ...] = ()
    b: tuple[Fraction, ...] = ()
    a0: Optional[Fraction] = None
    seed: int = 0
    vol_m: Optional[Fraction] = None

    def family(self) -> GeneratorFamily:
        return build_generators(self.params, self.epsilon, self.m)

    def to_text(self) -> str:
        p = self.params
        lines = [f"n={p.n}", f"N={p.N}", f"gamma2pi={format_fraction(p.gamma_hat)}",
                 f"lambda_sign={p.lambda_sign}", f"R={format_fraction(p.R)}",
                 f"epsilon={format_fraction(self.epsilon)}", f"m={self.m}",
                 "exterior=" + ",".join(str(j) for j in p.exterior_morse_indices),
                 f"seed={self.seed}"]
        if self.a:
            lines.append("a=" + ",".join(format_fraction(x) for x in self.a))
        if self.b:
            lines.append("b=" + ",".join(format_fraction(x) for x in self.b))
        if self.a0 is not None:
            lines.append(f"a0={format_fraction(self.a0)}")
        if self.vol_m is not None:
            lines.append(f"vol_m={format_fraction(self.vol_m)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {k: v for k, v in (ln.split("=", 1) for ln in self.to_text().splitlines())}


def _rlist(s: str) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x.strip()) for x in s.split(",") if x.strip())


def parse_scenario(text: str) -> Scenario:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    kv: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected key=value, got {raw!r}")
        k, v = (x.strip() for x in line.split("=", 1))
        if k not in SCENARIO_KEYS:
            raise ScenarioError(f"unknown key {k!r}")
        kv[k] = v
    missing = [k for k in ("n", "N", "gamma2pi", "lambda_sign", "R", "epsilon") if k not in kv]
    if missing:
        raise ScenarioError(f"missing keys: {', '.join(missing)}")
    try:
        ext = tuple(int(x) for x in kv.get("exterior", "0").split(","))
        p = ManifoldParams(int(kv["n"]), int(kv["N"]), to_fraction(kv["gamma2pi"]), int(kv["lambda_sign"]),
                           to_fraction(kv["R"]), ext)
        a = _rlist(kv.get("a", ""))
        return Scenario(p, to_fraction(kv["epsilon"]), int(kv.get("m", max(1, len(a)))), a,
                        _rlist(kv.get("b", "")), to_fraction(kv["a0"]) if "a0" in kv else None,
                        int(kv.get("seed", 0)), to_fraction(kv["vol_m"]) if "vol_m" in kv else None)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc
