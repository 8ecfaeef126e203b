"""Bar continuation along the case homotopies, with a rule applied at every event.

The tracker follows one bar: its right endpoint is a concave-down action of
degree ``d + 1`` born at the moving kink, its left endpoint the degree ``d``
action it pairs with.  Every collision involving an endpoint must match a
rule; otherwise :class:`RuleConflict` is raised instead of guessing.
"""

from __future__ import annotations

import enum
import json
import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .barcodes import Bar
from .core import Kink, ManifoldParams, PLProfile, Quantity, format_fraction, to_fraction
from .homotopy import (ActionTrack, CaseData, CaseMismatch, Event, HomotopyLeg, case_homotopies, moving_kink_leg,
                       case_number, detect_events, fold_homotopy, track_actions)
from .spectrum import VARIANTS, classify_kinks, levels_for_degree


class RuleConflict(RuntimeError):
    """An event involving a tracked endpoint has no applicable rule."""

    def __init__(self, message: str, leg: str = "", time: Optional[Fraction] = None):
        super().__init__(message)
        self.leg = leg
        self.time = time

    def describe(self) -> str:
        where = f" on {self.leg}" if self.leg else ""
        when = f" at t = {format_fraction(self.time)}" if self.time is not None else ""
        return f"{self}{where}{when}"


class AllZero(ValueError):
    pass


class NotGeneric(ValueError):
    """The target action is not isolated among concave-down actions of its degree."""


class CaseTag(enum.Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4
    CASE5 = 5

    @property
    def tracked_degree_offset(self) -> str:
        return "n" if self.value in (1, 2, 4) else "-3n"

    def tracked_degree(self, n: int) -> int:
        return n if self.value in (1, 2, 4) else -3 * n


def dispatch_case(p: ManifoldParams) -> CaseTag:
    """Case 1: N != 0, sigma = +1, n*gamma_hat >= N*R; 2: N = 0; 3: as 1 with <;
    4: sigma = -1; 5: sigma = 0."""
    return CaseTag(case_number(p))


THEOREMS = {
    "inception_n": "concave-down pairing: an isolated degree n+1 concave-down action ends a degree n bar",
    "inception_3n": "concave-down pairing: an isolated degree -3n+1 concave-down action ends a degree -3n bar",
    "exclusion": "concave-up exclusion: concave-up actions never end a bar in the tracked degree",
    "exchange": "interval counting: an overtaking action of the bar's degree takes over the left endpoint",
    "clamp": "clamp leg: time-dependent actions only decrease, so the right endpoint holds and the left only drops",
    "axiom": "energy axiom: a permanently coincident degree -3n action does not take over the pairing",
    "overtake": "exterior overtake: a descending exterior action may replace the right endpoint",
    "continuity": "bottleneck continuity of barcodes in the profile",
}


@dataclass(frozen=True)
class LogEntry:
    leg: str
    time: Fraction
    kind: str
    rule: str
    detail: str = ""

    def to_json(self) -> dict:
        return {"leg": self.leg, "t": format_fraction(self.time), "kind": self.kind,
                "rule": self.rule, "detail": self.detail}


@dataclass
class BarCertificate:
    case: CaseTag
    tracked_degree: int
    final_bar: Bar
    branch: str
    g_bar_right: Fraction
    g_bar_left_upper: Fraction
    lower_bound: Quantity
    construction_chain_bound: Quantity
    event_log: list[LogEntry]
    theorems: list[str]
    right_sources: list[str] = field(default_factory=list)
    frames: list[tuple[str, Fraction, Fraction, Fraction]] = field(default_factory=list)

    @property
    def g_bar_length_lower(self) -> Fraction:
        return self.g_bar_right - self.g_bar_left_upper

    def to_json(self) -> dict:
        return {
            "case": self.case.value,
            "trackedDegree": self.tracked_degree,
            "finalBar": self.final_bar.to_json(),
            "branch": self.branch,
            "targetBar": {"right": format_fraction(self.g_bar_right),
                          "leftUpperBound": format_fraction(self.g_bar_left_upper)},
            "lowerBound": self.lower_bound.to_json(),
            "constructionChainBound": self.construction_chain_bound.to_json(),
            "events": [e.to_json() for e in self.event_log],
            "theorems": list(self.theorems),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


class _Run:
    """Mutable state of one certificate run."""

    def __init__(self, case: CaseTag, d: int):
        self.case = case
        self.d = d
        self.log: list[LogEntry] = []
        self.theorems: list[str] = []
        self.branch = "kept"
        self.overtaken = False
        self.right_sources: list[str] = []
        self.frames: list[tuple[str, Fraction, Fraction, Fraction]] = []
        self.snap: Optional[Callable[[Fraction], tuple[Fraction, Fraction]]] = None

    def note(self, leg: str, t: Fraction, kind: str, rule: str, detail: str = "", theorem: str = ""):
        self.log.append(LogEntry(leg, t, kind, rule, detail))
        if self.snap is not None:
            self.frames.append((leg, t) + self.snap(t))
        if theorem and THEOREMS[theorem] not in self.theorems:
            self.theorems.append(THEOREMS[theorem])


def _find(tracks: Sequence[ActionTrack], pred: Callable[[ActionTrack], bool]) -> list[int]:
    return [i for i, a in enumerate(tracks) if pred(a)]


def _continue(tracks: Sequence[ActionTrack], cur: ActionTrack, tau: Fraction, leg: str) -> int:
    c = _find(tracks, lambda a: a.t0 == tau and a.degree == cur.degree and a.kind == cur.kind
              and a.l == cur.l and a.k == cur.k and a.j == cur.j
              and a.at(tau) == cur.at(tau) and a.r(tau) == cur.r(tau))
    if not c:
        raise RuleConflict(f"tracked action {cur.describe()} has no continuation", leg, tau)
    return c[0]


def _degenerate(tracks: Sequence[ActionTrack], right: int, d: int) -> set[int]:
    rv = tracks[right].value
    return set(_find(tracks, lambda a: a.degree == d and a.value == rv))


def _partner(case: CaseTag, a: ActionTrack) -> bool:
    if case.value in (1, 2, 4):
        return a.kind == "YIntercept"
    return a.kind == "KinkDown" and a.point == "r(t)" and a.l == 2 and a.k == 0


def _advance(run: _Run, tracks, idx: Optional[int], t: Fraction, leg: str, role: str) -> Optional[int]:
    while idx is not None and tracks[idx].t1 < t:
        tau = tracks[idx].t1
        idx = _continue(tracks, tracks[idx], tau, leg)
        run.note(leg, tau, "Continuation", f"{role} endpoint continues", tracks[idx].describe(), "continuity")
    return idx


def _right_rule(run: _Run, leg: str, ev: Event, tracks, right: int, other: int, degenerate: set[int]) -> int:
    A, X = tracks[right], tracks[other]
    if X.degree != A.degree:
        run.note(leg, ev.time, "Collision", "cross-degree coincidence, no effect on the pairing", X.describe())
        return right
    if ev.degenerate:
        raise RuleConflict(f"right endpoint permanently coincides with {X.describe()}", leg, ev.time)
    if X.kind == "KinkUp":
        run.note(leg, ev.time, "Collision", "concave-up exclusion", X.describe(), "exclusion")
        return right
    if X.kind == "Exterior" and leg == "h2" and run.case is CaseTag.CASE5 and X.value.b < A.value.b:
        run.note(leg, ev.time, "Collision", "exterior overtake", X.describe(), "overtake")
        run.overtaken = True
        run.right_sources.append(X.describe())
        return other
    raise RuleConflict(f"right endpoint {A.describe()} meets {X.describe()}", leg, ev.time)


def _left_rule(run: _Run, leg: str, ev: Event, tracks, left: int, other: int, degenerate: set[int]) -> int:
    A, X = tracks[left], tracks[other]
    if X.degree != A.degree:
        run.note(leg, ev.time, "Collision", "cross-degree coincidence, no effect on the pairing", X.describe())
        return left
    if other in degenerate:
        run.note(leg, ev.time, "Collision", "energy axiom: coincident action ignored", X.describe(), "axiom")
        return left
    if _partner(run.case, X) and X.value.b > A.value.b:
        run.note(leg, ev.time, "Collision", "left exchange (right-limit)", X.describe(), "exchange")
        run.branch = "exchanged"
        return other
    raise RuleConflict(f"left endpoint {A.describe()} meets {X.describe()}", leg, ev.time)


def _run_h1(run: _Run, p: ManifoldParams, h1: HomotopyLeg) -> tuple[list[ActionTrack], int, int]:
    d = run.d
    tracks = track_actions(h1, p, (d, d + 1))
    lvl = -1 if run.case.value in (1, 2, 4) else 1
    rs = _find(tracks, lambda a: a.kind == "KinkDown" and a.point == "r(t)" and a.l == lvl
               and a.k == 0 and a.degree == d + 1 and a.t0 == 0)
    if len(rs) != 1:
        raise RuleConflict("the designated degree d+1 action at the moving kink is missing", "h1", Fraction(0))
    right = rs[0]
    degenerate = _degenerate(tracks, right, d)
    if degenerate:
        if run.case is not CaseTag.CASE5:
            raise RuleConflict("a degree d action coincides with the right endpoint for all time", "h1", Fraction(0))
        for i in sorted(degenerate):
            run.note("h1", Fraction(0), "Degenerate", "energy axiom: permanently coincident action excluded",
                     tracks[i].describe(), "axiom")
    twins = _find(tracks, lambda a: a.degree == d + 1 and a.value == tracks[right].value and a.t0 == 0)
    if len(twins) != 1:
        raise RuleConflict("the right endpoint is not isolated among degree d+1 actions", "h1", Fraction(0))
    v0 = tracks[right].at(0)
    ls = _find(tracks, lambda a: a.degree == d and a.t0 == 0 and a.at(0) == v0)
    ls = [i for i in ls if i not in degenerate]
    if len(ls) != 1:
        raise RuleConflict(f"{len(ls)} degree d actions start at the right endpoint's value", "h1", Fraction(0))
    left = ls[0]
    run.snap = lambda t: (tracks[left].at(t), tracks[right].at(t))
    run.note("h1", Fraction(0), "Inception", "pair the moving concave-down action with its limit partner",
             f"[{tracks[left].describe()}, {tracks[right].describe()})",
             "inception_n" if d == p.n else "inception_3n")
    run.right_sources.append(tracks[right].describe())
    for ev in detect_events(h1, tracks):
        right = _advance(run, tracks, right, ev.time, "h1", "right")
        left = _advance(run, tracks, left, ev.time, "h1", "left")
        if ev.kind != "Collision":
            if ev.kind == "SlopeHitsInteger":
                run.note("h1", ev.time, ev.kind, "re-parametrize actions", str(dict(ev.details)))
            continue
        i, j = ev.tracks
        if right in (i, j) and left in (i, j):
            if ev.time in (0, 1) or ev.degenerate:
                continue
            raise RuleConflict("the tracked bar shrinks to zero length", "h1", ev.time)
        if right in (i, j):
            right = _right_rule(run, "h1", ev, tracks, right, j if i == right else i, degenerate)
        elif left in (i, j):
            left = _left_rule(run, "h1", ev, tracks, left, j if i == left else i, degenerate)
    right = _advance(run, tracks, right, Fraction(1), "h1", "right")
    left = _advance(run, tracks, left, Fraction(1), "h1", "left")
    return tracks, right, left


def _run_h2(run: _Run, p: ManifoldParams, h2: HomotopyLeg, prev: ActionTrack,
            c0: Fraction) -> tuple[list[ActionTrack], int]:
    d = run.d
    tracks = track_actions(h2, p, (d, d + 1))
    v, r = prev.at(1), prev.r(1)
    cands = _find(tracks, lambda a: a.t0 == 0 and a.degree == prev.degree and a.kind == prev.kind
                  and a.l == prev.l and a.k == prev.k and a.at(0) == v and a.r(0) == r)
    if not cands:
        raise RuleConflict("the right endpoint does not continue into the clamp leg", "h2", Fraction(0))
    right = cands[0]
    run.snap = lambda t: (c0, tracks[right].at(t))
    increasing = [a for a in tracks if a.degree == d and a.value.b > 0]
    if increasing:
        raise RuleConflict(f"degree d action {increasing[0].describe()} increases during the clamp leg",
                           "h2", increasing[0].t0)
    run.note("h2", Fraction(0), "LegBoundary", "left endpoint only decreases from here on",
             "all degree d actions are non-increasing", "clamp")
    degenerate = _degenerate(tracks, right, d)
    if degenerate and run.case is not CaseTag.CASE5:
        raise RuleConflict("a degree d action coincides with the right endpoint for all time", "h2", Fraction(0))
    for ev in detect_events(h2, tracks):
        right = _advance(run, tracks, right, ev.time, "h2", "right")
        if ev.kind == "KinkAbsorbed":
            run.note("h2", ev.time, ev.kind, "clamp line absorbs a kink", str(dict(ev.details)))
            continue
        if ev.kind != "Collision":
            continue
        i, j = ev.tracks
        if right not in (i, j):
            continue
        other = j if i == right else i
        if ev.degenerate and other in degenerate:
            run.note("h2", ev.time, "Collision", "energy axiom: coincident action ignored",
                     tracks[other].describe(), "axiom")
            continue
        right = _right_rule(run, "h2", ev, tracks, right, other, degenerate)
    right = _advance(run, tracks, right, Fraction(1), "h2", "right")
    return tracks, right


def _construction_chain(case: CaseTag, data: CaseData) -> Quantity:
    if case.value in (1, 2, 4):
        return Quantity(data.r1, -8 * data.eps)
    return Quantity(data.r2 - data.delta3, -7 * data.eps)


def run_certificate(p: ManifoldParams, data: CaseData) -> BarCertificate:
    """Track the chosen bar through both legs and certify a boundary-depth bound.

    The bound is the certified bar length in the target profile minus the
    C^0 budget of the construction (``7*eps`` in real units).
    """
    if data.params != p:
        raise CaseMismatch("case data was built for different parameters")
    if not classify_kinks(data.g):
        raise CaseMismatch("the target profile has no kink to track")
    case = dispatch_case(p)
    h1, h2 = case_homotopies(case.value, data)
    run = _Run(case, case.tracked_degree(p.n))
    t1, right, left = _run_h1(run, p, h1)
    R1, L1 = t1[right], t1[left]
    final = Bar(L1.at(1), R1.at(1))
    c0 = L1.at(1)
    t2, right2 = _run_h2(run, p, h2, R1, c0)
    g_right = t2[right2].at(1)
    if not g_right > c0:
        raise RuleConflict("the certified bar in the target profile is empty", "h2", Fraction(1))
    lower = Quantity(g_right - c0, -7 * data.eps)
    run.theorems.append(THEOREMS["continuity"])
    return BarCertificate(case, run.d, final, run.branch, g_right, c0, lower, _construction_chain(case, data),
                          run.log, run.theorems, run.right_sources, run.frames)


# ---------------------------------------------------------------------------
# fold certificates


@dataclass
class FoldCertificate:
    degree: int
    right: str
    birth: tuple[int, Fraction]
    event_log: list[LogEntry]
    right_sources: list[str]

    def to_json(self) -> dict:
        return {"degree": self.degree, "right": self.right,
                "birth": {"leg": self.birth[0], "t": format_fraction(self.birth[1])},
                "events": [e.to_json() for e in self.event_log], "rightSources": self.right_sources}


def fold_targets(f: PLProfile, p: ManifoldParams) -> list[tuple[int, Fraction, int, int, str]]:
    """Concave-down actions of ``f`` in degree ``n+1`` or ``-3n+1``: ``(degree, r, l, k, variant)``."""
    out = []
    for kink in classify_kinks(f):
        if kink.orientation != "Down":
            continue
        S = kink.crossed_levels
        if not S:
            continue
        for d1 in (p.n + 1, -3 * p.n + 1):
            for var in ("down_upper", "down_lower"):
                for l, k in levels_for_degree(S[0], S[-1], p.n, p.N, VARIANTS[var](p.n), d1):
                    out.append((d1, kink.r, l, k, var))
    return sorted(set(out))


def fold_certificate(f: PLProfile, p: ManifoldParams, target: Optional[tuple] = None) -> Optional[FoldCertificate]:
    """Follow one concave-down right endpoint along the fold homotopy of ``f``.

    Returns ``None`` when ``f`` has no concave-down action in the two
    degrees the pairing theorems cover.  Raises :class:`NotGeneric` when
    another concave-down action of the same degree has the target's value.
    """
    targets = fold_targets(f, p)
    if target is None:
        if not targets:
            return None
        target = targets[0]
    d1, r, l, k, var = target
    value = f(r) - l * r + k * p.shift
    twins = [t for t in targets if t[0] == d1 and t[1:3] != (r, l)
             and f(t[1]) - t[2] * t[1] + t[3] * p.shift == value]
    if twins:
        raise NotGeneric(f"target shares its action with the concave-down source at r = {format_fraction(twins[0][1])}")
    point = f"r={format_fraction(r)}"
    key = ("KinkDown", point, var, l, None, k)
    log: list[LogEntry] = []
    sources: list[str] = []
    birth = None
    legs = fold_homotopy(f)
    for li, leg in enumerate(legs):
        name = f"fold{li + 1}"
        tracks = track_actions(leg, p, (d1 - 1, d1))
        mine = [i for i, a in enumerate(tracks) if a.key() == key and a.degree == d1]
        if not mine:
            continue
        if birth is None:
            birth = (li + 1, tracks[mine[0]].t0)
            log.append(LogEntry(name, birth[1], "Inception", "concave-down pairing", tracks[mine[0]].describe()))
        mine_set = set(mine)
        sources.append(tracks[mine[0]].describe())
        for ev in detect_events(leg, tracks, focus=mine):
            if ev.kind != "Collision":
                continue
            i, j = ev.tracks
            other = j if i in mine_set else i
            if other in mine_set:
                continue
            X = tracks[other]
            if X.degree != d1:
                log.append(LogEntry(name, ev.time, "Collision", "transient coincidence with a degree d action",
                                    X.describe()))
            elif X.kind == "KinkUp":
                log.append(LogEntry(name, ev.time, "Collision", "concave-up exclusion", X.describe()))
            elif X.kind in ("YIntercept", "Exterior"):
                log.append(LogEntry(name, ev.time, "Collision", "concave-down persistence", X.describe()))
            else:
                raise RuleConflict(f"concave-down right endpoint meets {X.describe()}", name, ev.time)
    if birth is None:
        raise RuleConflict("the target action never appears along the fold homotopy")
    return FoldCertificate(d1 - 1, f"KinkDown@{point} l={l} k={k}", birth, log, sources)


# ---------------------------------------------------------------------------
# labelled bound families


@dataclass(frozen=True)
class BoundCheck:
    label: str
    holds: bool
    value: Optional[Fraction]
    detail: str = ""

    def to_json(self) -> dict:
        return {"label": self.label, "holds": self.holds,
                "value": format_fraction(self.value) if self.value is not None else None,
                "detail": self.detail}


def _kink_family(prof: PLProfile, r: Fraction, p: ManifoldParams, degree: int, variant: str) -> tuple:
    """``(l, k, value)`` of the actual spectrum at the kink at ``r`` in one degree and variant."""
    for kink in classify_kinks(prof):
        if kink.r == r:
            return _family_at(kink, p, degree, variant)
    return ()


@lru_cache(maxsize=4096)
def _family_at(kink: Kink, p: ManifoldParams, degree: int, variant: str) -> tuple:
    S = kink.crossed_levels
    if not S:
        return ()
    shift, r, v = p.shift, kink.r, kink.value
    L = math.lcm(shift.denominator, r.denominator, v.denominator)
    sh, rr, vv = shift.numerator * (L // shift.denominator), r.numerator * (L // r.denominator), \
        v.numerator * (L // v.denominator)
    return tuple((l, k, Fraction(vv - l * rr + k * sh, L))
                 for l, k in levels_for_degree(S[0], S[-1], p.n, p.N, VARIANTS[variant](p.n), degree))


@lru_cache(maxsize=4096)
def _zs(fam: tuple, p: ManifoldParams, A: int, r: Fraction, h_r: Fraction):
    """Map spectrum members to the integer ``z`` of the closed form and check it.

    The family is ``-l = A - (2N/D) z``, ``k = (2n/D) z`` with value
    ``A*r + h(r) + (2z/D)(n*shift - N*r)``.
    """
    D = p.D
    base = A * r + h_r
    step = 2 * (p.n * p.shift - p.N * r) / D
    L = math.lcm(base.denominator, step.denominator)
    B, St = base.numerator * (L // base.denominator), step.numerator * (L // step.denominator)
    out, bad = [], []
    for l, k, val in fam:
        if p.N == 0:
            z = 0
        else:
            z, rem = divmod(k * D, 2 * p.n)
            if rem:
                bad.append(f"k={k} not a multiple of 2n/D")
                continue
        if (-l - A) * D != -2 * p.N * z:
            bad.append(f"level l={l} does not match z={z}")
        if val.numerator * L != (B + z * St) * val.denominator:
            bad.append(f"closed form differs from spectrum value {val} at z={z}")
        out.append((z, val))
    return tuple(out), tuple(bad)


def verify_case_bounds(case: CaseTag, data: CaseData, t) -> list[BoundCheck]:
    """Evaluate each labelled family of actions of the first leg at time ``t``.

    For each label: collect the actual actions from the spectrum of the
    profile at ``t``, recover the integer ``z`` of the closed form, check
    the closed form and the admissible range of ``z``, then the asserted
    bound.  Returns one :class:`BoundCheck` per label.
    """
    t = Fraction(t)
    if not 0 < t <= 1:
        raise ValueError("bounds are stated for 0 < t <= 1; at t = 0 the moving kink sits on r2")
    p = data.params
    if case != dispatch_case(p):
        raise CaseMismatch(f"parameters dispatch to {dispatch_case(p).name}, not {case.name}")
    prof = moving_kink_leg(data).profile_at(t)
    R, r1, r2, r3, m0, m1, eps = data.R, data.r1, data.r2, data.r3, data.m0, data.m1, data.eps
    n, N, D = p.n, p.N, p.D
    if case.value in (1, 2, 4):
        rt = (1 - t) * r2 + t * r1
    else:
        rt = (1 - t) * r2 + t * r3
    h = prof
    out: list[BoundCheck] = []

    def fam(label, r, degree, variant, A, z_ok, claim, empty_ok=True, note=""):
        members = _kink_family(prof, r, p, degree, variant)
        zs, bad = _zs(members, p, A, r, h(r))
        bad = list(bad)
        badz = [z for z, _ in zs if not z_ok(z)]
        if badz:
            bad.append(f"inadmissible z {sorted(set(badz))}")
        ok_claim, val = claim(zs)
        if not zs and not empty_ok:
            bad.append("family unexpectedly empty")
        out.append(BoundCheck(label, not bad and ok_claim, val, "; ".join(bad) or note))

    def all_of(pred):
        def claim(zs):
            vals = [v for _, v in zs]
            return all(pred(v) for v in vals), (min(vals) if vals else None)
        return claim

    def has_zero(pred=lambda v: True):
        def claim(zs):
            z0 = [v for z, v in zs if z == 0]
            return bool(z0) and all(pred(v) for v in z0), (z0[0] if z0 else None)
        return claim

    yint_vals = _yint(prof, p)
    ext = _exterior(prof, p)
    c = case.value
    if c in (1, 2, 4):
        P = "A" if c != 4 else "C"
        d = n
        if c == 1:
            fam("A1", r3, d + 1, "down_lower", 1, lambda z: z > 0, all_of(lambda v: v >= 2 * R))
            fam("A2", r3, d, "down_upper", 0, lambda z: z > 0, all_of(lambda v: v > R))
        elif c == 4:
            fam("C1", r3, d + 1, "down_lower", 1, lambda z: z > 0, all_of(lambda v: v < 0))
            fam("C2", r3, d, "down_upper", 0, lambda z: z > 0, all_of(lambda v: v < 0))
        fam(f"{P}3", rt, d + 1, "down_lower", 1, lambda z: z <= 0,
            has_zero(lambda v: v == rt + R * t), empty_ok=False)
        if c == 1:
            fam("A4", rt, d, "down_upper", 0, lambda z: z < 0,
                all_of(lambda v: v <= r2 or t == 0))
        elif c == 4:
            fam("C4", rt, d, "down_upper", 0, lambda z: z < 0,
                all_of(lambda v: v >= R * t + 2 * R))
        fam(f"{P}5", r2, d, "up_lower", 1, (lambda z: z == 0) if c == 2 else (lambda z: True),
            has_zero(lambda v: v == r2), empty_ok=False)
        y = [v for k, v in yint_vals.get(d, [])]
        target = R * t - m0 * rt
        m0_ok = Quantity(-m0 * r1, 0) > 0 and Quantity(-m0 * r1, 0) < Quantity(0, eps)
        out.append(BoundCheck(f"{P}6", y == [target] and m0_ok, target,
                              "" if y == [target] else f"y-intercept actions {y}"))
        e_n = [v for _, _, v in ext.get(d, [])]
        e_n1 = [v for _, _, v in ext.get(d + 1, [])]
        hR = h(R)
        if c == 4:
            out.append(BoundCheck("C7", all(v <= -R + m1 * (R - r3) for v in e_n) and r2 not in e_n,
                                  max(e_n, default=None), "no k = 0 exterior action exists in degree n"))
            out.append(BoundCheck("C8", all(v <= -R + m1 * (R - r3) and v < rt + R * t for v in e_n1),
                                  max(e_n1, default=None)))
        else:
            out.append(BoundCheck("A7", all(v >= R for v in e_n), min(e_n, default=None)))
            if c == 1:
                out.append(BoundCheck("A8", all(v >= 3 * R for v in e_n1) and all(v >= hR + p.gamma_hat for v in e_n1),
                                      min(e_n1, default=None)))
        return out

    P = "B" if c == 3 else "D"
    d = -3 * n
    d1 = R - r1
    if c == 3:
        fam("B1", r1, d + 1, "down_lower", -1, lambda z: z < 0, all_of(lambda v: v > d1))
        fam("B2", r1, d, "down_upper", -2, lambda z: z < 0, all_of(lambda v: v >= -R + 2 * d1))
    else:
        fam("D1", r1, d + 1, "down_lower", -1, lambda z: z < 0, all_of(lambda v: v > d1))
        fam("D2", r1, d, "down_upper", -2, lambda z: z < 0, all_of(lambda v: v >= -R + 2 * d1))
    b1_vals = [v for _, _, v in _kink_family(prof, r1, p, d + 1, "down_lower")]
    delta3 = R - r3

    def b3_claim(zs):
        z0 = [v for z, v in zs if z == 0]
        ok = bool(z0) and z0[0] == R * t - rt and (not b1_vals or delta3 < min(b1_vals))
        return ok, (z0[0] if z0 else None)

    fam(f"{P}3", rt, d + 1, "down_lower", -1, lambda z: z >= 0, b3_claim, empty_ok=False)
    two_n_is_d = 2 * N == D
    if c == 3:
        fam("B4", rt, d, "down_upper", -2, lambda z: z >= 0,
            all_of(lambda v: v <= R * t - 2 * rt), note="z >= -1, and z = -1 would need 2N = D")
    else:
        fam("D4", rt, d, "down_upper", -2, lambda z: z >= -1 and (z >= 0 or two_n_is_d),
            all_of(lambda v: True))
    b2_vals = [v for _, _, v in _kink_family(prof, r1, p, d, "down_upper")]
    fam(f"{P}5", r2, d, "up_lower", -1, lambda z: True,
        has_zero(lambda v: v == -r2 and (not b2_vals or v < min(b2_vals))), empty_ok=False)
    y = [v for _, v in yint_vals.get(d, [])]
    if c == 3:
        out.append(BoundCheck("B6", all(v <= -R - m0 * r1 and v < -r2 for v in y), max(y, default=None)))
    else:
        out.append(BoundCheck("D6", all(v == R - m0 * r1 for v in y), y[0] if y else None,
                              "" if y else "no y-intercept action in degree -3n (N does not divide 2n)"))
    hR = h(R)
    bound = R * t + m1 * (R - rt)
    e_d = [v for _, _, v in ext.get(d, [])]
    e_d1 = [v for _, _, v in ext.get(d + 1, [])]
    if c == 3:
        out.append(BoundCheck("B7", all(v <= bound - 2 * R and v < -r2 for v in e_d), max(e_d, default=None)))
        out.append(BoundCheck("B8", all(v <= bound - 2 * R and v < R * t - rt for v in e_d1),
                              max(e_d1, default=None)))
    else:
        out.append(BoundCheck("D7", hR == bound and all(v == bound for v in e_d), bound))
        out.append(BoundCheck("D8", all(v == bound for v in e_d1), bound))
    return out


def _yint(prof: PLProfile, p: ManifoldParams) -> dict[int, list[tuple[int, Fraction]]]:
    s0 = prof.slopes()[0]
    l = math.floor(s0)
    v = prof.points[0][1]
    out: dict[int, list[tuple[int, Fraction]]] = {}
    for d in range(-4 * p.n - 2, 2 * p.n + 3):
        for _, k in levels_for_degree(l, l, p.n, p.N, VARIANTS["y_intercept"](p.n), d):
            out.setdefault(d, []).append((k, v + k * p.shift))
    return out


def _exterior(prof: PLProfile, p: ManifoldParams) -> dict[int, list[tuple[int, int, Fraction]]]:
    v = prof.points[-1][1]
    out: dict[int, list[tuple[int, int, Fraction]]] = {}
    for j in p.exterior_morse_indices:
        base = j - p.n
        for d in range(-4 * p.n - 2, 2 * p.n + 3):
            if p.N == 0:
                if d == base:
                    out.setdefault(d, []).append((j, 0, v))
            elif (d - base) % (2 * p.N) == 0:
                k = (d - base) // (2 * p.N)
                out.setdefault(d, []).append((j, k, v + k * p.shift))
    return out


# ---------------------------------------------------------------------------
# boundary depth


@dataclass
class DepthBound:
    bound: Quantity
    index: int
    coefficient: Fraction
    correction: Fraction
    certificate: BarCertificate

    def to_json(self) -> dict:
        return {"bound": self.bound.to_json(), "generator": self.index + 1,
                "coefficient": format_fraction(self.coefficient),
                "continuityCorrection": format_fraction(self.correction),
                "certificate": self.certificate.to_json()}


def boundary_depth_lower_bound(a: Sequence, family, p: ManifoldParams, eps, seed: int = 0) -> DepthBound:
    """Certified lower bound on the boundary depth of ``sum a_i f_i``.

    The largest coefficient ``|a_k|`` selects a generator; the certificate for
    that generator alone certifies ``R - 2eps`` (minus ``7eps`` raw), and the
    straight-line correction to the actual coefficients costs ``R(1 - |a_k|)``.
    """
    cs = tuple(to_fraction(c) for c in a)
    if not any(cs):
        raise AllZero("all coefficients vanish; the bound is trivially 0")
    eps = to_fraction(eps)
    k = max(range(len(cs)), key=lambda i: (abs(cs[i]), -i))
    unit = tuple(Fraction(int(i == k)) for i in range(len(cs)))
    cert = _certificate_for(p, eps, unit, family, seed)
    target = Quantity(p.R - 2 * eps, -7 * eps)
    if cert.lower_bound < target:
        raise RuleConflict("the certified bar is shorter than the theorem requires")
    c = abs(cs[k])
    corr = p.R * (1 - c)
    return DepthBound(target - Quantity(corr, 0), k, c, corr, cert)


_CERT_CACHE: dict = {}


def _certificate_for(p, eps, unit, family, seed) -> BarCertificate:
    from .embedding import case_data_for

    key = (p, eps, unit, family, seed)
    if key not in _CERT_CACHE:
        _CERT_CACHE[key] = run_certificate(p, case_data_for(p, eps, unit, family, seed))
    return _CERT_CACHE[key]
