"""Barcodes: epsilon-matchings, bottleneck distance, boundary depth and reduction.

Bars are half-open intervals ``[a, b)`` with finite ``a`` and ``b`` possibly
``INF``.  The bottleneck distance is computed exactly: the infimum over
epsilon is attained at one of finitely many candidate values, and each
candidate is tested with a maximum bipartite matching.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .core import INF, ExtendedScalar, format_fraction, is_finite, to_fraction

RationalLike = Union[Fraction, int, str]


class DegreeMismatch(ValueError):
    pass


class NotAComplex(ValueError):
    pass


class FiltrationViolation(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Bar:
    left: Fraction
    right: ExtendedScalar

    def __post_init__(self):
        object.__setattr__(self, "left", to_fraction(self.left))
        if is_finite(self.right):
            object.__setattr__(self, "right", to_fraction(self.right))
            if not self.left < self.right:
                raise ValueError(f"bar needs left < right, got [{self.left}, {self.right})")

    @property
    def finite(self) -> bool:
        return is_finite(self.right)

    @property
    def length(self) -> ExtendedScalar:
        return self.right - self.left if self.finite else INF

    def to_json(self) -> dict:
        return {"left": format_fraction(self.left),
                "right": format_fraction(self.right) if self.finite else "inf"}


@dataclass(frozen=True)
class Barcode:
    degree: int
    bars: tuple[Bar, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(sorted(self.bars, key=_bar_key)))

    def __len__(self) -> int:
        return len(self.bars)

    def to_json(self) -> dict:
        return {"degree": self.degree, "bars": [b.to_json() for b in self.bars]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Barcode":
        bars = []
        for b in data["bars"]:
            right = INF if b["right"] == "inf" else to_fraction(b["right"])
            bars.append(Bar(to_fraction(b["left"]), right))
        return cls(int(data["degree"]), tuple(bars))


def _bar_key(b: Bar) -> tuple:
    return (b.left, (1, 0) if not b.finite else (0, b.right))


@dataclass(frozen=True)
class Matching:
    """A partial injection given by index pairs ``(i in B, j in C)``."""

    pairs: tuple[tuple[int, int], ...]
    epsilon: Fraction


@dataclass
class MatchingReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _check_degrees(B: Barcode, C: Barcode) -> None:
    if B.degree != C.degree:
        raise DegreeMismatch(f"degrees differ: {B.degree} vs {C.degree}")


def _short(bar: Bar, eps: Fraction) -> bool:
    return bar.finite and bar.length <= 2 * eps


def verify_matching(m: Matching, B: Barcode, C: Barcode) -> MatchingReport:
    """Check the three epsilon-matching conditions with strict inequalities."""
    _check_degrees(B, C)
    eps = to_fraction(m.epsilon)
    out: list[str] = []
    dom = [i for i, _ in m.pairs]
    img = [j for _, j in m.pairs]
    if len(set(dom)) != len(dom) or len(set(img)) != len(img):
        out.append("matching is not injective")
    if any(not 0 <= i < len(B) for i in dom) or any(not 0 <= j < len(C) for j in img):
        out.append("matching refers to a bar index that does not exist")
        return MatchingReport(False, out)
    for i, bar in enumerate(B.bars):
        if i not in dom and not _short(bar, eps):
            out.append(f"bar {i} of B has length > 2*eps but is unmatched")
    for j, bar in enumerate(C.bars):
        if j not in img and not _short(bar, eps):
            out.append(f"bar {j} of C has length > 2*eps but is unmatched")
    for i, j in m.pairs:
        b, c = B.bars[i], C.bars[j]
        if not abs(b.left - c.left) < eps:
            out.append(f"pair ({i},{j}): left endpoints differ by >= eps")
        if b.finite != c.finite:
            out.append(f"pair ({i},{j}): one bar infinite, the other finite")
        elif b.finite and not abs(b.right - c.right) < eps:
            out.append(f"pair ({i},{j}): right endpoints differ by >= eps")
    return MatchingReport(not out, out)


# ---------------------------------------------------------------------------
# bipartite matching


def hopcroft_karp(n_left: int, n_right: int, adj: Sequence[Sequence[int]]) -> int:
    """Size of a maximum matching in a bipartite graph given by adjacency lists."""
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left
    size = 0
    while True:
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = -1
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return size

        def augment(u: int) -> bool:
            for v in adj[u]:
                w = match_r[v]
                if w == -1 or (dist[w] == dist[u] + 1 and augment(w)):
                    match_l[u], match_r[v] = v, u
                    return True
            dist[u] = -1
            return False

        for u in range(n_left):
            if match_l[u] == -1 and augment(u):
                size += 1


def _feasible(bs: Sequence[Bar], cs: Sequence[Bar], delta: Fraction) -> bool:
    # Left side: bars of B, then one diagonal slot per bar of C.
    # Right side: bars of C, then one diagonal slot per bar of B.
    nb, nc = len(bs), len(cs)
    adj: list[list[int]] = []
    for i, b in enumerate(bs):
        row = []
        for j, c in enumerate(cs):
            if abs(b.left - c.left) > delta or b.finite != c.finite:
                continue
            if b.finite and abs(b.right - c.right) > delta:
                continue
            row.append(j)
        if b.finite and b.length <= 2 * delta:
            row.append(nc + i)
        adj.append(row)
    for j, c in enumerate(cs):
        row = [nc + i for i in range(nb)]
        if c.finite and c.length <= 2 * delta:
            row.append(j)
        adj.append(row)
    return hopcroft_karp(nb + nc, nc + nb, adj) == nb + nc


def bottleneck_distance(B: Barcode, C: Barcode) -> ExtendedScalar:
    """Exact bottleneck distance; ``INF`` iff the numbers of infinite bars differ."""
    _check_degrees(B, C)
    if sum(not b.finite for b in B.bars) != sum(not c.finite for c in C.bars):
        return INF
    cands = {Fraction(0)}
    for b in B.bars:
        for c in C.bars:
            cands.add(abs(b.left - c.left))
            if b.finite and c.finite:
                cands.add(abs(b.right - c.right))
    for bar in B.bars + C.bars:
        if bar.finite:
            cands.add(bar.length / 2)
    ordered = sorted(cands)
    lo, hi = 0, len(ordered) - 1
    # the largest candidate is always feasible: every pair can be matched or dropped
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(B.bars, C.bars, ordered[mid]):
            hi = mid
        else:
            lo = mid + 1
    return ordered[lo]


# ---------------------------------------------------------------------------
# boundary depth


def boundary_depth(barcodes: Mapping[int, Barcode]) -> tuple[Fraction, dict[int, Fraction]]:
    """Longest finite bar per degree, and the maximum over degrees."""
    per: dict[int, Fraction] = {}
    for d, bc in barcodes.items():
        finite = [b.length for b in bc.bars if b.finite]
        per[d] = max(finite, default=Fraction(0))
    return max(per.values(), default=Fraction(0)), per


# ---------------------------------------------------------------------------
# filtered complexes


@dataclass(frozen=True)
class Generator:
    degree: int
    action: Fraction
    label: str = ""


@dataclass
class FilteredComplex:
    """Generators plus a sparse boundary: ``boundary[x] = {y: coefficient}``."""

    generators: list[Generator]
    boundary: dict[int, dict[int, Fraction]]

    @classmethod
    def from_entries(cls, generators: Iterable[tuple[int, RationalLike, str]],
                     entries: Iterable[tuple[int, int, RationalLike]]) -> "FilteredComplex":
        gens = [Generator(d, to_fraction(a), lab) for d, a, lab in generators]
        bd: dict[int, dict[int, Fraction]] = {}
        for col, row, c in entries:
            c = to_fraction(c)
            if c:
                bd.setdefault(col, {})[row] = bd.get(col, {}).get(row, Fraction(0)) + c
        return cls(gens, bd)

    def with_actions(self, actions: Sequence[Fraction]) -> "FilteredComplex":
        gens = [Generator(g.degree, to_fraction(a), g.label) for g, a in zip(self.generators, actions)]
        return FilteredComplex(gens, {c: dict(col) for c, col in self.boundary.items()})


def _reduce_coeff(c: Fraction, field_name: str):
    if field_name == "Q":
        return c
    if c.denominator % 2 == 0:
        raise ValueError("coefficient not defined over GF(2)")
    return c.numerator % 2


def _validate(K: FilteredComplex, field_name: str) -> list[dict[int, object]]:
    gens = K.generators
    cols: list[dict[int, object]] = [dict() for _ in gens]
    for x, col in K.boundary.items():
        for y, c in col.items():
            c = _reduce_coeff(to_fraction(c), field_name)
            if not c:
                continue
            if gens[y].degree != gens[x].degree - 1:
                raise NotAComplex(f"boundary of generator {x} hits {y}, which is not one degree lower")
            if not gens[y].action < gens[x].action:
                raise FiltrationViolation(
                    f"generator {x} (action {gens[x].action}) has boundary term {y} (action {gens[y].action})")
            cols[x][y] = c
    # boundary squared must vanish
    for x, col in enumerate(cols):
        acc: dict[int, object] = {}
        for y, c in col.items():
            for z, e in cols[y].items():
                acc[z] = _add(acc.get(z, 0), _mul(c, e, field_name), field_name)
        if any(v for v in acc.values()):
            raise NotAComplex(f"the boundary of the boundary of generator {x} is non-zero")
    return cols


def _add(a, b, field_name):
    return (a + b) % 2 if field_name == "GF2" else a + b


def _mul(a, b, field_name):
    return (a * b) % 2 if field_name == "GF2" else a * b


def reduce_filtered_complex(K: FilteredComplex, field: str = "Q") -> dict[int, Barcode]:
    """Barcodes of the filtered complex by standard column reduction.

    ``field`` is ``"Q"`` (default) or ``"GF2"``.  Pairs of equal action give
    no bar.
    """
    if field not in ("Q", "GF2"):
        raise ValueError("field must be 'Q' or 'GF2'")
    cols = _validate(K, field)
    gens = K.generators
    order = sorted(range(len(gens)), key=lambda i: (gens[i].action, gens[i].degree, i))
    pos = {g: p for p, g in enumerate(order)}
    # columns in filtration coordinates
    work: list[dict[int, object]] = [{pos[y]: c for y, c in cols[g].items()} for g in order]
    low_owner: dict[int, int] = {}
    paired_rows: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for j in range(len(order)):
        col = work[j]
        while col:
            low = max(col)
            if low not in low_owner:
                break
            other = work[low_owner[low]]
            factor = col[low] if field == "GF2" else col[low] / other[low]
            for row, c in other.items():
                step = _mul(factor, c, field)
                nv = _add(col.get(row, 0), step if field == "GF2" else -step, field)
                if nv:
                    col[row] = nv
                else:
                    col.pop(row, None)
        if col:
            low = max(col)
            low_owner[low] = j
            paired_rows.add(low)
            pairs.append((low, j))
    bars: dict[int, list[Bar]] = {}
    killers = {j for _, j in pairs}
    for lo, j in pairs:
        a, b = gens[order[lo]].action, gens[order[j]].action
        if a < b:
            bars.setdefault(gens[order[lo]].degree, []).append(Bar(a, b))
    for p in range(len(order)):
        if p not in paired_rows and p not in killers:
            g = gens[order[p]]
            bars.setdefault(g.degree, []).append(Bar(g.action, INF))
    degrees = {g.degree for g in gens}
    return {d: Barcode(d, tuple(bars.get(d, ()))) for d in sorted(degrees)}


# ---------------------------------------------------------------------------
# export


def barcodes_to_json(barcodes: Mapping[int, Barcode] | Barcode) -> str:
    if isinstance(barcodes, Barcode):
        return json.dumps(barcodes.to_json(), indent=2)
    return json.dumps([barcodes[d].to_json() for d in sorted(barcodes)], indent=2)


def barcode_from_json_text(text: str) -> Barcode:
    return Barcode.from_json(json.loads(text))


def barcode_svg(barcode: Barcode, title: str = "", width: int = 640,
                highlight: Optional[Bar] = None) -> str:
    """One horizontal segment per bar; infinite bars end in an arrowhead."""
    bars = barcode.bars
    ends = [b.left for b in bars] + [b.right for b in bars if b.finite]
    if highlight is not None:
        ends += [highlight.left] + ([highlight.right] if highlight.finite else [])
    lo = min(ends, default=Fraction(0))
    hi = max(ends, default=Fraction(1))
    if hi == lo:
        hi = lo + 1
    span = hi - lo
    lo -= span / 20
    hi += span / 10
    margin, row_h = 40, 14
    inner = width - 2 * margin
    height = margin * 2 + row_h * max(len(bars), 1)

    def x(v: Fraction) -> float:
        return round(margin + float((v - lo) / (hi - lo)) * inner, 3)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="4" orient="auto">'
        '<path d="M0,0 L8,4 L0,8 z" fill="black"/></marker></defs>',
        f'<text x="{margin}" y="20" font-size="12">{title or f"degree {barcode.degree}"}</text>',
        f'<line x1="{margin}" y1="{height - margin + 10}" x2="{width - margin}" '
        f'y2="{height - margin + 10}" stroke="gray"/>',
    ]
    for i, b in enumerate(bars):
        y = margin + row_h * i + row_h / 2
        right = x(b.right) if b.finite else width - margin
        colour = "crimson" if highlight is not None and b == highlight else "black"
        marker = "" if b.finite else ' marker-end="url(#arrow)"'
        parts.append(f'<line x1="{x(b.left)}" y1="{y}" x2="{right}" y2="{y}" '
                     f'stroke="{colour}" stroke-width="3"{marker}/>')
    parts.append(f'<text x="{margin}" y="{height - margin + 24}" font-size="10">{format_fraction(lo)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
