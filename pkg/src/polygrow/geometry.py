"""Exact polygonal growth geometry.

Everything here is computed in integer / rational arithmetic: half-space
speeds, the star-shaped set of inverse speeds, its convex hull and polar dual
(the limit shape of the deterministic dynamics), the contact set between the
star boundary and its hull boundary, and the three-way classification that
contact structure induces (isolated points / collinear points / segments).

Directions are primitive integer vectors v; speeds are reported in the scaled
form w_tilde = w * |v|, which is always an integer: the half-space with
outward normal v/|v| advances by w_tilde/|v| cells per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .rules import MonotoneRule, NeighborhoodMask, RuleError

Vec = tuple[int, int]
QPoint = tuple[Fraction, Fraction]


class NotSupercritical(RuleError):
    """Some direction has nonpositive half-space speed."""


def primitive(v: Iterable[int]) -> Vec:
    x, y = int(v[0]), int(v[1])
    if x == 0 and y == 0:
        raise ValueError("zero vector has no direction")
    g = math.gcd(abs(x), abs(y))
    return (x // g, y // g)


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _sort_ccw(dirs: Iterable[Vec]) -> list[Vec]:
    """Counterclockwise angular sort starting at the positive x-axis,
    using exact cross products (no trigonometry)."""
    import functools

    def cmp(a, b):
        ha = 0 if (a[1] > 0 or (a[1] == 0 and a[0] > 0)) else 1
        hb = 0 if (b[1] > 0 or (b[1] == 0 and b[0] > 0)) else 1
        if ha != hb:
            return -1 if ha < hb else 1
        c = a[0] * b[1] - a[1] * b[0]
        return 0 if c == 0 else (-1 if c > 0 else 1)

    return sorted(set(dirs), key=functools.cmp_to_key(cmp))


def speed(rule: MonotoneRule, v: Iterable[int]) -> int:
    """Scaled half-space speed w_tilde in direction v.

    w_tilde is the deepest cut level h (an integer multiple of 1/|v| in real
    units) whose closed cut {x in N : <x, v> <= -h} is sufficient.  The origin
    cut at h = 0 is always sufficient for solidifying rules, so the result is
    nonnegative; 0 means the half-space does not advance.
    """
    if not rule.is_deterministic():
        raise RuleError("speed is defined for deterministic rules")
    vx, vy = primitive(v)
    offsets = rule.neighborhood.offsets
    depths = sorted({-(x * vx + y * vy) for x, y in offsets}, reverse=True)
    mask_at = {}
    m = 0
    # Build cut masks cumulatively from the deepest level down.
    by_depth: dict[int, int] = {}
    for i, (x, y) in enumerate(offsets):
        d = -(x * vx + y * vy)
        by_depth.setdefault(d, 0)
        by_depth[d] |= 1 << i
    for d in depths:
        m |= by_depth[d]
        mask_at[d] = m
    for d in depths:
        if rule.pi(mask_at[d]) == 1.0:
            return d
    raise RuleError("no sufficient cut; rule violates solidification")


def critical_directions(mask: NeighborhoodMask) -> list[Vec]:
    """Primitive directions where the depth ordering of offsets can change.

    These are the perpendiculars to differences of neighborhood points (the
    origin is a neighborhood point).  Between two consecutive critical
    directions the cut attaining the speed is a fixed point of N, so speeds
    evaluated at the critical directions plus one interior witness per gap
    pin the entire star boundary.  Both orientations are returned, in
    counterclockwise order.
    """
    dirs: set[Vec] = set()
    pts = mask.offsets
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            dx, dy = a[0] - b[0], a[1] - b[1]
            p = primitive((-dy, dx))
            dirs.add(p)
            dirs.add((-p[0], -p[1]))
    return _sort_ccw(dirs)


@dataclass(frozen=True)
class StarBoundary:
    """Exact boundary of the inverse-speed star set.

    vertices are in counterclockwise order; edge i joins vertices[i] to
    vertices[i+1] and lies on the line {y : <y, -dual> = 1} of its dual
    neighborhood point edge_duals[i].
    """

    vertices: tuple[QPoint, ...]
    edge_duals: tuple[Vec, ...]

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n], self.edge_duals[i]

    def is_convex(self) -> bool:
        n = len(self.vertices)
        return all(
            _cross(self.vertices[i], self.vertices[(i + 1) % n], self.vertices[(i + 2) % n]) > 0
            for i in range(n)
        )


def _attainer(rule: MonotoneRule, v: Vec) -> Vec:
    """The neighborhood point whose depth level equals the speed at v."""
    w = speed(rule, v)
    vx, vy = v
    for x, y in rule.neighborhood.offsets:
        if -(x * vx + y * vy) == w:
            return (x, y)
    raise AssertionError("speed level not realized by any offset")


def star_boundary(rule: MonotoneRule) -> StarBoundary:
    """Exact star of radial extent (1/speed) with per-edge dual points.

    Raises NotSupercritical when any direction fails to advance.
    """
    crit = critical_directions(rule.neighborhood)
    if not crit:
        raise NotSupercritical("neighborhood has no nonzero offsets")
    speeds = []
    for v in crit:
        w = speed(rule, v)
        if w <= 0:
            raise NotSupercritical(f"direction {v} has speed {w} <= 0")
        speeds.append(w)
    n = len(crit)
    attainers = []
    for i in range(n):
        a, b = crit[i], crit[(i + 1) % n]
        witness = (a[0] + b[0], a[1] + b[1])
        if witness == (0, 0):  # opposite directions; no open sector between
            attainers.append(None)
            continue
        wv = primitive(witness)
        if speed(rule, wv) <= 0:
            raise NotSupercritical(f"direction {wv} has nonpositive speed")
        attainers.append(_attainer(rule, wv))
    vertices: list[QPoint] = []
    duals: list[Vec] = []
    for i in range(n):
        prev = attainers[i - 1]
        cur = attainers[i]
        if cur is None or prev is None or cur == prev:
            continue
        v = crit[i]
        w = speeds[i]
        vertices.append((Fraction(v[0], w), Fraction(v[1], w)))
        duals.append(cur)
    if not vertices:
        raise NotSupercritical("degenerate star")
    return StarBoundary(tuple(vertices), tuple(duals))


def convex_hull(points: Iterable[QPoint]) -> list[QPoint]:
    """Monotone-chain hull, counterclockwise, collinear points dropped."""
    pts = sorted(set((Fraction(p[0]), Fraction(p[1])) for p in points))
    if len(pts) <= 2:
        return pts
    lower: list[QPoint] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[QPoint] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polar(polygon: Iterable[QPoint]) -> list[QPoint]:
    """Exact polar dual of a convex polygon strictly containing the origin.

    Edges map to vertices: the edge through a and b maps to the solution of
    <z, a> = <z, b> = 1.  On convex polygons with the origin interior the
    transform is an involution.
    """
    poly = [tuple(Fraction(c) for c in p) for p in polygon]
    n = len(poly)
    if n < 3:
        raise ValueError("polar needs a polygon with at least 3 vertices")
    for i in range(n):
        if _cross(poly[i], poly[(i + 1) % n], (Fraction(0), Fraction(0))) <= 0:
            raise ValueError("origin is not strictly interior")
    out: list[QPoint] = []
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        det = a[0] * b[1] - a[1] * b[0]
        out.append(((b[1] - a[1]) / det, (a[0] - b[0]) / det))
    return out


def wulff_shape(rule: MonotoneRule) -> list[QPoint]:
    """Limit shape polygon: polar dual of the hull of the speed star."""
    star = star_boundary(rule)
    return polar(convex_hull(star.vertices))


@dataclass(frozen=True)
class ContactComponent:
    """Maximal connected piece of the star boundary lying on the hull boundary."""

    kind: str  # "point" | "segment"
    a: QPoint
    b: QPoint | None = None
    dual: Vec | None = None  # dual neighborhood point of the hosting star edge

    def endpoints(self):
        return (self.a,) if self.kind == "point" else (self.a, self.b)


@dataclass(frozen=True)
class ContactSet:
    components: tuple[ContactComponent, ...]

    @property
    def points(self):
        return [c.a for c in self.components if c.kind == "point"]

    @property
    def segments(self):
        return [c for c in self.components if c.kind == "segment"]


def _on_segment(p: QPoint, a: QPoint, b: QPoint) -> bool:
    if _cross(a, b, p) != 0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _seg_param(p: QPoint, a: QPoint, b: QPoint) -> Fraction:
    if b[0] != a[0]:
        return (p[0] - a[0]) / (b[0] - a[0])
    return (p[1] - a[1]) / (b[1] - a[1])


def hull_contact(star: StarBoundary) -> ContactSet:
    """Intersection of the star boundary with its hull boundary.

    Returns maximal components: rational segments (carrying the dual point of
    the star edge that produced them) and isolated points.
    """
    hull = convex_hull(star.vertices)
    hull_edges = [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))]

    raw_segments: list[tuple[QPoint, QPoint, Vec]] = []
    raw_points: set[QPoint] = set()

    for sa, sb, dual in star.edges():
        for ha, hb in hull_edges:
            if _cross(ha, hb, sa) == 0 and _cross(ha, hb, sb) == 0:
                # Collinear: overlap is a subsegment (possibly empty or a point).
                ta, tb = _seg_param(sa, ha, hb), _seg_param(sb, ha, hb)
                lo, hi = max(min(ta, tb), Fraction(0)), min(max(ta, tb), Fraction(1))
                if lo < hi:
                    pa = (
                        ha[0] + lo * (hb[0] - ha[0]),
                        ha[1] + lo * (hb[1] - ha[1]),
                    )
                    pb = (
                        ha[0] + hi * (hb[0] - ha[0]),
                        ha[1] + hi * (hb[1] - ha[1]),
                    )
                    raw_segments.append((pa, pb, dual))
                elif lo == hi:
                    raw_points.add(
                        (ha[0] + lo * (hb[0] - ha[0]), ha[1] + lo * (hb[1] - ha[1]))
                    )
            else:
                # A star edge can only meet a non-collinear hull edge at a
                # star vertex (the star lies inside the hull).
                for p in (sa, sb):
                    if _on_segment(p, ha, hb):
                        raw_points.add(p)

    # Merge overlapping / touching collinear segments.
    merged: list[tuple[QPoint, QPoint, Vec]] = []
    for seg in raw_segments:
        cur = seg
        changed = True
        while changed:
            changed = False
            for other in merged:
                if _cross(cur[0], cur[1], other[0]) == 0 and _cross(
                    cur[0], cur[1], other[1]
                ) == 0:
                    ta = _seg_param(other[0], cur[0], cur[1])
                    tb = _seg_param(other[1], cur[0], cur[1])
                    if max(min(ta, tb), 0) <= min(max(ta, tb), 1):
                        lo, hi = min(ta, tb, 0), max(ta, tb, 1)
                        d = (cur[1][0] - cur[0][0], cur[1][1] - cur[0][1])
                        cur = (
                            (cur[0][0] + lo * d[0], cur[0][1] + lo * d[1]),
                            (cur[0][0] + hi * d[0], cur[0][1] + hi * d[1]),
                            cur[2],
                        )
                        merged.remove(other)
                        changed = True
                        break
        merged.append(cur)

    comps: list[ContactComponent] = [
        ContactComponent("segment", a, b, dual) for a, b, dual in merged
    ]
    segments = list(comps)
    for p in sorted(raw_points):
        if not any(_on_segment(p, s.a, s.b) for s in segments):
            comps.append(ContactComponent("point", p))
    return ContactSet(tuple(comps))


@dataclass(frozen=True)
class CaseLabel:
    """Contact-structure classification of a deterministic rule.

    case 1: contact is isolated points, no three collinear (shape is exactly
    stable under small perturbations, with tight convergence).
    case 2: isolated points, some three collinear (exactly stable, corners lag
    logarithmically).
    case 3: contact contains a segment (not exactly stable, corners lag
    linearly).
    """

    case: int
    supercritical: bool
    quasi_additive: bool

    def describe(self) -> str:
        qa = "quasi-additive" if self.quasi_additive else "not quasi-additive"
        sc = "supercritical" if self.supercritical else "not supercritical"
        return f"Case {self.case}, {sc}, {qa}"


def _three_collinear(points: list[QPoint]) -> bool:
    n = len(points)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if _cross(points[i], points[j], points[k]) == 0:
                    return True
    return False


def classify(rule: MonotoneRule) -> CaseLabel:
    """Theorem-2 style case of a deterministic rule (or of a random rule's
    deterministic skeleton)."""
    det = rule if rule.is_deterministic() else rule.skeleton()
    star = star_boundary(det)  # raises NotSupercritical when applicable
    contact = hull_contact(star)
    if contact.segments:
        case = 3
    elif _three_collinear(contact.points):
        case = 2
    else:
        case = 1
    return CaseLabel(case=case, supercritical=True, quasi_additive=star.is_convex())


def polygon_contains(poly: list[QPoint], p) -> bool:
    """Closed convex polygon membership, exact for rational inputs."""
    n = len(poly)
    px, py = Fraction(p[0]), Fraction(p[1])
    for i in range(n):
        if _cross(poly[i], poly[(i + 1) % n], (px, py)) < 0:
            return False
    return True


def scale_polygon(poly: list[QPoint], s) -> list[QPoint]:
    f = Fraction(s)
    return [(f * x, f * y) for x, y in poly]
