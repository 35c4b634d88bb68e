"""Stability survey of box-neighborhood threshold rules.

For a range-rho box there are rho*(2*rho+1) supercritical thresholds.  Which
of them keep their polygonal shape under small random perturbations is
decided by a purely combinatorial quantity: the minimum, over lines through a
neighborhood point x, of the number of neighborhood points on or beyond the
line (the closed lower cut).  A threshold is not exactly stable exactly when
it equals that minimum for some x.  The survey computes this route and,
optionally, the independent geometric route (segment detection in the
hull-contact set) and cross-checks the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .geometry import (
    CaseLabel,
    StarBoundary,
    classify,
    hull_contact,
    star_boundary,
)
from .rules import NeighborhoodMask, box_neighborhood, threshold_rule

Vec = tuple[int, int]

SURVEY_MAX_RANGE = 16


def supercritical_threshold_count(rho: int) -> int:
    return rho * (2 * rho + 1)


def cut_count(mask: NeighborhoodMask, x: Vec, normal: Vec, level: int) -> int:
    """Closed lower-cut size |{z in N : <z, normal> >= level}| for the line
    {<z, normal> = level}, oriented away from the origin.

    The line must contain x and must not pass through the origin.
    """
    nx, ny = normal
    if level == 0:
        raise ValueError("line passes through the origin")
    if x[0] * nx + x[1] * ny != level:
        raise ValueError("line does not pass through x")
    if level < 0:
        nx, ny, level = -nx, -ny, -level
    return sum(1 for zx, zy in mask.offsets if zx * nx + zy * ny >= level)


def _cut_candidates(pts: np.ndarray, x: Vec) -> Iterator[tuple[int, int, int, int]]:
    """Yield (count, nx, ny, level) for every combinatorially distinct line
    through x, the line oriented so the cut is {<z, n> >= level}.

    Candidates: for each second neighborhood point y, the exact line through
    x and y (when it avoids the origin) and both one-sided perturbations of
    it; plus the line through x perpendicular to x.  Perturbed candidates
    report the critical line's (n, level).  Between consecutive critical
    angles the closed cut is constant and equals one of the perturbed counts,
    so the minimum over candidates is the minimum over all lines.
    """
    xx = np.asarray(x, dtype=np.int64)
    rel = pts - xx
    for y in pts:
        d = (int(y[0] - x[0]), int(y[1] - x[1]))
        if d == (0, 0):
            continue
        nx, ny = -d[1], d[0]
        level = nx * x[0] + ny * x[1]
        if level < 0:
            nx, ny, level = -nx, -ny, -level
        n = np.array([nx, ny], dtype=np.int64)
        dots = pts @ n
        on_line = dots == level
        t = rel @ np.array([ny, -nx], dtype=np.int64)
        if level > 0:
            beyond = int(np.count_nonzero(dots > level))
            left = int(np.count_nonzero(on_line & (t > 0)))
            right = int(np.count_nonzero(on_line & (t < 0)))
            yield beyond + left + right + 1, nx, ny, level
            yield beyond + left + 1, nx, ny, level
            yield beyond + right + 1, nx, ny, level
        else:
            # Line through the origin: the two adjacent rotation intervals
            # cut opposite half-planes, and both keep the on-line points on
            # the far side of x from the origin.
            s = x[0] * ny - x[1] * nx
            far = int(np.count_nonzero(on_line & (t * s > 0)))
            above = int(np.count_nonzero(dots > 0))
            below = int(np.count_nonzero(dots < 0))
            yield above + far + 1, nx, ny, level
            yield below + far + 1, nx, ny, level
    # Line through x perpendicular to x never passes through the origin.
    nx, ny = int(x[0]), int(x[1])
    level = nx * nx + ny * ny
    dots = pts @ np.array([nx, ny], dtype=np.int64)
    yield int(np.count_nonzero(dots >= level)), nx, ny, level


def min_cut_count(mask: NeighborhoodMask, x: Vec) -> int:
    """Minimum closed lower-cut size over all lines through x avoiding the
    origin."""
    x = tuple(x)
    if x not in mask or x == (0, 0):
        raise ValueError("x must be a nonzero neighborhood offset")
    pts = np.array(mask.offsets, dtype=np.int64)
    return min(c for c, *_ in _cut_candidates(pts, x))


def min_cut_count_adjacent_exit(rho: int, x: Vec) -> int:
    """Minimum cut size restricted to lines leaving the solid box
    [-rho, rho]^2 through adjacent, not opposite, sides.

    Cross-check companion to min_cut_count: the unrestricted minimum is
    always attained by such a line.
    """
    mask = box_neighborhood(rho)
    pts = np.array(mask.offsets, dtype=np.int64)
    best = None
    for c, nx, ny, level in _cut_candidates(pts, tuple(x)):
        if _exits_adjacent_sides(rho, nx, ny, level):
            best = c if best is None else min(best, c)
    if best is None:
        raise AssertionError("no adjacent-exit candidate line")
    return best


def _exits_adjacent_sides(rho: int, nx: int, ny: int, level: int) -> bool:
    """Does the line {<z, n> = level} leave the square [-rho, rho]^2 through
    two sides meeting at a corner?  Corner grazes count as adjacent."""
    hits: set[tuple[str, int]] = set()
    for sx in (-rho, rho):
        if ny != 0:
            y = Fraction(level - nx * sx, ny)
            if -rho <= y <= rho:
                hits.add(("v", sx))
    for sy in (-rho, rho):
        if nx != 0:
            xq = Fraction(level - ny * sy, nx)
            if -rho <= xq <= rho:
                hits.add(("h", sy))
    kinds = {k for k, _ in hits}
    if len(hits) < 2:
        return False
    if len(hits) == 2 and len(kinds) == 1:
        return False  # opposite sides
    return len(kinds) == 2 or len(hits) > 2


def min_cut_set(rho: int) -> set[int]:
    """{min_cut_count(x) : x in range-rho box, x != 0}."""
    mask = box_neighborhood(rho)
    pts = np.array(mask.offsets, dtype=np.int64)
    out: set[int] = set()
    for x in mask.offsets:
        if x == (0, 0):
            continue
        out.add(min(c for c, *_ in _cut_candidates(pts, x)))
    return out


@dataclass(frozen=True)
class SurveyRow:
    theta: int
    exactly_stable: bool
    case: CaseLabel | None = None
    vertex_count: int | None = None
    segment_count: int | None = None
    point_count: int | None = None


def survey(rho: int, with_cases: bool = True) -> dict[int, SurveyRow]:
    """Stability survey over all supercritical thresholds of the range-rho box.

    Stability comes from the minimum-cut route.  When with_cases is true the
    geometric route (hull-contact classification per threshold) runs as well
    and the two routes are cross-checked: a contact segment appears exactly
    for the unstable thetas.
    """
    if not 1 <= rho <= SURVEY_MAX_RANGE:
        raise ValueError(f"range must be in 1..{SURVEY_MAX_RANGE}")
    mask = box_neighborhood(rho)
    tmax = supercritical_threshold_count(rho)
    unstable = min_cut_set(rho)
    rows: dict[int, SurveyRow] = {}
    for theta in range(1, tmax + 1):
        stable = theta not in unstable
        if not with_cases:
            rows[theta] = SurveyRow(theta, stable)
            continue
        rule = threshold_rule(mask, theta)
        label = classify(rule)
        star = star_boundary(rule)
        contact = hull_contact(star)
        if (label.case == 3) == stable:
            raise AssertionError(
                f"route disagreement at rho={rho} theta={theta}: "
                f"case {label.case} vs min-cut stability {stable}"
            )
        rows[theta] = SurveyRow(
            theta,
            stable,
            case=label,
            vertex_count=len(star),
            segment_count=len(contact.segments),
            point_count=len(contact.points),
        )
    return rows


def star_family(rho: int) -> list[StarBoundary]:
    """The speed stars of every supercritical threshold, smallest first."""
    if not 1 <= rho <= SURVEY_MAX_RANGE:
        raise ValueError(f"range must be in 1..{SURVEY_MAX_RANGE}")
    mask = box_neighborhood(rho)
    return [
        star_boundary(threshold_rule(mask, theta))
        for theta in range(1, supercritical_threshold_count(rho) + 1)
    ]


def distinct_products(nmax: int) -> int:
    """Number of distinct products m*n with 1 <= m, n <= nmax.

    Companion diagnostic to the survey: the count of unstable thresholds at
    large range tracks this quantity up to bounded slack.
    """
    if nmax < 1:
        raise ValueError("nmax must be positive")
    prods = set()
    for m in range(1, nmax + 1):
        for n in range(m, nmax + 1):
            prods.add(m * n)
    return len(prods)
