"""The seven-site solvable growth model.

A one-parameter family of random rules on the von Neumann neighborhood plus
the two diagonal sites (1,-1) and (-1,1).  Four patterns are sure: an
occupied west or east neighbor, or the south+southeast pair, or the
north+northwest pair; every other nonempty pattern fires with probability p.
Grown from the quadrant {x >= 0, y <= 0}, the occupied set stays a staircase
(columns are downward closed, tops nondecreasing eastward) and the column
tops in the leftward-moving frame obey a one-dimensional pushed-Bernoulli
recursion whose law of large numbers is known in closed form.  That closed
form, and the polygonal limit shapes it produces for every p, make this
family the statistical oracle for the generic random engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import convex_hull, polar
from .lattice import CallableBackground, LatticeState, Rect, state_from_background
from .random_sim import PerturbationSpec, RandomRun, sample_step
from .rng import site_uniform
from .rules import (
    MonotoneRule,
    NeighborhoodMask,
    antichain_rule,
    probtable_rule,
)

SOLVABLE_NEIGHBORHOOD = NeighborhoodMask.from_iterable(
    [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
)

# Minimal sure patterns: west contact, east contact, south+southeast,
# north+northwest.  Closed under point reflection.
SURE_PATTERNS = (
    ((-1, 0),),
    ((1, 0),),
    ((1, -1), (0, -1)),
    ((-1, 1), (0, 1)),
)

# Vertices of the small-p limit of the inverse-speed star (equivalently, the
# speed star of the sure-pattern skeleton), counterclockwise.
LIMIT_STAR_VERTICES = ((1, 2), (0, 1), (-1, 1), (-1, -2), (0, -1), (1, -1))


def solvable_sure_rule() -> MonotoneRule:
    """Deterministic rule firing exactly the four sure patterns."""
    return antichain_rule(SOLVABLE_NEIGHBORHOOD, SURE_PATTERNS)


def solvable_rule(p: float) -> MonotoneRule:
    """Probability table: 1 on sure patterns (and with origin), p on every
    other nonempty pattern, 0 on the empty pattern."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    nb = SOLVABLE_NEIGHBORHOOD
    sure = [nb.mask_of(s) for s in SURE_PATTERNS]
    origin = 1 << nb.index((0, 0))
    table = []
    for mask in range(1 << len(nb)):
        if mask == 0:
            table.append(0.0)
        elif mask & origin or any(mask & m == m for m in sure):
            table.append(1.0)
        else:
            table.append(float(p))
    return probtable_rule(nb, table)


def solvable_spec(p: float) -> PerturbationSpec:
    return PerturbationSpec.from_table(solvable_rule(p))


def limit_parallelogram() -> list:
    """Exact small-p limit shape: the polar dual of the star vertices' hull."""
    pts = [(Fraction(a), Fraction(b)) for a, b in LIMIT_STAR_VERTICES]
    return polar(convex_hull(pts))


# -- closed forms ---------------------------------------------------------------


def profile(p: float, y) -> np.ndarray | float:
    """Self-inverse boundary profile of the quadrant wedge's limit region.

    Defined for y in [p, 1]; profile(p, 1) = p and profile(p, p) = 1, and the
    map is an involution on [p, 1].
    """
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < p - 1e-12) or np.any(y > 1 + 1e-12):
        raise ValueError("profile argument outside [p, 1]")
    yc = np.clip(y, max(p, 0.0), 1.0)
    val = 1 - p - (1 - 2 * p) * yc + 2 * np.sqrt(p * (1 - p) * yc * (1 - yc))
    return float(val) if val.ndim == 0 else val


def top_corner_height(p: float) -> float:
    """Height of the limit shape's top corner; 1 for p >= 1/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p >= 0.5:
        return 1.0
    return 2.0 * (1.0 - p) / (3.0 - math.sqrt(8.0 * p))


@dataclass(frozen=True)
class WedgeLimit:
    """Limit region of growth from one of the four quadrant-like wedges.

    which = 1 grows from {x >= 0, y <= 0}: the region is bounded above by
    y = 1 and on the left by x = -profile(y) (x = -1 below y = p).
    which = 2 grows from {y <= 0, x + y <= 0}: bounded above by y = 1 and on
    the right by x = profile(y) - y (x = 1 - y below y = p).
    which = 3, 4 are the point reflections of 1, 2.
    """

    p: float
    which: int

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        if self.which in (3, 4):
            return WedgeLimit(self.p, self.which - 2).contains(-x, -y, tol)
        p = self.p
        if y > 1 + tol:
            return False
        if self.which == 1:
            if y <= p:
                return x >= -1 - tol
            return x >= -profile(p, min(y, 1.0)) - tol
        if y <= p:
            return x <= 1 - y + tol
        return x <= profile(p, min(y, 1.0)) - y + tol

    def boundary_points(self, n: int = 200) -> np.ndarray:
        """Sampled curved-plus-straight boundary (the moving interface side)."""
        p = self.p
        ys = np.linspace(min(p, 1.0), 1.0, n)
        if self.which == 1:
            xs = -profile(p, ys)
        elif self.which == 2:
            xs = profile(p, ys) - ys
        else:
            inner = WedgeLimit(p, self.which - 2).boundary_points(n)
            return -inner
        return np.stack([xs, ys], axis=1)


@dataclass(frozen=True)
class LimitShape:
    """Limit shape of the solvable model from finite seeds: the intersection
    of the four wedge limit regions."""

    p: float

    @property
    def top(self) -> float:
        return top_corner_height(self.p)

    def bounds_at(self, y: float) -> tuple[float, float] | None:
        """(x_left, x_right) of the shape's slice at height y, None if empty."""
        p = self.p
        y0 = self.top
        if y < 0:
            b = self.bounds_at(-y)
            return None if b is None else (-b[1], -b[0])
        if y > y0 + 1e-12:
            return None
        if y <= p:
            return (-1.0, 1.0 - y)
        yc = min(y, y0)
        return (-profile(p, yc), profile(p, yc) - yc)

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        b = self.bounds_at(y) if y >= 0 else None
        if y < 0:
            return self.contains(-x, -y, tol)
        if b is None:
            return False
        return b[0] - tol <= x <= b[1] + tol

    def top_corner(self) -> tuple[float, float]:
        """Highest point of the shape; a genuine corner exactly when p < 1/2.
        For p >= 1/2 the top is the flat segment [-p, p-1] x {1}; its midpoint
        is returned."""
        y0 = self.top
        if self.p >= 0.5:
            return (-0.5, y0)
        return (-y0 / 2.0, y0)

    def boundary_points(self, n: int = 400) -> np.ndarray:
        p = self.p
        y0 = self.top
        ys_curved = np.linspace(min(p, y0), y0, n // 4 + 2)
        left = np.stack([-profile(p, np.clip(ys_curved, p, 1.0)), ys_curved], axis=1)
        right = np.stack(
            [profile(p, np.clip(ys_curved, p, 1.0)) - ys_curved, ys_curved], axis=1
        )
        ys_straight = np.linspace(0.0, min(p, y0), n // 4 + 2)
        sl = np.stack([-np.ones_like(ys_straight), ys_straight], axis=1)
        sr = np.stack([1.0 - ys_straight, ys_straight], axis=1)
        top_half = np.concatenate([sl, left[::1], right[::-1], sr[::-1]], axis=0)
        bottom = -top_half
        return np.concatenate([top_half, bottom], axis=0)


def wedge_limit(p: float, which: int) -> WedgeLimit:
    if which not in (1, 2, 3, 4):
        raise ValueError("which must be 1..4")
    return WedgeLimit(p, which)


def limit_shape(p: float) -> LimitShape:
    return LimitShape(p)


# -- interface recursion --------------------------------------------------------


@dataclass(frozen=True)
class InterfaceState:
    heights: np.ndarray  # int64, heights[n] in the leftward-moving frame
    time: int
    p: float


INTERFACE_REPLICA = 0x1D5EED


def interface_step(
    heights: np.ndarray, t: int, p: float, master_seed: int, replica: int = INTERFACE_REPLICA
) -> np.ndarray:
    """One step of the pushed-Bernoulli recursion.

    Site n advances surely when its left neighbor is at least as high
    (heights stay nondecreasing in n, so this reads "equal"); otherwise it
    advances with probability p.  Site 0 has no left constraint.
    """
    sure = np.zeros(heights.shape, dtype=bool)
    sure[1:] = heights[:-1] >= heights[1:]
    n = np.arange(heights.size)
    U = site_uniform(master_seed, replica, n, np.zeros_like(n), t)
    return heights + (sure | (U < p))


def simulate_interface(
    p: float, steps: int, master_seed: int, sites: int | None = None
) -> InterfaceState:
    """Run the interface recursion from a flat zero profile.

    The flat start encodes growth from the quadrant wedge; heights[n] after T
    steps is the top of lattice column n - T in the two-dimensional model.
    Mean heights per site converge to profile(p, 1 - n/T) on n <= (1 - p) T.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if sites is None:
        sites = steps + 1
    h = np.zeros(sites, dtype=np.int64)
    for t in range(steps):
        h = interface_step(h, t, p, master_seed)
    return InterfaceState(h, steps, p)


def interface_profile_prediction(p: float, alpha) -> np.ndarray | float:
    """Closed-form limit of heights[alpha * T] / T for alpha in [0, 1 - p]."""
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a < -1e-12) or np.any(a > 1 - p + 1e-9):
        raise ValueError("alpha outside [0, 1 - p]")
    return profile(p, 1.0 - a)


# -- two-dimensional equivalence ------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    steps: int
    sites: int
    mismatches: int
    first_divergence: tuple[int, int, int, int] | None  # (t, n, expected, got)
    lower_set_ok: bool


def _quadrant_background(x, y, t):
    """Exact state far from the corner when growing from {x>=0, y<=0}:
    deep rows sweep west at speed one, columns right of the corner rise at
    speed one."""
    return ((y <= 0) & (x >= -t)) | ((x >= 0) & (y <= t))


def equivalence_check(p: float, steps: int, master_seed: int) -> EquivalenceReport:
    """Exact pathwise comparison of the 2-D engine and the 1-D recursion.

    The 2-D model runs from the quadrant wedge with the generic sampler; the
    recursion twin draws its Bernoulli for site n at time t from the very
    uniform the sampler uses at the column-top candidate cell, so the two
    trajectories must agree cell for cell.  Any mismatch is reported with its
    first divergence.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    spec = solvable_spec(p)
    T = steps
    window = Rect(-T - 2, -3, T + 7, T + 7)  # columns -T-2..4, rows -3..T+3
    bg = CallableBackground(_quadrant_background)
    state = state_from_background(window, bg)
    run = RandomRun(state, master_seed, replica=0)

    sites = T + 3
    h = np.zeros(sites, dtype=np.int64)  # heights[n] = top of column -t+n
    mismatches = 0
    first = None
    lower_ok = True

    for t in range(T):
        # Twin update with uniforms mapped to the 2-D top-candidate cells.
        sure = np.zeros(sites, dtype=bool)
        sure[1:] = h[:-1] >= h[1:]
        n = np.arange(sites)
        U = site_uniform(master_seed, 0, -t - 1 + n, h + 1, t)
        h = h + (sure | (U < p))
        run = sample_step(spec, run)

        # Extract column tops from the 2-D grid and compare.
        occ = run.state.occ
        w = run.state.window
        cols_y = np.arange(w.y0, w.y1)
        for nn in range(min(sites, t + 1 + 5)):
            c = -(t + 1) + nn
            if c > 2:
                break
            col = occ[:, c - w.x0]
            ys = cols_y[col]
            top = ys.max() if ys.size else None
            if top is None or top != h[nn]:
                mismatches += 1
                if first is None:
                    first = (t + 1, nn, int(h[nn]), -(10**9) if top is None else int(top))
            if ys.size and not np.all(col[: ys.max() - w.y0 + 1]):
                lower_ok = False
    return EquivalenceReport(T, sites, mismatches, first, lower_ok)


def interface_distribution_distance(
    p: float, steps: int, probe_site: int, seeds: int, master_seed: int
) -> float:
    """Kolmogorov-Smirnov distance between the probe-site height law under
    the standalone recursion and under the 2-D extraction, across seeds.

    Fallback check for when exact stream alignment is not available.
    """
    a = np.empty(seeds, dtype=np.float64)
    b = np.empty(seeds, dtype=np.float64)
    for k in range(seeds):
        st = simulate_interface(p, steps, master_seed + 2 * k)
        a[k] = st.heights[probe_site]
        b[k] = _extract_2d_height(p, steps, probe_site, master_seed + 2 * k + 1)
    return _ks_distance(a, b)


def _extract_2d_height(p: float, steps: int, probe_site: int, seed: int) -> int:
    spec = solvable_spec(p)
    T = steps
    window = Rect(-T - 2, -3, T + 7, T + 7)
    state = state_from_background(window, CallableBackground(_quadrant_background))
    run = RandomRun(state, seed, replica=0)
    for _ in range(T):
        run = sample_step(spec, run)
    w = run.state.window
    c = -T + probe_site
    col = run.state.occ[:, c - w.x0]
    ys = np.arange(w.y0, w.y1)[col]
    return int(ys.max())


def _ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(a)
    b = np.sort(b)
    xs = np.concatenate([a, b])
    xs.sort()
    fa = np.searchsorted(a, xs, side="right") / a.size
    fb = np.searchsorted(b, xs, side="right") / b.size
    return float(np.abs(fa - fb).max())
