"""Coupled random perturbations of monotone rules.

The sampler draws one uniform per vacant site per step from the counter-based
stream keyed by (seed, replica, x, y, t) and occupies the site when the
uniform falls below the sufficiency of its visible pattern.  Monotonicity of
the rule makes that single shared uniform a monotone coupling: raising p, or
enlarging the initial set, can only enlarge the trajectory, and the
deterministic skeleton run with the same seed is a pathwise upper bound.

Two stepping engines are provided and agree bit for bit: a dense windowed
step for small states, and an incremental frontier engine for long runs from
finite seeds.  Half-space velocities are estimated on strips with tilted
periodic boundary identification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import NotSupercritical, polygon_contains, scale_polygon, speed, wulff_shape
from .lattice import (
    CallableBackground,
    EmptyBackground,
    LatticeState,
    Rect,
    WindowExhausted,
    _check_frontier_clearance,
    _padded,
    neighbor_counts,
    neighborhood_masks,
    state_from_cells,
    step_deterministic,
)
from .rules import MonotoneRule, RuleError, probtable_rule, validate_rule
from .rng import site_uniform

Vec = tuple[int, int]


@dataclass(frozen=True)
class PerturbationSpec:
    """A rule together with occupation probabilities.

    Standard mode fires every pattern the base rule's skeleton flags with the
    same probability p (origin-containing patterns stay sure).  Custom mode
    carries an explicit monotone probability table; its perturbation size p
    is the smallest positive entry.
    """

    base: MonotoneRule
    p: float = 1.0
    custom: MonotoneRule | None = None  # probtable rule overriding standard mode

    def __post_init__(self):
        if self.custom is None and not 0.0 < self.p <= 1.0:
            raise RuleError("standard perturbation needs p in (0, 1]")
        if self.custom is not None and self.custom.kind != "probtable":
            raise RuleError("custom perturbations must be probability tables")

    @staticmethod
    def standard(base: MonotoneRule, p: float) -> "PerturbationSpec":
        return PerturbationSpec(base=base, p=p)

    @staticmethod
    def from_table(table_rule: MonotoneRule) -> "PerturbationSpec":
        return PerturbationSpec(
            base=table_rule.skeleton(), p=table_rule.min_positive(), custom=table_rule
        )

    def skeleton(self) -> MonotoneRule:
        return self.base.skeleton()

    def pi_values(self, padded: np.ndarray, r: int, shape) -> np.ndarray:
        """Per-cell sufficiency probability for the visible pattern."""
        if self.custom is not None:
            mask = neighborhood_masks(self.custom, padded, r, shape)
            lut = np.array(self.custom.table, dtype=np.float64)
            pi = lut[mask.astype(np.int64)]
        else:
            det = self.base
            if det.kind == "threshold":
                counts = neighbor_counts(det, padded, r, shape)
                pi = np.where(counts >= det.theta, self.p, 0.0)
            elif det.kind == "antichain":
                mask = neighborhood_masks(det, padded, r, shape)
                suff = np.zeros(shape, dtype=bool)
                for m in det.minimal_sets:
                    mm = np.uint64(m)
                    suff |= (mask & mm) == mm
                pi = np.where(suff, self.p, 0.0)
            else:
                mask = neighborhood_masks(det, padded, r, shape)
                lut = np.array(det.table, dtype=np.float64)
                pi = np.where(lut[mask.astype(np.int64)] > 0.0, self.p, 0.0)
        ny, nx = shape
        center = padded[r : r + ny, r : r + nx]
        return np.where(center, 1.0, pi)  # solidify

    @property
    def rule(self) -> MonotoneRule:
        return self.custom if self.custom is not None else self.base

    @property
    def neighborhood(self):
        return self.rule.neighborhood


def validate_spec(spec: PerturbationSpec) -> list[str]:
    out = validate_rule(spec.rule)
    if spec.custom is not None and abs(spec.custom.min_positive() - spec.p) > 1e-12:
        out.append("p is not the smallest positive table entry")
    return out


@dataclass(frozen=True)
class RandomRun:
    """A lattice state bound to its randomness stream."""

    state: LatticeState
    master_seed: int
    replica: int = 0

    @property
    def time(self) -> int:
        return self.state.time


def sample_step(spec: PerturbationSpec, run: RandomRun) -> RandomRun:
    """One coupled random step.

    Occupied cells stay occupied; each vacant cell occupies when its keyed
    uniform is strictly below the sufficiency of the pattern it sees.
    """
    state = run.state
    r = spec.neighborhood.radius
    if isinstance(state.background, EmptyBackground):
        _check_frontier_clearance(state, r)
    P = _padded(state, r)
    pi = spec.pi_values(P, r, state.occ.shape)
    w = state.window
    X, Y = np.meshgrid(np.arange(w.x0, w.x1), np.arange(w.y0, w.y1))
    U = site_uniform(run.master_seed, run.replica, X, Y, state.time)
    fired = (~state.occ) & (U < pi)
    bg = state.background
    valid = state.valid
    if isinstance(bg, (EmptyBackground, CallableBackground)):
        pass  # background exact at every time
    else:
        valid = valid.shrink(r)
        if valid.is_empty():
            raise WindowExhausted("valid region exhausted under frozen background")
    new_state = LatticeState(w, state.occ | fired, bg, state.time + 1, valid)
    return RandomRun(new_state, run.master_seed, run.replica)


def deterministic_upper_bound_step(spec: PerturbationSpec, run: RandomRun) -> np.ndarray:
    """Occupied grid after one skeleton (p = 1) step, for sandwich checks."""
    one = PerturbationSpec(base=spec.skeleton(), p=1.0)
    return sample_step(one, run).state.occ


# -- incremental frontier engine ----------------------------------------------


class _IncrementalGrowth:
    """Sparse engine for long runs from finite seeds on an empty background.

    Maintains per-cell neighbor counts (threshold rules) or pattern bitmasks
    (table rules) updated only around newly occupied cells, and an active set
    of vacant cells with positive sufficiency.  Decisions use the same keyed
    uniforms as the dense engine, so trajectories are bit-identical.
    """

    def __init__(self, spec: PerturbationSpec, seed_cells, master_seed: int, steps: int, replica: int = 0, margin: int = 4):
        self.spec = spec
        self.master_seed = master_seed
        self.replica = replica
        r = spec.neighborhood.radius
        span = max(max(abs(x), abs(y)) for x, y in seed_cells)
        R = span + r * (steps + 1) + margin
        self.R = R
        self.size = 2 * R + 1
        self.x0 = self.y0 = -R
        shape = (self.size, self.size)
        self.occ = np.zeros(shape, dtype=bool)
        self.in_active = np.zeros(shape, dtype=bool)
        self.t = 0

        offsets = spec.neighborhood.offsets
        # Cell z sees offset i occupied iff z + off_i is occupied, so an
        # occupied cell w feeds the cells z = w - off_i.
        self.feed_shifts = np.array(
            [-(dy * self.size + dx) for dx, dy in offsets], dtype=np.int64
        )
        self.use_counts = spec.custom is None and spec.base.kind == "threshold"
        if self.use_counts:
            self.cnt = np.zeros(shape, dtype=np.uint16)
            self.theta = spec.base.theta
        else:
            rule = spec.rule
            n = len(offsets)
            dtype = np.uint8 if n <= 8 else (np.uint16 if n <= 16 else np.uint64)
            self.mask = np.zeros(shape, dtype=dtype)
            self.bit_for_feed = np.array([1 << i for i in range(n)], dtype=dtype)
            if rule.kind == "probtable":
                lut = np.array(rule.table, dtype=np.float64)
            elif rule.kind == "antichain":
                lut = np.zeros(1 << n)
                for m in range(1 << n):
                    lut[m] = rule.pi(m)
            else:
                lut = np.array([rule.pi(m) for m in range(1 << n)])
            if spec.custom is None:
                lut = np.where(lut > 0.0, spec.p, 0.0)
            self.lut = lut

        flat_seed = np.array(
            [(y - self.y0) * self.size + (x - self.x0) for x, y in seed_cells],
            dtype=np.int64,
        )
        self.active = np.empty(0, dtype=np.int64)
        self._occupy(np.unique(flat_seed))

    def _occupy(self, flat: np.ndarray) -> None:
        self.occ.flat[flat] = True
        self.in_active.flat[flat] = False
        fed = (flat[:, None] + self.feed_shifts[None, :]).ravel()
        if self.use_counts:
            np.add.at(self.cnt.reshape(-1), fed, 1)
        else:
            bits = np.broadcast_to(self.bit_for_feed, (flat.size, self.feed_shifts.size)).ravel()
            np.bitwise_or.at(self.mask.reshape(-1), fed, bits)
        cand = np.unique(fed)
        cand = cand[~self.occ.flat[cand] & ~self.in_active.flat[cand]]
        if self.use_counts:
            cand = cand[self.cnt.flat[cand] >= self.theta]
        else:
            cand = cand[self.lut[self.mask.flat[cand].astype(np.int64)] > 0.0]
        if cand.size:
            self.in_active.flat[cand] = True
            self.active = np.concatenate([self.active, cand])

    def step(self) -> np.ndarray:
        """Advance one step; returns flat indices of newly occupied cells."""
        act = self.active
        if act.size == 0:
            self.t += 1
            return act
        ys, xs = np.divmod(act, self.size)
        if self.use_counts:
            pi = np.float64(self.spec.p)
            U = site_uniform(self.master_seed, self.replica, xs + self.x0, ys + self.y0, self.t)
            fire = U < pi
        else:
            pi = self.lut[self.mask.flat[act].astype(np.int64)]
            U = site_uniform(self.master_seed, self.replica, xs + self.x0, ys + self.y0, self.t)
            fire = U < pi
        newly = act[fire]
        self.active = act[~fire]
        if newly.size:
            self._occupy(newly)
        self.t += 1
        return newly

    def occupied_bounding_radius(self) -> int:
        ys, xs = np.nonzero(self.occ)
        if xs.size == 0:
            return 0
        return int(
            max(
                np.abs(xs + self.x0).max(),
                np.abs(ys + self.y0).max(),
            )
        )

    def to_state(self) -> LatticeState:
        window = Rect(self.x0, self.y0, self.size, self.size)
        return LatticeState(window, self.occ.copy(), EmptyBackground(), self.t)

    def occupied_near(self, cx: float, cy: float, radius: int) -> np.ndarray:
        """Occupied cell coordinates within a square patch, as (n, 2) floats."""
        i0 = max(int(math.floor(cx - radius)) - self.x0, 0)
        i1 = min(int(math.ceil(cx + radius)) - self.x0 + 1, self.size)
        j0 = max(int(math.floor(cy - radius)) - self.y0, 0)
        j1 = min(int(math.ceil(cy + radius)) - self.y0 + 1, self.size)
        patch = self.occ[j0:j1, i0:i1]
        ys, xs = np.nonzero(patch)
        return np.stack(
            [xs + (i0 + self.x0), ys + (j0 + self.y0)], axis=1
        ).astype(np.float64)


def grow_finite(
    spec: PerturbationSpec,
    seed_cells: Iterable[Vec],
    steps: int,
    master_seed: int,
    snapshot_every: int = 0,
    replica: int = 0,
    observer: Callable | None = None,
):
    """Run a coupled trajectory from a finite seed.

    Returns (final_state, snapshots) where snapshots is a list of
    (time, LatticeState) taken every snapshot_every steps (and at the end)
    when snapshot_every > 0.  An observer callable, if given, is invoked as
    observer(engine) after every step for cheap in-place measurements.
    """
    seed_cells = [tuple(c) for c in seed_cells]
    eng = _IncrementalGrowth(spec, seed_cells, master_seed, steps, replica)
    snapshots = []
    for k in range(steps):
        eng.step()
        if observer is not None:
            observer(eng)
        if snapshot_every and (k + 1) % snapshot_every == 0:
            snapshots.append((eng.t, eng.to_state()))
    if snapshot_every and (not snapshots or snapshots[-1][0] != eng.t):
        snapshots.append((eng.t, eng.to_state()))
    if eng.occupied_bounding_radius() >= eng.R - spec.neighborhood.radius:
        raise WindowExhausted("growth reached the preallocated margin")
    return eng.to_state(), snapshots


# -- tilted periodic strips ----------------------------------------------------


@dataclass(frozen=True)
class StripConfig:
    """Tilted periodic strip for half-space velocity estimation.

    direction is a primitive integer vector at angle at most 45 degrees to
    the vertical: 0 <= v1 <= v2.  The strip has width columns; column x is
    identified with column x - width under a vertical shift of
    slope * width, which is an integer when width is a multiple of v2 (snap
    or pass such a width for an exact identification).  horizon counts total
    steps; the first burn_in steps are discarded.
    """

    direction: Vec
    width: int
    horizon: int
    burn_in: int | None = None  # default: half the horizon
    blocks: int = 16

    def __post_init__(self):
        v1, v2 = self.direction
        if not (0 <= v1 <= v2 and v2 > 0 and math.gcd(v1, v2) == 1):
            raise RuleError("direction must be primitive with 0 <= v1 <= v2 (reduce by symmetry)")
        if self.width % v2 != 0:
            raise RuleError("width must be a multiple of the direction's vertical component")
        if self.effective_burn_in >= self.horizon:
            raise RuleError("horizon must exceed the burn-in")

    @property
    def effective_burn_in(self) -> int:
        return self.horizon // 2 if self.burn_in is None else self.burn_in

    @property
    def slope(self) -> Fraction:
        return Fraction(self.direction[0], self.direction[1])

    @property
    def shift(self) -> int:
        return int(self.slope * self.width)

    @staticmethod
    def snap_width(width: int, v: Vec) -> int:
        """Smallest width >= the request making the identification exact."""
        v2 = v[1]
        return ((width + v2 - 1) // v2) * v2


@dataclass(frozen=True)
class VelocityEstimate:
    direction: Vec
    estimate: float  # cells per step along the unit normal
    stderr: float
    scaled: Fraction  # estimate times |direction|, exact for deterministic runs
    scaled_stderr: float
    samples: int
    master_seed: int
    h0_trace: np.ndarray = field(repr=False, default=None)
    h1_trace: np.ndarray = field(repr=False, default=None)


class _Strip:
    def __init__(self, spec: PerturbationSpec, cfg: StripConfig, master_seed: int, replica: int = 0):
        self.spec = spec
        self.cfg = cfg
        self.seed = master_seed
        self.replica = replica
        r = spec.neighborhood.radius
        self.r = r
        M = cfg.width
        v1, v2 = cfg.direction
        self.shift = cfg.shift
        # Row allocation: initial tilt, maximal vertical advance, and the
        # ghost-column shifts in both directions.
        self.ymin = -2 * (self.shift + 2 * r + 2)
        ymax = r * cfg.horizon + 2 * (self.shift + 2 * r + 2)
        self.rows = ymax - self.ymin + 1
        self.occ = np.zeros((self.rows, M), dtype=bool)
        xs = np.arange(M)
        init_top = (xs * v1) // v2  # floor(slope * x)
        rowidx = np.arange(self.rows)[:, None] + self.ymin
        self.occ[:] = rowidx <= init_top[None, :]
        self.tops = init_top.copy()
        self.h0 = init_top + 1  # lowest vacant row per column
        self.t = 0

    def _padded_band(self, ylo: int, yhi: int) -> np.ndarray:
        """Rows [ylo, yhi) with r ghost rows and tilted ghost columns."""
        r, M, s = self.r, self.cfg.width, self.shift
        i0 = ylo - self.ymin
        i1 = yhi - self.ymin
        band = np.zeros((i1 - i0 + 2 * r, M + 2 * r), dtype=bool)
        band[r:-r, r : r + M] = self.occ[i0:i1, :]
        band[:r, r : r + M] = self.occ[i0 - r : i0, :]
        band[-r:, r : r + M] = self.occ[i1 : i1 + r, :]
        for j in range(1, r + 1):
            # x = -j is column M - j shifted up by s; x = M-1+j is column
            # j-1 shifted down by s.
            band[:, r - j] = self.occ[i0 - r + s : i1 + r + s, M - j]
            band[:, r + M - 1 + j] = self.occ[i0 - r - s : i1 + r - s, j - 1]
        return band

    def step(self) -> None:
        r, M = self.r, self.cfg.width
        ylo = int(self.h0.min())
        yhi = int(self.tops.max()) + r + 1
        band = self._padded_band(ylo, yhi)
        shape = (yhi - ylo, M)
        pi = self.spec.pi_values(band, r, shape)
        X, Y = np.meshgrid(np.arange(M), np.arange(ylo, yhi))
        U = site_uniform(self.seed, self.replica, X, Y, self.t)
        center = band[r : r + shape[0], r : r + shape[1]]
        fired = (~center) & (U < pi)
        if fired.any():
            i0 = ylo - self.ymin
            self.occ[i0 : i0 + shape[0], :] |= fired
            self._refresh_heights(ylo, yhi)
        self.t += 1

    def _refresh_heights(self, ylo: int, yhi: int) -> None:
        i0 = ylo - self.ymin
        i1 = yhi - self.ymin
        band = self.occ[i0:i1, :]
        any_occ = band.any(axis=0)
        top_in = i1 - 1 - np.argmax(band[::-1, :], axis=0)
        self.tops = np.where(any_occ, top_in + self.ymin, self.tops)
        vac = ~band
        any_vac = vac.any(axis=0)
        first_vac = np.argmax(vac, axis=0) + i0
        self.h0 = np.where(any_vac, first_vac + self.ymin, i1 + self.ymin)

    def mean_top(self) -> Fraction:
        return Fraction(int(self.tops.sum()), self.cfg.width)


def strip_velocity(
    spec: PerturbationSpec, cfg: StripConfig, master_seed: int, replica: int = 0
) -> VelocityEstimate:
    """Estimate the half-space velocity along cfg.direction on a tilted strip.

    The estimate is the post-burn-in slope of the mean column height,
    projected onto the advance normal; the standard error comes from block
    means over the measurement window.
    """
    strip = _Strip(spec, cfg, master_seed, replica)
    v1, v2 = cfg.direction
    norm = math.hypot(v1, v2)
    burn = cfg.effective_burn_in
    means: list[Fraction] = []
    h0s = np.empty(cfg.horizon + 1, dtype=np.int64)
    h1s = np.empty(cfg.horizon + 1, dtype=np.int64)
    h0s[0] = strip.h0.min()
    h1s[0] = strip.tops.max()
    mean_at_burn = None
    for t in range(1, cfg.horizon + 1):
        strip.step()
        h0s[t] = strip.h0.min()
        h1s[t] = strip.tops.max()
        if t == burn:
            mean_at_burn = strip.mean_top()
        if t > burn:
            means.append(strip.mean_top())
    if mean_at_burn is None:
        mean_at_burn = Fraction(int(strip.tops.sum()), cfg.width)
    elapsed = cfg.horizon - burn
    total_slope = (means[-1] - mean_at_burn) / elapsed
    scaled = total_slope * v2
    # Block means over the measurement window.
    nb = min(cfg.blocks, elapsed)
    bounds = [burn + (elapsed * k) // nb for k in range(nb + 1)]
    series = [mean_at_burn] + means
    blocks = []
    for k in range(nb):
        a, b = bounds[k], bounds[k + 1]
        blocks.append(float((series[b - burn] - series[a - burn]) / (b - a)) * v2)
    blocks = np.array(blocks)
    scaled_stderr = float(blocks.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    return VelocityEstimate(
        direction=cfg.direction,
        estimate=float(scaled) / norm,
        stderr=scaled_stderr / norm,
        scaled=scaled,
        scaled_stderr=scaled_stderr,
        samples=nb,
        master_seed=master_seed,
        h0_trace=h0s,
        h1_trace=h1s,
    )


_OCTANT_MAPS = [
    lambda x, y: (x, y),
    lambda x, y: (y, x),
    lambda x, y: (-x, y),
    lambda x, y: (-y, x),
    lambda x, y: (x, -y),
    lambda x, y: (y, -x),
    lambda x, y: (-x, -y),
    lambda x, y: (-y, -x),
]


def reduce_direction(v: Vec) -> Vec:
    """Map a primitive direction into the first octant 0 <= v1 <= v2.

    Valid for rules symmetric under the square's symmetries (box totalistic
    rules); point symmetry alone justifies v -> -v.
    """
    x, y = abs(v[0]), abs(v[1])
    return (min(x, y), max(x, y))


def estimate_k_polygon(
    spec: PerturbationSpec,
    directions: Sequence[Vec],
    master_seed: int,
    width: int = 128,
    horizon: int = 600,
    burn_in: int | None = None,
) -> list[VelocityEstimate]:
    """Strip velocities over a set of directions (sampled inverse-speed star).

    Directions are reduced to the first octant before simulation, which
    assumes the rule carries the box symmetries; each reduced direction is
    simulated once and reported per requested direction.
    """
    cache: dict[Vec, VelocityEstimate] = {}
    out = []
    for v in directions:
        red = reduce_direction(v)
        if red not in cache:
            w = StripConfig.snap_width(width, red)
            cfg = StripConfig(direction=red, width=w, horizon=horizon, burn_in=burn_in)
            cache[red] = strip_velocity(spec, cfg, master_seed)
        est = cache[red]
        out.append(
            VelocityEstimate(
                direction=tuple(v),
                estimate=est.estimate,
                stderr=est.stderr,
                scaled=est.scaled,
                scaled_stderr=est.scaled_stderr,
                samples=est.samples,
                master_seed=master_seed,
            )
        )
    return out


# -- measurements ---------------------------------------------------------------


def _dist_to_polygon(points: np.ndarray, poly: list) -> np.ndarray:
    """Distance from each point to a convex polygon (0 inside)."""
    P = np.array([[float(a), float(b)] for a, b in poly])
    n = len(P)
    pts = points.astype(np.float64)
    inside = np.ones(len(pts), dtype=bool)
    dmin = np.full(len(pts), np.inf)
    for i in range(n):
        a, b = P[i], P[(i + 1) % n]
        e = b - a
        rel = pts - a
        crossv = e[0] * rel[:, 1] - e[1] * rel[:, 0]
        inside &= crossv >= 0
        tpar = np.clip((rel @ e) / (e @ e), 0.0, 1.0)
        proj = a + tpar[:, None] * e
        d = np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])
        dmin = np.minimum(dmin, d)
    return np.where(inside, 0.0, dmin)


def _boundary_samples(poly: list, spacing: float = 1.0) -> np.ndarray:
    P = np.array([[float(a), float(b)] for a, b in poly])
    out = []
    n = len(P)
    for i in range(n):
        a, b = P[i], P[(i + 1) % n]
        length = math.hypot(*(b - a))
        k = max(int(math.ceil(length / spacing)), 1)
        for j in range(k):
            out.append(a + (b - a) * (j / k))
    return np.array(out)


def _nearest_occupied_distance(state: LatticeState, pt, start_radius: int = 4) -> float:
    """Distance from a point to the occupied set by expanding patch search."""
    w = state.window
    radius = start_radius
    while True:
        i0 = max(int(math.floor(pt[0] - radius)), w.x0)
        i1 = min(int(math.ceil(pt[0] + radius)), w.x1 - 1)
        j0 = max(int(math.floor(pt[1] - radius)), w.y0)
        j1 = min(int(math.ceil(pt[1] + radius)), w.y1 - 1)
        patch = state.occ[j0 - w.y0 : j1 - w.y0 + 1, i0 - w.x0 : i1 - w.x0 + 1]
        ys, xs = np.nonzero(patch)
        if xs.size:
            d = np.hypot(xs + i0 - pt[0], ys + j0 - pt[1]).min()
            if d <= radius:  # otherwise a closer cell may lie outside the patch
                return float(d)
        if i0 == w.x0 and j0 == w.y0 and i1 == w.x1 - 1 and j1 == w.y1 - 1:
            if xs.size:
                return float(d)
            raise RuleError("empty state has no nearest occupied cell")
        radius *= 2


def hausdorff_to_polygon(state: LatticeState, poly: list, t) -> float:
    """Two-sided Hausdorff distance between the occupied set and t * poly.

    Side (a): occupied cells' maximal distance to the scaled polygon.
    Side (b): maximal distance from unit-spaced boundary samples of the
    scaled polygon to the occupied set.
    """
    cells = np.array(state.occupied_cells(), dtype=np.float64)
    if cells.size == 0:
        raise RuleError("empty state")
    scaled = scale_polygon(poly, Fraction(t))
    da = _dist_to_polygon(cells, scaled).max()
    db = 0.0
    for pt in _boundary_samples(scaled):
        db = max(db, _nearest_occupied_distance(state, pt))
    return float(max(da, db))


def corner_lag(
    spec: PerturbationSpec,
    steps: int,
    master_seed: int,
    seed_halfwidth: int = 4,
    sample_every: int = 10,
    replica: int = 0,
):
    """Distances from the corners of the growing deterministic shape to the
    occupied set, sampled along one coupled trajectory.

    Returns (times, lags) with lags of shape (len(times), n_corners).
    """
    det = spec.skeleton()
    shape = wulff_shape(det)
    corners = [(float(a), float(b)) for a, b in shape]
    seed_cells = [
        (x, y)
        for x in range(-seed_halfwidth, seed_halfwidth + 1)
        for y in range(-seed_halfwidth, seed_halfwidth + 1)
    ]
    times: list[int] = []
    lags: list[list[float]] = []

    def observe(eng: _IncrementalGrowth):
        if eng.t % sample_every:
            return
        row = []
        for cx, cy in corners:
            px, py = cx * eng.t, cy * eng.t
            radius = 8
            while True:
                pts = eng.occupied_near(px, py, radius)
                if pts.size:
                    d = np.hypot(pts[:, 0] - px, pts[:, 1] - py).min()
                    if d <= radius:
                        row.append(float(d))
                        break
                radius *= 2
        times.append(eng.t)
        lags.append(row)

    grow_finite(spec, seed_cells, steps, master_seed, replica=replica, observer=observe)
    return np.array(times), np.array(lags)


def max_corner_lag_slope(times: np.ndarray, lags: np.ndarray, t_from: int, t_to: int) -> float:
    """Least-squares slope of the maximal corner lag over a time window."""
    sel = (times >= t_from) & (times <= t_to)
    y = lags[sel].max(axis=1)
    x = times[sel].astype(np.float64)
    return float(np.polyfit(x, y, 1)[0])


# -- hole repair ----------------------------------------------------------------


def shape_cells(poly: list, scale) -> list[Vec]:
    """Lattice points of the polygon dilated by the given factor."""
    target = scale_polygon(poly, Fraction(scale))
    bound = int(max(max(abs(p[0]), abs(p[1])) for p in target)) + 1
    out = []
    for x in range(-bound, bound + 1):
        for y in range(-bound, bound + 1):
            if polygon_contains(target, (x, y)):
                out.append((x, y))
    return out


def hole_repair(
    rule: MonotoneRule,
    t0: int,
    where: str = "corner",
    size: int = 3,
    corner_index: int = 0,
    horizon: int | None = None,
):
    """Deterministic hole-repair experiment.

    Start from the lattice points of the shape dilated by t0, remove the
    `size` region cells nearest to a chosen boundary point (a corner of the
    shape, or an edge midpoint), and run both the holed and unholed states.
    Repaired means the two trajectories coincide within the horizon.

    Returns (repaired, repair_time_or_None, divergence_trace).
    """
    shape = wulff_shape(rule)
    base_cells = shape_cells(shape, t0)
    if where == "corner":
        target = shape[corner_index % len(shape)]
    elif where == "edge":
        a = shape[corner_index % len(shape)]
        b = shape[(corner_index + 1) % len(shape)]
        target = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    else:
        raise ValueError("where must be 'corner' or 'edge'")
    tx, ty = float(target[0]) * t0, float(target[1]) * t0
    ranked = sorted(base_cells, key=lambda c: (c[0] - tx) ** 2 + (c[1] - ty) ** 2)
    hole = set(ranked[:size])
    holed_cells = [c for c in base_cells if c not in hole]

    horizon = horizon if horizon is not None else 8 * size + 30
    r = rule.neighborhood.radius
    span = int(max(max(abs(x), abs(y)) for x, y in base_cells)) + r * (horizon + 1) + 2
    window = Rect(-span, -span, 2 * span + 1, 2 * span + 1)
    a = state_from_cells(base_cells, window)
    b = state_from_cells(holed_cells, window)
    trace = [int(a.count() - b.count())]
    for t in range(1, horizon + 1):
        a = step_deterministic(rule, a)
        b = step_deterministic(rule, b)
        missing = int(np.count_nonzero(a.occ & ~b.occ))
        trace.append(missing)
        if missing == 0:
            return True, t, trace
    return False, None, trace
