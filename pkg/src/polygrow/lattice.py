"""Windowed lattice states and exact deterministic stepping.

A state is a finite window of explicitly stored cells plus an analytic
background describing everything outside the window (empty space, a
half-space, or a wedge).  Cells are queryable everywhere; stepping pads the
window with background values, so runs from infinite initial sets stay exact
as long as the background itself is exact.  Backgrounds that advance
analytically (deterministic half-spaces moving at their known speed) keep the
whole window valid; frozen backgrounds shrink the valid region by the
neighborhood radius per step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .geometry import polygon_contains, scale_polygon, speed, wulff_shape
from .rules import MonotoneRule, RuleError

Vec = tuple[int, int]


class WindowExhausted(RuleError):
    """No valid cells remain; enlarge the window and rerun."""


@dataclass(frozen=True)
class Rect:
    """Half-open integer rectangle [x0, x0+nx) x [y0, y0+ny)."""

    x0: int
    y0: int
    nx: int
    ny: int

    @property
    def x1(self) -> int:
        return self.x0 + self.nx

    @property
    def y1(self) -> int:
        return self.y0 + self.ny

    def shrink(self, m: int) -> "Rect":
        return Rect(self.x0 + m, self.y0 + m, max(self.nx - 2 * m, 0), max(self.ny - 2 * m, 0))

    def is_empty(self) -> bool:
        return self.nx <= 0 or self.ny <= 0

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1


class EmptyBackground:
    """Vacant space outside the window."""

    def query(self, X, Y, t):
        return np.zeros(np.broadcast(X, Y).shape, dtype=bool)

    def advanced(self, rule):
        return self


@dataclass(frozen=True)
class HalfSpaceBackground:
    """Occupied half-space {z : <z, v> <= c}, optionally advancing.

    With advance_rate set (the scaled speed, an integer per step), the
    background translates exactly under deterministic stepping and stays a
    valid source of boundary values forever.
    """

    v: Vec
    c: Fraction = Fraction(0)
    advance_rate: int | None = None

    def query(self, X, Y, t):
        num, den = self.c.numerator, self.c.denominator
        return (np.asarray(X) * self.v[0] + np.asarray(Y) * self.v[1]) * den <= num

    def advanced(self, rule):
        if self.advance_rate is None:
            return None
        return replace(self, c=self.c + self.advance_rate)

    @staticmethod
    def for_rule(rule: MonotoneRule, v: Vec, c=Fraction(0)) -> "HalfSpaceBackground":
        return HalfSpaceBackground(tuple(v), Fraction(c), advance_rate=speed(rule, v))


@dataclass(frozen=True)
class WedgeBackground:
    """Occupied wedge: intersection of two half-space constraints.

    Wedges do not translate exactly (the corner lags), so this background is
    frozen and the valid window shrinks under stepping.
    """

    v1: Vec
    c1: Fraction
    v2: Vec
    c2: Fraction

    def query(self, X, Y, t):
        X = np.asarray(X)
        Y = np.asarray(Y)
        a = (X * self.v1[0] + Y * self.v1[1]) * self.c1.denominator <= self.c1.numerator
        b = (X * self.v2[0] + Y * self.v2[1]) * self.c2.denominator <= self.c2.numerator
        return a & b

    def advanced(self, rule):
        return None


class CallableBackground:
    """Expert hook: fn(X, Y, t) -> bool array, assumed exact at every t."""

    def __init__(self, fn: Callable):
        self.fn = fn

    def query(self, X, Y, t):
        return self.fn(np.asarray(X), np.asarray(Y), t)

    def advanced(self, rule):
        return self


@dataclass(frozen=True)
class LatticeState:
    window: Rect
    occ: np.ndarray  # bool, shape (window.ny, window.nx), index [y - y0, x - x0]
    background: object
    time: int = 0
    valid: Rect | None = None  # defaults to the full window

    def __post_init__(self):
        if self.occ.shape != (self.window.ny, self.window.nx):
            raise ValueError("grid shape does not match window")
        if self.valid is None:
            object.__setattr__(self, "valid", self.window)

    def query(self, x, y):
        """Occupation state at arbitrary cells (grid inside, background outside)."""
        x = np.asarray(x)
        y = np.asarray(y)
        inside = (
            (x >= self.window.x0)
            & (x < self.window.x1)
            & (y >= self.window.y0)
            & (y < self.window.y1)
        )
        out = self.background.query(x, y, self.time)
        xi = np.clip(x - self.window.x0, 0, self.window.nx - 1)
        yi = np.clip(y - self.window.y0, 0, self.window.ny - 1)
        return np.where(inside, self.occ[yi, xi], out)

    def occupied_cells(self) -> list[Vec]:
        ys, xs = np.nonzero(self.occ)
        return [(int(x + self.window.x0), int(y + self.window.y0)) for x, y in zip(xs, ys)]

    def count(self) -> int:
        return int(self.occ.sum())


def state_from_cells(
    cells: Iterable[Vec], window: Rect, background=None, time: int = 0
) -> LatticeState:
    occ = np.zeros((window.ny, window.nx), dtype=bool)
    for x, y in cells:
        if not window.contains(x, y):
            raise ValueError(f"cell {(x, y)} outside window")
        occ[y - window.y0, x - window.x0] = True
    return LatticeState(window, occ, background or EmptyBackground(), time)


def state_from_background(window: Rect, background, time: int = 0) -> LatticeState:
    xs = np.arange(window.x0, window.x1)
    ys = np.arange(window.y0, window.y1)
    X, Y = np.meshgrid(xs, ys)
    occ = background.query(X, Y, time)
    return LatticeState(window, np.ascontiguousarray(occ), background, time)


def _padded(state: LatticeState, r: int) -> np.ndarray:
    w = state.window
    xs = np.arange(w.x0 - r, w.x1 + r)
    ys = np.arange(w.y0 - r, w.y1 + r)
    X, Y = np.meshgrid(xs, ys)
    P = np.array(state.background.query(X, Y, state.time), dtype=bool)
    P[r : r + w.ny, r : r + w.nx] = state.occ
    return P


def neighborhood_masks(rule: MonotoneRule, padded: np.ndarray, r: int, shape) -> np.ndarray:
    """Per-cell occupied-subset bitmask (uint64) over the unpadded window."""
    ny, nx = shape
    mask = np.zeros(shape, dtype=np.uint64)
    for i, (dx, dy) in enumerate(rule.neighborhood.offsets):
        sl = padded[r + dy : r + dy + ny, r + dx : r + dx + nx]
        mask |= sl.astype(np.uint64) << np.uint64(i)
    return mask


def neighbor_counts(rule: MonotoneRule, padded: np.ndarray, r: int, shape) -> np.ndarray:
    ny, nx = shape
    counts = np.zeros(shape, dtype=np.int16)
    for dx, dy in rule.neighborhood.offsets:
        counts += padded[r + dy : r + dy + ny, r + dx : r + dx + nx]
    return counts


def sufficient_cells(rule: MonotoneRule, padded: np.ndarray, r: int, shape) -> np.ndarray:
    """Boolean array: pi(visible pattern) == 1 for each window cell."""
    if rule.kind == "threshold":
        counts = neighbor_counts(rule, padded, r, shape)
        suff = counts >= rule.theta
    elif rule.kind == "antichain":
        mask = neighborhood_masks(rule, padded, r, shape)
        suff = np.zeros(shape, dtype=bool)
        for m in rule.minimal_sets:
            mm = np.uint64(m)
            suff |= (mask & mm) == mm
    else:
        mask = neighborhood_masks(rule, padded, r, shape)
        lut = np.array(rule.table, dtype=np.float64)
        suff = lut[mask.astype(np.int64)] == 1.0
    ny, nx = shape
    center = padded[r : r + ny, r : r + nx]
    return suff | center  # solidification


def step_deterministic(rule: MonotoneRule, state: LatticeState) -> LatticeState:
    """One synchronous application of the deterministic transform.

    A cell joins when its visible occupied pattern is sufficient.  The window
    boundary is fed from the background; if the background cannot advance
    exactly, the valid region shrinks by the neighborhood radius.
    """
    if not rule.is_deterministic():
        raise RuleError("use the sampling engine for random rules")
    r = rule.neighborhood.radius
    if isinstance(state.background, EmptyBackground):
        _check_frontier_clearance(state, r)
    P = _padded(state, r)
    suff = sufficient_cells(rule, P, r, state.occ.shape)
    new_occ = state.occ | suff
    bg = state.background.advanced(rule)
    if bg is None:
        valid = state.valid.shrink(r)
        if valid.is_empty():
            raise WindowExhausted(
                "valid region exhausted; enlarge the window or use an advancing background"
            )
        bg = state.background
    else:
        valid = state.valid
    return LatticeState(state.window, new_occ, bg, state.time + 1, valid)


def _check_frontier_clearance(state: LatticeState, r: int) -> None:
    w = state.window
    if w.nx <= 2 * r or w.ny <= 2 * r:
        raise WindowExhausted("window smaller than the neighborhood")
    ring = state.occ.copy()
    ring[r:-r, r:-r] = False
    if ring.any():
        raise WindowExhausted(
            "occupied set reached the window margin; enlarge the window"
        )


def iterate(rule: MonotoneRule, state: LatticeState, steps: int) -> LatticeState:
    for _ in range(steps):
        state = step_deterministic(rule, state)
    return state


def states_equal(a: LatticeState, b: LatticeState) -> bool:
    return a.window == b.window and bool(np.array_equal(a.occ, b.occ))


def fills_space_probe(rule: MonotoneRule, seed: Iterable[Vec], horizon: int) -> str:
    """Coarse check that a finite seed grows like the limit shape.

    Returns "grows_like_shape" when, at the horizon, the occupied set covers
    the lattice points of the limit polygon dilated to half the predicted
    scale; "stalled" when a fixed point appears first; "inconclusive"
    otherwise.
    """
    seed = [tuple(c) for c in seed]
    r = rule.neighborhood.radius
    span = max(max(abs(x), abs(y)) for x, y in seed) + r * horizon + r + 1
    window = Rect(-span, -span, 2 * span + 1, 2 * span + 1)
    state = state_from_cells(seed, window)
    for _ in range(horizon):
        nxt = step_deterministic(rule, state)
        if states_equal(nxt, state):
            return "stalled"
        state = nxt
    shape = wulff_shape(rule)
    target = scale_polygon(shape, Fraction(horizon, 2))
    bound = max(max(abs(p[0]), abs(p[1])) for p in target)
    m = int(bound) + 1
    for x in range(-m, m + 1):
        for y in range(-m, m + 1):
            if polygon_contains(target, (x, y)):
                if not state.occ[y - window.y0, x - window.x0]:
                    return "inconclusive"
    return "grows_like_shape"


# -- state export -------------------------------------------------------------


def state_to_rle(state: LatticeState) -> dict:
    """Run-length encoded occupied cells with window metadata."""
    rows = []
    w = state.window
    for j in range(w.ny):
        row = state.occ[j]
        runs = []
        i = 0
        while i < w.nx:
            if row[i]:
                k = i
                while k < w.nx and row[k]:
                    k += 1
                runs.append([int(i + w.x0), int(k - i)])
                i = k
            else:
                i += 1
        if runs:
            rows.append({"y": int(j + w.y0), "runs": runs})
    return {
        "window": [w.x0, w.y0, w.nx, w.ny],
        "time": state.time,
        "rows": rows,
    }


def state_from_rle(doc: dict, background=None) -> LatticeState:
    x0, y0, nx, ny = doc["window"]
    window = Rect(int(x0), int(y0), int(nx), int(ny))
    occ = np.zeros((window.ny, window.nx), dtype=bool)
    for row in doc["rows"]:
        j = int(row["y"]) - window.y0
        for start, length in row["runs"]:
            i = int(start) - window.x0
            occ[j, i : i + int(length)] = True
    return LatticeState(
        window, occ, background or EmptyBackground(), int(doc.get("time", 0))
    )
