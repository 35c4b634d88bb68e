"""Counter-based randomness for reproducible coupled simulations.

Every random decision in the simulators is a pure function of
(master seed, replica id, x, y, t): a site's uniform is obtained by mixing
those five integers through a splitmix64-style finalizer.  No generator
state exists, so results are independent of scheduling, window partitioning
and thread count, replicas split cleanly, and a single shared uniform per
site realizes the monotone coupling across rules and perturbation strengths.
"""

from __future__ import annotations

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U53 = np.float64(1.0 / (1 << 53))


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _fold(h: np.ndarray, v) -> np.ndarray:
    return _mix(h ^ (np.asarray(v).astype(np.int64).view(np.uint64) * _GOLDEN + _M2))


def site_bits(seed: int, replica: int, x, y, t) -> np.ndarray:
    """64 mixed bits per site; x, y may be arrays (broadcast together)."""
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        h = _fold(h, np.int64(replica))
        h = _fold(h, np.broadcast_to(np.asarray(x, dtype=np.int64), np.broadcast(x, y).shape).copy())
        h = _fold(h, np.asarray(y, dtype=np.int64))
        h = _fold(h, np.int64(t))
    return h


def site_uniform(seed: int, replica: int, x, y, t) -> np.ndarray:
    """Uniforms in [0, 1), one per site, deterministic in the key."""
    return (site_bits(seed, replica, x, y, t) >> np.uint64(11)).astype(np.float64) * _U53


def derive_seed(seed: int, label: str) -> int:
    """Stable sub-seed for a named purpose (burn-in checks, shuffles)."""
    h = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    for ch in label:
        h = _mix(h ^ (np.uint64(ord(ch)) * _GOLDEN))
    return int(h)
