"""Neighborhoods and monotone update rules.

A rule is a neighborhood (finite symmetric set of lattice offsets containing
the origin) together with a sufficiency map pi assigning each occupied-offset
subset a value in [0, 1].  Three encodings are supported: totalistic
thresholds, antichains of minimal sufficient sets, and explicit probability
tables.  Subsets are machine-word bitmasks over the offset index, which caps
the neighborhood size at 64 offsets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Offset = tuple[int, int]

MAX_NEIGHBORHOOD = 64
MAX_TABLE_BITS = 20  # probability tables are dense over 2^|N|


class RuleError(ValueError):
    """Raised for structurally unusable rule inputs."""


@dataclass(frozen=True)
class NeighborhoodMask:
    """Finite set of integer offsets, indexed for bitmask subsets."""

    offsets: tuple[Offset, ...]

    def __post_init__(self):
        seen = set()
        for o in self.offsets:
            if o in seen:
                raise RuleError(f"duplicate offset {o}")
            seen.add(o)
        object.__setattr__(self, "_index", {o: i for i, o in enumerate(self.offsets)})

    @staticmethod
    def from_iterable(offsets: Iterable[Sequence[int]]) -> "NeighborhoodMask":
        return NeighborhoodMask(tuple(sorted((int(x), int(y)) for x, y in offsets)))

    def __len__(self) -> int:
        return len(self.offsets)

    def __contains__(self, o) -> bool:
        return tuple(o) in self._index

    def index(self, o: Offset) -> int:
        return self._index[tuple(o)]

    def mask_of(self, subset: Iterable[Offset]) -> int:
        m = 0
        for o in subset:
            m |= 1 << self.index(o)
        return m

    def subset_of(self, mask: int) -> tuple[Offset, ...]:
        return tuple(o for i, o in enumerate(self.offsets) if mask >> i & 1)

    def negate_mask(self, mask: int) -> int:
        """Bitmask of {-o : o in subset}; only valid for symmetric masks."""
        m = 0
        for i, o in enumerate(self.offsets):
            if mask >> i & 1:
                m |= 1 << self._index[(-o[0], -o[1])]
        return m

    @property
    def radius(self) -> int:
        return max((max(abs(x), abs(y)) for x, y in self.offsets), default=0)

    def violations(self) -> list[str]:
        out = []
        if (0, 0) not in self._index:
            out.append("neighborhood does not contain the origin")
        for o in self.offsets:
            if (-o[0], -o[1]) not in self._index:
                out.append(f"neighborhood not symmetric: missing {(-o[0], -o[1])}")
                break
        if len(self.offsets) > MAX_NEIGHBORHOOD:
            out.append(f"neighborhood larger than {MAX_NEIGHBORHOOD} offsets")
        return out


def box_neighborhood(rho: int) -> NeighborhoodMask:
    """Range-rho box: all offsets with sup-norm at most rho."""
    if rho < 0:
        raise RuleError("range must be nonnegative")
    return NeighborhoodMask.from_iterable(
        (x, y) for x in range(-rho, rho + 1) for y in range(-rho, rho + 1)
    )


def diamond_neighborhood(rho: int) -> NeighborhoodMask:
    """Range-rho diamond: all offsets with 1-norm at most rho."""
    if rho < 0:
        raise RuleError("range must be nonnegative")
    return NeighborhoodMask.from_iterable(
        (x, y)
        for x in range(-rho, rho + 1)
        for y in range(-rho, rho + 1)
        if abs(x) + abs(y) <= rho
    )


MOORE = box_neighborhood(1)
VON_NEUMANN = diamond_neighborhood(1)


@dataclass(frozen=True)
class MonotoneRule:
    """Neighborhood plus sufficiency map.

    kind is one of "threshold", "antichain", "probtable".  For thresholds,
    theta is the occupancy count required.  For antichains, minimal_sets holds
    the inclusion-minimal sufficient subsets as bitmasks.  For probability
    tables, table[mask] is pi(subset) and the table is dense over all 2^|N|
    masks.  The origin-solidification override (pi = 1 whenever the origin is
    seen occupied) is applied by evaluation, so encodings only describe
    origin-free behavior.
    """

    neighborhood: NeighborhoodMask
    kind: str
    theta: int = 0
    minimal_sets: tuple[int, ...] = ()
    table: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("threshold", "antichain", "probtable"):
            raise RuleError(f"unknown rule kind {self.kind!r}")
        if self.kind == "probtable" and len(self.neighborhood) > MAX_TABLE_BITS:
            raise RuleError("probability table too large; use threshold/antichain")

    @property
    def origin_bit(self) -> int:
        return 1 << self.neighborhood.index((0, 0))

    def pi(self, mask: int) -> float:
        """Sufficiency of the subset encoded by mask, with solidify override."""
        if mask & self.origin_bit:
            return 1.0
        if self.kind == "threshold":
            return 1.0 if mask.bit_count() >= self.theta else 0.0
        if self.kind == "antichain":
            return 1.0 if any(mask & m == m for m in self.minimal_sets) else 0.0
        return self.table[mask]

    def sufficiency(self, subset: Iterable[Offset]) -> float:
        sub = tuple(tuple(o) for o in subset)
        for o in sub:
            if o not in self.neighborhood:
                raise RuleError(f"offset {o} outside neighborhood")
        return self.pi(self.neighborhood.mask_of(sub))

    def is_deterministic(self) -> bool:
        if self.kind in ("threshold", "antichain"):
            return True
        return all(v in (0.0, 1.0) for v in self.table)

    def skeleton(self) -> "MonotoneRule":
        """Deterministic rule flagging every positive-probability subset."""
        if self.kind in ("threshold", "antichain"):
            return self
        sure = [m for m in range(len(self.table)) if self.table[m] > 0.0]
        minimal = _minimalize(sure)
        return MonotoneRule(self.neighborhood, "antichain", minimal_sets=tuple(minimal))

    def min_positive(self) -> float:
        """Smallest positive sufficiency value (the perturbation size p)."""
        if self.kind in ("threshold", "antichain"):
            return 1.0
        positive = [v for v in self.table if v > 0.0]
        if not positive:
            raise RuleError("rule never fires")
        return min(positive)


def _minimalize(masks: list[int]) -> list[int]:
    masks = sorted(set(masks), key=lambda m: (m.bit_count(), m))
    out: list[int] = []
    for m in masks:
        if not any(m & kept == kept for kept in out):
            out.append(m)
    return out


def threshold_rule(neighborhood: NeighborhoodMask, theta: int) -> MonotoneRule:
    if theta < 0:
        raise RuleError("threshold must be nonnegative")
    return MonotoneRule(neighborhood, "threshold", theta=theta)


def antichain_rule(
    neighborhood: NeighborhoodMask, minimal_sets: Iterable[Iterable[Offset]]
) -> MonotoneRule:
    masks = tuple(neighborhood.mask_of(s) for s in minimal_sets)
    return MonotoneRule(neighborhood, "antichain", minimal_sets=masks)


def probtable_rule(
    neighborhood: NeighborhoodMask, entries: dict[int, float] | Sequence[float]
) -> MonotoneRule:
    n = len(neighborhood)
    if isinstance(entries, dict):
        table = [0.0] * (1 << n)
        for mask, v in entries.items():
            table[mask] = float(v)
    else:
        table = [float(v) for v in entries]
        if len(table) != 1 << n:
            raise RuleError("probability table must cover all subsets")
    return MonotoneRule(neighborhood, "probtable", table=tuple(table))


def validate_rule(rule: MonotoneRule) -> list[str]:
    """Report violated standing assumptions; empty means valid.

    Checks, in order: neighborhood shape (origin, symmetry, size cap),
    pi(empty) = 0, monotonicity, solidification and symmetry pi(-S) = pi(S).
    Violations are data for the caller, not exceptions.
    """
    out = rule.neighborhood.violations()
    if out:
        return out
    nb = rule.neighborhood

    if rule.kind == "threshold":
        if rule.theta < 1:
            out.append("grows from nothing: threshold 0 makes pi(empty) = 1")
        # Monotone, solidifying and symmetric by construction otherwise.
        return out

    if rule.kind == "antichain":
        if any(m == 0 for m in rule.minimal_sets):
            out.append("grows from nothing: empty set listed as sufficient")
        sets = rule.minimal_sets
        for i, a in enumerate(sets):
            for b in sets[i + 1 :]:
                if a & b == a or a & b == b:
                    out.append("not an antichain: a minimal set contains another")
                    break
            else:
                continue
            break
        neg = {nb.negate_mask(m) for m in sets}
        if neg != set(sets):
            out.append("symmetry: minimal sets not closed under point reflection")
        return out

    table = rule.table
    if table[0] != 0.0:
        out.append("grows from nothing: pi(empty) > 0")
    n = len(nb)
    for mask in range(1 << n):
        v = table[mask]
        if not 0.0 <= v <= 1.0:
            out.append(f"probability out of range on mask {mask:#x}")
            break
        for i in range(n):
            if not mask >> i & 1:
                if table[mask | 1 << i] < v:
                    out.append("monotonicity: adding an occupied site lowers pi")
                    break
        else:
            continue
        break
    origin = rule.origin_bit
    for mask in range(1 << n):
        if mask & origin and table[mask] != 1.0:
            out.append("solidification: origin-containing subset has pi < 1")
            break
    for mask in range(1 << n):
        if table[mask] != table[nb.negate_mask(mask)]:
            out.append("symmetry: pi(-S) differs from pi(S)")
            break
    return out


# -- rule files ---------------------------------------------------------------


def rule_to_dict(rule: MonotoneRule) -> dict:
    doc: dict = {
        "neighborhood": [list(o) for o in rule.neighborhood.offsets],
        "kind": rule.kind,
    }
    if rule.kind == "threshold":
        doc["theta"] = rule.theta
    elif rule.kind == "antichain":
        doc["minimal_sets"] = [
            [list(o) for o in rule.neighborhood.subset_of(m)] for m in rule.minimal_sets
        ]
    else:
        doc["prob_entries"] = [
            {"subset": [list(o) for o in rule.neighborhood.subset_of(m)], "prob": v}
            for m, v in enumerate(rule.table)
            if v > 0.0
        ]
    return doc


def rule_from_dict(doc: dict) -> MonotoneRule:
    try:
        nb = NeighborhoodMask.from_iterable(doc["neighborhood"])
        kind = doc["kind"]
        if kind == "threshold":
            return threshold_rule(nb, int(doc["theta"]))
        if kind == "antichain":
            return antichain_rule(nb, doc["minimal_sets"])
        if kind == "probtable":
            entries = {
                nb.mask_of(tuple(tuple(o) for o in e["subset"])): float(e["prob"])
                for e in doc["prob_entries"]
            }
            return probtable_rule(nb, entries)
    except (KeyError, TypeError) as exc:
        raise RuleError(f"malformed rule document: {exc}") from exc
    raise RuleError(f"unknown rule kind {doc.get('kind')!r}")


def load_rule(path) -> MonotoneRule:
    with open(path) as fh:
        return rule_from_dict(json.load(fh))


def save_rule(rule: MonotoneRule, path) -> None:
    with open(path, "w") as fh:
        json.dump(rule_to_dict(rule), fh, indent=2, sort_keys=True)
        fh.write("\n")
