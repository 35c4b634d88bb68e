"""polygrow: exact polygonal shapes and random perturbations of monotone
lattice growth rules."""

__version__ = "0.1.0"

from .rules import (
    MOORE,
    VON_NEUMANN,
    MonotoneRule,
    NeighborhoodMask,
    RuleError,
    antichain_rule,
    box_neighborhood,
    diamond_neighborhood,
    load_rule,
    probtable_rule,
    save_rule,
    threshold_rule,
    validate_rule,
)
from .geometry import (
    CaseLabel,
    ContactSet,
    NotSupercritical,
    StarBoundary,
    classify,
    convex_hull,
    critical_directions,
    hull_contact,
    polar,
    speed,
    star_boundary,
    wulff_shape,
)
from .survey import (
    distinct_products,
    min_cut_count,
    min_cut_set,
    star_family,
    survey,
)
from .lattice import (
    EmptyBackground,
    HalfSpaceBackground,
    LatticeState,
    Rect,
    WedgeBackground,
    WindowExhausted,
    fills_space_probe,
    iterate,
    state_from_background,
    state_from_cells,
    step_deterministic,
)
from .random_sim import (
    PerturbationSpec,
    RandomRun,
    StripConfig,
    VelocityEstimate,
    corner_lag,
    estimate_k_polygon,
    grow_finite,
    hausdorff_to_polygon,
    hole_repair,
    sample_step,
    strip_velocity,
)
from .solvable import (
    InterfaceState,
    equivalence_check,
    limit_shape,
    profile,
    simulate_interface,
    solvable_rule,
    solvable_spec,
    solvable_sure_rule,
    top_corner_height,
    wedge_limit,
)
