"""Dihedral-symmetry formation control on spanning trees of cycle graphs."""

__version__ = "0.1.0"

from .analysis import (
    ChainedTransforms,
    ResidualReport,
    Spectrum,
    build_v0,
    chain_transforms,
    convergence_rate,
    eigendecompose,
    predict_steady_state,
    predict_steady_state_agents,
    propagate_mirrors,
    residuals,
)
from .dynamics import (
    ManeuverLaw,
    PiecewiseConstant,
    SimulationResult,
    StaticLaw,
    VirtualTrajectory,
    control_maneuver,
    control_static,
    from_moving_frame,
    integrate,
    moving_frame,
    potential_value,
    step_virtual,
)
from .laplacian import (
    InteractionGraph,
    assign_edges,
    augment_anchor,
    incidence,
    laplacian,
    rotated_laplacian,
    spanning_tree,
    system_matrix,
    with_anchor,
)
from .symmetry import (
    GroupElement,
    MirrorLine,
    ReflectionClass,
    canonical_positions,
    classify,
    compose,
    dihedral_group,
    householder,
    make_reflection,
    make_rotation,
)
