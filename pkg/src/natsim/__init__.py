"""Simulation and analysis toolkit for driven lossy two-band systems.

Evolves two-component states along paths in the (quasimomentum, loss
contrast) control plane, tracks band-resolved diagnostics through the
biorthogonal eigenbasis, and provides the closed-form predictor for where
nonadiabatic transitions occur.
"""

__version__ = "0.1.0"

from .errors import (
    EpDegenerate,
    InvalidInput,
    NatsimError,
    NoDamping,
    NoTransition,
    OutOfRange,
    PoleEncountered,
)
from .model import (
    EP_TOLERANCE,
    ControlPoint,
    Eigensystem,
    Hamiltonian2,
    NormalizedParams,
    PhysicalParams,
    TwoState,
    build_hamiltonian,
    eigensystem,
    physical_to_normalized,
    spin_polarization,
)
from .paths import Path, Segment, Velocity, path_from_config, position_at, reverse, standard_path
from .dynamics import (
    DEFAULT_DT,
    DEFAULT_STRIDE,
    BandCoefficients,
    Trajectory,
    TrajectorySample,
    band_observables,
    evolve,
    project,
)
from .analysis import (
    AdiabaticFrameInput,
    NatPrediction,
    PhaseDiagram,
    PointSourceField,
    RayScan,
    adiabatic_b_approx,
    adiabatic_b_exact,
    boundary_contrast,
    first_sign_flip,
    initial_ratio,
    point_source_diagram,
    predict_nat_radius,
    protocol_phase_diagram,
    speed_sweep,
)

__all__ = [
    "AdiabaticFrameInput",
    "BandCoefficients",
    "ControlPoint",
    "DEFAULT_DT",
    "DEFAULT_STRIDE",
    "EP_TOLERANCE",
    "Eigensystem",
    "EpDegenerate",
    "Hamiltonian2",
    "InvalidInput",
    "NatPrediction",
    "NatsimError",
    "NoDamping",
    "NoTransition",
    "NormalizedParams",
    "OutOfRange",
    "Path",
    "PhaseDiagram",
    "PhysicalParams",
    "PointSourceField",
    "PoleEncountered",
    "RayScan",
    "Segment",
    "Trajectory",
    "TrajectorySample",
    "TwoState",
    "Velocity",
    "adiabatic_b_approx",
    "adiabatic_b_exact",
    "band_observables",
    "boundary_contrast",
    "build_hamiltonian",
    "eigensystem",
    "evolve",
    "first_sign_flip",
    "initial_ratio",
    "path_from_config",
    "physical_to_normalized",
    "point_source_diagram",
    "position_at",
    "predict_nat_radius",
    "project",
    "protocol_phase_diagram",
    "reverse",
    "spin_polarization",
    "speed_sweep",
    "standard_path",
]
