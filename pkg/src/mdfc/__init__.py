"""Simulator for measurement-based direct feedback control of a dephasing qubit.

Feedback schemes (POVM measurement + outcome-conditioned unitary at
Poisson rate R) are compiled into Lindblad generators; evolution under an
Ohmic dephasing bath integrates a hybrid memory-kernel master equation.
Includes Monte-Carlo trajectory and exact-dephasing oracles, fidelity and
purity metrics with Bloch-sphere averaging, a sweep optimizer, and a CLI
(`mdfc`) that reproduces the preparation and protection experiments.
"""

from .bath import (
    BathSpec,
    QuadratureError,
    complex_kernel,
    dissipation_kernel,
    noise_kernel,
    spectral_density,
)
from .evolve import (
    ConditioningWarning,
    HybridPropagator,
    SimConfig,
    SolverError,
    TimeSeries,
    feedback_generator,
    kernel_superop,
    lindblad_propagate,
    propagate_hybrid,
)
from .metrics import (
    SweepAxis,
    SweepResult,
    average_fidelity_sphere,
    fidelity_pure,
    fidelity_uhlmann,
    pair_average_fidelity,
    purity,
    sweep,
    unknown_state_average,
)
from .oracle import TrajectoryEstimate, exact_dephasing, mc_trajectories
from .qmat import (
    DensityReport,
    bloch_to_density,
    density_to_bloch,
    devectorize,
    expm,
    left_mult_superop,
    right_mult_superop,
    validate_density,
    vectorize,
)
from .scheme import (
    FeedbackScheme,
    MeasurementPair,
    SchemeError,
    do_nothing_scheme,
    lindblad_ops,
    mixed_protection_scheme,
    nonorthogonal_pair,
    pair_protection_scheme,
    preparation_scheme,
    weak_x_measurement,
    weak_z_measurement,
    y_rotation,
    z_rotation,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BathSpec",
    "QuadratureError",
    "complex_kernel",
    "dissipation_kernel",
    "noise_kernel",
    "spectral_density",
    "ConditioningWarning",
    "HybridPropagator",
    "SimConfig",
    "SolverError",
    "TimeSeries",
    "feedback_generator",
    "kernel_superop",
    "lindblad_propagate",
    "propagate_hybrid",
    "SweepAxis",
    "SweepResult",
    "average_fidelity_sphere",
    "fidelity_pure",
    "fidelity_uhlmann",
    "pair_average_fidelity",
    "purity",
    "sweep",
    "unknown_state_average",
    "TrajectoryEstimate",
    "exact_dephasing",
    "mc_trajectories",
    "DensityReport",
    "bloch_to_density",
    "density_to_bloch",
    "devectorize",
    "expm",
    "left_mult_superop",
    "right_mult_superop",
    "validate_density",
    "vectorize",
    "FeedbackScheme",
    "MeasurementPair",
    "SchemeError",
    "do_nothing_scheme",
    "lindblad_ops",
    "mixed_protection_scheme",
    "nonorthogonal_pair",
    "pair_protection_scheme",
    "preparation_scheme",
    "weak_x_measurement",
    "weak_z_measurement",
    "y_rotation",
    "z_rotation",
]
