"""Continuous-variable teleportation of single-photon polarization qubits."""

from .closed_forms import (
    f_average,
    clone_excess,
    f_clone,
    f_clone_bounds,
    f_one,
    joint_p,
    mean_photon_numbers,
    p0,
    p1,
    total_P,
)
from .fock import (
    TruncationConfig,
    TruncationError,
    apply_operator,
    displaced_fock_amplitude,
    displacement_operator,
    inner_product,
)
from .quadrature import (
    ConvergenceError,
    DistributionResult,
    QuadratureGrid,
    default_grid,
    numeric_fidelities,
    numeric_joint_distribution,
    numeric_single_mode_distribution,
)
from .transfer import (
    MeasurementOutcome,
    PolarizationQubit,
    conditional_output,
    measurement_density,
    single_mode_transfer,
)

__version__ = "0.1.0"
