from .analysis import asymptotic_report, calibrate_t0, fit_enhancement, run_sweep, two_band_prediction
from .checks import run_checks
from .fermi_operator import (
    channel_matrix,
    fermi_min_eigenvalue,
    intra_band_minimum,
    perturbation_constants,
    trace_check,
    v_coefficient,
    v_min_two_band,
)
from .gap import (
    GapSolution,
    euler_lagrange_residual,
    free_energy_density,
    gap_critical_temperature,
    interaction_energy,
    solve_gap,
)
from .kernels import RadialGrid, angular_average, build_grid, channel_kernel, kt_symbol
from .spectral import (
    ChannelOperator,
    assemble_operator,
    critical_temperature,
    kappa_response,
    kappa_thresholds,
    min_eigenvalue,
    singular_split_norm,
)


__all__ = [
    "ChannelOperator",
    "GapSolution",
    "RadialGrid",
    "angular_average",
    "assemble_operator",
    "asymptotic_report",
    "build_grid",
    "calibrate_t0",
    "channel_kernel",
    "channel_matrix",
    "critical_temperature",
    "euler_lagrange_residual",
    "fermi_min_eigenvalue",
    "fit_enhancement",
    "free_energy_density",
    "gap_critical_temperature",
    "interaction_energy",
    "intra_band_minimum",
    "kappa_response",
    "kappa_thresholds",
    "kt_symbol",
    "min_eigenvalue",
    "perturbation_constants",
    "run_checks",
    "run_sweep",
    "singular_split_norm",
    "solve_gap",
    "trace_check",
    "two_band_prediction",
    "v_coefficient",
    "v_min_two_band",
]
