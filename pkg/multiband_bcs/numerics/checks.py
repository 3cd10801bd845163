"""Built-in invariant suite: every discretized quantity against an independent library routine"""

from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import quad
from scipy.special import eval_legendre

from multiband_bcs.models.physics import ModelInstance, potential_fourier, potential_value, sphere_area
from multiband_bcs.schemas.models import CheckResult
from multiband_bcs.settings import Settings, get_settings

from .fermi_operator import channel_matrix, trace_check, v_coefficient
from .kernels import angular_average, build_grid, channel_kernel, inverse_symbol_integral, kt_symbol
from .spectral import GRID_DESIGN_FACTOR, critical_temperature


logger = logging.getLogger(__name__)

TRACE_TOL = 1e-4
ANGULAR_AVERAGE_TOL = 1e-10
FOURIER_TOL = 1e-8
KERNEL_TOL = 1e-8
V_COEFFICIENT_TOL = 1e-6
SYMBOL_INTEGRAL_TOL = 1e-6
GRID_DOUBLING_TOL = 1e-4

SAMPLE_ARGUMENTS = (0.0, 0.3, 1.0, 2.5, 7.0, 20.0)
SAMPLE_CHANNELS = (0, 1, 2, 3)


def _result(name: str, error: float, tolerance: float, detail: str = "") -> CheckResult:
    passed = bool(error <= tolerance)
    return CheckResult(name=name, passed=passed, value=float(error), tolerance=tolerance, detail=detail)


def _average_oracle(d: int, y: float) -> float:
    if d == 1:
        return float(np.real(0.5 * (np.exp(1j * y) + np.exp(-1j * y))))
    if d == 2:
        return quad(lambda theta: np.cos(y * np.cos(theta)), 0.0, np.pi, limit=200, epsabs=1e-14)[0] / np.pi
    return 0.5 * quad(lambda t: np.cos(y * t), -1.0, 1.0, limit=200, epsabs=1e-14)[0]


def check_angular_average() -> CheckResult:
    error = max(
        abs(float(angular_average(d, y)) - _average_oracle(d, y)) for d in (1, 2, 3) for y in SAMPLE_ARGUMENTS
    )
    return _result("angular_average", error, ANGULAR_AVERAGE_TOL)


def check_fourier(model: ModelInstance) -> CheckResult:
    """V̂ in closed form against the radial Fourier integral of V"""
    d = model.dimension
    prefactor = (2.0 * np.pi) ** (-d / 2) * sphere_area(d)
    error = 0.0
    for pot in {pot for row in model.interactions.entries for pot in row if not pot.is_zero}:
        scale = abs(float(potential_fourier(pot, d, 0.0)))
        for k in (0.0, 0.5 / pot.range, 1.0 / pot.range, 2.0 / pot.range):
            integral, _ = quad(
                lambda r: float(potential_value(pot, r)) * float(angular_average(d, k * r)) * r ** (d - 1),
                0.0,
                60.0 * pot.range,
                limit=400,
                epsabs=1e-14,
            )
            error = max(error, abs(prefactor * integral - float(potential_fourier(pot, d, k))) / scale)
    return _result("fourier_transform", error, FOURIER_TOL)


def _kernel_oracle(model: ModelInstance, pair: tuple[int, int], ell: int, p: float, q: float) -> float:
    d = model.dimension
    pot = model.interactions[pair]

    def value(t: float) -> float:
        return float(potential_fourier(pot, d, np.sqrt(max(p * p + q * q - 2.0 * p * q * t, 0.0))))

    if d == 1:
        return 0.5 * (value(1.0) + (-1.0) ** ell * value(-1.0))
    if d == 2:
        return quad(lambda theta: value(np.cos(theta)) * np.cos(ell * theta), 0.0, np.pi, limit=200)[0] / np.pi
    return 0.5 * quad(lambda t: value(t) * eval_legendre(ell, t), -1.0, 1.0, limit=200)[0]


def check_channel_kernels(model: ModelInstance, opts: Settings) -> CheckResult:
    """Channel kernels on the Fermi spheres against adaptive angular quadrature"""
    d = model.dimension
    channels = SAMPLE_CHANNELS if d > 1 else (0, 1)
    k = [band.fermi_momentum for band in model.bands]
    error = 0.0
    for a in range(model.n_bands):
        for b in range(a, model.n_bands):
            pot = model.interactions[a, b]
            if pot.is_zero:
                continue
            scale = abs(float(potential_fourier(pot, d, 0.0)))
            for ell in channels:
                numeric = float(channel_kernel(model, (a, b), ell, k[a], k[b], opts))
                error = max(error, abs(numeric - _kernel_oracle(model, (a, b), ell, k[a], k[b])) / scale)
    return _result("channel_kernel", error, KERNEL_TOL)


def check_v_coefficients(model: ModelInstance, opts: Settings) -> CheckResult:
    """s-wave Fermi-surface matrix from momentum space against 𝔳_ab from real space"""
    matrix = channel_matrix(model, 0, opts)
    v = np.array([[v_coefficient(model, a, b) for b in range(model.n_bands)] for a in range(model.n_bands)])
    scale = max(float(np.max(np.abs(v))), np.finfo(float).tiny)
    return _result("v_coefficient", float(np.max(np.abs(matrix - v))) / scale, V_COEFFICIENT_TOL)


def check_trace(model: ModelInstance, opts: Settings) -> CheckResult:
    error, detail = 0.0, []
    for a in range(model.n_bands):
        if model.interactions[a, a].is_zero:
            continue
        numeric, analytic = trace_check(model, a, opts=opts)
        error = max(error, abs(numeric - analytic) / abs(analytic))
        detail.append(f"band {a + 1}: {numeric:.12g} vs {analytic:.12g}")
    return _result("trace_identity", error, TRACE_TOL, "; ".join(detail))


def check_symbol_integral(model: ModelInstance, opts: Settings) -> CheckResult:
    """∫ p^{d-1}/K_T on the grid against quad at the grid's design temperature"""
    d = model.dimension
    T = GRID_DESIGN_FACTOR * min(band.chemical_potential for band in model.bands)
    grid = build_grid(model, T, opts)
    error = 0.0
    for a, band in enumerate(model.bands):
        exact, _ = quad(
            lambda p: p ** (d - 1) / float(kt_symbol(band, p, T)),
            0.0,
            grid.uv_cutoff,
            points=[band.fermi_momentum],
            limit=500,
            epsabs=0.0,
            epsrel=1e-12,
        )
        error = max(error, abs(inverse_symbol_integral(model, grid, a, T) - exact) / exact)
    return _result("inverse_symbol_integral", error, SYMBOL_INTEGRAL_TOL, f"T={T}")


def check_grid_doubling(model: ModelInstance, opts: Settings, kappa: float = 0.0) -> CheckResult:
    """T_c at λ_ref on the default grid and on one with twice the points per band"""
    lam = opts.LAMBDA_REF
    fine = opts.model_copy(update={"POINTS_PER_BAND": 2 * opts.POINTS_PER_BAND})
    coarse_tc = critical_temperature(model, lam, kappa, opts)
    fine_tc = critical_temperature(model, lam, kappa, fine)
    detail = f"lambda={lam}, kappa={kappa}: {coarse_tc.tc} vs {fine_tc.tc}"
    if not coarse_tc.found and not fine_tc.found:
        return _result("grid_doubling", 0.0, GRID_DOUBLING_TOL, f"no T_c at either resolution, {detail}")
    if coarse_tc.found != fine_tc.found:
        return _result("grid_doubling", np.inf, GRID_DOUBLING_TOL, detail)
    return _result("grid_doubling", abs(coarse_tc.tc / fine_tc.tc - 1.0), GRID_DOUBLING_TOL, detail)


def run_checks(model: ModelInstance, opts: Settings | None = None, *, with_tc: bool = True) -> list[CheckResult]:
    opts = opts or get_settings()
    results = [
        check_angular_average(),
        check_fourier(model),
        check_channel_kernels(model, opts),
        check_v_coefficients(model, opts),
        check_trace(model, opts),
        check_symbol_integral(model, opts),
    ]
    if with_tc:
        results.append(check_grid_doubling(model, opts))
    for result in results:
        log = logger.info if result.passed else logger.warning
        outcome = "passed" if result.passed else "FAILED"
        log(f"Check {result.name}: {outcome} ({result.value:.3g} vs tolerance {result.tolerance:g})")
    return results
