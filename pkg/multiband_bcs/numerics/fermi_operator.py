"""Fermi-surface operator in angular-momentum channels and the perturbation constants built from it.

Band indices are 0-based here; reported band numbers in PerturbationConstants are 1-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigvalsh
from scipy.special import roots_legendre

from multiband_bcs.exceptions import BandCountMismatch, NoAttraction
from multiband_bcs.models.physics import ModelInstance, potential_fourier, potential_value, sphere_area
from multiband_bcs.schemas.models import PerturbationConstants
from multiband_bcs.settings import Settings, get_settings

from .kernels import angular_average, channel_kernel, degeneracy, valid_channels


logger = logging.getLogger(__name__)

RADIAL_EXTENT = 40.0  # v_coefficient integrates V over |x| ≤ RADIAL_EXTENT·range
RADIAL_ORDER = 16


@dataclass(frozen=True)
class ChannelSpectrum:
    ell: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def v_coefficient(model: ModelInstance, a: int, b: int) -> float:
    """𝔳_ab, the s-wave Fermi-surface matrix element of V_ab from its real-space form"""
    pot = model.interactions[a, b]
    if pot.is_zero:
        return 0.0
    d = model.dimension
    band_a, band_b = model.bands[a], model.bands[b]
    k_a, k_b = band_a.fermi_momentum, band_b.fermi_momentum

    extent = RADIAL_EXTENT * pot.range
    width = min(0.25 * pot.range, 1.0 / max(k_a, k_b))
    edges = np.linspace(0.0, extent, int(np.ceil(extent / width)) + 1)
    x, w = roots_legendre(RADIAL_ORDER)
    half = 0.5 * np.diff(edges)[:, None]
    r = (edges[:-1, None] + half * (x + 1.0)).ravel()
    w = (half * w).ravel()
    integrand = potential_value(pot, r) * angular_average(d, k_a * r) * angular_average(d, k_b * r) * r ** (d - 1)
    integral = sphere_area(d) * float(np.sum(w * integrand))

    prefactor = (
        sphere_area(d)
        * (2.0 * np.pi) ** (-d)
        * (4.0 * band_a.mass * band_b.mass) ** (d / 4)
        * (band_a.chemical_potential * band_b.chemical_potential) ** ((d - 2) / 4)
    )
    return prefactor * integral


def channel_matrix(model: ModelInstance, ell: int, opts: Settings | None = None) -> np.ndarray:
    """n×n matrix of 𝒱 between the normalized channel-ell harmonics on the Fermi spheres"""
    d = model.dimension
    n = model.n_bands
    k = np.array([band.fermi_momentum for band in model.bands])
    v = np.array([band.fermi_velocity for band in model.bands])
    prefactor = 2.0 * (2.0 * np.pi) ** (-d / 2) * sphere_area(d)
    matrix = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            value = channel_kernel(model, (a, b), ell, k[a], k[b], opts)
            matrix[a, b] = matrix[b, a] = prefactor * (k[a] * k[b]) ** ((d - 1) / 2) / np.sqrt(v[a] * v[b]) * value
    return matrix


def split_matrix(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal parts over bands"""
    diagonal = np.diag(np.diag(matrix))
    return diagonal, matrix - diagonal


def channel_spectrum(model: ModelInstance, ell: int, opts: Settings | None = None) -> ChannelSpectrum:
    matrix = channel_matrix(model, ell, opts)
    eigenvalues, eigenvectors = eigh(matrix)
    return ChannelSpectrum(ell=ell, matrix=matrix, eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def channel_values(model: ModelInstance, a: int, ell_max: int, opts: Settings | None = None) -> np.ndarray:
    """e_a(ell) for ell = 0..ell_max (valid channels only)"""
    d = model.dimension
    band = model.bands[a]
    prefactor = 2.0 * (2.0 * np.pi) ** (-d / 2) * sphere_area(d) * band.fermi_momentum ** (d - 1) / band.fermi_velocity
    k = band.fermi_momentum
    return np.array([prefactor * channel_kernel(model, (a, a), ell, k, k, opts) for ell in valid_channels(d, ell_max)])


def intra_band_minimum(
    model: ModelInstance, a: int, ell_max: int | None = None, opts: Settings | None = None
) -> tuple[float, int]:
    """(𝔢_a, argmin ell) over channels up to ell_max"""
    opts = opts or get_settings()
    ell_max = opts.L_MAX if ell_max is None else ell_max
    values = channel_values(model, a, ell_max, opts)
    ell = int(np.argmin(values))
    return float(values[ell]), ell


def trace_check(
    model: ModelInstance, a: int, ell_max: int | None = None, opts: Settings | None = None
) -> tuple[float, float]:
    """Degeneracy-weighted channel sum of 𝒱_aa against its closed-form trace"""
    opts = opts or get_settings()
    ell_max = opts.TRACE_L_MAX if ell_max is None else ell_max
    d = model.dimension
    values = channel_values(model, a, ell_max, opts)
    numeric = sum(degeneracy(ell, d) * value for ell, value in enumerate(values))

    band = model.bands[a]
    v0 = float(potential_fourier(model.interactions[a, a], d, 0.0))
    density = sphere_area(d) * band.fermi_momentum ** (d - 1) / band.fermi_velocity
    analytic = 2.0 * (2.0 * np.pi) ** (-d / 2) * v0 * density
    return float(numeric), analytic


def fermi_min_eigenvalue(model: ModelInstance, kappa: float, ell_max: int | None = None, opts: Settings | None = None):
    """min spec(𝒱^d + κ𝒱^od) over channels up to ell_max"""
    opts = opts or get_settings()
    ell_max = opts.L_MAX if ell_max is None else ell_max
    lowest = np.inf
    for ell in valid_channels(model.dimension, ell_max):
        diagonal, off_diagonal = split_matrix(channel_matrix(model, ell, opts))
        lowest = min(lowest, eigvalsh(diagonal + kappa * off_diagonal, subset_by_index=[0, 0])[0])
    return float(lowest)


def perturbation_constants(
    model: ModelInstance, ell_max: int | None = None, opts: Settings | None = None
) -> PerturbationConstants:
    """First-order (degenerate minimum) or second-order (unique minimum) slopes of min spec(𝒱^d + κ𝒱^od)"""
    opts = opts or get_settings()
    ell_max = opts.L_MAX if ell_max is None else ell_max
    d = model.dimension
    channels = list(valid_channels(d, ell_max))
    matrices = [channel_matrix(model, ell, opts) for ell in channels]
    table = np.array([np.diag(m) for m in matrices])  # table[ell, a] = e_a(ell)

    minima = table.min(axis=0)
    e_hat = float(minima.min())
    if e_hat >= 0:
        raise NoAttraction(e_hat)
    cut = opts.DEGENERACY_TOL * abs(e_hat)
    minimizing = [a for a in range(model.n_bands) if abs(minima[a] - e_hat) <= cut]
    ground = {a: [ell for ell in channels if abs(table[ell, a] - e_hat) <= cut] for a in minimizing}
    logger.debug(f"e_hat={e_hat}, minimizing bands {minimizing}, ground channels {ground}")

    if len(minimizing) > 1:
        lowest, highest = 0.0, 0.0
        for ell in channels:
            members = [a for a in minimizing if ell in ground[a]]
            if len(members) < 2:
                continue
            _, coupling = split_matrix(matrices[ell][np.ix_(members, members)])
            eigenvalues = eigvalsh(coupling)
            lowest, highest = min(lowest, eigenvalues[0]), max(highest, eigenvalues[-1])
        u1_plus, u1_minus = max(0.0, -lowest), max(0.0, highest)
        return PerturbationConstants(
            e_hat=e_hat,
            minimizing_bands=[a + 1 for a in minimizing],
            ground_channels={a + 1: ground[a][0] for a in minimizing},
            degenerate=True,
            U1_plus=u1_plus,
            U1_minus=u1_minus,
            A1_plus=u1_plus / e_hat**2,
            A1_minus=u1_minus / e_hat**2,
        )

    a_hat = minimizing[0]
    # the ground channel with the largest second-order shift sets the slope
    others = [a for a in range(model.n_bands) if a != a_hat]
    shifts = {
        ell: sum(matrices[ell][a, a_hat] ** 2 / (matrices[ell][a, a] - e_hat) for a in others) for ell in ground[a_hat]
    }
    ell_hat = max(shifts, key=shifts.get)
    u2 = shifts[ell_hat]
    closed_form = None
    if ground[a_hat] == [0]:
        v = np.array([[v_coefficient(model, a, b) for b in range(model.n_bands)] for a in range(model.n_bands)])
        closed_form = sum(
            v[a, a_hat] ** 2 / (v[a_hat, a_hat] ** 2 * abs(v[a_hat, a_hat] - v[a, a]))
            for a in range(model.n_bands)
            if a != a_hat
        )
    return PerturbationConstants(
        e_hat=e_hat,
        minimizing_bands=[a_hat + 1],
        ground_channels={a_hat + 1: ell_hat},
        degenerate=False,
        U1_plus=0.0,
        U1_minus=0.0,
        U2=float(u2),
        A1_plus=0.0,
        A1_minus=0.0,
        A2=float(u2) / e_hat**2,
        A2_closed_form=None if closed_form is None else float(closed_form),
    )


def v_min_two_band(model: ModelInstance, kappa: float) -> float:
    """Closed-form lowest eigenvalue of the s-wave 2×2 matrix with off-diagonal scaled by κ"""
    if model.n_bands != 2:
        raise BandCountMismatch(2, model.n_bands)
    v11, v22, v12 = v_coefficient(model, 0, 0), v_coefficient(model, 1, 1), v_coefficient(model, 0, 1)
    return 0.5 * (v11 + v22) - float(np.sqrt((0.5 * (v11 - v22)) ** 2 + kappa**2 * v12**2))
