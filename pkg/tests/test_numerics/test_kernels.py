import logging

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import eval_legendre

from multiband_bcs.exceptions import GridDegenerate, InvalidChannel, InvalidDimension, InvalidGridSpec
from multiband_bcs.models.physics import potential_fourier
from multiband_bcs.numerics.kernels import (
    angular_average,
    build_grid,
    channel_kernel,
    degeneracy,
    inverse_symbol_integral,
    kernel_block,
    kt_symbol,
    valid_channels,
)


logger = logging.getLogger(__name__)


def sphere_average(d: int, y: float) -> float:
    if d == 1:
        return 0.5 * (np.cos(y) + np.cos(-y))
    if d == 2:
        return quad(lambda theta: np.cos(y * np.cos(theta)), 0.0, np.pi, epsabs=1e-14, limit=200)[0] / np.pi
    return 0.5 * quad(lambda t: np.cos(y * t), -1.0, 1.0, epsabs=1e-14, limit=200)[0]


@pytest.mark.parametrize('d', [1, 2, 3])
@pytest.mark.parametrize('y', [0.0, 0.1, 1.0, 10.0])
def test_angular_average(d, y):
    assert float(angular_average(d, y)) == pytest.approx(sphere_average(d, y), abs=1e-10)
    assert float(angular_average(d, -y)) == pytest.approx(float(angular_average(d, y)), abs=1e-15)


@pytest.mark.parametrize('d,expected', [(3, 0.0), (1, -1.0)])
def test_angular_average_at_pi(d, expected):
    assert float(angular_average(d, np.pi)) == pytest.approx(expected, abs=1e-12)


def test_angular_average_dimension():
    with pytest.raises(InvalidDimension):
        angular_average(4, 1.0)


def test_kt_symbol(single_model):
    band = single_model.bands[0]
    T = 0.1
    assert float(kt_symbol(band, band.fermi_momentum, T)) == pytest.approx(0.2, rel=1e-12)
    # ε = 2T
    p = np.sqrt(2.0 * band.mass * (band.chemical_potential + 2.0 * T))
    assert float(kt_symbol(band, p, T)) == pytest.approx(2.0 * T / np.tanh(1.0), rel=1e-12)
    # ε = 100T
    p = np.sqrt(2.0 * band.mass * (band.chemical_potential + 100.0 * T))
    assert float(kt_symbol(band, p, T)) == pytest.approx(100.0 * T, rel=1e-8)


def test_kt_symbol_bounds_and_monotone_in_t(single_model):
    band = single_model.bands[0]
    p = np.linspace(0.0, 5.0, 401)
    epsilon = np.abs(p**2 / (2.0 * band.mass) - band.chemical_potential)
    previous = np.zeros_like(p)
    for T in (1e-3, 1e-2, 0.1, 1.0):
        values = kt_symbol(band, p, T)
        assert np.all(values >= np.maximum(epsilon, 2.0 * T) * (1.0 - 1e-14))
        assert np.all(values >= previous)
        previous = values


@pytest.mark.parametrize('ell,d,expected', [(0, 3, 1), (2, 3, 5), (0, 2, 1), (3, 2, 2), (1, 1, 1)])
def test_degeneracy(ell, d, expected):
    assert degeneracy(ell, d) == expected


def test_one_dimension_has_two_channels(single_model):
    assert list(valid_channels(1, 16)) == [0, 1]
    with pytest.raises(InvalidChannel):
        degeneracy(2, 1)
    with pytest.raises(InvalidChannel):
        degeneracy(-1, 3)


def kernel_oracle(model, pair, ell, p, q):
    d = model.dimension
    pot = model.interactions[pair]

    def value(t):
        return float(potential_fourier(pot, d, np.sqrt(max(p * p + q * q - 2.0 * p * q * t, 0.0))))

    if d == 1:
        return 0.5 * (value(1.0) + (-1.0) ** ell * value(-1.0))
    if d == 2:
        return quad(lambda theta: value(np.cos(theta)) * np.cos(ell * theta), 0.0, np.pi, limit=200)[0] / np.pi
    return 0.5 * quad(lambda t: value(t) * eval_legendre(ell, t), -1.0, 1.0, limit=200)[0]


@pytest.mark.parametrize('d', [1, 2, 3])
@pytest.mark.parametrize('family', ['gaussian', 'exponential'])
def test_channel_kernel_oracle(model_factory, d, family):
    model = model_factory(dimension=d, interactions=[{'pair': (1, 1), 'family': family, 'strength': -1.0}])
    k = model.bands[0].fermi_momentum
    scale = abs(float(potential_fourier(model.interactions[0, 0], d, 0.0)))
    for ell in valid_channels(d, 4):
        for p, q in ((k, k), (0.5 * k, 1.7 * k)):
            numeric = float(channel_kernel(model, (0, 0), ell, p, q))
            assert numeric == pytest.approx(kernel_oracle(model, (0, 0), ell, p, q), abs=1e-8 * scale)


def test_channel_kernel_symmetry(model_factory):
    model = model_factory(
        bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 2.0, 'mu': 0.5}],
        interactions=[{'pair': (1, 2), 'strength': 0.4, 'range': 0.7}],
    )
    p, q = np.array([0.3, 1.1, 2.0]), np.array([0.5, 1.4])
    forward = kernel_block(model, (0, 1), 2, p, q)
    backward = kernel_block(model, (1, 0), 2, q, p)
    assert forward.shape == (3, 2)
    assert np.allclose(forward, backward.T, rtol=1e-13, atol=0.0)
    assert np.all(kernel_block(model, (0, 0), 0, p, q) == 0.0)


def test_channel_kernel_decays_for_gaussian(single_model):
    k = single_model.bands[0].fermi_momentum
    values = [abs(float(channel_kernel(single_model, (0, 0), ell, k, k))) for ell in range(8)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[2:]))


@pytest.mark.parametrize('d', [1, 2, 3])
def test_grid_measure(model_factory, d):
    model = model_factory(dimension=d, bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 0.5, 'mu': 0.3}])
    grid = build_grid(model, 0.01)
    for a in range(model.n_bands):
        nodes, weights = grid.band_nodes[a], grid.band_weights[a]
        assert np.all((nodes > 0) & (nodes < grid.uv_cutoff))
        assert np.all(weights > 0)
        assert weights.sum() == pytest.approx(grid.uv_cutoff**d / d, rel=1e-10)
    assert grid.size == len(grid.nodes) == len(grid.weights) == len(grid.band_index)
    assert grid.uv_cutoff == pytest.approx(8.0 * model.max_fermi_momentum)


def test_grid_clusters_at_fermi_surface(single_model):
    band = single_model.bands[0]
    grid = build_grid(single_model, 1e-4)
    distance = np.min(np.abs(grid.band_nodes[0] - band.fermi_momentum))
    assert distance < 1e-4 / band.fermi_velocity


@pytest.mark.parametrize('T', [0.05, 0.01])
def test_inverse_symbol_integral(single_model, T):
    band = single_model.bands[0]
    grid = build_grid(single_model, T)
    exact, _ = quad(
        lambda p: p**2 / float(kt_symbol(band, p, T)),
        0.0,
        grid.uv_cutoff,
        points=[band.fermi_momentum],
        limit=500,
        epsabs=0.0,
        epsrel=1e-12,
    )
    assert inverse_symbol_integral(single_model, grid, 0, T) == pytest.approx(exact, rel=1e-6)


def test_inverse_symbol_integral_refines(single_model):
    band = single_model.bands[0]
    T = 0.01
    exact, _ = quad(
        lambda p: p**2 / float(kt_symbol(band, p, T)),
        0.0,
        8.0 * band.fermi_momentum,
        points=[band.fermi_momentum],
        limit=500,
        epsabs=0.0,
        epsrel=1e-13,
    )
    errors = [
        abs(inverse_symbol_integral(single_model, build_grid(single_model, T, points_per_band=n), 0, T) - exact)
        for n in (32, 64, 128)
    ]
    assert errors[1] <= errors[0] and errors[2] <= errors[1] + 1e-12 * exact


@pytest.mark.parametrize('points,T,error', [(8, 0.01, InvalidGridSpec), (128, 0.0, InvalidGridSpec)])
def test_grid_spec_rejected(single_model, points, T, error):
    with pytest.raises(error):
        build_grid(single_model, T, points_per_band=points)


def test_grid_degenerates_above_band_scale(single_model):
    with pytest.raises(GridDegenerate):
        build_grid(single_model, 10.0)
