import logging

import numpy as np
import pytest
from scipy.linalg import eigvalsh

from multiband_bcs.exceptions import BandCountMismatch, NoAttraction
from multiband_bcs.numerics.fermi_operator import (
    channel_matrix,
    channel_spectrum,
    channel_values,
    fermi_min_eigenvalue,
    intra_band_minimum,
    perturbation_constants,
    split_matrix,
    trace_check,
    v_coefficient,
    v_min_two_band,
)


logger = logging.getLogger(__name__)


@pytest.mark.parametrize('d', [1, 2, 3])
@pytest.mark.parametrize('family', ['gaussian', 'exponential'])
def test_trace_identity(model_factory, d, family):
    model = model_factory(dimension=d, interactions=[{'pair': (1, 1), 'family': family, 'strength': -1.0}])
    numeric, analytic = trace_check(model, 0)
    assert numeric == pytest.approx(analytic, rel=1e-4)


@pytest.mark.parametrize('d', [1, 2, 3])
def test_s_wave_matrix_matches_real_space_coefficients(model_factory, d):
    model = model_factory(
        dimension=d,
        bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 1.5, 'mu': 0.6}],
        interactions=[
            {'pair': (1, 1), 'strength': -1.0},
            {'pair': (2, 2), 'family': 'exponential', 'strength': -0.5, 'range': 0.8},
            {'pair': (1, 2), 'strength': 0.3, 'range': 1.2},
        ],
    )
    v = np.array([[v_coefficient(model, a, b) for b in range(2)] for a in range(2)])
    assert np.allclose(channel_matrix(model, 0), v, rtol=1e-6, atol=1e-12)


def test_intra_band_minimum(single_model):
    e, ell = intra_band_minimum(single_model, 0)
    assert ell == 0
    assert e < 0
    assert e == pytest.approx(v_coefficient(single_model, 0, 0), rel=1e-6)
    assert e == pytest.approx(float(channel_values(single_model, 0, 4).min()))


def test_channel_spectrum_is_symmetric(dominant_model):
    spectrum = channel_spectrum(dominant_model, 1)
    assert np.allclose(spectrum.matrix, spectrum.matrix.T)
    assert np.allclose(spectrum.eigenvectors @ np.diag(spectrum.eigenvalues) @ spectrum.eigenvectors.T, spectrum.matrix)
    diagonal, off_diagonal = split_matrix(spectrum.matrix)
    assert np.all(np.diag(off_diagonal) == 0)
    assert np.allclose(diagonal + off_diagonal, spectrum.matrix)


def test_degenerate_constants(degenerate_model):
    constants = perturbation_constants(degenerate_model)
    v11 = v_coefficient(degenerate_model, 0, 0)
    v12 = v_coefficient(degenerate_model, 0, 1)
    assert constants.degenerate
    assert constants.minimizing_bands == [1, 2]
    assert constants.ground_channels == {1: 0, 2: 0}
    assert constants.A1_plus == pytest.approx(abs(v12) / v11**2, rel=1e-6)
    assert constants.A1_minus == pytest.approx(constants.A1_plus, rel=1e-10)
    assert constants.U2 is None


def test_degenerate_slopes_match_finite_differences(degenerate_model):
    constants = perturbation_constants(degenerate_model)
    h = 1e-4
    e0 = fermi_min_eigenvalue(degenerate_model, 0.0)
    assert (e0 - fermi_min_eigenvalue(degenerate_model, h)) / h == pytest.approx(constants.U1_plus, rel=1e-6)
    assert (e0 - fermi_min_eigenvalue(degenerate_model, -h)) / h == pytest.approx(constants.U1_minus, rel=1e-6)


def test_dominant_constants(dominant_model):
    constants = perturbation_constants(dominant_model)
    assert not constants.degenerate
    assert constants.minimizing_bands == [1]
    assert constants.U1_plus == constants.U1_minus == 0.0
    assert constants.U2 > 0
    assert constants.A2 == pytest.approx(constants.U2 / constants.e_hat**2)
    assert constants.A2_closed_form == pytest.approx(constants.A2, rel=1e-5)


def test_dominant_curvature_matches_finite_differences(dominant_model):
    constants = perturbation_constants(dominant_model)
    h = 1e-3
    e = [fermi_min_eigenvalue(dominant_model, kappa) for kappa in (-h, 0.0, h)]
    curvature = (e[0] - 2.0 * e[1] + e[2]) / h**2
    assert curvature == pytest.approx(-2.0 * constants.U2, rel=1e-4)
    assert e[1] == pytest.approx(constants.e_hat, rel=1e-12)


def test_no_attraction(repulsive_model):
    with pytest.raises(NoAttraction):
        perturbation_constants(repulsive_model)


@pytest.mark.parametrize('kappa', [0.0, 0.3, -1.5, 3.0])
def test_v_min_two_band(dominant_model, kappa):
    diagonal, off_diagonal = split_matrix(channel_matrix(dominant_model, 0))
    expected = eigvalsh(diagonal + kappa * off_diagonal)[0]
    assert v_min_two_band(dominant_model, kappa) == pytest.approx(expected, rel=1e-6)


def test_v_min_turns_negative_for_strong_repulsive_coupling(repulsive_model):
    assert v_min_two_band(repulsive_model, 0.0) > 0
    assert v_min_two_band(repulsive_model, 3.0) < 0
    assert v_min_two_band(repulsive_model, -3.0) < 0


def test_v_min_needs_two_bands(single_model):
    with pytest.raises(BandCountMismatch):
        v_min_two_band(single_model, 0.1)


def test_decoupled_constants_vanish(decoupled_model):
    constants = perturbation_constants(decoupled_model)
    assert not constants.degenerate
    assert constants.U1_plus == constants.U1_minus == 0.0
    assert constants.U2 == 0.0
    assert constants.A2 == 0.0
    assert constants.A2_closed_form == 0.0


@pytest.mark.parametrize('model_name,positive', [('dominant_model', True), ('decoupled_model', False)])
def test_quadratic_constant_needs_s_wave_coupling(request, model_name, positive):
    model = request.getfixturevalue(model_name)
    constants = perturbation_constants(model)
    a_hat = constants.minimizing_bands[0] - 1
    coupled = any(v_coefficient(model, a, a_hat) != 0.0 for a in range(model.n_bands) if a != a_hat)
    assert coupled == positive
    assert (constants.A2 > 0) == positive


@pytest.mark.parametrize('model_name', ['dominant_model', 'degenerate_model'])
@pytest.mark.parametrize('kappa', [0.1, 0.7, 2.0])
def test_two_band_minimum_is_even_in_kappa(request, model_name, kappa):
    model = request.getfixturevalue(model_name)
    assert fermi_min_eigenvalue(model, kappa) == pytest.approx(fermi_min_eigenvalue(model, -kappa), rel=1e-12)


@pytest.mark.parametrize('model_name', ['dominant_model', 'degenerate_model'])
def test_minimum_is_concave_with_maximum_at_zero(request, model_name):
    model = request.getfixturevalue(model_name)
    kappas = np.linspace(-2.0, 2.0, 17)
    values = np.array([fermi_min_eigenvalue(model, kappa) for kappa in kappas])
    top = fermi_min_eigenvalue(model, 0.0)
    assert np.all(values <= top + 1e-12 * abs(top))
    # equally spaced points: every value at least the mean of its neighbours
    assert np.all(values[1:-1] >= 0.5 * (values[:-2] + values[2:]) - 1e-12 * abs(top))


def test_intra_band_minimum_without_potential(model_factory):
    model = model_factory(
        bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 1.5, 'mu': 0.8}],
        interactions=[{'pair': (1, 1), 'strength': -1.0}],
    )
    e, _ = intra_band_minimum(model, 1)
    assert e == 0.0


@pytest.mark.parametrize('model_name', ['dominant_model', 'decoupled_model', 'repulsive_model'])
def test_intra_band_minimum_is_below_s_wave_value(request, model_name):
    model = request.getfixturevalue(model_name)
    for a in range(model.n_bands):
        e, _ = intra_band_minimum(model, a)
        s_wave = channel_values(model, a, 0)[0]
        assert e <= s_wave
        assert e <= v_coefficient(model, a, a) + 1e-6 * abs(s_wave)


# band 1 is the unique minimizer, with equal values in channels 0 and 1
GROUND_PAIR = {
    0: np.array([[-1.0, 0.1], [0.1, -0.5]]),
    1: np.array([[-1.0, 0.3], [0.3, -0.2]]),
    2: np.array([[0.1, 0.0], [0.0, 0.1]]),
}


def test_second_order_constant_takes_strongest_ground_channel(dominant_model, fast_opts, mocker):
    mocker.patch(
        'multiband_bcs.numerics.fermi_operator.channel_matrix',
        side_effect=lambda model, ell, opts=None: GROUND_PAIR[ell],
    )
    constants = perturbation_constants(dominant_model, ell_max=2, opts=fast_opts)
    assert not constants.degenerate
    assert constants.minimizing_bands == [1]
    assert constants.ground_channels == {1: 1}
    assert constants.U2 == pytest.approx(0.09 / 0.8)
    assert constants.A2_closed_form is None

    h = 1e-3
    e = [fermi_min_eigenvalue(dominant_model, kappa, 2, fast_opts) for kappa in (-h, 0.0, h)]
    assert (e[0] - 2.0 * e[1] + e[2]) / h**2 == pytest.approx(-2.0 * constants.U2, rel=1e-4)
