import logging

import numpy as np
import pytest
from scipy.integrate import quad

from multiband_bcs.exceptions import (
    AsymmetricInteraction,
    ConfigNotReadable,
    InvalidBandParameter,
    InvalidDimension,
    InvalidPotentialRange,
    UnknownBand,
    UnknownPotentialFamily,
)
from multiband_bcs.models.physics import (
    RadialPotential,
    build_model,
    cross_moment_bound,
    dispersion_eval,
    l1_norm,
    load_model,
    potential_fourier,
    potential_value,
    second_moment,
    sphere_area,
)
from multiband_bcs.schemas.models import PotentialFamily


logger = logging.getLogger(__name__)


@pytest.mark.parametrize('d,area', [(1, 2.0), (2, 2.0 * np.pi), (3, 4.0 * np.pi)])
def test_sphere_area(d, area):
    assert sphere_area(d) == pytest.approx(area, rel=1e-14)


def test_band_fermi_surface(model_factory):
    model = model_factory(bands=[{'mass': 0.5, 'mu': 2.0}])
    band = model.bands[0]
    assert band.fermi_momentum == pytest.approx(np.sqrt(2.0))
    assert band.fermi_velocity == pytest.approx(2.0 * np.sqrt(2.0))
    assert dispersion_eval(band, band.fermi_momentum) == pytest.approx(0.0, abs=1e-15)
    assert dispersion_eval(band, 0.0) == -2.0


def test_missing_pair_is_zero_and_given_pair_is_mirrored(model_factory):
    model = model_factory(
        bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 1.0, 'mu': 0.5}],
        interactions=[{'pair': (1, 1), 'strength': -1.0}, {'pair': (2, 1), 'strength': 0.3, 'range': 0.5}],
    )
    assert model.interactions[1, 1].is_zero
    assert model.interactions[0, 1] == model.interactions[1, 0]
    assert model.interactions[0, 1].strength == 0.3
    assert not model.interactions.is_decoupled


def test_repeated_pair_must_agree(model_factory):
    bands = [{'mass': 1.0, 'mu': 1.0}, {'mass': 1.0, 'mu': 1.0}]
    same = [{'pair': (1, 2), 'strength': 0.3}, {'pair': (2, 1), 'strength': 0.3}]
    assert model_factory(bands=bands, interactions=same).interactions[0, 1].strength == 0.3
    with pytest.raises(AsymmetricInteraction):
        model_factory(bands=bands, interactions=[{'pair': (1, 2), 'strength': 0.3}, {'pair': (2, 1), 'strength': 0.4}])


@pytest.mark.parametrize(
    'dimension,bands,interactions,error',
    [
        (4, None, None, InvalidDimension),
        (3, [{'mass': -1.0, 'mu': 1.0}], None, InvalidBandParameter),
        (3, [{'mass': 1.0, 'mu': 0.0}], None, InvalidBandParameter),
        (3, None, [{'pair': (1, 2), 'strength': 1.0}], UnknownBand),
        (3, None, [{'pair': (1, 1), 'family': 'yukawa', 'strength': 1.0}], UnknownPotentialFamily),
        (3, None, [{'pair': (1, 1), 'strength': 1.0, 'range': 0.0}], InvalidPotentialRange),
        (3, None, [{'pair': (0, 1), 'strength': 1.0}], ConfigNotReadable),
    ],
)
def test_invalid_models(model_factory, dimension, bands, interactions, error):
    with pytest.raises(error) as exc_info:
        model_factory(dimension=dimension, bands=bands, interactions=interactions)
    assert exc_info.value.eng
    assert exc_info.value.ru


def test_load_model_names_after_file(tmp_path):
    path = tmp_path / 'two_band.toml'
    path.write_text(
        'dimension = 2\n'
        '[[bands]]\nmass = 1.0\nmu = 1.0\n'
        '[[bands]]\nmass = 2.0\nmu = 0.5\n'
        '[[interactions]]\npair = [1, 2]\nfamily = "exponential"\nstrength = -0.5\nrange = 2.0\n'
    )
    model = load_model(path)
    assert model.name == 'two_band'
    assert model.n_bands == 2
    assert model.interactions[1, 0].family == PotentialFamily.EXPONENTIAL
    assert model.max_mu == 1.0


@pytest.mark.parametrize('text', ['dimension = [', 'dimension = 3\n', 'dimension = "three"\nbands = []\n'])
def test_load_model_unreadable(tmp_path, text):
    path = tmp_path / 'broken.toml'
    path.write_text(text)
    with pytest.raises(ConfigNotReadable):
        load_model(path)
    with pytest.raises(ConfigNotReadable):
        load_model(tmp_path / 'missing.toml')


def test_to_config_rebuilds_the_model(dominant_model):
    rebuilt = build_model(dominant_model.to_config())
    assert rebuilt.dimension == dominant_model.dimension
    assert rebuilt.bands == dominant_model.bands
    assert rebuilt.interactions == dominant_model.interactions


def test_scaled_interactions(degenerate_model):
    scaled = degenerate_model.scaled(0.3, -2.0)
    assert scaled.interactions[0, 0].strength == pytest.approx(-0.3)
    assert scaled.interactions[0, 1].strength == pytest.approx(0.5 * 0.3 * -2.0)
    assert degenerate_model.interactions.off_diagonal()[0, 0].is_zero
    assert degenerate_model.interactions.diagonal().is_decoupled


@pytest.mark.parametrize('family', [PotentialFamily.GAUSSIAN, PotentialFamily.EXPONENTIAL])
@pytest.mark.parametrize('d', [1, 2, 3])
def test_potential_moments(family, d):
    pot = RadialPotential(family=family, strength=-0.7, range=1.3)

    def radial(r, power):
        return abs(float(potential_value(pot, r))) * r ** (d - 1 + power)

    l1, _ = quad(radial, 0.0, np.inf, args=(0,))
    moment, _ = quad(radial, 0.0, np.inf, args=(2,))
    assert l1_norm(pot, d) == pytest.approx(sphere_area(d) * l1, rel=1e-8)
    assert second_moment(pot, d) == pytest.approx(sphere_area(d) * moment, rel=1e-8)


@pytest.mark.parametrize('d', [1, 2, 3])
def test_gaussian_fourier_at_zero(d):
    pot = RadialPotential(strength=2.0, range=0.5)
    assert float(potential_fourier(pot, d, 0.0)) == pytest.approx(2.0 * 0.5**d)
    # V̂(0) = (2π)^{-d/2} ∫ V
    assert float(potential_fourier(pot, d, 0.0)) == pytest.approx((2 * np.pi) ** (-d / 2) * l1_norm(pot, d))


def test_cross_moment_bound_is_finite(dominant_model, single_model):
    assert np.isfinite(cross_moment_bound(dominant_model))
    assert cross_moment_bound(dominant_model) >= cross_moment_bound(single_model)


def test_coercivity_constants(model_factory):
    model = model_factory(bands=[{'mass': 1.0, 'mu': 1.0}, {'mass': 2.5, 'mu': 0.4}])
    c, C = model.coercivity_constants()
    assert c == pytest.approx(0.2)
    p = np.linspace(0.0, 10.0, 101)
    for band in model.bands:
        assert np.all(dispersion_eval(band, p) >= c * p**2 - C)
