from pathlib import Path

import pytest

from multiband_bcs.models.physics import build_model, load_model
from multiband_bcs.settings import Settings, get_settings


CONFIGS = Path(__file__).resolve().parent.parent / 'configs'

FAST_SETTINGS = {
    'POINTS_PER_BAND': '64',
    'ANGULAR_ORDER': '32',
    'TC_MAX_CHANNEL': '1',
    'L_MAX': '4',
}


@pytest.fixture
def settings_mock(monkeypatch):
    """Переопределение get_settings через переменные окружения: грубые сетки для быстрых тестов."""
    for key, value in FAST_SETTINGS.items():
        monkeypatch.setenv(key, value)
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture
def fast_opts() -> Settings:
    return Settings(**FAST_SETTINGS)


@pytest.fixture
def model_factory():
    """Построение модели из словаря; по умолчанию одна зона с гауссовым притяжением в d = 3."""

    def _model(dimension: int = 3, bands=None, interactions=None, name: str = 'test'):
        return build_model(
            {
                'name': name,
                'dimension': dimension,
                'bands': bands or [{'mass': 1.0, 'mu': 1.0}],
                'interactions': (
                    interactions if interactions is not None else [{'pair': (1, 1), 'strength': -1.0, 'range': 1.0}]
                ),
            }
        )

    return _model


@pytest.fixture
def single_model():
    return load_model(CONFIGS / 'single.toml')


@pytest.fixture
def degenerate_model():
    return load_model(CONFIGS / 'degenerate.toml')


@pytest.fixture
def dominant_model():
    return load_model(CONFIGS / 'dominant.toml')


@pytest.fixture
def repulsive_model():
    return load_model(CONFIGS / 'repulsive.toml')


@pytest.fixture
def decoupled_model():
    return load_model(CONFIGS / 'decoupled.toml')


@pytest.fixture
def out_dir(tmp_path) -> Path:
    """Каталог для результатов запуска; удаляется pytest после теста."""
    path = tmp_path / 'out'
    path.mkdir()
    return path
