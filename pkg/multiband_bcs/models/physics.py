from __future__ import annotations

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError
from scipy.special import gamma

from multiband_bcs.exceptions import (
    AsymmetricInteraction,
    ConfigNotReadable,
    InvalidBandParameter,
    InvalidDimension,
    InvalidPotentialRange,
    UnknownBand,
    UnknownPotentialFamily,
)
from multiband_bcs.schemas.models import BandConfig, InteractionConfig, ModelConfig, PotentialFamily

from .base import BasePhysicalModel


logger = logging.getLogger(__name__)

DIMENSIONS = (1, 2, 3)


def sphere_area(d: int) -> float:
    """|S^{d-1}|: 2, 2π, 4π for d = 1, 2, 3"""
    return 2.0 * np.pi ** (d / 2) / gamma(d / 2)


class BandDispersion(BasePhysicalModel):
    mass: float
    chemical_potential: float

    @property
    def fermi_momentum(self) -> float:
        return float(np.sqrt(2.0 * self.mass * self.chemical_potential))

    @property
    def fermi_velocity(self) -> float:
        """|∇ε| on the Fermi sphere"""
        return self.fermi_momentum / self.mass


class RadialPotential(BasePhysicalModel):
    family: PotentialFamily = PotentialFamily.GAUSSIAN
    strength: float = 0.0
    range: float = 1.0

    @property
    def is_zero(self) -> bool:
        return self.strength == 0.0

    def scaled(self, factor: float) -> RadialPotential:
        return self.update(strength=self.strength * factor)


ZERO_POTENTIAL = RadialPotential()


class InteractionMatrix(BasePhysicalModel):
    entries: tuple[tuple[RadialPotential, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, pair: tuple[int, int]) -> RadialPotential:
        a, b = pair
        return self.entries[a][b]

    def scaled(self, lam: float, kappa: float) -> InteractionMatrix:
        """λ V^d + κλ V^od"""
        return InteractionMatrix(
            entries=tuple(
                tuple(pot.scaled(lam if a == b else kappa * lam) for b, pot in enumerate(row))
                for a, row in enumerate(self.entries)
            )
        )

    def diagonal(self) -> InteractionMatrix:
        return self.scaled(1.0, 0.0)

    def off_diagonal(self) -> InteractionMatrix:
        return InteractionMatrix(
            entries=tuple(
                tuple(ZERO_POTENTIAL if a == b else pot for b, pot in enumerate(row))
                for a, row in enumerate(self.entries)
            )
        )

    @property
    def is_decoupled(self) -> bool:
        return all(self[a, b].is_zero for a in range(self.n) for b in range(self.n) if a != b)


class ModelInstance(BasePhysicalModel):
    dimension: int
    bands: tuple[BandDispersion, ...]
    interactions: InteractionMatrix
    name: str | None = None

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    @cached_property
    def max_mu(self) -> float:
        return max(band.chemical_potential for band in self.bands)

    @cached_property
    def max_fermi_momentum(self) -> float:
        return max(band.fermi_momentum for band in self.bands)

    def coercivity_constants(self) -> tuple[float, float]:
        """(c, C) with ε_a(p) ≥ c p² − C for every band"""
        return 1.0 / (2.0 * max(band.mass for band in self.bands)), self.max_mu

    def with_interactions(self, interactions: InteractionMatrix) -> ModelInstance:
        return ModelInstance(dimension=self.dimension, bands=self.bands, interactions=interactions, name=self.name)

    def scaled(self, lam: float, kappa: float) -> ModelInstance:
        return self.with_interactions(self.interactions.scaled(lam, kappa))

    def to_config(self) -> ModelConfig:
        interactions = [
            InteractionConfig(pair=(a + 1, b + 1), family=pot.family.value, strength=pot.strength, range=pot.range)
            for a in range(self.n_bands)
            for b in range(a, self.n_bands)
            if not (pot := self.interactions[a, b]).is_zero
        ]
        return ModelConfig(
            name=self.name,
            dimension=self.dimension,
            bands=[BandConfig(mass=band.mass, mu=band.chemical_potential) for band in self.bands],
            interactions=interactions,
        )


def _potential(item: InteractionConfig) -> RadialPotential:
    try:
        family = PotentialFamily(item.family)
    except ValueError:
        raise UnknownPotentialFamily(item.family)
    if not item.range > 0 or not np.isfinite(item.range):
        raise InvalidPotentialRange(item.pair, item.range)
    return RadialPotential.create(family=family, strength=item.strength, range=item.range)


def build_model(config: ModelConfig | dict) -> ModelInstance:
    """Validate a declarative description and build the model.

    Pairs are 1-based. A pair given only once is mirrored, pairs never given are zero potentials.
    """
    if isinstance(config, dict):
        try:
            config = ModelConfig.model_validate(config)
        except ValidationError as e:
            raise ConfigNotReadable(str(config.get("name")), "; ".join(err["msg"] for err in e.errors()))
    if config.dimension not in DIMENSIONS:
        raise InvalidDimension(config.dimension)
    if not config.bands:
        raise InvalidBandParameter(0, "n_bands", 0)
    bands = []
    for index, band in enumerate(config.bands, start=1):
        for name, value in (("mass", band.mass), ("mu", band.mu)):
            if not value > 0 or not np.isfinite(value):
                raise InvalidBandParameter(index, name, value)
        bands.append(BandDispersion.create(mass=band.mass, chemical_potential=band.mu))

    n = len(bands)
    given: dict[tuple[int, int], RadialPotential] = {}
    for item in config.interactions:
        a, b = item.pair
        if max(a, b) > n:
            raise UnknownBand(item.pair, n)
        potential = _potential(item)
        for key in ((a - 1, b - 1), (b - 1, a - 1)):
            if key in given and given[key] != potential:
                raise AsymmetricInteraction(item.pair)
        given[(a - 1, b - 1)] = potential
    entries = tuple(
        tuple(given.get((a, b), given.get((b, a), ZERO_POTENTIAL)) for b in range(n)) for a in range(n)
    )
    model = ModelInstance.create(
        dimension=config.dimension,
        bands=tuple(bands),
        interactions=InteractionMatrix(entries=entries),
        name=config.name,
    )
    for a in range(n):
        for b in range(n):
            if not np.isfinite(second_moment(model.interactions[a, b], model.dimension)):
                raise InvalidPotentialRange((a + 1, b + 1), model.interactions[a, b].range)
    logger.debug(f"Built model {model.name!r}: d={model.dimension}, n={n}")
    return model


def load_model(path: str | Path) -> ModelInstance:
    """Read a TOML model file; the file stem names the model when no name is given"""
    path = Path(path)
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigNotReadable(str(path), str(e))
    data.setdefault("name", path.stem)
    try:
        config = ModelConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigNotReadable(str(path), "; ".join(err["msg"] for err in e.errors()))
    return build_model(config)


def dispersion_eval(band: BandDispersion, p: ArrayLike) -> np.ndarray | float:
    """ε(p) = p²/(2m) − μ"""
    return np.square(p) / (2.0 * band.mass) - band.chemical_potential


def potential_value(pot: RadialPotential, r: ArrayLike) -> np.ndarray | float:
    """V(x) at |x| = r"""
    r = np.asarray(r, dtype=float)
    match pot.family:
        case PotentialFamily.GAUSSIAN:
            return pot.strength * np.exp(-0.5 * (r / pot.range) ** 2)
        case PotentialFamily.EXPONENTIAL:
            return pot.strength * np.exp(-r / pot.range)


def potential_fourier(pot: RadialPotential, d: int, r: ArrayLike) -> np.ndarray | float:
    """V̂(r) with the (2π)^{-d/2} convention"""
    r = np.asarray(r, dtype=float)
    s = pot.range
    match pot.family:
        case PotentialFamily.GAUSSIAN:
            return pot.strength * s**d * np.exp(-0.5 * (s * r) ** 2)
        case PotentialFamily.EXPONENTIAL:
            norm = (2.0 * np.pi) ** (-d / 2) * gamma((d + 1) / 2) * np.pi ** ((d - 1) / 2) * 2.0**d * s**d
            return pot.strength * norm / (1.0 + (s * r) ** 2) ** ((d + 1) / 2)


def l1_norm(pot: RadialPotential, d: int) -> float:
    """∫ |V(x)| dx"""
    s = pot.range
    match pot.family:
        case PotentialFamily.GAUSSIAN:
            radial = s**d * 2.0 ** (d / 2 - 1) * gamma(d / 2)
        case PotentialFamily.EXPONENTIAL:
            radial = s**d * gamma(d)
    return abs(pot.strength) * sphere_area(d) * radial


def second_moment(pot: RadialPotential, d: int) -> float:
    """∫ |V(x)| |x|² dx"""
    s = pot.range
    match pot.family:
        case PotentialFamily.GAUSSIAN:
            radial = s ** (d + 2) * 2.0 ** (d / 2) * gamma(d / 2 + 1)
        case PotentialFamily.EXPONENTIAL:
            radial = s ** (d + 2) * gamma(d + 2)
    return abs(pot.strength) * sphere_area(d) * radial


def cross_moment_bound(model: ModelInstance) -> float:
    """Upper bound of max ∬ |V_ab(x)| |x − y|² |V_a'b'(y)| dx dy over all pairs of entries"""
    d = model.dimension
    pots = [pot for row in model.interactions.entries for pot in row]
    return max(
        2.0 * (second_moment(u, d) * l1_norm(v, d) + l1_norm(u, d) * second_moment(v, d)) for u in pots for v in pots
    )
