from .base import BasePhysicalModel
from .physics import (
    BandDispersion,
    InteractionMatrix,
    ModelInstance,
    RadialPotential,
    build_model,
    dispersion_eval,
    load_model,
    potential_fourier,
    potential_value,
    second_moment,
    sphere_area,
)


__all__ = [
    "BasePhysicalModel",
    "BandDispersion",
    "InteractionMatrix",
    "ModelInstance",
    "RadialPotential",
    "build_model",
    "dispersion_eval",
    "load_model",
    "potential_fourier",
    "potential_value",
    "second_moment",
    "sphere_area",
]
