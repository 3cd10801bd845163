from .base import Base, StatusResponseModel
from .models import *


__all__ = [
    "Base",
    "StatusResponseModel",
    "AsymptoticReport",
    "BandConfig",
    "BandMinimum",
    "CheckResult",
    "ConstantsReport",
    "EnhancementFit",
    "Event",
    "FitBranch",
    "GapSummary",
    "InteractionConfig",
    "KappaThresholds",
    "ModelConfig",
    "PerturbationConstants",
    "PotentialFamily",
    "RunConfig",
    "RunSummary",
    "SweepRecord",
    "TcResult",
    "TcResultList",
    "ThresholdStatus",
    "TwoBandPoint",
    "Verdict",
    "VerdictStatus",
]
