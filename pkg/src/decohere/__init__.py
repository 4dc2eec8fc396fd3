"""Thermal decoherence of hot mesoscopic particles in far-field matter-wave interference."""

__version__ = "0.1.0"

from .decoherence import (  # noqa: E402
    BeamGeometry,
    DecoherenceFunction,
    DecoherenceKernel,
    DecoherenceTime,
    build_kernel,
    decoherence_time_closed,
    decoherence_time_inverted,
    decoherence_time_quadrature,
    decoherence_time_smallx,
    invert_for_temperature,
    scaling_function,
    visibility_general,
    visibility_thermal,
)
from .emission import (  # noqa: E402
    CoolingTrajectory,
    EmissionModel,
    ParticleModel,
    analytic_cooling,
    cool,
    spectral_rate,
    total_rate,
)
from .montecarlo import estimate_visibility, simulate_trajectory  # noqa: E402

__all__ = [
    "BeamGeometry", "CoolingTrajectory", "DecoherenceFunction", "DecoherenceKernel", "DecoherenceTime",
    "EmissionModel", "ParticleModel", "analytic_cooling", "build_kernel", "cool", "decoherence_time_closed",
    "decoherence_time_inverted", "decoherence_time_quadrature", "decoherence_time_smallx",
    "estimate_visibility", "invert_for_temperature", "scaling_function", "simulate_trajectory",
    "spectral_rate", "total_rate", "visibility_general", "visibility_thermal",
]
