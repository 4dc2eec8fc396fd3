"""Reference particles used in the examples and scripts."""

from __future__ import annotations

from .constants import AMU
from .decoherence import BeamGeometry
from .emission import ParticleModel

# ultrafine carbonaceous aerosol: 1e5 amu, mass absorption 7.5e3 m^2/kg
AEROSOL_AREA = 5e-18
AEROSOL_HEAT_CAPACITY_KB = 12000.0
AEROSOL_MASS = 1e5 * AMU

# virus-sized particle: 5e7 amu with the same mass absorption, A = 4 sigma_abs
MASS_ABSORPTION = 7.5e3
VIRUS_MASS = 5e7 * AMU
VIRUS_AREA = 4 * VIRUS_MASS * MASS_ABSORPTION


def aerosol(temperature: float = 1000.0, heat_capacity_kb: float = AEROSOL_HEAT_CAPACITY_KB) -> ParticleModel:
    return ParticleModel.from_kb(AEROSOL_AREA, heat_capacity_kb, AEROSOL_MASS, temperature)


def virus(temperature: float = 40.0, heat_capacity_kb: float = float("inf")) -> ParticleModel:
    return ParticleModel.from_kb(VIRUS_AREA, heat_capacity_kb, VIRUS_MASS, temperature)


def double_slit(particle: ParticleModel, slit_separation: float, time_of_flight: float = 1e-3,
                flight_distance: float = 1.0, coherence_slit_distance: float | None = None) -> BeamGeometry:
    """Layout flown in ``time_of_flight``; only the flight time matters for the visibility."""
    return BeamGeometry(slit_separation, flight_distance, flight_distance / time_of_flight,
                        particle.mass, coherence_slit_distance)
