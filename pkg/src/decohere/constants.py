"""Physical constants in SI units (CODATA values via scipy)."""

from scipy import constants as _c

HBAR = _c.hbar
KB = _c.k
C = _c.c
AMU = _c.atomic_mass

# hbar*c/k_B, the length-temperature product at which k_B T d / (hbar c) = 1
THERMAL_LENGTH_KELVIN = HBAR * C / KB
