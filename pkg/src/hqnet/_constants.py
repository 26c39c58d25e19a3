"""Physical constants used across the package, in experiment-friendly units.

Everything is derived from scipy's CODATA tables so the numbers stay
consistent with each other; only the units are massaged (GHz/T, MHz/T, K/GHz)
to avoid carrying factors of h around.
"""

from scipy import constants as _sc

# Bohr magneton over Planck constant, GHz per tesla
MU_B_GHZ_PER_T = _sc.physical_constants["Bohr magneton"][0] / _sc.h / 1e9

# nuclear magneton over Planck constant, MHz per tesla
MU_N_MHZ_PER_T = _sc.physical_constants["nuclear magneton in MHz/T"][0]

# h/k_B expressed as kelvin per GHz of splitting
H_OVER_KB_K_PER_GHZ = _sc.h / _sc.k * 1e9

# mu_0 / 4 pi, T m^3 per (J/T)
MU0_OVER_4PI = _sc.mu_0 / (4.0 * _sc.pi)

MU_B_J_PER_T = _sc.physical_constants["Bohr magneton"][0]

SPEED_OF_LIGHT_M_PER_S = _sc.c

# Gaussian fwhm = FWHM_SIGMA * sigma
FWHM_SIGMA = 2.3548200450309493  # 2*sqrt(2*ln2)
