"""SI constants, used only at unit boundaries (module interiors are in rate units)."""

from scipy.constants import c, epsilon_0, hbar, k as k_boltzmann, eV
from scipy.constants import physical_constants as _pc

mu_bohr = _pc["Bohr magneton"][0]

# k_B T in eV for T in kelvin
K_B_EV = k_boltzmann / eV


def thermal_energy_ev(temperature_k):
    """k_B T in eV for a temperature in kelvin."""
    return K_B_EV * temperature_k
