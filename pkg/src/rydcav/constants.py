"""Physical constants (CODATA 2018), 12 significant digits where inexact."""

import math

TWO_PI = 2.0 * math.pi

HBAR = 1.05457181765e-34      # J s  (h / 2pi with h exact in SI)
K_B = 1.38064900000e-23       # J / K  (exact)
E_CHARGE = 1.60217663400e-19  # C  (exact)
BOHR_RADIUS = 5.29177210903e-11  # m
EPS_0 = 8.85418781280e-12     # F / m
C_LIGHT = 299792458.0         # m / s  (exact)
