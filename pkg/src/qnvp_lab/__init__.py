"""Vlasov-Poisson and quasineutral Vlasov-Poisson dynamics on the 2-torus.

Spectral in position, fourth-order finite differences in velocity, with the
Lie-Poisson structure exposed for verification.
"""

__version__ = "0.1.0"
