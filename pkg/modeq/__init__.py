"""
modeq - Modular Equations for Weber and Double Eta-Quotient Functions
=====================================================================

Exact truncated q-series arithmetic, power sums and Newton's identities,
turned into modular equations Phi[f](F, G2, G3, J) for the generalized Weber
functions w_p and the double eta-quotients w_{p1,p2}^e.
"""

__version__ = "1.0.0"
