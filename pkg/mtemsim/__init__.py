"""
MTEMsim Stability Laboratory for Truncated Euler-Maruyama Schemes
=================================================================

The package simulates the modified truncated Euler-Maruyama (MTEM) scheme for
stochastic differential equations with superlinearly growing coefficients,
derives the truncation radius from a local Lipschitz bound, estimates moment
and almost-sure Lyapunov exponents by Monte Carlo, and checks the global
Lipschitz and stability-functional properties of the truncated coefficients.

The command-line driver is located in the main module.

"""

__version__ = '0.1.0'
