"""Stochastic heat equation on R^d with noise white in time, colored in space.

Library layout:

- ``kernels``       spatial correlation kernels, spectral densities, heat kernel
- ``dalang``        integrability functionals of the spectral density
- ``series``        convolution series, growth rates, moment-bound evaluators
- ``coefficients``  drift/diffusion families, truncation, growth classification
- ``noise``         spectral synthesis of lattice noise increments
- ``solver``        exponential-Euler integrator for the mild equation
- ``montecarlo``    path ensembles and statistical verdicts
- ``cli``           the ``she`` command-line entry point
"""

__version__ = "0.1.0"

from .kernels import (
    CorrelationKernel,
    WhiteNoise,
    RieszKernel,
    GaussianKernel,
    ExponentialKernel,
    MaternKernel,
    NOT_POINTWISE,
    eval_correlation,
    eval_spectral_density,
    heat_kernel,
    parse_kernel,
)
from .dalang import upsilon, upsilon_alpha, admissible_alpha_sup, constant_C, DalangReport
