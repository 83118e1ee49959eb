"""Numerics for degenerate Wright-Fisher / Kimura diffusion operators.

Transition kernels of the model operators x d^2/dx^2 + b d/dx on the half
line (and their products with Euclidean factors), solution operators built
on them (Cauchy, Duhamel, resolvent, contour semigroup, a parametrix
stepper for variable-coefficient operators on [0,1]), exact path samplers,
anisotropic Holder diagnostics, boundary classification, and a harness that
stress-tests the kernel estimates the analysis relies on.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, KimuraError, NotCleanError,
                     SectorError, SmoothnessError, StepSizeError)
from .logspace import LogComplex
from .specfun import PsiRegime, log_gamma, psi_b, psi_b_prime

__all__ = [
    "__version__",
    "ConvergenceError", "DomainError", "KimuraError", "NotCleanError",
    "SectorError", "SmoothnessError", "StepSizeError",
    "LogComplex", "PsiRegime", "log_gamma", "psi_b", "psi_b_prime",
]
