"""Continuous-noise simulation of small quantum error correcting codes.

Master-equation and stochastic-trajectory pipelines for a 3-qubit
phase-error code and a 5-qubit single-error code, together with the
closed-form storage/transmission failure probabilities they are compared
against, and a CLI to sweep the noise-rate/time plane.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
