"""Fourier-Bessel heat kernels on [0, 1]: special functions, eigen-series
kernels with certified truncation, Gaussian envelopes and verification."""

__version__ = "0.1.0"

from .errors import ComputationError, DomainError, QuadratureError, RefusalError
from .specfun import (JacobiParams, OrderParam, ZeroTable, bessel_j, bessel_zeros, jacobi_norm_const,
                      jacobi_poly, jacobi_poly_deriv, log_gamma, zero_table)
from .eigensystems import (WeightSpec, eigenvalue_bessel, eigenvalue_jacobi, inner_product, jacobi_fun,
                           lemma_symmetry_defect, phi, psi)
from .kernels import (EvalPoint, SeriesResult, TruncationPolicy, bessel_kernel, closed_form_k_half, heat_g,
                      heat_jacobi, heat_k, jacobi_kernel, semigroup_defect)
from .envelopes import (EnvelopeConstants, envelope_bessel, envelope_jacobi, envelope_longtime,
                        h_perturbation, sandwich_bounds)
from .verify import (GridSpec, VerificationReport, scan_envelope_shorttime, scan_longtime,
                     scan_sandwich, structural_checks)
from .stochastic import MCConfig, MCResult, mc_vs_spectral, simulate

__all__ = [name for name in dir() if not name.startswith("_")]
