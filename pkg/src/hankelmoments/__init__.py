"""Hankel operators of Hamburger moment sequences at finite truncation.

The library builds the truncated Hankel matrices of closed-form moment
families, factors them through the orthonormal-polynomial change of basis,
profiles their spectra across truncation sizes, and verifies the exact
finite-rank identities of mass-removal perturbations — with exact rational
arithmetic whenever the input data is rational.
"""

from .backends import (
    Backend,
    BackendError,
    F64_BACKEND,
    HankelError,
    PrecisionError,
    RATIONAL_BACKEND,
    bigfloat,
)
from .measures import DiscreteMeasure, EmptyMeasureError
from .moments import (
    Classification,
    Discrete,
    Explicit,
    Gaussian,
    Gegenbauer,
    LogNormal,
    MissingMomentError,
    MomentFamily,
    MomentSequence,
    PowerLog,
    Verdict,
    classify,
    nu_moments,
)
from .hankel import (
    DomainVerdict,
    HankelMatrix,
    SeriesApplyReport,
    apply_H_via_series,
    build,
    domain_diagnostic,
    matvec_fft,
    matvec_naive,
    power_decay,
    shift,
    shift_adjoint,
)
from .orthopoly import (
    PrecisionPolicy,
    RecurrenceCoeffs,
    TriangularPair,
    eval_polys,
    factor,
    p_function,
    recurrence,
)
from .spectral import (
    AMatrixReport,
    PlateauVerdict,
    ProfileEntry,
    SpectralProfile,
    XiVector,
    a_matrix_experiment,
    h_xi_identity,
    lambda_profile,
    plateau_verdict,
    xi_vector,
)
from .extremal import (
    HypothesisViolationError,
    KernelResidualReport,
    PerturbationReport,
    add_masses,
    cd_kernel,
    kernel_vector_check,
    perturbation_check,
    remove_masses,
)
from .triangular import PositivityError

__version__ = "0.1.0"

__all__ = [
    "AMatrixReport",
    "Backend",
    "BackendError",
    "Classification",
    "Discrete",
    "DiscreteMeasure",
    "DomainVerdict",
    "EmptyMeasureError",
    "Explicit",
    "F64_BACKEND",
    "Gaussian",
    "Gegenbauer",
    "HankelError",
    "HankelMatrix",
    "HypothesisViolationError",
    "KernelResidualReport",
    "LogNormal",
    "MissingMomentError",
    "MomentFamily",
    "MomentSequence",
    "PerturbationReport",
    "PlateauVerdict",
    "PositivityError",
    "PowerLog",
    "PrecisionError",
    "PrecisionPolicy",
    "ProfileEntry",
    "RATIONAL_BACKEND",
    "RecurrenceCoeffs",
    "SeriesApplyReport",
    "SpectralProfile",
    "TriangularPair",
    "Verdict",
    "XiVector",
    "a_matrix_experiment",
    "add_masses",
    "apply_H_via_series",
    "bigfloat",
    "build",
    "cd_kernel",
    "classify",
    "domain_diagnostic",
    "eval_polys",
    "factor",
    "h_xi_identity",
    "kernel_vector_check",
    "lambda_profile",
    "matvec_fft",
    "matvec_naive",
    "nu_moments",
    "p_function",
    "perturbation_check",
    "plateau_verdict",
    "power_decay",
    "recurrence",
    "remove_masses",
    "shift",
    "shift_adjoint",
    "xi_vector",
]
