"""Spectral upper-bound certificates for the Lovasz theta function of G(n, 1/2)."""

from . import certificate, esd, freeconv, rmt_core, theta_opt
from .certificate import CertificateResult, CertificateSpec, certify
from .errors import (
    ConstraintViolationError,
    DomainError,
    InvalidDimensionError,
    InvalidInputError,
    InvalidParameterError,
    NumericalFailureError,
    SolverFailureError,
    ThetaLabError,
)
from .rmt_core import GraphSample, eigh, graph_from_adjacency, plant_clique, sample_gnp_half, sample_goe
from .theta_opt import OptConfig, minimize

__version__ = "0.1.0"
