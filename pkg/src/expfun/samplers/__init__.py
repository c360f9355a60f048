"""Seeded samplers: elementary laws, Lévy paths and exponential functionals."""

from .elementary import (
    sample_exponential,
    sample_gamma,
    sample_length_biased,
    sample_positive_stable,
    sample_uniform,
)
from .paths import (
    euler_settings,
    sample_affine_rhs,
    sample_coupled,
    sample_entrance_law,
    sample_lamperti_path,
    sample_sn_expfun,
    sample_subordinator_expfun,
)
from .rng import DEFAULT_SEED, REPLICA_SIZE, PathConfig, RngState, SampleBatch

__all__ = [
    "DEFAULT_SEED",
    "REPLICA_SIZE",
    "PathConfig",
    "RngState",
    "SampleBatch",
    "sample_exponential",
    "sample_uniform",
    "sample_gamma",
    "sample_positive_stable",
    "sample_length_biased",
    "sample_subordinator_expfun",
    "sample_sn_expfun",
    "sample_lamperti_path",
    "sample_entrance_law",
    "sample_affine_rhs",
    "sample_coupled",
    "euler_settings",
]
