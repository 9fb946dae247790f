"""Decoy-state BB84: single-photon bounds, secret key length, simulation and distillation."""

from ._core import (
    ChannelModel,
    DecoyScheme,
    FormatError,
    InvalidTally,
    analyze,
    binary_entropy,
    binomial_interval,
    calibrate,
    cascade,
    expected_tally,
    optimize,
    peres,
    peres_rate,
    privacy_amplification_factor,
    range_curve,
    reference_model,
    reference_scheme,
    simulate,
    toeplitz_hash,
)

__version__ = "1.0.0"

__all__ = [
    "ChannelModel",
    "DecoyScheme",
    "FormatError",
    "InvalidTally",
    "analyze",
    "binary_entropy",
    "binomial_interval",
    "calibrate",
    "cascade",
    "expected_tally",
    "optimize",
    "peres",
    "peres_rate",
    "privacy_amplification_factor",
    "range_curve",
    "reference_model",
    "reference_scheme",
    "simulate",
    "toeplitz_hash",
]
