"""Truthful, differentially private welfare maximization toolkit.

Core pieces: a Gibbs allocation rule over an explicit outcome range with
entropy-based prices, structured backends that implement the same law for
unit-demand matchings (via matrix permanents) and spanning-tree procurement
(via weighted Laplacian determinants), an enumerating public-projects
frontend, Laplace payment noising, and a brute-force verification harness
for incentive, rationality, privacy, and welfare properties.
"""

from .types import (
    InputError,
    InstanceTooLargeError,
    MechanismResult,
    NumericalError,
    OutcomeDistribution,
    PriorDistribution,
    PrivacyParams,
    ValuationProfile,
)

__all__ = [
    "InputError",
    "InstanceTooLargeError",
    "MechanismResult",
    "NumericalError",
    "OutcomeDistribution",
    "PriorDistribution",
    "PrivacyParams",
    "ValuationProfile",
]

__version__ = "0.1.0"
