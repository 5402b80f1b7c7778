"""Domain types shared across the mechanism backends.

Valuations live in [0, 1], so the welfare function has Lipschitz constant 1
with respect to single-agent changes and the Gibbs exponent epsilon/2 yields
an epsilon-differentially-private allocation rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "InputError",
    "InstanceTooLargeError",
    "NumericalError",
    "PrivacyParams",
    "ValuationProfile",
    "PriorDistribution",
    "OutcomeDistribution",
    "MechanismResult",
]


class InputError(ValueError):
    """Invalid mechanism input."""


class InstanceTooLargeError(InputError):
    """Instance exceeds an enumeration or kernel cap."""


class NumericalError(ArithmeticError):
    """Internal floating-point failure with diagnostics."""


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget: epsilon > 0, optional delta, optional IC slack gamma.

    gamma is the tolerated expected-utility gain from lying; it stays 0 for
    exact implementations and becomes positive only when an approximate
    backend (for example a noisy permanent estimator) is plugged in.
    epsilon = 0 is rejected because the payment rule divides by epsilon.
    """

    epsilon: float
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0.0:
            raise InputError("epsilon must be finite and > 0, got %r" % (self.epsilon,))
        if not 0.0 <= self.delta < 1.0:
            raise InputError("delta must lie in [0, 1), got %r" % (self.delta,))
        if not self.gamma >= 0.0:
            raise InputError("gamma must be >= 0, got %r" % (self.gamma,))

    @property
    def half_epsilon(self) -> float:
        return 0.5 * self.epsilon


@dataclass(frozen=True)
class ValuationProfile:
    """n agents' value tables over an explicit finite outcome range.

    values[i][r] is agent i's value for outcome r, required to be in [0, 1].
    """

    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise InputError("values must be a 2-d (agents x outcomes) table")
        n, r = vals.shape
        if n < 1 or r < 1:
            raise InputError("need at least one agent and one outcome")
        if not np.all(np.isfinite(vals)):
            raise InputError("values must be finite")
        if vals.min() < 0.0 or vals.max() > 1.0:
            raise InputError("values must lie in [0, 1]")
        if self.labels is not None and len(self.labels) != r:
            raise InputError("labels length must match the outcome count")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def range_size(self) -> int:
        return self.values.shape[1]

    def welfare(self) -> np.ndarray:
        """Per-outcome social welfare, an array in [0, n]."""
        return self.values.sum(axis=0)

    def welfare_excluding(self, agent: int) -> np.ndarray:
        return self.welfare() - self.values[agent]

    def replace_row(self, agent: int, row) -> "ValuationProfile":
        vals = self.values.copy()
        vals[agent] = np.asarray(row, dtype=np.float64)
        return ValuationProfile(vals, self.labels)


@dataclass(frozen=True)
class PriorDistribution:
    """Strictly positive prior over the outcome range, summing to 1.

    Zero-mass outcomes are rejected: they would make the KL payment term
    and the privacy ratio degenerate.
    """

    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        if mu.ndim != 1 or mu.size < 1:
            raise InputError("prior must be a 1-d array")
        if not np.all(np.isfinite(mu)):
            raise InputError("prior must be finite")
        if mu.min() <= 0.0:
            raise InputError("prior must be strictly positive on every outcome")
        if abs(mu.sum() - 1.0) > 1e-12:
            raise InputError("prior must sum to 1 within 1e-12")
        object.__setattr__(self, "mu", mu)

    def log_mu(self) -> np.ndarray:
        return np.log(self.mu)

    @staticmethod
    def uniform(range_size: int) -> "PriorDistribution":
        return PriorDistribution(np.full(range_size, 1.0 / range_size))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability mass over the range plus its unnormalized log-weights.

    The log-weights are retained so downstream computations (entropy, KL,
    payments) stay stable even when the probabilities underflow: for finite
    epsilon the mathematical support is the full range, which is enforced on
    the log-weights (all finite) rather than on the float probabilities.
    """

    probs: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        logw = np.asarray(self.log_weights, dtype=np.float64)
        if probs.ndim != 1 or probs.shape != logw.shape:
            raise InputError("probs and log_weights must be matching 1-d arrays")
        if not np.all(np.isfinite(logw)):
            raise InputError("log_weights must be finite")
        if probs.min() < 0.0:
            raise InputError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InputError("probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "log_weights", logw)

    @property
    def range_size(self) -> int:
        return self.probs.size

    def log_probs(self) -> np.ndarray:
        """Normalized log-probabilities computed from the log-weights."""
        return self.log_weights - logsumexp(self.log_weights)


@dataclass(frozen=True)
class MechanismResult:
    """One mechanism run: sampled outcome, exact payments, diagnostics."""

    outcome: int
    payments: np.ndarray
    entropy: float
    log_partition: float
    expected_welfare: float

    def __post_init__(self):
        payments = np.asarray(self.payments, dtype=np.float64)
        object.__setattr__(self, "payments", payments)
        if not 0 <= self.outcome:
            raise InputError("outcome index must be nonnegative")
        if payments.min() < -1e-9 or payments.max() > 1.0 + 1e-9:
            raise InputError("payments must lie in [0, 1] (tolerance 1e-9)")
