"""Gibbs allocation over an explicit range with entropy-based prices.

The allocation rule picks outcome r with probability proportional to
mu(r) * exp((epsilon/2) * welfare(r)) and charges agent i

    p_i = -E[welfare of others] - (2/epsilon) * S(dist)
          + (2/epsilon) * ln sum_r exp((epsilon/2) * welfare_without_i(r)),

which makes truth-telling optimal: the bidder's utility equals the
entropy-regularized expected welfare (a quantity uniquely maximized by the
Gibbs distribution at the true values) plus a bid-independent constant.
With a non-uniform prior the entropy term becomes a KL divergence to the
prior and the normalization sums are prior-weighted; a uniform prior
reproduces the unweighted rule exactly.

All arithmetic is done in the log domain with max-shifted log-sum-exp:
epsilon * n can reach the hundreds, where direct exponentiation overflows.
Everything here is a pure function of its inputs; randomness enters only
through a caller-supplied numpy Generator.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .types import (
    InputError,
    MechanismResult,
    OutcomeDistribution,
    PriorDistribution,
    PrivacyParams,
    ValuationProfile,
)

__all__ = [
    "gibbs_distribution",
    "sample_outcome",
    "log_partition",
    "shannon_entropy",
    "kl_divergence",
    "free_social_welfare",
    "payment",
    "payments",
    "run_mechanism",
    "vcg_reference",
]


def gibbs_distribution(
    profile: ValuationProfile,
    params: PrivacyParams,
    prior: PriorDistribution | None = None,
) -> OutcomeDistribution:
    """Allocation distribution: probs[r] proportional to mu(r)*exp((eps/2)*welfare(r))."""
    log_w = params.half_epsilon * profile.welfare()
    if prior is not None:
        if prior.mu.size != profile.range_size:
            raise InputError("prior size does not match the outcome range")
        log_w = log_w + prior.log_mu()
    log_p = log_w - logsumexp(log_w)
    probs = np.exp(log_p)
    probs /= probs.sum()
    return OutcomeDistribution(probs=probs, log_weights=log_w)


def sample_outcome(dist: OutcomeDistribution, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from the distribution; deterministic given the seed."""
    cdf = np.cumsum(dist.probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, dist.range_size - 1)


def sample_outcomes(dist: OutcomeDistribution, rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized inverse-CDF draws (one uniform per draw, in order)."""
    cdf = np.cumsum(dist.probs)
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return np.minimum(idx, dist.range_size - 1)


def log_partition(
    profile: ValuationProfile,
    params: PrivacyParams,
    exclude_agent: int | None = None,
    prior: PriorDistribution | None = None,
) -> float:
    """ln sum_r weight(r) * exp((eps/2) * sum_{k != excluded} v_k(r)).

    weight(r) is mu(r) when a prior is given, else 1. The 2/epsilon scaling
    used by the payment rule is applied by the caller.
    """
    if exclude_agent is None:
        w = profile.welfare()
    else:
        if not 0 <= exclude_agent < profile.n:
            raise InputError("exclude_agent out of range")
        w = profile.welfare_excluding(exclude_agent)
    log_w = params.half_epsilon * w
    if prior is not None:
        if prior.mu.size != profile.range_size:
            raise InputError("prior size does not match the outcome range")
        log_w = log_w + prior.log_mu()
    return float(logsumexp(log_w))


def shannon_entropy(dist: OutcomeDistribution) -> float:
    """-sum p ln p in nats, with 0 ln 0 = 0; lies in [0, ln(range_size)]."""
    log_p = dist.log_probs()
    terms = np.where(dist.probs > 0.0, dist.probs * log_p, 0.0)
    return float(-terms.sum())


def kl_divergence(dist: OutcomeDistribution, prior: PriorDistribution) -> float:
    """KL(dist || prior) in nats; prior is strictly positive by construction."""
    log_p = dist.log_probs()
    terms = np.where(dist.probs > 0.0, dist.probs * (log_p - prior.log_mu()), 0.0)
    return float(terms.sum())


def free_social_welfare(
    dist: OutcomeDistribution,
    profile: ValuationProfile,
    params: PrivacyParams,
    prior: PriorDistribution | None = None,
) -> float:
    """E[welfare] + (2/eps) * S(dist), or E[welfare] - (2/eps) * KL(dist || prior).

    Over all distributions on the range this objective is uniquely maximized
    by the Gibbs distribution for the same profile, which is what makes the
    pricing rule incentive compatible.
    """
    expected = float(dist.probs @ profile.welfare())
    if prior is None:
        return expected + (2.0 / params.epsilon) * shannon_entropy(dist)
    return expected - (2.0 / params.epsilon) * kl_divergence(dist, prior)


def _payment_from_dist(
    dist: OutcomeDistribution,
    profile: ValuationProfile,
    params: PrivacyParams,
    agent: int,
    prior: PriorDistribution | None,
) -> float:
    w_minus = profile.welfare_excluding(agent)
    expected_others = float(dist.probs @ w_minus)
    scale = 2.0 / params.epsilon
    lz_minus = log_partition(profile, params, exclude_agent=agent, prior=prior)
    if prior is None:
        reg = -scale * shannon_entropy(dist)
    else:
        reg = scale * kl_divergence(dist, prior)
    return -expected_others + reg + scale * lz_minus


def payment(
    profile: ValuationProfile,
    params: PrivacyParams,
    agent: int,
    prior: PriorDistribution | None = None,
) -> float:
    """Price charged to one agent, computed exactly from the distribution.

    Zero for agents whose reported valuation is identically zero, and always
    in [0, 1] (individual rationality plus no positive transfers on [0, 1]
    valuations).
    """
    if not 0 <= agent < profile.n:
        raise InputError("agent index out of range")
    dist = gibbs_distribution(profile, params, prior)
    return _payment_from_dist(dist, profile, params, agent, prior)


def payments(
    profile: ValuationProfile,
    params: PrivacyParams,
    prior: PriorDistribution | None = None,
) -> np.ndarray:
    dist = gibbs_distribution(profile, params, prior)
    return np.array(
        [_payment_from_dist(dist, profile, params, i, prior) for i in range(profile.n)]
    )


def run_mechanism(
    profile: ValuationProfile,
    params: PrivacyParams,
    rng: np.random.Generator,
    prior: PriorDistribution | None = None,
) -> MechanismResult:
    """Sample an outcome, price every agent, and fill the diagnostics."""
    dist = gibbs_distribution(profile, params, prior)
    outcome = sample_outcome(dist, rng)
    pays = np.array(
        [_payment_from_dist(dist, profile, params, i, prior) for i in range(profile.n)]
    )
    return MechanismResult(
        outcome=outcome,
        payments=pays,
        entropy=shannon_entropy(dist),
        log_partition=log_partition(profile, params, prior=prior),
        expected_welfare=float(dist.probs @ profile.welfare()),
    )


def vcg_reference(profile: ValuationProfile) -> tuple[int, np.ndarray]:
    """Deterministic welfare argmax with Clarke pivot prices.

    The comparator for the large-epsilon limit of the randomized mechanism.
    Ties break to the lowest outcome index.
    """
    outcome = int(np.argmax(profile.welfare()))
    pays = np.empty(profile.n)
    for i in range(profile.n):
        w_minus = profile.welfare_excluding(i)
        pays[i] = float(w_minus.max() - w_minus[outcome])
    return outcome, pays
