"""Brute-force certification of mechanism properties.

Every check computes expectations exactly from enumerated distributions
where the range permits it; sampling appears only where the property under
test is itself about sampling (the welfare tail). Checks are pure given
their rng, each one owning a stream derived from a caller seed, so they can
run concurrently without changing results.

Mechanisms are plugged in through a small provider interface so the same
harness serves the exact core, the structured backends, and deliberately
broken negative controls:

    n_agents, n_outcomes
    true_values(agent)   -> agent's true valuation over the outcome range
    bid_dim(agent)       -> length of the agent's native bid vector
    true_bid(agent)      -> the truthful native bid
    evaluate(agent, bid) -> (outcome probs, payment charged to the agent)
                            with all other agents bidding truthfully

For the explicit mechanism the native bid is the valuation row itself; for
the matching backend it is the agent's item-value row, and for the
procurement backend a single cost entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import core
from .types import (
    InputError,
    InstanceTooLargeError,
    OutcomeDistribution,
    PriorDistribution,
    PrivacyParams,
    ValuationProfile,
)

__all__ = [
    "CheckReport",
    "ExplicitMechanism",
    "NoPaymentMechanism",
    "FlatFeeMechanism",
    "ArgmaxMechanism",
    "check_ic",
    "check_ir",
    "check_dp",
    "check_welfare_tail",
    "check_free_energy",
    "check_kl_objective",
    "check_cyclic_monotonicity",
]

MAX_IC_AGENTS = 4
MAX_IC_BID_DIM = 6
MAX_IC_GRID = 15_625


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one certification check.

    passed is equivalent to worst_case_margin >= -tolerance. details carries
    report-only quantities (never asserted), such as the empirical frequency
    against the undoubled tail threshold.
    """

    check_name: str
    passed: bool
    worst_case_margin: float
    witness: str | None
    samples_used: int
    tolerance: float
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        line = "%s: %s margin=%.6g tolerance=%.3g samples=%d" % (
            self.check_name,
            status,
            self.worst_case_margin,
            self.tolerance,
            self.samples_used,
        )
        if self.witness:
            line += " witness[%s]" % self.witness
        return line


def _report(name, margin, tolerance, witness, samples, details=None) -> CheckReport:
    return CheckReport(
        check_name=name,
        passed=bool(margin >= -tolerance),
        worst_case_margin=float(margin),
        witness=witness,
        samples_used=int(samples),
        tolerance=float(tolerance),
        details=details or {},
    )


class ExplicitMechanism:
    """Exact Gibbs mechanism over an explicit profile, as a provider."""

    def __init__(
        self,
        profile: ValuationProfile,
        params: PrivacyParams,
        prior: PriorDistribution | None = None,
    ):
        self.profile = profile
        self.params = params
        self.prior = prior
        self.n_agents = profile.n
        self.n_outcomes = profile.range_size

    def true_values(self, agent: int) -> np.ndarray:
        return self.profile.values[agent]

    def bid_dim(self, agent: int) -> int:
        return self.n_outcomes

    def true_bid(self, agent: int) -> np.ndarray:
        return self.profile.values[agent]

    def evaluate(self, agent: int, bid) -> tuple[np.ndarray, float]:
        bid_profile = self.profile.replace_row(agent, bid)
        dist = core.gibbs_distribution(bid_profile, self.params, self.prior)
        pay = core._payment_from_dist(dist, bid_profile, self.params, agent, self.prior)
        return dist.probs, pay

    def evaluate_grid(self, agent: int, bids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluate over a (m, range) block of bids for one agent."""
        w_minus = self.profile.welfare_excluding(agent)
        log_w = self.params.half_epsilon * (bids + w_minus[None, :])
        if self.prior is not None:
            log_w = log_w + self.prior.log_mu()[None, :]
        log_p = log_w - logsumexp(log_w, axis=1)[:, None]
        probs = np.exp(log_p)
        probs /= probs.sum(axis=1)[:, None]
        scale = 2.0 / self.params.epsilon
        lz_minus = core.log_partition(
            self.profile, self.params, exclude_agent=agent, prior=self.prior
        )
        if self.prior is None:
            reg = -scale * (-(np.where(probs > 0.0, probs * log_p, 0.0)).sum(axis=1))
        else:
            kl = (np.where(probs > 0.0, probs * (log_p - np.log(self.prior.mu)[None, :]), 0.0)).sum(axis=1)
            reg = scale * kl
        pays = -(probs @ w_minus) + reg + scale * lz_minus
        return probs, pays

    def payments_for(self, values: np.ndarray) -> np.ndarray:
        """Payment vector when the full bid table is ``values``."""
        return core.payments(ValuationProfile(values, self.profile.labels), self.params, self.prior)


class _WrappedMechanism:
    """Base for adversarial wrappers used as negative controls."""

    def __init__(self, base):
        self.base = base
        self.n_agents = base.n_agents
        self.n_outcomes = base.n_outcomes
        if hasattr(base, "params"):
            self.params = base.params

    def true_values(self, agent):
        return self.base.true_values(agent)

    def bid_dim(self, agent):
        return self.base.bid_dim(agent)

    def true_bid(self, agent):
        return self.base.true_bid(agent)

    def evaluate(self, agent, bid):
        return self.base.evaluate(agent, bid)


class NoPaymentMechanism(_WrappedMechanism):
    """Allocation-only variant: keeps the Gibbs allocation, charges nothing.

    Overbidding shifts mass toward outcomes the agent likes, so this fails
    the incentive check with a concrete profitable deviation.
    """

    def evaluate(self, agent, bid):
        probs, _ = self.base.evaluate(agent, bid)
        return probs, 0.0

    def evaluate_grid(self, agent, bids):
        probs, pays = self.base.evaluate_grid(agent, bids)
        return probs, np.zeros_like(pays)

    def payments_for(self, values):
        return np.zeros(self.n_agents)


class FlatFeeMechanism(_WrappedMechanism):
    """Charges every agent a flat fee regardless of bids: violates IR."""

    def __init__(self, base, fee: float = 0.5):
        super().__init__(base)
        self.fee = fee

    def evaluate(self, agent, bid):
        probs, _ = self.base.evaluate(agent, bid)
        return probs, self.fee

    def evaluate_grid(self, agent, bids):
        probs, pays = self.base.evaluate_grid(agent, bids)
        return probs, np.full_like(pays, self.fee)

    def payments_for(self, values):
        return np.full(self.n_agents, self.fee)


class ArgmaxMechanism:
    """Deterministic welfare argmax with no payments: maximally non-private."""

    def __init__(self, profile: ValuationProfile, params: PrivacyParams):
        self.profile = profile
        self.params = params
        self.n_agents = profile.n
        self.n_outcomes = profile.range_size

    def true_values(self, agent):
        return self.profile.values[agent]

    def bid_dim(self, agent):
        return self.n_outcomes

    def true_bid(self, agent):
        return self.profile.values[agent]

    def distribution_for(self, values: np.ndarray) -> np.ndarray:
        probs = np.zeros(self.n_outcomes)
        probs[int(np.argmax(values.sum(axis=0)))] = 1.0
        return probs

    def evaluate(self, agent, bid):
        vals = self.profile.values.copy()
        vals[agent] = bid
        return self.distribution_for(vals), 0.0

    def payments_for(self, values):
        return np.zeros(self.n_agents)


def _bid_grid(dim: int, step: float) -> np.ndarray:
    """All bid vectors on the regular grid {0, step, ..., 1}^dim."""
    if not 0.0 < step <= 1.0:
        raise InputError("bid_grid_step must lie in (0, 1]")
    levels = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    count = len(levels) ** dim
    if count > MAX_IC_GRID:
        raise InstanceTooLargeError(
            "deviation grid has %d points (cap %d)" % (count, MAX_IC_GRID)
        )
    grids = np.meshgrid(*([levels] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def check_ic(mechanism, bid_grid_step: float = 0.25, tolerance: float = 1e-9) -> CheckReport:
    """Exact incentive-compatibility audit over a grid of deviation bids.

    For every agent and every grid deviation, compares the exact expected
    utility of truth against the deviation; the worst difference is the
    margin. A mechanism running with slack gamma > 0 is allowed to lose up
    to gamma utility (the margin threshold becomes -gamma - tolerance).
    """
    if mechanism.n_agents > MAX_IC_AGENTS:
        raise InstanceTooLargeError(
            "check_ic capped at %d agents (got %d)" % (MAX_IC_AGENTS, mechanism.n_agents)
        )
    gamma = getattr(mechanism, "params", PrivacyParams(1.0)).gamma
    worst = np.inf
    witness = None
    evaluations = 0
    for agent in range(mechanism.n_agents):
        dim = mechanism.bid_dim(agent)
        if dim > MAX_IC_BID_DIM:
            raise InstanceTooLargeError(
                "check_ic capped at bid dimension %d (got %d)" % (MAX_IC_BID_DIM, dim)
            )
        truth_vals = np.asarray(mechanism.true_values(agent), dtype=np.float64)
        probs_t, pay_t = mechanism.evaluate(agent, mechanism.true_bid(agent))
        u_truth = float(probs_t @ truth_vals) - pay_t
        bids = _bid_grid(dim, bid_grid_step)
        if hasattr(mechanism, "evaluate_grid"):
            probs, pays = mechanism.evaluate_grid(agent, bids)
            u_dev = probs @ truth_vals - pays
            evaluations += len(bids)
            idx = int(np.argmin(u_truth - u_dev))
            margin = float(u_truth - u_dev[idx])
            if margin < worst:
                worst = margin
                if margin < -(gamma + tolerance):
                    witness = "agent %d gains %.3g by bidding %s" % (
                        agent,
                        -margin,
                        np.round(bids[idx], 4).tolist(),
                    )
        else:
            for bid in bids:
                probs_d, pay_d = mechanism.evaluate(agent, bid)
                u_dev = float(probs_d @ truth_vals) - pay_d
                evaluations += 1
                margin = u_truth - u_dev
                if margin < worst:
                    worst = margin
                    if margin < -(gamma + tolerance):
                        witness = "agent %d gains %.3g by bidding %s" % (
                            agent,
                            -margin,
                            np.round(bid, 4).tolist(),
                        )
    return _report("ic", worst + gamma, tolerance, witness, evaluations,
                   details={"gamma": gamma, "raw_margin": float(worst)})


def check_ir(mechanism, tolerance: float = 1e-9) -> CheckReport:
    """Exact individual rationality: truthful expected utility >= 0 per agent."""
    worst = np.inf
    witness = None
    for agent in range(mechanism.n_agents):
        truth_vals = np.asarray(mechanism.true_values(agent), dtype=np.float64)
        probs, pay = mechanism.evaluate(agent, mechanism.true_bid(agent))
        utility = float(probs @ truth_vals) - pay
        if utility < worst:
            worst = utility
            if utility < -tolerance:
                witness = "agent %d has truthful utility %.3g" % (agent, utility)
    return _report("ir", worst, tolerance, witness, mechanism.n_agents)


def _neighbor_rows(profile: ValuationProfile, count: int, rng: np.random.Generator):
    """Neighbor valuations for one-agent swaps: extremal rows first, then random.

    Extremal all-zero and all-one rows are included for every agent because
    the worst-case probability ratios occur at the extremes; random-only
    neighbors under-test.
    """
    r = profile.range_size
    for agent in range(profile.n):
        yield agent, np.zeros(r)
        yield agent, np.ones(r)
    produced = 2 * profile.n
    while produced < count:
        agent = int(rng.integers(profile.n))
        yield agent, rng.random(r)
        produced += 1


def check_dp(
    profile: ValuationProfile,
    params: PrivacyParams,
    neighbor_count: int,
    rng: np.random.Generator,
    tolerance: float = 1e-9,
    mechanism=None,
) -> CheckReport:
    """Pointwise privacy ratio over generated one-agent neighbor profiles.

    Computes exact outcome distributions for the profile and each neighbor
    and records the largest |ln(p/p')| over outcomes; the bound is epsilon.
    ``mechanism`` may supply a custom distribution rule
    (``distribution_for(values)``) such as the argmax negative control.
    """

    def dist_for(values: np.ndarray) -> np.ndarray:
        if mechanism is not None:
            return mechanism.distribution_for(values)
        return core.gibbs_distribution(ValuationProfile(values), params).probs

    base = dist_for(profile.values)
    worst_ratio = 0.0
    witness = None
    pairs = 0
    with np.errstate(divide="ignore"):
        log_base = np.log(base)
    for agent, row in _neighbor_rows(profile, neighbor_count, rng):
        vals = profile.values.copy()
        vals[agent] = row
        other = dist_for(vals)
        with np.errstate(divide="ignore"):
            log_other = np.log(other)
        diff = log_base - log_other
        diff = np.where(np.isnan(diff), 0.0, diff)  # 0/0 outcomes carry no mass
        ratio = float(np.max(np.abs(diff)))
        pairs += 1
        if ratio > worst_ratio:
            worst_ratio = ratio
            if ratio > params.epsilon + tolerance:
                witness = "agent %d swap, max |ln ratio| = %.4g > epsilon" % (agent, ratio)
    margin = params.epsilon - worst_ratio
    return _report("dp", margin, tolerance, witness, pairs,
                   details={"max_abs_log_ratio": worst_ratio})


def check_welfare_tail(
    profile: ValuationProfile,
    params: PrivacyParams,
    t: float,
    sample_count: int,
    rng: np.random.Generator,
) -> CheckReport:
    """Sampled welfare tail against the doubled-slack threshold.

    Asserts: freq[welfare < max - 2(ln|R| + t)/eps] <= exp(-t) plus three
    binomial sigmas (deterministic pass/fail at 1e5 samples). The frequency
    against the undoubled threshold max - (ln|R| + t)/eps is reported in the
    details but never asserted, as is the exact tail probability computed by
    direct summation.
    """
    if sample_count < 10_000:
        raise InputError("tail check needs at least 1e4 samples")
    dist = core.gibbs_distribution(profile, params)
    welfare = profile.welfare()
    w_max = float(welfare.max())
    r = profile.range_size
    thresh_doubled = w_max - 2.0 * (np.log(r) + t) / params.epsilon
    thresh_single = w_max - (np.log(r) + t) / params.epsilon
    draws = core.sample_outcomes(dist, rng, sample_count)
    w_draws = welfare[draws]
    freq = float(np.mean(w_draws < thresh_doubled))
    freq_single = float(np.mean(w_draws < thresh_single))
    exact = float(dist.probs[welfare < thresh_doubled].sum())
    bound = float(np.exp(-t))
    sigma = float(np.sqrt(bound * (1.0 - bound) / sample_count))
    margin = bound + 3.0 * sigma - freq
    witness = None
    if margin < 0.0:
        witness = "tail frequency %.4g exceeds %.4g" % (freq, bound + 3.0 * sigma)
    return _report(
        "tail",
        margin,
        0.0,
        witness,
        sample_count,
        details={
            "frequency_doubled_threshold": freq,
            "frequency_single_threshold": freq_single,
            "exact_tail_probability": exact,
            "bound": bound,
            "three_sigma": 3.0 * sigma,
        },
    )


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    cond = u + (1.0 - css) / idx > 0
    rho = int(np.nonzero(cond)[0][-1])
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def _entropy_of(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(probs > 0.0, probs * np.log(probs), 0.0)
    return -terms.sum(axis=-1)


def _objective(probs, welfare, params, prior):
    expected = probs @ welfare
    if prior is None:
        return expected + (2.0 / params.epsilon) * _entropy_of(probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_terms = np.where(probs > 0.0, probs * (np.log(probs) - np.log(prior.mu)), 0.0)
    return expected - (2.0 / params.epsilon) * kl_terms.sum(axis=-1)


def _check_objective_optimality(
    name, profile, params, prior, trials, rng, tolerance
) -> CheckReport:
    dist = core.gibbs_distribution(profile, params, prior)
    welfare = profile.welfare()
    best = _objective(dist.probs, welfare, params, prior)
    candidates = rng.dirichlet(np.ones(profile.range_size), size=trials)
    values = _objective(candidates, welfare, params, prior)
    worst = float(best - values.max())
    witness = None
    if worst < -tolerance:
        witness = "random point beats the Gibbs objective by %.3g" % (-worst)
    for r in range(profile.range_size):
        for sign in (+1.0, -1.0):
            pert = dist.probs.copy()
            pert[r] += sign * 0.01
            pert = _project_to_simplex(pert)
            margin = float(best - _objective(pert, welfare, params, prior))
            if margin < worst:
                worst = margin
                if margin < -tolerance:
                    witness = "perturbation %+0.2f at outcome %d beats Gibbs by %.3g" % (
                        sign * 0.01,
                        r,
                        -margin,
                    )
    return _report(name, worst, tolerance, witness, trials + 2 * profile.range_size)


def check_free_energy(
    profile: ValuationProfile,
    params: PrivacyParams,
    trials: int,
    rng: np.random.Generator,
    tolerance: float = 1e-9,
) -> CheckReport:
    """Entropy-regularized welfare optimality of the Gibbs distribution.

    The Gibbs objective must beat ``trials`` random simplex points and all
    +-0.01 local perturbations re-projected to the simplex.
    """
    return _check_objective_optimality("free-energy", profile, params, None, trials, rng, tolerance)


def check_kl_objective(
    profile: ValuationProfile,
    params: PrivacyParams,
    prior: PriorDistribution,
    trials: int,
    rng: np.random.Generator,
    tolerance: float = 1e-9,
) -> CheckReport:
    """Same optimality audit for the prior-weighted (KL-regularized) objective."""
    return _check_objective_optimality("kl", profile, params, prior, trials, rng, tolerance)


def check_cyclic_monotonicity(
    profile: ValuationProfile,
    params: PrivacyParams,
    cycle_length: int,
    trials: int,
    rng: np.random.Generator,
    tolerance: float = 1e-9,
) -> CheckReport:
    """Cyclic monotonicity of the allocation rule on random valuation cycles.

    For one agent and a cycle v^1 .. v^t (v^{t+1} = v^1) with the other
    agents fixed, sum_k E_{D_k}[v^k] >= sum_k E_{D_k}[v^{k+1}], where D_k is
    the allocation distribution when the agent reports v^k. This is the
    necessary and sufficient condition for an allocation rule to be
    supportable by some payment rule.
    """
    if cycle_length < 2:
        raise InputError("cycle_length must be at least 2")
    worst = np.inf
    witness = None
    for trial in range(trials):
        agent = int(rng.integers(profile.n))
        cycle = [rng.random(profile.range_size) for _ in range(cycle_length)]
        own = np.empty(cycle_length)
        cross = np.empty(cycle_length)
        for k in range(cycle_length):
            probs = core.gibbs_distribution(
                profile.replace_row(agent, cycle[k]), params
            ).probs
            own[k] = probs @ cycle[k]
            cross[k] = probs @ cycle[(k + 1) % cycle_length]
        margin = float(own.sum() - cross.sum())
        if margin < worst:
            worst = margin
            if margin < -tolerance:
                witness = "trial %d agent %d violates by %.3g" % (trial, agent, -margin)
    return _report("cyclic", worst, tolerance, witness, trials)
