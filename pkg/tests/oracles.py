"""Independent brute-force oracles used by the test suite.

These deliberately avoid the library's log-domain code paths: direct
exponential sums, full permutation enumeration, and explicit spanning-tree
enumeration. They only work at small sizes, which is the point.
"""

import itertools
import math

import numpy as np


def direct_gibbs(values, epsilon, mu=None):
    """Outcome probabilities by direct summation, no log-domain tricks."""
    values = np.asarray(values, dtype=float)
    welfare = values.sum(axis=0)
    weights = [math.exp(0.5 * epsilon * w) for w in welfare]
    if mu is not None:
        weights = [m * w for m, w in zip(mu, weights)]
    total = math.fsum(weights)
    return np.array([w / total for w in weights])


def direct_log_partition(values, epsilon, exclude=None, mu=None):
    values = np.asarray(values, dtype=float)
    if exclude is not None:
        values = np.delete(values, exclude, axis=0)
    welfare = values.sum(axis=0) if values.shape[0] else np.zeros(values.shape[1])
    weights = [math.exp(0.5 * epsilon * w) for w in welfare]
    if mu is not None:
        weights = [m * w for m, w in zip(mu, weights)]
    return math.log(math.fsum(weights))


def direct_entropy(probs):
    return -math.fsum(p * math.log(p) for p in probs if p > 0.0)


def direct_payment(values, epsilon, agent):
    """Term-by-term evaluation of the price formula by direct summation."""
    values = np.asarray(values, dtype=float)
    probs = direct_gibbs(values, epsilon)
    others = values.sum(axis=0) - values[agent]
    expected_others = math.fsum(p * o for p, o in zip(probs, others))
    entropy = direct_entropy(probs)
    lz_minus = direct_log_partition(values, epsilon, exclude=agent)
    return -expected_others - (2.0 / epsilon) * entropy + (2.0 / epsilon) * lz_minus


def brute_log_permanent(log_entries):
    """Permanent by full permutation enumeration, in ordinary arithmetic."""
    a = np.exp(np.asarray(log_entries, dtype=float))
    n = a.shape[0]
    total = math.fsum(
        math.prod(a[i, p[i]] for i in range(n))
        for p in itertools.permutations(range(n))
    )
    return math.log(total)


def brute_matching_gibbs(values, epsilon):
    """(permutations, probabilities) of the Gibbs law over assignments."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    perms = list(itertools.permutations(range(n)))
    weights = [
        math.exp(0.5 * epsilon * math.fsum(values[i, p[i]] for i in range(n)))
        for p in perms
    ]
    total = math.fsum(weights)
    return perms, np.array([w / total for w in weights])


def brute_max_matching(values):
    """Maximum-weight assignment value by full enumeration."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    return max(
        math.fsum(values[i, p[i]] for i in range(n))
        for p in itertools.permutations(range(n))
    )


def spanning_trees(k, edges):
    """All spanning trees (as sorted edge-index tuples) of a small graph."""
    trees = []
    for combo in itertools.combinations(range(len(edges)), k - 1):
        parent = list(range(k))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for idx in combo:
            u, v = edges[idx]
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            trees.append(tuple(combo))
    return trees


def brute_tree_gibbs(k, edges, costs, epsilon):
    """(trees, probabilities) of the Gibbs law over spanning trees."""
    trees = spanning_trees(k, edges)
    weights = [
        math.exp(-0.5 * epsilon * math.fsum(costs[e] for e in tree)) for tree in trees
    ]
    total = math.fsum(weights)
    return trees, np.array([w / total for w in weights])


def brute_min_tree_cost(k, edges, costs):
    trees = spanning_trees(k, edges)
    return min(math.fsum(costs[e] for e in t) for t in trees)
