"""Small numerical helpers shared across the analytic modules."""

from __future__ import annotations

import numpy as np
from scipy import special


def poisson_binomial_pmf(probs: np.ndarray) -> np.ndarray:
    """pmf of a sum of independent Bernoulli(probs[i]) indicators.

    Dynamic program over the generating function prod_i (1 - p_i + p_i x);
    returns an array of length len(probs) + 1.
    """
    probs = np.asarray(probs, dtype=float)
    pmf = np.array([1.0])
    for p in probs:
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] = pmf * (1.0 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


def log_product_complement(qs: np.ndarray) -> float:
    """log of prod (1 - q_l), accumulated in the log domain.

    Safe for thousands of factors where the plain product would underflow.
    Returns -inf when any q_l == 1.
    """
    qs = np.asarray(qs, dtype=float)
    if np.any(qs >= 1.0):
        return -np.inf
    return float(np.sum(np.log1p(-qs)))


def product_complement(qs: np.ndarray) -> float:
    """prod (1 - q_l) via log-domain accumulation."""
    return float(np.exp(log_product_complement(qs)))


def exponential_sum_cdf(m: int, rate: float, x: float) -> float:
    """P(sum of m iid exponentials with the given rate <= x).

    m = 0 gives the empty sum, i.e. probability 1 for x >= 0.  Uses the
    regularized lower incomplete gamma function.
    """
    if m == 0:
        return 1.0 if x >= 0.0 else 0.0
    if x <= 0.0:
        return 0.0
    return float(special.gammainc(m, rate * x))


def ks_critical_value(n_samples: int, alpha: float = 0.001) -> float:
    """Asymptotic two-sided Kolmogorov-Smirnov critical distance.

    From P(D_n > x) ~ 2 exp(-2 n x^2): x_alpha = sqrt(log(2/alpha) / (2 n)).
    """
    return float(np.sqrt(np.log(2.0 / alpha) / (2.0 * n_samples)))


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Two-sided KS distance between an empirical sample and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.asarray([cdf(v) for v in x], dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))
