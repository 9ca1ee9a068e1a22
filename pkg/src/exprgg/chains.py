"""Closed-form Markov chains of the evolving graph.

Two chains are derived from the per-gap threshold indicators {Y_l < r}:

* the two-state connectivity chain (connected / disconnected), and
* the component-count chain on {1, ..., n} (the count is one plus the
  number of inter-vertex gaps at or above the cutoff).

Everything reduces to three per-gap probabilities:

    q     = exp(-lam*r)                      stationary exceedance
    alpha = P(next < r | current < r)
    beta  = P(next < r | current > r) = (1-p)(1 - exp(-lam*r/(1-p)))

Each closed form ships with a brute-force subset-enumeration reference used
by the tests; the fast paths collapse the exponential sums into products.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateChainError
from .model import ModelParams
from .numerics import poisson_binomial_pmf, product_complement

CONNECTED, DISCONNECTED = 0, 1


def gap_step_probs(lam: float, r: float, p: float) -> tuple[float, float, float]:
    """One-step threshold probabilities (alpha, beta, q) for a single gap.

    alpha = 1 - (1-p) e^{-lam r} (1 - e^{-lam r/(1-p)}) / (1 - e^{-lam r})
    beta  = (1-p) (1 - e^{-lam r/(1-p)})
    q     = e^{-lam r}

    They satisfy the stationarity identity (1-q) alpha + q beta = 1 - q.
    """
    if lam <= 0.0 or r <= 0.0:
        raise ValueError("rate and cutoff must be positive")
    if not 0.0 <= p < 1.0:
        raise ValueError("memory parameter must satisfy 0 <= p < 1")
    x = lam * r
    q = float(np.exp(-x))
    one_minus_q = -float(np.expm1(-x))  # 1 - e^{-lam r}, accurate for small x
    inner = -float(np.expm1(-x / (1.0 - p)))  # 1 - e^{-lam r/(1-p)}
    beta = (1.0 - p) * inner
    alpha = 1.0 - beta * q / one_minus_q
    return alpha, beta, q


def _interior_probs(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    trip = np.array([gap_step_probs(lam, params.r, params.p) for lam in params.interior_rates])
    return trip[:, 0], trip[:, 1], trip[:, 2]


@dataclass(frozen=True)
class TwoStateChain:
    """2x2 connectivity transition matrix with its stationary distribution.

    Row/column order: index 0 = connected, index 1 = disconnected.
    """

    matrix: np.ndarray
    stationary: tuple[float, float]

    @property
    def p11(self) -> float:
        return float(self.matrix[CONNECTED, CONNECTED])

    @property
    def p21(self) -> float:
        return float(self.matrix[DISCONNECTED, CONNECTED])


def transition_matrix(params: ModelParams) -> TwoStateChain:
    """Connectivity chain in closed product form.

    p11 is the product of the alphas over interior gaps.  The reconnection
    probability collapses, via stationarity of the per-gap marginals, to

        p21 = P(connected at t+1) - P(connected at both t, t+1)
              -----------------------------------------------  ,
                        P(disconnected at t)

    i.e. [prod(1-q_l) - prod((1-q_l) alpha_l)] / [1 - prod(1-q_l)], an O(n)
    expression equal to the subset sum enumerated by
    transition_matrix_bruteforce.
    """
    alpha, _, q = _interior_probs(params)
    p11 = float(np.prod(alpha))
    conn = product_complement(q)  # stationary connectivity probability
    denom = 1.0 - conn
    if denom <= 0.0:
        raise DegenerateChainError(
            "disconnection is impossible at machine precision (all exceedance "
            "probabilities underflow); the connectivity chain is degenerate"
        )
    p21 = conn * (1.0 - p11) / denom
    matrix = np.array([[p11, 1.0 - p11], [p21, 1.0 - p21]])
    return TwoStateChain(matrix=matrix, stationary=stationary_from_entries(p11, p21))


def transition_matrix_bruteforce(params: ModelParams) -> TwoStateChain:
    """Reference evaluation of the reconnection probability.

    Enumerates every nonempty exceedance pattern A over the interior gaps:
    gaps in A reconnect with probability beta_l, gaps outside stay below the
    cutoff with probability alpha_l, and the pattern itself has stationary
    weight prod_{A} q_l prod_{not A} (1-q_l).  Exponential in n; test use only.
    """
    if params.n > 16:
        raise ValueError("subset enumeration is limited to n <= 16")
    alpha, beta, q = _interior_probs(params)
    m = params.n - 1
    indices = range(m)
    numer = 0.0
    weight = 0.0
    for size in range(1, m + 1):
        for subset in combinations(indices, size):
            mask = np.zeros(m, dtype=bool)
            mask[list(subset)] = True
            p_pattern = np.prod(np.where(mask, q, 1.0 - q))
            p_reconnect = np.prod(np.where(mask, beta, alpha))
            numer += p_pattern * p_reconnect
            weight += p_pattern
    if weight <= 0.0:
        raise DegenerateChainError("no disconnected pattern has positive probability")
    p11 = float(np.prod(alpha))
    p21 = numer / weight
    matrix = np.array([[p11, 1.0 - p11], [p21, 1.0 - p21]])
    return TwoStateChain(matrix=matrix, stationary=stationary_from_entries(p11, p21))


def stationary_from_entries(p11: float, p21: float) -> tuple[float, float]:
    """Stationary pair of the two-state chain from its first-column entries.

    Written via mean recurrence times:

        pi_1 = (1-p22)^2 / (p11 (1-p22)^2 + p21 p12 (2-p22))

    and symmetrically for pi_2; algebraically equal to
    (p21/(p12+p21), p12/(p12+p21)).
    """
    p12 = 1.0 - p11
    p22 = 1.0 - p21
    if p12 <= 0.0 or p21 <= 0.0:
        raise DegenerateChainError("chain is reducible; stationary distribution undefined")
    pi1 = p21**2 / (p11 * p21**2 + p21 * p12 * (2.0 - p22))
    pi2 = p12**2 / (p22 * p12**2 + p12 * p21 * (2.0 - p11))
    return float(pi1), float(pi2)


def stationary(chain: TwoStateChain) -> tuple[float, float]:
    """Stationary distribution of a connectivity chain."""
    return stationary_from_entries(chain.p11, chain.p21)


def limit_diagnostics(lam: float, r: float, p: float, n_grid) -> list[tuple[int, float]]:
    """Stationary connectivity probability pi_1(n) on a grid of sizes.

    Homogeneous rates only; pi_1 decreases toward 0 as n grows.
    """
    rows = []
    for n in n_grid:
        params = ModelParams.homogeneous(int(n), p, lam, r)
        chain = transition_matrix(params)
        rows.append((int(n), chain.stationary[0]))
    return rows


@dataclass(frozen=True)
class ComponentChain:
    """Component-count chain: n x n transition matrix plus occupancy.

    matrix[i-1, j-1] = P(count j at t+1 | count i at t).  occupancy[i-1] is
    the stationary probability of count i (a shifted Poisson binomial over
    the gap exceedances).  Rows whose occupancy is zero at machine precision
    are unreachable; they are left as zeros and flagged in row_defined.
    """

    matrix: np.ndarray
    occupancy: np.ndarray
    row_defined: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def component_occupancy(params: ModelParams) -> np.ndarray:
    """Stationary law of the component count: P(count = i), i = 1..n."""
    _, _, q = _interior_probs(params)
    return poisson_binomial_pmf(q)


def _joint_factors(params: ModelParams) -> np.ndarray:
    """Per-gap stationary joint of (current exceeds, next exceeds).

    Rows are gaps; columns are (stay-below, below-to-above, above-to-below,
    stay-above).  Both marginals equal (1-q, q), and the below-to-above and
    above-to-below entries coincide (the indicator chain is reversible).
    """
    alpha, beta, q = _interior_probs(params)
    return np.column_stack(
        [(1.0 - q) * alpha, (1.0 - q) * (1.0 - alpha), q * beta, q * (1.0 - beta)]
    )


def component_transition_matrix(params: ModelParams) -> ComponentChain:
    """Component-count chain via dynamic programming.

    The joint law P(count_t = i, count_{t+1} = j) is the coefficient of
    x^{i-1} y^{j-1} in the product over gaps of

        J_cc + J_co y + J_oc x + J_oo x y

    where J is the per-gap joint over the threshold indicators at t and t+1.
    The DP updates an (i, j) coefficient table gap by gap in O(n^3) total;
    rows are then normalized by the occupancy.
    """
    n = params.n
    factors = _joint_factors(params)
    joint = np.zeros((n, n))
    joint[0, 0] = 1.0
    for cc, co, oc, oo in factors:
        new = cc * joint
        new[:, 1:] += co * joint[:, :-1]
        new[1:, :] += oc * joint[:-1, :]
        new[1:, 1:] += oo * joint[:-1, :-1]
        joint = new
    occupancy = joint.sum(axis=1)
    matrix = np.zeros((n, n))
    row_defined = occupancy > 0.0
    matrix[row_defined] = joint[row_defined] / occupancy[row_defined, None]
    return ComponentChain(matrix=matrix, occupancy=occupancy, row_defined=row_defined)


def component_transition_bruteforce(params: ModelParams) -> ComponentChain:
    """Reference: enumerate all pairs of exceedance patterns (A, B).

    Each pair contributes prod_l J_l(state pair) to the joint law of
    (count_t, count_{t+1}).  Cost 4^{n-1}; test use only.
    """
    if params.n > 12:
        raise ValueError("double subset enumeration is limited to n <= 12")
    n = params.n
    m = n - 1
    factors = _joint_factors(params)
    joint = np.zeros((n, n))
    for a_bits in range(1 << m):
        for b_bits in range(1 << m):
            prob = 1.0
            for l in range(m):
                a = (a_bits >> l) & 1
                b = (b_bits >> l) & 1
                prob *= factors[l, 2 * a + b]
            i = bin(a_bits).count("1")
            j = bin(b_bits).count("1")
            joint[i, j] += prob
    occupancy = joint.sum(axis=1)
    matrix = np.zeros((n, n))
    row_defined = occupancy > 0.0
    matrix[row_defined] = joint[row_defined] / occupancy[row_defined, None]
    return ComponentChain(matrix=matrix, occupancy=occupancy, row_defined=row_defined)


def component_stationary(chain: ComponentChain) -> np.ndarray:
    """Solve pi P = pi on the reachable states of a component chain.

    Returns a full-length vector with zeros on unreachable states.  Raises
    DegenerateChainError when the reachable block is not irreducible enough
    for a unique solution.
    """
    defined = chain.row_defined
    sub = chain.matrix[np.ix_(defined, defined)]
    k = sub.shape[0]
    a = np.vstack([sub.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    sol, residual, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < k:
        raise DegenerateChainError(
            "component chain is reducible on its reachable states; "
            "stationary distribution restricted or undefined"
        )
    if np.any(sol < -1e-9):
        raise DegenerateChainError("stationary solve produced negative mass")
    full = np.zeros(chain.n)
    full[defined] = np.clip(sol, 0.0, None)
    full /= full.sum()
    return full
