"""Disconnection hitting time of the connectivity chain.

Starting from a stationary snapshot conditioned on being connected, T is the
first step at which some inter-vertex gap reaches the cutoff.  Gaps are
independent, so the survival function factorizes:

    P(T > k) = prod over interior gaps of S_l(k),

where S_l(k) is the probability that gap l stays below r for k consecutive
steps given it starts below r.  S_l(k) is NOT generally alpha_l^k for k >= 2:
the threshold indicator alone is not Markov once the memory parameter is
positive.  markov_approx_tail exposes the one-step-chain approximation so the
gap between the two can be reported.

Two independent evaluations of S_l(k) are provided:

* hitting_time_recursion -- enumerates the survival coin vectors xi in
  {0,1}^k and evaluates the nested innovation integrals by backward
  propagation of the conditional survival function, represented on a
  Chebyshev grid over [0, r].  The final average over the truncated
  exponential initial gap uses adaptive quadrature.

* hitting_time_oracle -- enumerates the same coin vectors but evaluates each
  conditional probability in closed run-decomposition form: conditioned on
  the coins, gap values rise monotonically within each accumulation run, so
  each run's constraints reduce to its final sum staying below r.  A fresh
  run of m innovations contributes the CDF at r of a sum of m exponentials
  (regularized incomplete gamma); the initial run adds the truncated
  exponential starting level and needs one one-dimensional quadrature.

Both cost O(2^k) at step count k, so the horizon is capped and the curve is
cut off early once the assembled tail falls below the tail tolerance.  Gaps
sharing a rate are evaluated once and raised to their multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy import integrate, special

from .errors import QuadratureError
from .model import ModelParams
from .chains import transition_matrix

MAX_K = 24
TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HittingTimeDist:
    """Survival curve P(T > k), k = 0..truncation_k, with an expectation bracket.

    The expectation equals the infinite sum of the tail; the bracket pairs the
    truncated partial sum with the partial sum plus a geometric extrapolation
    of the remainder from the last observed tail ratio.
    """

    tail: np.ndarray
    expectation_bracket: tuple[float, float]
    truncation_k: int

    @property
    def converged(self) -> bool:
        lo, hi = self.expectation_bracket
        return np.isfinite(hi) and (hi - lo) <= 1e-6


def _validate_k(k_max: int) -> None:
    if not 1 <= k_max <= MAX_K:
        raise ValueError(f"step horizon must be in 1..{MAX_K}, got {k_max}")


def _assemble(gap_step_fns: dict[float, object], counts: dict[float, int],
              k_max: int, tail_tol: float) -> HittingTimeDist:
    """Walk k upward, multiplying per-gap survivals, stopping at the tolerance."""
    tail = [1.0]
    for k in range(1, k_max + 1):
        value = 1.0
        for rate, fn in gap_step_fns.items():
            value *= fn(k) ** counts[rate]
        tail.append(value)
        if value < tail_tol:
            break
    tail = np.asarray(tail)
    cut = tail.size - 1
    lower = float(np.sum(tail))
    last = tail[-1]
    if last <= 0.0:
        upper = lower
    elif cut >= 1 and tail[-2] > 0.0 and tail[-1] < tail[-2]:
        ratio = tail[-1] / tail[-2]
        upper = lower + last * ratio / (1.0 - ratio)
    else:
        upper = np.inf
    return HittingTimeDist(tail=tail, expectation_bracket=(lower, float(upper)),
                           truncation_k=cut)


def _rate_multiplicities(params: ModelParams) -> dict[float, int]:
    counts: dict[float, int] = {}
    for lam in params.interior_rates:
        counts[lam] = counts.get(lam, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# Backward nested-integral evaluation on a Chebyshev grid
# ---------------------------------------------------------------------------

class _ChebGrid:
    """Chebyshev representation of functions on [0, r] plus the propagation rule.

    Holds the node-to-coefficient transform and a fixed Gauss-Legendre layout
    for the integral operator (B f)(u) = int_u^r lt*exp(-lt (z-u)) f(z) dz,
    which advances the conditional survival function one accumulation step.
    """

    def __init__(self, r: float, lam_tilde: float, degree: int, fit_tol: float):
        self.r = r
        self.lt = lam_tilde
        self.degree = degree
        self.fit_tol = fit_tol
        i = np.arange(degree + 1)
        theta = (2 * i + 1) * np.pi / (2 * (degree + 1))
        self.t_nodes = np.cos(theta)                      # reference nodes in (-1, 1)
        self.u_nodes = r * (self.t_nodes + 1.0) / 2.0     # mapped to (0, r)
        self.transform = (2.0 / (degree + 1)) * np.cos(i[:, None] * theta[None, :])
        self.transform[0, :] /= 2.0
        self.sign0 = (-1.0) ** i                          # T_j(-1), evaluates at u = 0
        # Gauss-Legendre layout for the keep-step integral at every node,
        # condensed with the node->coefficient transform into one matrix so a
        # propagation is a single matvec on the coefficient vector.
        m = degree + 16
        xg, wg = np.polynomial.legendre.leggauss(m)
        half = (r - self.u_nodes)[:, None] / 2.0
        z_eval = self.u_nodes[:, None] + half * (xg[None, :] + 1.0)
        t_eval = 2.0 * z_eval / r - 1.0
        weights = wg[None, :] * half * lam_tilde * np.exp(
            -lam_tilde * (z_eval - self.u_nodes[:, None])
        )
        vander = cheb.chebvander(t_eval.reshape(-1), degree)
        vander = vander.reshape(degree + 1, m, degree + 1)
        keep_values = np.einsum("igj,ig->ij", vander, weights)
        self.keep_op = self.transform @ keep_values
        self.terminal_coeffs = self.coeffs(self.terminal())

    def coeffs(self, values: np.ndarray) -> np.ndarray:
        return self.transform @ values

    def check(self, coeffs: np.ndarray, gap_index: int, step: int) -> None:
        if np.max(np.abs(coeffs[-3:])) > 50.0 * self.fit_tol:
            raise QuadratureError(
                f"Chebyshev tail {np.max(np.abs(coeffs[-3:])):.2e} exceeds the "
                f"requested tolerance at gap {gap_index}, step {step}; "
                "increase quad_tol or reduce the horizon",
                gap_index=gap_index, step=step,
            )

    def terminal(self) -> np.ndarray:
        """Values of u -> P(one innovation stays below r - u)."""
        return -np.expm1(-self.lt * (self.r - self.u_nodes))

    def propagate_keep(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients after the accumulation-step operator (coin = 1)."""
        return self.keep_op @ coeffs

    def propagate_reset(self, coeffs: np.ndarray) -> np.ndarray:
        """Coin = 0: the next value is a fresh innovation; state resets to zero."""
        return self.value_at_zero(coeffs) * self.terminal_coeffs

    def value_at_zero(self, coeffs: np.ndarray) -> float:
        return float(self.sign0 @ coeffs)


def _pick_degree(r: float, lam_tilde: float, fit_tol: float) -> int:
    degree = 48
    while degree <= 1024:
        i = np.arange(degree + 1)
        theta = (2 * i + 1) * np.pi / (2 * (degree + 1))
        u = r * (np.cos(theta) + 1.0) / 2.0
        vals = -np.expm1(-lam_tilde * (r - u))
        transform = (2.0 / (degree + 1)) * np.cos(i[:, None] * theta[None, :])
        transform[0, :] /= 2.0
        c = transform @ vals
        if np.max(np.abs(c[-3:])) < fit_tol:
            return degree
        degree *= 2
    raise QuadratureError(
        f"no Chebyshev degree up to 1024 reaches tolerance {fit_tol:.1e} "
        f"for lambda*r/(1-p) = {lam_tilde * r:.3g}"
    )


class _RecursionGap:
    """S(k) for one gap rate via coin enumeration + nested integrals."""

    def __init__(self, lam: float, p: float, r: float, quad_tol: float, gap_index: int):
        self.lam = lam
        self.p = p
        self.r = r
        self.quad_tol = quad_tol
        self.gap_index = gap_index
        lt = lam / (1.0 - p)
        fit_tol = max(quad_tol / 10.0, 1e-14)
        self.grid = _ChebGrid(r, lt, _pick_degree(r, lt, fit_tol), fit_tol)
        self.norm = -np.expm1(-lam * r)
        self._cache: dict[int, float] = {}
        self._start_weights = self._build_start_weights() if p > 0.0 else None

    def _build_start_weights(self) -> np.ndarray:
        """Adaptive quadrature of the truncated-exp density against each basis
        polynomial, so averaging over the initial gap is a dot product."""
        lam, r = self.lam, self.r
        degree = self.grid.degree
        out = np.empty(degree + 1)
        per_term_tol = self.quad_tol / (degree + 1)
        for j in range(degree + 1):
            def integrand(y, j=j):
                t = min(1.0, max(-1.0, 2.0 * y / r - 1.0))
                return lam * np.exp(-lam * y) / self.norm * np.cos(j * np.arccos(t))
            val, err = integrate.quad(integrand, 0.0, r, epsabs=per_term_tol,
                                      epsrel=0.0, limit=300)
            if err > 10.0 * per_term_tol + 1e-14:
                raise QuadratureError(
                    f"initial-gap average reached error {err:.2e} > tolerance at "
                    f"gap {self.gap_index}, basis term {j}",
                    gap_index=self.gap_index, step=j)
            out[j] = val
        return out

    def __call__(self, k: int) -> float:
        if k in self._cache:
            return self._cache[k]
        grid, p = self.grid, self.p
        total = 0.0
        # Depth-first over the coins xi_1..xi_{k-1}; xi_0 only selects whether
        # the initial gap feeds the first step, handled at the leaves.
        stack = [(k - 1, 1.0, grid.terminal_coeffs)]
        while stack:
            level, weight, coeffs = stack.pop()
            if level == 0:
                leaf = (1.0 - p) * grid.value_at_zero(coeffs)
                if p > 0.0:
                    leaf += p * float(self._start_weights @ coeffs)
                total += weight * leaf
                continue
            if p > 0.0:
                c1 = grid.propagate_keep(coeffs)
                grid.check(c1, self.gap_index, k)
                stack.append((level - 1, weight * p, c1))
            stack.append((level - 1, weight * (1.0 - p), grid.propagate_reset(coeffs)))
        self._cache[k] = total
        return total


def hitting_time_recursion(params: ModelParams, k_max: int,
                           quad_tol: float = 1e-10,
                           tail_tol: float = TAIL_TOLERANCE) -> HittingTimeDist:
    """Survival curve of the disconnection time via nested-integral evaluation.

    For each interior gap and each k, enumerates the survival coin vectors
    with weights p^ones (1-p)^zeros and integrates the innovation constraints
    backward step by step.
    """
    _validate_k(k_max)
    counts = _rate_multiplicities(params)
    fns = {lam: _RecursionGap(lam, params.p, params.r, quad_tol, idx)
           for idx, lam in enumerate(counts)}
    return _assemble(fns, counts, k_max, tail_tol)


# ---------------------------------------------------------------------------
# Run-decomposition reference
# ---------------------------------------------------------------------------

class _OracleGap:
    """S(k) for one gap rate in closed run-decomposition form."""

    def __init__(self, lam: float, p: float, r: float, quad_tol: float, gap_index: int):
        self.lam = lam
        self.p = p
        self.r = r
        self.lt = lam / (1.0 - p)
        self.quad_tol = quad_tol
        self.gap_index = gap_index
        self.norm = -np.expm1(-lam * r)
        self._fresh: dict[int, float] = {}
        self._initial: dict[int, float] = {}
        self._cache: dict[int, float] = {}

    def fresh_run(self, m: int) -> float:
        """P(sum of m innovations < r): regularized lower incomplete gamma."""
        if m not in self._fresh:
            self._fresh[m] = float(special.gammainc(m, self.lt * self.r)) if m else 1.0
        return self._fresh[m]

    def initial_run(self, m: int) -> float:
        """P(truncated-exp start + m innovations < r)."""
        if m == 0:
            return 1.0
        if m in self._initial:
            return self._initial[m]
        lam, lt, r = self.lam, self.lt, self.r

        def integrand(y):
            return lam * np.exp(-lam * y) / self.norm * special.gammainc(m, lt * (r - y))

        val, err = integrate.quad(integrand, 0.0, r, epsabs=self.quad_tol,
                                  epsrel=0.0, limit=200)
        if err > 10.0 * self.quad_tol + 1e-13:
            raise QuadratureError(
                f"initial-run quadrature error {err:.2e} at gap {self.gap_index}, "
                f"run length {m}", gap_index=self.gap_index, step=m)
        self._initial[m] = val
        return val

    def __call__(self, k: int) -> float:
        if k in self._cache:
            return self._cache[k]
        p = self.p
        total = 0.0
        for bits in range(1 << k):
            xi = [(bits >> s) & 1 for s in range(k)]
            ones = sum(xi)
            weight = p**ones * (1.0 - p) ** (k - ones)
            if weight == 0.0:
                continue
            zeros = [s for s, v in enumerate(xi) if v == 0]
            if not zeros:
                total += weight * self.initial_run(k)
                continue
            value = self.initial_run(zeros[0])
            bounds = zeros + [k]
            for a, b in zip(bounds[:-1], bounds[1:]):
                value *= self.fresh_run(b - a)
            total += weight * value
        self._cache[k] = total
        return total


def hitting_time_oracle(params: ModelParams, k_max: int,
                        quad_tol: float = 1e-10,
                        tail_tol: float = TAIL_TOLERANCE) -> HittingTimeDist:
    """Independent survival curve via the run-decomposition closed form."""
    _validate_k(k_max)
    counts = _rate_multiplicities(params)
    fns = {lam: _OracleGap(lam, params.p, params.r, quad_tol, idx)
           for idx, lam in enumerate(counts)}
    return _assemble(fns, counts, k_max, tail_tol)


def markov_approx_tail(params: ModelParams, k_max: int) -> np.ndarray:
    """Tail of the one-step-chain approximation: p11^k, k = 0..k_max.

    Exact only for p = 0; for p > 0 it differs from the true survival curve
    from k = 2 on, which is worth reporting next to the exact tail.
    """
    _validate_k(k_max)
    p11 = transition_matrix(params).p11
    return p11 ** np.arange(k_max + 1)
