"""Gap-process simulation and graph observables.

Evolution rule, per gap and per step: with probability p the current gap
survives and the innovation is added on top; with probability 1-p the gap is
replaced by the innovation alone.  Innovations are (1-p) times an exponential
of the gap's rate, which keeps every marginal exponential and gives lag-j
autocorrelation p^j.

Draw order is fixed for reproducibility: gaps are visited in order
l = 0..n-1, and each gap consumes two uniforms per step (first the survival
coin, then the innovation).
"""

from __future__ import annotations

import numpy as np

from .model import GapState, ModelParams, RandomStream, exponential_from_uniform


def sample_stationary(params: ModelParams, rng: RandomStream) -> GapState:
    """Draw each gap independently from its stationary exponential law."""
    u = rng.uniform(params.n)
    gaps = exponential_from_uniform(u, np.asarray(params.rates))
    return GapState(gaps)


def step(state: GapState, params: ModelParams, rng: RandomStream) -> GapState:
    """Advance the gap vector one time step."""
    if state.n != params.n:
        raise ValueError(f"state has {state.n} gaps, params expect {params.n}")
    u = rng.uniform((params.n, 2))
    rates = np.asarray(params.rates)
    survive = u[:, 0] < params.p
    innov = (1.0 - params.p) * exponential_from_uniform(u[:, 1], rates)
    gaps = innov + np.where(survive, state.gaps, 0.0)
    return GapState(gaps)


def positions(state: GapState) -> np.ndarray:
    """Vertex positions X_1..X_n as prefix sums of the gaps."""
    return np.cumsum(state.gaps)


def is_connected(state: GapState, r: float) -> bool:
    """True iff every inter-vertex gap Y_1..Y_{n-1} is strictly below r.

    Y_0 is the offset from the origin, not an inter-vertex gap, so it never
    affects connectivity.  Ties Y_l == r count as disconnected.
    """
    return bool(np.all(state.gaps[1:] < r))


def component_count(state: GapState, r: float) -> int:
    """Number of connected components: one plus the inter-vertex gaps >= r."""
    return 1 + int(np.count_nonzero(state.gaps[1:] >= r))


def degree(state: GapState, r: float, i: int) -> int:
    """Degree of vertex i (1-based): neighbors strictly within distance r.

    Scans gaps outward from the vertex; equivalent to counting pairwise
    distances below r.
    """
    n = state.n
    if not 1 <= i <= n:
        raise ValueError(f"vertex index must be in 1..{n}, got {i}")
    gaps = state.gaps
    deg = 0
    acc = 0.0
    for l in range(i - 1, 0, -1):  # walk left through Y_{i-1}, ..., Y_1
        acc += gaps[l]
        if acc < r:
            deg += 1
        else:
            break
    acc = 0.0
    for l in range(i, n):  # walk right through Y_i, ..., Y_{n-1}
        acc += gaps[l]
        if acc < r:
            deg += 1
        else:
            break
    return deg


def extreme_distances(state: GapState) -> tuple[float, float]:
    """(c, b): the max inter-vertex gap and the largest nearest-neighbor distance.

    c is the smallest cutoff that would make the snapshot connected.  b is the
    max over vertices of the distance to the nearest other vertex: edge
    vertices see their single adjacent gap, interior vertices the min of
    their two adjacent gaps.  b <= c always.
    """
    gaps = state.gaps[1:]
    c = float(np.max(gaps))
    if gaps.size == 1:
        return c, c
    pair_mins = np.minimum(gaps[:-1], gaps[1:])
    b = float(max(gaps[0], gaps[-1], np.max(pair_mins)))
    return c, b
