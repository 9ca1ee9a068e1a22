"""Model parameters, gap state, and seeded random streams.

The process lives on the half line: n vertices X_1 <= ... <= X_n, described
by the gap vector (Y_0, ..., Y_{n-1}) where Y_0 is the distance from the
origin to X_1 and Y_l = X_{l+1} - X_l for l >= 1.  Each gap carries its own
exponential rate; the memory parameter p in [0, 1) controls how much of the
current gap survives into the next time step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Parameter tuple (n, p, rates, r) for the gap process.

    n      -- vertex count, at least 2
    p      -- memory parameter, 0 <= p < 1
    rates  -- per-gap exponential rates (lambda_0 ... lambda_{n-1}), all > 0
    r      -- connection cutoff distance, > 0
    """

    n: int
    p: float
    rates: tuple[float, ...]
    r: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"vertex count must be an integer >= 2, got {self.n!r}")
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"memory parameter must satisfy 0 <= p < 1, got {self.p}")
        if self.r <= 0.0:
            raise ValueError(f"cutoff distance must be positive, got {self.r}")
        rates = tuple(float(x) for x in self.rates)
        if len(rates) != self.n:
            raise ValueError(f"expected {self.n} rates, got {len(rates)}")
        if any(x <= 0.0 for x in rates):
            raise ValueError("all rates must be positive")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "r", float(self.r))

    @classmethod
    def homogeneous(cls, n: int, p: float, lam: float, r: float) -> "ModelParams":
        """All n gaps share the rate lam."""
        return cls(n=n, p=p, rates=(float(lam),) * n, r=r)

    @classmethod
    def from_rate_spec(cls, n: int, p: float, spec: str | float, r: float) -> "ModelParams":
        """Build params from a scalar rate or a piecewise "count:rate,..." spec.

        The piecewise counts must cover exactly n gaps, e.g. for n = 60 the
        spec "11:1,49:2" gives rate 1 to gaps 0..10 and rate 2 to gaps 11..59.
        """
        return cls(n=n, p=p, rates=parse_rate_spec(n, spec), r=r)

    @property
    def interior_rates(self) -> tuple[float, ...]:
        """Rates of the inter-vertex gaps Y_1..Y_{n-1} (Y_0 excluded)."""
        return self.rates[1:]

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.rates)) == 1


def parse_rate_spec(n: int, spec: str | float) -> tuple[float, ...]:
    """Parse a scalar or "count:rate,count:rate" string into n per-gap rates."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return (float(spec),) * n
    text = str(spec).strip()
    if ":" not in text:
        return (float(text),) * n
    rates: list[float] = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        count_s, _, rate_s = piece.partition(":")
        count = int(count_s)
        if count <= 0:
            raise ValueError(f"piece counts must be positive, got {piece!r}")
        rates.extend([float(rate_s)] * count)
    if len(rates) != n:
        raise ValueError(f"rate spec covers {len(rates)} gaps, expected {n}")
    return tuple(rates)


@dataclass(frozen=True, eq=False)
class GapState:
    """One time slice of the gap vector (Y_0, ..., Y_{n-1})."""

    gaps: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.gaps, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("gap state needs a 1-d vector of at least 2 gaps")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("gaps must be finite and nonnegative")
        object.__setattr__(self, "gaps", arr)

    @property
    def n(self) -> int:
        return self.gaps.size


@dataclass
class RandomStream:
    """Seeded, replicable source of uniform draws.

    A (seed, stream_id) pair fully determines the draw sequence; distinct
    stream ids derived from one seed give statistically independent streams,
    which is the contract parallel replications rely on.
    """

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            self._generator = np.random.Generator(np.random.PCG64(ss))
        return self._generator

    def substream(self, stream_id: int) -> "RandomStream":
        """Independent stream derived from the same seed."""
        return RandomStream(seed=self.seed, stream_id=stream_id)

    def uniform(self, shape) -> np.ndarray:
        """Uniform draws in [0, 1), advancing the stream."""
        return self.generator.random(shape)


def exponential_from_uniform(u: np.ndarray, rate) -> np.ndarray:
    """Inverse-CDF transform: -log(1-u)/rate, elementwise.

    log1p keeps accuracy for small u; u in [0, 1) never hits the pole.
    """
    return -np.log1p(-np.asarray(u)) / rate
