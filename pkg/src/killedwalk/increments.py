"""Increment distributions for mean-zero random walks.

Two families are supported: integer-lattice distributions given by explicit
atoms, and three named continuous families (gaussian, laplace,
uniform-symmetric) with closed-form moments.  All values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "InvalidDistributionError",
    "LatticeIncrement",
    "ContinuousIncrement",
    "IncrementModel",
    "MomentSummary",
    "Peakedness",
    "moments",
    "charfn",
    "span",
    "peakedness_V",
    "parse_increment",
    "ssrw",
    "lazy_walk",
    "skew_walk",
]

PROB_TOL = 1e-12
MEAN_TOL = 1e-12

CONTINUOUS_FAMILIES = ("gaussian", "laplace", "uniform-symmetric")

# Grid size for the peakedness supremum; interior structure of log|phi| is
# smooth so 2^16 points plus local refinement resolve the argmax.
PEAKEDNESS_GRID = 1 << 16
# Below this t the ratio is evaluated by its t->0 limit (-sigma^2): closer to
# the edge, rounding of |phi|^2 near 1 injects noise ~eps/t^2 into the ratio.
_T_EDGE = 1e-3


class InvalidDistributionError(ValueError):
    """Raised when a step distribution violates a structural invariant."""


@dataclass(frozen=True)
class MomentSummary:
    """First three absolute moments of a validated increment distribution."""

    mean: float
    sigma2: float
    beta3: float
    lyapunov: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class Peakedness:
    """Characteristic-function peakedness -sup log|phi(t)| / (1 - cos t).

    ``t_at_sup`` is where the supremum over (0, 2*pi) was located; 0.0 marks
    the removable singularity at the interval edge, where the ratio tends to
    -sigma^2.  ``grid_points`` records the resolution of the search grid.
    """

    V: float
    t_at_sup: float
    grid_points: int


@dataclass(frozen=True)
class LatticeIncrement:
    """Integer-valued step distribution with zero mean.

    Atoms with zero probability are dropped at construction so that the
    lattice span and the characteristic function reflect actual support.
    """

    offsets: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.offsets) != len(self.probs):
            raise InvalidDistributionError("offsets and probs must have equal length")
        pairs = []
        for k, p in zip(self.offsets, self.probs):
            if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
                raise InvalidDistributionError(f"lattice offset {k!r} is not an integer")
            p = float(p)
            if p < 0.0:
                raise InvalidDistributionError(f"negative probability {p} at offset {k}")
            if p > 0.0:
                pairs.append((int(k), p))
        if len(pairs) < 2:
            raise InvalidDistributionError("support must contain at least two atoms")
        pairs.sort()
        offs = tuple(k for k, _ in pairs)
        if len(set(offs)) != len(offs):
            raise InvalidDistributionError("duplicate offsets in support")
        ps = tuple(p for _, p in pairs)
        total = math.fsum(ps)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        mean = math.fsum(k * p for k, p in pairs)
        if abs(mean) > MEAN_TOL:
            raise InvalidDistributionError(
                f"mean {mean!r} exceeds tolerance {MEAN_TOL}; re-center the distribution explicitly"
            )
        if offs[0] >= 0 or offs[-1] <= 0:
            raise InvalidDistributionError(
                "support needs at least one negative and one positive offset"
            )
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "probs", ps)

    @property
    def min_offset(self) -> int:
        return self.offsets[0]

    @property
    def max_offset(self) -> int:
        return self.offsets[-1]

    @property
    def down_reach(self) -> int:
        """Largest single-step decrease; bounds the overshoot below zero."""
        return -self.offsets[0]

    def prob_of(self, offset: int) -> float:
        for k, p in zip(self.offsets, self.probs):
            if k == offset:
                return p
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return np.asarray(self.offsets, dtype=np.int64)[idx]

    def to_dict(self) -> dict:
        return {"offsets": list(self.offsets), "probs": list(self.probs)}


@dataclass(frozen=True)
class ContinuousIncrement:
    """Named continuous zero-mean family with closed-form moments."""

    family: str
    scale: float

    def __post_init__(self):
        if self.family not in CONTINUOUS_FAMILIES:
            raise InvalidDistributionError(
                f"unknown family {self.family!r}; expected one of {CONTINUOUS_FAMILIES}"
            )
        if not (float(self.scale) > 0.0) or not math.isfinite(self.scale):
            raise InvalidDistributionError(f"scale must be positive, got {self.scale!r}")
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def sigma2(self) -> float:
        s = self.scale
        if self.family == "gaussian":
            return s * s
        if self.family == "laplace":
            return 2.0 * s * s
        return s * s / 3.0  # uniform on [-s, s]

    @property
    def beta3(self) -> float:
        s = self.scale
        if self.family == "gaussian":
            return s**3 * 2.0 * math.sqrt(2.0 / math.pi)
        if self.family == "laplace":
            return 6.0 * s**3
        return s**3 / 4.0

    def normalized_peak_density(self) -> float:
        """Sup of the density of X/sigma (scale-free peak height)."""
        if self.family == "gaussian":
            return 1.0 / math.sqrt(2.0 * math.pi)
        if self.family == "laplace":
            return 1.0 / math.sqrt(2.0)
        return 1.0 / (2.0 * math.sqrt(3.0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "gaussian":
            return rng.normal(0.0, self.scale, size)
        if self.family == "laplace":
            return rng.laplace(0.0, self.scale, size)
        return rng.uniform(-self.scale, self.scale, size)

    def to_dict(self) -> dict:
        return {"family": self.family, "scale": self.scale}


IncrementModel = Union[LatticeIncrement, ContinuousIncrement]


def moments(dist: IncrementModel) -> MomentSummary:
    """Exact moment summary: lattice sums or closed forms per family."""
    if isinstance(dist, LatticeIncrement):
        mean = math.fsum(k * p for k, p in zip(dist.offsets, dist.probs))
        sigma2 = math.fsum(k * k * p for k, p in zip(dist.offsets, dist.probs))
        beta3 = math.fsum(abs(k) ** 3 * p for k, p in zip(dist.offsets, dist.probs))
    elif isinstance(dist, ContinuousIncrement):
        mean = 0.0
        sigma2 = dist.sigma2
        beta3 = dist.beta3
    else:
        raise TypeError(f"not an increment model: {dist!r}")
    return MomentSummary(mean=mean, sigma2=sigma2, beta3=beta3, lyapunov=beta3 / sigma2**1.5)


def charfn(dist: LatticeIncrement, t):
    """Characteristic function sum_j p_j exp(i t k_j); accepts scalar or array t."""
    t_arr = np.asarray(t, dtype=float)
    ks = np.asarray(dist.offsets, dtype=float)
    ps = np.asarray(dist.probs)
    val = np.exp(1j * np.multiply.outer(t_arr, ks)) @ ps
    if np.isscalar(t) or t_arr.ndim == 0:
        return complex(val)
    return val


def span(dist: LatticeIncrement) -> int:
    """Maximal lattice span: gcd of pairwise support differences."""
    base = dist.offsets[0]
    g = 0
    for k in dist.offsets[1:]:
        g = math.gcd(g, k - base)
    return g


def _abs_phi_sq(dist: LatticeIncrement, t: np.ndarray) -> np.ndarray:
    ks = np.asarray(dist.offsets, dtype=float)
    ps = np.asarray(dist.probs)
    arg = np.multiply.outer(t, ks)
    c = np.cos(arg) @ ps
    s = np.sin(arg) @ ps
    return c * c + s * s


def peakedness_V(dist: LatticeIncrement) -> Peakedness:
    """Peakedness V = -sup over (0, 2*pi) of log|phi(t)| / (1 - cos t).

    Span 1 is required; otherwise |phi| returns to 1 inside the interval and
    the supremum is >= 0, making V unusable.  The supremum is located on a
    dense grid, refined locally, and compared against the removable-limit
    value -sigma^2 at the interval edges.
    """
    sp = span(dist)
    if sp != 1:
        raise InvalidDistributionError(
            f"peakedness requires lattice span 1, got span {sp}"
        )
    sigma2 = moments(dist).sigma2

    n = PEAKEDNESS_GRID
    t = np.linspace(_T_EDGE, 2.0 * math.pi - _T_EDGE, n)
    phi2 = _abs_phi_sq(dist, t)
    ok = phi2 > 1e-300
    ratio = np.full(n, -np.inf)
    # 1 - cos t = 2 sin^2(t/2), stable at both interval edges
    denom = 2.0 * np.sin(t / 2.0) ** 2
    ratio[ok] = 0.5 * np.log(phi2[ok]) / denom[ok]

    i = int(np.argmax(ratio))
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, n - 1)]

    def neg_ratio(tt: float) -> float:
        p2 = float(_abs_phi_sq(dist, np.asarray([tt]))[0])
        if p2 <= 1e-300:
            return np.inf
        return -0.5 * math.log(p2) / (2.0 * math.sin(tt / 2.0) ** 2)

    res = minimize_scalar(neg_ratio, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    sup_val = max(float(ratio[i]), -float(res.fun))
    t_at = float(res.x) if -float(res.fun) >= float(ratio[i]) else float(t[i])
    # Removable singularities at t -> 0 and t -> 2*pi both have limit -sigma^2.
    if -sigma2 >= sup_val:
        sup_val = -sigma2
        t_at = 0.0
    if sup_val >= 0.0:
        raise InvalidDistributionError(
            "characteristic function touches the unit circle inside (0, 2*pi)"
        )
    return Peakedness(V=-sup_val, t_at_sup=t_at, grid_points=n)


def parse_increment(obj) -> IncrementModel:
    """Build an increment model from a JSON object or JSON text.

    Lattice form: {"offsets": [...], "probs": [...]}.
    Continuous form: {"family": "gaussian", "scale": 1.0}.
    Unknown keys are rejected.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise InvalidDistributionError(f"expected a JSON object, got {type(obj).__name__}")
    keys = set(obj)
    if keys == {"offsets", "probs"}:
        return LatticeIncrement(offsets=tuple(obj["offsets"]), probs=tuple(obj["probs"]))
    if keys == {"family", "scale"}:
        return ContinuousIncrement(family=obj["family"], scale=obj["scale"])
    raise InvalidDistributionError(
        f"unrecognized distribution keys {sorted(keys)}; expected "
        "{offsets, probs} or {family, scale}"
    )


def ssrw() -> LatticeIncrement:
    """Simple symmetric random walk, steps -1/+1 with probability 1/2."""
    return LatticeIncrement(offsets=(-1, 1), probs=(0.5, 0.5))


def lazy_walk() -> LatticeIncrement:
    """Lazy walk: -1, 0, +1 with probabilities 1/4, 1/2, 1/4 (span 1)."""
    return LatticeIncrement(offsets=(-1, 0, 1), probs=(0.25, 0.5, 0.25))


def skew_walk() -> LatticeIncrement:
    """Asymmetric span-1 walk: -1, 0, +2 with probabilities 1/3, 1/2, 1/6.

    Unit variance and beta3 = 5/3; the nonzero third moment makes it the
    generic test case for n^{-1/2} correction terms.
    """
    return LatticeIncrement(offsets=(-1, 0, 2), probs=(1.0 / 3.0, 0.5, 1.0 / 6.0))
