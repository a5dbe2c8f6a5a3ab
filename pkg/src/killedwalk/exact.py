"""Exact engine for integer-lattice walks absorbed on {<= 0}.

Forward dynamic programming gives the per-step survival measure, the
stopping-time profile with overshoot moments, and free-walk pmfs.  Ladder and
renewal quantities (descending/ascending ladder heights, renewal function H,
occupation measure phi, Etheta) are computed from exact fixed-point equations
rather than horizon-truncated time sums: the time sums converge at rate
n^{-1/2}, far too slowly for the tolerances we target, while the fixed-point
systems are banded and solve in linear time.

All computations are deterministic pure functions of their inputs; parameter
sweeps can run in parallel and merge results by key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .increments import LatticeIncrement

__all__ = [
    "MemoryBudgetError",
    "SurvivalTable",
    "StoppingProfile",
    "LadderStats",
    "RenewalTable",
    "OvershootScan",
    "survival_evolve",
    "survival_prob",
    "tail_prob",
    "stopping_profile",
    "expected_min_tau",
    "ladder_stats",
    "overshoot_scan",
    "free_pmf",
    "free_pmf_snapshots",
    "descending_ladder_pmf",
    "ascending_ladder_pmf",
    "occupation_measure",
    "theta_mean_table",
    "renewal_tables",
]

# Cell budget for tables that keep full per-step history (about 134 MB of
# doubles); streaming operations only need one row at a time.
DEFAULT_CELL_BUDGET = 1 << 24
# Open-horizon ladder accumulation: residual tolerance, hard step cap, and a
# processed-cell guard that stops quadratic-cost evolutions before they stall.
DEFAULT_LADDER_TOL = 1e-8
DEFAULT_STEP_CAP = 1 << 24
DEFAULT_COST_CAP = 1 << 30
# First-entrance / occupation linear systems: truncation depth doubles from
# the floor until the observed convergence gap drops below tolerance.
DEFAULT_DEPTH_FLOOR = 1 << 18
DEFAULT_DEPTH_CAP = 1 << 21


class MemoryBudgetError(RuntimeError):
    """Raised when a requested table would exceed the cell budget."""


def _check_start(dist: LatticeIncrement, x: int) -> None:
    if not isinstance(dist, LatticeIncrement):
        raise TypeError("exact engine requires a lattice increment distribution")
    if not isinstance(x, (int, np.integer)) or isinstance(x, bool) or x < 0:
        raise ValueError(f"start point must be a nonnegative integer, got {x!r}")


class _KilledWalk:
    """Mutable forward-DP state; index w of ``live`` is the walk position.

    Positions <= 0 are absorbing from step 1 on, so after the first step all
    live mass sits on indices >= 1.  Per-step kill mass and overshoot moments
    are accumulated exactly, along with a histogram of |x + S_tau| values.
    """

    def __init__(self, dist: LatticeIncrement, x: int):
        _check_start(dist, x)
        self.dist = dist
        self.x = int(x)
        self.live = np.zeros(self.x + 1)
        self.live[self.x] = 1.0
        self.k = 0
        self.pk: list = []
        self.m1k: list = []
        self.m2k: list = []
        self.kill_hist = np.zeros(dist.down_reach + 1)
        self.cost_cells = 0

    def live_mass(self) -> float:
        # np.sum uses pairwise summation, keeping conservation near 1e-16*n
        return float(np.sum(self.live))

    def step(self) -> None:
        live = self.live
        length = live.shape[0]
        kmax = self.dist.max_offset
        new = np.zeros(length + kmax)
        pk = 0.0
        m1 = 0.0
        m2 = 0.0
        for off, p in zip(self.dist.offsets, self.dist.probs):
            if off >= 0:
                new[off:off + length] += p * live
            else:
                a = -off
                if length > a + 1:
                    new[1:length - a] += p * live[a + 1:]
                m = min(a, length - 1)
                seg = live[:m + 1]
                tot = float(np.sum(seg))
                if tot > 0.0:
                    kp = p * seg
                    over = a - np.arange(m + 1, dtype=float)
                    pk += p * tot
                    m1 += float(kp @ over)
                    m2 += float(kp @ (over * over))
                    # overshoots a-m..a correspond to kp reversed
                    self.kill_hist[a - m:a + 1] += kp[::-1]
        z = new[0]
        if z != 0.0:
            # only the (offset 0, position 0) move lands here; it is a kill
            pk += z
            self.kill_hist[0] += z
            new[0] = 0.0
        self.live = new
        self.k += 1
        self.pk.append(pk)
        self.m1k.append(m1)
        self.m2k.append(m2)
        self.cost_cells += new.shape[0] * len(self.dist.offsets)

    def run_to(self, n: int) -> None:
        while self.k < n:
            self.step()


@dataclass
class SurvivalTable:
    """Per-step sub-probability measure of the killed walk.

    ``rows[k][w]`` is P(x + S_k = w, tau_x > k); row 0 is the start measure
    (position x is alive at time 0, even when x = 0).
    """

    x: int
    n: int
    rows: list
    pk: np.ndarray
    m1k: np.ndarray
    m2k: np.ndarray

    def mass(self, k: int) -> dict:
        row = self.rows[k]
        return {w: float(row[w]) for w in np.nonzero(row)[0]}

    def live_mass(self, k: int) -> float:
        return float(np.sum(self.rows[k]))

    def killed_through(self, k: int) -> float:
        return float(np.sum(self.pk[:k]))

    def to_csv_rows(self) -> list:
        out = []
        for k, row in enumerate(self.rows):
            for w in np.nonzero(row)[0]:
                out.append((k, int(w), float(row[w])))
        return out


@dataclass
class StoppingProfile:
    """Kill mass and truncated overshoot moments per step.

    ``pk[i]`` is P(tau_x = i+1); ``m1k``/``m2k`` are the first and second
    absolute overshoot moments restricted to {tau_x = i+1}.  ``residual`` is
    the live mass P(tau_x > n) left at the horizon.
    """

    x: int
    n: int
    pk: np.ndarray
    m1k: np.ndarray
    m2k: np.ndarray
    residual: float
    kill_hist: np.ndarray

    @property
    def total_p(self) -> float:
        return float(np.sum(self.pk))

    @property
    def total_m1(self) -> float:
        return float(np.sum(self.m1k))

    @property
    def total_m2(self) -> float:
        return float(np.sum(self.m2k))

    def to_csv_rows(self) -> list:
        return [
            (i + 1, float(self.pk[i]), float(self.m1k[i]), float(self.m2k[i]))
            for i in range(len(self.pk))
        ]


@dataclass
class LadderStats:
    """Overshoot moments of the stopped walk, with truncation bookkeeping.

    ``residual`` is the live probability mass beyond ``horizon``;
    ``moment_tail_bound`` bounds what that mass could still add to the
    overshoot moments (zero for walks with single-step decrease 1, whose late
    kills land exactly on the boundary).
    """

    x: int
    overshoot1: float
    overshoot2: float
    abs_stau: float
    residual: float
    moment_tail_bound: float
    horizon: int
    converged: bool


@dataclass
class OvershootScan:
    points: list
    plateau_gap: float


@dataclass
class RenewalTable:
    """Ladder-height pmfs and the derived renewal quantities.

    ``H[x]`` counts ladder points (the origin included) with height <= x.
    ``renewal_mass[x]`` is the probability that x is a ladder point, i.e. the
    renewal measure of [x, x+1); on an integer lattice this is the half-open
    increment of H, the reading under which the occupation identity
    phi(x) = H[x, x+1) is exact.  ``theta_mean[u]`` is the expected number of
    descending-ladder epochs needed to reach depth u.
    """

    x_max: int
    H: np.ndarray
    phi: np.ndarray
    theta_mean: np.ndarray
    renewal_mass: np.ndarray
    ladder_up: np.ndarray
    ladder_down: np.ndarray
    residual: float
    residual_detail: dict

    def renewal_increment(self, x: int) -> float:
        return float(self.renewal_mass[x])


def survival_evolve(dist: LatticeIncrement, x: int, n: int,
                    max_cells: int = DEFAULT_CELL_BUDGET) -> SurvivalTable:
    """Exact survival measure for all steps 0..n, keeping full history."""
    _check_start(dist, x)
    if n < 0:
        raise ValueError("horizon must be nonnegative")
    kmax = dist.max_offset
    cells = (n + 1) * (x + 1) + kmax * n * (n + 1) // 2
    if cells > max_cells:
        raise MemoryBudgetError(
            f"survival table needs {cells} cells "
            f"({n + 1} rows, final width {x + n * kmax + 1}); budget is {max_cells}"
        )
    walk = _KilledWalk(dist, x)
    rows = [walk.live.copy()]
    for _ in range(n):
        walk.step()
        rows.append(walk.live.copy())
    return SurvivalTable(x=x, n=n, rows=rows,
                         pk=np.asarray(walk.pk), m1k=np.asarray(walk.m1k),
                         m2k=np.asarray(walk.m2k))


def survival_prob(dist: LatticeIncrement, x: int, n: int) -> float:
    """P(tau_x > n), streaming (no history)."""
    walk = _KilledWalk(dist, x)
    walk.run_to(n)
    return walk.live_mass()


def tail_prob(dist: LatticeIncrement, x: int, y: float, n: int) -> float:
    """P(x + S_n >= y, tau_x > n): final-row mass on positions >= max(1, ceil(y))."""
    walk = _KilledWalk(dist, x)
    walk.run_to(n)
    lo = max(1, math.ceil(y))
    if lo >= walk.live.shape[0]:
        return 0.0
    return float(np.sum(walk.live[lo:]))


def stopping_profile(dist: LatticeIncrement, x: int, n: int) -> StoppingProfile:
    """Per-step kill mass with exact overshoot moments up to step n."""
    walk = _KilledWalk(dist, x)
    walk.run_to(n)
    return StoppingProfile(x=x, n=n,
                           pk=np.asarray(walk.pk), m1k=np.asarray(walk.m1k),
                           m2k=np.asarray(walk.m2k),
                           residual=walk.live_mass(),
                           kill_hist=walk.kill_hist.copy())


def expected_min_tau(dist: LatticeIncrement, x: int, n: int) -> float:
    """E[tau_x ^ n] = sum k P(tau_x = k) + n P(tau_x > n)."""
    if n == 0:
        return 0.0
    prof = stopping_profile(dist, x, n)
    ks = np.arange(1, n + 1, dtype=float)
    return float(ks @ prof.pk + n * prof.residual)


def ladder_stats(dist: LatticeIncrement, x: int, tol: float = DEFAULT_LADDER_TOL,
                 step_cap: int = DEFAULT_STEP_CAP,
                 cost_cap: int = DEFAULT_COST_CAP,
                 start_horizon: int = 256) -> LadderStats:
    """Overshoot moments of x + S_tau, accumulated with horizon doubling.

    The horizon grows until the *moment* tail bound (residual live mass times
    the largest overshoot still possible) drops below ``tol``.  Live mass
    itself decays only like n^{-1/2} and is reported, not waited for; for
    skip-free-down walks the moment bound is identically zero once the first
    step has been taken, making the returned moments exact.
    """
    _check_start(dist, x)
    walk = _KilledWalk(dist, x)
    spare = dist.down_reach - 1
    horizon = max(1, start_horizon)
    while True:
        walk.run_to(horizon)
        residual = walk.live_mass()
        bound = max(residual * spare, residual * spare * spare)
        converged = bound <= tol
        if converged or walk.k >= step_cap or walk.cost_cells >= cost_cap:
            break
        horizon = min(2 * horizon, step_cap)
    overshoot1 = math.fsum(walk.m1k)
    overshoot2 = math.fsum(walk.m2k)
    return LadderStats(x=x, overshoot1=overshoot1, overshoot2=overshoot2,
                       abs_stau=x + overshoot1, residual=residual,
                       moment_tail_bound=bound, horizon=walk.k,
                       converged=converged)


def overshoot_scan(dist: LatticeIncrement, xs) -> OvershootScan:
    """E|x + S_tau_x| along a list of starts; diagnostic for the large-x limit."""
    points = [(int(x), ladder_stats(dist, int(x)).overshoot1) for x in xs]
    if len(points) >= 2:
        gap = abs(points[-1][1] - points[-2][1])
    else:
        gap = float("nan")
    return OvershootScan(points=points, plateau_gap=gap)


# ---------------------------------------------------------------------------
# Free walk (no absorption)
# ---------------------------------------------------------------------------

def free_pmf(dist: LatticeIncrement, n: int):
    """Exact pmf of S_n: returns (base, probs) with support base..base+len-1."""
    snaps = free_pmf_snapshots(dist, [n])
    return snaps[n]


def free_pmf_snapshots(dist: LatticeIncrement, ns) -> dict:
    """Exact pmfs of S_n at several horizons from one evolution."""
    want = sorted(set(int(n) for n in ns))
    if want[0] < 0:
        raise ValueError("horizons must be nonnegative")
    kmax = dist.max_offset
    d = dist.down_reach
    base = 0
    arr = np.array([1.0])
    out = {}
    if want[0] == 0:
        out[0] = (0, arr.copy())
    for k in range(1, want[-1] + 1):
        length = arr.shape[0]
        new = np.zeros(length + kmax + d)
        for off, p in zip(dist.offsets, dist.probs):
            i0 = off + d
            new[i0:i0 + length] += p * arr
        arr = new
        base -= d
        if k in want:
            out[k] = (base, arr.copy())
    return out


# ---------------------------------------------------------------------------
# Ladder heights, renewal function, occupation measure
# ---------------------------------------------------------------------------

def descending_ladder_pmf(dist: LatticeIncrement, tol: float = DEFAULT_LADDER_TOL,
                          cost_cap: int = DEFAULT_COST_CAP):
    """pmf of the weak descending ladder height |S_tau_0| on 0..down_reach.

    For walks with down_reach 1 the pmf is structural: overshoot 1 happens
    only on a first-step drop, every later kill lands exactly at 0, so the
    result is exact with zero residual.  Otherwise a horizon-doubling DP
    accumulates the kill histogram and reports the unresolved live mass.
    """
    d = dist.down_reach
    if d == 1:
        p_down = dist.prob_of(-1)
        return np.array([1.0 - p_down, p_down]), 0.0
    walk = _KilledWalk(dist, 0)
    horizon = 1024
    while True:
        walk.run_to(horizon)
        residual = walk.live_mass()
        if residual <= tol or walk.cost_cells >= cost_cap:
            break
        horizon *= 2
    return walk.kill_hist.copy(), residual


def _wiener_hopf_up(dist: LatticeIncrement) -> np.ndarray:
    """Ascending ladder pmf for skip-free-down walks by polynomial division.

    With q(z) the pgf of the walk step, z*(1 - q(z)) factors exactly as
    p_{-1} (z - 1)(1 - sum_j u_j z^j); the u_j are the strict ascending
    ladder-height probabilities.  Mean zero makes them sum to 1.
    """
    kmax = dist.max_offset
    coeff = np.zeros(kmax + 2)
    coeff[1] = 1.0
    for off, p in zip(dist.offsets, dist.probs):
        coeff[off + 1] -= p
    # synthetic division by (z - 1), ascending coefficients
    q = np.zeros(kmax + 1)
    q[0] = -coeff[0]
    for i in range(1, kmax + 1):
        q[i] = q[i - 1] - coeff[i]
    remainder = coeff[kmax + 1] - q[kmax]
    if abs(remainder) > 1e-10:
        raise AssertionError(f"ladder factorization remainder {remainder!r}")
    p_down = dist.prob_of(-1)
    pmf = np.zeros(kmax + 1)
    pmf[1:] = -q[1:] / p_down
    return pmf


def _banded_toeplitz(dist: LatticeIncrement, m: int):
    """I - T in LAPACK banded storage, with T[i, j] = p(i - j).

    Both half-line systems used below (first entrance by depth index, and the
    killed walk's occupation equations) reduce to this Toeplitz form with
    lower bandwidth max_offset and upper bandwidth down_reach.
    """
    kmax = dist.max_offset
    d = dist.down_reach
    kl, ku = kmax, d
    ab = np.zeros((kl + ku + 1, m))
    ab[ku, :] = 1.0
    for off, p in zip(dist.offsets, dist.probs):
        ab[ku + off, :] -= p
    return (kl, ku), ab


def _entry_solve(dist: LatticeIncrement, depth: int):
    """First-entrance distribution into {>= 1} from 0, walk confined above -depth.

    Solves g_i = sum_off p_off [entry or g_{i - off}] on i = 0..depth (i is
    the distance below zero).  Paths dipping under -depth are absorbed and
    show up as a defect 1 - sum_j q_j.
    """
    kmax = dist.max_offset
    m = depth + 1
    (kl, ku), ab = _banded_toeplitz(dist, m)
    rhs = np.zeros((m, kmax))
    for j in range(1, kmax + 1):
        for off, p in zip(dist.offsets, dist.probs):
            i = off - j
            if 0 <= i < m:
                rhs[i, j - 1] = p
    g = solve_banded((kl, ku), ab, rhs)
    q = np.zeros(kmax + 1)
    q[1:] = g[0, :]
    return q


def ascending_ladder_pmf(dist: LatticeIncrement, tol: float = DEFAULT_LADDER_TOL,
                         depth_floor: int = DEFAULT_DEPTH_FLOOR,
                         depth_cap: int = DEFAULT_DEPTH_CAP):
    """pmf of the strict ascending ladder height on 1..max_offset.

    Skip-free-down walks use the exact factorization.  Otherwise the
    first-entrance system is solved at doubling truncation depths until the
    gap between successive solutions is below ``tol`` (or the cap is hit);
    the returned pmf is Richardson-extrapolated in 1/depth and the last gap
    is reported as the residual.
    """
    if dist.down_reach == 1:
        return _wiener_hopf_up(dist), 0.0
    depth = depth_floor
    q_prev = _entry_solve(dist, depth)
    while True:
        q_cur = _entry_solve(dist, 2 * depth)
        gap = float(np.abs(q_cur - q_prev).max())
        if gap <= tol or 2 * depth >= depth_cap:
            break
        depth *= 2
        q_prev = q_cur
    return 2.0 * q_cur - q_prev, gap


def occupation_measure(dist: LatticeIncrement, x_max: int,
                       tol: float = DEFAULT_LADDER_TOL,
                       depth_floor: int = DEFAULT_DEPTH_FLOOR,
                       depth_cap: int = DEFAULT_DEPTH_CAP):
    """phi(x) = sum_k P(S_k = x, tau_0 > k) for x = 0..x_max.

    phi is the Green's function of the walk killed on {<= 0}; it satisfies
    phi(q) = p(q) + sum_{w >= 1} p(q - w) phi(w), solved as a banded system
    truncated above at a doubling depth with Richardson extrapolation.
    phi(0) = 1 exactly (the time-0 visit; the walk never revisits 0 alive).
    """
    def solve_at(m: int) -> np.ndarray:
        (kl, ku), ab = _banded_toeplitz(dist, m)
        rhs = np.zeros(m)
        for off, p in zip(dist.offsets, dist.probs):
            if 1 <= off <= m:
                rhs[off - 1] = p
        sol = solve_banded((kl, ku), ab, rhs)
        return sol[:x_max]

    depth = max(depth_floor, 4 * (x_max + 2))
    v_prev = solve_at(depth)
    while True:
        v_cur = solve_at(2 * depth)
        gap = float(np.abs(v_cur - v_prev).max())
        if gap <= tol or 2 * depth >= depth_cap:
            break
        depth *= 2
        v_prev = v_cur
    phi = np.empty(x_max + 1)
    phi[0] = 1.0
    phi[1:] = 2.0 * v_cur - v_prev
    return phi, gap


def theta_mean_table(ladder_down: np.ndarray, x_max: int) -> np.ndarray:
    """E theta(u) for u = 0..x_max from the weak descending ladder pmf.

    theta(u) is the number of descending-ladder epochs until the accumulated
    depth reaches u; conditioning on the first epoch gives a linear
    recursion.  The atom at zero (ladder epochs that do not descend) enters
    through the 1/(1 - q_0) factor.
    """
    q0 = float(ladder_down[0])
    out = np.empty(x_max + 1)
    out[0] = 1.0
    for u in range(1, x_max + 1):
        acc = 1.0
        for c in range(1, min(len(ladder_down) - 1, u - 1) + 1):
            acc += float(ladder_down[c]) * out[u - c]
        out[u] = acc / (1.0 - q0)
    return out


def renewal_tables(dist: LatticeIncrement, x_max: int,
                   tol: float = DEFAULT_LADDER_TOL) -> RenewalTable:
    """Assemble H, phi, renewal mass and Etheta on 0..x_max.

    The quantities come from independent routes: H from the ascending ladder
    pmf, phi from the killed walk's Green function, theta from the descending
    ladder pmf, so identities between them are genuine cross-checks.
    """
    q_down, res_down = descending_ladder_pmf(dist, tol=tol)
    q_up, res_up = ascending_ladder_pmf(dist, tol=tol)
    kmax = dist.max_offset

    u = np.zeros(x_max + 2)
    u[0] = 1.0
    for y in range(1, x_max + 2):
        u[y] = math.fsum(q_up[j] * u[y - j] for j in range(1, min(kmax, y) + 1))
    H = np.cumsum(u[:x_max + 1])

    phi, res_phi = occupation_measure(dist, x_max, tol=tol)
    theta = theta_mean_table(q_down, x_max)

    detail = {"chi_minus": float(res_down), "chi_plus": float(res_up),
              "phi": float(res_phi)}
    return RenewalTable(x_max=x_max, H=H, phi=phi, theta_mean=theta,
                        renewal_mass=u[:x_max + 1], ladder_up=q_up,
                        ladder_down=q_down, residual=max(detail.values()),
                        residual_detail=detail)
