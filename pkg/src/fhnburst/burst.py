"""Measurement pipeline on simulated trajectories.

Standardized simulation protocol (burn-in then measurement), spike counting
at the upper fold crossing, the period-normalized L2 norm, phase sequences
of lower-bound returns, canard jump classification at a folded equilibrium,
and the phase-distance spike-count estimator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fastpath
from .errors import NoFirstSpike, NoPassage
from .geometry import FoldedEquilibrium
from .integrator import IntegratorConfig, Trajectory
from .manifolds import solve_expansion, theta_at_lower_bound
from .model import Forcing, ModelParams, TWO_PI, unforced_equilibrium, wrap_angle

DEFAULT_F_BURST = 27.0          # intra-burst spike rate of the constantly forced model, Hz
CANARD_MARGIN = 0.05            # half-width trimmed off the repelling window
L2_POINTS_PER_PERIOD = 20000
CLASSIFY_POINTS_PER_PERIOD = 20000


@dataclass(frozen=True)
class BurstMetrics:
    """Per-run burst measurements; theta_seq is unwrapped forcing phase."""

    spike_count: int
    l2: float
    theta_seq: tuple[float, ...]
    est_count: int | None = None

    def csv_row(self, forcing: Forcing) -> str:
        est = "" if self.est_count is None else str(self.est_count)
        return (
            f"{forcing.omega:.17g},{forcing.E:.17g},{self.spike_count},"
            f"{self.l2:.17g},{len(self.theta_seq)},{est}"
        )


@dataclass(frozen=True)
class CanardClass:
    """Outcome of the canard passage at one folded equilibrium."""

    site: str                    # "node" | "saddle"
    outcome: str                 # "jump_back" | "jump_across" | "fold_jump"


def simulate_standard(
    params: ModelParams,
    forcing: Forcing,
    config: IntegratorConfig | None = None,
    burn_in_periods: int = 2,
    measure_periods: int = 2,
) -> Trajectory:
    """The standard protocol: start at the drive-free rest state, burn in,
    then return the measurement segment with fold-crossing and lower-return
    events attached."""
    cfg = config or IntegratorConfig()
    T = forcing.period
    if cfg.max_step is None:
        cfg = IntegratorConfig(
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=T / 64.0,
            method=cfg.method, first_step=cfg.first_step, max_steps=cfg.max_steps,
        )
    x0, y0 = unforced_equilibrium(params)
    t_meas = burn_in_periods * T
    if burn_in_periods > 0:
        burn = fastpath.integrate_forced(
            params, forcing, (x0, y0), (0.0, t_meas), cfg,
            detect_events=False, store_knots=False,
        )
        x0, y0 = burn.states[-1]
    traj = fastpath.integrate_forced(
        params, forcing, (x0, y0), (t_meas, t_meas + measure_periods * T), cfg,
        detect_events=True, store_knots=True,
    )
    traj.meta["measure_periods"] = measure_periods
    traj.meta["burn_in_periods"] = burn_in_periods
    return traj


def count_spikes(trajectory: Trajectory, n_periods: int) -> int:
    """Upward crossings of the upper fold line x = 1, per period, floored."""
    ups = trajectory.events_labeled("x1_up")
    return len(ups) // n_periods


def l2_norm(trajectory: Trajectory, T: float, points_per_period: int = L2_POINTS_PER_PERIOD) -> float:
    """Period-normalized L2 norm of (x, y) by midpoint quadrature on the
    dense output; the span must cover a whole number of periods."""
    t0, t1 = trajectory.t_span
    n_periods = (t1 - t0) / T
    n_int = round(n_periods)
    if n_int < 1 or abs(n_periods - n_int) > 1e-9 * max(1.0, n_periods):
        raise ValueError("trajectory span is not an integer number of periods")
    n = points_per_period * n_int
    dt = (t1 - t0) / n
    mids = t0 + (np.arange(n) + 0.5) * dt
    states = trajectory.sample(mids)
    return math.sqrt(float(np.mean(states[:, 0] ** 2 + states[:, 1] ** 2)))


LOWER_RETURN_DEPTH = -1.5   # x-minima below this count as lower-bound returns


def lower_return_times(trajectory: Trajectory, depth: float = LOWER_RETURN_DEPTH) -> np.ndarray:
    """Times of local x-minima at the lower bound.

    Each burst return lands near x = -2; its x-minimum is bracketed by a
    sign change of the stored knot derivative and polished by bisection on
    the dense output.  Minima above the depth cut (small oscillations near
    the fold) are not returns.
    """
    times = trajectory.times
    fx = trajectory.derivs[:, 0]
    out = []
    for i in range(len(times) - 1):
        if not (fx[i] < 0.0 <= fx[i + 1]):
            continue
        lo, hi = times[i], times[i + 1]
        for _ in range(80):
            if hi - lo <= 1e-12:
                break
            mid = 0.5 * (lo + hi)
            if trajectory.sample_deriv([mid])[0, 0] < 0.0:
                lo = mid
            else:
                hi = mid
        t_min = 0.5 * (lo + hi)
        if trajectory.sample([t_min])[0, 0] <= depth:
            out.append(t_min)
    return np.asarray(out, dtype=float)


def theta_sequence(trajectory: Trajectory) -> np.ndarray:
    """Unwrapped phase at each local-minimum return to the lower bound."""
    omega = trajectory.meta.get("omega")
    if omega is None:
        raise ValueError("trajectory carries no forcing metadata")
    return omega * lower_return_times(trajectory)


def wrap_sequence(theta_seq) -> np.ndarray:
    """The same sequence reduced into [0, 2*pi) for reporting."""
    return np.mod(np.asarray(theta_seq, dtype=float), TWO_PI)


def _site_equilibrium(equilibria, site: str) -> FoldedEquilibrium:
    for eq in equilibria:
        if eq.side != "left":
            continue
        if site == "saddle" and eq.kind == "saddle":
            return eq
        if site == "node" and eq.kind in ("node", "focus"):
            return eq
    raise NoPassage(f"no left-fold {site} equilibrium for these parameters")


def classify_canard(
    trajectory: Trajectory, equilibria, site: str, margin: float = CANARD_MARGIN
) -> CanardClass:
    """Classify the jump that follows the first passage of the site's phase.

    Watches x(t) from the moment the forcing phase crosses the folded
    equilibrium's angle.  A first exit of the trimmed repelling window
    (-1+margin, 1-margin) decides the outcome: an upward exit that reaches
    x = 1 is a jump_across when the accumulated window dwell exceeds the
    fast-timescale yardstick 1/eps and a fold_jump otherwise; a downward
    exit after entering the window is a jump_back.
    """
    if site not in ("node", "saddle"):
        raise ValueError("site must be 'node' or 'saddle'")
    params: ModelParams = trajectory.meta.get("params")
    forcing: Forcing = trajectory.meta.get("forcing")
    if params is None or forcing is None:
        raise ValueError("trajectory carries no model metadata")
    eq = _site_equilibrium(equilibria, site)

    omega = forcing.omega
    T = forcing.period
    t0, t1 = trajectory.t_span
    k = math.ceil((omega * t0 - eq.theta) / TWO_PI - 1e-12)
    t_star = (eq.theta + TWO_PI * k) / omega
    if t_star > t1:
        raise NoPassage("trajectory never reaches the site phase inside the window")

    n = CLASSIFY_POINTS_PER_PERIOD
    t_stop = min(t_star + T, t1)
    ts = np.linspace(t_star, t_stop, n)
    xs = trajectory.sample(ts)[:, 0]
    dt = (t_stop - t_star) / (n - 1)

    lo = -1.0 + margin
    hi = 1.0 - margin
    dwell_threshold = 1.0 / params.eps

    entered = False
    dwell = 0.0
    for xi in xs:
        if lo < xi < hi:
            entered = True
            dwell += dt
        if xi >= 1.0:
            outcome = "jump_across" if dwell > dwell_threshold else "fold_jump"
            return CanardClass(site=site, outcome=outcome)
        if entered and xi <= lo:
            return CanardClass(site=site, outcome="jump_back")
    raise NoPassage("no jump detected within one period of the site passage")


def first_return_phase(trajectory: Trajectory) -> float:
    """Unwrapped phase of the first lower-bound return after the first spike."""
    omega = trajectory.meta.get("omega")
    if omega is None:
        raise ValueError("trajectory carries no forcing metadata")
    spikes = trajectory.events_labeled("x1_up")
    if not spikes:
        raise NoFirstSpike("no spike in the measurement window")
    t_first = spikes[0].time
    returns = [tv for tv in lower_return_times(trajectory) if tv > t_first]
    if not returns:
        raise NoFirstSpike("no lower-bound return after the first spike")
    return omega * returns[0]


def estimate_from_phases(
    theta_stable_at_bound: float, theta_first_return: float, omega: float,
    f_burst: float = DEFAULT_F_BURST,
) -> int:
    """Spike-count estimate from the remaining phase after the first spike.

    The phase gap is converted to milliseconds through omega, multiplied by
    the intra-burst rate, rounded up, plus one for the spike already spent.
    A non-positive gap clamps to a single spike.
    """
    d_theta = wrap_angle(theta_stable_at_bound) - wrap_angle(theta_first_return)
    if d_theta <= 0.0:
        return 1
    return 1 + math.ceil(d_theta / (1000.0 * omega) * f_burst)


def estimate_spike_count(
    params: ModelParams,
    forcing: Forcing,
    f_burst: float = DEFAULT_F_BURST,
    config: IntegratorConfig | None = None,
    trajectory: Trajectory | None = None,
) -> int:
    """End-to-end estimator; reuses a supplied trajectory when given."""
    traj = trajectory if trajectory is not None else simulate_standard(
        params, forcing, config
    )
    theta_first = first_return_phase(traj)
    expansion = solve_expansion("stable", params, forcing)
    theta_bound = theta_at_lower_bound(expansion)
    return estimate_from_phases(theta_bound, theta_first, forcing.omega, f_burst)


def burst_metrics(
    params: ModelParams,
    forcing: Forcing,
    config: IntegratorConfig | None = None,
    f_burst: float = DEFAULT_F_BURST,
    with_estimate: bool = True,
) -> BurstMetrics:
    """Simulate once and compute every per-run measurement."""
    traj = simulate_standard(params, forcing, config)
    n_periods = traj.meta["measure_periods"]
    count = count_spikes(traj, n_periods)
    l2 = l2_norm(traj, forcing.period)
    seq = tuple(theta_sequence(traj))
    est = None
    if with_estimate:
        try:
            est = estimate_spike_count(params, forcing, f_burst, trajectory=traj)
        except NoFirstSpike:
            est = 0
    return BurstMetrics(spike_count=count, l2=l2, theta_seq=seq, est_count=est)
