"""Backend selection for the hot forced-system integration kernel.

At import time the compiled extension is preferred; the pure-Python twin is
used when the extension is unavailable or when FHNBURST_PURE=1 is set in the
environment.  Both backends implement the same stepper, controller, and
event localization, so results agree to solver accuracy.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import _kernel_py
from .errors import MaxStepsExceeded, NonFiniteState, StepSizeUnderflow
from .integrator import Event, IntegratorConfig, Trajectory
from .model import Forcing, ModelParams

try:  # pragma: no cover - exercised only when the extension is built
    from . import _speedup as _ext
except ImportError:  # pragma: no cover
    _ext = None

_FORCE_PURE = os.environ.get("FHNBURST_PURE") == "1"
_BACKEND = _kernel_py if (_ext is None or _FORCE_PURE) else _ext

EVENT_LABELS = ("x1_up", "x1_down", "xm2_up")


def active_backend() -> str:
    """'compiled' when the extension kernel is in use, else 'pure'."""
    return "pure" if _BACKEND is _kernel_py else "compiled"


def integrate_forced(
    params: ModelParams,
    forcing: Forcing,
    y0: tuple[float, float],
    t_span: tuple[float, float],
    config: IntegratorConfig | None = None,
    detect_events: bool = True,
    store_knots: bool = True,
) -> Trajectory:
    """Integrate the planar forced system on the active backend."""
    cfg = config or IntegratorConfig()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t_end) and t_end > t0):
        raise ValueError("t_span must be finite and increasing")

    (status, t_fin, x_fin, y_fin, ts, xs, ys, fxs, fys, cxs, cys,
     ev_times, ev_codes) = _BACKEND.integrate_forced(
        params.a, params.b, params.eps, forcing.E, forcing.omega,
        t0, t_end, float(y0[0]), float(y0[1]),
        cfg.rel_tol, cfg.abs_tol,
        cfg.max_step if cfg.max_step is not None else -1.0,
        cfg.first_step if cfg.first_step is not None else -1.0,
        cfg.max_steps, detect_events, store_knots,
    )

    traj = None
    ts = np.asarray(ts, dtype=float)
    if ts.size >= 2 or (ts.size == 1 and status == 0):
        states = np.column_stack([xs, ys])
        derivs = np.column_stack([fxs, fys])
        curvs = np.column_stack([cxs, cys])
        events = [
            Event(time=float(tv), label=EVENT_LABELS[int(cv)])
            for tv, cv in zip(np.asarray(ev_times), np.asarray(ev_codes))
        ]
        traj = Trajectory(
            ts, states, derivs, curvs, events,
            meta={
                "params": params, "forcing": forcing,
                "omega": forcing.omega, "E": forcing.E,
                "backend": active_backend(),
            },
        )

    if status == 1:
        raise StepSizeUnderflow(f"step size underflow at t={t_fin!r}", traj)
    if status == 2:
        raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t={t_fin!r}", traj)
    if status == 3:
        raise NonFiniteState(f"state became non-finite near t={t_fin!r}", traj)
    return traj
