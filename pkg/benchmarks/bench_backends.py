"""Benchmark: compiled extension kernel vs the pure-Python twin.

Times the standard simulation protocol on both backends at a few drive
settings, plus a small sweep.  Run from the repository root:

    python benchmarks/bench_backends.py
"""
import time

from fhnburst import ModelParams, Forcing
from fhnburst import _kernel_py
from fhnburst.integrator import IntegratorConfig
from fhnburst.model import unforced_equilibrium

try:
    from fhnburst import _speedup
except ImportError:
    _speedup = None

CASES = [
    Forcing(E=0.55, omega=0.0149354),
    Forcing(E=0.482, omega=0.02),
    Forcing(E=0.45, omega=0.035),
]
REPEAT = 5


def run_kernel(kernel, params, forcing, config):
    T = forcing.period
    x0, y0 = unforced_equilibrium(params)
    out = kernel.integrate_forced(
        params.a, params.b, params.eps, forcing.E, forcing.omega,
        0.0, 4.0 * T, x0, y0,
        config.rel_tol, config.abs_tol, T / 64.0, -1.0,
        config.max_steps, True, True,
    )
    if out[0] != 0:
        raise RuntimeError(f"kernel status {out[0]}")
    return out


def best_of(fn, repeat=REPEAT):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    params = ModelParams()
    config = IntegratorConfig()
    print(f"{'case':<32}{'pure [ms]':>12}{'compiled [ms]':>15}{'speedup':>10}")
    for forcing in CASES:
        label = f"E={forcing.E}, omega={forcing.omega}"
        t_pure = best_of(lambda: run_kernel(_kernel_py, params, forcing, config))
        if _speedup is None:
            print(f"{label:<32}{t_pure * 1e3:>12.1f}{'n/a':>15}{'':>10}")
            continue
        t_fast = best_of(lambda: run_kernel(_speedup, params, forcing, config))
        n_knots = len(run_kernel(_speedup, params, forcing, config)[4])
        print(
            f"{label:<32}{t_pure * 1e3:>12.1f}{t_fast * 1e3:>15.1f}"
            f"{t_pure / t_fast:>9.1f}x   ({n_knots} steps)"
        )

    # small sweep through the public API on the active backend
    from fhnburst.sweep import SweepSpec, run_sweep
    from fhnburst.fastpath import active_backend

    spec = SweepSpec(omega_range=(0.015, 0.035, 0.004), e_range=(0.42, 0.54, 0.03))
    t0 = time.perf_counter()
    run_sweep(spec, params)
    elapsed = time.perf_counter() - t0
    print(
        f"\n{spec.cell_count}-cell sweep on the '{active_backend()}' backend: "
        f"{elapsed:.2f} s ({1e3 * elapsed / spec.cell_count:.0f} ms/cell)"
    )


if __name__ == "__main__":
    main()
