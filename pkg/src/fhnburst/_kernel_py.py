"""Pure-Python kernel for the planar forced system.

Scalar-float twin of the compiled extension in _speedup.pyx: same stage
tables, same step controller, same event bisection, so the two backends are
interchangeable.  Keep any algorithmic edit here in lockstep with the .pyx.

Status codes: 0 ok, 1 step-size underflow, 2 max steps exceeded,
3 non-finite state.
"""
from __future__ import annotations

import math

import numpy as np

# stage tables (stiffly accurate Rosenbrock 4(3), 6 stages)
A21 = 1.544
A31 = 0.9466785280815826
A32 = 0.2557011698983284
A41 = 3.314825187068521
A42 = 2.896124015972201
A43 = 0.9986419139977817
A51 = 1.221224509226641
A52 = 6.019134481288629
A53 = 12.53708332932087
A54 = -0.6878860361058950
C21 = -5.6688
C31 = -2.430093356833875
C32 = -0.2063599157091915
C41 = -0.1073529058151375
C42 = -9.594562251023355
C43 = -20.47028614809616
C51 = 7.496443313967647
C52 = -10.24680431464352
C53 = -33.99990352819905
C54 = 11.70890893206160
C61 = 8.083246795921522
C62 = -7.981132988064893
C63 = -31.52159432874371
C64 = 16.31930543123136
C65 = -6.058818238834054
AL2 = 0.386
AL3 = 0.21
AL4 = 0.63
G1 = 0.25
G2 = -0.1043
G3 = 0.1035
G4 = -0.03620000000000023
GAMMA = 0.25

EVENT_TIME_TOL = 1e-12
EV_X1_UP = 0
EV_X1_DOWN = 1
EV_XM2_UP = 2


def _hermite_x(s, h, x0, f0, d0, x1, f1, d1):
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s
    return (
        (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5) * x0
        + h * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * f0
        + h * h * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * d0
        + (10.0 * s3 - 15.0 * s4 + 6.0 * s5) * x1
        + h * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * f1
        + h * h * (0.5 * s3 - s4 + 0.5 * s5) * d1
    )


def integrate_forced(
    a, b, eps, E, omega,
    t0, t_end, x0, y0,
    rtol, atol, max_step, first_step,
    max_steps, detect_events, store_knots,
):
    span = t_end - t0
    h = first_step if first_step > 0.0 else 1e-4 * span
    if max_step > 0.0:
        h = min(h, max_step)
    h = min(h, span)
    hmax = max_step if max_step > 0.0 else span

    t = t0
    x = x0
    y = y0

    def rhs(tt, xx, yy):
        return (
            xx - xx * xx * xx / 3.0 - yy - a + E * math.sin(omega * tt),
            eps * (xx - b * yy),
        )

    fx, fy = rhs(t, x, y)
    if not (math.isfinite(fx) and math.isfinite(fy)):
        return 3, t, x, y, [], [], [], [], [], [], [], [], []
    ftx = E * omega * math.cos(omega * t)
    jxx = 1.0 - x * x
    d2x = ftx + jxx * fx - fy
    d2y = eps * fx - eps * b * fy

    ts = [t]
    xs = [x]
    ys = [y]
    fxs = [fx]
    fys = [fy]
    cxs = [d2x]
    cys = [d2y]
    ev_times = []
    ev_codes = []

    n_steps = 0
    rejected = False
    t_snap = 2e-13 * span
    status = 0

    while t < t_end - 1e-13 * span:
        if n_steps >= max_steps:
            status = 2
            break
        if h > t_end - t:
            h = t_end - t
        h_floor = max(1e-13 * span, 8.0 * 2.220446049250313e-16 * abs(t))
        if h < h_floor and h < (t_end - t):
            status = 1
            break

        ig = 1.0 / (h * GAMMA)
        g11 = ig - jxx
        g22 = ig + eps * b
        det = g11 * g22 + eps  # g12 = 1, g21 = -eps
        i11 = g22 / det
        i12 = -1.0 / det
        i21 = eps / det
        i22 = g11 / det

        # stage 1 reuses the stored derivative at (t, x, y)
        r1 = fx + h * G1 * ftx
        r2 = fy
        k1x = i11 * r1 + i12 * r2
        k1y = i21 * r1 + i22 * r2

        tt = t + AL2 * h
        xi = x + A21 * k1x
        yi = y + A21 * k1y
        f2x, f2y = rhs(tt, xi, yi)
        ch = C21 / h
        r1 = f2x + ch * k1x + h * G2 * ftx
        r2 = f2y + ch * k1y
        k2x = i11 * r1 + i12 * r2
        k2y = i21 * r1 + i22 * r2

        tt = t + AL3 * h
        xi = x + A31 * k1x + A32 * k2x
        yi = y + A31 * k1y + A32 * k2y
        f3x, f3y = rhs(tt, xi, yi)
        c1 = C31 / h
        c2 = C32 / h
        r1 = f3x + c1 * k1x + c2 * k2x + h * G3 * ftx
        r2 = f3y + c1 * k1y + c2 * k2y
        k3x = i11 * r1 + i12 * r2
        k3y = i21 * r1 + i22 * r2

        tt = t + AL4 * h
        xi = x + A41 * k1x + A42 * k2x + A43 * k3x
        yi = y + A41 * k1y + A42 * k2y + A43 * k3y
        f4x, f4y = rhs(tt, xi, yi)
        c1 = C41 / h
        c2 = C42 / h
        c3 = C43 / h
        r1 = f4x + c1 * k1x + c2 * k2x + c3 * k3x + h * G4 * ftx
        r2 = f4y + c1 * k1y + c2 * k2y + c3 * k3y
        k4x = i11 * r1 + i12 * r2
        k4y = i21 * r1 + i22 * r2

        tt = t + h
        xi = x + A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x
        yi = y + A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y
        f5x, f5y = rhs(tt, xi, yi)
        c1 = C51 / h
        c2 = C52 / h
        c3 = C53 / h
        c4 = C54 / h
        r1 = f5x + c1 * k1x + c2 * k2x + c3 * k3x + c4 * k4x
        r2 = f5y + c1 * k1y + c2 * k2y + c3 * k3y + c4 * k4y
        k5x = i11 * r1 + i12 * r2
        k5y = i21 * r1 + i22 * r2

        xi = xi + k5x
        yi = yi + k5y
        f6x, f6y = rhs(tt, xi, yi)
        c1 = C61 / h
        c2 = C62 / h
        c3 = C63 / h
        c4 = C64 / h
        c5 = C65 / h
        r1 = f6x + c1 * k1x + c2 * k2x + c3 * k3x + c4 * k4x + c5 * k5x
        r2 = f6y + c1 * k1y + c2 * k2y + c3 * k3y + c4 * k4y + c5 * k5y
        k6x = i11 * r1 + i12 * r2
        k6y = i21 * r1 + i22 * r2

        x_new = x + A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x + k5x + k6x
        y_new = y + A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y + k5y + k6y

        n_steps += 1
        if not (math.isfinite(x_new) and math.isfinite(y_new)
                and math.isfinite(k6x) and math.isfinite(k6y)):
            h *= 0.5
            if h < h_floor:
                status = 3
                break
            rejected = True
            continue

        sx = atol + rtol * max(abs(x), abs(x_new))
        sy = atol + rtol * max(abs(y), abs(y_new))
        ex = k6x / sx
        ey = k6y / sy
        err = math.sqrt(0.5 * (ex * ex + ey * ey))
        if err < 1e-10:
            err = 1e-10

        if err > 1.0:
            fac = 0.9 * err**-0.25
            if fac < 0.1:
                fac = 0.1
            elif fac > 0.5:
                fac = 0.5
            h *= fac
            rejected = True
            continue

        t_new = t_end if (t_end - (t + h)) < t_snap else t + h
        h_used = t_new - t
        fxn, fyn = rhs(t_new, x_new, y_new)
        if not (math.isfinite(fxn) and math.isfinite(fyn)):
            status = 3
            break
        ftxn = E * omega * math.cos(omega * t_new)
        jxxn = 1.0 - x_new * x_new
        d2xn = ftxn + jxxn * fxn - fyn
        d2yn = eps * fxn - eps * b * fyn

        if detect_events:
            x_mid = _hermite_x(0.5, h_used, x, fx, d2x, x_new, fxn, d2xn)
            for code, offset, direction in (
                (EV_X1_UP, -1.0, 1), (EV_X1_DOWN, -1.0, -1), (EV_XM2_UP, 2.0, 1)
            ):
                ga = x + offset
                gm = x_mid + offset
                gb = x_new + offset
                for (ta, gaa, tb, gbb) in ((t, ga, t + 0.5 * h_used, gm),
                                           (t + 0.5 * h_used, gm, t_new, gb)):
                    up = gaa < 0.0 <= gbb
                    down = gaa > 0.0 >= gbb
                    if not (up or down):
                        continue
                    if direction > 0 and not up:
                        continue
                    if direction < 0 and not down:
                        continue
                    lo, hi, glo = ta, tb, gaa
                    while hi - lo > EVENT_TIME_TOL:
                        mid = 0.5 * (lo + hi)
                        gv = _hermite_x(
                            (mid - t) / h_used, h_used, x, fx, d2x, x_new, fxn, d2xn
                        ) + offset
                        if (glo < 0.0) == (gv < 0.0):
                            lo, glo = mid, gv
                        else:
                            hi = mid
                    ev_times.append(0.5 * (lo + hi))
                    ev_codes.append(code)

        t = t_new
        x = x_new
        y = y_new
        fx = fxn
        fy = fyn
        ftx = ftxn
        jxx = jxxn
        d2x = d2xn
        d2y = d2yn
        if store_knots:
            ts.append(t)
            xs.append(x)
            ys.append(y)
            fxs.append(fx)
            fys.append(fy)
            cxs.append(d2x)
            cys.append(d2y)

        fac = 0.9 * err**-0.25
        if fac < 0.2:
            fac = 0.2
        elif fac > 6.0:
            fac = 6.0
        if rejected and fac > 1.0:
            fac = 1.0
        rejected = False
        h = h_used * fac
        if h > hmax:
            h = hmax

    if not store_knots:
        ts = [t]
        xs = [x]
        ys = [y]
        fxs = [fx]
        fys = [fy]
        cxs = [d2x]
        cys = [d2y]
    order = sorted(range(len(ev_times)), key=lambda i: ev_times[i])
    return (
        status, t, x, y,
        np.asarray(ts), np.asarray(xs), np.asarray(ys),
        np.asarray(fxs), np.asarray(fys), np.asarray(cxs), np.asarray(cys),
        np.asarray([ev_times[i] for i in order]),
        np.asarray([ev_codes[i] for i in order], dtype=np.int64),
    )
