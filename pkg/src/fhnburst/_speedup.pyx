# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the planar forced system.

Line-for-line twin of _kernel_py.integrate_forced; keep the two in lockstep.
"""
import numpy as np

from libc.math cimport cos, fabs, isfinite, sin, sqrt

cdef double A21 = 1.544
cdef double A31 = 0.9466785280815826
cdef double A32 = 0.2557011698983284
cdef double A41 = 3.314825187068521
cdef double A42 = 2.896124015972201
cdef double A43 = 0.9986419139977817
cdef double A51 = 1.221224509226641
cdef double A52 = 6.019134481288629
cdef double A53 = 12.53708332932087
cdef double A54 = -0.6878860361058950
cdef double C21 = -5.6688
cdef double C31 = -2.430093356833875
cdef double C32 = -0.2063599157091915
cdef double C41 = -0.1073529058151375
cdef double C42 = -9.594562251023355
cdef double C43 = -20.47028614809616
cdef double C51 = 7.496443313967647
cdef double C52 = -10.24680431464352
cdef double C53 = -33.99990352819905
cdef double C54 = 11.70890893206160
cdef double C61 = 8.083246795921522
cdef double C62 = -7.981132988064893
cdef double C63 = -31.52159432874371
cdef double C64 = 16.31930543123136
cdef double C65 = -6.058818238834054
cdef double AL2 = 0.386
cdef double AL3 = 0.21
cdef double AL4 = 0.63
cdef double G1 = 0.25
cdef double G2 = -0.1043
cdef double G3 = 0.1035
cdef double G4 = -0.03620000000000023
cdef double GAMMA = 0.25

cdef double EVENT_TIME_TOL = 1e-12
cdef double MACH_EPS = 2.220446049250313e-16


cdef inline double _hermite_x(double s, double h, double x0, double f0, double d0,
                              double x1, double f1, double d1) nogil:
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    cdef double s4 = s3 * s
    cdef double s5 = s4 * s
    return ((1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5) * x0
            + h * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * f0
            + h * h * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * d0
            + (10.0 * s3 - 15.0 * s4 + 6.0 * s5) * x1
            + h * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * f1
            + h * h * (0.5 * s3 - s4 + 0.5 * s5) * d1)


def integrate_forced(double a, double b, double eps, double E, double omega,
                     double t0, double t_end, double x0, double y0,
                     double rtol, double atol, double max_step, double first_step,
                     long max_steps, bint detect_events, bint store_knots):
    cdef double span = t_end - t0
    cdef double h = first_step if first_step > 0.0 else 1e-4 * span
    cdef double hmax = max_step if max_step > 0.0 else span
    if h > hmax:
        h = hmax
    if h > span:
        h = span

    cdef double t = t0
    cdef double x = x0
    cdef double y = y0
    cdef int status = 0

    cdef double fx = x - x * x * x / 3.0 - y - a + E * sin(omega * t)
    cdef double fy = eps * (x - b * y)
    if not (isfinite(fx) and isfinite(fy)):
        return (3, t, x, y, np.empty(0), np.empty(0), np.empty(0), np.empty(0),
                np.empty(0), np.empty(0), np.empty(0), np.empty(0),
                np.empty(0, dtype=np.int64))
    cdef double ftx = E * omega * cos(omega * t)
    cdef double jxx = 1.0 - x * x
    cdef double d2x = ftx + jxx * fx - fy
    cdef double d2y = eps * fx - eps * b * fy

    ts = [t]
    xs = [x]
    ys = [y]
    fxs = [fx]
    fys = [fy]
    cxs = [d2x]
    cys = [d2y]
    ev_times = []
    ev_codes = []

    cdef long n_steps = 0
    cdef bint rejected = False
    cdef double t_snap = 2e-13 * span

    cdef double h_floor, ig, g11, g22, det, i11, i12, i21, i22
    cdef double r1, r2, tt, xi, yi, ch, c1, c2, c3, c4, c5
    cdef double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y, k5x, k5y, k6x, k6y
    cdef double f2x, f2y, f3x, f3y, f4x, f4y, f5x, f5y, f6x, f6y
    cdef double x_new, y_new, sx, sy, ex, ey, err, fac
    cdef double t_new, h_used, fxn, fyn, ftxn, jxxn, d2xn, d2yn
    cdef double x_mid, ga, gm, gb, gaa, gbb, ta, tb, lo, hi, glo, mid, gv, offset
    cdef int code, direction, half
    cdef bint up, down

    while t < t_end - 1e-13 * span:
        if n_steps >= max_steps:
            status = 2
            break
        if h > t_end - t:
            h = t_end - t
        h_floor = 1e-13 * span
        if 8.0 * MACH_EPS * fabs(t) > h_floor:
            h_floor = 8.0 * MACH_EPS * fabs(t)
        if h < h_floor and h < (t_end - t):
            status = 1
            break

        ig = 1.0 / (h * GAMMA)
        g11 = ig - jxx
        g22 = ig + eps * b
        det = g11 * g22 + eps
        i11 = g22 / det
        i12 = -1.0 / det
        i21 = eps / det
        i22 = g11 / det

        r1 = fx + h * G1 * ftx
        r2 = fy
        k1x = i11 * r1 + i12 * r2
        k1y = i21 * r1 + i22 * r2

        tt = t + AL2 * h
        xi = x + A21 * k1x
        yi = y + A21 * k1y
        f2x = xi - xi * xi * xi / 3.0 - yi - a + E * sin(omega * tt)
        f2y = eps * (xi - b * yi)
        ch = C21 / h
        r1 = f2x + ch * k1x + h * G2 * ftx
        r2 = f2y + ch * k1y
        k2x = i11 * r1 + i12 * r2
        k2y = i21 * r1 + i22 * r2

        tt = t + AL3 * h
        xi = x + A31 * k1x + A32 * k2x
        yi = y + A31 * k1y + A32 * k2y
        f3x = xi - xi * xi * xi / 3.0 - yi - a + E * sin(omega * tt)
        f3y = eps * (xi - b * yi)
        c1 = C31 / h
        c2 = C32 / h
        r1 = f3x + c1 * k1x + c2 * k2x + h * G3 * ftx
        r2 = f3y + c1 * k1y + c2 * k2y
        k3x = i11 * r1 + i12 * r2
        k3y = i21 * r1 + i22 * r2

        tt = t + AL4 * h
        xi = x + A41 * k1x + A42 * k2x + A43 * k3x
        yi = y + A41 * k1y + A42 * k2y + A43 * k3y
        f4x = xi - xi * xi * xi / 3.0 - yi - a + E * sin(omega * tt)
        f4y = eps * (xi - b * yi)
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
        f5x = xi - xi * xi * xi / 3.0 - yi - a + E * sin(omega * tt)
        f5y = eps * (xi - b * yi)
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
        f6x = xi - xi * xi * xi / 3.0 - yi - a + E * sin(omega * tt)
        f6y = eps * (xi - b * yi)
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
        if not (isfinite(x_new) and isfinite(y_new)
                and isfinite(k6x) and isfinite(k6y)):
            h *= 0.5
            if h < h_floor:
                status = 3
                break
            rejected = True
            continue

        sx = atol + rtol * (fabs(x) if fabs(x) > fabs(x_new) else fabs(x_new))
        sy = atol + rtol * (fabs(y) if fabs(y) > fabs(y_new) else fabs(y_new))
        ex = k6x / sx
        ey = k6y / sy
        err = sqrt(0.5 * (ex * ex + ey * ey))
        if err < 1e-10:
            err = 1e-10

        if err > 1.0:
            fac = 0.9 * err ** -0.25
            if fac < 0.1:
                fac = 0.1
            elif fac > 0.5:
                fac = 0.5
            h *= fac
            rejected = True
            continue

        t_new = t_end if (t_end - (t + h)) < t_snap else t + h
        h_used = t_new - t
        fxn = x_new - x_new * x_new * x_new / 3.0 - y_new - a + E * sin(omega * t_new)
        fyn = eps * (x_new - b * y_new)
        if not (isfinite(fxn) and isfinite(fyn)):
            status = 3
            break
        ftxn = E * omega * cos(omega * t_new)
        jxxn = 1.0 - x_new * x_new
        d2xn = ftxn + jxxn * fxn - fyn
        d2yn = eps * fxn - eps * b * fyn

        if detect_events:
            x_mid = _hermite_x(0.5, h_used, x, fx, d2x, x_new, fxn, d2xn)
            for code in range(3):
                if code == 2:
                    offset = 2.0
                    direction = 1
                else:
                    offset = -1.0
                    direction = 1 if code == 0 else -1
                ga = x + offset
                gm = x_mid + offset
                gb = x_new + offset
                for half in range(2):
                    if half == 0:
                        ta = t
                        gaa = ga
                        tb = t + 0.5 * h_used
                        gbb = gm
                    else:
                        ta = t + 0.5 * h_used
                        gaa = gm
                        tb = t_new
                        gbb = gb
                    up = gaa < 0.0 <= gbb
                    down = gaa > 0.0 >= gbb
                    if not (up or down):
                        continue
                    if direction > 0 and not up:
                        continue
                    if direction < 0 and not down:
                        continue
                    lo = ta
                    hi = tb
                    glo = gaa
                    while hi - lo > EVENT_TIME_TOL:
                        mid = 0.5 * (lo + hi)
                        gv = _hermite_x((mid - t) / h_used, h_used, x, fx, d2x,
                                        x_new, fxn, d2xn) + offset
                        if (glo < 0.0) == (gv < 0.0):
                            lo = mid
                            glo = gv
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

        fac = 0.9 * err ** -0.25
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
        np.asarray([ev_times[i] for i in order], dtype=np.float64),
        np.asarray([ev_codes[i] for i in order], dtype=np.int64),
    )
