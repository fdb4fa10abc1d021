"""Independent scalar oracle for spatially constant runs.

For constant data the field stays constant in space (the semigroup fixes
constants), so the run obeys the scalar equation

    y'(t) = int_0^t (t-s)^(-gamma) |y(s)|^p ds.

The oracle integrates the equivalent second-kind form

    y(t) = y0 + int_0^t K(t-s) |y(s)|^p ds,   K(tau) = tau^(1-gamma)/(1-gamma)

by implicit product-trapezoid quadrature (exact kernel moments against a
piecewise-linear integrand, fixed point per step).  This is a different
formulation, a different quadrature, and implicit rather than explicit
stepping, so it shares no discretization path with the package solver.
"""

from __future__ import annotations

import numpy as np


def _moments(beta: float, t: float, stamps: np.ndarray):
    tl, tr = stamps[:-1], stamps[1:]
    dl = t - tl
    dr = t - tr
    p0 = (dl**beta - dr**beta) / beta
    p1 = (dl ** (beta + 1.0) - dr ** (beta + 1.0)) / (beta + 1.0)
    h = tr - tl
    return (p1 - dr * p0) / h, (dl * p0 - p1) / h


def solve_scalar(
    y0: float,
    gamma: float,
    p: float,
    dt0: float = 1e-3,
    c_adapt: float = 0.02,
    threshold: float = 1e10,
    t_end: float = 10.0,
):
    """Integrate the scalar memory equation; returns (times, values, status)."""
    beta = 2.0 - gamma
    ts = [0.0]
    ys = [float(y0)]
    gs = [abs(y0) ** p]
    t, y = 0.0, float(y0)
    status = "completed"
    while t < t_end:
        dt = min(dt0, c_adapt * max(abs(y), 1e-30) ** (-(p - 1.0) / (2.0 - gamma)))
        if t + dt > t_end:
            dt = t_end - t
        tn = t + dt
        stamps = np.array(ts + [tn])
        w_left, w_right = _moments(beta, tn, stamps)
        w_left = w_left / (1.0 - gamma)
        w_right = w_right / (1.0 - gamma)
        known = float(np.dot(w_left, gs) + np.dot(w_right[:-1], gs[1:]))
        w_new = float(w_right[-1])
        yn = y
        for _ in range(100):
            y_next = y0 + known + w_new * abs(yn) ** p
            if abs(y_next - yn) <= 1e-14 * max(1.0, abs(y_next)):
                yn = y_next
                break
            yn = y_next
        y, t = yn, tn
        ts.append(t)
        ys.append(y)
        gs.append(abs(y) ** p)
        if abs(y) >= threshold:
            status = "blew_up"
            break
    return np.array(ts), np.array(ys), status


def scalar_blowup_time(y0: float, gamma: float, p: float, dt0: float = 1e-3) -> float:
    """Blow-up time proxy: the oracle runs to 1e10, where the remaining gap
    to the true blow-up time is negligible next to a 5% comparison."""
    ts, ys, status = solve_scalar(y0, gamma, p, dt0=dt0, threshold=1e10)
    if status != "blew_up":
        raise RuntimeError("oracle run did not blow up")
    z = np.abs(ys) ** (-(p - 1.0) / (2.0 - gamma))
    window = np.abs(ys) >= np.abs(ys[-1]) / 10.0
    slope, intercept = np.polyfit(ts[window], z[window], 1)
    return float(-intercept / slope)
