"""Post-processing of recorded runs: exponents, blow-up time and rate,
the lower-bound certificate along a trajectory, and the zoom diagnostics
used by the upper-bound argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from memheat.core import Params, ValidationError, derived_exponents
from memheat.solver import STATUS_BLEW_UP, Trajectory


@dataclass(frozen=True)
class CriticalExponent:
    memory_branch: float
    diffusive_branch: float
    p_star: float


def critical_exponent(n: int, m: int, gamma: float) -> CriticalExponent:
    """Both branches of the critical power and their maximum.

    The diffusive branch is the +infinity sentinel when the positive part
    (n - 2m + 2m*gamma)_+ vanishes.
    """
    if n < 1 or m < 1 or not (0.0 < gamma < 1.0):
        raise ValidationError("need n >= 1, m >= 1, gamma in (0,1)")
    memory_branch = 1.0 / gamma
    positive_part = n - 2.0 * m + 2.0 * m * gamma
    if positive_part > 0.0:
        diffusive = 1.0 + 2.0 * m * (2.0 - gamma) / positive_part
    else:
        diffusive = math.inf
    return CriticalExponent(
        memory_branch=memory_branch,
        diffusive_branch=diffusive,
        p_star=max(memory_branch, diffusive),
    )


class BlowupFitError(RuntimeError):
    """Blow-up time extrapolation failed; carries the fit diagnostics."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def _rate_channel(traj: Trajectory) -> np.ndarray:
    p, gamma = traj.params.p, traj.params.gamma
    return traj.sup_norms ** (-(p - 1.0) / (2.0 - gamma))


def estimate_blowup_time(traj: Trajectory) -> float:
    """Root of the linearized channel z = sup^(-(p-1)/(2-gamma)).

    If the rate law holds, z is asymptotically linear in t, so a straight
    line through the last decade of recorded norms crosses zero at the
    blow-up time.  A non-monotone window is widened once (two decades)
    before failing with diagnostics.
    """
    if traj.status != STATUS_BLEW_UP:
        raise ValidationError("blow-up time estimation needs a blew_up trajectory")
    z = _rate_channel(traj)
    top = traj.sup_norms.max()
    for span in (10.0, 100.0):
        window = traj.sup_norms >= top / span
        if window.sum() < 3:
            continue
        zw = z[window]
        if np.any(np.diff(zw) >= 0.0):
            continue
        tw = traj.times[window]
        slope, intercept = np.polyfit(tw, zw, 1)
        t_star = -intercept / slope
        if t_star > traj.t_last:
            return float(t_star)
    raise BlowupFitError(
        "rate channel is not monotone-linear near the end of the run",
        diagnostics={
            "window_sizes": [int((traj.sup_norms >= top / s).sum()) for s in (10, 100)],
            "final_sup": float(top),
            "t_last": float(traj.t_last),
        },
    )


@dataclass(frozen=True)
class BlowupReport:
    t_star: float
    alpha_hat: float
    alpha1: float
    rel_err: float
    window: tuple[float, float]
    n_points: int
    residual: float


class RefinementNeeded(RuntimeError):
    """The fit window holds too few samples; rerun at finer resolution."""


def fit_blowup_rate(
    traj: Trajectory, t_star: float, window: tuple[float, float] = (1e2, 1e6)
) -> BlowupReport:
    """Least-squares slope of log sup-norm against log(T*-t) on the window.

    The default window [1e2, 1e6] sits two decades below the blow-up
    threshold, so threshold-contaminated steps never enter the fit.
    """
    if traj.status != STATUS_BLEW_UP:
        raise ValidationError("rate fitting needs a blew_up trajectory")
    lo, hi = window
    mask = (traj.sup_norms >= lo) & (traj.sup_norms <= hi) & (traj.times < t_star)
    if mask.sum() < 8:
        raise RefinementNeeded(
            f"only {int(mask.sum())} samples with sup-norm in [{lo:g}, {hi:g}]"
        )
    x = np.log(t_star - traj.times[mask])
    y = np.log(traj.sup_norms[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    alpha_hat = -float(slope)
    alpha1 = derived_exponents(traj.params).alpha1
    return BlowupReport(
        t_star=float(t_star),
        alpha_hat=alpha_hat,
        alpha1=alpha1,
        rel_err=abs(alpha_hat - alpha1) / alpha1,
        window=(lo, hi),
        n_points=int(mask.sum()),
        residual=resid,
    )


@dataclass(frozen=True)
class LowerBoundCheck:
    """Per-sample verdicts of the local-existence-based lower rate bound."""

    pass_fraction: float
    implied_constant: float
    n_samples: int
    passed: np.ndarray


def lower_bound_certificate(
    traj: Trajectory, t_star: float, window: tuple[float, float] | None = None
) -> LowerBoundCheck:
    """Check (T*-s)^(2-gamma) > (theta - sup(s)) / (C theta^p), theta = 2 sup(s).

    C = 2^p/((1-gamma)(2-gamma)) is the local-existence constant, so the
    inequality is equivalent to sup(s) > c (T*-s)^(-alpha1) with
    c = ((1-gamma)(2-gamma)/4^p)^(1/(p-1)).  Defaults to the final decade
    of recorded norms.
    """
    if traj.status != STATUS_BLEW_UP:
        raise ValidationError("lower-bound certificate needs a blew_up trajectory")
    gamma, p = traj.params.gamma, traj.params.p
    top = traj.sup_norms.max()
    if window is None:
        mask = traj.sup_norms >= top / 10.0
    else:
        mask = (traj.sup_norms >= window[0]) & (traj.sup_norms <= window[1])
    mask &= traj.times < t_star
    s = traj.times[mask]
    sup = traj.sup_norms[mask]
    C = 2.0**p / ((1.0 - gamma) * (2.0 - gamma))
    theta = 2.0 * sup
    lhs = (t_star - s) ** (2.0 - gamma)
    rhs = (theta - sup) / (C * theta**p)
    passed = lhs > rhs
    implied_c = ((1.0 - gamma) * (2.0 - gamma) / 4.0**p) ** (1.0 / (p - 1.0))
    return LowerBoundCheck(
        pass_fraction=float(np.mean(passed)) if passed.size else 0.0,
        implied_constant=implied_c,
        n_samples=int(passed.size),
        passed=passed,
    )


@dataclass(frozen=True)
class RescaleDiagnostics:
    t0: float
    M_t0: float
    t0_plus: float | None
    lam: float
    A: float
    bound_check: float
    origin_value: float
    partial: bool


def _envelope(traj: Trajectory) -> np.ndarray:
    return np.maximum.accumulate(traj.sup_norms)


def rescaled_diagnostics(traj: Trajectory, t0: float, A: float) -> RescaleDiagnostics:
    """Zoom normalization around the running maximum at time t0.

    M(t0) is the running sup envelope (linear interpolation between
    samples); lambda = (M(t0)/(2A))^(-1/(2m alpha1)); the zoomed field is
    lambda^(2m alpha1) u near the recorded near-maximum point, so its value
    at the origin is >= A and its maximum through the doubling time t0_plus
    is 4A up to interpolation.  A doubling time beyond the recorded data
    flags the diagnostics as partial.
    """
    if A < 1.0:
        raise ValidationError("normalization A must be >= 1")
    if not (traj.times[0] < t0 <= traj.times[-1]):
        raise ValidationError("t0 must lie within the recorded times")
    exps = derived_exponents(traj.params)
    two_m_alpha1 = 2.0 * traj.params.m * exps.alpha1
    env = _envelope(traj)
    M_t0 = float(np.interp(t0, traj.times, env))
    if M_t0 <= 0.0:
        raise ValidationError("running maximum vanishes at t0")
    lam = (M_t0 / (2.0 * A)) ** (-1.0 / two_m_alpha1)
    zoom = lam**two_m_alpha1  # equals 2A / M(t0)

    # near-maximum snapshot at or before t0
    snap_mask = traj.snapshot_times <= t0 + 1e-14
    if not np.any(snap_mask):
        raise ValidationError("no snapshots recorded at or before t0")
    idx = np.nonzero(snap_mask)[0]
    peak_idx = idx[np.argmax([np.max(np.abs(traj.snapshots[i])) for i in idx])]
    peak_value = float(np.max(np.abs(traj.snapshots[peak_idx])))
    origin_value = zoom * peak_value
    partial = peak_value < 0.5 * M_t0

    # doubling time of the envelope
    target = 2.0 * M_t0
    if env[-1] >= target:
        j = int(np.searchsorted(env, target))
        if j == 0:
            t0_plus = float(traj.times[0])
        else:
            e0, e1 = env[j - 1], env[j]
            f = 0.0 if e1 == e0 else (target - e0) / (e1 - e0)
            t0_plus = float(traj.times[j - 1] + f * (traj.times[j] - traj.times[j - 1]))
        window = traj.times <= t0_plus + 1e-14
        bound_check = zoom * float(np.max(traj.sup_norms[window]))
    else:
        t0_plus = None
        partial = True
        bound_check = zoom * float(np.max(traj.sup_norms))
    return RescaleDiagnostics(
        t0=float(t0),
        M_t0=M_t0,
        t0_plus=t0_plus,
        lam=float(lam),
        A=float(A),
        bound_check=bound_check,
        origin_value=origin_value,
        partial=partial,
    )
