"""Riemann-Liouville fractional calculus on uniform time grids.

The integrals I^alpha are computed by product integration: the power kernel
(t-s)^(alpha-1) is integrated exactly against the piecewise-linear
interpolant of the samples, so the scheme never evaluates the kernel at its
singularity and is exact for linear data.  Derivatives D^alpha are obtained
by differencing I^(1-alpha).  The module also carries the closed forms for
the power weight profiles (1 -+ t/T)^sigma used by the certificate
quadratures, together with their weighted integrals evaluated both
analytically and by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from memheat.core import ValidationError

gamma_fn = math.gamma


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of `steps` subintervals on [a, b]."""

    a: float
    b: float
    steps: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValidationError("time grid requires a < b")
        if self.steps < 2:
            raise ValidationError("time grid requires at least 2 steps")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.steps

    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.steps + 1)


def _check_order(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValidationError("fractional order must lie in (0,1)")


def _pl_convolution_weights(alpha: float, h: float, M: int):
    """Weights of the piecewise-linear product integration on a uniform grid.

    Segment j contributes A[k]*f_j + B[k]*f_{j+1} to the node value at lag
    k = i - j; both weight sequences come from the exact moments of
    (t-s)^(alpha-1) over one subinterval.
    """
    k = np.arange(1, M + 1, dtype=float)
    km = k - 1.0
    p0 = (k**alpha - km**alpha) / alpha
    p1 = (k ** (alpha + 1.0) - km ** (alpha + 1.0)) / (alpha + 1.0)
    A = h**alpha * (p1 - km * p0)
    B = h**alpha * (k * p0 - p1)
    return A, B


def rl_integral(
    grid: TimeGrid, f: np.ndarray, alpha: float, side: str = "left"
) -> np.ndarray:
    """Riemann-Liouville fractional integral of order alpha at the grid nodes.

    side="left" gives I^alpha_{a|t} f, side="right" gives I^alpha_{t|b} f.
    """
    _check_order(alpha)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.steps + 1,):
        raise ValidationError("sample count must match the time grid")
    if not np.all(np.isfinite(f)):
        raise ValidationError("samples must be finite")
    if side == "right":
        return rl_integral(grid, f[::-1], alpha, "left")[::-1]
    if side != "left":
        raise ValidationError(f"unknown side {side!r}")
    M = grid.steps
    A, B = _pl_convolution_weights(alpha, grid.h, M)
    out = np.zeros_like(f)
    out[1:] = (np.convolve(A, f[:-1])[:M] + np.convolve(B, f[1:])[:M]) / gamma_fn(alpha)
    return out


def rl_derivative(
    grid: TimeGrid, f: np.ndarray, alpha: float, side: str = "left"
) -> np.ndarray:
    """Riemann-Liouville fractional derivative of order alpha at the nodes.

    Computed as the derivative of I^(1-alpha) f, using centered differences
    in the interior and one-sided second-order stencils at the endpoints.
    """
    _check_order(alpha)
    if grid.steps < 4:
        raise ValidationError("time grid too coarse for differentiation (steps < 4)")
    if side == "right":
        return rl_derivative(grid, np.asarray(f)[::-1], alpha, "left")[::-1]
    G = rl_integral(grid, f, 1.0 - alpha, "left")
    h = grid.h
    d = np.empty_like(G)
    d[1:-1] = (G[2:] - G[:-2]) / (2.0 * h)
    d[0] = (-3.0 * G[0] + 4.0 * G[1] - G[2]) / (2.0 * h)
    d[-1] = (3.0 * G[-1] - 4.0 * G[-2] + G[-3]) / (2.0 * h)
    return d


# ---------------------------------------------------------------------------
# Power weight profiles


def sigma_min(alpha: float, p: float) -> int:
    """Smallest profile power keeping every closed-form exponent positive."""
    return math.ceil((1.0 + alpha) * p / (p - 1.0)) + 2


@dataclass(frozen=True)
class WProfile:
    """Power weight profile in time.

    kind="decaying" is (1 - t/T)^sigma on [0, T]; kind="growing" is
    (1 + t/T)^sigma on [-T, 0].  The recommended sigma for a given
    (alpha, p) is :func:`sigma_min`; integrability of the weighted
    integrals is checked where it is needed.
    """

    kind: str
    sigma: float
    T: float

    def __post_init__(self):
        if self.kind not in ("decaying", "growing"):
            raise ValidationError("profile kind must be 'decaying' or 'growing'")
        if not self.sigma > 0:
            raise ValidationError("sigma must be > 0")
        if not self.T > 0:
            raise ValidationError("T must be > 0")

    def domain(self) -> tuple[float, float]:
        return (0.0, self.T) if self.kind == "decaying" else (-self.T, 0.0)

    def _base(self, t) -> np.ndarray:
        sign = -1.0 if self.kind == "decaying" else 1.0
        return 1.0 + sign * np.asarray(t, dtype=float) / self.T


def w_profile_eval(w: WProfile, alpha: float, t, order="0"):
    """Closed-form value of the profile or of its fractional derivatives.

    order "0" returns the profile itself; "alpha" the right-sided derivative
    of order alpha taken toward the vanishing endpoint; "1+alpha" the
    composite derivative of order 1+alpha.  Values follow the exact
    Gamma-ratio formulas, so they serve as references for the grid operators.
    """
    _check_order(alpha)
    lo, hi = w.domain()
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < lo - 1e-12) or np.any(t_arr > hi + 1e-12):
        raise ValidationError(f"t outside profile domain [{lo}, {hi}]")
    base = w._base(t_arr)
    sigma, T = w.sigma, w.T
    key = str(order)
    if key == "0":
        out = base**sigma
    elif key == "alpha":
        out = (
            gamma_fn(sigma + 1.0)
            / gamma_fn(sigma + 1.0 - alpha)
            * T ** (-alpha)
            * base ** (sigma - alpha)
        )
    elif key in ("1+alpha", "alpha+1"):
        out = (
            gamma_fn(sigma + 1.0)
            / gamma_fn(sigma - alpha)
            * T ** (-(1.0 + alpha))
            * base ** (sigma - alpha - 1.0)
        )
    else:
        raise ValidationError(f"unknown derivative order {order!r}")
    return out if out.shape else float(out)


@dataclass(frozen=True)
class WeightedIntegral:
    """Dual evaluation of a weighted profile integral."""

    closed_form: float
    quadrature: float
    discrepancy: float


def weighted_profile_integral(
    w: WProfile, alpha: float, p: float, order="alpha"
) -> WeightedIntegral:
    """Integral of w^(-1/(p-1)) |D^order w|^(p/(p-1)) over the profile domain.

    Returns the analytic closed form K^(p/(p-1)) T^(1 - order*p/(p-1)) /
    (sigma - order*p/(p-1) + 1) together with an adaptive-quadrature
    evaluation of the same integrand and their absolute discrepancy.
    """
    _check_order(alpha)
    if p <= 1.0:
        raise ValidationError("p must be > 1")
    key = str(order)
    if key == "alpha":
        order_val = alpha
        K = gamma_fn(w.sigma + 1.0) / gamma_fn(w.sigma + 1.0 - alpha)
    elif key in ("1+alpha", "alpha+1"):
        order_val = 1.0 + alpha
        K = gamma_fn(w.sigma + 1.0) / gamma_fn(w.sigma - alpha)
    else:
        raise ValidationError(f"unknown derivative order {order!r}")
    q = p / (p - 1.0)
    exponent = w.sigma - order_val * q
    if exponent <= -1.0:
        raise ValidationError(
            f"integrand exponent sigma - order*p/(p-1) = {exponent:g} "
            "must exceed -1 for integrability"
        )
    closed = K**q * w.T ** (1.0 - order_val * q) / (exponent + 1.0)

    # adaptive-quadrature route on the same integrand, in the base variable
    def integrand(base):
        return (K * w.T ** (-order_val)) ** q * base**exponent

    val, _ = quad(integrand, 0.0, 1.0, limit=200)
    numeric = val * w.T
    return WeightedIntegral(
        closed_form=closed, quadrature=numeric, discrepancy=abs(closed - numeric)
    )
