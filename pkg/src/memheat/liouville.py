"""Smooth bump test functions and the nonexistence-certificate quadratures.

A compactly supported radial bump (flat inside radius 1, vanishing beyond 2,
glued by the classical exp(-1/s) transition) is raised to a power ell and
rescaled to radius R.  Space-time fields are tested against weights built
from the bump and the power profiles of :mod:`memheat.fractional`; the
resulting functional inequalities decay in the horizon T at regime-specific
rates, which the scan measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from memheat.core import Grid, Params, ValidationError, derived_exponents
from memheat.fractional import WProfile, gamma_fn, sigma_min, weighted_profile_integral


def bump_profile(r) -> np.ndarray:
    """Radial C-infinity bump: 1 for r <= 1, 0 for r >= 2.

    Transition g(2-r)/(g(2-r)+g(r-1)) with g(s) = exp(-1/s); all one-sided
    derivatives vanish at both junctions.
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    out[r <= 1.0] = 1.0
    band = (r > 1.0) & (r < 2.0)
    if np.any(band):
        s = r[band]
        with np.errstate(over="ignore", under="ignore"):
            g_hi = np.exp(-1.0 / (2.0 - s))
            g_lo = np.exp(-1.0 / (s - 1.0))
            out[band] = g_hi / (g_hi + g_lo)
    return out if out.shape else float(out)


def default_ell(m: int, p: float) -> int:
    """Smallest odd power exceeding the 2mp/(p-1) requirement."""
    return 2 * math.ceil(m * p / (p - 1.0)) + 1


@dataclass(frozen=True)
class BumpSpec:
    """Rescaled bump power phi^ell(x/R)."""

    ell: int
    R: float

    def __post_init__(self):
        if self.ell < 1:
            raise ValidationError("ell must be a positive integer")
        if not self.R > 0:
            raise ValidationError("R must be > 0")

    def value(self, radius) -> np.ndarray:
        return bump_profile(np.asarray(radius) / self.R) ** self.ell


def laplacian_iterated(values: np.ndarray, spacing: float, m: int) -> np.ndarray:
    """m applications of the second-order centered discrete Laplacian."""
    out = values
    for _ in range(m):
        acc = np.zeros_like(out)
        for axis in range(out.ndim):
            acc += np.roll(out, 1, axis) - 2.0 * out + np.roll(out, -1, axis)
        out = acc / spacing**2
    return out


def bump_eval(spec: BumpSpec, grid: Grid, m: int):
    """Sampled phi_R and its discrete polyharmonic Delta^m(phi_R) on a grid."""
    radius = grid.radius()
    phi_R = spec.value(radius)
    return phi_R, laplacian_iterated(phi_R, grid.spacing, m)


def junction_derivative_probe(order_max: int = 4, h: float = 0.004) -> float:
    """Largest one-sided finite-difference derivative at the junctions.

    Forward differences just inside r = 1 and backward differences just
    inside r = 2, orders 1..order_max; all must vanish for the glued bump.
    """
    worst = 0.0
    for k in range(1, order_max + 1):
        coeff = np.array([(-1.0) ** (k - j) * math.comb(k, j) for j in range(k + 1)])
        fwd = bump_profile(1.0 + h * np.arange(k + 1))
        bwd = bump_profile(2.0 - h * np.arange(k, -1, -1))
        worst = max(
            worst,
            abs(float(coeff @ fwd) / h**k),
            abs(float(coeff @ bwd) / h**k),
        )
    return worst


@dataclass(frozen=True)
class PolyharmonicCheck:
    c_hat: float
    l3_value: float
    scaling_ratio: float
    predicted_ratio: float


def polyharmonic_bound_check(
    ell: int,
    m: int,
    p: float,
    n: int = 1,
    points: int = 1024,
    phi_cut: float = 1e-8,
    R: float = 1.0,
) -> PolyharmonicCheck:
    """Constant of the pointwise polyharmonic bump bound and its integral.

    c_hat is the largest |Delta^m(phi^ell)| / phi^(ell-2m) over the
    transition annulus (base bump phi >= phi_cut).  l3_value is the singular
    weighted integral of phi_R at scale R; the scaling ratio compares R and
    2R on one fixed grid against the exact exponent n - 2mp/(p-1).
    """
    q = p / (p - 1.0)
    if ell <= 2.0 * m * q:
        raise ValidationError(f"need ell > 2mp/(p-1) = {2.0 * m * q:g}")
    grid = Grid(dim=n, half_width=5.0 * R, points_per_axis=points)
    radius = grid.radius()

    # unit-scale annulus constant
    base = bump_profile(radius / R)
    phi_ell = base**ell
    lap = laplacian_iterated(phi_ell, grid.spacing, m)
    annulus = (radius >= R) & (radius <= 2.0 * R) & (base >= phi_cut)
    c_hat = float(np.max(np.abs(lap[annulus]) / base[annulus] ** (ell - 2 * m)))
    # undo the grid scale so c_hat refers to the unit bump
    c_hat *= R ** (2 * m)

    def l3(scale: float) -> float:
        spec = BumpSpec(ell=ell, R=scale)
        phi_R, lap_R = bump_eval(spec, grid, m)
        kept = phi_R >= phi_cut
        integrand = phi_R[kept] ** (-1.0 / (p - 1.0)) * np.abs(lap_R[kept]) ** q
        return float(np.sum(integrand) * grid.cell_volume)

    v1 = l3(R)
    v2 = l3(2.0 * R)
    return PolyharmonicCheck(
        c_hat=c_hat,
        l3_value=v1,
        scaling_ratio=v2 / v1,
        predicted_ratio=2.0 ** (n - 2.0 * m * q),
    )


# ---------------------------------------------------------------------------
# Certificate functionals


def classify_regime(params: Params, tol: float = 1e-12) -> str:
    exps = derived_exponents(params)
    if exps.delta > tol:
        return "subcritical"
    if abs(exps.delta) <= tol:
        return "critical"
    if params.p < 1.0 / params.gamma:
        return "memory"
    return "supercritical"


@dataclass(frozen=True)
class CertificateReport:
    """Functional values and bound terms of the certificate at one (T, R)."""

    T: float
    R: float
    sigma: float
    regime: str
    I: float
    J: float
    I1: float
    I2: float
    J1: float
    J2: float
    I1_excluded: float
    J1_excluded: float
    tilde_I: float
    tilde_J: float
    boundary_term: float
    holder_bound_I1: float
    holder_bound_J1: float
    young_bound_I2: float
    young_bound_J2: float
    rhs_bound: float


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t)
    if t.size < 2:
        return w
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def young_constant(epsilon: float, p: float) -> float:
    """C such that a*b <= epsilon a^p + C b^(p/(p-1))."""
    return (p - 1.0) / p * (epsilon * p) ** (-1.0 / (p - 1.0))


def certificate_terms(
    times: np.ndarray,
    values: np.ndarray,
    grid: Grid,
    T: float,
    R: float,
    sigma: float,
    params: Params,
    phi_cut: float = 1e-8,
    regime: str | None = None,
) -> CertificateReport:
    """Evaluate the certificate functionals for a field sampled on [-T, T].

    `values` has shape (len(times), *grid.shape); time quadrature is
    trapezoidal on each half-slab, space quadrature is the Riemann sum.
    The Hoelder and Young bound factors are computed on the same discrete
    nodes, so the reported inequalities are exact up to roundoff; the
    contribution of nodes excluded by the singular-weight cut is reported
    separately.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape[0] != times.size:
        raise ValidationError("values must have one slice per time node")
    if times[0] > -T + 1e-12 or times[-1] < T - 1e-12:
        raise ValidationError("samples must span [-T, T]")
    if sigma < sigma_min(params.alpha, params.p):
        raise ValidationError(
            f"sigma must be >= sigma_min = {sigma_min(params.alpha, params.p)}"
        )
    alpha = params.alpha
    p = params.p
    q = p / (p - 1.0)
    ell = default_ell(params.m, p)
    spec = BumpSpec(ell=ell, R=R)
    phi_R, lap_R = bump_eval(spec, grid, params.m)
    radius = grid.radius()
    vol = grid.cell_volume
    abs_lap = np.abs(lap_R)
    outer = radius > R
    kept = phi_R >= phi_cut
    cut_only = (~kept) & (abs_lap > 0.0)

    # interpolated slice at t = 0 for the junction boundary term
    j = int(np.searchsorted(times, 0.0))
    if j < times.size and abs(times[j]) < 1e-14:
        v0 = values[j]
    elif 0 < j < times.size:
        frac = (0.0 - times[j - 1]) / (times[j] - times[j - 1])
        v0 = (1.0 - frac) * values[j - 1] + frac * values[j]
    else:
        raise ValidationError("samples must bracket t = 0")

    profile_decay = WProfile("decaying", sigma, T)
    profile_grow = WProfile("growing", sigma, T)

    def half(side: str):
        if side == "pos":
            mask = times >= -1e-14
            w = profile_decay
            tt = np.clip(times[mask], 0.0, T)
        else:
            mask = times <= 1e-14
            w = profile_grow
            tt = np.clip(times[mask], -T, 0.0)
        vslice = values[mask]
        tw = _trapezoid_weights(tt)
        base = w._base(tt)
        w0 = base**sigma
        K_a = gamma_fn(sigma + 1.0) / gamma_fn(sigma + 1.0 - alpha)
        K_1a = gamma_fn(sigma + 1.0) / gamma_fn(sigma - alpha)
        d_a = K_a * T ** (-alpha) * base ** (sigma - alpha)
        d_1a = K_1a * T ** (-(1.0 + alpha)) * base ** (sigma - alpha - 1.0)

        absv = np.abs(vslice)
        pv = absv**p
        space_axes = tuple(range(1, vslice.ndim))

        big_i = float(np.sum(tw * w0 * np.sum(pv * phi_R, axis=space_axes)) * vol)
        tilde = float(
            np.sum(tw * w0 * np.sum(pv * (phi_R * outer), axis=space_axes)) * vol
        )
        i1 = float(
            np.sum(tw * d_a * np.sum(absv * (abs_lap * kept), axis=space_axes)) * vol
        )
        i1_exc = float(
            np.sum(tw * d_a * np.sum(absv * (abs_lap * cut_only), axis=space_axes))
            * vol
        )
        i2 = float(np.sum(tw * d_1a * np.sum(absv * phi_R, axis=space_axes)) * vol)

        # discrete Hoelder factors on the same nodes
        at_a = float(np.sum(tw * K_a**q * T ** (-alpha * q) * base ** (sigma - alpha * q)))
        at_1a = float(
            np.sum(
                tw
                * K_1a**q
                * T ** (-(1.0 + alpha) * q)
                * base ** (sigma - (1.0 + alpha) * q)
            )
        )
        ax_l3 = float(
            np.sum(phi_R[kept] ** (-1.0 / (p - 1.0)) * abs_lap[kept] ** q) * vol
        )
        ax_mass = float(np.sum(phi_R) * vol)
        return big_i, tilde, i1, i1_exc, i2, at_a, at_1a, ax_l3, ax_mass

    I, tI, I1, I1x, I2, at_a_p, at_1a_p, ax_l3, ax_mass = half("pos")
    J, tJ, J1, J1x, J2, at_a_n, at_1a_n, _, _ = half("neg")

    c_sigma = gamma_fn(sigma + 1.0) / gamma_fn(sigma + 1.0 - alpha)
    boundary = float(c_sigma * T ** (-alpha) * np.sum(v0 * phi_R) * vol)

    holder_I1 = tI ** (1.0 / p) * (at_a_p * ax_l3) ** (1.0 / q)
    holder_J1 = tJ ** (1.0 / p) * (at_a_n * ax_l3) ** (1.0 / q)
    eps = gamma_fn(alpha) / 2.0
    c_eps = young_constant(eps, p)
    young_I2 = eps * I + c_eps * at_1a_p * ax_mass
    young_J2 = eps * J + c_eps * at_1a_n * ax_mass
    rhs = (2.0 / gamma_fn(alpha)) * (
        holder_I1
        + holder_J1
        + c_eps * (at_1a_p + at_1a_n) * ax_mass
        + 2.0 * abs(boundary)
    )
    return CertificateReport(
        T=T,
        R=R,
        sigma=sigma,
        regime=regime or classify_regime(params),
        I=I,
        J=J,
        I1=I1,
        I2=I2,
        J1=J1,
        J2=J2,
        I1_excluded=I1x,
        J1_excluded=J1x,
        tilde_I=tI,
        tilde_J=tJ,
        boundary_term=boundary,
        holder_bound_I1=holder_I1,
        holder_bound_J1=holder_J1,
        young_bound_I2=young_I2,
        young_bound_J2=young_J2,
        rhs_bound=rhs,
    )


# ---------------------------------------------------------------------------
# Decay scan


@dataclass(frozen=True)
class ScanRow:
    T: float
    R: float
    head_term: float
    kernel_term: float
    rhs_total: float
    lhs: float


@dataclass(frozen=True)
class ScanResult:
    regime: str
    rows: list[ScanRow]
    fitted_slope: float
    predicted_slope: float


def _reference_space_factors(ell: int, m: int, p: float, n: int, points: int):
    """Unit-scale quadratures of the bump mass and the singular integral.

    Both scale exactly in R (R^n and R^(n-2mq)), so one reference grid
    serves the whole scan.
    """
    chk = polyharmonic_bound_check(ell, m, p, n=n, points=points)
    grid = Grid(dim=n, half_width=5.0, points_per_axis=points)
    spec = BumpSpec(ell=ell, R=1.0)
    phi_R, _ = bump_eval(spec, grid, m)
    mass = float(np.sum(phi_R) * grid.cell_volume)
    return chk.l3_value, mass


def certificate_scan(
    params: Params,
    regime: str,
    T_values,
    R_fixed: float | None = None,
    sigma: float | None = None,
    ell: int | None = None,
    points: int = 1024,
    v_family=None,
) -> ScanResult:
    """Decay table of the absorbed certificate bound along a T-sequence.

    For each horizon T the bound splits into a head term (the fully
    absorbed part, exponent 1-(1+alpha)p/(p-1) in T times R^n) and a kernel
    term (exponent 1-alpha*p/(p-1) times R^(n-2mp/(p-1))); the regime fixes
    the R(T) coupling.  v_family, when given, is a callable
    T, R -> (times, values, grid) whose functionals provide the left side
    of the inequality per row.
    """
    exps = derived_exponents(params)
    alpha = params.alpha
    p = params.p
    q = p / (p - 1.0)
    n, m = params.n, params.m
    if regime == "subcritical":
        if exps.delta <= 0.0:
            raise ValidationError(
                f"subcritical scan needs delta > 0, got delta = {exps.delta:g}"
            )
        predicted = -exps.delta
    elif regime == "memory":
        if not params.p < 1.0 / params.gamma:
            raise ValidationError(
                f"memory scan needs p < 1/gamma (delta = {exps.delta:g} is "
                "irrelevant here)"
            )
        if R_fixed is None:
            raise ValidationError("memory scan needs a fixed R")
        predicted = 1.0 - alpha * q
    else:
        raise ValidationError(f"unsupported scan regime {regime!r}")

    sigma = float(sigma_min(alpha, p) if sigma is None else sigma)
    ell = default_ell(m, p) if ell is None else ell
    l3_ref, mass_ref = _reference_space_factors(ell, m, p, n, points)

    eps = gamma_fn(alpha) / 4.0
    c_eps = young_constant(eps, p)
    rows = []
    for T in np.asarray(T_values, dtype=float):
        R = T ** (1.0 / (2.0 * m)) if regime == "subcritical" else float(R_fixed)
        w = WProfile("decaying", sigma, T)
        at_a = weighted_profile_integral(w, alpha, p, "alpha").closed_form
        at_1a = weighted_profile_integral(w, alpha, p, "1+alpha").closed_form
        # decaying and growing halves contribute equal factors
        head = (4.0 / gamma_fn(alpha)) * c_eps * 2.0 * at_1a * (mass_ref * R**n)
        kernel = (
            (4.0 / gamma_fn(alpha))
            * c_eps
            * 2.0
            * at_a
            * (l3_ref * R ** (n - 2.0 * m * q))
        )
        lhs = 0.0
        if v_family is not None:
            times, values, grid = v_family(T, R)
            rep = certificate_terms(
                times, values, grid, T, R, sigma, params, regime=regime
            )
            lhs = rep.I + rep.J
        rows.append(
            ScanRow(
                T=float(T),
                R=float(R),
                head_term=head,
                kernel_term=kernel,
                rhs_total=head + kernel,
                lhs=lhs,
            )
        )
    logT = np.log([r.T for r in rows])
    logrhs = np.log([r.rhs_total for r in rows])
    fitted = float(np.polyfit(logT, logrhs, 1)[0])
    return ScanResult(
        regime=regime, rows=rows, fitted_slope=fitted, predicted_slope=predicted
    )
