"""Self-check suites behind the `memheat verify` subcommand.

Each check compares a computed quantity against an independent reference
(closed forms, adaptive quadrature, analytic kernels) at a pinned tolerance
and reports one line: name, expected, got, tol, pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from memheat.core import Grid, GridFunction, make_params
from memheat.fractional import (
    TimeGrid,
    WProfile,
    gamma_fn,
    rl_derivative,
    rl_integral,
    w_profile_eval,
    weighted_profile_integral,
)
from memheat.liouville import (
    BumpSpec,
    bump_eval,
    certificate_terms,
    default_ell,
    junction_derivative_probe,
    polyharmonic_bound_check,
)
from memheat.memory import MemoryLedger
from memheat.spectral import (
    apply_semigroup,
    decay_slope_probe,
    gaussian_kernel_reference,
    kernel_slice,
)

SUITES = ("fractional", "spectral", "memory", "liouville")


@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    got: float
    tol: float
    passed: bool

    def line(self) -> str:
        return (
            f"{self.name}, {self.expected!r}, {self.got!r}, {self.tol!r}, "
            f"{'pass' if self.passed else 'FAIL'}"
        )


def _close(name, expected, got, tol, relative=True) -> Check:
    scale = abs(expected) if (relative and expected != 0.0) else 1.0
    return Check(name, float(expected), float(got), float(tol),
                 abs(got - expected) <= tol * scale)


def _below(name, got, tol) -> Check:
    return Check(name, 0.0, float(got), float(tol), got <= tol)


def fractional_suite(M: int = 4096) -> list[Check]:
    checks = []
    grid = TimeGrid(0.0, 1.0, M)
    t = grid.nodes()

    # power-law identities at the right endpoint
    for mu, alpha, tag in ((0.0, 0.5, "const"), (1.0, 0.5, "linear")):
        got = rl_integral(grid, t**mu, alpha)[-1]
        expected = gamma_fn(mu + 1.0) / gamma_fn(mu + 1.0 + alpha)
        checks.append(_close(f"rl_integral_power_{tag}", expected, got, 1e-6))
    for mu, alpha, tag in ((0.5, 0.5, "sqrt"), (0.0, 0.5, "const")):
        got = rl_derivative(grid, t**mu, alpha)[-1]
        expected = gamma_fn(mu + 1.0) / gamma_fn(mu + 1.0 - alpha)
        checks.append(_close(f"rl_derivative_power_{tag}", expected, got, 1e-6))

    # left-inverse identity, interior window (identity holds on the open
    # interval; the first nodes sit in the quadrature boundary layer)
    window = t >= 0.05
    worst = 0.0
    for f in (np.ones_like(t), t, t**2, np.sin(t)):
        comp = rl_derivative(grid, rl_integral(grid, f, 0.5), 0.5)
        worst = max(worst, float(np.max(np.abs(comp - f)[window])))
    checks.append(_below("left_inverse_identity", worst, 1e-4))

    # integration by parts for smooth functions flat at both endpoints
    f = (t * (1.0 - t)) ** 4
    g = np.sin(np.pi * t) ** 5
    lhs = np.trapezoid(f * rl_derivative(grid, g, 0.4, "left"), dx=grid.h)
    rhs = np.trapezoid(g * rl_derivative(grid, f, 0.4, "right"), dx=grid.h)
    scale = np.trapezoid(np.abs(f * rl_derivative(grid, g, 0.4, "left")), dx=grid.h)
    checks.append(_below("integration_by_parts_residual", abs(lhs - rhs) / scale, 1e-6))

    # profile closed forms and weighted integrals
    w = WProfile("decaying", 4.0, 1.0)
    got = w_profile_eval(w, 0.5, 0.0, "alpha")
    checks.append(_close("profile_derivative_value", gamma_fn(5.0) / gamma_fn(4.5),
                         got, 1e-9))
    wi = weighted_profile_integral(w, 0.5, 2.0, "alpha")
    checks.append(_below("weighted_integral_discrepancy",
                         wi.discrepancy / wi.closed_form, 1e-6))
    w2 = WProfile("decaying", 4.0, 2.0)
    ratio = (
        weighted_profile_integral(w2, 0.5, 3.0, "alpha").closed_form
        / weighted_profile_integral(WProfile("decaying", 4.0, 1.0), 0.5, 3.0,
                                    "alpha").closed_form
    )
    checks.append(_close("weighted_integral_T_scaling", 2.0 ** 0.25, ratio, 1e-3))
    return checks


def spectral_suite(half_width: float = 20.0, points: int = 2048) -> list[Check]:
    checks = []
    grid = Grid(dim=1, half_width=half_width, points_per_axis=points)

    kern = kernel_slice(grid, 1, 1.0)
    ref = gaussian_kernel_reference(grid, 1.0)
    checks.append(_below("gaussian_kernel_sup_error",
                         float(np.max(np.abs(kern.values - ref))), 1e-8))

    worst = 0.0
    for m in (1, 2, 3):
        for tt in (0.1, 1.0, 10.0):
            mass = kernel_slice(grid, m, tt).integral()
            worst = max(worst, abs(mass - 1.0))
    checks.append(_below("kernel_mass_error", worst, 1e-12))

    k2 = kernel_slice(grid, 2, 1.0)
    checks.append(_below("sign_change_m2",
                         float(np.min(k2.values)) / float(np.max(k2.values)), -1e-4))

    f = GridFunction(grid, np.cos(np.pi * grid.axis() / half_width))
    ab = apply_semigroup(apply_semigroup(f, 2, 0.3), 2, 0.7)
    once = apply_semigroup(f, 2, 1.0)
    checks.append(_below("semigroup_law_error",
                         float(np.max(np.abs(ab.values - once.values))), 1e-12))

    tvals = np.geomspace(1.0, 20.0, 9)
    for m, target in ((1, -0.5), (2, -0.25)):
        slope = decay_slope_probe(m, 1, 1.0, math.inf, tvals,
                                  half_width=max(half_width, 30.0), points=points)
        checks.append(_close(f"decay_slope_m{m}", target, slope, 0.02))
    return checks


def memory_suite() -> list[Check]:
    checks = []
    gamma = 0.5
    stamps = np.linspace(0.0, 1.0, 65)

    led = MemoryLedger(gamma, (1,))
    for s in stamps:
        led.append(s, np.array([1.0]))
    got = led.accumulate(1.0)[0]
    checks.append(_close("constant_integrand", 2.0, got, 1e-12))

    led = MemoryLedger(gamma, (1,))
    for s in stamps:
        led.append(s, np.array([s]))
    checks.append(_close("linear_integrand_beta", 4.0 / 3.0,
                         led.accumulate(1.0)[0], 1e-10))

    errs = []
    for M in (64, 128, 256):
        led = MemoryLedger(gamma, (1,))
        for s in np.linspace(0.0, 1.0, M + 1):
            led.append(s, np.array([s**2]))
        exact = gamma_fn(3.0) * gamma_fn(0.5) / gamma_fn(3.5)
        errs.append(abs(led.accumulate(1.0)[0] - exact))
    order = np.log2(errs[0] / errs[1])
    checks.append(Check("quadratic_error_order", 2.0, float(order), 0.1,
                        order >= 1.9))

    led = MemoryLedger(gamma, (1,))
    for s in np.linspace(0.0, 1.0, 33):
        led.append(s, np.array([2.0 + 3.0 * s]))
    before = led.accumulate(1.0)[0]
    after = led.trim("coarsen-tail", 0.5).accumulate(1.0)[0]
    checks.append(_close("trim_linear_exactness", before, after, 1e-12))
    return checks


def liouville_suite(points: int = 512) -> list[Check]:
    checks = []
    checks.append(_below("junction_derivatives", junction_derivative_probe(), 1e-6))

    chk_lo = polyharmonic_bound_check(5, 1, 2.0, points=points)
    chk_hi = polyharmonic_bound_check(5, 1, 2.0, points=2 * points)
    drift = abs(chk_hi.c_hat - chk_lo.c_hat) / chk_hi.c_hat
    checks.append(_below("polyharmonic_constant_stability", drift, 0.01))
    checks.append(_close("l3_scaling_ratio", chk_hi.predicted_ratio,
                         chk_hi.scaling_ratio, 0.02))

    params = make_params(1, 1, 0.5, 2.0)
    grid = Grid(dim=1, half_width=10.0, points_per_axis=points)
    T, R = 4.0, 2.0
    times = np.linspace(-T, T, 65)
    x = grid.axis()
    values = np.exp(-x[None, :] ** 2) * (1.0 + 0.3 * np.sin(times))[:, None]
    rep = certificate_terms(times, values, grid, T, R, 5.0, params)
    checks.append(Check("holder_bound_I1", rep.holder_bound_I1, rep.I1, 1e-6,
                        rep.I1 <= rep.holder_bound_I1 * (1.0 + 1e-6)))
    checks.append(Check("young_bound_I2", rep.young_bound_I2, rep.I2, 1e-6,
                        rep.I2 <= rep.young_bound_I2 * (1.0 + 1e-6)))

    ones = np.ones((times.size,) + grid.shape)
    rep1 = certificate_terms(times, ones, grid, T, R, 5.0, params)
    w = WProfile("decaying", 5.0, T)
    tpos = times[times >= 0.0]
    tw = np.trapezoid(w_profile_eval(w, params.alpha, tpos, "0"), tpos)
    phi_R, _ = bump_eval(BumpSpec(default_ell(1, 2.0), R), grid, 1)
    sep = tw * float(np.sum(phi_R)) * grid.cell_volume
    checks.append(_close("separable_product", sep, rep1.I, 1e-8))
    return checks


def run_suite(name: str, half_width: float = 20.0, points: int = 2048) -> list[Check]:
    if name == "fractional":
        return fractional_suite()
    if name == "spectral":
        return spectral_suite(half_width, points)
    if name == "memory":
        return memory_suite()
    if name == "liouville":
        return liouville_suite(min(512, points))
    raise ValueError(f"unknown suite {name!r}")
