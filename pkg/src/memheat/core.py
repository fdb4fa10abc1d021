"""Shared parameter, grid, and field types.

Everything downstream is parameterized by the quadruple (n, m, gamma, p):
spatial dimension, polyharmonic order, memory exponent, and nonlinearity
power.  Fields live on uniform periodic grids; the only numerics here are
norms and arithmetic on derived exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INFINITY = math.inf


class ValidationError(ValueError):
    """Raised when a constructor argument violates a type invariant."""


@dataclass(frozen=True)
class Params:
    """Problem parameters (n, m, gamma, p) with their validity ranges.

    n >= 1 spatial dimension, m >= 1 polyharmonic order, 0 < gamma < 1
    memory exponent, p > 1 nonlinearity power.
    """

    n: int
    m: int
    gamma: float
    p: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValidationError("n must be an integer >= 1")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ValidationError("m must be an integer >= 1")
        if not (0.0 < self.gamma < 1.0):
            raise ValidationError("gamma must lie in (0,1)")
        if not self.p > 1.0:
            raise ValidationError("p must be > 1")

    @property
    def alpha(self) -> float:
        """Fractional order 1 - gamma of the equivalent integral form."""
        return 1.0 - self.gamma

    @property
    def c_alpha(self) -> float:
        """Gamma(alpha), the constant tying the memory kernel to I^alpha."""
        return math.gamma(self.alpha)


def make_params(n: int, m: int, gamma: float, p: float) -> Params:
    """Validated construction of :class:`Params`."""
    return Params(n=n, m=m, gamma=gamma, p=p)


@dataclass(frozen=True)
class DerivedExponents:
    """Exponents derived from (n, m, gamma, p).

    alpha1 is the blow-up rate exponent (2-gamma)/(p-1).  The critical power
    has two branches: a memory branch 1/gamma and a diffusive branch
    1 + 2m(2-gamma)/(n - 2m + 2m*gamma)_+, degenerate (infinite) when the
    positive part vanishes; p_star is their maximum.  delta is the decay
    exponent of the subcritical certificate bound.
    """

    alpha1: float
    p_star_memory: float
    p_star_diffusive: float
    p_star: float
    delta: float


def derived_exponents(params: Params) -> DerivedExponents:
    n, m, gamma, p = params.n, params.m, params.gamma, params.p
    alpha = params.alpha
    alpha1 = (2.0 - gamma) / (p - 1.0)
    branch_memory = 1.0 / gamma
    positive_part = n - 2.0 * m + 2.0 * m * gamma
    if positive_part > 0.0:
        branch_diffusive = 1.0 + 2.0 * m * (2.0 - gamma) / positive_part
    else:
        branch_diffusive = INFINITY
    delta = -1.0 + (1.0 + alpha) * p / (p - 1.0) - n / (2.0 * m)
    return DerivedExponents(
        alpha1=alpha1,
        p_star_memory=branch_memory,
        p_star_diffusive=branch_diffusive,
        p_star=max(branch_memory, branch_diffusive),
        delta=delta,
    )


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box [-L, L)^dim.

    points_per_axis must be a power of two; index arithmetic wraps modulo N
    on each axis and spacing * N == 2L exactly.
    """

    dim: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if not self.half_width > 0.0:
            raise ValidationError("half_width must be > 0")
        N = self.points_per_axis
        if N < 2 or (N & (N - 1)) != 0:
            raise ValidationError("points_per_axis must be a power of two >= 2")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> np.ndarray:
        """Coordinates along one axis: -L, -L+h, ..., L-h."""
        return -self.half_width + self.spacing * np.arange(self.points_per_axis)

    def coords(self) -> list[np.ndarray]:
        """Meshgrid coordinate arrays, one per axis (ij indexing)."""
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        """Euclidean distance to the box center."""
        return np.sqrt(sum(c**2 for c in self.coords()))


@dataclass
class GridFunction:
    """Real field sampled on a periodic grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> GridFunction:
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> GridFunction:
        return cls(grid, np.full(grid.shape, float(c)))

    def copy(self) -> GridFunction:
        return GridFunction(self.grid, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        """Riemann-sum integral over the box."""
        return float(np.sum(self.values) * self.grid.cell_volume)

    def mean(self) -> float:
        return float(np.mean(self.values))


def lp_norm(f: GridFunction, r: float) -> float:
    """Riemann-sum L^r norm of a field; exact maximum for r = inf.

    Raises a domain error for r < 1.
    """
    if r < 1.0:
        raise ValidationError("norm exponent r must satisfy r >= 1")
    if not f.is_finite():
        raise ValidationError("field contains non-finite values")
    if math.isinf(r):
        return f.sup_norm()
    return float((np.sum(np.abs(f.values) ** r) * f.grid.cell_volume) ** (1.0 / r))


def gaussian_bump(grid: Grid, height: float, width: float) -> GridFunction:
    """Smooth localized datum height * exp(-|x|^2 / (2 width^2))."""
    r2 = sum(c**2 for c in grid.coords())
    return GridFunction(grid, height * np.exp(-r2 / (2.0 * width**2)))


def random_band_limited(grid: Grid, seed: int, amplitude: float) -> GridFunction:
    """Deterministic smooth random field scaled to the requested sup-norm.

    Spectral coefficients are drawn on the lowest eighth of the frequency
    lattice with a Gaussian roll-off, so fields stay resolved on the grid.
    """
    rng = np.random.default_rng(seed)
    freqs = np.meshgrid(
        *([np.fft.fftfreq(grid.points_per_axis)] * grid.dim), indexing="ij"
    )
    k2 = sum((f * grid.points_per_axis) ** 2 for f in freqs)
    kmax = grid.points_per_axis / 8.0
    envelope = np.exp(-k2 / (2.0 * (kmax / 2.0) ** 2)) * (k2 <= kmax**2)
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    field = np.fft.ifftn(coeff * envelope).real
    peak = np.max(np.abs(field))
    if peak == 0.0:
        return GridFunction.zeros(grid)
    return GridFunction(grid, field * (amplitude / peak))
