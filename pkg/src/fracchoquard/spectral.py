"""Periodic grids, Fourier multipliers and Riesz-potential convolution.

Fourier convention: ``u_hat(xi) = int u(x) exp(-i xi.x) dx``. The symbol of
``(-Delta)^s`` is ``|xi|^(2s)`` and the Riesz kernel ``|x|^(alpha-N)`` has
transform ``gamma(alpha) |xi|^(-alpha)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy import special

from .errors import AlphaOutOfRange, BudgetExceeded, SingularResolvent, ValidationError

DEFAULT_MAX_ELEMENTS = 10**8


class ConvolutionMode(str, enum.Enum):
    PERIODIC = "PeriodicMultiplier"
    FREE_SPACE = "FreeSpacePadded"


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on the box ``[-L, L)^dim``, ``n`` points per axis.

    Nodes sit at ``-L + (j + 1/2) h``, so the node set is invariant under
    ``x -> -x`` and every axis permutation; the origin is a cell corner.
    """

    dim: int
    n: int
    half_width: float

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * (np.arange(self.n) + 0.5)

    def coords(self) -> list[np.ndarray]:
        """Open (broadcastable) coordinate arrays, one per axis."""
        return np.meshgrid(*([self.axis] * self.dim), indexing="ij", sparse=True)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def half_cell_offsets(self) -> list[np.ndarray]:
        """Node positions in units of ``h/2``: odd integers ``2j + 1 - n``."""
        j = 2 * np.arange(self.n, dtype=np.int64) + 1 - self.n
        return np.meshgrid(*([j] * self.dim), indexing="ij", sparse=True)

    def frequencies(self) -> list[np.ndarray]:
        """Angular frequencies per axis in the real-FFT layout (last axis halved)."""
        return _rfft_frequencies(self.n, self.h, self.dim)

    def xi_norm(self) -> np.ndarray:
        return _xi_norm(self)


def make_grid(dim: int, n: int, L: float, max_elements: int | None = None) -> Grid:
    if int(dim) != dim or dim < 1:
        raise ValidationError(f"dim must be an integer >= 1, got {dim!r}")
    if int(n) != n or n < 8 or n % 2:
        raise ValidationError(f"points per axis must be an even integer >= 8, got {n!r}")
    if not (L > 0 and math.isfinite(L)):
        raise ValidationError(f"half width must be positive, got {L!r}")
    cap = DEFAULT_MAX_ELEMENTS if max_elements is None else max_elements
    if int(n) ** int(dim) > cap:
        raise BudgetExceeded(f"{n}^{dim} grid points exceed the element cap {cap}")
    return Grid(int(dim), int(n), float(L))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`Grid` (array of shape ``grid.shape``)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValidationError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        return math.sqrt(inner(self, self))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __mul__(self, c):
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        return Field(self.grid, self.values - other.values)


def sample(grid: Grid, func) -> Field:
    """Sample ``func(*coords)`` on the grid."""
    return Field(grid, np.broadcast_to(func(*grid.coords()), grid.shape).copy())


def inner(u: Field, v: Field) -> float:
    return float(np.vdot(u.values, v.values).real) * u.grid.cell_volume


# -- transforms ---------------------------------------------------------------


def _forward(a):
    return sfft.rfftn(a)


def _inverse(a, shape):
    return sfft.irfftn(a, s=shape)


@functools.lru_cache(maxsize=32)
def _rfft_frequencies(n, h, dim):
    full = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    half = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    axes = [full] * (dim - 1) + [half]
    return np.meshgrid(*axes, indexing="ij", sparse=True)


@functools.lru_cache(maxsize=32)
def _xi_norm(grid):
    k = _rfft_frequencies(grid.n, grid.h, grid.dim)
    return np.sqrt(sum(c * c for c in k))


@functools.lru_cache(maxsize=64)
def _power_symbol(grid, exponent):
    xi = _xi_norm(grid)
    with np.errstate(divide="ignore"):
        sym = xi**exponent
    sym.flat[0] = 0.0
    return sym


def apply_symbol(u: np.ndarray, grid: Grid, symbol: np.ndarray) -> np.ndarray:
    return _inverse(_forward(u) * symbol, grid.shape)


def padded_grid(grid: Grid) -> Grid:
    return Grid(grid.dim, 2 * grid.n, 2.0 * grid.half_width)


def _embed(grid, values):
    big = np.zeros((2 * grid.n,) * grid.dim)
    big[(slice(0, grid.n),) * grid.dim] = values
    return big


def _crop(grid, big):
    return np.ascontiguousarray(big[(slice(0, grid.n),) * grid.dim])


def _flap(grid, values, s2, mode=ConvolutionMode.PERIODIC):
    if s2 == 0:
        return np.array(values, dtype=float, copy=True)
    if mode == ConvolutionMode.FREE_SPACE:
        big = padded_grid(grid)
        padded = _forward(_embed(grid, values))
        sym = _power_symbol(big, 2.0 * s2) + _image_correction_hat(grid, float(s2))
        return _crop(grid, _inverse(padded * sym, big.shape))
    return apply_symbol(values, grid, _power_symbol(grid, 2.0 * s2))


@functools.lru_cache(maxsize=16)
def _image_correction_hat(grid, s2, shells=2):
    """Spectrum of the convolution that removes the periodic images of the
    zero-padded field from the padded multiplier.

    For ``x`` outside the support of ``f``,
    ``(-Delta)^s f(x) = c int f(y) |x-y|^(-N-2s) dy`` with
    ``c = 4^s Gamma(N/2+s) / (pi^(N/2) Gamma(-s))``, so the images at
    spacing ``D = 4L`` contribute ``c h^N sum_y I(x-y) f(y)`` with the lattice
    sum ``I(z) = sum_{m != 0} |z - m D|^(-N-2s)``, which is subtracted.
    """
    dim, n, h = grid.dim, grid.n, grid.h
    c = 4.0**s2 * special.gamma(dim / 2.0 + s2) * special.rgamma(-s2) / math.pi ** (dim / 2.0)
    if c == 0.0:
        return 0.0
    period = 2 * n * h
    a = dim + 2.0 * s2
    d = np.fft.fftfreq(2 * n, d=1.0 / (2 * n)) * h
    if dim == 1:
        lattice = period**-a * (special.zeta(a, 1.0 - d / period) + special.zeta(a, 1.0 + d / period))
    else:
        mesh = np.meshgrid(*([d] * dim), indexing="ij", sparse=True)
        lattice = np.zeros((2 * n,) * dim)
        for m in np.ndindex(*((2 * shells + 1,) * dim)):
            m = [k - shells for k in m]
            if any(m):
                r2 = sum((c_ - k * period) ** 2 for c_, k in zip(mesh, m))
                lattice += r2 ** (-a / 2.0)
        # remaining images: integral outside the summed cube, taken over the
        # complement of the equal-volume ball
        side = (2 * shells + 1) * period
        ball_r = side * (math.gamma(dim / 2.0 + 1.0) ** (1.0 / dim) / math.sqrt(math.pi))
        sphere = 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)
        lattice += sphere * ball_r ** (dim - a) / ((a - dim) * period**dim)
    return _forward(-c * h**dim * lattice)


def fractional_laplacian_apply(u: Field, s2: float, mode=ConvolutionMode.PERIODIC) -> Field:
    """Apply ``(-Delta)^s2`` with Fourier symbol ``|xi|^(2 s2)``.

    ``PeriodicMultiplier`` treats the field as periodic (zero mode annihilated
    for ``s2 > 0``). ``FreeSpacePadded`` treats it as a function on R^N that
    vanishes outside the box: the field is zero-padded to ``(2n)^N``, the
    symbol applied there less the far-field contribution of the periodic
    images, and the result cropped back to the box.
    """
    if not 0.0 <= s2 <= 2.0:
        raise ValidationError(f"fractional exponent must lie in [0, 2], got {s2}")
    return Field(u.grid, _flap(u.grid, u.values, s2, ConvolutionMode(mode)))


def gradient(u: Field) -> list[Field]:
    """Spectral partial derivatives; the Nyquist mode is dropped to keep them real."""
    grid = u.grid
    uh = _forward(u.values)
    out = []
    for k in grid.frequencies():
        k = np.array(k, copy=True)
        k[np.isclose(np.abs(k), np.pi / grid.h)] = 0.0
        out.append(Field(grid, _inverse(1j * k * uh, grid.shape)))
    return out


def quadratic_form(u: Field, s2: float, mode=ConvolutionMode.PERIODIC) -> float:
    """``||(-Delta)^(s2/2) u||^2`` evaluated in Fourier space."""
    grid, values = u.grid, u.values
    if ConvolutionMode(mode) == ConvolutionMode.FREE_SPACE:
        if s2 == 0:
            return float(np.sum(values * values)) * grid.cell_volume
        return float(np.sum(_flap(grid, values, s2, ConvolutionMode.FREE_SPACE) * values)) * grid.cell_volume
    uh = _forward(values)
    if s2 > 0:
        uh = uh * _power_symbol(grid, s2)
    return _rfft_energy(uh, grid)


def _rfft_energy(uh, grid):
    # Parseval for the half spectrum: interior planes of the last axis count twice.
    w = np.full(uh.shape[-1], 2.0)
    w[0] = 1.0
    if grid.n % 2 == 0:
        w[-1] = 1.0
    total = float(np.sum(np.abs(uh) ** 2 * w))
    return total * grid.cell_volume / grid.size


# -- resolvent ------------------------------------------------------------------


def resolvent_apply(g: Field, s: float, omega: float, mode=ConvolutionMode.PERIODIC) -> Field:
    """Solve ``((-Delta)^s + omega) u = g``.

    Periodic mode divides by ``|xi|^(2s) + omega``. Free-space mode solves
    the padded operator by conjugate gradients preconditioned with the
    periodic multiplier.
    """
    return Field(g.grid, _resolvent(g.grid, g.values, s, omega, mode=ConvolutionMode(mode)))


CG_RTOL = 1e-13


def _resolvent(grid, values, s, omega, scale=1.0, mode=ConvolutionMode.PERIODIC, x0=None):
    # solves (scale * (-Delta)^s + omega) u = g
    if omega < 0:
        raise ValidationError("omega must be nonnegative")
    if mode == ConvolutionMode.FREE_SPACE:
        return _padded_resolvent(grid, values, s, omega, scale, x0)
    gh = _forward(values)
    sym = scale * _power_symbol(grid, 2.0 * s) + omega
    if omega == 0:
        rms = math.sqrt(float(np.mean(values * values)))
        mean = abs(float(np.mean(values)))
        if rms == 0.0:
            return np.zeros(grid.shape)
        if mean > 1e-12 * rms:
            raise SingularResolvent(
                f"omega = 0 and the zero mode carries {mean / rms:.3e} of the field norm"
            )
        gh.flat[0] = 0.0
        sym = sym.copy()
        sym.flat[0] = 1.0
    return _inverse(gh / sym, grid.shape)


def _padded_resolvent(grid, values, s, omega, scale, x0):
    from scipy.sparse.linalg import LinearOperator, cg

    size = grid.size
    shape = grid.shape
    # the padded operator has no zero mode; shift the preconditioner off zero
    pc_shift = omega if omega > 0 else scale * (np.pi / grid.half_width) ** (2 * s)

    def matvec(v):
        v = v.reshape(shape)
        return (scale * _flap(grid, v, s, ConvolutionMode.FREE_SPACE) + omega * v).ravel()

    def precond(v):
        return _resolvent(grid, v.reshape(shape), s, pc_shift, scale).ravel()

    b = np.asarray(values, dtype=float).ravel()
    if not np.any(b):
        return np.zeros(shape)
    A = LinearOperator((size, size), matvec=matvec, dtype=float)
    M = LinearOperator((size, size), matvec=precond, dtype=float)
    guess = precond(b) if x0 is None else np.asarray(x0, dtype=float).ravel()
    x, info = cg(A, b, x0=guess, M=M, rtol=CG_RTOL, atol=0.0, maxiter=500)
    if info != 0:
        raise SingularResolvent(f"padded resolvent: conjugate gradients did not converge ({info})")
    return x.reshape(shape)


# -- Riesz potentials -------------------------------------------------------------


def riesz_constant(dim: int, alpha: float) -> float:
    """``gamma(alpha) = pi^(N/2) 2^alpha Gamma(alpha/2) / Gamma(N/2 - alpha/2)``."""
    return (
        math.pi ** (dim / 2.0)
        * 2.0**alpha
        * math.gamma(alpha / 2.0)
        / math.gamma(dim / 2.0 - alpha / 2.0)
    )


def riesz_convolve(
    g: Field,
    alpha: float,
    mode: ConvolutionMode | str = ConvolutionMode.FREE_SPACE,
    quadrature: str = "spectral",
) -> Field:
    """Return ``|x|^(alpha-N) * g``.

    ``PeriodicMultiplier`` multiplies by ``gamma(alpha)|xi|^(-alpha)`` with the
    zero mode dropped. ``FreeSpacePadded`` zero-pads to ``(2n)^N`` and
    convolves with a real-space kernel; ``quadrature`` picks the kernel
    samples: ``"spectral"`` (band-limited samples of the kernel truncated
    beyond the box diameter, spectrally accurate) or ``"ball"`` (point
    samples with the origin cell replaced by its equal-volume ball average).
    """
    return Field(g.grid, _riesz(g.grid, g.values, alpha, ConvolutionMode(mode), quadrature))


def _riesz(grid, values, alpha, mode=ConvolutionMode.FREE_SPACE, quadrature="spectral"):
    if not 0.0 < alpha < grid.dim:
        raise AlphaOutOfRange(f"alpha = {alpha} outside (0, {grid.dim})")
    if mode == ConvolutionMode.PERIODIC:
        sym = riesz_constant(grid.dim, alpha) * _power_symbol(grid, -alpha)
        return apply_symbol(values, grid, sym)
    kernel_hat = _padded_kernel_hat(grid, float(alpha), quadrature)
    padded = _embed(grid, values)
    return _crop(grid, _inverse(_forward(padded) * kernel_hat, padded.shape))


def _displacements(count, period):
    # signed integer displacements in FFT order for a periodic axis of `period` cells
    d = np.fft.fftfreq(count, d=1.0 / count).astype(int)
    return d % period


@functools.lru_cache(maxsize=8)
def _padded_kernel_hat(grid, alpha, quadrature):
    dim, n, h = grid.dim, grid.n, grid.h
    if quadrature == "ball":
        d = np.fft.fftfreq(2 * n, d=1.0 / (2 * n))
        mesh = np.meshgrid(*([d * h] * dim), indexing="ij", sparse=True)
        r = np.sqrt(sum(c * c for c in mesh))
        with np.errstate(divide="ignore"):
            kern = r ** (alpha - dim)
        sphere = 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)
        r_ball = h * math.gamma(dim / 2.0 + 1.0) ** (1.0 / dim) / math.sqrt(math.pi)
        kern.flat[0] = sphere * r_ball**alpha / (alpha * h**dim)
        return _forward(kern * h**dim)
    if quadrature != "spectral":
        raise ValidationError(f"unknown kernel quadrature {quadrature!r}")
    # Truncate the kernel at the largest in-box separation and place it on a
    # periodic grid wide enough that no periodic image reaches the box.
    radius = 2.0 * math.sqrt(dim) * grid.half_width
    m = sfft.next_fast_len(int(math.ceil(n * (1.0 + math.sqrt(dim)))), real=True)
    m = max(m + (m % 2), 2 * n)
    period = m * h
    q = np.meshgrid(
        *([np.fft.fftfreq(m, d=1.0 / m)] * (dim - 1) + [np.fft.rfftfreq(m, d=1.0 / m)]),
        indexing="ij",
        sparse=True,
    )
    q2 = sum((c * c).astype(np.int64) for c in q)
    uniq, inv = np.unique(q2, return_inverse=True)
    kmag = 2.0 * math.pi / period * np.sqrt(uniq.astype(float))
    table = truncated_riesz_transform(kmag, dim, alpha, radius)
    khat_big = table[inv].reshape(np.broadcast_shapes(*[c.shape for c in q]))
    if m == 2 * n:
        return khat_big
    real = _inverse(khat_big, (m,) * dim)
    idx = _displacements(2 * n, m)
    window = real[np.ix_(*([idx] * dim))]
    return _forward(window)


def truncated_riesz_transform(k, dim, alpha, radius):
    """Fourier transform of ``|x|^(alpha-N)`` restricted to the ball ``|x| < radius``.

    ``(2 pi)^(N/2) k^(-alpha) int_0^(k radius) t^(alpha-N/2) J_(N/2-1)(t) dt``,
    which tends to ``gamma(alpha) k^(-alpha)`` as ``radius -> inf``.
    """
    k = np.asarray(k, dtype=float)
    z = k * radius
    nu = dim / 2.0 - 1.0
    mu = alpha - dim / 2.0
    out = np.empty_like(z)
    small = z <= _SERIES_CUTOFF
    pref = (2.0 * math.pi) ** (dim / 2.0)
    out[small] = pref * radius**alpha * _bessel_moment_series(z[small], mu, nu)
    big = ~small
    if np.any(big):
        out[big] = pref * k[big] ** (-alpha) * _bessel_moment(z[big], mu, nu)
    return out


_SERIES_CUTOFF = 2.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _bessel_moment_series(z, mu, nu, terms=40):
    # int_0^z t^mu J_nu(t) dt / z^(mu+nu+1), from the power series of J_nu
    a = mu + nu + 1.0
    total = np.zeros_like(z)
    zz = (z / 2.0) ** 2
    coef = 2.0 ** (-nu) / special.gamma(nu + 1.0)
    power = np.ones_like(z)
    for k in range(terms):
        total += coef * power / (2 * k + a)
        coef *= -1.0 / ((k + 1) * (k + 1 + nu) * 4.0)
        power = power * z * z
    return total


def _bessel_moment(z, mu, nu, width=1.0):
    # int_0^z t^mu J_nu(t) dt for z > cutoff: series up to the cutoff, then
    # fixed-width Gauss-Legendre panels
    z0 = _SERIES_CUTOFF
    base = _bessel_moment_series(np.array([z0]), mu, nu)[0] * z0 ** (mu + nu + 1.0)
    zmax = float(np.max(z))
    npan = int(math.ceil((zmax - z0) / width)) + 1
    left = z0 + width * np.arange(npan)
    half = 0.5 * width
    t = left[:, None] + half * (1.0 + _GL_NODES[None, :])
    panel = half * np.sum(_GL_WEIGHTS * t**mu * special.jv(nu, t), axis=1)
    cum = base + np.concatenate(([0.0], np.cumsum(panel)))
    j = np.minimum(((z - z0) // width).astype(int), npan - 1)
    a = left[j]
    half_part = 0.5 * (z - a)
    tt = a[:, None] + half_part[:, None] * (1.0 + _GL_NODES[None, :])
    partial = half_part * np.sum(_GL_WEIGHTS * tt**mu * special.jv(nu, tt), axis=1)
    return cum[j] + partial
