"""Certification of candidate solutions: exact scaling laws, the mass/energy
relation between the two variational problems, the Hessian spectrum, tail
decay, the explicit zero-mass bubbles and the sharp interpolation constant."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg, special
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import (
    DimensionTooSmall,
    EigensolverStall,
    NonPositiveOmegaForPOmega,
    NotConverged,
    RegimeMismatch,
    ValidationError,
    WindowTooNoisy,
    ZeroField,
)
from .functionals import (
    DEFAULT_MODE,
    FunctionalValues,
    Hessian,
    functional_values,
    integrals,
    require_nonzero,
    weinstein_quotient,
)
from .params import ProblemParams, RegimeTag, classify_regime, validate_params
from .spectral import ConvolutionMode, Field, Grid, _flap, _riesz, gradient, sample
from .symmetry import radialize, recenter

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# -- result types -----------------------------------------------------------------


@dataclass
class MorseData:
    eigenvalues: list[float]
    negative_count: int
    zero_modes: int
    translation_overlap: float
    zero_tol: float
    k: int
    flagged: bool = False

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class DecayFit:
    exponent: float
    amplitude: float
    window: tuple[float, float]
    r2: float
    shells: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"exponent": self.exponent, "amplitude": self.amplitude,
                "window": list(self.window), "r2": self.r2}

    def write_csv(self, path) -> None:
        """Shell averages as ``r, u_mean, u_min, u_max`` rows."""
        _write_shells(path, self.shells)


def _write_shells(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u_mean", "u_min", "u_max"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


@dataclass
class ScalingReport:
    """Relative gaps of the exact scaling laws; ``None`` where the item does
    not apply to the regime (or, for ``rho_energy_gap``, until a matched pair
    of runs is compared)."""

    amplitude_max_gap: float | None = None
    dilation_min_gap: float | None = None
    mass_critical_gap: float | None = None
    supercritical_max_gap: float | None = None
    subcritical_min_gap: float | None = None
    w_invariance_gap: float | None = None
    rho_energy_gap: float | None = None

    def to_json(self) -> dict:
        return asdict(self)

    def gaps(self) -> dict[str, float]:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class Certificate:
    functionals: FunctionalValues
    lam: float
    rho: float
    omega: float
    params: ProblemParams
    symmetry_deviation: float
    scaling: ScalingReport
    morse: MorseData | None = None
    decay: DecayFit | None = None
    converged: bool | None = None

    def to_json(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "functionals": self.functionals.to_json(),
            "lambda": self.lam,
            "rho": self.rho,
            "omega": self.omega,
            "symmetry_deviation": self.symmetry_deviation,
            "scaling": self.scaling.to_json(),
            "morse": None if self.morse is None else self.morse.to_json(),
            "decay": None if self.decay is None else self.decay.to_json(),
            "converged": self.converged,
        }


# -- certificate ------------------------------------------------------------------------


def certify(
    u: Field,
    params: ProblemParams,
    rho: float | None = None,
    omega: float | None = None,
    lam: float | None = None,
    mode=DEFAULT_MODE,
    morse_k: int | None = None,
    decay_window: tuple[float, float] | None = None,
    converged: bool | None = None,
    seed: int = 0,
) -> Certificate:
    """Evaluate every identity residual for a candidate solution.

    Pass ``omega`` for a solution of the fixed-frequency equation, or ``rho``
    (and optionally its multiplier ``lam``) for a critical point on the
    sphere ``||u|| = rho``. In the latter case the residuals refer to the
    equation with ``omega = lam``, the one the field actually solves.
    """
    require_nonzero(u)
    mode = ConvolutionMode(mode)
    K, M, P = integrals(u, params, mode)
    if omega is not None:
        params = params.replace(omega=omega)
        lam = params.omega
    else:
        if lam is None:
            lam = (P - K) / M
        if lam > 0:
            params = params.replace(omega=lam)
    values = functional_values(K, M, P, params)
    if rho is None:
        rho = math.sqrt(M)
    cert = Certificate(
        functionals=values,
        lam=float(lam),
        rho=float(rho),
        omega=params.omega,
        params=params,
        symmetry_deviation=symmetry_deviation(u),
        scaling=scaling_report(values, params) if P > 0 else ScalingReport(),
        converged=converged,
    )
    if morse_k and params.p >= 2.0:
        cert.morse = morse_spectrum(u, lam, params, morse_k, mode=mode, seed=seed)
    if decay_window is not None:
        cert.decay = fit_decay_exponent(u, decay_window)
    return cert


def symmetry_deviation(u: Field) -> float:
    """Relative L2 distance of the recentered field to its radial average."""
    c = recenter(u)
    nu = c.norm()
    if nu == 0:
        raise ZeroField("symmetry deviation of the zero field")
    return (c - radialize(c)).norm() / nu


# -- scaling laws -----------------------------------------------------------------------------


def _golden_max(f, lo, hi, tol=1e-12, max_iter=200):
    # golden-section search for the maximum of a unimodal f on [lo, hi]
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _bracketed_max(f, x_star, width=1.0):
    # maximize f(log tau) in a bracket centred on the closed-form stationary point
    return _golden_max(f, x_star - width, x_star + width)[1]


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def scaling_item(values: FunctionalValues, params: ProblemParams, item: str) -> float:
    """Relative gap of one scaling law, computed from ``(K, M, P)`` alone.

    ``u_t = u(t .)`` maps ``K, M, P`` to ``t^(2s-N) K, t^(-N) M,
    t^(-(N+alpha)) P``; ``t^(N/2) u_t`` maps them to ``t^(2s) K, M,
    t^(N(p-1)-alpha) P``. Each item compares a golden-section extremum
    over ``log t`` with its closed form.

    ``item`` is one of ``amplitude_max``, ``dilation_min``, ``mass_critical``,
    ``supercritical_max``, ``subcritical_min``, ``w_invariance``.
    """
    K, M, P = values.K, values.M, values.P
    if not P > 0:
        raise ZeroField("scaling laws need P > 0")
    N, s, alpha, p, omega = params.dim, params.s, params.alpha, params.p, params.omega
    A, B = params.kinetic_exponent, params.mass_exponent
    q = A  # growth exponent of P under the mass-preserving dilation
    try:
        regime = classify_regime(params).tag
    except DimensionTooSmall:
        regime = None  # only the amplitude law and W invariance apply when N <= 2s

    if item == "amplitude_max":
        lin = K + omega * M
        if not lin > 0:
            raise RegimeMismatch("amplitude_max needs K + omega M > 0")
        x_star = math.log(lin / P) / (2.0 * (p - 1.0))
        numeric = _bracketed_max(lambda x: 0.5 * math.exp(2 * x) * lin - math.exp(2 * p * x) * P / (2 * p), x_star)
        s_quot = lin / P ** (1.0 / p)
        return _rel(numeric, (0.5 - 0.5 / p) * s_quot ** (p / (p - 1.0)))

    if item == "dilation_min":
        if regime is None or not regime.in_window or not omega > 0:
            raise RegimeMismatch(f"dilation_min needs p in the existence window and omega > 0 ({regime})")
        a, b = A / p, B / p
        x_star = math.log(a * omega * M / (b * K)) / (2.0 * s)

        def neg_s(x):
            t = math.exp(x)
            return -(t ** (2 * s - N) * K + omega * t ** (-N) * M) / (t ** (-(N + alpha)) * P) ** (1.0 / p)

        numeric = -_bracketed_max(neg_s, x_star)
        w = weinstein_quotient(K, M, P, params)
        closed = (2 * s * p / B) * (B / A) ** (A / (2 * s * p)) * w
        return _rel(numeric, closed)

    if item == "mass_critical":
        if regime != RegimeTag.MASS_CRITICAL:
            raise RegimeMismatch(f"mass_critical needs p = p_mass ({regime})")
        e0 = 0.5 * K - P / (2 * p)
        gap = 0.0
        for t in (0.37, 1.9, 4.2):
            scaled = 0.5 * t ** (2 * s) * K - t**q * P / (2 * p)
            gap = max(gap, abs(scaled - t ** (2 * s) * e0) / max(abs(t ** (2 * s) * e0), 1e-300))
        return gap

    if item == "supercritical_max":
        if regime is None or not (p > params.p_mass and omega > 0):
            raise RegimeMismatch(f"supercritical_max needs p > p_mass and omega > 0 ({regime})")
        x_star = math.log(2 * s * p * K / (q * P)) / (q - 2 * s)
        numeric = _bracketed_max(lambda x: 0.5 * math.exp(2 * s * x) * K - math.exp(q * x) * P / (2 * p), x_star)
        frak_b = (q - 2 * s) / (2 * q) * (2 * s * p / q) ** (2 * s / (q - 2 * s))
        w = weinstein_quotient(K, M, P, params)
        closed = frak_b * (w ** (2 * s * p) / (omega * M) ** B) ** (1.0 / (q - 2 * s))
        return _rel(numeric, closed)

    if item == "subcritical_min":
        if regime != RegimeTag.MASS_SUBCRITICAL or not omega > 0:
            raise RegimeMismatch(f"subcritical_min needs p_low < p < p_mass and omega > 0 ({regime})")
        x_star = math.log(q * P / (2 * s * p * K)) / (2 * s - q)
        numeric = -_bracketed_max(lambda x: -(0.5 * math.exp(2 * s * x) * K - math.exp(q * x) * P / (2 * p)), x_star)
        gap_exp = 2 * s - q  # (alpha + 2s) - N(p-1)
        frak_a = gap_exp / (4 * s * p) * (q / (2 * s * p)) ** (q / gap_exp)
        w = weinstein_quotient(K, M, P, params)
        closed = -frak_a * ((omega * M) ** B / w ** (2 * s * p)) ** (1.0 / gap_exp)
        return _rel(numeric, closed)

    if item == "w_invariance":
        if not omega > 0:
            raise RegimeMismatch("W is defined only for omega > 0")
        w0 = weinstein_quotient(K, M, P, params)
        gap = 0.0
        for c in (0.31, 2.7):
            w = weinstein_quotient(c * c * K, c * c * M, c ** (2 * p) * P, params)
            gap = max(gap, _rel(w, w0))
        for t in (0.43, 3.1):
            w = weinstein_quotient(t ** (2 * s - N) * K, t ** (-N) * M, t ** (-(N + alpha)) * P, params)
            gap = max(gap, _rel(w, w0))
        return gap

    raise ValidationError(f"unknown scaling item {item!r}")


_ITEMS = ("amplitude_max", "dilation_min", "mass_critical", "supercritical_max", "subcritical_min", "w_invariance")


def scaling_report(values: FunctionalValues, params: ProblemParams) -> ScalingReport:
    """Every scaling law that applies to the regime of ``params``."""
    out = ScalingReport()
    for item in _ITEMS:
        try:
            setattr(out, f"{item}_gap", scaling_item(values, params, item))
        except RegimeMismatch:
            pass
    return out


# -- mass/energy relation ------------------------------------------------------------------------


def rho_energy_coefficient(params: ProblemParams) -> float:
    """``(N + alpha - (N - 2s) p) / (omega s (p - 1))``."""
    if not params.omega > 0:
        raise NonPositiveOmegaForPOmega("the mass/energy relation needs omega > 0")
    return params.mass_exponent / (params.omega * params.s * (params.p - 1.0))


def rho_energy_check(cert_sigma: Certificate, cert_nehari: Certificate, params: ProblemParams) -> float:
    """Compare a sphere-constrained minimizer with a fixed-frequency ground state.

    With ``c`` the ground-state energy at frequency ``omega`` and ``m`` the
    constrained minimum at mass ``rho^2``: ``rho^2 = coef * c`` (checked for
    both masses) and ``m + omega rho^2 / 2 = c``. Returns the largest
    relative gap.
    """
    for name, cert in (("sphere", cert_sigma), ("fixed-frequency", cert_nehari)):
        if cert.converged is False:
            raise NotConverged(f"{name} certificate comes from an unconverged run")
        a, b = cert.params, params
        if (a.dim, a.s, a.alpha, a.p) != (b.dim, b.s, b.alpha, b.p):
            raise ValidationError(f"{name} certificate was computed for different parameters")
    if cert_nehari.omega != params.omega:
        raise ValidationError("fixed-frequency certificate is at a different omega")
    coef = rho_energy_coefficient(params)
    c = cert_nehari.functionals.e_omega
    m = cert_sigma.functionals.e_zero
    gaps = []
    for rho in (cert_sigma.rho, cert_nehari.rho):
        gaps.append(abs(rho * rho - coef * c) / (rho * rho))
    rho2 = cert_sigma.rho**2
    gaps.append(abs(m + 0.5 * params.omega * rho2 - c) / abs(c))
    gap = max(gaps)
    cert_sigma.scaling.rho_energy_gap = gap
    cert_nehari.scaling.rho_energy_gap = gap
    return gap


def rescale_to_frequency(u: Field, lam: float, params: ProblemParams) -> Field:
    """Map a solution at multiplier ``lam`` to frequency ``params.omega``:
    ``w(x) = t^((alpha+2s)/(2(p-1))) u(t x)`` with ``t = (omega/lam)^(1/2s)``,
    evaluated by spectral interpolation."""
    t = (params.omega / lam) ** (1.0 / (2.0 * params.s))
    amp = t ** ((params.alpha + 2.0 * params.s) / (2.0 * (params.p - 1.0)))
    grid = u.grid
    uh = np.fft.fftn(u.values)
    k = [2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)] * grid.dim
    x0 = grid.axis[0]
    out = uh
    # evaluate the trigonometric interpolant at t * x, one axis at a time
    for ax in range(grid.dim):
        phase = np.exp(1j * np.outer(t * grid.axis - x0, k[ax])) / grid.n
        out = np.moveaxis(np.tensordot(phase, np.moveaxis(out, ax, 0), axes=(1, 0)), 0, ax)
    return Field(grid, amp * out.real)


# -- Hessian spectrum -------------------------------------------------------------------------------


def morse_spectrum(
    u: Field,
    lam: float,
    params: ProblemParams,
    k: int = 8,
    mode=DEFAULT_MODE,
    zero_factor: float = 1e-4,
    tol: float = 1e-10,
    seed: int = 0,
) -> MorseData:
    """Lowest ``k`` eigenvalues of the second variation at ``u``.

    Matrix-free implicitly restarted Lanczos (ARPACK) on the grid operator.
    A mode counts as zero when ``|mu| < zero_factor * max |mu_i|``; the
    translation overlap is the smallest principal cosine between the span of
    the zero modes and ``span{d_i u}``.
    """
    H = Hessian(u, lam, params, mode)
    size = u.grid.size
    if not 1 <= k < size - 1:
        raise ValidationError(f"k must lie in [1, {size - 2}]")
    op = LinearOperator((size, size), matvec=lambda v: H.apply(v).ravel(), dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(size)
    ncv = min(size - 1, max(2 * k + 1, 40))
    try:
        vals, vecs = eigsh(op, k=k, which="SA", v0=v0, ncv=ncv, tol=tol, maxiter=max(1000, 50 * k))
    except ArpackNoConvergence as exc:
        raise EigensolverStall(f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} eigenpairs") from None
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    zero_tol = zero_factor * float(np.max(np.abs(vals)))
    zero = np.abs(vals) < zero_tol
    negative = int(np.sum(vals <= -zero_tol))
    overlap = 0.0
    if np.any(zero) and np.any(u.values):
        grads = np.column_stack([g.values.ravel() for g in gradient(u)])
        angles = linalg.subspace_angles(vecs[:, zero], grads)
        overlap = float(np.min(np.cos(angles)))
    return MorseData(
        eigenvalues=[float(v) for v in vals],
        negative_count=negative,
        zero_modes=int(np.sum(zero)),
        translation_overlap=overlap,
        zero_tol=zero_tol,
        k=k,
        flagged=params.s <= 0.5,
    )


# -- decay -------------------------------------------------------------------------------------------------


def shell_profile(u: Field) -> np.ndarray:
    """Rows ``(r, mean, min, max)`` of ``u`` over radial shells of width ``h``
    (exact radii in one dimension)."""
    grid = u.grid
    r = grid.radius().ravel()
    vals = u.values.ravel()
    if grid.dim == 1:
        key = np.rint(2.0 * r / grid.h).astype(np.int64)
    else:
        key = np.floor(r / grid.h).astype(np.int64)
    uniq, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
    rows = np.empty((len(uniq), 4))
    rows[:, 0] = np.bincount(inv, weights=r) / counts
    rows[:, 1] = np.bincount(inv, weights=vals) / counts
    rows[:, 2] = np.full(len(uniq), np.inf)
    rows[:, 3] = np.full(len(uniq), -np.inf)
    np.minimum.at(rows[:, 2], inv, vals)
    np.maximum.at(rows[:, 3], inv, vals)
    return rows


def write_profile_csv(path, u: Field) -> None:
    _write_shells(path, shell_profile(u))


def fit_decay_exponent(u: Field, window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares slope of ``log u`` against ``log r`` over shell averages.

    The default window is ``[0.15 L, 0.45 L]``; it must satisfy
    ``0 < r_min < r_max <= 0.8 L``.
    """
    L = u.grid.half_width
    lo, hi = window if window is not None else (0.15 * L, 0.45 * L)
    if not 0.0 < lo < hi <= 0.8 * L:
        raise ValidationError(f"decay window ({lo}, {hi}) must satisfy 0 < r_min < r_max <= 0.8 L = {0.8 * L}")
    rows = shell_profile(u)
    sel = (rows[:, 0] >= lo) & (rows[:, 0] <= hi)
    if np.count_nonzero(sel) < 3:
        raise WindowTooNoisy("fewer than three shells inside the decay window")
    r, mean = rows[sel, 0], rows[sel, 1]
    floor = 1e3 * np.finfo(float).eps * float(np.max(np.abs(u.values)))
    if np.any(mean <= floor):
        raise WindowTooNoisy(f"shell averages fall below {floor:.3e} inside the window")
    x, y = np.log(r), np.log(mean)
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(math.exp(intercept)), (float(lo), float(hi)), r2, rows)


# -- zero-mass bubbles --------------------------------------------------------------------------------


class BubbleResult(NamedTuple):
    field: Field
    residual: float
    constant: float
    params: ProblemParams
    exterior: bool


def bubble_params(dim: int, s: float) -> ProblemParams:
    if not dim > 4.0 * s:
        raise DimensionTooSmall(f"bubbles need N > 4s (N = {dim}, s = {s})")
    return validate_params(dim, s, dim - 4.0 * s, 2.0, 0.0, zero_mass=True)


def bubble_profile(dim: int, s: float, t: float = 1.0, x0=None):
    """``x -> (t / (t^2 + |x - x0|^2))^((N-2s)/2)`` as a callable on coordinates."""
    x0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float)
    e = (dim - 2.0 * s) / 2.0

    def prof(*x):
        r2 = sum((c - c0) ** 2 for c, c0 in zip(x, x0))
        return (t / (t * t + r2)) ** e

    return prof


def _exterior_1d(grid, prof, kexp, step=0.05, vmin=-40.0, vmax=60.0, chunk=1024):
    # int_{|y| > L} prof(y) |x - y|^kexp dy at every node, via y = edge + d e^v
    # (trapezoid in v; the integrand is smooth and decays at both ends)
    L = grid.half_width
    x = grid.axis
    ev = np.exp(np.arange(vmin, vmax + step / 2, step))
    out = np.zeros_like(x)
    for sign in (1.0, -1.0):
        d = L - sign * x
        for i in range(0, len(x), chunk):
            dd = d[i : i + chunk, None]
            w = dd * ev[None, :]
            f = prof(sign * (L + w)) * (w + dd) ** kexp * w
            out[i : i + chunk] += np.trapezoid(f, dx=step, axis=1)
    return out


def _bubble_operators(grid, s, t, x0, mode, exterior):
    dim = grid.dim
    alpha = dim - 4.0 * s
    prof = bubble_profile(dim, s, t, x0)
    b = sample(grid, prof).values
    ab = _flap(grid, b, s, mode)
    phi = _riesz(grid, b * b, alpha, mode)
    if exterior:
        c = 4.0**s * special.gamma(0.5 + s) * special.rgamma(-s) / math.sqrt(math.pi)
        ab = ab + c * _exterior_1d(grid, prof, -1.0 - 2.0 * s)
        phi = phi + _exterior_1d(grid, lambda y: prof(y) ** 2, alpha - 1.0)
    return b, ab, phi * b


def make_bubble(
    grid: Grid,
    s: float,
    t: float = 1.0,
    x0=None,
    C: float | None = None,
    mode=ConvolutionMode.FREE_SPACE,
    exterior: bool | None = None,
) -> BubbleResult:
    """Sample ``C (t / (t^2 + |x - x0|^2))^((N-2s)/2)`` and its residual in
    ``(-Delta)^s u = (|x|^(-4s) * u^2) u``.

    Without ``C`` the constant is calibrated by golden-section search on
    ``log C`` in ``[-6, 6]`` minimizing
    ``||(-Delta)^s u - (K * u^2) u|| / ||(-Delta)^s u||``. With ``exterior``
    (default in one dimension) both operators act on the whole profile: the
    part beyond the box is added by quadrature over the two half-lines.
    """
    params = bubble_params(grid.dim, s)
    mode = ConvolutionMode(mode)
    if exterior is None:
        exterior = grid.dim == 1
    if exterior and grid.dim != 1:
        raise ValidationError("exterior quadrature is implemented for N = 1 only")
    b, ab, vb = _bubble_operators(grid, s, t, x0, mode, exterior)
    norm = float(np.linalg.norm(ab))

    def residual(logc):
        c = math.exp(logc)
        return float(np.linalg.norm(ab - c * c * vb)) / norm

    if C is None:
        logc, _ = _golden_max(lambda x: -residual(x), -6.0, 6.0, tol=1e-10)
        C = math.exp(logc)
    return BubbleResult(Field(grid, C * b), residual(math.log(C)), float(C), params, exterior)


def bubble_constant(dim: int, s: float) -> float:
    """Closed-form constant of the bubble at ``t = 1`` for kernel ``|x|^(-4s)``."""
    lhs = 4.0**s * math.gamma(dim / 2.0 + s) / math.gamma(dim / 2.0 - s)
    rhs = math.pi ** (dim / 2.0) * math.gamma(dim / 2.0 - 2.0 * s) / math.gamma(dim - 2.0 * s)
    return math.sqrt(lhs / rhs)


# -- interpolation constant and nonexistence ----------------------------------------------------------


def gn_exponents(params: ProblemParams) -> tuple[float, float]:
    """``(beta p, (1 - beta) p) = (A / 2s, B / 2s)``."""
    sp2 = 2.0 * params.s
    return params.kinetic_exponent / sp2, params.mass_exponent / sp2


def estimate_gn_constant(ground: Certificate, params: ProblemParams) -> float:
    """``C = omega^(B/2s) / W(ground)^p``, the sharp constant in
    ``P <= C K^(beta p) M^((1-beta) p)`` when ``ground`` is a ground state."""
    if ground.converged is False:
        raise NotConverged("ground-state certificate comes from an unconverged run")
    omega = ground.omega
    if not omega > 0:
        raise NonPositiveOmegaForPOmega("the interpolation constant needs omega > 0")
    v = ground.functionals
    p = params.replace(omega=omega)
    w = weinstein_quotient(v.K, v.M, v.P, p)
    return omega ** (p.mass_exponent / (2.0 * p.s)) / w**p.p


def gaussian_mixture(grid: Grid, rng: np.random.Generator, dilation: float = 1.0, signed: bool = True) -> Field:
    """Seeded smooth trial: one to four Gaussians with random centres (within
    0.15 L), widths in [0.5, 2.5] and amplitudes in [0.2, 1.5] (random sign
    when ``signed``), sampled at ``dilation * x``. The draws do not depend on
    ``signed``."""
    L = grid.half_width
    coords = [dilation * c for c in grid.coords()]
    total = np.zeros(grid.shape)
    for _ in range(int(rng.integers(1, 5))):
        centre = rng.uniform(-0.15 * L, 0.15 * L, grid.dim)
        width = rng.uniform(0.5, 2.5)
        amp = rng.uniform(0.2, 1.5) * rng.choice([-1.0, 1.0])
        amp = amp if signed else abs(amp)
        r2 = sum((c - c0) ** 2 for c, c0 in zip(coords, centre))
        total = total + amp * np.exp(-0.5 * r2 / width**2)
    return Field(grid, total)


def gn_ratio(K: float, M: float, P: float, params: ProblemParams) -> float:
    a, b = gn_exponents(params)
    return P / (K**a * M**b)


@dataclass
class Obstruction:
    c1: float
    c2: float
    sign1: int
    sign2: int
    verdict: str

    def to_json(self) -> dict:
        return asdict(self)


def pohozaev_obstruction(params: ProblemParams) -> Obstruction:
    """Signs of ``c1 = N - 2s - (alpha+N)/p`` and ``c2 = N - (alpha+N)/p``.

    On solutions ``c1 K + omega c2 M = 0``; when the coefficients share a
    sign only the zero field qualifies. Signs are taken from the exact
    comparisons of ``p`` with ``p_high`` and ``p_low`` so the verdict agrees
    with :func:`classify_regime`.
    """
    if not params.omega > 0:
        raise NonPositiveOmegaForPOmega("the obstruction argument needs omega > 0")
    N, s, alpha, p = params.dim, params.s, params.alpha, params.p
    c1 = N - 2.0 * s - (alpha + N) / p
    c2 = N - (alpha + N) / p
    sign1 = int(np.sign(p - params.p_high))
    sign2 = int(np.sign(p - params.p_low))
    verdict = "ExistenceWindow" if sign1 < 0 < sign2 else "Nonexistence"
    return Obstruction(c1, c2, sign1, sign2, verdict)
