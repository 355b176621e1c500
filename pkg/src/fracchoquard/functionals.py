"""Energies, quotients, residuals and variations of the Choquard functional.

Notation: ``K = ||(-Delta)^(s/2) u||^2``, ``M = ||u||^2`` and
``P = int (|x|^(alpha-N) * |u|^p) |u|^p``. All integrals are Riemann sums
with weight ``h^N``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PNotC2, ZeroField
from .params import ProblemParams
from .spectral import ConvolutionMode, Field, _flap, _riesz, quadratic_form

DEFAULT_MODE = ConvolutionMode.FREE_SPACE


def _signed_power(u, q):
    # |u|^q sign(u), continuous extension 0 at u = 0 (q > 0)
    a = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, a ** q * np.sign(u), 0.0)
    return out


def _weight(u, p):
    # |u|^(p-2) u
    return _signed_power(u, p - 1.0)


def _potential(grid, u, params, mode):
    # K_alpha * |u|^p
    return _riesz(grid, np.abs(u) ** params.p, params.alpha, ConvolutionMode(mode))


def nonlinear_term(u: Field, params: ProblemParams, mode=DEFAULT_MODE) -> Field:
    """``(K_alpha * |u|^p) |u|^(p-2) u``."""
    phi = _potential(u.grid, u.values, params, mode)
    return Field(u.grid, phi * _weight(u.values, params.p))


@dataclass
class FunctionalValues:
    K: float
    M: float
    P: float
    e_omega: float
    e_zero: float
    s_quot: float | None
    w_quot: float | None
    nehari_res: float
    pohozaev_res: float

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "FunctionalValues":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def functional_values(K: float, M: float, P: float, params: ProblemParams) -> FunctionalValues:
    """Assemble every derived scalar from the three integrals ``K, M, P``."""
    N, s, alpha, p, omega = params.dim, params.s, params.alpha, params.p, params.omega
    e_omega = 0.5 * K + 0.5 * omega * M - P / (2.0 * p)
    e_zero = 0.5 * K - P / (2.0 * p)
    lin = K + omega * M
    scale = max(lin, P)
    nehari = (lin - P) / scale if scale > 0 else 0.0
    lhs = (N - 2.0 * s) * K + omega * N * M
    rhs = (alpha + N) / p * P
    pohozaev = (lhs - rhs) / (lhs + rhs) if lhs + rhs > 0 else 0.0
    if P > 0:
        s_quot = lin / P ** (1.0 / p)
        w_quot = weinstein_quotient(K, M, P, params) if omega > 0 else None
    else:
        s_quot = w_quot = None
    return FunctionalValues(K, M, P, e_omega, e_zero, s_quot, w_quot, nehari, pohozaev)


def weinstein_quotient(K: float, M: float, P: float, params: ProblemParams) -> float:
    """``K^(A/2sp) (omega M)^(B/2sp) / P^(1/p)`` with ``A + B = 2sp``."""
    sp2 = 2.0 * params.s * params.p
    A, B = params.kinetic_exponent, params.mass_exponent
    return K ** (A / sp2) * (params.omega * M) ** (B / sp2) / P ** (1.0 / params.p)


def integrals(u: Field, params: ProblemParams, mode=DEFAULT_MODE) -> tuple[float, float, float]:
    grid = u.grid
    dv = grid.cell_volume
    K = quadratic_form(u, params.s, mode)
    M = float(np.sum(u.values * u.values)) * dv
    up = np.abs(u.values) ** params.p
    phi = _riesz(grid, up, params.alpha, ConvolutionMode(mode))
    P = float(np.sum(phi * up)) * dv
    return K, M, P


def functional_suite(u: Field, params: ProblemParams, mode=DEFAULT_MODE) -> FunctionalValues:
    return functional_values(*integrals(u, params, mode), params)


def require_nonzero(u: Field):
    if not np.any(u.values):
        raise ZeroField("field is identically zero")


def first_variation(u: Field, params: ProblemParams, mode=DEFAULT_MODE) -> Field:
    """Gradient of ``E_omega``: ``(-Delta)^s u + omega u - N(u)``."""
    g = _flap(u.grid, u.values, params.s, ConvolutionMode(mode)) + params.omega * u.values
    return Field(u.grid, g - nonlinear_term(u, params, mode).values)


class Hessian:
    """Second variation of ``E_lambda`` at ``u`` as a linear map on grid fields.

    Precomputes ``|u|^(p-2) u`` and ``(K_alpha * |u|^p)|u|^(p-2)`` so that each
    application costs one fractional Laplacian and one Riesz convolution.
    """

    def __init__(self, u: Field, lam: float, params: ProblemParams, mode=DEFAULT_MODE):
        if params.p < 2.0:
            raise PNotC2(f"second variation needs p >= 2, got p = {params.p}")
        self.grid = u.grid
        self.lam = float(lam)
        self.params = params
        self.mode = ConvolutionMode(mode)
        a = np.abs(u.values)
        self.w = _weight(u.values, params.p)
        phi = _riesz(self.grid, a**params.p, params.alpha, self.mode)
        self.v = phi * (a ** (params.p - 2.0) if params.p != 2.0 else 1.0)

    def apply(self, xi: np.ndarray) -> np.ndarray:
        xi = np.reshape(xi, self.grid.shape)
        p = self.params.p
        out = _flap(self.grid, xi, self.params.s, self.mode) + self.lam * xi
        out -= p * self.w * _riesz(self.grid, self.w * xi, self.params.alpha, self.mode)
        out -= (p - 1.0) * self.v * xi
        return out

    def __call__(self, xi: Field) -> Field:
        return Field(self.grid, self.apply(xi.values))


def hessian_apply(u: Field, lam: float, xi: Field, params: ProblemParams, mode=DEFAULT_MODE) -> Field:
    return Hessian(u, lam, params, mode)(xi)


def lagrange_multiplier(values: FunctionalValues) -> float:
    """``lambda = (P - K) / rho^2`` for a critical point of ``E_0`` on the sphere."""
    if values.M <= 0:
        raise ZeroField("multiplier undefined for the zero field")
    return (values.P - values.K) / values.M


def relative_norm(g: Field, u: Field) -> float:
    nu = u.norm()
    return g.norm() / nu if nu > 0 else math.inf
