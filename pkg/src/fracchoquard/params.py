"""Problem parameters (N, s, alpha, p, omega) and regime classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DimensionTooSmall, NonPositiveOmegaForPOmega, OutOfRange


class RegimeTag(str, enum.Enum):
    NONEXISTENCE_LOW = "NonexistenceLow"
    MASS_SUBCRITICAL = "MassSubcritical"
    MASS_CRITICAL = "MassCritical"
    MASS_SUPERCRITICAL = "MassSupercritical"
    ENERGY_CRITICAL = "EnergyCritical"
    NONEXISTENCE_HIGH = "NonexistenceHigh"

    @property
    def in_window(self) -> bool:
        return self in (
            RegimeTag.MASS_SUBCRITICAL,
            RegimeTag.MASS_CRITICAL,
            RegimeTag.MASS_SUPERCRITICAL,
        )


@dataclass(frozen=True)
class ProblemParams:
    dim: int
    s: float
    alpha: float
    p: float
    omega: float

    @property
    def p_low(self) -> float:
        # single rounding of the exact ratio, so p = 5/3 typed literally hits the boundary
        return (self.dim + self.alpha) / self.dim

    @property
    def p_mass(self) -> float:
        return (self.dim + 2.0 * self.s + self.alpha) / self.dim

    @property
    def p_high(self) -> float:
        if self.dim <= 2.0 * self.s:
            return math.inf
        return (self.dim + self.alpha) / (self.dim - 2.0 * self.s)

    # exponents of the Weinstein-type quotient: A + B = 2sp
    @property
    def kinetic_exponent(self) -> float:
        return self.dim * (self.p - 1.0) - self.alpha

    @property
    def mass_exponent(self) -> float:
        return self.dim + self.alpha - (self.dim - 2.0 * self.s) * self.p

    def replace(self, **changes) -> "ProblemParams":
        values = dict(dim=self.dim, s=self.s, alpha=self.alpha, p=self.p, omega=self.omega)
        values.update(changes)
        return validate_params(**values, zero_mass=values["omega"] == 0.0)

    def as_dict(self) -> dict:
        return dict(dim=self.dim, s=self.s, alpha=self.alpha, p=self.p, omega=self.omega)


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    p_low: float
    p_mass: float
    p_high: float

    @property
    def thresholds(self) -> tuple[float, float, float]:
        return (self.p_low, self.p_mass, self.p_high)


def validate_params(dim, s, alpha, p, omega, zero_mass: bool = False) -> ProblemParams:
    """Validate the five raw parameters and build a :class:`ProblemParams`.

    Values are never clamped. ``omega == 0`` is rejected unless the caller
    asks for the zero-mass problem with ``zero_mass=True``.
    """
    try:
        dim_f = float(dim)
    except (TypeError, ValueError):
        raise OutOfRange("dim", dim, "integer >= 1") from None
    if not dim_f.is_integer() or dim_f < 1:
        raise OutOfRange("dim", dim, "integer >= 1")
    dim = int(dim_f)
    s, alpha, p, omega = (float(v) for v in (s, alpha, p, omega))
    for name, v in (("s", s), ("alpha", alpha), ("p", p), ("omega", omega)):
        if not math.isfinite(v):
            raise OutOfRange(name, v, "finite value")
    if not 0.0 < s < 1.0:
        raise OutOfRange("s", s, "0 < s < 1")
    if not 0.0 < alpha < dim:
        raise OutOfRange("alpha", alpha, f"0 < alpha < {dim}")
    if not p > 1.0:
        raise OutOfRange("p", p, "p > 1")
    if omega < 0.0:
        raise OutOfRange("omega", omega, "omega >= 0")
    if omega == 0.0 and not zero_mass:
        raise NonPositiveOmegaForPOmega(
            "omega = 0 is only admitted for the zero-mass problem (pass zero_mass=True)"
        )
    return ProblemParams(dim=dim, s=s, alpha=alpha, p=p, omega=omega)


def classify_regime(params: ProblemParams) -> Regime:
    """Place ``params.p`` relative to the three critical exponents.

    Comparisons are exact on the double-precision thresholds. Both ends of
    the existence window count as nonexistence; ``p == p_high`` with
    ``omega == 0`` is the energy-critical (bubble) case.
    """
    if params.dim <= 2.0 * params.s:
        raise DimensionTooSmall(
            f"N = {params.dim} <= 2s = {2 * params.s}: upper critical exponent undefined"
        )
    lo, mid, hi = params.p_low, params.p_mass, params.p_high
    p = params.p
    if p <= lo:
        tag = RegimeTag.NONEXISTENCE_LOW
    elif p >= hi:
        if p == hi and params.omega == 0.0:
            tag = RegimeTag.ENERGY_CRITICAL
        else:
            tag = RegimeTag.NONEXISTENCE_HIGH
    elif p < mid:
        tag = RegimeTag.MASS_SUBCRITICAL
    elif p == mid:
        tag = RegimeTag.MASS_CRITICAL
    else:
        tag = RegimeTag.MASS_SUPERCRITICAL
    return Regime(tag=tag, p_low=lo, p_mass=mid, p_high=hi)
