"""Ground-state solvers: normalized gradient flow and Petviashvili iteration."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RegimeUnsupported, ValidationError
from .functionals import DEFAULT_MODE, _riesz, _weight, functional_values
from .params import ProblemParams, RegimeTag, classify_regime
from .spectral import ConvolutionMode, Field, Grid, _flap, _resolvent, sample
from .symmetry import SymmetrySpec, project, recenter, sign_normalize

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    DIVERGED = "Diverged"
    REGIME_UNSUPPORTED = "RegimeUnsupported"


@dataclass
class SolverOptions:
    dt: float = 0.5
    max_iter: int = 2000
    tol: float = 1e-10
    seed: int = 0
    symmetry: SymmetrySpec | None = None
    noise: float = 0.0
    mode: ConvolutionMode = DEFAULT_MODE
    init: np.ndarray | None = field(default=None, repr=False)
    # called as callback(iteration, values) on every recorded iterate
    callback: Callable[[int, np.ndarray], None] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.tol >= 1e-12:
            raise ValidationError("tol must be >= 1e-12")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        self.mode = ConvolutionMode(self.mode)


@dataclass
class SolveReport:
    field: Field
    iterations: int
    history: list[tuple[int, float, float]]
    termination: Termination
    params: ProblemParams
    solver: str
    lagrange_multiplier: float | None = None
    rho: float | None = None
    certificate: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.termination == Termination.CONVERGED

    def to_json(self) -> dict:
        out = {
            "solver": self.solver,
            "params": self.params.as_dict(),
            "iterations": self.iterations,
            "termination": self.termination.value,
            "lagrange_multiplier": self.lagrange_multiplier,
            "rho": self.rho,
            "history": [list(h) for h in self.history],
            "metadata": self.metadata,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


def gaussian_guess(grid: Grid, opts: SolverOptions, mass: float | None = None) -> np.ndarray:
    """Centered Gaussian ``exp(-|x|^2/2)`` plus optional seeded noise, projected
    onto the symmetry class. Rescaled to ``||u|| = sqrt(mass)`` when given."""
    if opts.init is not None:
        u = np.array(opts.init, dtype=float).reshape(grid.shape)
    else:
        u = sample(grid, lambda *x: np.exp(-0.5 * sum(c * c for c in x))).values
        if opts.symmetry is not None and opts.symmetry.kind.value == "OddSwap":
            # seed the odd-under-swap class with (x1^2 - x2^2) exp(-|x|^2/2)
            x = grid.coords()
            m = opts.symmetry.m
            u = u * (sum(c * c for c in x[:m]) - sum(c * c for c in x[m : 2 * m]))
        if opts.noise > 0:
            rng = np.random.default_rng(opts.seed)
            u = u + opts.noise * np.max(np.abs(u)) * rng.standard_normal(grid.shape) * np.abs(u)
    if opts.symmetry is not None:
        opts.symmetry.check(grid.dim)
        u = project(u, grid, opts.symmetry)
    if mass is not None:
        u *= math.sqrt(mass / (np.sum(u * u) * grid.cell_volume))
    return u


def _require_window(params: ProblemParams, allowed, solver):
    regime = classify_regime(params)
    if regime.tag not in allowed:
        raise RegimeUnsupported(
            regime.tag.value,
            f"{solver}: p = {params.p} gives regime {regime.tag.value} "
            f"(thresholds p_low={regime.p_low:.6g}, p_mass={regime.p_mass:.6g}, "
            f"p_high={regime.p_high:.6g})",
        )
    return regime


def _finish(u, grid, opts):
    f = Field(grid, u)
    if opts.symmetry is None:
        f = recenter(f)
    return sign_normalize(f)


def solve_ground_state_ngf(
    params: ProblemParams, rho: float, grid: Grid, opts: SolverOptions | None = None, certify: bool = True
) -> SolveReport:
    """Minimize ``E_0`` on the sphere ``||u||_2 = rho`` by a semi-implicit
    normalized gradient flow.

    Each step solves ``(I + dt (-Delta)^s) u* = u + dt N(u)`` and rescales to
    mass ``rho^2``. A step that raises the energy is rejected and ``dt``
    halved, so the recorded energies never increase.
    """
    opts = opts or SolverOptions()
    if grid.dim != params.dim:
        raise ValidationError("grid dimension does not match params.dim")
    if not rho > 0:
        raise ValidationError("rho must be positive")
    _require_window(params, {RegimeTag.MASS_SUBCRITICAL}, "normalized gradient flow")
    mass = rho * rho
    dv = grid.cell_volume
    u = gaussian_guess(grid, opts, mass)
    state = _ngf_state(u, grid, params, opts, mass)
    dt = opts.dt
    history = [(0, state["E"], state["res"])]
    if opts.callback is not None:
        opts.callback(0, state["u"])
    termination = Termination.MAX_ITER
    it = 0
    while it < opts.max_iter:
        if state["res"] <= opts.tol:
            termination = Termination.CONVERGED
            break
        it += 1
        while True:
            rhs = state["u"] + dt * state["nl"]
            shift = 1.0 + dt * max(state["lam"], 0.0)
            trial = _resolvent(grid, rhs, params.s, shift, scale=dt, mode=opts.mode, x0=state["u"])
            if opts.symmetry is not None:
                trial = project(trial, grid, opts.symmetry)
            trial *= math.sqrt(mass / (np.sum(trial * trial) * dv))
            new = _ngf_state(trial, grid, params, opts, mass)
            if not math.isfinite(new["E"]):
                termination = Termination.DIVERGED
                break
            if new["E"] <= state["E"] + 1e-13 * abs(state["E"]) or new["res"] <= opts.tol:
                break
            dt *= 0.5
            log.debug("ngf: energy increase at step %d, dt -> %g", it, dt)
            if dt < 1e-10:
                termination = Termination.DIVERGED
                break
        if termination == Termination.DIVERGED:
            break
        state = new
        history.append((it, state["E"], state["res"]))
        if opts.callback is not None:
            opts.callback(it, state["u"])
    values = functional_values(state["K"], state["M"], state["P"], params)
    lam = (state["P"] - state["K"]) / mass
    report = SolveReport(
        field=_finish(state["u"], grid, opts),
        iterations=it,
        history=history,
        termination=termination,
        params=params,
        solver="ngf",
        lagrange_multiplier=lam,
        rho=rho,
        metadata={"dt_final": dt, "e_zero": values.e_zero},
    )
    if certify:
        from .analysis import certify as _certify

        report.certificate = _certify(
            report.field, params, rho=rho, lam=lam, mode=opts.mode, converged=report.converged
        )
    return report


def _ngf_state(u, grid, params, opts, mass):
    dv = grid.cell_volume
    au = _flap(grid, u, params.s, opts.mode)
    up = np.abs(u) ** params.p
    phi = _riesz(grid, up, params.alpha, opts.mode)
    nl = phi * _weight(u, params.p)
    K = float(np.sum(au * u)) * dv
    P = float(np.sum(phi * up)) * dv
    M = float(np.sum(u * u)) * dv
    lam = (P - K) / mass
    grad = au - nl + lam * u
    res = math.sqrt(float(np.sum(grad * grad)) / float(np.sum(u * u)))
    E = 0.5 * K - P / (2 * params.p)
    return {"u": u, "nl": nl, "K": K, "P": P, "M": M, "E": E, "res": res, "lam": lam}


def solve_petviashvili(
    params: ProblemParams, omega: float | None, grid: Grid, opts: SolverOptions | None = None, certify: bool = True
) -> SolveReport:
    """Solve ``(-Delta)^s u + omega u = N(u)`` by Petviashvili iteration.

    ``u <- M^gamma ((-Delta)^s + omega)^(-1) N(u)`` with the stabilizing
    factor ``M = <((-Delta)^s + omega)u, u> / <N(u), u>`` and
    ``gamma = (2p-1)/(2p-2)``, projected onto ``opts.symmetry`` when set.
    """
    opts = opts or SolverOptions()
    if omega is not None and omega != params.omega:
        params = params.replace(omega=omega)
    if grid.dim != params.dim:
        raise ValidationError("grid dimension does not match params.dim")
    if not params.omega > 0:
        raise ValidationError("Petviashvili iteration needs omega > 0")
    _require_window(
        params,
        {RegimeTag.MASS_SUBCRITICAL, RegimeTag.MASS_CRITICAL, RegimeTag.MASS_SUPERCRITICAL},
        "Petviashvili iteration",
    )
    p, omega = params.p, params.omega
    gamma = (2.0 * p - 1.0) / (2.0 * p - 2.0)
    dv = grid.cell_volume
    u = gaussian_guess(grid, opts)
    history = []
    termination = Termination.MAX_ITER
    it = 0
    stab = math.nan
    v = None
    while True:
        lu = _flap(grid, u, params.s, opts.mode) + omega * u
        up = np.abs(u) ** p
        phi = _riesz(grid, up, params.alpha, opts.mode)
        nl = phi * _weight(u, p)
        lin = float(np.sum(lu * u)) * dv
        P = float(np.sum(nl * u)) * dv
        stab = lin / P if P > 0 else math.inf
        K = lin - omega * float(np.sum(u * u)) * dv
        energy = 0.5 * lin - P / (2 * p)
        g = lu - nl
        usq = float(np.sum(u * u))
        # a collapsed iterate reports Diverged through the infinite stabilizer
        res = math.sqrt(float(np.sum(g * g)) / usq) if usq > 0 else math.inf
        history.append((it, energy, res))
        if opts.callback is not None:
            opts.callback(it, u)
        if not (math.isfinite(stab) and 1e-12 < stab < 1e12 and math.isfinite(res)):
            termination = Termination.DIVERGED
            break
        if res <= opts.tol and abs(stab - 1.0) <= opts.tol:
            termination = Termination.CONVERGED
            break
        if it >= opts.max_iter:
            break
        it += 1
        v = _resolvent(grid, nl, params.s, omega, mode=opts.mode, x0=v)
        u = stab**gamma * v
        if opts.symmetry is not None:
            u = project(u, grid, opts.symmetry)
    report = SolveReport(
        field=_finish(u, grid, opts),
        iterations=it,
        history=history,
        termination=termination,
        params=params,
        solver="petviashvili",
        lagrange_multiplier=omega,
        rho=math.sqrt(float(np.sum(u * u)) * dv),
        metadata={"stabilizer": stab, "gamma": gamma},
    )
    if opts.symmetry is not None:
        report.metadata["symmetry"] = str(opts.symmetry)
        if opts.symmetry.is_demonstration(grid.dim):
            report.metadata["low_dimensional_demonstration"] = True
    if certify and termination != Termination.DIVERGED:
        from .analysis import certify as _certify

        report.certificate = _certify(report.field, params, omega=omega, mode=opts.mode, converged=report.converged)
    return report
