"""Lower bounds on the mean bath polarization from a coherence-difference surface.

Two bounds are available. Every single-spin factor has modulus at most 1
and every preparation kernel C_m at most 2 (or 2|sin(omega t/2)|), so

    time-independent:  p_mean >= max |drho| / N
    time-dependent:    p_mean >= |drho(tau, t)| / (N |sin(omega t/2)|)

The maxima are taken over the sampled grid. Ties go to the smallest
(i_tau, i_t) index.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .dynamics import CoherenceSurface, check_grid, delta_surface
from .environment import Environment, Uniform, set_polarization
from .errors import AllPointsExcluded, EmptySurface, NonPositiveOmega, OutOfRange, SoundnessViolation

log = logging.getLogger(__name__)

DEFAULT_T_MAX_US = 100.0
DEFAULT_POINTS = 512
DEFAULT_SIN_FLOOR = 0.05
SOUNDNESS_SLACK = 1e-9


class Method(str, Enum):
    TIME_INDEPENDENT = "time-independent"
    TIME_DEPENDENT = "time-dependent"


def default_grid(t_max: float = DEFAULT_T_MAX_US, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(0.0, t_max, points)


def grid_spec(surface: CoherenceSurface) -> dict:
    tau, t = surface.tau_grid, surface.t_grid
    return {
        "tau_min_us": float(tau[0]), "tau_max_us": float(tau[-1]), "tau_points": int(tau.size),
        "t_min_us": float(t[0]), "t_max_us": float(t[-1]), "t_points": int(t.size),
    }


@dataclass(frozen=True)
class BoundEstimate:
    method: Method
    value: float
    argmax_tau: float
    argmax_t: float
    n_spins: int
    omega: float
    grid: dict = field(default_factory=dict)
    clamped_points: int = 0

    def to_record(self) -> dict:
        return {
            "method": self.method.value,
            "value": self.value,
            "argmax_tau_us": self.argmax_tau,
            "argmax_t_us": self.argmax_t,
            "n_spins": self.n_spins,
            "omega_rad_per_us": self.omega,
            "clamped_points": self.clamped_points,
            "grid": dict(self.grid),
        }


def _argmax(ratio: np.ndarray) -> tuple[int, int]:
    # np.argmax returns the first maximum in C order: lexicographic tie-break
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return int(i), int(j)


def bound_time_independent(surface: CoherenceSurface, n_spins: int, omega: float = float("nan")) -> BoundEstimate:
    if surface.values.size == 0:
        raise EmptySurface("surface has no points")
    ratio = surface.abs / n_spins
    i, j = _argmax(ratio)
    return BoundEstimate(
        Method.TIME_INDEPENDENT, float(ratio[i, j]), float(surface.tau_grid[i]), float(surface.t_grid[j]),
        n_spins, omega, grid_spec(surface),
    )


def time_dependent_ratio(surface: CoherenceSurface, n_spins: int, omega: float, sin_floor: float = DEFAULT_SIN_FLOOR):
    """|drho| / (N |sin(omega t/2)|) with excluded points set to -inf."""
    if not omega > 0:
        raise NonPositiveOmega(f"time-dependent bound needs omega > 0, got {omega}")
    if not 0 < sin_floor < 1:
        raise OutOfRange(f"sin_floor must lie in (0, 1), got {sin_floor}")
    s = np.abs(np.sin(0.5 * omega * surface.t_grid))
    keep = s >= sin_floor
    ratio = np.full(surface.values.shape, -np.inf)
    ratio[:, keep] = surface.abs[:, keep] / (n_spins * s[keep])
    return ratio


def bound_time_dependent(
    surface: CoherenceSurface, n_spins: int, omega: float, sin_floor: float = DEFAULT_SIN_FLOOR
) -> BoundEstimate:
    if surface.values.size == 0:
        raise EmptySurface("surface has no points")
    ratio = time_dependent_ratio(surface, n_spins, omega, sin_floor)
    if not np.isfinite(ratio).any():
        raise AllPointsExcluded(f"no t in the grid has |sin(omega t/2)| >= {sin_floor}")
    clamped = int(np.count_nonzero(ratio > 1.0))
    if clamped:
        log.info("clamped %d grid points above 1", clamped)
        ratio = np.minimum(ratio, 1.0)
    i, j = _argmax(ratio)
    return BoundEstimate(
        Method.TIME_DEPENDENT, float(ratio[i, j]), float(surface.tau_grid[i]), float(surface.t_grid[j]),
        n_spins, omega, grid_spec(surface), clamped,
    )


def estimate(
    env: Environment,
    method: Method | str = Method.TIME_DEPENDENT,
    tau_grid=None,
    t_grid=None,
    sin_floor: float = DEFAULT_SIN_FLOOR,
    surface: CoherenceSurface | None = None,
) -> BoundEstimate:
    """Compute the surface for ``env`` (unless given) and reduce it to a bound."""
    method = Method(method)
    if surface is None:
        tau_grid = default_grid() if tau_grid is None else tau_grid
        t_grid = default_grid() if t_grid is None else t_grid
        surface = delta_surface(env, tau_grid, t_grid)
    if method is Method.TIME_INDEPENDENT:
        return bound_time_independent(surface, len(env), env.omega)
    return bound_time_dependent(surface, len(env), env.omega, sin_floor)


def per_tau_curve(surface: CoherenceSurface, n_spins: int) -> np.ndarray:
    """max over t of |drho| / N at every tau."""
    if surface.values.size == 0:
        raise EmptySurface("surface has no points")
    return surface.abs.max(axis=1) / n_spins


def bound_vs_polarization(
    env_template: Environment,
    p_values: Sequence[float],
    method: Method | str = Method.TIME_DEPENDENT,
    b_gauss: float | None = None,
    tau_grid=None,
    t_grid=None,
    sin_floor: float = DEFAULT_SIN_FLOOR,
) -> list[tuple[float, float]]:
    """(true mean polarization, bound) for uniform polarizations, in input order."""
    env = env_template if b_gauss is None else env_template.with_field(b_gauss)
    tau_grid = check_grid(default_grid() if tau_grid is None else tau_grid, "tau grid")
    t_grid = check_grid(default_grid() if t_grid is None else t_grid, "t grid")
    out = []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"p = {p} outside [0, 1]")
        e = set_polarization(env, Uniform(float(p)))
        out.append((e.mean_polarization, estimate(e, method, tau_grid, t_grid, sin_floor).value))
    return out


@dataclass(frozen=True)
class SoundnessReport:
    bound: BoundEstimate
    p_mean: float

    @property
    def slack(self) -> float:
        return self.p_mean - self.bound.value


def soundness_check(
    env: Environment,
    method: Method | str = Method.TIME_DEPENDENT,
    tau_grid=None,
    t_grid=None,
    sin_floor: float = DEFAULT_SIN_FLOOR,
    surface: CoherenceSurface | None = None,
) -> SoundnessReport:
    """Compute a bound and verify it does not exceed the true mean |p_k|."""
    bound = estimate(env, method, tau_grid, t_grid, sin_floor, surface)
    report = SoundnessReport(bound, env.mean_polarization)
    if bound.value > report.p_mean + SOUNDNESS_SLACK:
        raise SoundnessViolation(f"bound {bound.value} exceeds mean polarization {report.p_mean}: {asdict(bound)}")
    return report
