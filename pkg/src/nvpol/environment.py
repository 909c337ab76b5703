"""Nuclear-spin environments of an NV-center qubit.

Couplings are the secular dipolar row ``A^{z,j}`` (j = x, y, z) of each
13C nucleus, stored as angular frequencies in rad/us. Times are in us and
applied fields enter in gauss.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    DistanceTooSmall,
    LengthMismatch,
    NonFiniteInput,
    OutOfRange,
    ShellTooSmall,
)

MIN_DISTANCE_NM = 0.15
MAX_SPINS = 24
GAUSS_TO_TESLA = 1e-4


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants in SI units, except the lattice constant (nm).

    ``larmor_per_tesla`` is the factor that turns the applied field (T)
    into the nuclear precession rate used by the dynamics (rad/s). It
    defaults to the bare value 10.71e6 rather than 2*pi*10.71e6: with the
    embedded reference couplings this is the convention under which the
    published bound values are recovered (e.g. 0.62 for one spin at
    100 G). Pass ``larmor_per_tesla=gamma_n`` for the strictly angular
    convention.
    """

    gamma_e: float = 2 * math.pi * 28.08e9
    gamma_n: float = 2 * math.pi * 10.71e6
    mu0_over_4pi: float = 1e-7
    hbar: float = 1.054571817e-34
    lattice_constant: float = 0.357
    c13_abundance: float = 0.0107
    larmor_per_tesla: float = 10.71e6

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise OutOfRange(f"constant {name} must be finite and > 0, got {value}")

    @property
    def dipolar_prefactor(self) -> float:
        """C(r) * r^3 in rad/us * nm^3."""
        return self.mu0_over_4pi * self.hbar * self.gamma_e * self.gamma_n / 1e-27 * 1e-6

    def dipolar_strength(self, r_nm: float) -> float:
        """C(r) in rad/us for a distance in nm."""
        return self.dipolar_prefactor / r_nm**3

    def larmor(self, b_gauss: float) -> float:
        """Nuclear Larmor frequency in rad/us for a field in gauss."""
        return self.larmor_per_tesla * b_gauss * GAUSS_TO_TESLA * 1e-6


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class CouplingRow:
    """Secular hyperfine components (ax, ay, az) in rad/us."""

    ax: float
    ay: float
    az: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.ax, self.ay, self.az)):
            raise NonFiniteInput(f"non-finite coupling {self}")

    @property
    def perp_sq(self) -> float:
        return self.ax * self.ax + self.ay * self.ay

    @property
    def norm(self) -> float:
        return math.sqrt(self.ax * self.ax + self.ay * self.ay + self.az * self.az)

    def as_array(self) -> np.ndarray:
        return np.array([self.ax, self.ay, self.az], dtype=float)


@dataclass(frozen=True)
class NuclearSpin:
    coupling: CouplingRow
    polarization: float = 0.0
    position: tuple[float, float, float] | None = None
    r_nm: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.polarization) and -1.0 <= self.polarization <= 1.0):
            raise OutOfRange(f"polarization {self.polarization} outside [-1, 1]")
        if self.position is not None and self.r_nm is None:
            object.__setattr__(self, "r_nm", float(np.linalg.norm(self.position)))


@dataclass(frozen=True)
class Environment:
    """Ordered nuclear spins in an applied field along the NV axis."""

    spins: tuple[NuclearSpin, ...]
    b_gauss: float = 0.0
    constants: PhysicalConstants = field(default=DEFAULT_CONSTANTS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(self.spins))
        if not 1 <= len(self.spins) <= MAX_SPINS:
            raise OutOfRange(f"environment needs 1..{MAX_SPINS} spins, got {len(self.spins)}")
        if not (math.isfinite(self.b_gauss) and self.b_gauss >= 0):
            raise OutOfRange(f"b_gauss must be finite and >= 0, got {self.b_gauss}")
        for s in self.spins:
            if s.position is None:
                continue
            expected = compute_coupling(s.position, self.constants).as_array()
            if not np.allclose(s.coupling.as_array(), expected, rtol=1e-9, atol=1e-12 * np.abs(expected).max()):
                raise OutOfRange(f"coupling {s.coupling} does not match position {s.position}")

    def __len__(self) -> int:
        return len(self.spins)

    @property
    def n_spins(self) -> int:
        return len(self.spins)

    @property
    def b_tesla(self) -> float:
        return self.b_gauss * GAUSS_TO_TESLA

    @property
    def omega(self) -> float:
        """Larmor frequency in rad/us."""
        return self.constants.larmor(self.b_gauss)

    @property
    def couplings(self) -> np.ndarray:
        """(N, 3) array of coupling rows."""
        return np.array([[s.coupling.ax, s.coupling.ay, s.coupling.az] for s in self.spins])

    @property
    def polarizations(self) -> np.ndarray:
        return np.array([s.polarization for s in self.spins], dtype=float)

    @property
    def mean_polarization(self) -> float:
        """Mean of |p_k|, the quantity the bounds estimate."""
        return float(np.mean(np.abs(self.polarizations)))

    def with_field(self, b_gauss: float) -> "Environment":
        return replace(self, b_gauss=float(b_gauss))

    def truncated(self, n: int) -> "Environment":
        if not 1 <= n <= len(self.spins):
            raise OutOfRange(f"cannot truncate {len(self.spins)} spins to {n}")
        return replace(self, spins=self.spins[:n])


def compute_coupling(position: Sequence[float], constants: PhysicalConstants = DEFAULT_CONSTANTS) -> CouplingRow:
    """Secular dipolar row for a nucleus at ``position`` (nm) from the NV.

    ``A^{z,j} = -C(r) (delta_zj - 3 rhat_j rhat_z)``, so an in-plane nucleus
    has ``az = -C(r)`` and a nucleus on the axis has ``az = +2 C(r)``.
    """
    pos = np.asarray(position, dtype=float)
    if pos.shape != (3,) or not np.all(np.isfinite(pos)):
        raise NonFiniteInput(f"position must be a finite 3-vector, got {position!r}")
    r = float(np.linalg.norm(pos))
    if r <= MIN_DISTANCE_NM:
        raise DistanceTooSmall(f"|r| = {r} nm is below {MIN_DISTANCE_NM} nm")
    rhat = pos / r
    strength = constants.dipolar_strength(r)
    row = -strength * (np.array([0.0, 0.0, 1.0]) - 3.0 * rhat * rhat[2])
    return CouplingRow(float(row[0]), float(row[1]), float(row[2]))


def norm_interval(r_nm: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """Admissible range [C(r), 2 C(r)] of a dipolar row norm."""
    c = constants.dipolar_strength(r_nm)
    return c, 2.0 * c


# --- diamond lattice -------------------------------------------------------

# carbon sites of the conventional cell in units of a/4
_FCC = np.array([[0, 0, 0], [0, 2, 2], [2, 0, 2], [2, 2, 0]])
_BASIS = np.vstack([_FCC, _FCC + 1])


def _nv_frame() -> np.ndarray:
    """Rotation taking the crystal [111] direction onto the lab z axis."""
    z = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    x = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


@lru_cache(maxsize=32)
def lattice_sites(r_min: float, r_max: float, lattice_constant: float) -> np.ndarray:
    """Diamond-lattice carbon sites with r_min <= |r| <= r_max (nm).

    Rows are ordered by (distance, integer site coordinates) so the result
    does not depend on enumeration order. Positions are returned in the NV
    frame (z along [111]).
    """
    q = lattice_constant / 4.0
    n = int(math.ceil(r_max / lattice_constant)) + 1
    cells = np.array([(i, j, k) for i in range(-n, n + 1) for j in range(-n, n + 1) for k in range(-n, n + 1)])
    ints = (4 * cells[:, None, :] + _BASIS[None, :, :]).reshape(-1, 3)
    r = np.sqrt((ints.astype(float) ** 2).sum(axis=1)) * q
    keep = (r >= r_min) & (r <= r_max)
    ints, r = ints[keep], r[keep]
    order = np.lexsort((ints[:, 2], ints[:, 1], ints[:, 0], np.round(r, 12)))
    sites = (ints[order] * q) @ _nv_frame().T
    sites.flags.writeable = False
    return sites


def generate_environment(
    seed: int,
    n_spins: int,
    r_min: float = 0.3,
    r_max: float = 2.5,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    b_gauss: float = 0.0,
) -> Environment:
    """Place ``n_spins`` nuclei on distinct lattice sites inside a shell.

    Sites are drawn uniformly without replacement; the result is sorted by
    distance and fully determined by ``seed``. Polarizations start at 0.
    """
    if n_spins < 1:
        raise OutOfRange("n_spins must be >= 1")
    if r_min < MIN_DISTANCE_NM or r_max <= r_min:
        raise OutOfRange(f"invalid shell [{r_min}, {r_max}] nm")
    sites = lattice_sites(r_min, r_max, constants.lattice_constant)
    if len(sites) < n_spins:
        raise ShellTooSmall(f"shell holds {len(sites)} sites, {n_spins} requested")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(sites), size=n_spins, replace=False))
    spins = []
    for pos in sites[chosen]:
        position = tuple(float(v) for v in pos)
        spins.append(NuclearSpin(compute_coupling(position, constants), 0.0, position))
    return Environment(tuple(spins), b_gauss, constants)


# --- polarization profiles -------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    p: float


@dataclass(frozen=True)
class Graded:
    """Magnitudes with a given mean and spread; stronger-coupled spins get larger p."""

    mean: float
    sigma: float
    seed: int = 0


@dataclass(frozen=True)
class Explicit:
    values: tuple[float, ...]


Profile = Union[Uniform, Graded, Explicit]


def _check_p(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)) or np.any(np.abs(values) > 1.0):
        raise OutOfRange(f"polarizations must lie in [-1, 1], got {values.tolist()}")


def graded_values(n: int, mean: float, sigma: float, seed: int) -> np.ndarray:
    """Descending magnitudes in [0, 1] whose mean equals ``mean``."""
    if not 0.0 <= mean <= 1.0 or sigma < 0:
        raise OutOfRange(f"graded profile needs mean in [0, 1] and sigma >= 0, got {mean}, {sigma}")
    if mean == 0.0:
        return np.zeros(n)
    if mean == 1.0:
        return np.ones(n)
    rng = np.random.default_rng(seed)
    v = np.sort(np.clip(rng.normal(mean, sigma, size=n), 0.0, 1.0))[::-1]
    if v.sum() == 0.0:
        return np.full(n, mean)
    # find s with mean(min(s v, 1)) == mean; k leading entries saturate at 1
    target = n * mean
    for k in range(n):
        rest = v[k:].sum()
        if rest == 0.0:
            # only zeros left to scale: spread the deficit evenly
            return np.concatenate([np.ones(k), np.full(n - k, (target - k) / (n - k))])
        s = (target - k) / rest
        if s * v[k] <= 1.0:
            return np.concatenate([np.ones(k), s * v[k:]])
    return np.ones(n)


def set_polarization(env: Environment, profile: Profile) -> Environment:
    n = len(env)
    if isinstance(profile, Uniform):
        values = np.full(n, float(profile.p))
    elif isinstance(profile, Explicit):
        values = np.asarray(profile.values, dtype=float)
        if values.shape != (n,):
            raise LengthMismatch(f"{values.size} polarizations for {n} spins")
    elif isinstance(profile, Graded):
        magnitudes = graded_values(n, profile.mean, profile.sigma, profile.seed)
        norms = np.linalg.norm(env.couplings, axis=1)
        # stable: equal norms keep list order
        order = np.argsort(-norms, kind="stable")
        values = np.empty(n)
        values[order] = magnitudes
    else:
        raise TypeError(f"unknown polarization profile {profile!r}")
    _check_p(values)
    spins = tuple(replace(s, polarization=float(p)) for s, p in zip(env.spins, values))
    return replace(env, spins=spins)


# --- reference environment -------------------------------------------------

# k, r (nm), A^{zx}, A^{zy}, A^{zz} (rad/us)
_TABLE1 = """
1  0.50442  1.37617   0          0.973096
2  0.56396  0.492352 -0.511667  -0.417774
3  0.56396  0.196941  0.682223  -0.417774
4  0.56396 -0.689293  0.170556  -0.417774
5  0.61778  0.499393  0         -0.353124
6  0.63680 -0.013411 -0.116145  -0.47416
7  0.66728  0         0         -0.420338
8  0.68492 -0.372671  0.161371  -0.22399
9  1.03132 -0.251613 -0.251613  -0.215682
10 1.03132  0.505446 -0.135434   0.257915
11 1.54291 -0.137190  0.036760   0.122291
12 2.16954 -0.017784 -0.007206  -0.034589
13 2.33189  0.013514 -0.003004  -0.028353
14 2.35773 -0.041094 -0.011011   0.027203
15 2.45435 -0.001277  0.004767  -0.025882
"""


def load_table1(n: int | None = None, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Environment:
    """The 15-spin reference environment, optionally truncated to spins 1..n."""
    spins = []
    for line in _TABLE1.strip().splitlines():
        _, r, ax, ay, az = line.split()
        spins.append(NuclearSpin(CouplingRow(float(ax), float(ay), float(az)), 0.0, None, float(r)))
    env = Environment(tuple(spins), 0.0, constants)
    return env if n is None else env.truncated(n)


def audit_rows(env: Environment) -> list[dict]:
    """Check each spin's row norm against the dipolar interval at its distance."""
    report = []
    for k, s in enumerate(env.spins, start=1):
        if s.r_nm is None:
            continue
        lo, hi = norm_interval(s.r_nm, env.constants)
        norm = s.coupling.norm
        report.append({"k": k, "r_nm": s.r_nm, "norm": norm, "lo": lo, "hi": hi, "ok": lo <= norm <= hi})
    return report


# --- serialization ---------------------------------------------------------

def environment_to_dict(env: Environment) -> dict:
    spins = []
    for s in env.spins:
        d: dict = {}
        if s.r_nm is not None:
            d["r_nm"] = s.r_nm
        if s.position is not None:
            d["position_nm"] = list(s.position)
        d.update(ax=s.coupling.ax, ay=s.coupling.ay, az=s.coupling.az, p=s.polarization)
        spins.append(d)
    return {"b_z_gauss": env.b_gauss, "spins": spins}


def environment_from_dict(data: dict, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Environment:
    spins = []
    for d in data["spins"]:
        pos = d.get("position_nm")
        spins.append(
            NuclearSpin(
                CouplingRow(float(d["ax"]), float(d["ay"]), float(d["az"])),
                float(d.get("p", 0.0)),
                None if pos is None else tuple(float(v) for v in pos),
                None if d.get("r_nm") is None else float(d["r_nm"]),
            )
        )
    return Environment(tuple(spins), float(data.get("b_z_gauss", 0.0)), constants)


def dumps_environment(env: Environment) -> str:
    # json writes shortest round-trip reprs, so floats reload bit-exactly
    return json.dumps(environment_to_dict(env), indent=2)


def save_environment(env: Environment, path: str | Path) -> None:
    Path(path).write_text(dumps_environment(env) + "\n")


def load_environment(path: str | Path, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Environment:
    return environment_from_dict(json.loads(Path(path).read_text()), constants)
