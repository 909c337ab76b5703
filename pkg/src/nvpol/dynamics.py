"""Closed-form conditional coherence of the qubit and its preparation-dependent difference.

For a single nucleus with coupling row (ax, ay, az) in a field with Larmor
frequency ``omega`` the coherence factors are

    L0(t)      = (w+az)/wk sin(wt/2) sin(wk t/2) + cos(wt/2) cos(wk t/2)
                 + i p [(w+az)/wk cos(wt/2) sin(wk t/2) - sin(wt/2) cos(wk t/2)]
    L1(tau, t) = L0(t) - i p C(tau, t)
    C(tau, t)  = -2 (ax^2 + ay^2)/wk^2 sin(wk tau/2) sin(wt/2) sin(wk (tau+t)/2)

with ``wk = sqrt(ax^2 + ay^2 + (w+az)^2)``. Bath coherences are half the
product of the per-spin factors. All functions broadcast over ``tau`` and
``t``.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .environment import CouplingRow, Environment
from .errors import GridInvalid

ArrayLike = Union[float, np.ndarray]
CouplingLike = Union[CouplingRow, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SpinFrequencies:
    omega: float
    omega_k: float
    perp_sq: float


def _row(coupling: CouplingLike) -> np.ndarray:
    if isinstance(coupling, CouplingRow):
        return coupling.as_array()
    return np.asarray(coupling, dtype=float)


def spin_frequencies(coupling: CouplingLike, omega: float) -> SpinFrequencies:
    ax, ay, az = _row(coupling)
    return SpinFrequencies(omega, float(np.hypot(np.hypot(ax, ay), omega + az)), float(ax * ax + ay * ay))


def _stack(couplings: np.ndarray, p: np.ndarray, omega: float, tau, t):
    """Per-spin L0 and C, shaped (N, *broadcast(tau, t))."""
    A = np.atleast_2d(np.asarray(couplings, dtype=float))
    p = np.asarray(p, dtype=float).reshape(-1)
    tau = np.asarray(tau, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(tau.shape, t.shape)
    extra = (slice(None),) + (None,) * len(shape)

    ax, ay, az = A[:, 0], A[:, 1], A[:, 2]
    shifted = omega + az
    perp = np.hypot(ax, ay)
    wk = np.hypot(perp, shifted)
    live = wk > 0
    safe_wk = np.where(live, wk, 1.0)
    # wk == 0 only for zero field and zero row: L0 -> 1, C -> 0 by continuity
    cos_ratio = np.where(live, shifted / safe_wk, 0.0)[extra]
    # ratio first so that subnormal frequencies do not underflow to 0/0
    amp = np.where(live, (perp / safe_wk) ** 2, 0.0)[extra]
    wk = wk[extra]

    half_wt = 0.5 * omega * t
    sa, ca = np.sin(half_wt), np.cos(half_wt)
    half_wkt = 0.5 * wk * t
    sb, cb = np.sin(half_wkt), np.cos(half_wkt)
    re = cos_ratio * sa * sb + ca * cb
    im = p[extra] * (cos_ratio * ca * sb - sa * cb)
    L0 = np.broadcast_to(re + 1j * im, (len(A),) + shape)
    C = -2.0 * amp * np.sin(0.5 * wk * tau) * sa * np.sin(0.5 * wk * (tau + t))
    C = np.broadcast_to(C, (len(A),) + shape)
    return L0, C


def l0(coupling: CouplingLike, p: float, omega: float, t: ArrayLike):
    """Coherence factor of one spin without preparation (independent of tau)."""
    L0, _ = _stack(_row(coupling), [p], omega, 0.0, t)
    return L0[0][()]


def c_k(coupling: CouplingLike, omega: float, tau: ArrayLike, t: ArrayLike):
    _, C = _stack(_row(coupling), [0.0], omega, tau, t)
    return C[0][()]


def l1(coupling: CouplingLike, p: float, omega: float, tau: ArrayLike, t: ArrayLike):
    """Coherence factor of one spin after preparation in |1> for time tau."""
    L0, C = _stack(_row(coupling), [p], omega, tau, t)
    return (L0[0] - 1j * p * C[0])[()]


def coherence_branch(env: Environment, branch: int, tau: ArrayLike, t: ArrayLike):
    """Qubit coherence after preparing the pointer state ``branch`` for time tau."""
    if branch not in (0, 1):
        raise ValueError(f"branch must be 0 or 1, got {branch}")
    p = env.polarizations
    L0, C = _stack(env.couplings, p, env.omega, tau, t)
    if branch == 0:
        return (0.5 * np.prod(L0, axis=0))[()]
    L1 = L0 - 1j * p.reshape((-1,) + (1,) * (L0.ndim - 1)) * C
    return (0.5 * np.prod(L1, axis=0))[()]


def _delta_sum(couplings, p, omega, tau, t):
    L0, C = _stack(couplings, p, omega, tau, t)
    pe = p.reshape((-1,) + (1,) * (L0.ndim - 1))
    L1 = L0 - 1j * pe * C
    ones = np.ones((1,) + L0.shape[1:], dtype=complex)
    # before[m] = prod_{n<m} L0[n], after[m] = prod_{k>m} L1[k]
    before = np.concatenate([ones, np.cumprod(L0[:-1], axis=0)])
    after = np.concatenate([np.cumprod(L1[:0:-1], axis=0)[::-1], ones])
    return 0.5 * np.sum(1j * pe * C * before * after, axis=0)


def delta_rho(env: Environment, tau: ArrayLike, t: ArrayLike, method: str = "sum"):
    """Coherence difference rho01^(0) - rho01^(1).

    ``method="sum"`` evaluates the telescoped single sum, in which every
    term carries an explicit p_m C_m factor; ``method="difference"``
    subtracts the two branch products directly and is kept as a cross-check.
    """
    if method == "sum":
        return _delta_sum(env.couplings, env.polarizations, env.omega, tau, t)[()]
    if method == "difference":
        return coherence_branch(env, 0, tau, t) - coherence_branch(env, 1, tau, t)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CoherenceSurface:
    """Complex values on a rectangular grid, indexed [i_tau, i_t]."""

    tau_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.tau_grid), len(self.t_grid)):
            raise GridInvalid(f"values shape {self.values.shape} does not match grids")

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)


def check_grid(grid, name: str = "grid") -> np.ndarray:
    g = np.asarray(grid, dtype=float).reshape(-1)
    if g.size == 0:
        raise GridInvalid(f"{name} is empty")
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise GridInvalid(f"{name} must be finite and >= 0")
    if np.any(np.diff(g) <= 0):
        raise GridInvalid(f"{name} must be strictly ascending")
    return g


def default_workers() -> int:
    """Thread count from NVPOL_THREADS (0 or unset = one per CPU)."""
    n = int(os.environ.get("NVPOL_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def delta_surface(env: Environment, tau_grid, t_grid, workers: int | None = None) -> CoherenceSurface:
    """Sample the coherence difference on the grid product tau x t.

    Rows are evaluated in blocks, possibly on several threads; each point
    depends only on its own (tau, t), so the result does not depend on the
    blocking.
    """
    tau = check_grid(tau_grid, "tau grid")
    t = check_grid(t_grid, "t grid")
    couplings, p, omega = env.couplings, env.polarizations, env.omega
    out = np.empty((tau.size, t.size), dtype=complex)
    # bound scratch memory to ~64 MB per block
    rows = max(1, int(4e6 // (t.size * len(env))))
    blocks = [slice(i, min(i + rows, tau.size)) for i in range(0, tau.size, rows)]

    def fill(block):
        out[block] = _delta_sum(couplings, p, omega, tau[block, None], t[None, :])

    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(blocks) == 1:
        for b in blocks:
            fill(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    return CoherenceSurface(tau, t, out)


SURFACE_HEADER = ("tau_us", "t_us", "re", "im", "abs")


def write_surface_csv(surface: CoherenceSurface, path: str | Path, comments: Sequence[str] = ()) -> None:
    """Row-major CSV (tau outer, t inner) with 12 significant digits."""
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SURFACE_HEADER)
        for i, tau in enumerate(surface.tau_grid):
            for j, t in enumerate(surface.t_grid):
                v = surface.values[i, j]
                w.writerow([f"{x:.12g}" for x in (tau, t, v.real, v.imag, abs(v))])


def read_surface_csv(path: str | Path) -> CoherenceSurface:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if tuple(rows[0]) != SURFACE_HEADER:
        raise GridInvalid(f"unexpected header {rows[0]}")
    data = np.array(rows[1:], dtype=float)
    tau = np.unique(data[:, 0])
    t = np.unique(data[:, 1])
    values = (data[:, 2] + 1j * data[:, 3]).reshape(tau.size, t.size)
    return CoherenceSurface(tau, t, values)
