"""Randomized consistency battery: closed forms vs. dense evolution and the derived inequalities."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import dynamics, oracle
from .environment import CouplingRow, Environment, Explicit, generate_environment, load_table1, set_polarization
from .estimator import Method, soundness_check
from .errors import SoundnessViolation

ORACLE_TOL = 1e-9
IDENTITY_TOL = 1e-12
PROPAGATOR_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    cases: int
    max_error: float
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: cases={self.cases} max_error={self.max_error:.3e} violations={self.violations}"


def random_environment(rng: np.random.Generator, max_n: int, b_max_gauss: float = 500.0) -> Environment:
    """Lattice environment with random size, field and signed polarizations."""
    n = int(rng.integers(1, max_n + 1))
    env = generate_environment(int(rng.integers(2**31)), n, 0.3, 1.2)
    env = env.with_field(float(rng.uniform(0.0, b_max_gauss)))
    return set_polarization(env, Explicit(tuple(rng.uniform(-1.0, 1.0, n))))


def corrupt(env: Environment) -> Environment:
    """Perturb the first coupling row by 1% (negative control)."""
    s = env.spins[0]
    c = s.coupling
    bad = replace(s, coupling=CouplingRow(1.01 * c.ax + 1e-3, c.ay, c.az), position=None)
    return replace(env, spins=(bad,) + env.spins[1:])


def oracle_suite(rng, max_n: int, cases: int, corrupted: bool = False, t_max: float = 200.0) -> SuiteResult:
    worst, bad = 0.0, 0
    for _ in range(cases):
        env = random_environment(rng, max_n)
        tau, t = rng.uniform(0.0, t_max, 2)
        closed = dynamics.delta_rho(corrupt(env) if corrupted else env, tau, t)
        err = abs(closed - oracle.oracle_delta(env, tau, t))
        worst = max(worst, err)
        bad += err > ORACLE_TOL
    return SuiteResult("oracle_vs_closed_form", cases, worst, bad)


def identity_suite(rng, points: int, t_max: float = 200.0) -> SuiteResult:
    """Telescoped sum vs. direct branch difference on the reference spins."""
    full = load_table1()
    worst, bad = 0.0, 0
    for n in range(1, len(full) + 1):
        env = set_polarization(full.truncated(n), Explicit(tuple(rng.uniform(-1, 1, n))))
        env = env.with_field(float(rng.uniform(0, 500)))
        tau, t = rng.uniform(0, t_max, (2, points))
        err = np.abs(dynamics.delta_rho(env, tau, t) - dynamics.delta_rho(env, tau, t, method="difference"))
        worst = max(worst, float(err.max()))
        bad += int(np.count_nonzero(err > IDENTITY_TOL))
    return SuiteResult("sum_vs_difference", len(full) * points, worst, bad)


def inequality_suite(rng, draws: int, t_max: float = 200.0) -> SuiteResult:
    """|L0|, |L1| <= 1, |C| <= 2 and |C| <= 2|sin(omega t/2)| on random parameters."""
    worst, bad = 0.0, 0
    rows = rng.normal(0.0, 1.0, (draws, 3)) * rng.choice([0.01, 0.1, 1.0], (draws, 1))
    p = rng.uniform(-1, 1, draws)
    omega = rng.uniform(0, 2.0, draws)
    tau, t = rng.uniform(0, t_max, (2, draws))
    for k in range(draws):
        L0, C = dynamics._stack(rows[k], [p[k]], omega[k], tau[k], t[k])
        L0, C = complex(L0[0]), float(C[0])
        L1 = L0 - 1j * p[k] * C
        excess = max(abs(L0) - 1.0, abs(L1) - 1.0, abs(C) - 2.0, abs(C) - 2.0 * abs(np.sin(0.5 * omega[k] * t[k])))
        worst = max(worst, excess)
        bad += excess > 1e-12
    return SuiteResult("closed_form_inequalities", draws, max(worst, 0.0), bad)


def propagator_suite(rng, max_n: int, cases: int) -> SuiteResult:
    worst, bad = 0.0, 0
    for _ in range(cases):
        env = random_environment(rng, min(max_n, oracle.MAX_EIGH_SPINS))
        t = float(rng.uniform(0, 200))
        a = oracle.build_propagators(env, t)
        b = oracle.build_propagators_eigh(env, t)
        eye = np.eye(a.w1.shape[0])
        err = max(
            np.abs(a.w0 - b.w0).max(),
            np.abs(a.w1 - b.w1).max(),
            np.abs(a.w1.conj().T @ a.w1 - eye).max(),
        )
        worst = max(worst, float(err))
        bad += err > PROPAGATOR_TOL
    return SuiteResult("tensor_vs_eigh_propagators", cases, worst, bad)


def soundness_suite(rng, max_n: int, cases: int, points: int = 64) -> SuiteResult:
    grid = np.linspace(0.0, 100.0, points)
    worst, bad = 0.0, 0
    for _ in range(cases):
        env = random_environment(rng, max_n)
        env = env.with_field(max(env.b_gauss, 1.0))
        surface = dynamics.delta_surface(env, grid, grid, workers=1)
        for method in Method:
            try:
                rep = soundness_check(env, method, surface=surface)
                worst = max(worst, -rep.slack)
            except SoundnessViolation:
                bad += 1
    return SuiteResult("bound_soundness", 2 * cases, max(worst, 0.0), bad)


def run_validation(max_n: int = 6, cases: int = 200, seed: int = 42, corrupted: bool = False) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        oracle_suite(rng, max_n, cases, corrupted),
        identity_suite(rng, max(cases, 1)),
        inequality_suite(rng, 50 * cases),
        propagator_suite(rng, max_n, max(1, cases // 4)),
        soundness_suite(rng, max_n, max(1, cases // 4)),
    ]
