"""Brute-force qubit-bath evolution by dense linear algebra.

Independent of :mod:`nvpol.dynamics`: it builds the bath density matrix and
the two conditional propagators explicitly and runs the preparation and
measurement stages literally. The qubit splitting is dropped (rotating
frame), matching the closed forms.

Tensor factors follow the environment order; the first spin is the most
significant axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .environment import Environment
from .errors import TooLarge

MAX_DENSE_SPINS = 12
MAX_EIGH_SPINS = 6

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2, dtype=complex)


def _check_size(env: Environment, cap: int = MAX_DENSE_SPINS) -> None:
    if len(env) > cap:
        raise TooLarge(f"dense evolution capped at {cap} spins, got {len(env)}")


def _kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


@dataclass(frozen=True)
class DenseState:
    rho_env: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho_env.shape[0]


@dataclass(frozen=True)
class ConditionalPropagators:
    w0: np.ndarray
    w1: np.ndarray
    t: float


def build_initial_state(env: Environment) -> DenseState:
    """Product state with diag((1+p)/2, (1-p)/2) on every spin."""
    _check_size(env)
    factors = [np.diag([(1 + p) / 2, (1 - p) / 2]).astype(complex) for p in env.polarizations]
    return DenseState(_kron_all(factors))


def spin_half_rotation(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i (h . I) t) for I = sigma/2, in closed form."""
    h = np.asarray(h, dtype=float)
    mag = float(np.linalg.norm(h))
    if mag == 0.0:
        return ID2.copy()
    n = h / mag
    n_sigma = 2 * (n[0] * SX + n[1] * SY + n[2] * SZ)
    return np.cos(mag * t / 2) * ID2 - 1j * np.sin(mag * t / 2) * n_sigma


def build_propagators(env: Environment, t: float) -> ConditionalPropagators:
    """Pointer-conditional bath propagators as tensor products of 2x2 rotations."""
    _check_size(env)
    w = env.omega
    w0 = _kron_all([spin_half_rotation([0.0, 0.0, w], t) for _ in env.spins])
    w1 = _kron_all([spin_half_rotation([ax, ay, w + az], t) for ax, ay, az in env.couplings])
    return ConditionalPropagators(w0, w1, t)


def bath_hamiltonians(env: Environment) -> tuple[np.ndarray, np.ndarray]:
    """Full 2^N matrices H_E and H_E + V."""
    n = len(env)

    def embed(op, k):
        return _kron_all([op if j == k else ID2 for j in range(n)])

    h0 = sum(env.omega * embed(SZ, k) for k in range(n))
    v = sum(ax * embed(SX, k) + ay * embed(SY, k) + az * embed(SZ, k) for k, (ax, ay, az) in enumerate(env.couplings))
    return h0, h0 + v


def _expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def build_propagators_eigh(env: Environment, t: float) -> ConditionalPropagators:
    """Same propagators from an eigendecomposition of the full Hamiltonians."""
    _check_size(env, MAX_EIGH_SPINS)
    h0, h1 = bath_hamiltonians(env)
    return ConditionalPropagators(_expm_hermitian(h0, t), _expm_hermitian(h1, t), t)


def prepared_coherence(env: Environment, branch: int, tau: float, t: float) -> complex:
    """Qubit coherence at time t after a preparation of length tau in |branch>."""
    if branch not in (0, 1):
        raise ValueError(f"branch must be 0 or 1, got {branch}")
    rho = build_initial_state(env).rho_env
    prep = build_propagators(env, tau)
    wp = prep.w0 if branch == 0 else prep.w1
    rho = wp @ rho @ wp.conj().T
    meas = build_propagators(env, t)
    return complex(0.5 * np.trace(meas.w0 @ rho @ meas.w1.conj().T))


def oracle_delta(env: Environment, tau: float, t: float) -> complex:
    return prepared_coherence(env, 0, tau, t) - prepared_coherence(env, 1, tau, t)
