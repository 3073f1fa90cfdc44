"""Unitary time evolution under a real symmetric Hamiltonian.

Two interchangeable propagators are provided: a dense path that
diagonalizes once and rotates phases, and a Krylov path (Lanczos with full
reorthogonalization) that advances step by step with adaptive substepping.
Both report the state on a shared time grid that starts at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BasisMismatchError, CapacityError, ConvergenceError
from .model import DEFAULT_DENSE_GUARD, SparseOperator, full_spectrum

NORM_TOL = 1e-10
_DENSE_CHUNK = 256


class StateVector:
    """Complex amplitudes over a fixed basis, unit norm enforced on construction."""

    __slots__ = ("amplitudes", "basis")

    def __init__(self, amplitudes, basis, *, _trusted: bool = False):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size != len(basis):
            raise ValueError(f"expected {len(basis)} amplitudes, got shape {amps.shape}")
        if not _trusted:
            nrm = np.linalg.norm(amps)
            if abs(nrm - 1.0) > NORM_TOL:
                raise ValueError(f"state norm {nrm!r} deviates from 1 beyond {NORM_TOL}")
        self.amplitudes = amps
        self.basis = basis

    @classmethod
    def basis_state(cls, basis, ordinal: int) -> "StateVector":
        amps = np.zeros(len(basis), dtype=np.complex128)
        amps[ordinal] = 1.0
        return cls(amps, basis, _trusted=True)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        if not self.basis.compatible_with(other.basis):
            raise BasisMismatchError("overlap between states over different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def uniform_time_grid(t_max: float = 500.0, dt: float = 0.5) -> np.ndarray:
    """Grid 0, dt, 2*dt, ..., ending at (or just below) t_max."""
    if t_max < 0 or dt <= 0:
        raise ValueError("need t_max >= 0 and dt > 0")
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        n = int(np.floor(t_max / dt + 1e-12))
    return np.arange(n + 1) * dt


@dataclass
class EvolutionConfig:
    """Propagation settings shared by both methods."""

    time_grid: np.ndarray = field(default_factory=uniform_time_grid)
    method: str = "krylov"
    krylov_dim: int = 30
    step_tolerance: float = 1e-10
    max_substeps: int = 10_000
    dense_guard: int = DEFAULT_DENSE_GUARD

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("time_grid must be a non-empty 1-d array")
        if grid[0] != 0.0:
            raise ValueError("time_grid must start at 0")
        if np.any(np.diff(grid) < 0):
            raise ValueError("time_grid must be non-decreasing")
        self.time_grid = grid
        if self.method not in ("dense", "krylov"):
            raise ValueError(f"method must be 'dense' or 'krylov', got {self.method!r}")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be at least 2")
        if self.step_tolerance <= 0:
            raise ValueError("step_tolerance must be positive")


def _check_operands(H: SparseOperator, psi0: StateVector):
    if H.basis is not None and not H.basis.compatible_with(psi0.basis):
        raise BasisMismatchError("state and operator were built over different bases")
    if H.dim != psi0.amplitudes.size:
        raise BasisMismatchError(
            f"operator dimension {H.dim} does not match state length {psi0.amplitudes.size}"
        )


def _dense_stream(H, psi0, times, dense_guard):
    vals, vecs = full_spectrum(H, max_dim=dense_guard)
    c0 = vecs.T.conj() @ psi0.amplitudes
    for start in range(0, len(times), _DENSE_CHUNK):
        chunk = times[start : start + _DENSE_CHUNK]
        phases = np.exp(-1j * np.outer(vals, chunk))
        block = vecs @ (c0[:, None] * phases)
        for i, t in enumerate(chunk):
            if t == 0.0:
                yield 0.0, StateVector(psi0.amplitudes.copy(), psi0.basis, _trusted=True)
            else:
                yield float(t), StateVector(block[:, i], psi0.basis, _trusted=True)


def _lanczos_basis(op, v0, m):
    """Tridiagonalize over the Krylov space of (op, v0).

    Returns (V, alpha, beta, beta_next, k) where V holds k orthonormal rows.
    beta_next is the residual norm after k steps; 0.0 flags an invariant
    subspace (the propagated result is then exact).
    """
    n = v0.size
    V = np.empty((m, n), dtype=np.complex128)
    alpha = np.empty(m)
    beta = np.empty(max(m - 1, 0))
    V[0] = v0
    w = op.dot(v0)
    a = np.vdot(V[0], w).real
    alpha[0] = a
    w = w - a * V[0]
    scale = max(1.0, abs(a))
    k = 1
    while k < m:
        for _ in range(2):
            w -= V[:k].T @ (V[:k].conj() @ w)
        b = float(np.linalg.norm(w))
        if b <= 1e-12 * scale:
            return V, alpha, beta, 0.0, k
        beta[k - 1] = b
        V[k] = w / b
        w = op.dot(V[k]) - b * V[k - 1]
        a = np.vdot(V[k], w).real
        alpha[k] = a
        w = w - a * V[k]
        scale = max(scale, abs(a), b)
        k += 1
    for _ in range(2):
        w -= V.T @ (V.conj() @ w)
    return V, alpha, beta, float(np.linalg.norm(w)), m


def _expm_tridiag_e1(alpha, beta, h):
    """First column of exp(-i*h*T) for the real symmetric tridiagonal T."""
    if alpha.size == 1:
        return np.array([np.exp(-1j * h * alpha[0])])
    w, U = scipy.linalg.eigh_tridiagonal(alpha, beta)
    return U @ (np.exp(-1j * h * w) * U[0])


def _krylov_advance(op, psi, dt, m, tol, max_substeps):
    """Advance psi by exp(-i*H*dt) with local-error-controlled substeps.

    The local error of a candidate substep is estimated from the last
    Krylov component, beta_next * |y_k| * h; the substep is halved until the
    estimate meets ``tol``.  Halving reuses the same Krylov factorization,
    so rejections cost no extra matrix applications.
    """
    remaining = float(dt)
    h = remaining
    steps = 0
    while remaining > 0.0:
        h = min(h, remaining)
        V, alpha, beta, beta_next, k = _lanczos_basis(op, psi, m)
        while True:
            y = _expm_tridiag_e1(alpha[:k], beta[: k - 1], h)
            err = 0.0 if beta_next == 0.0 else float(beta_next * abs(y[-1]) * h)
            if err <= tol:
                break
            h *= 0.5
            steps += 1
            if steps > max_substeps:
                raise ConvergenceError(
                    f"local error {err:.3e} still above {tol:.3e} after {steps} substeps"
                )
        psi = y @ V[:k]
        remaining = 0.0 if h >= remaining else remaining - h
        steps += 1
        if steps > max_substeps:
            raise ConvergenceError(f"substep budget {max_substeps} exhausted")
        if err <= 0.01 * tol:
            h *= 2.0
    return psi


def _krylov_stream(H, psi0, config):
    op = H.to_csr().astype(np.complex128)
    psi = psi0.amplitudes.copy()
    t_prev = 0.0
    for t in config.time_grid:
        dt = float(t) - t_prev
        if dt > 0.0:
            psi = _krylov_advance(
                op, psi, dt, config.krylov_dim, config.step_tolerance, config.max_substeps
            )
            t_prev = float(t)
        yield float(t), StateVector(psi.copy(), psi0.basis, _trusted=True)


def evolve_stream(H: SparseOperator, psi0: StateVector, config: EvolutionConfig):
    """Yield (t, state) pairs along config.time_grid without storing the whole set."""
    _check_operands(H, psi0)
    if config.method == "dense":
        if H.dim > config.dense_guard:
            raise CapacityError(
                f"dimension {H.dim} exceeds the dense-solver guard {config.dense_guard}"
            )
        yield from _dense_stream(H, psi0, config.time_grid, config.dense_guard)
    else:
        yield from _krylov_stream(H, psi0, config)


def evolve_dense(H: SparseOperator, psi0: StateVector, times) -> list[StateVector]:
    """States at the requested times via one dense eigendecomposition."""
    config = EvolutionConfig(time_grid=np.asarray(times, dtype=float), method="dense")
    return [state for _, state in evolve_stream(H, psi0, config)]


def evolve_krylov(H: SparseOperator, psi0: StateVector, config: EvolutionConfig) -> list[StateVector]:
    """States along config.time_grid via Lanczos stepping."""
    if config.method != "krylov":
        config = EvolutionConfig(
            time_grid=config.time_grid,
            method="krylov",
            krylov_dim=config.krylov_dim,
            step_tolerance=config.step_tolerance,
            max_substeps=config.max_substeps,
        )
    return [state for _, state in evolve_stream(H, psi0, config)]


def expectation_energy(H: SparseOperator, psi: StateVector) -> float:
    """<psi|H|psi>; the imaginary part must be numerically negligible."""
    _check_operands(H, psi)
    e = np.vdot(psi.amplitudes, H.to_csr().dot(psi.amplitudes))
    if abs(e.imag) > 1e-12 * max(1.0, abs(e.real)):
        raise ValueError(f"energy expectation has imaginary part {e.imag:.3e}")
    return float(e.real)
