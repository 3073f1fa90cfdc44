"""Localization and thermalization diagnostics on evolved states.

Conventions: the imbalance correlates the instantaneous magnetization
profile with the initial one, normalized by L*S^2 so fully polarized
product states start at 1; entanglement entropy is reported in bits;
participation entropy uses the natural log of the degeneracy-resolved
inverse participation ratio of the initial state over the energy basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import trapezoid

from .basis import SpinBasis
from .dynamics import StateVector
from .errors import BasisMismatchError
from .model import SparseOperator, full_spectrum

DEFAULT_AVERAGE_WINDOW = (400.0, 500.0)
DEFAULT_DOS_GRID_POINTS = 2000
_WEIGHT_FLOOR = 1e-14


def _check_state(psi: StateVector, basis: SpinBasis):
    if not basis.compatible_with(psi.basis):
        raise BasisMismatchError("state does not live on the given basis")


def magnetization_profile(psi: StateVector, basis: SpinBasis) -> np.ndarray:
    """Per-site <Sz_j>, j = 1..L."""
    _check_state(psi, basis)
    weights = np.abs(psi.amplitudes) ** 2
    return weights @ basis.sz_matrix


def imbalance_from_profiles(profile_t, profile_0, L: int, two_s: int) -> float:
    s = two_s / 2.0
    return float(np.dot(profile_t, profile_0) / (L * s * s))


def imbalance(psi_t: StateVector, psi_0: StateVector, basis: SpinBasis) -> float:
    """Overlap of the current magnetization profile with the initial one.

    (1/(L*S^2)) * sum_j <Sz_j(t)><Sz_j(0)>; stays in [-1, 1] and equals 1 at
    t = 0 for fully polarized product states.
    """
    pt = magnetization_profile(psi_t, basis)
    p0 = magnetization_profile(psi_0, basis)
    return imbalance_from_profiles(pt, p0, basis.L, basis.two_s)


def thermal_imbalance(L: int, two_s: int, two_sz_total: int) -> float:
    """Sector-averaged late-time imbalance (Sz_tot/(L*S))^2, evaluated exactly."""
    if L < 1 or two_s < 1:
        raise ValueError("need L >= 1 and two_s >= 1")
    return float(Fraction(two_sz_total, L * two_s) ** 2)


def entanglement_entropy(psi: StateVector, cut: int, basis: SpinBasis) -> float:
    """Bipartite entanglement entropy in bits across sites 1..cut | cut+1..L.

    The amplitudes are arranged as a matrix over the left/right factors that
    actually occur in the basis and the Schmidt weights are read off the
    smaller Gram matrix.
    """
    _check_state(psi, basis)
    left_ids, right_ids, n_left, n_right = basis.bipartition(cut)
    M = np.zeros((n_left, n_right), dtype=np.complex128)
    M[left_ids, right_ids] = psi.amplitudes
    if n_left <= n_right:
        gram = M @ M.conj().T
    else:
        gram = M.conj().T @ M
    w = np.linalg.eigvalsh(gram)
    w = w[w > _WEIGHT_FLOOR]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))


@dataclass
class SpectralDecomposition:
    """Initial-state overlaps with an eigenbasis, plus a degeneracy tolerance."""

    eigenvalues: np.ndarray
    overlaps: np.ndarray
    degeneracy_tol: float

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.overlaps = np.asarray(self.overlaps, dtype=np.complex128)
        if self.eigenvalues.shape != self.overlaps.shape:
            raise ValueError("eigenvalues and overlaps must have matching shapes")
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        total = float(np.sum(np.abs(self.overlaps) ** 2))
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"overlap weights sum to {total!r}, expected 1")
        if self.degeneracy_tol < 0:
            raise ValueError("degeneracy_tol must be non-negative")


def default_degeneracy_tol(eigenvalues: np.ndarray) -> float:
    """1e-8 relative to the spectral width (floored at an absolute 1e-8)."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    width = float(eigenvalues[-1] - eigenvalues[0]) if eigenvalues.size else 0.0
    return 1e-8 * max(1.0, width)


def decompose_state(
    H: SparseOperator,
    psi0: StateVector,
    *,
    max_dim: int = 20_000,
    degeneracy_tol: float | None = None,
) -> SpectralDecomposition:
    """Expand the initial state over the eigenbasis of H.

    Diagonal operators skip the dense solver: their eigenvectors are basis
    vectors, so the overlaps are a permutation of the amplitudes.
    """
    if H.basis is not None:
        _check_state(psi0, H.basis)
    if H.is_diagonal():
        d = H.diagonal()
        order = np.argsort(d, kind="stable")
        vals = d[order]
        c = psi0.amplitudes[order]
    else:
        vals, vecs = full_spectrum(H, max_dim=max_dim)
        c = vecs.T.conj() @ psi0.amplitudes
    tol = default_degeneracy_tol(vals) if degeneracy_tol is None else degeneracy_tol
    return SpectralDecomposition(vals, c, tol)


def participation_entropy(decomp: SpectralDecomposition) -> float:
    """-ln of the degeneracy-resolved inverse participation ratio.

    Pairs of levels within the degeneracy tolerance of each other contribute
    jointly, so exact degeneracies are treated as one line.  0 for a single
    eigenstate, ln(K) for an even superposition of K non-degenerate levels.
    """
    E = decomp.eigenvalues
    p = np.abs(decomp.overlaps) ** 2
    cum = np.concatenate([[0.0], np.cumsum(p)])
    lo = np.searchsorted(E, E - decomp.degeneracy_tol, side="left")
    hi = np.searchsorted(E, E + decomp.degeneracy_tol, side="right")
    ipr = float(np.sum(p * (cum[hi] - cum[lo])))
    s2 = -np.log(min(max(ipr, 1e-300), 1.0))
    return float(max(s2, 0.0))


def density_of_states(eigenvalues, sigma: float, grid=None):
    """Gaussian-broadened spectral density, normalized to unit integral.

    Each eigenvalue contributes one unit-weight Gaussian of width ``sigma``.
    The default grid spans [min-5*sigma, max+5*sigma] with 2000 points.
    Returns (grid, density).
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.size == 0:
        raise ValueError("need at least one eigenvalue")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if grid is None:
        grid = np.linspace(
            eigenvalues.min() - 5 * sigma,
            eigenvalues.max() + 5 * sigma,
            DEFAULT_DOS_GRID_POINTS,
        )
    else:
        grid = np.asarray(grid, dtype=float)
    density = np.zeros_like(grid)
    for start in range(0, eigenvalues.size, 1024):
        chunk = eigenvalues[start : start + 1024]
        density += np.exp(-0.5 * ((grid[:, None] - chunk[None, :]) / sigma) ** 2).sum(axis=1)
    density /= trapezoid(density, grid)
    return grid, density


def time_average(times, values, window=DEFAULT_AVERAGE_WINDOW) -> float:
    """Mean of the samples whose time falls inside the closed window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape:
        raise ValueError("times and values must have matching shapes")
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if not mask.any():
        raise ValueError(f"no samples inside the window [{lo}, {hi}]")
    return float(values[mask].mean())


@dataclass
class ObservableSeries:
    """Per-time diagnostics along one trajectory."""

    times: np.ndarray
    imbalance: np.ndarray
    entropy: np.ndarray
    magnetization: np.ndarray
    entropy_cut: int

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.imbalance) == len(self.entropy) == self.magnetization.shape[0] == n):
            raise ValueError("series columns must share the time grid")

    def averages(self, window=DEFAULT_AVERAGE_WINDOW) -> dict[str, float]:
        return {
            "imbalance_avg": time_average(self.times, self.imbalance, window),
            "entropy_avg": time_average(self.times, self.entropy, window),
        }
