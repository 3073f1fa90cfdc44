"""Hamiltonian assembly for open chains with competing exchange and a tilted field.

The model couples nearest and next-nearest neighbors through Heisenberg
exchange (J1, J2), usually parameterized on a circle of radius J0 by
J1 = J0*cos(theta), J2 = J0*sin(theta), and adds a site-dependent
longitudinal field together with a single-ion anisotropy:

    H = J1 sum_j S_j.S_{j+1} + J2 sum_j S_j.S_{j+2}
        + sum_j (h_j + D*Sz_j) * Sz_j,      h_j = j*h0 + gamma*j^2/L^2

with 1-based site index j and open boundaries.  Energies are measured in
units of J0 and time in 1/J0 (hbar = 1).

Operators are assembled as real symmetric coordinate triplets over a
``SpinBasis``; total Sz is conserved, so sector bases stay closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .basis import SpinBasis
from .errors import BasisMismatchError, CapacityError

DEFAULT_DENSE_GUARD = 20_000
DEFAULT_NNZ_GUARD = 200_000_000


def couplings_from_theta(J0: float, theta: float) -> tuple[float, float]:
    """Exchange pair (J1, J2) = (J0*cos(theta), J0*sin(theta)).

    theta is reduced modulo 2*pi before evaluating the trigonometry, so
    angles that differ by full turns produce identical couplings.
    """
    if not math.isfinite(J0) or not math.isfinite(theta):
        raise ValueError("J0 and theta must be finite")
    reduced = math.remainder(theta, math.tau)
    return J0 * math.cos(reduced), J0 * math.sin(reduced)


@dataclass(frozen=True)
class ModelParams:
    """Resolved chain parameters.

    Exchange can be given either through ``theta`` (preferred; J1 and J2 are
    then derived from J0) or as explicit J1/J2.  Leaving all three unset
    defaults to theta = 0, i.e. a pure nearest-neighbor chain.
    """

    L: int
    two_s: int
    J0: float = 1.0
    theta: float | None = None
    J1: float | None = None
    J2: float | None = None
    h0: float = 0.0
    gamma: float = 0.0
    D: float = 0.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"chain length must be at least 2, got {self.L}")
        if self.two_s < 1:
            raise ValueError(f"two_s must be a positive integer, got {self.two_s}")
        for name in ("J0", "h0", "gamma", "D"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.theta is not None:
            if self.J1 is not None or self.J2 is not None:
                raise ValueError("give either theta or explicit J1/J2, not both")
            j1, j2 = couplings_from_theta(self.J0, self.theta)
        elif self.J1 is None and self.J2 is None:
            object.__setattr__(self, "theta", 0.0)
            j1, j2 = couplings_from_theta(self.J0, 0.0)
        else:
            j1 = 0.0 if self.J1 is None else float(self.J1)
            j2 = 0.0 if self.J2 is None else float(self.J2)
            if not (math.isfinite(j1) and math.isfinite(j2)):
                raise ValueError("J1 and J2 must be finite")
        object.__setattr__(self, "J1", j1)
        object.__setattr__(self, "J2", j2)

    @property
    def spin(self) -> float:
        return self.two_s / 2.0


def field_profile(params: ModelParams) -> np.ndarray:
    """Site-resolved longitudinal field h_j = j*h0 + gamma*j^2/L^2, j = 1..L."""
    j = np.arange(1, params.L + 1, dtype=float)
    return j * params.h0 + params.gamma * j * j / params.L**2


class SparseOperator:
    """Real symmetric operator stored as coalesced coordinate triplets.

    Triplets carry both (r, c, v) and (c, r, v) for off-diagonal entries and
    are sorted by (row, col) with duplicates summed, so the representation is
    deterministic for a deterministic assembly order.
    """

    def __init__(self, dim: int, row: np.ndarray, col: np.ndarray, val: np.ndarray, basis=None):
        self.dim = int(dim)
        self.row = row
        self.col = col
        self.val = val
        self.basis = basis
        self._csr = None

    @classmethod
    def from_triplets(cls, dim, row, col, val, basis=None) -> "SparseOperator":
        """Coalesce raw triplets: sort by (row, col) and sum duplicates."""
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        val = np.asarray(val, dtype=np.float64)
        order = np.lexsort((col, row))
        row, col, val = row[order], col[order], val[order]
        if row.size:
            new_group = np.empty(row.size, dtype=bool)
            new_group[0] = True
            new_group[1:] = (row[1:] != row[:-1]) | (col[1:] != col[:-1])
            starts = np.flatnonzero(new_group)
            val = np.add.reduceat(val, starts)
            row, col = row[starts], col[starts]
        return cls(dim, row, col, val, basis=basis)

    @property
    def nnz(self) -> int:
        return self.val.size

    def triplets(self):
        """Iterate (row, col, value) with 0-based indices."""
        for r, c, v in zip(self.row, self.col, self.val):
            yield int(r), int(c), float(v)

    def is_diagonal(self) -> bool:
        return bool(np.all(self.row == self.col))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.dim)
        on_diag = self.row == self.col
        d[self.row[on_diag]] = self.val[on_diag]
        return d

    def to_csr(self) -> scipy.sparse.csr_matrix:
        if self._csr is None:
            self._csr = scipy.sparse.csr_matrix(
                (self.val, (self.row, self.col)), shape=(self.dim, self.dim)
            )
        return self._csr

    def todense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[self.row, self.col] = self.val
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_csr().dot(x)


def _ladder_amp_raise(two_s: int, m: np.ndarray) -> np.ndarray:
    return 0.5 * np.sqrt((two_s - m) * (two_s + m + 2.0))


def _ladder_amp_lower(two_s: int, m: np.ndarray) -> np.ndarray:
    return 0.5 * np.sqrt((two_s + m) * (two_s - m + 2.0))


def build_hamiltonian(
    params: ModelParams,
    basis: SpinBasis,
    *,
    max_nnz: int = DEFAULT_NNZ_GUARD,
) -> SparseOperator:
    """Assemble H over the given basis.

    The Ising and single-ion parts are diagonal; each exchange bond
    contributes flip-flop entries (J/2)(S+_i S-_j + S-_i S+_j) whose
    targets stay inside the sector.  Entries are generated in a fixed
    deterministic order and coalesced.
    """
    if params.L != basis.L or params.two_s != basis.two_s:
        raise BasisMismatchError(
            f"params (L={params.L}, two_s={params.two_s}) do not match {basis!r}"
        )
    L, two_s = basis.L, basis.two_s
    n_states = basis.size
    bonds = [(1, params.J1), (2, params.J2)]
    est = n_states * (1 + sum(2 * (L - r) for r, J in bonds if J != 0.0))
    if est > max_nnz:
        raise CapacityError(f"estimated {est} nonzeros exceeds the guard {max_nnz}")

    m = basis.configs
    sz = basis.sz_matrix
    h = field_profile(params)
    diag = sz @ h + params.D * np.einsum("ij,ij->i", sz, sz)
    if params.J1 != 0.0:
        diag = diag + params.J1 * np.einsum("ij,ij->i", sz[:, :-1], sz[:, 1:])
    if params.J2 != 0.0:
        diag = diag + params.J2 * np.einsum("ij,ij->i", sz[:, :-2], sz[:, 2:])

    rows = [np.arange(n_states, dtype=np.int64)]
    cols = [np.arange(n_states, dtype=np.int64)]
    vals = [diag]
    keys = basis.keys
    pw = basis.key_powers
    source = np.arange(n_states, dtype=np.int64)
    for r, J in bonds:
        if J == 0.0:
            continue
        for a in range(L - r):
            b = a + r
            ma, mb = m[:, a], m[:, b]
            for sign in (+1, -1):
                if sign > 0:
                    mask = (ma < two_s) & (mb > -two_s)
                else:
                    mask = (ma > -two_s) & (mb < two_s)
                if not mask.any():
                    continue
                msa = ma[mask].astype(np.float64)
                msb = mb[mask].astype(np.float64)
                if sign > 0:
                    amp = _ladder_amp_raise(two_s, msa) * _ladder_amp_lower(two_s, msb)
                    tkeys = keys[mask] + pw[a] - pw[b]
                else:
                    amp = _ladder_amp_lower(two_s, msa) * _ladder_amp_raise(two_s, msb)
                    tkeys = keys[mask] - pw[a] + pw[b]
                tgt = np.searchsorted(keys, tkeys)
                if not np.array_equal(keys[tgt], tkeys):
                    raise AssertionError("flip-flop target left the sector")
                rows.append(tgt)
                cols.append(source[mask])
                vals.append(0.5 * J * amp)
    return SparseOperator.from_triplets(
        n_states, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), basis=basis
    )


def full_spectrum(
    H: SparseOperator,
    *,
    max_dim: int = DEFAULT_DENSE_GUARD,
    vectors: bool = True,
):
    """Dense eigendecomposition (eigenvalues ascending, orthonormal columns).

    Purely diagonal operators short-circuit to a stable sort of the diagonal,
    which keeps exactly degenerate levels exactly degenerate and makes the
    eigenvectors plain basis vectors.

    Returns (eigenvalues, eigenvectors); eigenvectors is None when
    ``vectors=False``.
    """
    if H.dim > max_dim:
        raise CapacityError(f"dimension {H.dim} exceeds the dense-solver guard {max_dim}")
    if H.is_diagonal():
        d = H.diagonal()
        order = np.argsort(d, kind="stable")
        vals = d[order]
        if not vectors:
            return vals, None
        vecs = np.zeros((H.dim, H.dim))
        vecs[order, np.arange(H.dim)] = 1.0
        return vals, vecs
    dense = H.todense()
    if not vectors:
        return np.linalg.eigvalsh(dense), None
    vals, vecs = np.linalg.eigh(dense)
    return vals, vecs


def write_matrix_market(H: SparseOperator, path) -> None:
    """Write the triplets as matrix-market-style text (1-based indices)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{H.dim} {H.dim} {H.nnz}\n")
        for r, c, v in zip(H.row, H.col, H.val):
            fh.write(f"{r + 1} {c + 1} {v:.17g}\n")
