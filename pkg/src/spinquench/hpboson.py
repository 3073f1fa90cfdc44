"""Bosonized description of magnon excitations above the polarized state.

Spin deviations from the fully polarized product state are mapped to
bosons (Sz_j = S - n_j, S+_j = sqrt(2S - n_j) a_j and its conjugate), with
a hard per-site occupation cutoff n_max.  Keeping terms through quartic
order in the nearest-neighbor model (J2 = 0) gives

    H = sum_j mu_j n_j                                  chemical potential
        - J*S sum_j (n_j + n_{j+1})                     exchange quadratic, bond-resolved
        - J*S sum_j (a+_j a_{j+1} + h.c.)               hopping
        + (J/8) sum_j [(a+_j)^2 a_j a_{j+1}
                       + (a+_{j+1})^2 a_{j+1} a_j + h.c.]   correlated hopping
        + D sum_j n_j (n_j - 1)                         on-site interaction
        + (J/2) sum_j n_j n_{j+1}                       neighbor repulsion

with mu_j = sign_2DS * 2*D*S - h_j.  The quadratic exchange part is kept
bond-resolved (edge sites feel one bond, bulk sites two) so the one-boson
block reproduces the spin one-deviation block exactly; an additive constant
(the classical reference energy) is dropped throughout, so spectra are
meaningful relative to the polarized state.  The sign of the 2*D*S shift is
exposed as ``anisotropy_mu_sign`` (+1 by default; -1 gives the sign a direct
expansion of D*(S - n)^2 produces).  Total boson number is conserved.
"""

from __future__ import annotations

import numpy as np

from .basis import (
    DEFAULT_ENUMERATION_GUARD,
    _all_digit_strings,
    _digit_strings_with_sum,
    count_digit_strings,
)
from .errors import BasisMismatchError, CapacityError, EmptySectorError
from .model import DEFAULT_NNZ_GUARD, ModelParams, SparseOperator, field_profile


class BosonBasis:
    """Occupation-number basis with per-site cutoff, one total-number sector.

    Rows of ``configs`` are occupation vectors in strictly increasing
    mixed-radix key order (site 1 most significant, base n_max + 1).
    """

    def __init__(self, L: int, n_max: int, total_n: int | None, configs: np.ndarray):
        self.L = int(L)
        self.n_max = int(n_max)
        self.total_n = None if total_n is None else int(total_n)
        self.configs = configs
        base = self.n_max + 1
        self.key_powers = base ** np.arange(self.L - 1, -1, -1, dtype=np.int64)
        self.keys = configs.astype(np.int64) @ self.key_powers

    @property
    def size(self) -> int:
        return self.configs.shape[0]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        sector = "full" if self.total_n is None else f"total_n={self.total_n}"
        return f"BosonBasis(L={self.L}, n_max={self.n_max}, {sector}, size={self.size})"

    def compatible_with(self, other) -> bool:
        return (
            isinstance(other, BosonBasis)
            and self.L == other.L
            and self.n_max == other.n_max
            and self.total_n == other.total_n
            and self.size == other.size
        )

    def ordinal(self, config) -> int:
        config = np.asarray(config, dtype=np.int64)
        key = int(config @ self.key_powers)
        pos = int(np.searchsorted(self.keys, key))
        if pos == self.size or self.keys[pos] != key:
            raise KeyError(f"occupation vector {list(config)} not in {self!r}")
        return pos


def enumerate_boson_sector(
    L: int,
    n_max: int,
    total_n: int | None = None,
    *,
    max_states: int = DEFAULT_ENUMERATION_GUARD,
) -> BosonBasis:
    """Enumerate occupation vectors with the given total boson number."""
    if L < 2:
        raise ValueError(f"chain length must be at least 2, got {L}")
    if n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max}")
    base = n_max + 1
    full_dim = base**L
    if full_dim >= 2**62:
        raise CapacityError(f"(n_max+1)^L = {full_dim} cannot be keyed in 64-bit integers")
    if full_dim > max_states:
        raise CapacityError(
            f"(n_max+1)^L = {full_dim} exceeds the enumeration guard {max_states}"
        )
    if total_n is None:
        digits = _all_digit_strings(L, base)
    else:
        if total_n < 0 or count_digit_strings(L, base, total_n) == 0:
            raise EmptySectorError(
                f"no occupation vectors with total_n={total_n} for L={L}, n_max={n_max}"
            )
        digits = _digit_strings_with_sum(L, base, total_n)
    return BosonBasis(L, n_max, total_n, digits.astype(np.int16))


def _require_nearest_neighbor(params: ModelParams) -> float:
    if abs(params.J2) > 1e-12 * max(1.0, abs(params.J1)):
        raise ValueError(
            f"the bosonized model is defined for nearest-neighbor exchange only (J2={params.J2!r})"
        )
    return float(params.J1)


def build_hp_hamiltonian(
    params: ModelParams,
    basis: BosonBasis,
    *,
    anisotropy_mu_sign: int = +1,
    max_nnz: int = DEFAULT_NNZ_GUARD,
) -> SparseOperator:
    """Assemble the truncated boson Hamiltonian over an occupation basis.

    Moves that would push a site past n_max are truncated to zero rather
    than raising.  ``anisotropy_mu_sign`` selects the sign of the 2*D*S
    chemical-potential shift; see the module docstring.
    """
    if params.L != basis.L:
        raise BasisMismatchError(f"params L={params.L} does not match {basis!r}")
    if anisotropy_mu_sign not in (+1, -1):
        raise ValueError("anisotropy_mu_sign must be +1 or -1")
    J = _require_nearest_neighbor(params)
    S = params.spin
    L = basis.L
    n_states = basis.size
    est = n_states * (1 + 4 * (L - 1))
    if est > max_nnz:
        raise CapacityError(f"estimated {est} nonzeros exceeds the guard {max_nnz}")

    n = basis.configs.astype(np.float64)
    h = field_profile(params)
    mu = anisotropy_mu_sign * 2.0 * params.D * S - h
    bond_count = np.full(L, 2.0)
    bond_count[0] = bond_count[-1] = 1.0
    diag = n @ mu - J * S * (n @ bond_count)
    diag += params.D * np.einsum("ij,ij->i", n, n - 1.0)
    diag += 0.5 * J * np.einsum("ij,ij->i", n[:, :-1], n[:, 1:])

    rows = [np.arange(n_states, dtype=np.int64)]
    cols = [np.arange(n_states, dtype=np.int64)]
    vals = [diag]
    if J != 0.0:
        keys = basis.keys
        pw = basis.key_powers
        occ = basis.configs
        source = np.arange(n_states, dtype=np.int64)
        for bond in range(L - 1):
            for a, b in ((bond, bond + 1), (bond + 1, bond)):
                mask = (occ[:, b] >= 1) & (occ[:, a] < basis.n_max)
                if not mask.any():
                    continue
                na = occ[mask, a].astype(np.float64)
                nb = occ[mask, b].astype(np.float64)
                root = np.sqrt(nb * (na + 1.0))
                amp = (-J * S + 0.125 * J * (na + nb - 1.0)) * root
                tkeys = keys[mask] + pw[a] - pw[b]
                tgt = np.searchsorted(keys, tkeys)
                if not np.array_equal(keys[tgt], tkeys):
                    raise AssertionError("boson move left the sector")
                rows.append(tgt)
                cols.append(source[mask])
                vals.append(amp)
    return SparseOperator.from_triplets(
        n_states, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), basis=basis
    )


def build_bose_hubbard(
    basis: BosonBasis,
    hopping: float,
    interaction: float,
    site_energies,
) -> SparseOperator:
    """Plain Bose-Hubbard chain over the same occupation basis.

    H = -hopping * sum (a+_j a_{j+1} + h.c.) + interaction * sum n_j(n_j - 1)
        + sum_j site_energies[j] n_j.  Used as a reference sub-model.
    """
    site_energies = np.asarray(site_energies, dtype=float)
    if site_energies.shape != (basis.L,):
        raise ValueError(f"need {basis.L} site energies, got shape {site_energies.shape}")
    n = basis.configs.astype(np.float64)
    diag = n @ site_energies + interaction * np.einsum("ij,ij->i", n, n - 1.0)
    rows = [np.arange(basis.size, dtype=np.int64)]
    cols = [np.arange(basis.size, dtype=np.int64)]
    vals = [diag]
    if hopping != 0.0:
        keys = basis.keys
        pw = basis.key_powers
        occ = basis.configs
        source = np.arange(basis.size, dtype=np.int64)
        for bond in range(basis.L - 1):
            for a, b in ((bond, bond + 1), (bond + 1, bond)):
                mask = (occ[:, b] >= 1) & (occ[:, a] < basis.n_max)
                if not mask.any():
                    continue
                na = occ[mask, a].astype(np.float64)
                nb = occ[mask, b].astype(np.float64)
                amp = -hopping * np.sqrt(nb * (na + 1.0))
                tkeys = keys[mask] + pw[a] - pw[b]
                tgt = np.searchsorted(keys, tkeys)
                rows.append(tgt)
                cols.append(source[mask])
                vals.append(amp)
    return SparseOperator.from_triplets(
        basis.size, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), basis=basis
    )


def polarized_energy(params: ModelParams) -> float:
    """Energy of the fully polarized (all Sz = +S) product state."""
    S = params.spin
    h = field_profile(params)
    e = S * h.sum() + params.D * S * S * params.L
    e += params.J1 * S * S * (params.L - 1)
    e += params.J2 * S * S * (params.L - 2)
    return float(e)


def one_magnon_crosscheck(params: ModelParams) -> float:
    """Largest deviation between the spin one-deviation spectrum and the
    one-boson spectrum of the truncated model.

    The spin side is referenced to the polarized-state energy.  Requires
    D = 0 and nearest-neighbor exchange, where the quadratic boson term is
    an exact description of the one-deviation block.
    """
    _require_nearest_neighbor(params)
    if params.D != 0.0:
        raise ValueError("the one-deviation comparison is defined at D = 0")
    from .basis import enumerate_sector
    from .model import build_hamiltonian

    spin_basis = enumerate_sector(params.L, params.two_s, params.L * params.two_s - 2)
    H_spin = build_hamiltonian(params, spin_basis)
    spin_levels = np.linalg.eigvalsh(H_spin.todense()) - polarized_energy(params)

    boson_basis = enumerate_boson_sector(params.L, params.two_s, 1)
    H_boson = build_hp_hamiltonian(params, boson_basis)
    boson_levels = np.linalg.eigvalsh(H_boson.todense())
    return float(np.max(np.abs(spin_levels - boson_levels)))
