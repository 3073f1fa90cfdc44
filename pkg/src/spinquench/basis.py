"""Sector-resolved product bases for chains of spin-S sites.

A configuration is stored as an integer vector of doubled projections
m_j = 2*Sz_j, with m_j in {-2S, -2S+2, ..., 2S}.  Each configuration is
packed into a mixed-radix integer key using the per-site digit
(m_j + 2S)/2 in base (2S+1), with site 1 as the most significant digit.
Bases enumerate their configurations in strictly increasing key order,
which doubles as lexicographic order on the digit strings, so ordinals
can be recovered by binary search on the key array.

Site indices in the public helpers are 1-based.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, EmptySectorError

DEFAULT_ENUMERATION_GUARD = 20_000_000


def count_digit_strings(length: int, base: int, total: int) -> int:
    """Count digit strings of the given length over 0..base-1 with digit sum ``total``.

    Exact integer arithmetic; used for sector sizing before anything is
    materialized.
    """
    if total < 0 or total > (base - 1) * length:
        return 0
    counts = [1] + [0] * total
    for _ in range(length):
        new = [0] * (total + 1)
        for t, c in enumerate(counts):
            if c:
                for d in range(min(base - 1, total - t) + 1):
                    new[t + d] += c
        counts = new
    return counts[total]


def _all_digit_strings(length: int, base: int) -> np.ndarray:
    """All digit strings of the given length, one per row, lexicographic order."""
    n = base**length
    out = np.empty((n, length), dtype=np.int16)
    k = np.arange(n)
    for pos in range(length - 1, -1, -1):
        out[:, pos] = k % base
        k = k // base
    return out


def _digit_strings_with_sum(length: int, base: int, total: int) -> np.ndarray:
    """All digit strings with fixed digit sum, in lexicographic order.

    Works by gluing two exhaustively enumerated half-chains, so the cost is
    proportional to base**(length/2) plus the size of the output.
    """
    if total < 0 or total > (base - 1) * length:
        return np.zeros((0, length), dtype=np.int16)
    if length == 1:
        return np.array([[total]], dtype=np.int16)
    lhalf = length // 2
    rhalf = length - lhalf
    left = _all_digit_strings(lhalf, base)
    right = _all_digit_strings(rhalf, base)
    right_sums = right.sum(axis=1)
    groups = {int(s): right[right_sums == s] for s in np.unique(right_sums)}
    need = total - left.sum(axis=1)
    counts = np.array([len(groups.get(int(s), ())) for s in need])
    keep = np.flatnonzero(counts)
    if keep.size == 0:
        return np.zeros((0, length), dtype=np.int16)
    left_rep = np.repeat(left[keep], counts[keep], axis=0)
    right_cat = np.concatenate([groups[int(s)] for s in need[keep]], axis=0)
    return np.hstack([left_rep, right_cat])


class SpinBasis:
    """Ordered basis of product states, optionally restricted to one total-Sz sector.

    Attributes
    ----------
    L : number of sites.
    two_s : doubled spin per site (1 for spin-1/2, 3 for spin-3/2, ...).
    two_sz_total : doubled total Sz of the sector, or None for the full space.
    configs : (size, L) int16 array of m_j values, rows in increasing key order.
    keys : (size,) int64 array of packed keys, strictly increasing.
    """

    def __init__(self, L: int, two_s: int, two_sz_total: int | None, configs: np.ndarray):
        self.L = int(L)
        self.two_s = int(two_s)
        self.two_sz_total = None if two_sz_total is None else int(two_sz_total)
        self.configs = configs
        base = self.two_s + 1
        self.key_powers = base ** np.arange(self.L - 1, -1, -1, dtype=np.int64)
        self.keys = ((configs.astype(np.int64) + self.two_s) // 2) @ self.key_powers
        self._index: dict[int, int] | None = None
        self._sz_matrix: np.ndarray | None = None
        self._cuts: dict[int, tuple] = {}

    @property
    def size(self) -> int:
        return self.configs.shape[0]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        sector = "full" if self.two_sz_total is None else f"two_sz={self.two_sz_total}"
        return f"SpinBasis(L={self.L}, two_s={self.two_s}, {sector}, size={self.size})"

    def compatible_with(self, other) -> bool:
        """True when the two bases enumerate the same configurations."""
        return (
            isinstance(other, SpinBasis)
            and self.L == other.L
            and self.two_s == other.two_s
            and self.two_sz_total == other.two_sz_total
            and self.size == other.size
        )

    def pack(self, config) -> int:
        """Mixed-radix key of a single configuration."""
        config = np.asarray(config, dtype=np.int64)
        if config.shape != (self.L,):
            raise ValueError(f"expected {self.L} sites, got shape {config.shape}")
        return int(((config + self.two_s) // 2) @ self.key_powers)

    def ordinal(self, config) -> int:
        """Position of a configuration in this basis.

        Raises KeyError if the configuration is not part of the basis.
        """
        key = self.pack(config)
        pos = int(np.searchsorted(self.keys, key))
        if pos == self.size or self.keys[pos] != key:
            raise KeyError(f"configuration {list(np.asarray(config))} not in {self!r}")
        return pos

    @property
    def index(self) -> dict[int, int]:
        """Exact key -> ordinal map (built lazily)."""
        if self._index is None:
            self._index = {int(k): i for i, k in enumerate(self.keys)}
        return self._index

    @property
    def sz_matrix(self) -> np.ndarray:
        """(size, L) float array of Sz_j values, cached."""
        if self._sz_matrix is None:
            self._sz_matrix = self.configs * 0.5
        return self._sz_matrix

    def apply_sz(self, config, j: int) -> float:
        """Sz eigenvalue of site j (1-based) in a configuration."""
        if not 1 <= j <= self.L:
            raise ValueError(f"site index {j} out of range 1..{self.L}")
        return float(np.asarray(config)[j - 1]) / 2.0

    def apply_raise_lower(self, config, j: int, direction: str):
        """Apply a ladder operator at site j (1-based).

        direction is "+" or "-".  Returns (new_config, amplitude) with
        amplitude sqrt(S(S+1) - m(m +- 1)) in physical units, or None if the
        state is annihilated.
        """
        if not 1 <= j <= self.L:
            raise ValueError(f"site index {j} out of range 1..{self.L}")
        if direction not in ("+", "-"):
            raise ValueError(f"direction must be '+' or '-', got {direction!r}")
        config = np.asarray(config, dtype=np.int16)
        m = int(config[j - 1])
        step = 2 if direction == "+" else -2
        if abs(m + step) > self.two_s:
            return None
        if direction == "+":
            amp = 0.5 * np.sqrt((self.two_s - m) * (self.two_s + m + 2))
        else:
            amp = 0.5 * np.sqrt((self.two_s + m) * (self.two_s - m + 2))
        new = config.copy()
        new[j - 1] = m + step
        return new, float(amp)

    def bipartition(self, cut: int) -> tuple[np.ndarray, np.ndarray, int, int]:
        """Index maps for splitting sites 1..cut against cut+1..L.

        Returns (left_ids, right_ids, n_left, n_right) where left_ids[k] is
        the ordinal of configuration k's left factor among the distinct left
        factors present in this basis (and likewise on the right).  Cached
        per cut.
        """
        if not 1 <= cut < self.L:
            raise ValueError(f"cut must satisfy 1 <= cut < L={self.L}, got {cut}")
        if cut not in self._cuts:
            base = self.two_s + 1
            digits = (self.configs.astype(np.int64) + self.two_s) // 2
            pow_l = base ** np.arange(cut - 1, -1, -1, dtype=np.int64)
            pow_r = base ** np.arange(self.L - cut - 1, -1, -1, dtype=np.int64)
            lkeys = digits[:, :cut] @ pow_l
            rkeys = digits[:, cut:] @ pow_r
            lu, left_ids = np.unique(lkeys, return_inverse=True)
            ru, right_ids = np.unique(rkeys, return_inverse=True)
            self._cuts[cut] = (left_ids, right_ids, int(lu.size), int(ru.size))
        return self._cuts[cut]


def enumerate_sector(
    L: int,
    two_s: int,
    two_sz_total: int | None = None,
    *,
    max_states: int = DEFAULT_ENUMERATION_GUARD,
) -> SpinBasis:
    """Build the basis for a chain, restricted to one total-Sz sector if given.

    Parameters
    ----------
    L : chain length, at least 2.
    two_s : doubled spin per site, at least 1.
    two_sz_total : doubled total Sz; None enumerates the full product space.
    max_states : enumeration guard; building errors out if the full space
        (2S+1)**L exceeds it.

    Raises
    ------
    CapacityError : the full product space exceeds ``max_states``.
    EmptySectorError : no configuration has the requested total Sz.
    """
    if L < 2:
        raise ValueError(f"chain length must be at least 2, got {L}")
    if two_s < 1:
        raise ValueError(f"two_s must be a positive integer, got {two_s}")
    base = two_s + 1
    full_dim = base**L
    if full_dim >= 2**62:
        raise CapacityError(f"(2S+1)^L = {full_dim} cannot be keyed in 64-bit integers")
    if full_dim > max_states:
        raise CapacityError(
            f"(2S+1)^L = {full_dim} exceeds the enumeration guard {max_states}; "
            "raise max_states to proceed"
        )
    if two_sz_total is None:
        digits = _all_digit_strings(L, base)
    else:
        if abs(two_sz_total) > L * two_s or (two_sz_total - L * two_s) % 2 != 0:
            raise EmptySectorError(
                f"no configurations with doubled total Sz {two_sz_total} "
                f"for L={L}, two_s={two_s}"
            )
        total = (two_sz_total + L * two_s) // 2
        if count_digit_strings(L, base, total) == 0:
            raise EmptySectorError(
                f"no configurations with doubled total Sz {two_sz_total} "
                f"for L={L}, two_s={two_s}"
            )
        digits = _digit_strings_with_sum(L, base, total)
    configs = (2 * digits - two_s).astype(np.int16)
    return SpinBasis(L, two_s, two_sz_total, configs)
