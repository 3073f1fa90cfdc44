import math

import numpy as np
import pytest

from spinquench import (
    CapacityError,
    ModelParams,
    build_hamiltonian,
    couplings_from_theta,
    enumerate_sector,
    field_profile,
    full_spectrum,
    write_matrix_market,
)


def kron_hamiltonian(L, two_s, J1, J2, h, D):
    """Independent dense construction via explicit Kronecker products."""
    s = two_s / 2.0
    dim = two_s + 1
    ms = np.array([s - k for k in range(dim)])
    Sz = np.diag(ms)
    Sp = np.zeros((dim, dim))
    for k in range(1, dim):
        m = ms[k]
        Sp[k - 1, k] = math.sqrt(s * (s + 1) - m * (m + 1))
    Sm = Sp.T

    def site_op(op, j):
        out = np.ones((1, 1))
        for i in range(L):
            out = np.kron(out, op if i == j else np.eye(dim))
        return out

    H = np.zeros((dim ** L, dim ** L))
    for r, J in ((1, J1), (2, J2)):
        if J == 0:
            continue
        for a in range(L - r):
            b = a + r
            H += J * (
                site_op(Sz, a) @ site_op(Sz, b)
                + 0.5 * (site_op(Sp, a) @ site_op(Sm, b) + site_op(Sm, a) @ site_op(Sp, b))
            )
    for j in range(L):
        H += h[j] * site_op(Sz, j) + D * site_op(Sz, j) @ site_op(Sz, j)
    return H


def kron_index(config, two_s):
    idx = 0
    for m in config:
        idx = idx * (two_s + 1) + (two_s - int(m)) // 2
    return idx


def test_couplings_frozen():
    j1, j2 = couplings_from_theta(1.0, 2 * math.pi / 3)
    assert j1 == pytest.approx(-0.5, abs=1e-15)
    assert j2 == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert couplings_from_theta(2.0, 0.0) == (2.0, 0.0)
    # full turns reduce exactly
    assert couplings_from_theta(1.0, 2 * math.pi) == (1.0, 0.0)
    assert couplings_from_theta(1.0, -2 * math.pi) == (1.0, 0.0)


def test_j2_sign_identity():
    # theta and pi - theta share J2 and flip J1
    for theta in (0.3, 1.1, 2.0):
        a1, a2 = couplings_from_theta(1.0, theta)
        b1, b2 = couplings_from_theta(1.0, math.pi - theta)
        assert b2 == pytest.approx(a2, abs=1e-14)
        assert b1 == pytest.approx(-a1, abs=1e-14)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(L=4, two_s=1, theta=0.3, J1=1.0)
    p = ModelParams(L=4, two_s=1)
    assert (p.J1, p.J2) == (1.0, 0.0)
    p = ModelParams(L=4, two_s=1, J1=0.25, J2=-0.5)
    assert p.theta is None
    assert ModelParams(L=6, two_s=3).spin == 1.5


def test_field_profile_frozen():
    p = ModelParams(L=2, two_s=1, h0=1.0, gamma=1.0)
    assert field_profile(p).tolist() == [1.25, 3.0]
    p = ModelParams(L=4, two_s=1, h0=2.0, gamma=0.0)
    assert field_profile(p).tolist() == [2.0, 4.0, 6.0, 8.0]


def test_two_site_hamiltonian_frozen():
    basis = enumerate_sector(2, 1, 0)
    H = build_hamiltonian(ModelParams(L=2, two_s=1, theta=0.0), basis)
    assert np.array_equal(H.todense(), np.array([[-0.25, 0.5], [0.5, -0.25]]))
    vals, _ = full_spectrum(H)
    assert vals == pytest.approx([-0.75, 0.25], abs=1e-15)


def test_matches_kron_oracle():
    # full-space comparison against the independent Kronecker construction
    rng = np.random.default_rng(11)
    for L, two_s in ((4, 1), (3, 2), (3, 3)):
        theta = rng.uniform(0, 2 * math.pi)
        h0, gamma, D = rng.uniform(-1.5, 1.5, size=3)
        p = ModelParams(L=L, two_s=two_s, theta=theta, h0=h0, gamma=gamma, D=D)
        basis = enumerate_sector(L, two_s, None)
        H = build_hamiltonian(p, basis).todense()
        Hk = kron_hamiltonian(L, two_s, p.J1, p.J2, field_profile(p), D)
        perm = np.array([kron_index(cfg, two_s) for cfg in basis.configs])
        assert np.max(np.abs(H - Hk[np.ix_(perm, perm)])) < 1e-13


def test_triplets_symmetric():
    basis = enumerate_sector(5, 2, 0)
    H = build_hamiltonian(ModelParams(L=5, two_s=2, theta=1.2, h0=0.4, D=0.7), basis)
    entries = {(r, c): v for r, c, v in H.triplets()}
    for (r, c), v in entries.items():
        assert entries[(c, r)] == v


def test_sz_block_diagonal():
    # in the full space H must not couple different total-Sz sectors
    basis = enumerate_sector(4, 1, None)
    H = build_hamiltonian(ModelParams(L=4, two_s=1, theta=0.9, h0=0.3), basis)
    sector = basis.configs.sum(axis=1)
    for r, c, v in H.triplets():
        if v != 0.0:
            assert sector[r] == sector[c]


def test_spin_half_anisotropy_shift_entrywise():
    basis = enumerate_sector(8, 1, 0)
    p0 = ModelParams(L=8, two_s=1, theta=0.8, h0=0.9, gamma=0.2, D=0.0)
    p1 = ModelParams(L=8, two_s=1, theta=0.8, h0=0.9, gamma=0.2, D=1.7)
    H0 = build_hamiltonian(p0, basis).todense()
    H1 = build_hamiltonian(p1, basis).todense()
    shift = 1.7 * 8 / 4
    assert np.max(np.abs(H1 - H0 - shift * np.eye(basis.size))) < 1e-12


def test_theta_periodicity_identical_triplets():
    basis = enumerate_sector(4, 1, 0)
    Ha = build_hamiltonian(ModelParams(L=4, two_s=1, theta=0.0), basis)
    Hb = build_hamiltonian(ModelParams(L=4, two_s=1, theta=2 * math.pi), basis)
    assert list(Ha.triplets()) == list(Hb.triplets())


def test_matvec_matches_dense():
    rng = np.random.default_rng(3)
    basis = enumerate_sector(6, 1, 0)
    H = build_hamiltonian(ModelParams(L=6, two_s=1, theta=0.5, h0=1.0), basis)
    v = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    assert np.allclose(H.matvec(v), H.todense() @ v, atol=1e-13)


def test_diagonal_spectrum_shortcut():
    # J0 = 0 keeps H diagonal; eigenvectors must be exact basis vectors
    basis = enumerate_sector(4, 3, 0)
    H = build_hamiltonian(ModelParams(L=4, two_s=3, J0=0.0, D=0.5, h0=0.1), basis)
    assert H.is_diagonal()
    vals, vecs = full_spectrum(H)
    assert np.all(np.diff(vals) >= 0)
    # each column holds exactly one unit entry
    assert np.array_equal(np.abs(vecs).sum(axis=0), np.ones(basis.size))
    d = H.diagonal()
    order = np.argsort(d, kind="stable")
    assert np.array_equal(vals, d[order])


def test_nnz_guard():
    basis = enumerate_sector(8, 3, 0)
    with pytest.raises(CapacityError):
        build_hamiltonian(ModelParams(L=8, two_s=3, theta=0.4), basis, max_nnz=100)


def test_full_spectrum_guard():
    basis = enumerate_sector(6, 1, 0)
    H = build_hamiltonian(ModelParams(L=6, two_s=1), basis)
    with pytest.raises(CapacityError):
        full_spectrum(H, max_dim=4)


def test_write_matrix_market(tmp_path):
    basis = enumerate_sector(2, 1, 0)
    H = build_hamiltonian(ModelParams(L=2, two_s=1, theta=0.0), basis)
    path = tmp_path / "op.mtx"
    write_matrix_market(H, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real general"
    assert lines[1].split() == ["2", "2", "4"]
    assert len(lines) == 2 + 4
    # one-based indices
    first = lines[2].split()
    assert first[0] == "1"
