import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fockbench.tensor_core import TruncatedFockSpace, encode_index
from fockbench.deformations import (
    DeformationFamily,
    discrete_monotone,
    factor_K,
    identity_family,
    q_fock,
    q_fock_recursive,
    validate,
)


# ------------------------------------------------------------------ q-Fock


def test_q_zero_is_identity_family():
    sp = TruncatedFockSpace(d=2, N=4)
    fam = q_fock(sp, 0.0)
    for n in sp.levels():
        assert_allclose(fam.level(n), np.eye(sp.dim(n)), atol=0)


def test_q_fock_level2_block():
    # on span{e0 x e1, e1 x e0} the level-2 matrix is [[1,q],[q,1]]
    sp = TruncatedFockSpace(d=2, N=2)
    q = 0.37
    L2 = q_fock(sp, q).level(2)
    idx = [encode_index((0, 1), 2), encode_index((1, 0), 2)]
    block = L2[np.ix_(idx, idx)]
    assert_allclose(block, np.array([[1, q], [q, 1]]), atol=1e-14)
    assert_allclose(np.linalg.eigvalsh(block), [1 - q, 1 + q], atol=1e-14)


def test_symmetrizer_projection_at_q_one():
    sp = TruncatedFockSpace(d=2, N=3)
    P = q_fock(sp, 1.0).level(3) / math.factorial(3)
    assert_allclose(P @ P, P, atol=1e-12)
    assert round(np.trace(P).real) == math.comb(2 + 3 - 1, 3)  # dim of sym power


def test_antisymmetrizer_projection_at_q_minus_one():
    sp = TruncatedFockSpace(d=3, N=3)
    P = q_fock(sp, -1.0).level(3) / math.factorial(3)
    assert_allclose(P @ P, P, atol=1e-12)
    assert round(np.trace(P).real) == math.comb(3, 3)


@pytest.mark.parametrize("q", [-0.9, 0.3, 0.7])
@pytest.mark.parametrize("d", [2, 3])
def test_recursive_matches_naive(d, q):
    sp = TruncatedFockSpace(d=d, N=5 if d == 2 else 4)
    naive = q_fock(sp, q)
    fast = q_fock_recursive(sp, q)
    for n in sp.levels():
        assert np.max(np.abs(naive.level(n) - fast.level(n))) <= 1e-12


def test_recursive_q_one_level2():
    sp = TruncatedFockSpace(d=2, N=2)
    flip = np.eye(4)[:, [0, 2, 1, 3]]
    assert_allclose(q_fock_recursive(sp, 1.0).level(2), np.eye(4) + flip, atol=1e-14)


def test_q_out_of_range_rejected():
    sp = TruncatedFockSpace(d=2, N=2)
    with pytest.raises(ValueError):
        q_fock(sp, 1.5)


def test_naive_cap():
    with pytest.raises(ValueError):
        q_fock(TruncatedFockSpace(d=2, N=9), 0.5)


# ---------------------------------------------------------------- monotone


def test_monotone_level2():
    sp = TruncatedFockSpace(d=2, N=3)
    fam = discrete_monotone(sp)
    assert_allclose(np.diag(fam.level(2)), [0, 0, 1, 0], atol=0)  # only (1,0)
    assert_allclose(fam.level(1), np.eye(2), atol=0)
    assert_allclose(fam.level(3), np.zeros((8, 8)), atol=0)  # pigeonhole


@pytest.mark.parametrize("d,N", [(2, 3), (3, 4), (4, 4)])
def test_monotone_rank_is_binomial(d, N):
    fam = discrete_monotone(TruncatedFockSpace(d=d, N=N))
    for n in range(N + 1):
        assert int(np.trace(fam.level(n)).real) == (math.comb(d, n) if n <= d else 0)


def test_monotone_validates():
    rep = validate(discrete_monotone(TruncatedFockSpace(d=3, N=4)))
    assert rep.ok


# ---------------------------------------------------------------- validate


@pytest.mark.parametrize("q", [-0.9, -0.5, 0.0, 0.5, 0.9])
@pytest.mark.parametrize("d", [2, 3])
def test_qfock_psd_evidence(d, q):
    sp = TruncatedFockSpace(d=d, N=6 if d == 2 else 5)
    rep = validate(q_fock_recursive(sp, q))
    assert rep.psd_ok
    assert rep.kernel_ok
    for lo, hi in zip(rep.min_eigs, rep.max_eigs):
        assert lo >= -1e-10 * max(hi, 1.0)


def test_validate_flags_kernel_violation():
    sp = TruncatedFockSpace(d=2, N=3)
    L = [np.ones((1, 1)), np.eye(2), np.zeros((4, 4)), np.eye(8)]
    rep = validate(DeformationFamily(sp, tuple(L)))
    assert rep.psd_ok
    assert not rep.kernel_ok


def test_validate_rejects_non_hermitian():
    sp = TruncatedFockSpace(d=2, N=1)
    L1 = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        validate(DeformationFamily(sp, (np.ones((1, 1)), L1)))


def test_family_requires_unit_vacuum():
    sp = TruncatedFockSpace(d=2, N=1)
    with pytest.raises(ValueError):
        DeformationFamily(sp, (2.0 * np.ones((1, 1)), np.eye(2)))


# ---------------------------------------------------------------- factor_K


def test_factor_identity_family():
    sp = TruncatedFockSpace(d=2, N=3)
    fac = factor_K(identity_family(sp))
    for n in range(1, 4):
        assert_allclose(fac.level(n), np.eye(sp.dim(n)), atol=1e-12)


def test_factor_one_mode_scalars():
    # d = 1: L_n = [l_n] with l_n = k_n ... k_1 gives K_n = [k_n]
    sp = TruncatedFockSpace(d=1, N=4)
    k = [1.5, 0.8, 2.0, 0.3]
    ell = np.cumprod(k)
    fam = DeformationFamily(sp, tuple([np.ones((1, 1))] + [np.array([[e]]) for e in ell]))
    fac = factor_K(fam)
    for n in range(1, 5):
        assert_allclose(fac.level(n), [[k[n - 1]]], atol=1e-12)


@pytest.mark.parametrize("q", [-0.7, 0.4, 0.9])
def test_factor_reconstructs_qfock(q):
    sp = TruncatedFockSpace(d=2, N=4)
    fam = q_fock_recursive(sp, q)
    fac = factor_K(fam)
    assert max(fac.residuals) <= 1e-9
    rebuilt = fac.reconstruct()
    for n in sp.levels():
        assert_allclose(rebuilt[n], fam.level(n), atol=1e-9 * max(1.0, np.abs(fam.level(n)).max()))


def test_factor_detects_kernel_failure():
    sp = TruncatedFockSpace(d=2, N=3)
    L = [np.ones((1, 1)), np.eye(2), np.zeros((4, 4)), np.eye(8)]
    with pytest.raises(ValueError):
        factor_K(DeformationFamily(sp, tuple(L)))
