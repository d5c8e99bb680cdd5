import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fockbench.tensor_core import (
    TruncatedFockSpace,
    GradedVector,
    decode_index,
    encode_index,
    inversions,
    left_annihilator,
    left_creator,
    permutation_operator,
)


def random_graded(space, rng):
    return GradedVector(
        space,
        [
            rng.standard_normal(space.dim(n)) + 1j * rng.standard_normal(space.dim(n))
            for n in space.levels()
        ],
    )


# ---------------------------------------------------------------- encoding


def test_encode_vacuum_is_zero():
    assert encode_index((), 2) == 0


def test_encode_big_endian():
    assert encode_index((1, 0), 2) == 2


def test_encode_bijection_exhaustive():
    flats = sorted(encode_index(t, 3) for t in itertools.product(range(3), repeat=3))
    assert flats == list(range(27))
    for t in itertools.product(range(3), repeat=3):
        assert decode_index(encode_index(t, 3), 3, 3) == t


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode_index((0, 2), 2)


def test_space_guards():
    with pytest.raises(ValueError):
        TruncatedFockSpace(d=2, N=0)
    with pytest.raises(ValueError):
        TruncatedFockSpace(d=10, N=6)  # 10**6 over the default cap
    sp = TruncatedFockSpace(d=2, N=3)
    assert sp.dims == (1, 2, 4, 8)


# ---------------------------------------------------------------- creators


def test_creator_on_vacuum():
    sp = TruncatedFockSpace(d=2, N=2)
    x = np.array([1.0, 0.0])
    out = left_creator(x, sp).apply(GradedVector.vacuum(sp))
    assert_allclose(out.levels[1], x.astype(complex), atol=1e-15)
    assert_allclose(out.levels[0], 0, atol=1e-15)


def test_creator_prepends_factor():
    sp = TruncatedFockSpace(d=2, N=2)
    vec = GradedVector(sp)
    vec.levels[1][0] = 1.0  # e0 at level 1
    out = left_creator(np.array([0.0, 1.0]), sp).apply(vec)
    expect = np.zeros(4, dtype=complex)
    expect[encode_index((1, 0), 2)] = 1.0
    assert_allclose(out.levels[2], expect, atol=1e-15)


def test_free_relation_annihilator_creator():
    # l(x) l*(y) = <x,y> id on every level of the full Fock space
    sp = TruncatedFockSpace(d=3, N=3)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        cre = left_creator(y, sp)
        ann = left_annihilator(x, sp)
        for n in range(sp.N):
            prod = ann.matrix(n + 1) @ cre.matrix(n)
            assert_allclose(prod, np.vdot(x, y) * np.eye(sp.dim(n)), atol=1e-12)


def test_creator_linear_in_x():
    sp = TruncatedFockSpace(d=2, N=3)
    rng = np.random.default_rng(11)
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    a, b = 1.3 - 0.2j, -0.7 + 2.1j
    lhs = left_creator(a * x + b * y, sp)
    for n in range(sp.N):
        rhs = a * left_creator(x, sp).matrix(n) + b * left_creator(y, sp).matrix(n)
        assert_allclose(lhs.matrix(n), rhs, atol=0)


def test_creator_dimension_mismatch():
    sp = TruncatedFockSpace(d=2, N=2)
    with pytest.raises(ValueError):
        left_creator(np.ones(3), sp)


def test_annihilator_kills_vacuum():
    sp = TruncatedFockSpace(d=2, N=2)
    out = left_annihilator(np.array([1.0, 1.0]), sp).apply(GradedVector.vacuum(sp))
    assert out.norm() == 0.0


def test_annihilator_strips_left_factor():
    sp = TruncatedFockSpace(d=2, N=2)
    vec = GradedVector(sp)
    vec.levels[2][encode_index((0, 1), 2)] = 1.0  # e0 (x) e1
    out = left_annihilator(np.array([1.0, 0.0]), sp).apply(vec)
    assert_allclose(out.levels[1], np.array([0.0, 1.0]), atol=1e-15)


def test_creator_annihilator_adjoint_pairing():
    sp = TruncatedFockSpace(d=2, N=4)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    cre, ann = left_creator(x, sp), left_annihilator(x, sp)
    for _ in range(10):
        z, y = random_graded(sp, rng), random_graded(sp, rng)
        lhs = y.inner(ann.apply(z))
        rhs = cre.apply(y).inner(z)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


# ------------------------------------------------------------ permutations


def bubble_swap_count(seq):
    seq, count, changed = list(seq), 0, True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] > seq[i + 1]:
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
                count += 1
                changed = True
    return count


def test_permutation_identity():
    sp = TruncatedFockSpace(d=2, N=3)
    P, inv = permutation_operator((0, 1, 2), sp)
    assert_allclose(P, np.eye(8), atol=0)
    assert inv == 0


def test_permutation_flip():
    sp = TruncatedFockSpace(d=2, N=2)
    P, inv = permutation_operator((1, 0), sp)
    assert inv == 1
    expect = np.eye(4)[:, [0, 2, 1, 3]]  # swaps (0,1) <-> (1,0)
    assert_allclose(P, expect, atol=0)


def test_permutation_group_action():
    # substitution action composes contravariantly: P(s) P(t) = P(t o s)
    sp = TruncatedFockSpace(d=2, N=4)
    rng = np.random.default_rng(5)
    for _ in range(10):
        s = tuple(rng.permutation(4))
        t = tuple(rng.permutation(4))
        t_after_s = tuple(t[s[j]] for j in range(4))
        Ps, _ = permutation_operator(s, sp)
        Pt, _ = permutation_operator(t, sp)
        Pc, _ = permutation_operator(t_after_s, sp)
        assert_allclose(Ps @ Pt, Pc, atol=0)


def test_permutation_unitary_and_inv_crosscheck():
    sp = TruncatedFockSpace(d=2, N=4)
    rng = np.random.default_rng(9)
    for _ in range(20):
        s = tuple(rng.permutation(4))
        P, inv = permutation_operator(s, sp)
        assert_allclose(P @ P.conj().T, np.eye(16), atol=0)
        assert inv == inversions(s) == bubble_swap_count(s)


def test_permutation_rejects_non_permutation():
    sp = TruncatedFockSpace(d=2, N=3)
    with pytest.raises(ValueError):
        permutation_operator((0, 0, 1), sp)
