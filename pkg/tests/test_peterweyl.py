import numpy as np
import pytest

from qsu2.qarith import HalfInteger, QArithError, half, q_number
from qsu2.peterweyl import (Basis, HilbertVector, PWIndex, SparseOperator, Truncation,
                            basis_enumerate, normalization_factor,
                            pw_inner_unnormalized, rho_weight, rho_weights)


def pw(n, i, j):
    return PWIndex(half(n), half(i), half(j))


class TestEnumeration:
    @pytest.mark.parametrize("lmax_d,dim", [(0, 1), (1, 5), (4, 55)])
    def test_dimension(self, lmax_d, dim):
        trunc = Truncation(HalfInteger(lmax_d))
        assert trunc.dimension == dim
        assert len(basis_enumerate(trunc)) == dim

    def test_order_and_stability(self):
        trunc = Truncation(HalfInteger(2))
        a = basis_enumerate(trunc)
        b = basis_enumerate(trunc)
        assert a == b
        assert a[0] == pw(0, 0, 0)
        doubled = [(i.n.doubled, i.i.doubled, i.j.doubled) for i in a]
        assert doubled == sorted(doubled)

    def test_position_lookup(self):
        basis = Basis(Truncation(HalfInteger(3)))
        for k, idx in enumerate(basis.indices):
            assert basis.position(idx) == k

    def test_negative_lmax_rejected(self):
        with pytest.raises(QArithError):
            Truncation(HalfInteger(-1))


class TestInnerProducts:
    def test_unit(self):
        assert pw_inner_unnormalized(pw(0, 0, 0), pw(0, 0, 0), 2.0) == pytest.approx(1.0)

    def test_spin_half_value(self):
        # q^{2i} / [2]_q at q = 2: 2 / 2.5
        v = pw_inner_unnormalized(pw(0.5, 0.5, 0.5), pw(0.5, 0.5, 0.5), 2.0)
        assert v == pytest.approx(0.8)

    def test_deltas(self):
        assert pw_inner_unnormalized(pw(0.5, 0.5, 0.5), pw(0.5, -0.5, 0.5), 2.0) == 0.0

    def test_right_variant(self):
        v = pw_inner_unnormalized(pw(0.5, 0.5, 0.5), pw(0.5, 0.5, 0.5), 2.0, side="right")
        assert v == pytest.approx(2 ** -1 / q_number(2, 2))

    def test_normalization_examples(self):
        assert normalization_factor(pw(0, 0, 0), 2.0) == pytest.approx(1.0)
        expect = np.sqrt(q_number(2, 2)) * 2 ** -0.5
        assert normalization_factor(pw(0.5, 0.5, 0.5), 2.0) == pytest.approx(expect)
        assert expect == pytest.approx(1.118033988749895, abs=1e-12)

    @pytest.mark.parametrize("q", [1.2, 2.0])
    def test_normalized_basis_has_unit_norm(self, q):
        basis = Basis(Truncation(HalfInteger(20)))
        for idx in basis.indices:
            g = normalization_factor(idx, q) ** 2 * pw_inner_unnormalized(idx, idx, q)
            assert g == pytest.approx(1.0, abs=1e-12)


class TestRhoWeights:
    def test_examples(self):
        assert rho_weight(pw(1, 1, -1), 1.7) == pytest.approx(1.0)
        for q in (1.2, 2.0):
            assert rho_weight(pw(0.5, 0.5, 0.5), q) == pytest.approx(q ** -2)

    @pytest.mark.parametrize("q", [1.2, 2.0])
    def test_shell_sum_is_qdim_squared(self, q):
        # sum over i,j of q^{-2i-2j} = [2n+1]_q^2 (product of two geometric sums)
        for nd in range(0, 21):
            s = sum(q ** float(-id_ - jd)
                    for id_ in range(-nd, nd + 1, 2)
                    for jd in range(-nd, nd + 1, 2))
            assert s == pytest.approx(q_number(nd + 1, q) ** 2, rel=1e-12)

    def test_vectorized_matches_scalar(self):
        basis = Basis(Truncation(HalfInteger(5)))
        w = rho_weights(basis, 1.3)
        for k, idx in enumerate(basis.indices):
            assert w[k] == pytest.approx(rho_weight(idx, 1.3))


class TestVectorsAndOperators:
    def test_hilbert_vector_norm(self):
        basis = Basis(Truncation(HalfInteger(1)))
        v = HilbertVector.from_components(basis, {pw(0, 0, 0): 3, pw(0.5, 0.5, 0.5): 4j})
        assert v.norm() == pytest.approx(5.0)

    def test_identity_and_depth_addition(self):
        basis = Basis(Truncation(HalfInteger(4)))
        eye = SparseOperator.identity(basis)
        assert eye.shell_depth_doubled == 0
        op = SparseOperator(eye.mat, 1, basis)
        assert (op @ op).shell_depth_doubled == 2
        assert (op @ op @ op).shell_depth_doubled == 3
        assert (op + op).shell_depth_doubled == 1
        assert op.H.shell_depth_doubled == 1

    def test_truncation_exactness_across_lmax(self):
        # a depth-1 operator applied to a vector inside the safe shell gives
        # identical coefficients when rebuilt on a larger truncation
        from qsu2.algebra import GeneratorTable
        q = 1.3
        small = GeneratorTable(q, Truncation(HalfInteger(6)))
        large = GeneratorTable(q, Truncation(HalfInteger(10)))
        vs = np.zeros(small.basis.dim)
        vs[small.basis.position_doubled(5, 3, -1)] = 1.0  # spin 5/2 <= 3 - 1/2
        vl = np.zeros(large.basis.dim)
        vl[large.basis.position_doubled(5, 3, -1)] = 1.0
        outs = small.ops["a"].mat @ vs
        outl = large.ops["a"].mat @ vl
        for k, idx in enumerate(small.basis.indices):
            assert outs[k] == pytest.approx(outl[large.basis.position(idx)], abs=1e-15)
