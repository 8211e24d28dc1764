import math

import pytest
from hypothesis import given, strategies as st

from qsu2.qarith import (DeformationParameter, HalfInteger, QArithError, cg_half,
                         half, q_number)


def brute_q_number(r, q):
    # independent oracle: direct evaluation of the defining quotient
    return (q ** r - q ** (-r)) / (q - q ** -1)


class TestHalfInteger:
    def test_integral(self):
        assert HalfInteger(4).is_integral
        assert not HalfInteger(3).is_integral

    @given(st.integers(-1000, 1000), st.integers(-1000, 1000))
    def test_ring_ops_exact(self, a, b):
        x, y = HalfInteger(a), HalfInteger(b)
        assert (x + y).doubled == a + b
        assert (x - y).doubled == a - b
        assert (-x).doubled == -a
        assert float(x) == a / 2

    def test_half_coercion(self):
        assert half(3) == HalfInteger(6)
        assert half(0.5) == HalfInteger(1)
        assert half(HalfInteger(7)) == HalfInteger(7)
        with pytest.raises(QArithError):
            half(0.3)

    def test_ordering(self):
        assert HalfInteger(1) < HalfInteger(2)
        assert str(HalfInteger(3)) == "3/2"
        assert str(HalfInteger(4)) == "2"


class TestDeformationParameter:
    def test_rejects_bad_q(self):
        with pytest.raises(QArithError):
            DeformationParameter(1.0)
        with pytest.raises(QArithError):
            DeformationParameter(-2.0)

    def test_warns_below_one(self):
        with pytest.warns(UserWarning):
            DeformationParameter(0.5)

    def test_accepts(self):
        assert DeformationParameter(1.2).precision_bits == 53


class TestQNumber:
    def test_zero_and_one(self):
        for q in (1.2, 2.0, 7.5):
            assert q_number(0, q) == 0.0
            assert q_number(1, q) == pytest.approx(1.0, abs=1e-15)

    def test_direct_value(self):
        assert q_number(2, 2) == pytest.approx(2.5, abs=1e-15)

    def test_accepts_halfinteger(self):
        assert q_number(HalfInteger(3), 2) == pytest.approx(brute_q_number(1.5, 2))

    def test_invalid_base(self):
        with pytest.raises(QArithError):
            q_number(2, 1.0)
        with pytest.raises(QArithError):
            q_number(2, -1.0)

    @given(st.floats(-20, 20), st.floats(1.05, 4.0))
    def test_antisymmetry(self, r, q):
        assert q_number(-r, q) == pytest.approx(-q_number(r, q), abs=1e-9, rel=1e-9)

    @given(st.floats(-20, 20), st.floats(1.05, 4.0))
    def test_base_inversion(self, r, q):
        assert q_number(r, q) == pytest.approx(q_number(r, 1.0 / q), rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("q", [1.2, 2.0])
    def test_geometric_sum_identity(self, q):
        # sum over j = -n..n of q^{-2j} equals [2n+1]_q, half-integer grid n <= 20
        for nd in range(0, 41):
            s = sum(q ** (-jd) for jd in range(-nd, nd + 1, 2))
            assert s == pytest.approx(q_number(nd + 1, q), rel=1e-12)


class TestCgHalf:
    def test_highest_weight_is_one(self):
        for q in (1.2, 2.0):
            for ld in range(0, 9):
                l = HalfInteger(ld)
                assert cg_half(half(0.5), "+", l, l, q) == pytest.approx(1.0, abs=1e-14)

    def test_frozen_value(self):
        # q^{-(l+m)/2} sqrt([l-m+1]_q / [2l+1]_q) at l = m = 1/2, q = 2
        expect = 2 ** -0.5 * math.sqrt(q_number(1, 2) / q_number(2, 2))
        assert expect == pytest.approx(0.4472135954999579, abs=1e-12)
        assert cg_half(half(-0.5), "+", half(0.5), half(0.5), 2) == pytest.approx(expect)

    def test_out_of_range_is_zero(self):
        assert cg_half(half(0.5), "+", half(1), half(2), 1.5) == 0.0
        assert cg_half(half(0.5), "-", half(0), half(0), 1.5) == 0.0

    def test_bad_m1(self):
        with pytest.raises(QArithError):
            cg_half(half(1), "+", half(1), half(0), 1.5)

    @pytest.mark.parametrize("q", [1.2, 2.0])
    def test_column_normalization(self, q):
        # brute-force check of q^{l-j+1/2}[l+j+1/2] + q^{-(l+j+1/2)}[l-j+1/2] = [2l+1]
        # through the squared coefficients, over l <= 20 on the half-integer grid
        for ld in range(0, 41):
            for branch in (1, -1):
                jmax = ld + branch
                for jd in range(-jmax, jmax + 1, 2):
                    up = cg_half(half(0.5), branch, HalfInteger(ld), HalfInteger(jd - 1), q)
                    dn = cg_half(half(-0.5), branch, HalfInteger(ld), HalfInteger(jd + 1), q)
                    assert up * up + dn * dn == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("q", [1.2, 2.0])
    def test_branch_orthogonality(self, q):
        for ld in range(1, 41):
            for jd in range(-(ld - 1), ld, 2):
                dot = sum(cg_half(half(m1 / 2), 1, HalfInteger(ld), HalfInteger(jd - m1), q)
                          * cg_half(half(m1 / 2), -1, HalfInteger(ld), HalfInteger(jd - m1), q)
                          for m1 in (1, -1))
                assert dot == pytest.approx(0.0, abs=1e-12)
