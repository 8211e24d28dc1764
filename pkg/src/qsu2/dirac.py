"""Spinor space, coupled eigenbasis, Dirac operators and modular operator.

The spinor space is C^2 tensor h; a coefficient vector is stored as the
concatenation (e_+ block, e_- block) over the enumerated Peter-Weyl basis.
The coupled vectors v^{l,+-}_{ij} diagonalize both the naive operator
(q-integer eigenvalues) and the true one (linear eigenvalues +-(l+1/2));
|D| is diagonal already in the product basis with eigenvalue n + 1/2.
"""
from __future__ import annotations

import math
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .qarith import HalfInteger, QArithError, _cg_doubled, half, q_number
from .peterweyl import Basis, HilbertVector, SparseOperator, Truncation, rho_weights


class VIndex(NamedTuple):
    """Label (l, i, j, sign) of a coupled eigenvector."""

    l: HalfInteger
    i: HalfInteger
    j: HalfInteger
    sign: int  # +1 or -1


def validate_v_index(idx: VIndex) -> None:
    ld, id_, jd = idx.l.doubled, idx.i.doubled, idx.j.doubled
    if ld < 0 or abs(id_) > ld or (ld - id_) % 2:
        raise QArithError("i out of range in %s" % (idx,))
    # j ranges to +-(l+1/2) for sign +, +-(l-1/2) for sign -; forced by the
    # dimension count 2(2l+1)^2 per level.
    jmax = ld + idx.sign
    if idx.sign not in (1, -1) or jmax < 0 or abs(jd) > jmax or (jmax - jd) % 2:
        raise QArithError("j out of range in %s" % (idx,))


class SpinorBasis:
    """Product basis of C^2 tensor h: index = component * dim + pw position."""

    def __init__(self, basis: Basis):
        self.pw = basis
        self.trunc = basis.trunc
        self.dim = 2 * basis.dim

    def spins_doubled(self) -> np.ndarray:
        return np.concatenate([self.pw.nd, self.pw.nd])


class SpinorVector:
    """e_+ and e_- components over a Peter-Weyl basis."""

    def __init__(self, plus: HilbertVector, minus: HilbertVector):
        self.plus = plus
        self.minus = minus

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.plus.data, self.minus.data])

    @classmethod
    def from_array(cls, basis: Basis, arr: np.ndarray) -> "SpinorVector":
        n = basis.dim
        return cls(HilbertVector(basis, arr[:n]), HilbertVector(basis, arr[n:]))

    def norm(self) -> float:
        return math.hypot(self.plus.norm(), self.minus.norm())


def v_enumerate(trunc: Truncation) -> list:
    """All VIndex labels, ordered by ascending 2l, sign (+ first), i, j."""
    out = []
    for ld in range(trunc.lmax.doubled + 1):
        for sign in (1, -1):
            jmax = ld + sign
            if jmax < 0:
                continue
            for id_ in range(-ld, ld + 1, 2):
                for jd in range(-jmax, jmax + 1, 2):
                    out.append(VIndex(HalfInteger(ld), HalfInteger(id_),
                                      HalfInteger(jd), sign))
    return out


def _v_entries(ld: int, id_: int, jd: int, sign: int, q: float) -> list:
    """((component, (n, i, j) doubled), coefficient) pairs of v^{l,sign}_{ij}."""
    out = []
    c = _cg_doubled(1, sign, ld, jd - 1, q)
    if c != 0.0 and abs(jd - 1) <= ld:
        out.append(((0, (ld, id_, jd - 1)), c))
    c = _cg_doubled(-1, sign, ld, jd + 1, q)
    if c != 0.0 and abs(jd + 1) <= ld:
        out.append(((1, (ld, id_, jd + 1)), c))
    return out


class DiracContext:
    """Shared immutable operators of the spinor picture on one truncation."""

    def __init__(self, q: float, trunc: Truncation, basis: Basis | None = None):
        self.q = q
        self.trunc = trunc
        self.basis = basis if basis is not None else Basis(trunc)
        self.spinor = SpinorBasis(self.basis)

    def v_vector(self, idx: VIndex) -> SpinorVector:
        validate_v_index(idx)
        if idx.l.doubled > self.trunc.lmax.doubled:
            raise QArithError("spin %s exceeds truncation" % (idx.l,))
        plus = HilbertVector(self.basis)
        minus = HilbertVector(self.basis)
        for (comp, key), c in _v_entries(idx.l.doubled, idx.i.doubled,
                                         idx.j.doubled, idx.sign, self.q):
            target = plus if comp == 0 else minus
            target.data[self.basis.position_doubled(*key)] = c
        return SpinorVector(plus, minus)

    @cached_property
    def v_labels(self) -> list:
        return v_enumerate(self.trunc)

    @cached_property
    def change_of_basis(self) -> SparseOperator:
        """Columns are the coupled vectors, in v_enumerate order (orthogonal)."""
        rows, cols, vals = [], [], []
        n = self.basis.dim
        for col, idx in enumerate(self.v_labels):
            for (comp, key), c in _v_entries(idx.l.doubled, idx.i.doubled,
                                             idx.j.doubled, idx.sign, self.q):
                rows.append(comp * n + self.basis.position_doubled(*key))
                cols.append(col)
                vals.append(c)
        m = sp.csr_matrix((vals, (rows, cols)), shape=(self.spinor.dim, self.spinor.dim))
        return SparseOperator(m, 0, self.spinor)

    def eigenvalues(self, kind: str) -> np.ndarray:
        """Eigenvalue per v_enumerate label for the true or naive operator."""
        out = np.empty(len(self.v_labels))
        for k, idx in enumerate(self.v_labels):
            l = idx.l.doubled / 2.0
            if kind == "true":
                out[k] = (l + 0.5) * idx.sign
            elif kind == "naive":
                out[k] = q_number(l, self.q ** 2) if idx.sign > 0 \
                    else -q_number(l + 1, self.q ** 2)
            else:
                raise QArithError("kind must be 'true' or 'naive'")
        return out

    @cached_property
    def absd_diagonal(self) -> np.ndarray:
        return (self.spinor.spins_doubled() + 1) / 2.0

    @cached_property
    def r_diagonal(self) -> np.ndarray:
        w = rho_weights(self.basis, self.q)
        return np.concatenate([w, w])

    def dirac_operator(self, kind: str) -> SparseOperator:
        """D (kind='true'), Q (kind='naive') or |D| (kind='abs') as a sparse operator."""
        if kind == "abs":
            return SparseOperator(sp.diags(self.absd_diagonal), 0, self.spinor)
        v = self.change_of_basis
        d = sp.diags(self.eigenvalues(kind))
        return SparseOperator((v.mat @ d @ v.mat.T).tocsr(), 0, self.spinor)

    def R_operator(self) -> SparseOperator:
        return SparseOperator(sp.diags(self.r_diagonal), 0, self.spinor)

    def rho_operator(self) -> SparseOperator:
        return SparseOperator(sp.diags(rho_weights(self.basis, self.q)), 0, self.basis)

    def dirac_apply(self, kind: str, v: SpinorVector) -> SpinorVector:
        arr = self.dirac_operator(kind).mat @ v.to_array()
        return SpinorVector.from_array(self.basis, arr)

    def R_apply(self, v: SpinorVector) -> SpinorVector:
        return SpinorVector.from_array(self.basis, self.r_diagonal * v.to_array())

    def rho_apply(self, v: HilbertVector) -> HilbertVector:
        return HilbertVector(self.basis, rho_weights(self.basis, self.q) * v.data)

    def q_relation_check(self) -> float:
        """Max residual of [D - I/2]_{q^2} = Q over the coupled eigenbasis."""
        lhs = np.array([q_number(e - 0.5, self.q ** 2)
                        for e in self.eigenvalues("true")])
        return float(np.abs(lhs - self.eigenvalues("naive")).max())


def b_coefficient(l, i, j, m, eps: int, q: float) -> float:
    """Transition coefficient b^eps_m(i, j) of multiplication by ttilde^{1/2}_{1/2,1/2}.

    Computed from the four-CG sum formula; m must be l - 1/2 or l + 1/2,
    eps = +1 or -1 selects the sign of the target coupled family.
    """
    ld, id_, jd, md = half(l).doubled, half(i).doubled, half(j).doubled, half(m).doubled
    if md not in (ld - 1, ld + 1):
        raise QArithError("m must be l +- 1/2")
    if eps not in (1, -1):
        raise QArithError("eps must be +1 or -1")
    branch = md - ld
    total = 0.0
    for m1 in (1, -1):
        total += (_cg_doubled(m1, 1, ld, jd - m1, q)
                  * _cg_doubled(1, branch, ld, id_, q)
                  * _cg_doubled(1, branch, ld, jd - m1, q)
                  * _cg_doubled(m1, eps, md, jd + 1 - m1, q))
    nu = math.sqrt(q_number(2, q) * q_number(ld + 1, q) / q_number(md + 1, q))
    return total * nu


def b_minus_closed(l, i, j, q: float) -> float:
    """Closed form of b^-_{l+1/2}(i, j)."""
    ld, id_, jd = half(l).doubled, half(i).doubled, half(j).doubled
    lf, jf = ld / 2.0, jd / 2.0
    pref = (q ** ((lf - 3 * jf - 0.5) / 2)
            * math.sqrt(q_number(lf - jf + 0.5, q))
            / (q_number(2 * lf + 1, q) * math.sqrt(q_number(2 * lf + 2, q))))
    mid = q_number(lf + jf + 0.5, q) - q_number(lf + jf + 1.5, q)
    cg = _cg_doubled(1, 1, ld, id_, q)
    tail = math.sqrt(q_number(2, q) * q_number(2 * lf + 1, q) / q_number(2 * lf + 2, q))
    return pref * mid * cg * tail
