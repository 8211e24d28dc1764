"""The polynomial *-algebra of SU_q(2) and its GNS action on the truncated basis.

Generators are written with single letters throughout this module:

    a = alpha,  A = alpha*,  g = gamma,  G = gamma*

A word is a string of letters, read left to right as an operator product
(so the rightmost letter acts first on a vector).  Normal form puts the
alpha-letters first, then gammas, then gamma-stars, and eliminates mixed
alpha/alpha* words through the defining relations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .qarith import QArithError, _cg_doubled, q_number
from .peterweyl import Basis, SparseOperator, Truncation

LETTERS = "aAgG"
_ADJOINT = {"a": "A", "A": "a", "g": "G", "G": "g"}


class AlgebraError(ValueError):
    """Malformed polynomial or empty safe shell."""


class ValidationError(RuntimeError):
    """The generator operators failed the defining-relation battery."""

    def __init__(self, identity: str, residual: float):
        super().__init__("relation %r violated with residual %.3e" % (identity, residual))
        self.identity = identity
        self.residual = residual


def adjoint_word(word: str) -> str:
    return "".join(_ADJOINT[c] for c in reversed(word))


class NCPolynomial:
    """A finite complex combination of words in the four generators."""

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        if terms:
            for w, c in terms.items():
                if any(ch not in LETTERS for ch in w):
                    raise AlgebraError("bad letter in word %r" % w)
                if c != 0:
                    self.terms[w] = self.terms.get(w, 0) + complex(c)
        self.terms = {w: c for w, c in self.terms.items() if c != 0}

    @classmethod
    def word(cls, w: str, coeff=1.0) -> "NCPolynomial":
        return cls({w: coeff})

    @classmethod
    def one(cls) -> "NCPolynomial":
        return cls({"": 1.0})

    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NCPolynomial(out)

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        return self + (-1) * other

    def __mul__(self, other) -> "NCPolynomial":
        if isinstance(other, NCPolynomial):
            out = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    w = w1 + w2
                    out[w] = out.get(w, 0) + c1 * c2
            return NCPolynomial(out)
        return NCPolynomial({w: c * other for w, c in self.terms.items()})

    __rmul__ = __mul__

    def adjoint(self) -> "NCPolynomial":
        return NCPolynomial({adjoint_word(w): c.conjugate() for w, c in self.terms.items()})

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, NCPolynomial) and self.terms == other.terms

    def __repr__(self) -> str:
        return "NCPolynomial(%r)" % (self.terms,)


# Rewriting rules toward normal form.  Each reducible 2-letter factor maps
# to a list of (coefficient-as-function-of-q, replacement word).
_RULES = {
    "Aa": lambda q: [(1.0, ""), (-1.0, "gG")],
    "aA": lambda q: [(1.0, ""), (-q * q, "gG")],
    "ga": lambda q: [(1.0 / q, "ag")],
    "Ga": lambda q: [(1.0 / q, "aG")],
    "gA": lambda q: [(q, "Ag")],
    "GA": lambda q: [(q, "AG")],
    "Gg": lambda q: [(1.0, "gG")],
}


def _reducible_positions(word: str) -> list:
    return [k for k in range(len(word) - 1) if word[k:k + 2] in _RULES]


def is_normal_word(word: str) -> bool:
    return not _reducible_positions(word)


def normal_order(p: NCPolynomial, q: float, rng: np.random.Generator | None = None) -> NCPolynomial:
    """Rewrite p to its unique normal form using the defining relations.

    rng, if given, randomizes which reducible pair is rewritten first; the
    result must not depend on it (confluence is covered by tests).
    """
    result = {}
    stack = list(p.terms.items())
    while stack:
        word, coeff = stack.pop()
        pos = _reducible_positions(word)
        if not pos:
            result[word] = result.get(word, 0) + coeff
            continue
        k = pos[0] if rng is None else pos[rng.integers(len(pos))]
        for factor, repl in _RULES[word[k:k + 2]](q):
            stack.append((word[:k] + repl + word[k + 2:], coeff * factor))
    return NCPolynomial(result)


def _gen_matrix(rd: int, sd: int, basis: Basis, q: float) -> sp.csr_matrix:
    """Left multiplication by the normalized spin-1/2 element with weight shift (rd/2, sd/2)."""
    Ld = basis.trunc.lmax.doubled
    rows, cols, vals = [], [], []
    q2 = q_number(2, q)
    for k in range(basis.dim):
        ld = int(basis.nd[k])
        id_, jd = int(basis.id[k]), int(basis.jd[k])
        for branch in (1, -1):
            md = ld + branch
            if md < 0 or md > Ld or abs(id_ + rd) > md or abs(jd + sd) > md:
                continue
            c1 = _cg_doubled(rd, branch, ld, id_, q)
            c2 = _cg_doubled(sd, branch, ld, jd, q)
            if c1 == 0.0 or c2 == 0.0:
                continue
            nu = math.sqrt(q2 * q_number(ld + 1, q) / q_number(md + 1, q))
            rows.append(basis.position_doubled(md, id_ + rd, jd + sd))
            cols.append(k)
            vals.append(c1 * c2 * nu)
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


class GeneratorTable:
    """The four generator operators on a truncation, with fitted scalars.

    The proportionality constants tying alpha and gamma to the normalized
    spin-1/2 basis elements are solved from two scalar consequences of the
    defining relations at the cyclic vector (both scalars taken positive);
    the starred generators are the matrix adjoints.  The fitted
    identification, stable across q, comes out as

        alpha  = q (1+q^2)^{-1/2} * ttilde^{1/2}_{+1/2,+1/2}
        gamma  =   (1+q^2)^{-1/2} * ttilde^{1/2}_{-1/2,+1/2}

    which differs from the textbook corepresentation matrix only by the
    sign automorphism gamma -> -gamma.  The full relation battery is run on
    construction; a failure raises ValidationError.
    """

    RELATION_TOL = 1e-10

    def __init__(self, q: float, trunc: Truncation, validate: bool = True):
        if trunc.lmax.doubled < 2:
            raise AlgebraError("need lmax >= 1 to fit generator scalars")
        self.q = q
        self.trunc = trunc
        self.basis = Basis(trunc)
        self._t = {}
        for rd in (1, -1):
            for sd in (1, -1):
                self._t[(rd, sd)] = _gen_matrix(rd, sd, self.basis, q)

        # Scalar fit: with ca, cg > 0 and stars as adjoints, the relations
        # evaluated at the cyclic vector e0 give
        #   ca^2 * |T++ e0|^2     + cg^2 * |T-+ e0|^2      = 1
        #   ca^2 * |T++^H e0|^2   + q^2 cg^2 * |T-+ e0|^2  = 1
        e0 = np.zeros(self.basis.dim)
        e0[0] = 1.0
        tpp, tmp = self._t[(1, 1)], self._t[(-1, 1)]
        m = np.array([
            [np.linalg.norm(tpp @ e0) ** 2, np.linalg.norm(tmp @ e0) ** 2],
            [np.linalg.norm(tpp.conj().T @ e0) ** 2,
             q * q * np.linalg.norm(tmp @ e0) ** 2],
        ])
        sq = np.linalg.solve(m, np.ones(2))
        if (sq <= 0).any():
            raise ValidationError("scalar-fit", float(abs(sq).min()))
        self.alpha_scalar = float(np.sqrt(sq[0]))
        self.gamma_scalar = float(np.sqrt(sq[1]))

        depth = 1  # every generator shifts spin by 1/2
        alpha = SparseOperator(self.alpha_scalar * tpp, depth, self.basis)
        gamma = SparseOperator(self.gamma_scalar * tmp, depth, self.basis)
        self.ops = {"a": alpha, "A": alpha.H, "g": gamma, "G": gamma.H}
        if validate:
            self.validate()

    def t_half(self, rd: int, sd: int) -> SparseOperator:
        """Left multiplication by ttilde^{1/2}_{rd/2, sd/2}."""
        return SparseOperator(self._t[(rd, sd)], 1, self.basis)

    def generator_operator(self, sym: str) -> SparseOperator:
        return self.ops[sym]

    def _relation_residuals(self) -> dict:
        q = self.q
        a, A = self.ops["a"].mat, self.ops["A"].mat
        g, G = self.ops["g"].mat, self.ops["G"].mat
        eye = sp.identity(self.basis.dim, format="csr")
        rel = {
            "A a + G g = 1": A @ a + G @ g - eye,
            "a A + q^2 G g = 1": a @ A + q * q * G @ g - eye,
            "G g = g G": G @ g - g @ G,
            "a g = q g a": a @ g - q * g @ a,
            "a G = q G a": a @ G - q * G @ a,
        }
        # word length 2 -> depth 1: exact on spins <= lmax - 1
        safe = self.basis.nd <= self.trunc.lmax.doubled - 2
        proj = sp.diags(safe.astype(float))
        return {name: float(abs((m @ proj)).max()) if m.nnz else 0.0
                for name, m in rel.items()}

    def validate(self) -> None:
        residuals = self._relation_residuals()
        worst = max(residuals, key=residuals.get)
        if residuals[worst] > self.RELATION_TOL:
            raise ValidationError(worst, residuals[worst])


def mult_operator(p: NCPolynomial, table: GeneratorTable) -> SparseOperator:
    """The left-multiplication operator of p on the truncated GNS space."""
    Ld = table.trunc.lmax.doubled
    deg = p.degree()
    if deg > Ld:
        raise AlgebraError("word length %d leaves no safe shell at lmax = %s"
                           % (deg, table.trunc.lmax))
    out = sp.csr_matrix((table.basis.dim, table.basis.dim))
    for word, coeff in p.terms.items():
        m = sp.identity(table.basis.dim, format="csr")
        for ch in word:
            m = m @ table.ops[ch].mat
        out = out + coeff * m
    return SparseOperator(out, deg, table.basis)


def apply_word(word: str, vec: np.ndarray, table: GeneratorTable) -> np.ndarray:
    """Apply a generator word to a coefficient vector (rightmost letter first)."""
    for ch in reversed(word):
        vec = table.ops[ch].mat @ vec
    return vec


def haar_state(p: NCPolynomial, table: GeneratorTable) -> complex:
    """psi(p) via the GNS matrix element at the cyclic vector.

    Truncation-exact whenever the word length fits inside the truncation.
    """
    Ld = table.trunc.lmax.doubled
    if p.degree() > Ld:
        raise AlgebraError("degree %d exceeds lmax; no exact value available" % p.degree())
    e0 = np.zeros(table.basis.dim, dtype=complex)
    e0[0] = 1.0
    total = 0.0 + 0.0j
    for word, coeff in p.terms.items():
        total += coeff * apply_word(word, e0, table)[0]
    return total
