"""Independent Haar-state oracle through the standard ladder representation.

The generators act on ladder states (k, winding) by

    alpha:  k -> k+1 with amplitude sqrt(1 - q^{-2(k+1)})
    gamma:  diagonal, q^{-(k+1)} times the circle variable u

The circle average is taken symbolically: only winding-0 contributions
survive.  The state weight (1 - q^{-2}) q^{-2k} is the unique geometric
weight normalizing the constant; it earns trust through the agreement
battery against the Peter-Weyl route in the tests.
"""
from __future__ import annotations

import math

from .algebra import NCPolynomial


class LevelOverflowError(RuntimeError):
    """A word climbed past the ladder truncation; retry with larger K."""


def rep_apply(word: str, k: int, q: float, kmax: int | None = None):
    """Apply a generator word (rightmost letter first) to ladder level k.

    Returns (amplitude, k', winding).  An annihilated state comes back with
    amplitude exactly 0.0.
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    amp = 1.0
    level = k
    winding = 0
    for ch in reversed(word):
        if ch == "a":
            amp *= math.sqrt(1.0 - q ** (-2 * (level + 1)))
            level += 1
            if kmax is not None and level > kmax:
                raise LevelOverflowError("word reached level %d > K = %d" % (level, kmax))
        elif ch == "A":
            if level == 0:
                return 0.0, k, winding
            amp *= math.sqrt(1.0 - q ** (-2 * level))
            level -= 1
        elif ch == "g":
            amp *= q ** (-(level + 1))
            winding += 1
        elif ch == "G":
            amp *= q ** (-(level + 1))
            winding -= 1
        else:
            raise ValueError("unknown letter %r" % ch)
        if amp == 0.0:
            return 0.0, k, winding
    return amp, level, winding


def oracle_haar(p: NCPolynomial, K: int, q: float) -> complex:
    """psi(p) as a weighted diagonal sum over ladder levels 0..K.

    Converges geometrically in K; the truncation error of the constant
    term is q^{-2(K+1)}.
    """
    total = 0.0 + 0.0j
    for word, coeff in p.terms.items():
        acc = 0.0
        for k in range(K + 1):
            amp, level, winding = rep_apply(word, k, q, kmax=None)
            if amp != 0.0 and level == k and winding == 0:
                acc += q ** (-2 * k) * amp
        total += coeff * (1.0 - q ** -2) * acc
    return total
