"""Unit conventions: lattice constant and the constants in the ladder prefactor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def _exact_sqrt(x: Rational) -> Fraction | None:
    x = Fraction(x)
    if x < 0:
        return None
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


@dataclass(frozen=True)
class Units:
    """Lattice constant ``a``, ``hbar`` and ``two_m`` (twice the mass).

    The defaults are natural units with unit lattice spacing.  The ladder
    operators act on the integer site label ``n``, so the derivative
    prefactor they carry is ``hbar / (sqrt(two_m) * a)``.
    """

    a: float = 1
    hbar: float = 1
    two_m: float = 1

    def __post_init__(self):
        for name in ("a", "hbar", "two_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def prefactor(self):
        """``hbar / (sqrt(2m) a)``; an exact Fraction when all inputs allow it."""
        if all(isinstance(v, Rational) for v in (self.a, self.hbar, self.two_m)):
            root = _exact_sqrt(self.two_m)
            if root is not None:
                p = Fraction(self.hbar) / (root * Fraction(self.a))
                return int(p) if p.denominator == 1 else p
        return self.hbar / (math.sqrt(self.two_m) * self.a)

    @property
    def kinetic(self):
        """Coefficient of ``-Delta^2`` in the Hamiltonian (prefactor squared)."""
        return self.prefactor**2


NATURAL = Units()
