"""Finite formal sums ``sum_k c_k n**alpha_k`` with real exponents.

Coefficients keep whatever numeric type they are built from: ints and
Fractions stay exact under every operation here, floats stay floats.
Exponents are normalized to Fractions whenever the value is a rational
with a small denominator, so ``n**0.5`` and ``n**Fraction(1, 2)`` are the
same term.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number, Rational
from typing import Iterable, Iterator

import numpy as np

_MAX_DENOMINATOR = 10**6


def normalize_exponent(alpha) -> Fraction | float:
    if isinstance(alpha, Rational):
        return Fraction(alpha)
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError(f"exponent must be finite, got {alpha}")
    frac = Fraction(alpha).limit_denominator(_MAX_DENOMINATOR)
    return frac if float(frac) == alpha else alpha


def _is_integer(alpha) -> bool:
    return isinstance(alpha, Fraction) and alpha.denominator == 1


def _fmt_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(x) if isinstance(x, float) else str(x)


class PowerSum:
    """Immutable sum of power terms in the lattice site ``n``.

    >>> w = PowerSum.constant(1) - PowerSum.monomial(1, -1)
    >>> w * w
    PowerSum(1 - 2*n^-1 + n^-2)
    >>> w.difference()
    PowerSum(n^-2)
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[Number, Number]] = ()):
        acc: dict = {}
        for coef, alpha in terms:
            alpha = normalize_exponent(alpha)
            acc[alpha] = acc.get(alpha, 0) + coef
        self._terms = tuple(
            sorted(((c, a) for a, c in acc.items() if c != 0), key=lambda t: t[1], reverse=True)
        )

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, c) -> PowerSum:
        return cls([(c, 0)])

    @classmethod
    def monomial(cls, c, alpha) -> PowerSum:
        return cls([(c, alpha)])

    @classmethod
    def zero(cls) -> PowerSum:
        return cls()

    @classmethod
    def _coerce(cls, other) -> PowerSum:
        if isinstance(other, PowerSum):
            return other
        if isinstance(other, Number):
            return cls.constant(other)
        return NotImplemented

    # inspection -------------------------------------------------------
    @property
    def terms(self) -> tuple[tuple[Number, Fraction | float], ...]:
        """(coefficient, exponent) pairs, exponents strictly descending."""
        return self._terms

    @property
    def exponents(self) -> tuple:
        return tuple(a for _, a in self._terms)

    def coefficient(self, alpha) -> Number:
        alpha = normalize_exponent(alpha)
        for c, a in self._terms:
            if a == alpha:
                return c
        return 0

    def __iter__(self) -> Iterator[tuple[Number, Fraction | float]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(a == 0 for _, a in self._terms)

    @property
    def constant_term(self) -> Number:
        return self.coefficient(0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c, _ in self._terms), default=0)

    def chop(self, rel_tol: float) -> PowerSum:
        """Drop terms whose coefficient is below ``rel_tol`` times the largest one."""
        cut = rel_tol * self.max_abs_coefficient()
        return PowerSum((c, a) for c, a in self._terms if abs(c) > cut)

    def without(self, alpha) -> PowerSum:
        alpha = normalize_exponent(alpha)
        return PowerSum((c, a) for c, a in self._terms if a != alpha)

    def truncate_below(self, alpha) -> PowerSum:
        """Keep only the terms with exponent strictly below ``alpha``."""
        return PowerSum((c, a) for c, a in self._terms if a < alpha)

    # algebra ----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PowerSum(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return PowerSum((-c, a) for c, a in self._terms)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return PowerSum((c * other, a) for c, a in self._terms)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return PowerSum(
            (c1 * c2, a1 + a2) for c1, a1 in self._terms for c2, a2 in other._terms
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        if isinstance(other, Rational):
            other = Fraction(other)
        return PowerSum((c / other, a) for c, a in self._terms)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("PowerSum powers must be non-negative integers")
        out = PowerSum.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def difference(self) -> PowerSum:
        """Symbolic first lattice difference: ``c n**a -> c a n**(a-1)``."""
        return PowerSum((c * a, a - 1) for c, a in self._terms if a != 0)

    def map_coefficients(self, fn) -> PowerSum:
        return PowerSum((fn(c), a) for c, a in self._terms)

    # evaluation -------------------------------------------------------
    def singular_sites(self, sites) -> np.ndarray:
        """Boolean mask of sites where some term is undefined (pole or branch cut)."""
        sites = np.asarray(sites)
        bad = np.zeros(sites.shape, dtype=bool)
        for _, a in self._terms:
            if a < 0:
                bad |= sites == 0
            if not _is_integer(a):
                bad |= sites < 0
        return bad

    def __call__(self, n):
        n_arr = np.asarray(n, dtype=float)
        out = np.zeros(n_arr.shape, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            for c, a in self._terms:
                out = out + float(c) * np.power(n_arr, float(a))
        return out if out.ndim else float(out)

    # protocol ---------------------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        return f"PowerSum({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for i, (c, a) in enumerate(self._terms):
            neg = c < 0
            mag = -c if neg else c
            if a == 0:
                body = _fmt_number(mag)
            else:
                power = "n" if a == 1 else f"n^{_fmt_number(a)}"
                body = power if mag == 1 else f"{_fmt_number(mag)}*{power}"
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"{'-' if neg else '+'} {body}")
        return " ".join(parts)


N = PowerSum.monomial(1, 1)
