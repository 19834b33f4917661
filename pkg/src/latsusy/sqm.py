"""Discretized N=2 supersymmetric quantum mechanics on the lattice.

A superpotential ``W[n]`` defines the ladder operators

    A  = +p Delta1 + W,     A^dagger = -p Delta1 + W,

with ``p = hbar / (sqrt(2m) a)``.  Using the semigroup property and the
Leibniz rule, ``A^dagger A = -p**2 Delta2 + v_minus`` and
``A A^dagger = -p**2 Delta2 + v_plus`` where ``v_minus/v_plus = W**2 -/+ p Delta1 W``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number, Rational

import numpy as np

from .errors import InvalidArgument, NoSeriesSolution, UnsupportedForm
from .ops import (
    DEFAULT_POLICY,
    SampledFunction,
    SummationPolicy,
    apply_difference_many,
    apply_difference_symbolic,
    difference_matrix,
)
from .powersum import PowerSum
from .units import NATURAL, Units

ANNIHILATION_THRESHOLD = 1e-6


@dataclass(frozen=True)
class Superpotential:
    w: PowerSum
    prefactor: Number = 1

    def __call__(self, n):
        return self.w(n)


def coulomb_superpotential(l, units: Units = NATURAL) -> Superpotential:
    """``W[n] = 1/(l+1) - (l+1) p / n``; at unit prefactor this is the radial Coulomb family."""
    p = units.prefactor
    if isinstance(l, Rational):
        l = Fraction(l)
        w0 = Fraction(1) / (l + 1)
    else:
        w0 = 1.0 / (l + 1)
    w = PowerSum([(w0, 0), (-(l + 1) * p, -1)])
    return Superpotential(w, p)


@dataclass(frozen=True)
class LadderOperator:
    """``sign * p * Delta1 + W``: ``sign=+1`` is ``A``, ``sign=-1`` is ``A^dagger``."""

    superpotential: Superpotential
    sign: int = 1

    @property
    def name(self) -> str:
        return "A" if self.sign > 0 else "A^dagger"

    def apply_symbolic(self, psi: PowerSum) -> PowerSum:
        W = self.superpotential
        return apply_difference_symbolic(1, psi) * (self.sign * W.prefactor) + W.w * psi

    def apply(
        self,
        psi: SampledFunction,
        window: tuple[int, int],
        policy: SummationPolicy = DEFAULT_POLICY,
    ) -> np.ndarray:
        """Numeric image on ``window``, with ``Delta1`` summed under ``policy``."""
        W = self.superpotential
        lo, hi = window
        sites = np.arange(lo, hi + 1)
        if np.any(W.w.singular_sites(sites)):
            raise InvalidArgument(f"superpotential is singular inside window {window}")
        d1 = apply_difference_many(1, psi, window, policy)
        return self.sign * float(W.prefactor) * d1 + W.w(sites) * psi(sites)

    def matrix(self, window: tuple[int, int], cutoff: int | None = None) -> np.ndarray:
        W = self.superpotential
        lo, hi = window
        sites = np.arange(lo, hi + 1)
        if np.any(W.w.singular_sites(sites)):
            raise InvalidArgument(f"superpotential is singular inside window {window}")
        return self.sign * float(W.prefactor) * difference_matrix(1, window, cutoff) + np.diag(
            W.w(sites)
        )


@dataclass(frozen=True)
class LadderPair:
    a_op: LadderOperator
    a_dagger_op: LadderOperator


def ladder_pair(W: Superpotential) -> LadderPair:
    return LadderPair(LadderOperator(W, +1), LadderOperator(W, -1))


@dataclass(frozen=True)
class PartnerPotentials:
    """``v_minus = W^2 - p Delta1 W`` (the ``A^dagger A`` sector) and ``v_plus = W^2 + p Delta1 W``."""

    v_minus: PowerSum
    v_plus: PowerSum

    # sign of the p*Delta1 W term in each potential
    signs = {"v_minus": -1, "v_plus": +1}

    @property
    def v1(self) -> PowerSum:
        return self.v_minus

    @property
    def v2(self) -> PowerSum:
        return self.v_plus


def build_partner_potentials(W: Superpotential) -> PartnerPotentials:
    square = W.w * W.w
    dw = apply_difference_symbolic(1, W.w) * W.prefactor
    return PartnerPotentials(square - dw, square + dw)


def factorization_residual(W: Superpotential, probe: PowerSum) -> PowerSum:
    """``A^dagger A psi - (-p^2 Delta2 psi + v_minus psi)`` for a symbolic ``psi``."""
    pair = ladder_pair(W)
    lhs = pair.a_dagger_op.apply_symbolic(pair.a_op.apply_symbolic(probe))
    v_minus = build_partner_potentials(W).v_minus
    rhs = apply_difference_symbolic(2, probe) * (-(W.prefactor**2)) + v_minus * probe
    return lhs - rhs


def partner_factorization_residual(W: Superpotential, probe: PowerSum) -> PowerSum:
    """Same as :func:`factorization_residual` for ``A A^dagger`` and ``v_plus``."""
    pair = ladder_pair(W)
    lhs = pair.a_op.apply_symbolic(pair.a_dagger_op.apply_symbolic(probe))
    v_plus = build_partner_potentials(W).v_plus
    rhs = apply_difference_symbolic(2, probe) * (-(W.prefactor**2)) + v_plus * probe
    return lhs - rhs


# ---------------------------------------------------------------------------
# ground state


@dataclass(frozen=True)
class ClosedForm:
    """``amplitude * n**power * exp(-rate * n)``."""

    amplitude: Number
    power: int
    rate: Number

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        return float(self.amplitude) * n**self.power * np.exp(-float(self.rate) * n)

    def __str__(self):
        power = "" if self.power == 0 else ("n" if self.power == 1 else f"n^{self.power}")
        rate = self.rate
        if rate == 0:
            decay = ""
        elif rate == 1:
            decay = "exp(-n)"
        else:
            decay = f"exp(-{rate}*n)"
        body = "*".join(x for x in (power, decay) if x) or "1"
        return body if self.amplitude == 1 else f"{self.amplitude}*{body}"


@dataclass(frozen=True)
class GroundStateSeries:
    coefficients: tuple
    normalization: Number
    pole_index: int
    forced_zero: tuple[int, ...]
    closed_form: ClosedForm | None = None
    superpotential: Superpotential | None = field(default=None, repr=False)

    def as_powersum(self) -> PowerSum:
        return PowerSum((c, j) for j, c in enumerate(self.coefficients))

    def evaluate(self, n):
        """Truncated series at integer or real ``n``; exact for rational inputs."""
        scalar = np.ndim(n) == 0
        sites = np.atleast_1d(n)
        out = []
        exact = all(isinstance(c, Rational) for c in self.coefficients)
        for x in sites:
            if exact and float(x).is_integer():
                x = int(x)
                acc = Fraction(0)
                for c in reversed(self.coefficients):
                    acc = acc * x + c
                out.append(float(acc))
            else:
                out.append(float(np.polyval([float(c) for c in reversed(self.coefficients)], x)))
        return out[0] if scalar else np.array(out)


def _two_term(W: Superpotential):
    extra = [a for a in W.w.exponents if a not in (0, -1)]
    w1 = W.w.coefficient(-1)
    if extra or w1 == 0:
        raise UnsupportedForm(
            f"series solver needs W = w0 + w1/n with w1 != 0, got W = {W.w}"
        )
    return W.w.coefficient(0), w1


def _is_zero(x, scale) -> bool:
    if isinstance(x, Rational):
        return x == 0
    return abs(x) <= 1e-12 * scale


def solve_ground_state_series(
    W: Superpotential, max_terms: int, normalization: Number = 1
) -> GroundStateSeries:
    """Zero mode ``A psi = 0`` as a power series ``psi = sum_j c_j n^j``.

    Substituting into ``W psi = -p Delta1 psi`` and matching powers gives
    ``w1 c_0 = 0`` from the ``n^-1`` term and

        c_{j+1} = -w0 c_j / (p (j+1) + w1).

    Coefficients below the first pole of this recurrence are forced to zero;
    the coefficient right after the pole is the free ``normalization``.
    """
    if max_terms < 2:
        raise InvalidArgument("max_terms must be >= 2")
    w0, w1 = _two_term(W)
    p = W.prefactor
    if isinstance(normalization, Rational):
        normalization = Fraction(normalization)
    scale = max(abs(float(p)), abs(float(w1)), 1.0)

    coeffs = [0 * normalization]  # c0 = 0 from the n^-1 balance
    forced = [0]
    pole = None
    for j in range(max_terms - 1):
        denom = p * (j + 1) + w1
        cj = coeffs[j]
        if _is_zero(denom, scale):
            if not _is_zero(cj, 1.0):
                raise NoSeriesSolution(
                    f"recurrence pole at j={j} with nonzero incoming coefficient {cj}"
                )
            if pole is None:
                pole = j + 1
                coeffs.append(normalization)
                continue
        nxt = -w0 * cj / denom
        if isinstance(nxt, Fraction) and nxt.denominator == 1:
            nxt = Fraction(nxt.numerator)
        coeffs.append(nxt)
        if pole is None:
            forced.append(j + 1)
    if pole is None:
        raise NoSeriesSolution(
            f"no recurrence pole within {max_terms} terms for W = {W.w}; only the trivial series solves it"
        )
    forced = tuple(i for i in forced if i < pole)
    closed = _detect_closed_form(coeffs, pole, w0, p, normalization)
    return GroundStateSeries(tuple(coeffs), normalization, pole, forced, closed, W)


def _detect_closed_form(coeffs, pole, w0, p, amplitude):
    rate = w0 / p
    if isinstance(rate, Fraction) and rate.denominator == 1:
        rate = int(rate)
    for t, c in enumerate(coeffs[pole:]):
        expect = amplitude * (-rate) ** t / math.factorial(t)
        if isinstance(c, Rational) and isinstance(expect, Rational):
            if c != expect:
                return None
        elif abs(c - expect) > 1e-12 * max(abs(expect), 1e-300):
            return None
    return ClosedForm(amplitude, pole, rate)


def zero_mode_residual(series: GroundStateSeries, W: Superpotential | None = None) -> PowerSum:
    """``W psi + p Delta1 psi`` for the truncated series, minus the truncation edge term.

    Only the top power ``n^(J-1)`` survives truncation at ``J`` terms, so it is
    dropped; everything below must vanish.
    """
    W = W or series.superpotential
    psi = series.as_powersum()
    res = W.w * psi + apply_difference_symbolic(1, psi) * W.prefactor
    return res.truncate_below(len(series.coefficients) - 1)


# ---------------------------------------------------------------------------
# hierarchy and intertwining


def hamiltonian_hierarchy(model, a1, depth: int):
    """Members ``H^(s)``, ``s = 1..depth``: ``v_minus`` at ``a_s`` plus the accumulated rest."""
    from .shape import hamiltonian_hierarchy as _impl

    return _impl(model, a1, depth)


@dataclass(frozen=True)
class IntertwineResult:
    image: SampledFunction | None
    norm_ratio: float
    annihilated: bool


def intertwine(
    a_op: LadderOperator,
    psi: SampledFunction,
    window: tuple[int, int],
    policy: SummationPolicy = DEFAULT_POLICY,
    threshold: float = ANNIHILATION_THRESHOLD,
) -> IntertwineResult:
    """Apply a ladder operator and renormalize; report annihilation instead of dividing by ~0."""
    lo, hi = window
    sites = np.arange(lo, hi + 1)
    in_norm = float(np.linalg.norm(psi(sites)))
    if in_norm == 0:
        raise InvalidArgument("cannot intertwine a zero-norm state")
    image = a_op.apply(psi, window, policy)
    out_norm = float(np.linalg.norm(image))
    ratio = out_norm / in_norm
    if ratio < threshold:
        return IntertwineResult(None, ratio, True)
    return IntertwineResult(SampledFunction((lo, hi), image / out_norm, "zero"), ratio, False)
