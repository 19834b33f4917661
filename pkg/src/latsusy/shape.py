"""Discrete shape invariance and the algebraic spectrum it implies.

A family ``W(a)`` is shape invariant under ``a -> phi(a)`` when

    v_plus(n; a) = v_minus(n; phi(a)) + R(a)

with ``R`` independent of ``n``.  The ``A^dagger A`` Hamiltonian at ``a_1``
then has levels ``e_susy(n) = R(a_1) + ... + R(a_n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number, Rational
from typing import Any, Callable

from .errors import InvalidArgument, NotShapeInvariant
from .expr import RationalExpression
from .powersum import PowerSum
from .sqm import Superpotential, build_partner_potentials, coulomb_superpotential
from .units import NATURAL, Units

REL_TOL = 1e-12


@dataclass(frozen=True)
class ShapeInvariantModel:
    name: str
    family: Callable[[Any], Superpotential]
    phi: Callable[[Any], Any]
    rest: Callable[[Any], Number] | None = None
    e0: Callable[[Any], Number] | None = None


@dataclass(frozen=True)
class ShapeCheck:
    parameter: Any
    holds: bool
    rest_extracted: Number
    residual: PowerSum


def check_shape_invariance(model: ShapeInvariantModel, a, rel_tol: float = REL_TOL) -> ShapeCheck:
    """Compare ``v_plus(a)`` with ``v_minus(phi(a))`` symbolically.

    Coefficients below ``rel_tol`` times the largest potential coefficient
    count as zero; exact (rational) inputs give an exactly zero residual.
    """
    upper = build_partner_potentials(model.family(a)).v_plus
    lower = build_partner_potentials(model.family(model.phi(a))).v_minus
    diff = upper - lower
    scale = max(upper.max_abs_coefficient(), lower.max_abs_coefficient())
    residual = PowerSum(
        (c, alpha) for c, alpha in diff.without(0) if abs(c) > rel_tol * scale
    )
    return ShapeCheck(a, residual.is_zero(), diff.constant_term, residual)


def _rest_along(model: ShapeInvariantModel, a, rel_tol: float):
    check = check_shape_invariance(model, a, rel_tol)
    if not check.holds:
        raise NotShapeInvariant(
            f"model {model.name!r} is not shape invariant at a={a}: residual {check.residual}",
            parameter=a,
            residual=check.residual,
        )
    if model.rest is None:
        return check.rest_extracted
    declared = model.rest(a)
    if abs(declared - check.rest_extracted) > rel_tol * max(1.0, abs(declared)) * 10:
        raise NotShapeInvariant(
            f"model {model.name!r}: declared rest R({a})={declared} disagrees with "
            f"extracted {check.rest_extracted}",
            parameter=a,
        )
    return declared


@dataclass(frozen=True)
class SpectrumLevel:
    n: int
    e_susy: Number
    e_paper: Number
    parameter: Any  # a_{n+1}, the parameter of the hierarchy member whose ground level this is


@dataclass(frozen=True)
class AlgebraicSpectrum:
    model: str
    levels: tuple[SpectrumLevel, ...]
    trail: tuple

    @property
    def e_susy(self) -> list:
        return [lv.e_susy for lv in self.levels]

    @property
    def e_paper(self) -> list:
        return [lv.e_paper for lv in self.levels]


def algebraic_spectrum(
    model: ShapeInvariantModel, a1, n_levels: int, rel_tol: float = REL_TOL
) -> AlgebraicSpectrum:
    """Levels ``n = 0..n_levels-1``; ``e_paper = e0(a1) + e_susy`` is reported alongside."""
    if n_levels < 0:
        raise InvalidArgument("n_levels must be non-negative")
    e0 = model.e0(a1) if model.e0 is not None else 0
    trail = [a1]
    levels = []
    acc = 0
    for n in range(n_levels):
        if n > 0:
            acc = acc + _rest_along(model, trail[n - 1], rel_tol)
            trail.append(model.phi(trail[n - 1]))
        levels.append(SpectrumLevel(n, acc, e0 + acc, trail[n]))
    return AlgebraicSpectrum(model.name, tuple(levels), tuple(trail))


@dataclass(frozen=True)
class HierarchyMember:
    s: int
    parameter: Any
    potential: PowerSum
    offset: Number


def hamiltonian_hierarchy(model: ShapeInvariantModel, a1, depth: int, rel_tol: float = REL_TOL):
    """``H^(s) = -p^2 Delta2 + v_minus(a_s) + sum_{k<s} R(a_k)`` for ``s = 1..depth``."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    members = []
    a, offset = a1, 0
    for s in range(1, depth + 1):
        if s > 1:
            offset = offset + _rest_along(model, a, rel_tol)
            a = model.phi(a)
        members.append(
            HierarchyMember(s, a, build_partner_potentials(model.family(a)).v_minus, offset)
        )
    return members


# ---------------------------------------------------------------------------
# registry


def _as_exact(x):
    return Fraction(x) if isinstance(x, Rational) else x


def coulomb_model(units: Units = NATURAL) -> ShapeInvariantModel:
    def rest(l):
        l = _as_exact(l)
        return (2 * l + 3) / ((l + 1) ** 2 * (l + 2) ** 2)

    def e0(l):
        l = _as_exact(l)
        return 1 / (l + 1) ** 2

    return ShapeInvariantModel(
        "coulomb",
        family=lambda l: coulomb_superpotential(l, units),
        phi=lambda l: l + 1,
        rest=rest,
        e0=e0,
    )


def free_model(units: Units = NATURAL) -> ShapeInvariantModel:
    """``W = 0``: both partner potentials vanish; trivially shape invariant with ``R = 0``."""
    return ShapeInvariantModel(
        "free",
        family=lambda a: Superpotential(PowerSum.zero(), units.prefactor),
        phi=lambda a: a,
        rest=lambda a: 0,
        e0=lambda a: 0,
    )


MODELS: dict[str, Callable[[Units], ShapeInvariantModel]] = {
    "coulomb": coulomb_model,
    "free": free_model,
}


def get_model(name: str, units: Units = NATURAL) -> ShapeInvariantModel:
    try:
        return MODELS[name](units)
    except KeyError:
        raise InvalidArgument(f"unknown model {name!r}; known: {sorted(MODELS)}") from None


def model_from_config(spec: dict, units: Units = NATURAL) -> ShapeInvariantModel:
    """Build a model from a config mapping.

    Expected keys: ``superpotential`` as a list of ``[coefficient, exponent]``
    pairs where a coefficient may be a number or an expression in the
    parameter ``a`` and the prefactor ``p``; ``phi`` as ``{"scale": s,
    "shift": t}`` meaning ``a' = s a + t``; ``rest`` and optional ``e0`` as
    expressions in ``a``.
    """
    try:
        terms = spec["superpotential"]
        phi_spec = spec.get("phi", {})
    except (KeyError, TypeError):
        raise InvalidArgument("custom model needs a 'superpotential' term list") from None
    p = units.prefactor
    compiled = []
    for entry in terms:
        if len(entry) != 2:
            raise InvalidArgument(f"superpotential term must be [coefficient, exponent], got {entry!r}")
        coef, alpha = entry
        if isinstance(coef, str):
            coef = RationalExpression(coef, ("a", "p"))
        elif isinstance(coef, (int, float)):
            coef = _as_exact(coef)
        else:
            raise InvalidArgument(f"bad coefficient {coef!r}")
        compiled.append((coef, alpha))

    def family(a):
        return Superpotential(
            PowerSum(
                (c(a=a, p=p) if isinstance(c, RationalExpression) else c, alpha)
                for c, alpha in compiled
            ),
            p,
        )

    scale = _as_exact(phi_spec.get("scale", 1))
    shift = _as_exact(phi_spec.get("shift", 0))
    rest = RationalExpression(spec["rest"], ("a", "p")) if "rest" in spec else None
    e0 = RationalExpression(spec["e0"], ("a", "p")) if "e0" in spec else None
    return ShapeInvariantModel(
        spec.get("name", "custom"),
        family=family,
        phi=lambda a: scale * a + shift,
        rest=(lambda a: rest(a=a, p=p)) if rest else None,
        e0=(lambda a: e0(a=a, p=p)) if e0 else None,
    )
