"""Acceptance criteria, one or more tests per criterion, each at its stated tolerance.

Several criteria are known not to hold for a correct implementation; those
tests check the stated property verbatim and are expected to fail.
"""

import math
import random
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from latsusy import oracle, ops, shape, sqm
from latsusy.powersum import PowerSum

crit = pytest.mark.criterion


# 1 -----------------------------------------------------------------------


@crit(1, "kernel exactness")
@pytest.mark.parametrize(
    "order, j, expected",
    [(1, 1, -1.0), (1, 2, 0.5), (2, 0, -math.pi**2 / 3), (2, 1, 2.0)],
)
def test_kernel_values(order, j, expected):
    assert abs(ops.kernel_coefficient(order, j) - expected) <= 1e-15


@crit(1, "kernel exactness")
def test_kernel_parity_exact():
    j = np.arange(0, 1001)
    assert np.array_equal(ops.kernel_values(1, -j), -ops.kernel_values(1, j))
    assert np.array_equal(ops.kernel_values(2, -j), ops.kernel_values(2, j))


# 2 -----------------------------------------------------------------------


def _symbol_error(order, k, cutoff):
    policy = ops.SummationPolicy(cutoff=cutoff)
    f = ops.plane_wave(k)
    exact = 1j * k if order == 1 else -(k**2)
    n = 3
    return abs(ops.apply_difference(order, f, n, policy) / np.exp(1j * k * n) - exact)


@crit(2, "spectral symbol")
@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9])
def test_spectral_symbol(order, frac):
    k = frac * math.pi
    err = _symbol_error(order, k, 10_000)
    assert err <= 1e-3
    assert _symbol_error(order, k, 20_000) < err


# 3 -----------------------------------------------------------------------

BAND_LIMITED = {
    "wave 0.1pi": ops.plane_wave(0.1 * math.pi),
    "wave 0.3pi": ops.plane_wave(0.3 * math.pi),
    "wave 0.5pi": ops.plane_wave(0.5 * math.pi),
    "sinc 0.4pi": ops.SampledFunction.from_rule(lambda n: np.sinc(0.4 * n), (-20, 20)),
    "mixture": ops.SampledFunction.from_rule(
        lambda n: np.cos(0.2 * math.pi * n) + 0.5j * np.sin(0.45 * math.pi * n), (-20, 20)
    ),
}


@crit(3, "semigroup and Leibniz")
@pytest.mark.parametrize("name", sorted(BAND_LIMITED))
def test_semigroup_41_sites(name):
    assert ops.verify_semigroup(BAND_LIMITED[name], (-20, 20)) < 1e-3


def _random_powersum(rng):
    terms = []
    for _ in range(rng.randint(1, 4)):
        coef = Fraction(rng.randint(-20, 20), rng.randint(1, 7))
        alpha = Fraction(rng.randint(-8, 8), rng.choice((1, 2, 3, 4)))
        terms.append((coef, alpha))
    return PowerSum(terms)


@crit(3, "semigroup and Leibniz")
def test_leibniz_random_pairs():
    rng = random.Random(2024)
    for _ in range(100):
        assert ops.verify_leibniz(_random_powersum(rng), _random_powersum(rng)) == 0


# 4 -----------------------------------------------------------------------


@crit(4, "power-law regularization")
@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [10, 25, 50])
def test_cesaro_power_rule(k, n):
    f = ops.SampledFunction.from_rule(lambda x: x.astype(float) ** k, (0, 60))
    got = ops.apply_difference(1, f, n, ops.CESARO_POLICY).real
    want = k * n ** (k - 1)
    assert abs(got - want) <= 1e-2 * want


# 5 -----------------------------------------------------------------------


@crit(5, "Coulomb shape invariance")
@pytest.mark.parametrize("l", range(11))
def test_coulomb_shape_invariance(l):
    check = shape.check_shape_invariance(shape.coulomb_model(), l)
    assert check.holds and check.residual.is_zero()
    diff = (
        sqm.build_partner_potentials(sqm.coulomb_superpotential(l)).v_plus
        - sqm.build_partner_potentials(sqm.coulomb_superpotential(l + 1)).v_minus
    )
    assert diff.is_constant()
    assert check.rest_extracted == Fraction(2 * l + 3, (l + 1) ** 2 * (l + 2) ** 2)


@crit(5, "Coulomb shape invariance")
def test_rest_at_zero_is_three_quarters():
    rest = shape.check_shape_invariance(shape.coulomb_model(), 0).rest_extracted
    assert rest == Fraction(3, 4) and isinstance(rest, Fraction)


# 6 -----------------------------------------------------------------------


@crit(6, "algebraic spectrum")
@pytest.mark.parametrize("l", range(6))
def test_spectrum_telescopes(l):
    spec = shape.algebraic_spectrum(shape.coulomb_model(), l, 21)
    e0 = Fraction(1, (l + 1) ** 2)
    for n, level in enumerate(spec.levels):
        assert abs(level.e_susy - (e0 - Fraction(1, (l + n + 1) ** 2))) <= 1e-12
        displayed = e0 + sum(
            Fraction(2 * m + 3, (m + 1) ** 2 * (m + 2) ** 2) for m in range(l, l + n)
        )
        assert level.e_paper == level.e_susy + e0 == displayed


# 7 -----------------------------------------------------------------------


@crit(7, "ground-state series")
def test_series_coefficients_literal_factorial():
    # stated pattern c_j = (-1)^(j-1) N / j!; the recurrence j c_{j+1} + c_j = 0
    # with c_1 = N gives (j-1)! instead, so this fails from j = 2 on
    series = sqm.solve_ground_state_series(sqm.coulomb_superpotential(0), 21)
    c = series.coefficients
    assert c[0] == 0
    for j in range(1, 21):
        assert c[j] == Fraction((-1) ** (j - 1), math.factorial(j)), f"j={j}: {c[j]}"


@crit(7, "ground-state series")
def test_series_matches_closed_form():
    series = sqm.solve_ground_state_series(sqm.coulomb_superpotential(0), 60)
    n = np.arange(1, 11)
    assert np.max(np.abs(series.evaluate(n) - n * np.exp(-n))) <= 1e-10
    assert str(series.closed_form) == "n*exp(-n)"


# 8 -----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _coulomb_minus(size):
    V = sqm.build_partner_potentials(sqm.coulomb_superpotential(0)).v_minus
    op = oracle.assemble_hamiltonian(V, (1, size), size)
    return op, oracle.diagonalize(op)


@crit(8, "oracle cross-validation")
def test_oracle_ground_level():
    _, rep = _coulomb_minus(400)
    assert abs(rep.eigenvalues[0]) <= 2e-2, f"lowest eigenvalue {rep.eigenvalues[0]:.6f}"


@crit(8, "oracle cross-validation")
def test_oracle_first_excited_level():
    _, rep = _coulomb_minus(400)
    assert abs(rep.eigenvalues[1] - 0.75) <= 5e-2


@crit(8, "oracle cross-validation")
def test_oracle_gaps_shrink_with_window():
    small, large = _coulomb_minus(200)[1].eigenvalues, _coulomb_minus(400)[1].eigenvalues
    targets = (0.0, 0.75)
    for k, t in enumerate(targets):
        assert abs(large[k] - t) < abs(small[k] - t)


@crit(8, "oracle cross-validation")
def test_oracle_zero_mode_residual():
    residuals = []
    for size in (200, 400):
        op, _ = _coulomb_minus(size)
        residuals.append(oracle.residual_check(op, op.sites * np.exp(-op.sites), 0.0))
    assert residuals[1] < 1e-2, f"residuals {residuals}"
    assert residuals[1] < residuals[0], f"residuals {residuals}"


# 9 -----------------------------------------------------------------------


@crit(9, "SUSY partnership numerics")
def test_partner_isospectrality():
    pp = sqm.build_partner_potentials(sqm.coulomb_superpotential(0))
    rows = oracle.partner_isospectrality(pp.v_minus, pp.v_plus, (1, 400), 3)
    bad = [(r.k, round(r.difference, 5), r.tolerance) for r in rows if not r.ok]
    assert not bad, f"levels outside tolerance: {bad}"


@crit(9, "SUSY partnership numerics")
def test_intertwined_first_excited_overlap():
    W = sqm.coulomb_superpotential(0)
    window = (1, 400)
    _, lower = _coulomb_minus(400)
    upper_op = oracle.assemble_hamiltonian(sqm.build_partner_potentials(W).v_plus, window, 400)
    upper = oracle.diagonalize(upper_op)
    A = sqm.ladder_pair(W).a_op.matrix(window)
    image = A @ lower.eigenvectors[:, 1]
    image /= np.linalg.norm(image)
    overlap = abs(image @ upper.eigenvectors[:, 0])
    assert overlap > 0.99, f"overlap {overlap:.4f}"


# 10 ----------------------------------------------------------------------


@crit(10, "eigensolver self-checks")
@pytest.mark.parametrize("seed", range(5))
def test_random_symmetric_reconstruction(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((50, 50))
    H = M + M.T
    rep = oracle.diagonalize(H)
    assert rep.reconstruction_error(H) < 1e-8
    assert rep.orthogonality_error() < 1e-8


@crit(10, "eigensolver self-checks")
@pytest.mark.parametrize(
    "matrix, expected",
    [([[2, 1], [1, 2]], [1, 3]), ([[0, 1], [1, 0]], [-1, 1]), ([[4, 0], [0, -2]], [-2, 4])],
)
def test_two_by_two(matrix, expected):
    rep = oracle.diagonalize(np.array(matrix, dtype=float))
    assert np.max(np.abs(rep.eigenvalues - expected)) <= 1e-12
