"""Dense-matrix oracle for the truncated lattice Hamiltonians.

Hamiltonians ``-p^2 Delta2 + V`` are restricted to a finite window by
dropping every coupling to a site outside it (Dirichlet truncation) and
diagonalized with a serial cyclic Jacobi solver.  Nothing here uses the
symbolic factorization, so it is an independent check on ``shape``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number
from typing import Sequence

import numba
import numpy as np

from .errors import ConvergenceFailure, InvalidArgument, InvalidDomain
from .ops import SampledFunction, difference_matrix
from .powersum import PowerSum
from .units import NATURAL, Units


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    window: tuple[int, int]
    matrix: np.ndarray
    kernel_cutoff: int
    boundary: str = "dirichlet"
    units: Units = NATURAL
    label: str = ""

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.window[0], self.window[1] + 1)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T))) if self.size else 0.0

    def metadata(self) -> dict:
        return {
            "window": list(self.window),
            "kernel_cutoff": self.kernel_cutoff,
            "boundary": self.boundary,
            "a": self.units.a,
            "hbar": self.units.hbar,
            "two_m": self.units.two_m,
        }


def _potential_on(V, sites: np.ndarray) -> np.ndarray:
    if V is None:
        return np.zeros(sites.shape)
    if isinstance(V, PowerSum):
        bad = V.singular_sites(sites)
        if np.any(bad):
            raise InvalidDomain(f"potential {V} is singular at sites {sites[bad].tolist()}")
        return np.asarray(V(sites), dtype=float)
    if isinstance(V, SampledFunction):
        vals = V(sites)
    elif isinstance(V, Number):
        vals = np.full(sites.shape, V)
    else:
        vals = np.asarray(V)
        if vals.shape != sites.shape:
            raise InvalidArgument(f"potential array has shape {vals.shape}, window needs {sites.shape}")
    vals = np.asarray(vals)
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise InvalidArgument("potential must be real")
        vals = vals.real
    return vals.astype(float)


def assemble_hamiltonian(
    V,
    window: tuple[int, int],
    kernel_cutoff: int | None = None,
    units: Units = NATURAL,
    label: str = "",
) -> TruncatedOperator:
    """Matrix of ``-p^2 Delta2 + V`` on ``window``.

    Off-diagonal ``H[n, n'] = -p^2 K2[n-n']`` for ``|n-n'| <= kernel_cutoff``
    and 0 beyond; diagonal ``p^2 pi^2/3 + V[n]``.  ``kernel_cutoff`` defaults
    to the window length, which keeps every in-window coupling.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise InvalidArgument(f"empty window {window}")
    sites = np.arange(lo, hi + 1)
    cutoff = sites.size if kernel_cutoff is None else int(kernel_cutoff)
    if cutoff < 0:
        raise InvalidArgument("kernel_cutoff must be non-negative")
    kinetic = float(units.kinetic)
    H = -kinetic * difference_matrix(2, (lo, hi), cutoff)
    H[np.diag_indices_from(H)] += _potential_on(V, sites)
    return TruncatedOperator((lo, hi), H, cutoff, "dirichlet", units, label)


@dataclass(frozen=True, eq=False)
class EigenReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    off_diagonal: float
    window: tuple[int, int] | None = None

    def orthogonality_error(self) -> float:
        Q = self.eigenvectors
        return float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1])))) if Q.size else 0.0

    def reconstruction_error(self, H: np.ndarray) -> float:
        """``max|Q diag(w) Q^T - H| / max|H|``."""
        Q, w = self.eigenvectors, self.eigenvalues
        scale = float(np.max(np.abs(H))) or 1.0
        return float(np.max(np.abs((Q * w) @ Q.T - H))) / scale if Q.size else 0.0

    def eigenfunction(self, k: int) -> SampledFunction:
        if self.window is None:
            raise InvalidArgument("report has no window attached")
        return SampledFunction(self.window, self.eigenvectors[:, k], "zero")


@numba.njit(cache=True)
def _max_off_diagonal(A):
    n = A.shape[0]
    m = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            v = abs(A[i, j])
            if v > m:
                m = v
    return m


@numba.njit(cache=True)
def _cyclic_jacobi(A, Vt, tol_abs, max_sweeps):
    """In-place cyclic Jacobi.  Rows of ``Vt`` become eigenvectors.

    Returns (sweeps used, final max off-diagonal).
    """
    n = A.shape[0]
    off = _max_off_diagonal(A)
    sweeps = 0
    skip = 1e-3 * tol_abs
    while off >= tol_abs and sweeps < max_sweeps:
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                theta = 0.5 * (aqq - app) / apq
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                # rows p and q are contiguous; the symmetric columns are mirrored
                for r in range(n):
                    if r != p and r != q:
                        arp = A[p, r]
                        arq = A[q, r]
                        nrp = arp - s * (arq + tau * arp)
                        nrq = arq + s * (arp - tau * arq)
                        A[p, r] = nrp
                        A[q, r] = nrq
                for r in range(n):
                    if r != p and r != q:
                        A[r, p] = A[p, r]
                        A[r, q] = A[q, r]
                for r in range(n):
                    vp = Vt[p, r]
                    vq = Vt[q, r]
                    Vt[p, r] = vp - s * (vq + tau * vp)
                    Vt[q, r] = vq + s * (vp - tau * vq)
        off = _max_off_diagonal(A)
    return sweeps, off


def diagonalize(op, tol: float = 1e-10, max_sweeps: int = 60) -> EigenReport:
    """Full eigendecomposition by cyclic plane-rotation sweeps.

    Sweeps stop once the largest off-diagonal entry drops below
    ``tol * ||H||_F``.  Eigenvalues come back ascending with eigenvectors as
    the matching columns.
    """
    window = None
    if isinstance(op, TruncatedOperator):
        window = op.window
        H = op.matrix
    else:
        H = np.asarray(op, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {H.shape}")
    n = H.shape[0]
    if n == 0:
        return EigenReport(np.zeros(0), np.zeros((0, 0)), 0, 0.0, window)
    if not np.all(np.isfinite(H)):
        raise InvalidArgument("matrix has non-finite entries")
    scale = float(np.max(np.abs(H)))
    if np.max(np.abs(H - H.T)) > 1e-14 * max(scale, 1e-300):
        raise InvalidArgument("matrix is not symmetric")
    A = np.ascontiguousarray(0.5 * (H + H.T), dtype=np.float64)
    Vt = np.eye(n)
    tol_abs = tol * float(np.linalg.norm(A))
    sweeps, off = _cyclic_jacobi(A, Vt, tol_abs, max_sweeps)
    if off >= tol_abs and off > 0.0:
        raise ConvergenceFailure(
            f"Jacobi sweeps exhausted ({max_sweeps}) with off-diagonal {off:.3e}", off
        )
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return EigenReport(w[order], Vt[order].T.copy(), sweeps, float(off), window)


# ---------------------------------------------------------------------------
# comparisons


@dataclass(frozen=True)
class LevelComparison:
    n: int
    numeric: float
    algebraic: float
    abs_dev: float
    rel_dev: float | None


@dataclass(frozen=True)
class SpectrumReport:
    levels: tuple[LevelComparison, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def max_abs_dev(self) -> float:
        return max((lv.abs_dev for lv in self.levels), default=0.0)


def compare_spectra(report, algebraic, n_levels: int, metadata: dict | None = None) -> SpectrumReport:
    """Pair the lowest numeric eigenvalues with algebraic ``e_susy`` levels by rank."""
    numeric = report.eigenvalues if isinstance(report, EigenReport) else np.asarray(report)
    targets = algebraic.e_susy if hasattr(algebraic, "e_susy") else list(algebraic)
    if n_levels < 0 or n_levels > len(numeric) or n_levels > len(targets):
        raise InvalidArgument(
            f"n_levels={n_levels} exceeds available levels ({len(numeric)} numeric, {len(targets)} algebraic)"
        )
    rows = []
    for k in range(n_levels):
        x, y = float(numeric[k]), float(targets[k])
        dev = abs(x - y)
        rows.append(LevelComparison(k, x, y, dev, dev / abs(y) if y != 0 else None))
    meta = dict(metadata or {})
    if isinstance(report, EigenReport):
        meta.setdefault("sweeps", report.sweeps)
        meta.setdefault("off_diagonal", report.off_diagonal)
    return SpectrumReport(tuple(rows), meta)


def residual_check(op: TruncatedOperator, psi, energy: float, margin: int = 0) -> float:
    """``|H psi - E psi|_2 / |psi|_2``, optionally ignoring ``margin`` sites at each edge."""
    vec = psi(op.sites) if isinstance(psi, SampledFunction) else np.asarray(psi)
    if vec.shape != (op.size,):
        raise InvalidArgument(f"psi has shape {vec.shape}, operator needs {(op.size,)}")
    r = op.matrix @ vec - energy * vec
    if margin:
        if 2 * margin >= op.size:
            raise InvalidArgument("margin leaves no interior sites")
        r, vec = r[margin:-margin], vec[margin:-margin]
    norm = float(np.linalg.norm(vec))
    if norm == 0:
        raise InvalidArgument("psi has zero norm")
    return float(np.linalg.norm(r)) / norm


def window_convergence(V, n_min: int, sizes: Sequence[int], levels: int, units: Units = NATURAL):
    """Lowest ``levels`` eigenvalues for each window ``[n_min, n_min + N - 1]``, cutoff ``N``."""
    out = []
    for size in sizes:
        op = assemble_hamiltonian(V, (n_min, n_min + size - 1), size, units)
        out.append(diagonalize(op).eigenvalues[:levels])
    return np.array(out)


@dataclass(frozen=True)
class PartnerLevel:
    k: int
    lower: float  # level k+1 of the v_minus Hamiltonian
    upper: float  # level k of the v_plus Hamiltonian
    difference: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.difference <= self.tolerance


def partner_isospectrality(
    v_minus: PowerSum,
    v_plus: PowerSum,
    window: tuple[int, int],
    n_levels: int,
    units: Units = NATURAL,
    floor: float = 1e-2,
) -> list[PartnerLevel]:
    """Match ``v_plus`` levels to ``v_minus`` levels above its ground state.

    The tolerance for level ``k`` is the larger of ``floor`` and how far
    either compared eigenvalue moves when the window doubles.
    """
    lo, hi = window
    size = hi - lo + 1
    wide = (lo, lo + 2 * size - 1)
    spectra = {}
    for name, V in (("minus", v_minus), ("plus", v_plus)):
        for tag, win in (("N", window), ("2N", wide)):
            op = assemble_hamiltonian(V, win, win[1] - win[0] + 1, units)
            spectra[name, tag] = diagonalize(op).eigenvalues
    rows = []
    for k in range(n_levels):
        lower, upper = spectra["minus", "N"][k + 1], spectra["plus", "N"][k]
        drift = max(
            abs(lower - spectra["minus", "2N"][k + 1]), abs(upper - spectra["plus", "2N"][k])
        )
        rows.append(PartnerLevel(k, float(lower), float(upper), float(abs(lower - upper)), max(floor, drift)))
    return rows
