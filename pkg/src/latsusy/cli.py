"""Command-line front end: ``latsusy {verify,spectrum,ground-state,diagonalize}``.

Exit codes: 0 success, 1 computational failure or tolerance breach, 2 usage error.
Machine-readable output is csv (with a ``# meta:`` header line) or json.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from numbers import Number, Rational
from typing import Any

import numpy as np

from . import ops, oracle, shape, sqm
from .errors import ConvergenceFailure, InvalidArgument, LatticeError, NoSeriesSolution, NotShapeInvariant
from .powersum import PowerSum
from .units import Units

SUITES = ("kernels", "semigroup", "leibniz", "shape-invariance", "factorization")


@dataclass
class RunConfig:
    model: Any = "coulomb"  # registry name or a custom-model mapping
    l: Any = 0
    a: Any = 1
    hbar: Any = 1
    two_m: Any = 1
    window: int = 200
    window_start: int = 1
    kernel_cutoff: int | None = None
    sum_cutoff: int = 10_000
    sum_mode: str = "paired"
    tail_tol: float = 1e-3
    cesaro_depth: int = 4
    levels: int = 3
    tol: float | None = None
    k: float = 0.3  # plane-wave number in units of pi
    max_terms: int = 30
    seed: int = 0
    pairs: int = 100
    sector: str = "minus"
    format: str = "csv"
    emit: str | None = None

    def __post_init__(self):
        if self.window < 1:
            raise InvalidArgument("window must be a positive site count")
        if self.kernel_cutoff is not None and self.kernel_cutoff < 1:
            raise InvalidArgument("kernel cutoff must be positive")
        if self.levels < 0:
            raise InvalidArgument("levels must be non-negative")
        if self.tol is not None and not self.tol > 0:
            raise InvalidArgument("tol must be positive")
        if self.format not in ("csv", "json"):
            raise InvalidArgument(f"unknown format {self.format!r}")
        if self.sector not in ("minus", "plus"):
            raise InvalidArgument(f"unknown sector {self.sector!r}")
        self.units  # validates a, hbar, two_m
        self.policy

    @property
    def units(self) -> Units:
        return Units(_num(self.a), _num(self.hbar), _num(self.two_m))

    @property
    def policy(self) -> ops.SummationPolicy:
        return ops.SummationPolicy(self.sum_cutoff, self.sum_mode, self.tail_tol, self.cesaro_depth)

    @property
    def parameter(self):
        return _num(self.l)

    @property
    def window_range(self) -> tuple[int, int]:
        return (self.window_start, self.window_start + self.window - 1)

    def model_obj(self) -> shape.ShapeInvariantModel:
        if isinstance(self.model, dict):
            return shape.model_from_config(self.model, self.units)
        return shape.get_model(self.model, self.units)

    def meta(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name in ("format", "emit"):
                continue
            out[f.name] = _jsonable(getattr(self, f.name))
        return out


def _num(x):
    """Parse a CLI number, keeping integers and simple fractions exact."""
    if isinstance(x, Number):
        return x
    s = str(x).strip()
    try:
        return int(s)
    except ValueError:
        pass
    if "/" in s:
        return Fraction(s)
    return float(s)


def _jsonable(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (Rational, float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class Table:
    def __init__(self, columns, rows, meta):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.meta = meta

    def render(self, fmt: str) -> str:
        if fmt == "json":
            payload = {
                "meta": _jsonable(self.meta),
                "columns": self.columns,
                "rows": [dict(zip(self.columns, _jsonable(r))) for r in self.rows],
            }
            return json.dumps(payload, indent=2, allow_nan=False, default=str) + "\n"
        buf = io.StringIO()
        buf.write("# meta: " + json.dumps(_jsonable(self.meta), sort_keys=True, default=str) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _write(text: str, path: str | None, out) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


# ---------------------------------------------------------------------------
# verify


def _check(name, value, tol, rows):
    ok = bool(value <= tol)
    rows.append([name, float(value), tol, "pass" if ok else "fail"])
    return ok


def _verify_kernels(cfg: RunConfig, rows):
    exact = [
        ("K1[1]", ops.kernel_coefficient(1, 1), -1.0),
        ("K1[2]", ops.kernel_coefficient(1, 2), 0.5),
        ("K2[0]", ops.kernel_coefficient(2, 0), -math.pi**2 / 3),
        ("K2[1]", ops.kernel_coefficient(2, 1), 2.0),
    ]
    for name, got, want in exact:
        rows.append([f"{name} = {got!r}", abs(got - want), 1e-15, "pass" if abs(got - want) <= 1e-15 else "fail"])
    j = np.arange(1, 1001)
    _check("parity K1[-j] = -K1[j], |j|<=1000", np.max(np.abs(ops.kernel_values(1, -j) + ops.kernel_values(1, j))), 0.0, rows)
    _check("parity K2[-j] = K2[j], |j|<=1000", np.max(np.abs(ops.kernel_values(2, -j) - ops.kernel_values(2, j))), 0.0, rows)
    tol = cfg.tol or 1e-3
    ces = ops.SummationPolicy(cfg.sum_cutoff, "paired-cesaro", cfg.tail_tol, cfg.cesaro_depth)
    for order in (1, 2):
        val = ops.apply_difference(order, ops.constant_function(), 0, ces)
        _check(f"Delta{order}(const) = 0", abs(val), tol, rows)
    k = cfg.k * math.pi
    pw = ops.plane_wave(k)
    _check(f"Delta1 exp(ikn) = ik exp(ikn), k={cfg.k}pi", abs(ops.apply_difference(1, pw, 0, cfg.policy) - 1j * k), tol, rows)
    _check(f"Delta2 exp(ikn) = -k^2 exp(ikn), k={cfg.k}pi", abs(ops.apply_difference(2, pw, 0, cfg.policy) + k * k), tol, rows)


def _verify_semigroup(cfg: RunConfig, rows):
    tol = cfg.tol or 1e-3
    k = cfg.k * math.pi
    _check(
        f"semigroup exp(ikn), k={cfg.k}pi, window [-20,20]",
        ops.verify_semigroup(ops.plane_wave(k), (-20, 20), cfg.policy),
        tol,
        rows,
    )
    decaying = ops.SampledFunction.from_rule(lambda n: n * np.exp(-np.abs(n)), (-10, 10))
    _check("semigroup n exp(-|n|), window [-10,10]", ops.verify_semigroup(decaying, (-10, 10), cfg.policy), tol, rows)


def random_powersum(rng: random.Random, max_terms: int = 4) -> PowerSum:
    """Random PowerSum with small rational coefficients and exponents."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        coef = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
        alpha = Fraction(rng.randint(-6, 6), rng.choice((1, 1, 2, 3)))
        terms.append((coef, alpha))
    return PowerSum(terms)


def _verify_leibniz(cfg: RunConfig, rows):
    n = PowerSum.monomial(1, 1)
    inv = PowerSum.monomial(1, -1)
    tol = cfg.tol if cfg.tol is not None else 0.0
    _check("Leibniz f=n, g=n", ops.verify_leibniz(n, n), tol, rows)
    _check("Leibniz f=n^2, g=n^-1", ops.verify_leibniz(n * n, inv), tol, rows)
    _check("Leibniz f=1-1/n, g=n", ops.verify_leibniz(1 - inv, n), tol, rows)
    rng = random.Random(cfg.seed)
    worst = max(
        (ops.verify_leibniz(random_powersum(rng), random_powersum(rng)) for _ in range(cfg.pairs)),
        default=0,
    )
    _check(f"Leibniz {cfg.pairs} random pairs (seed {cfg.seed})", worst, tol, rows)


def _verify_shape(cfg: RunConfig, rows):
    model = cfg.model_obj()
    a = cfg.parameter
    check = shape.check_shape_invariance(model, a)
    rows.append([f"shape invariance holds at a={a}", 0.0 if check.holds else 1.0, 0.0, "pass" if check.holds else "fail"])
    rows.append([f"rest R({a}) = {_fmt(check.rest_extracted)}", float(check.rest_extracted), None, "info"])
    _check("SI residual max coefficient", check.residual.max_abs_coefficient(), cfg.tol or 0.0, rows)
    if model.rest is not None:
        _check("extracted rest vs declared R", abs(check.rest_extracted - model.rest(a)), cfg.tol or 1e-12, rows)


def _verify_factorization(cfg: RunConfig, rows):
    model = cfg.model_obj()
    W = model.family(cfg.parameter)
    probes = [
        PowerSum.monomial(1, 1),
        PowerSum([(1, 2), (Fraction(-1, 3), 0)]),
        PowerSum([(1, 0), (-1, -1)]),
        PowerSum([(Fraction(1, 2), Fraction(3, 2)), (2, -2)]),
    ]
    tol = cfg.tol if cfg.tol is not None else 1e-12
    worst = max(sqm.factorization_residual(W, p).max_abs_coefficient() for p in probes)
    _check("A^dagger A = -p^2 Delta2 + v_minus (symbolic)", worst, tol, rows)
    worst = max(sqm.partner_factorization_residual(W, p).max_abs_coefficient() for p in probes)
    _check("A A^dagger = -p^2 Delta2 + v_plus (symbolic)", worst, tol, rows)
    window = (1, 50)
    pair = sqm.ladder_pair(W)
    A = pair.a_op.matrix(window)
    Ad = pair.a_dagger_op.matrix(window)
    _check("matrix(A^dagger) = matrix(A)^T on [1,50]", np.max(np.abs(Ad - A.T)), 0.0, rows)
    AtA = Ad @ A
    ev = oracle.diagonalize(0.5 * (AtA + AtA.T)).eigenvalues
    scale = float(np.max(np.abs(AtA)))
    _check("min eigenvalue of A^dagger A >= -1e-9 |H|", max(0.0, -ev[0]) / scale, 1e-9, rows)


VERIFIERS = {
    "kernels": _verify_kernels,
    "semigroup": _verify_semigroup,
    "leibniz": _verify_leibniz,
    "shape-invariance": _verify_shape,
    "factorization": _verify_factorization,
}


def cmd_verify(suite: str, cfg: RunConfig, out=sys.stdout) -> int:
    if suite not in VERIFIERS:
        raise InvalidArgument(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    rows: list = []
    VERIFIERS[suite](cfg, rows)
    failed = [r for r in rows if r[3] == "fail"]
    meta = {"command": "verify", "suite": suite, "config": cfg.meta(), "failed": len(failed)}
    _write(Table(["check", "value", "tolerance", "status"], rows, meta).render(cfg.format), cfg.emit, out)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# spectrum / ground state / diagonalize


def _parameter_label(x):
    return _jsonable(x) if not isinstance(x, Fraction) else str(x)


def cmd_spectrum(cfg: RunConfig, out=sys.stdout) -> int:
    model = cfg.model_obj()
    spec = shape.algebraic_spectrum(model, cfg.parameter, cfg.levels)
    rows = [[lv.n, lv.e_susy, lv.e_paper, _parameter_label(lv.parameter)] for lv in spec.levels]
    meta = {"command": "spectrum", "model": model.name, "config": cfg.meta()}
    _write(Table(["n", "e_susy", "e_paper", "parameter"], rows, meta).render(cfg.format), cfg.emit, out)
    return 0


def cmd_ground_state(cfg: RunConfig, out=sys.stdout) -> int:
    model = cfg.model_obj()
    W = model.family(cfg.parameter)
    series = sqm.solve_ground_state_series(W, cfg.max_terms)
    closed = series.closed_form
    sites = np.arange(cfg.window_range[0], cfg.window_range[1] + 1)
    raw = closed(sites) if closed is not None else series.evaluate(sites)
    norm = float(np.linalg.norm(raw))
    if norm == 0 or not np.isfinite(norm):
        raise NoSeriesSolution("sampled ground state is not normalizable on the window")
    psi = raw / norm
    meta = {
        "command": "ground-state",
        "model": model.name,
        "superpotential": str(W.w),
        "closed_form": str(closed) if closed is not None else None,
        "leading_power": series.pole_index,
        "decay_rate": _jsonable(closed.rate) if closed is not None else None,
        "forced_zero": list(series.forced_zero),
        "config": cfg.meta(),
    }
    coeff_rows = [[j, c, str(c)] for j, c in enumerate(series.coefficients)]
    sample_meta = dict(meta, table="samples", norm=1.0)
    samples = Table(["n", "psi"], [[int(n), float(v)] for n, v in zip(sites, psi)], sample_meta)
    coeffs = Table(["j", "c_j", "c_j_exact"], coeff_rows, dict(meta, table="coefficients"))
    if cfg.format == "json":
        payload = {
            "meta": _jsonable(meta),
            "coefficients": [{"j": j, "c_j": float(c), "c_j_exact": str(c)} for j, c in enumerate(series.coefficients)],
            "samples": [{"n": int(n), "psi": float(v)} for n, v in zip(sites, psi)],
        }
        text = json.dumps(payload, indent=2) + "\n"
        out.write(text)
        if cfg.emit:
            _write(samples.render("csv"), cfg.emit, out)
        return 0
    out.write(coeffs.render("csv"))
    if cfg.emit:
        _write(samples.render("csv"), cfg.emit, out)
    else:
        out.write("\n")
        out.write(samples.render("csv"))
    return 0


def cmd_diagonalize(cfg: RunConfig, out=sys.stdout) -> int:
    model = cfg.model_obj()
    a = cfg.parameter
    partners = sqm.build_partner_potentials(model.family(a))
    V = partners.v_minus if cfg.sector == "minus" else partners.v_plus
    op = oracle.assemble_hamiltonian(V, cfg.window_range, cfg.kernel_cutoff, cfg.units, f"v_{cfg.sector}")
    rep = oracle.diagonalize(op)
    levels = min(cfg.levels, op.size)
    start = a if cfg.sector == "minus" else model.phi(a)
    offset = 0 if cfg.sector == "minus" else shape.check_shape_invariance(model, a).rest_extracted
    alg = shape.algebraic_spectrum(model, start, levels)
    targets = [offset + e for e in alg.e_susy]
    meta = {
        "command": "diagonalize",
        "model": model.name,
        "potential": str(V),
        "operator": op.metadata(),
        "sweeps": rep.sweeps,
        "off_diagonal": rep.off_diagonal,
        "orthogonality_error": rep.orthogonality_error(),
        "reconstruction_error": rep.reconstruction_error(op.matrix),
        "config": cfg.meta(),
    }
    report = oracle.compare_spectra(rep, targets, levels, meta)
    rows = [[lv.n, lv.numeric, lv.algebraic, lv.abs_dev, lv.rel_dev] for lv in report.levels]
    out.write(Table(["n", "numeric", "e_susy", "abs_dev", "rel_dev"], rows, report.metadata).render(cfg.format))
    if cfg.emit:
        cols = ["n"] + [f"v{k}" for k in range(op.size)]
        vec_rows = [[int(n)] + list(rep.eigenvectors[i]) for i, n in enumerate(op.sites)]
        vec_meta = {"command": "diagonalize", "table": "eigenvectors", "eigenvalues": rep.eigenvalues.tolist(), "config": cfg.meta()}
        _write(Table(cols, vec_rows, vec_meta).render("csv"), cfg.emit, out)
    if cfg.tol is not None and report.max_abs_dev > cfg.tol:
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared options")
    g.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    g.add_argument("--model", help="registered model name (coulomb, free)")
    g.add_argument("--l", dest="l", help="model parameter (angular momentum for coulomb)")
    g.add_argument("--a", dest="a", help="lattice constant")
    g.add_argument("--hbar")
    g.add_argument("--two-m", dest="two_m")
    g.add_argument("--window", type=int, metavar="N", help="number of sites")
    g.add_argument("--window-start", type=int, help="first site (default 1)")
    g.add_argument("--kernel-cutoff", type=int, metavar="J", help="matrix coupling range (default N)")
    g.add_argument("--sum-cutoff", type=int, help="paired terms in kernel sums (default 10000)")
    g.add_argument("--sum-mode", choices=("paired", "paired-cesaro"))
    g.add_argument("--tail-tol", type=float)
    g.add_argument("--levels", type=int, metavar="K")
    g.add_argument("--tol", type=float, metavar="X")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--emit", metavar="PATH")

    parser = argparse.ArgumentParser(prog="latsusy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--k", type=float, help="plane-wave number in units of pi (default 0.3)")
    v.add_argument("--seed", type=int)
    v.add_argument("--pairs", type=int)
    sub.add_parser("spectrum", parents=[common], help="algebraic spectrum from shape invariance")
    gs = sub.add_parser("ground-state", parents=[common], help="series zero mode and sampled wavefunction")
    gs.add_argument("--max-terms", type=int)
    d = sub.add_parser("diagonalize", parents=[common], help="dense oracle vs algebraic spectrum")
    d.add_argument("--sector", choices=("minus", "plus"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        names = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - names
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (InvalidArgument, ValueError, OSError, TypeError) as exc:
        print(f"latsusy: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, cfg, out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        if args.command == "ground-state":
            return cmd_ground_state(cfg, out)
        return cmd_diagonalize(cfg, out)
    except InvalidArgument as exc:
        print(f"latsusy: error: {exc}", file=sys.stderr)
        return 2
    except (NotShapeInvariant, NoSeriesSolution, ConvergenceFailure, LatticeError) as exc:
        print(f"latsusy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
