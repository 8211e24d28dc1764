"""Command-line driver: experiment orchestration and machine-readable outputs.

All spin parameters cross the interface as doubled integers (--lmax 24
means lmax = 12).  Every output row carries the provenance tuple
(q, lmax_doubled, precision_bits, seed, version); numbers are written
with 17 significant digits so that identical configurations reproduce
byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .qarith import HalfInteger, QArithError, cg_half, q_number
from .peterweyl import Basis, Truncation, normalization_factor, pw_inner_unnormalized
from .algebra import (GeneratorTable, NCPolynomial, ValidationError, haar_state,
                      is_normal_word, mult_operator, normal_order)
from .gns_oracle import oracle_haar
from .dirac import DiracContext
from . import spectral

OBSERVABLES = ["", "a", "g", "Gg", "Aa", "aG"]  # 1, alpha, gamma, g*g, a*a, a g*


@dataclass
class RunConfig:
    q: float = 1.2
    lmax_doubled: int = 24
    t_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    tolerance: float = 1e-8
    seed: int = 1234
    precision_bits: int = 53
    out: str = ""
    format: str = "csv"

    def __post_init__(self):
        if self.q <= 0 or self.q == 1:
            raise QArithError("config: q must be > 0 and != 1")
        if self.lmax_doubled < 0:
            raise QArithError("config: lmax_doubled must be >= 0")
        if any(t <= 0 for t in self.t_grid):
            raise QArithError("config: t values must be > 0")
        if self.tolerance <= 0:
            raise QArithError("config: tolerance must be > 0")
        if self.format not in ("csv", "json"):
            raise QArithError("config: format must be csv or json")

    @property
    def trunc(self) -> Truncation:
        return Truncation(HalfInteger(self.lmax_doubled))

    def provenance(self) -> dict:
        return {"q": self.q, "lmax_doubled": self.lmax_doubled,
                "precision_bits": self.precision_bits, "seed": self.seed,
                "version": __version__}


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.17g" % x
    if isinstance(x, complex):
        return "%.17g%+.17gj" % (x.real, x.imag)
    return str(x)


def write_rows(path: str, fmt: str, columns: list, rows: list, provenance: dict) -> None:
    cols = columns + list(provenance)
    full = [list(r) + [provenance[k] for k in provenance] for r in rows]
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(_fmt(x) for x in r) for r in full]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([dict(zip(cols, [(_fmt(x) if isinstance(x, (float, complex)) else x)
                                           for x in r])) for r in full], indent=2) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def _word_label(w: str) -> str:
    return w if w else "1"


# ---------------------------------------------------------------- experiments

def run_validate(cfg: RunConfig):
    rows = []
    q = cfg.q

    def record(name, residual, threshold=1e-9):
        rows.append([name, residual, threshold, "PASS" if residual < threshold else "FAIL"])

    # geometric-sum identity on the half-integer grid
    worst = 0.0
    for nd in range(0, 41):
        s = sum(q ** (-jd) for jd in range(-nd, nd + 1, 2))
        worst = max(worst, abs(s - q_number(nd + 1, q)) / max(1.0, abs(s)))
    record("qarith.geometric_sum", worst)

    # CG column normalization and branch orthogonality
    worst_n = worst_o = 0.0
    for ld in range(0, 21):
        for jd in range(-ld - 1, ld + 2, 2):
            pairs = {}
            for br in (1, -1):
                up = cg_half(HalfInteger(1), br, HalfInteger(ld), HalfInteger(jd - 1), q)
                dn = cg_half(HalfInteger(-1), br, HalfInteger(ld), HalfInteger(jd + 1), q)
                pairs[br] = (up, dn)
                if abs(jd) <= ld + br:
                    worst_n = max(worst_n, abs(up * up + dn * dn - 1.0))
            if abs(jd) <= ld - 1:
                dot = pairs[1][0] * pairs[-1][0] + pairs[1][1] * pairs[-1][1]
                worst_o = max(worst_o, abs(dot))
    record("qarith.cg_normalization", worst_n)
    record("qarith.cg_orthogonality", worst_o)

    # Peter-Weyl orthonormality (Gram over spins <= 5)
    worst = 0.0
    small = Basis(Truncation(HalfInteger(min(10, cfg.lmax_doubled))))
    for idx in small.indices:
        g = normalization_factor(idx, q) ** 2 * pw_inner_unnormalized(idx, idx, q)
        worst = max(worst, abs(g - 1.0))
    record("peterweyl.orthonormality", worst)

    # algebra relation battery
    try:
        table = GeneratorTable(q, cfg.trunc)
        for name, residual in table._relation_residuals().items():
            record("algebra.relation[%s]" % name, residual)
    except ValidationError as exc:
        rows.append(["algebra.relation[%s]" % exc.identity, exc.residual, 1e-9, "FAIL"])
        return rows, ["battery", "residual", "threshold", "status"]

    # two-path Haar agreement on monomials of degree <= 4
    worst = 0.0
    for deg in range(5):
        for word in itertools.product("aAgG", repeat=deg):
            w = "".join(word)
            if len(w) > cfg.lmax_doubled:
                continue
            p = NCPolynomial.word(w)
            worst = max(worst, abs(haar_state(p, table) - oracle_haar(p, 80, q)))
    record("oracle.two_path_agreement", worst)

    return rows, ["battery", "residual", "threshold", "status"]


def run_haar(cfg: RunConfig):
    table = GeneratorTable(cfg.q, cfg.trunc)
    dctx = DiracContext(cfg.q, cfg.trunc, table.basis)
    rows = []
    for w in OBSERVABLES:
        p = NCPolynomial.word(w)
        psi = haar_state(p, table)
        for t in cfg.t_grid:
            ratio, tail = spectral.haar_via_heat(p, t, table, dctx)
            err = abs(ratio - psi)
            rows.append(["heat", _word_label(w), t, ratio.real, psi.real, err, tail,
                         "PASS" if err < cfg.tolerance else "FAIL"])
        # same ratio with an unrelated diagonal multiplier in place of the heat kernel
        phi = spectral.rho_trace_functional(p, lambda n: math.exp(-n * (n + 1)), table)
        phi1 = spectral.rho_trace_functional(NCPolynomial.one(),
                                             lambda n: math.exp(-n * (n + 1)), table)
        err = abs(phi / phi1 - psi)
        rows.append(["rho_multiplier", _word_label(w), 0.0, (phi / phi1).real,
                     psi.real, err, 0.0, "PASS" if err < cfg.tolerance else "FAIL"])
    cols = ["method", "observable", "t", "ratio", "psi_reference", "abs_error",
            "tail_bound", "status"]
    return rows, cols


def run_commutators(cfg: RunConfig):
    table = GeneratorTable(cfg.q, cfg.trunc)
    dctx = DiracContext(cfg.q, cfg.trunc, table.basis)
    a = spectral.witness_polynomial(table)
    lmax = cfg.lmax_doubled // 2
    shells = [HalfInteger(2 * s) for s in range(4, min(20, lmax - 1) + 1)]
    series_abs = spectral.absD_commutator_series(a, shells, table, dctx, seed=cfg.seed)
    cap = spectral.absD_commutator_cap(a, table, dctx, seed=cfg.seed)
    ls = list(range(5, min(30, lmax - 1) + 1))
    series_true = spectral.trueD_growth(a, ls, table, dctx)

    plateau = abs(series_abs.values[-1] - series_abs.values[-2]) / series_abs.values[-1]
    ok_abs = plateau < 0.01 and (series_abs.values <= cap).all()
    ok_true = series_true.slope > 0
    print("absD plateau: last two differ %.3e (< 1%%: %s), cap %.6g"
          % (plateau, ok_abs, cap))
    print("trueD growth: slope %.6g intercept %.6g rms residual %.3e"
          % (series_true.slope, series_true.intercept, series_true.fit_residual))

    rows = []
    for sh, nrm in zip(series_abs.params, series_abs.values):
        rows.append(["", "", "", sh, nrm, cap, "PASS" if ok_abs else "FAIL"])
    for l, nrm in zip(series_true.params, series_true.values):
        rows.append([l, nrm, nrm / l, "", "", "", "PASS" if ok_true else "FAIL"])
    cols = ["l", "norm_trueD", "norm_over_l", "shell", "norm_absD", "cap", "status"]
    return rows, cols


def run_heat(cfg: RunConfig):
    rows = []
    svals = []
    band = []
    b = max(cfg.q, 1.0 / cfg.q)
    k = 4 * math.log(b) ** 2
    for t in sorted(cfg.t_grid):
        rep = spectral.heat_trace(t, cfg.q, cfg.trunc, precision_bits=cfg.precision_bits)
        try:
            pts = spectral.asymptotic_band(cfg.q, [t], cfg.trunc,
                                           precision_bits=cfg.precision_bits)
            s = pts[0][1]
        except spectral.PeakOutsideTruncationError:
            s = float("nan")
        band.append((t, rep, s))
        if not math.isnan(s):
            svals.append(s)
    ok = bool(svals) and min(svals) > 0 and max(svals) / min(svals) < 5
    for t, rep, s in band:
        rows.append([t, rep.operator_trace, rep.closed_sum, rep.tail_bound,
                     rep.k_exponent, s, "PASS" if ok else "FAIL"])
    print("heat band: %d points, max/min s = %s"
          % (len(svals), ("%.4f" % (max(svals) / min(svals))) if svals else "n/a"))
    cols = ["t", "operator_trace", "closed_sum", "tail_bound", "k_exponent",
            "s_band", "status"]
    return rows, cols


def run_modular(cfg: RunConfig):
    table = GeneratorTable(cfg.q, cfg.trunc)
    words = [w for n in range(3) for w in
             ("".join(t) for t in itertools.product("aAgG", repeat=n))
             if is_normal_word(w)]
    rows = []
    for wa in words:
        for wb in words:
            defect = spectral.modular_check(NCPolynomial.word(wa),
                                            NCPolynomial.word(wb), table)
            rows.append([_word_label(wa), _word_label(wb), defect,
                         "PASS" if defect < 1e-9 else "FAIL"])
    for rd, sd in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        res = spectral.modular_generator_scaling(rd, sd, table)
        rows.append(["Psi(t[%d,%d])" % (rd, sd), "scaling", res,
                     "PASS" if res < 1e-12 else "FAIL"])
    cols = ["a", "b", "defect", "status"]
    return rows, cols


EXPERIMENTS = {
    "validate": run_validate,
    "haar": run_haar,
    "commutators": run_commutators,
    "heat": run_heat,
    "modular": run_modular,
}


# ----------------------------------------------------------------- plumbing

def parse_t_grid(text: str, log_spaced: bool = False) -> list:
    """start:stop:count, inclusive; optionally log-spaced."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise QArithError("t-grid must be start:stop:count, got %r" % text)
    if count < 1 or start <= 0 or stop <= 0:
        raise QArithError("t-grid needs positive endpoints and count >= 1")
    if count == 1:
        return [start]
    if log_spaced:
        return list(np.logspace(math.log10(start), math.log10(stop), count))
    return list(np.linspace(start, stop, count))


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise QArithError("config file line without '=': %r" % line)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def build_config(args) -> RunConfig:
    values = {}
    if args.config:
        raw = read_config_file(args.config)
        casts = {"q": float, "lmax": int, "tol": float, "seed": int,
                 "precision_bits": int, "out": str, "format": str,
                 "t": float, "t_grid": str, "t_log": lambda v: v.lower() == "true"}
        for key, val in raw.items():
            if key not in casts:
                raise QArithError("unknown config key %r" % key)
            values[key] = casts[key](val)
    for key in ("q", "lmax", "tol", "seed", "precision_bits", "out", "format", "t",
                "t_grid", "t_log"):
        arg = getattr(args, key.replace("-", "_"), None)
        if arg is not None:
            values[key] = arg
    env_bits = os.environ.get("QSU2_PRECISION_BITS")
    if env_bits:
        values["precision_bits"] = int(env_bits)
    if "t_grid" in values and values["t_grid"]:
        t_grid = parse_t_grid(values["t_grid"], values.get("t_log", False))
    elif "t" in values and values["t"] is not None:
        t_grid = [values["t"]]
    else:
        t_grid = [0.5, 1.0, 2.0]
    return RunConfig(q=values.get("q", 1.2),
                     lmax_doubled=values.get("lmax", 24),
                     t_grid=t_grid,
                     tolerance=values.get("tol", 1e-8),
                     seed=values.get("seed", 1234),
                     precision_bits=values.get("precision_bits", 53),
                     out=values.get("out", ""),
                     format=values.get("format", "csv"))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qsu2",
        description="Numerical spectral geometry of SU_q(2): Haar state from "
                    "heat traces, Dirac commutators, modular structure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(EXPERIMENTS) + ["all"]:
        p = sub.add_parser(name)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--lmax", type=int, default=None,
                       help="largest retained spin, as a doubled integer")
        p.add_argument("--t", type=float, default=None)
        p.add_argument("--t-grid", dest="t_grid", type=str, default=None,
                       help="start:stop:count")
        p.add_argument("--t-log", dest="t_log", action="store_true", default=None,
                       help="log-space the t grid")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--precision-bits", dest="precision_bits", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, choices=("csv", "json"), default=None)
        p.add_argument("--config", type=str, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = build_config(args)
    except (QArithError, OSError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 2

    names = list(EXPERIMENTS) if args.command == "all" else [args.command]
    overall_fail = False
    for name in names:
        try:
            rows, cols = EXPERIMENTS[name](cfg)
        except Exception as exc:  # surfaced as a failed experiment, not a crash
            print("%s: ERROR %s" % (name, exc), file=sys.stderr)
            overall_fail = True
            continue
        n_fail = sum(1 for r in rows if r[-1] == "FAIL")
        overall_fail = overall_fail or n_fail > 0
        print("%s: %s (%d rows, %d failures)"
              % (name, "FAIL" if n_fail else "PASS", len(rows), n_fail))
        out = cfg.out
        if out:
            if args.command == "all":
                root, ext = os.path.splitext(out)
                out = "%s_%s%s" % (root, name, ext or ".csv")
            write_rows(out, cfg.format, cols, rows, cfg.provenance())
    return 1 if overall_fail else 0


if __name__ == "__main__":
    sys.exit(main())
