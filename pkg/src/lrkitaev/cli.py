"""Command-line interface.

Every command writes CSV (with ``#`` metadata lines) or JSON to stdout or
``--out``. Numbers are printed with 12 significant digits, so identical
invocations produce identical bytes. Exit codes: 0 success, 2 bad flags or
arguments, 3 numerical failures (including failed checks); errors are
reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .analysis import compare
from .asymptotics import (gap_closing_coefficient, jump_angle, jump_coefficient, modulated_jump_angles,
                          predict_log_coefficient)
from .corr import build_correlation
from .errors import LRKError, ParameterError
from .model import (AUTO, BOUNDARIES, LATTICE, LIMIT, ChainParams, dispersion, gap_closing_momentum,
                    is_unit_exponent, symbol)
from .oracle import compare_with_correlation
from .spectral import ScanResult, entropy, entropy_scan
from .toeplitzlab import (chain_block_symbol, discontinuity_coefficient, fit_log_coefficient,
                          szego_linear_term, widom_identity_residual)

SCHEMA = "lrkitaev-output/1"
ORACLE_TOL = 1e-7
TOEPLITZ_FIT_RTOL = 0.02
WIDOM_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def _fmt(value):
    """Round floats to 12 significant digits for deterministic output."""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    return value


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"range must look like a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ParameterError(f"bad range {text!r}: {exc}") from None
    if n < 1:
        raise ParameterError("range needs n >= 1")
    return np.linspace(a, b, n)


def _window(text):
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ParameterError(f"window must look like min:max, got {text!r}")
    lo = float(parts[0]) if parts[0] else None
    hi = float(parts[1]) if parts[1] else None
    return lo, hi


def _params(args) -> ChainParams:
    mode = args.mode
    if mode == AUTO:
        mode = LIMIT if is_unit_exponent(args.zeta) and args.ring_size is None else LATTICE
    return ChainParams(args.h, args.zeta, args.phi, mode, args.ring_size, args.boundary)


def _metadata(command: str, params: ChainParams = None, **extra) -> dict:
    meta = {"tool": f"lrkitaev {__version__}", "command": command}
    if params is not None:
        meta.update(params.to_dict())
    meta.update(extra)
    return meta


def _emit_csv(out, meta: dict, header, rows):
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    out.write(buf.getvalue())


def _emit_json(out, meta: dict, data):
    doc = {"schema": SCHEMA, "metadata": _fmt(meta), "data": _fmt(data)}
    out.write(json.dumps(doc, indent=2) + "\n")


def _emit(args, meta, header, rows, data):
    if args.format == "json":
        _emit_json(args.stream, meta, data)
    else:
        _emit_csv(args.stream, meta, header, rows)


def _xlens(args):
    if args.xlen:
        return np.array(sorted(set(args.xlen)))
    if args.xmax < args.xmin or args.xmin < 1:
        raise ParameterError("need 1 <= xmin <= xmax")
    return np.unique(np.round(np.geomspace(args.xmin, args.xmax, args.points)).astype(int))


# --- commands ---------------------------------------------------------------


def cmd_symbol(args):
    params = _params(args)
    sample = symbol(params, args.theta, args.side)
    lam = dispersion(params, args.theta, args.side)
    meta = _metadata("symbol", params, theta=sample.theta, side=args.side or "plus", dispersion=lam)
    rows = [(r, c, sample.matrix[r, c].real, sample.matrix[r, c].imag) for r in range(2) for c in range(2)]
    data = {"theta": sample.theta, "dispersion": lam,
            "matrix": [[[v.real, v.imag] for v in row] for row in sample.matrix]}
    if params.mode == LIMIT and params.phi == 0.0:
        angle = jump_angle(params.h)
        meta.update(cos_xi=angle.cos_xi, sin_xi=angle.sin_xi)
        data.update(cos_xi=angle.cos_xi, sin_xi=angle.sin_xi)
    _emit(args, meta, ["row", "col", "re", "im"], rows, data)
    return 0


def cmd_entropy(args):
    params = _params(args)
    if not args.xlen or len(args.xlen) != 1:
        raise ParameterError("entropy needs exactly one --xlen")
    x = args.xlen[0]
    corr = build_correlation(params, x)
    s = entropy(corr, args.alpha)
    meta = _metadata("entropy", params, alpha=args.alpha, **corr.metadata)
    _emit(args, meta, ["xlen", "entropy"], [(x, s)], {"xlen": x, "entropy": s})
    return 0


def _scan_output(args, scan: ScanResult, command="scan"):
    meta = _metadata(command, scan.params, alpha=scan.alpha, **scan.metadata)
    rows = list(zip(scan.xlens.tolist(), scan.entropies.tolist()))
    data = {"xlen": scan.xlens.tolist(), "entropy": scan.entropies.tolist()}
    _emit(args, meta, ["xlen", "entropy"], rows, data)


def cmd_scan(args):
    scan = entropy_scan(_params(args), args.alpha, _xlens(args), jobs=args.jobs)
    _scan_output(args, scan)
    return 0


def cmd_predict(args):
    params = _params(args)
    pred = predict_log_coefficient(params, args.alpha)
    meta = _metadata("predict", params, alpha=args.alpha, total=pred.total, regime=pred.regime)
    rows = [(c.theta, c.coefficient, c.source) for c in pred.contributions]
    _emit(args, meta, ["theta", "B", "source"], rows, pred.to_dict())
    return 0


def read_scan_csv(path: str) -> ScanResult:
    """Read a scan written by ``lrkitaev scan --format csv``."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    if not rows or rows[0] != ["xlen", "entropy"]:
        raise ParameterError(f"{path}: not a scan CSV (header {rows[0] if rows else None})")
    try:
        ring = meta.get("ring_size", "None")
        params = ChainParams(float(meta["h"]), float(meta["zeta"]), float(meta["phi"]), meta["mode"],
                             None if ring == "None" else int(ring), meta.get("boundary", AUTO))
        alpha = float(meta["alpha"])
    except KeyError as exc:
        raise ParameterError(f"{path}: missing metadata field {exc}") from None
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return ScanResult(params, alpha, data[:, 0].astype(int), data[:, 1], {})


def cmd_compare(args):
    if args.input:
        scan = read_scan_csv(args.input)
    else:
        scan = entropy_scan(_params(args), args.alpha, _xlens(args), jobs=args.jobs)
    pred = predict_log_coefficient(scan.params, scan.alpha)
    report = compare(scan, pred, _window(args.window))
    meta = _metadata("compare", scan.params, alpha=scan.alpha, window=f"{report.window[0]}:{report.window[1]}")
    d = report.to_dict()
    rows = [(d["fitted_slope"], d["predicted_B"], d["abs_dev"],
             "" if d["rel_dev"] is None else d["rel_dev"], d["constant"], report.window[0], report.window[1])]
    _emit(args, meta, ["fitted_slope", "predicted_B", "abs_dev", "rel_dev", "constant", "window_min",
                       "window_max"], rows, d)
    return 0


def _predicted_jump_coefficients(params: ChainParams, lam: float) -> dict:
    """Analytic b(lambda) per jump momentum for the chain at zeta = 1."""
    out = {}
    gap = gap_closing_momentum(params.h)
    if params.phi == 0.0:
        out[0.0] = jump_coefficient(lam, jump_angle(params.h)).real
    else:
        b = jump_coefficient(lam, modulated_jump_angles(params.h, params.phi).half_angle).real
        out[-params.phi] = b
        out[params.phi] = b
    if gap is not None and not (params.phi == 0.0 and gap == 0.0):
        key = -math.pi if gap == math.pi else gap
        out[key] = gap_closing_coefficient(lam).real
    return out


def cmd_toeplitz_check(args):
    params = _params(args)
    lam = args.lambda_
    sym = chain_block_symbol(params)
    checks = []

    def check(name, value, expected, tol, relative=False):
        dev = abs(value - expected)
        if relative and expected != 0:
            dev /= abs(expected)
        checks.append({"check": name, "value": value, "expected": expected, "tolerance": tol,
                       "passed": bool(dev <= tol)})

    shifted = sym.shifted(lam)
    check("szego_linear_term", szego_linear_term(shifted).real, math.log(lam * lam - 1.0), 1e-10)
    predicted = _predicted_jump_coefficients(params, lam) if params.mode == LIMIT else {}
    for jump in shifted.jumps:
        expected = predicted.get(jump.theta)
        value = discontinuity_coefficient(jump.minus, jump.plus).real
        if expected is not None:
            check(f"jump_coefficient@{jump.theta:.12g}", value, expected, 1e-10)
    fit = fit_log_coefficient(sym, lam, jobs=args.jobs)
    total = sum(predicted.values()) if predicted else 0.0
    if predicted:
        check("log_coefficient_fit", fit.b_fit.real, total, TOEPLITZ_FIT_RTOL, relative=True)
    elif params.zeta > 1.0 and gap_closing_momentum(params.h) is None:
        # Continuous symbol: no logarithmic term.
        check("log_coefficient_fit", fit.b_fit.real, 0.0, 0.005)
    else:
        checks.append({"check": "log_coefficient_fit", "value": fit.b_fit.real, "expected": None,
                       "tolerance": None, "passed": None})
    rng = np.random.default_rng(args.seed)
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) + 2.0 * np.eye(2)
    for n in (8, 16, 32, 64):
        check(f"widom_identity_n{n}", widom_identity_residual(shifted, c, n), 0.0, WIDOM_TOL)
    meta = _metadata("toeplitz-check", params, **{"lambda": lam, "seed": args.seed})
    rows = [(c_["check"], c_["value"], c_["expected"], c_["tolerance"], c_["passed"]) for c_ in checks]
    _emit(args, meta, ["check", "value", "expected", "tolerance", "passed"], rows, checks)
    return 0 if all(c_["passed"] is not False for c_ in checks) else 3


def cmd_phase_diagram(args):
    if args.h_range is None or args.zeta_range is None:
        raise ParameterError("phase-diagram needs --h-range and --zeta-range")
    hs, zetas = _range(args.h_range), _range(args.zeta_range)
    grid = [(h, z) for z in zetas for h in hs]

    def one(point):
        h, z = point
        mode = LIMIT if is_unit_exponent(z) else LATTICE
        return predict_log_coefficient(ChainParams(h, z, args.phi, mode), args.alpha).total

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        values = list(pool.map(one, grid))
    meta = _metadata("phase-diagram", None, alpha=args.alpha, phi=args.phi, h_range=args.h_range,
                     zeta_range=args.zeta_range)
    rows = [(h, z, b) for (h, z), b in zip(grid, values)]
    data = [{"h": h, "zeta": z, "B": b} for h, z, b in rows]
    _emit(args, meta, ["h", "zeta", "B"], rows, data)
    return 0


def cmd_oracle_check(args):
    n = args.ring_size or 8
    params = ChainParams(args.h, args.zeta, args.phi, LATTICE, n, args.boundary)
    result = compare_with_correlation(params, alphas=(args.alpha,))
    rows = [(x, a, s_ed, s_corr, abs(s_ed - s_corr)) for x, a, s_ed, s_corr in result.rows]
    meta = _metadata("oracle-check", params, tolerance=ORACLE_TOL, max_abs_diff=result.max_abs_diff)
    data = [dict(zip(["xlen", "alpha", "S_exact", "S_correlation", "abs_diff"], r)) for r in rows]
    _emit(args, meta, ["xlen", "alpha", "S_exact", "S_correlation", "abs_diff"], rows, data)
    return 0 if result.max_abs_diff < ORACLE_TOL else 3


COMMANDS = {
    "symbol": cmd_symbol,
    "entropy": cmd_entropy,
    "scan": cmd_scan,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "toeplitz-check": cmd_toeplitz_check,
    "phase-diagram": cmd_phase_diagram,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--h", type=float, default=0.0, help="chemical potential")
    common.add_argument("--zeta", type=float, default=1.0, help="pairing decay exponent")
    common.add_argument("--phi", type=float, default=0.0, help="pairing modulation angle in [0, pi)")
    common.add_argument("--alpha", type=float, default=1.0, help="Renyi index (>= 1)")
    common.add_argument("--mode", choices=["auto", LATTICE, LIMIT], default="auto",
                        help="auto: limit for zeta = 1 without --ring-size, lattice otherwise")
    common.add_argument("--ring-size", type=int, default=None, help="lattice ring size N")
    common.add_argument("--boundary", choices=BOUNDARIES, default=AUTO, help="lattice momentum grid")
    common.add_argument("--xmin", type=int, default=100)
    common.add_argument("--xmax", type=int, default=1000)
    common.add_argument("--points", type=int, default=16, help="geometric number of interval lengths")
    common.add_argument("--xlen", type=int, action="append", help="explicit interval length (repeatable)")
    common.add_argument("--window", default=None, help="fit window min:max (default: |X| >= 50)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")

    parser = _Parser(prog="lrkitaev", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lrkitaev {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("symbol", parents=[common], help="correlation symbol at one momentum")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--side", choices=["plus", "minus"], default=None)
    sub.add_parser("entropy", parents=[common], help="entropy of one interval")
    sub.add_parser("scan", parents=[common], help="entropies over a range of interval lengths")
    sub.add_parser("predict", parents=[common], help="analytic log coefficient")
    p = sub.add_parser("compare", parents=[common], help="fit a scan and compare with the prediction")
    p.add_argument("--input", default=None, help="scan CSV to read instead of computing one")
    p = sub.add_parser("toeplitz-check", parents=[common], help="block Toeplitz determinant checks")
    p.add_argument("--lambda", dest="lambda_", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=20240601)
    p = sub.add_parser("phase-diagram", parents=[common], help="grid of predicted coefficients")
    p.add_argument("--h-range", default=None, help="a:b:n")
    p.add_argument("--zeta-range", default=None, help="a:b:n")
    sub.add_parser("oracle-check", parents=[common], help="exact diagonalization against correlations")
    return parser


def _report_error(exc: BaseException, code: int):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def run(argv=None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.jobs is not None and args.jobs < 1:
            raise ParameterError("--jobs must be >= 1")
        handler = COMMANDS[args.command]
        if args.out:
            with open(args.out, "w", newline="") as fh:
                args.stream = fh
                return handler(args)
        args.stream = sys.stdout
        return handler(args)
    except ValueError as exc:
        return _report_error(exc, 2)
    except LRKError as exc:
        return _report_error(exc, 3)
    except OSError as exc:
        return _report_error(exc, 2)


def main() -> None:
    sys.exit(run())
