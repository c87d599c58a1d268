"""Batch command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 a suite or estimate recorded violations.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import matform, scalarform, sympoly
from .errors import HesskError
from .matform import AdmissibilityParams
from .verify import (
    SUITES,
    build_ledger,
    estimate_gamma_uniform,
    max_feasible_mu,
    reports_to_csv,
    reports_to_json,
)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS = 0, 1, 2
DEFAULT_FREE_GAMMA = 0.5

MATRIX_FNS = {"Sk", "Fk", "gradFk", "d2F"}
SPECTRUM_FNS = {"sigma", "fk", "gradfk", "hessfk", "d2f", "tilde"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``"4..8,10"`` -> ``[4, 5, 6, 7, 8, 10]``; empty text gives an empty list."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--mu", type=float, help="defaults to the largest value the sampler can always honour")
    p.add_argument("--gamma", type=float, default=DEFAULT_FREE_GAMMA,
                   help="ratio bound for the free degrees (ignored elsewhere)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", type=Path)
    p.add_argument("--output", type=Path)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true", help="write SVG figures next to the output")
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-determinism)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hessk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one function")
    _common(p)
    p.add_argument("--fn", required=True, choices=sorted(MATRIX_FNS | SPECTRUM_FNS))
    p.add_argument("--lam", help="comma-separated spectrum for the scalar functions")
    p.add_argument("--direction", help="matrix JSON file, or comma-separated vector, for second differentials")

    p = sub.add_parser("check-cone", help="cone membership of a spectrum")
    _common(p)
    p.add_argument("--lam", required=True)

    p = sub.add_parser("check-admissible", help="admissible-set membership of a matrix")
    _common(p)

    p = sub.add_parser("estimate-gamma", help="estimate the definiteness constant")
    _common(p)

    p = sub.add_parser("ledger", help="print the constants chain")
    _common(p)

    p = sub.add_parser("verify", help="run an inequality suite")
    _common(p)
    p.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])

    p = sub.add_parser("sweep", help="estimate and check over an (n, k, delta) grid")
    _common(p)
    p.add_argument("--ns", default="4..8", help='e.g. "4..8" or "3,5,7"; empty for no cells')
    p.add_argument("--ks", default="", help="defaults to every k in [2, n-1]")
    p.add_argument("--deltas", default="")
    p.add_argument("--pairs", type=int, default=100, help="d-concavity pairs per cell")
    return parser


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {' '.join(missing)}")


def _schedule(n: int, k: int, gamma: float) -> sympoly.GammaSchedule:
    return sympoly.schedule_for(n, k, gamma)


def _params(args, n: int, k: int) -> AdmissibilityParams:
    sched = _schedule(n, k, args.gamma)
    mu = args.mu
    if mu is None:
        mu = max_feasible_mu(n, AdmissibilityParams(args.delta, 0.0, sched))
    return AdmissibilityParams(args.delta, mu, sched)


def _vector(text: str) -> np.ndarray:
    return np.array(parse_float_list(text), dtype=float)


def _emit(args, payload) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(payload), lineterminator="\n")
        writer.writeheader()
        writer.writerow({k: _flat(v) for k, v in payload.items()})
        text = buf.getvalue()
    _write(args, text)


def _flat(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return v


def cmd_eval(args) -> int:
    fn = args.fn
    _need(args, "k")
    k = args.k
    out = {"fn": fn, "k": k}
    if fn in MATRIX_FNS:
        _need(args, "input")
        r = matform.load_matrix(args.input)
        if fn == "Sk":
            value = matform.S_k(r, k)
        elif fn == "Fk":
            value = matform.F_k(r, k)
        elif fn == "gradFk":
            value = matform.grad_F_k(r, k).tolist()
        else:
            _need(args, "direction")
            value = matform.d2F(r, k, matform.load_matrix(Path(args.direction)))
    else:
        _need(args, "lam")
        lam = _vector(args.lam)
        if fn == "sigma":
            value = sympoly.sigma(k, lam)
        elif fn == "fk":
            value = scalarform.f_k(k, lam)
        elif fn == "gradfk":
            value = scalarform.grad_f_k(k, lam).tolist()
        elif fn == "hessfk":
            value = scalarform.hessian_f_k(k, lam).tolist()
        elif fn == "tilde":
            value = scalarform.tilde_coeff_matrix(k, lam).tolist()
        else:
            _need(args, "direction")
            value = scalarform.d2f(k, lam, _vector(args.direction))
    out["value"] = value
    _emit(args, out)
    return EXIT_OK


def cmd_check_cone(args) -> int:
    lam = _vector(args.lam)
    n = lam.size
    k = args.k if args.k is not None else n
    out = {"n": n, "k": k, "in_gamma_cone": sympoly.in_gamma_cone(lam, k)}
    if 2 <= k <= n - 1 and n >= 3:
        sched = _schedule(n, k, args.gamma)
        out.update(gamma_k=sched.gamma_k, branch=sched.branch.value,
                   in_sigma_gamma=sympoly.in_sigma_gamma(lam, sched))
    _emit(args, out)
    return EXIT_OK


def cmd_check_admissible(args) -> int:
    _need(args, "input", "mu")
    r = matform.load_matrix(args.input)
    n = r.shape[0]
    sched = _schedule(n, args.k, args.gamma) if args.k is not None else None
    params = AdmissibilityParams(args.delta, args.mu, sched)
    out = {"n": n, "k": args.k, "delta": args.delta, "mu": args.mu,
           "gamma_k": None if sched is None else sched.gamma_k,
           "admissible": matform.in_admissible(r, params, args.k)}
    _emit(args, out)
    return EXIT_OK


def cmd_estimate_gamma(args) -> int:
    _need(args, "n", "k")
    sched = _schedule(args.n, args.k, args.gamma)
    est = estimate_gamma_uniform(sched, args.samples, args.seed, strict=False)
    out = est.to_dict()
    out.update(seed=args.seed, branch=sched.branch.value)
    _emit(args, out)
    return EXIT_OK if est.value > 0 and not est.violations else EXIT_VIOLATIONS


def cmd_ledger(args) -> int:
    _need(args, "n", "k")
    sched = _schedule(args.n, args.k, args.gamma)
    est = estimate_gamma_uniform(sched, args.samples, args.seed, strict=False)
    out = build_ledger(args.n, args.k, args.delta, sched, est.value).to_dict()
    out.update(branch=sched.branch.value, seed=args.seed, gamma_budget=args.samples)
    _emit(args, out)
    return EXIT_OK


def _timed(fn, args, *a):
    start = time.perf_counter()
    rep = fn(*a)
    if args.timing:
        rep.wall_ms = round(1000 * (time.perf_counter() - start), 3)
    return rep


def cmd_verify(args) -> int:
    _need(args, "n", "k")
    n, k = args.n, args.k
    params = _params(args, n, k)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    if args.suite == "all" and params.schedule.branch is not sympoly.Branch.MIDRANGE:
        names.remove("prop45")
    reports = [_timed(SUITES[name], args, n, k, params, args.samples, args.seed) for name in names]
    if args.format == "json":
        text = reports[0].to_json() if len(reports) == 1 else reports_to_json(reports)
        text += "\n"
    else:
        text = reports_to_csv(reports)
    _write(args, text)
    return EXIT_VIOLATIONS if any(r.violations for r in reports) else EXIT_OK


def _write(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text)


def _sweep_cell(args, n: int, k: int, delta: float) -> dict:
    row = {"n": n, "k": k, "delta": delta, "gamma_k": None, "branch": None,
           "gamma_estimate": None, "sampled_max_eig": None, "theorem41_violations": None,
           "dconcavity_violations": None, "dconcavity_worst_margin": None, "d": None,
           "seed": args.seed, "error": None}
    try:
        sched = _schedule(n, k, args.gamma)
        row.update(gamma_k=sched.gamma_k, branch=sched.branch.value)
        est = estimate_gamma_uniform(sched, args.samples, args.seed, strict=False)
        row.update(gamma_estimate=est.value, sampled_max_eig=est.sampled_max_eig,
                   theorem41_violations=est.violations + int(est.value <= 0))
        mu = args.mu if args.mu is not None else max_feasible_mu(n, AdmissibilityParams(delta, 0.0, sched))
        rep = SUITES["dconcavity"](n, k, AdmissibilityParams(delta, mu, sched), args.pairs, args.seed)
        row.update(dconcavity_violations=rep.violations,
                   dconcavity_worst_margin=rep.checks["d_concavity"].worst_margin,
                   d=rep.ledger["d"])
    except (HesskError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    ns = parse_int_list(args.ns)
    deltas = parse_float_list(args.deltas) or [args.delta]
    rows = []
    for n in ns:
        ks = parse_int_list(args.ks) if args.ks else list(range(2, n))
        for k in ks:
            if not 2 <= k <= n - 1:
                continue
            for delta in deltas:
                rows.append(_sweep_cell(args, n, k, delta))
    payload = {"sweep": {"ns": ns, "deltas": deltas, "gamma": args.gamma, "samples": args.samples,
                         "pairs": args.pairs, "seed": args.seed}, "rows": rows}
    if args.format == "json":
        _write(args, json.dumps(payload, indent=2) + "\n")
    else:
        _write(args, _sweep_csv(rows))
    if args.plot and rows:
        from . import plotting

        stem = args.output.with_suffix("") if args.output else Path("sweep")
        plotting.plot_gamma_sweep(rows, f"{stem}_gamma.svg")
        plotting.plot_margin_sweep(rows, f"{stem}_margin.svg")
    bad = any(r["error"] or r["theorem41_violations"] or r["dconcavity_violations"] for r in rows)
    return EXIT_VIOLATIONS if bad else EXIT_OK


SWEEP_COLUMNS = ["n", "k", "delta", "gamma_k", "branch", "gamma_estimate", "sampled_max_eig",
                 "theorem41_violations", "dconcavity_violations", "dconcavity_worst_margin", "d",
                 "seed", "error"]


def _sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else _flat(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


COMMANDS = {
    "eval": cmd_eval,
    "check-cone": cmd_check_cone,
    "check-admissible": cmd_check_admissible,
    "estimate-gamma": cmd_estimate_gamma,
    "ledger": cmd_ledger,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, parse errors exit 1
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, HesskError, ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(f"hessk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
