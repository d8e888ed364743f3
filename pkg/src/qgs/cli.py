"""Command-line front end.

Every command writes a CSV table (stdout, or ``--out``) and, with ``--out``,
a JSON summary next to it. Exit status: 0 when all verdicts pass, 2 when an
experiment fails, 1 on input or solver errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments as ex
from .graph import DIRICHLET, GraphError, MetricGraph, circumference, effective_circumference, epsilon_boundary, load_graph
from .secular import SolverConfig, SpectrumError

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

COMMANDS = (
    "spectrum",
    "gaps",
    "mean-gaps",
    "local-weyl",
    "weyl",
    "heat",
    "dominate",
    "star-oracle",
    "supnorm",
    "cesaro",
    "fh-check",
    "circumference",
)


class UsageError(ValueError):
    pass


@dataclass
class Outcome:
    header: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)
    passed: bool | None = None


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def parse_sigma(items: list[str] | None) -> dict[str, float] | None:
    if not items:
        return None
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--sigma expects vertex=value, got {item!r}")
        vid, raw = item.split("=", 1)
        if raw.strip().lower() == "dirichlet":
            out[vid] = DIRICHLET
            continue
        try:
            out[vid] = float(raw)
        except ValueError:
            raise UsageError(f"--sigma value for {vid!r} is not a number: {raw!r}") from None
        if math.isnan(out[vid]):
            raise UsageError(f"--sigma value for {vid!r} is NaN")
    return out


def _positive(name: str, value) -> None:
    if value is not None and not value > 0:
        raise UsageError(f"{name} must be positive, got {value}")


def _config(args) -> SolverConfig:
    return SolverConfig(rank_tol=args.rank_tol, bracket_tol=args.bracket_tol, cross_check=not args.no_cross_check)


def _graph(args) -> MetricGraph:
    if args.graph is None:
        raise UsageError(f"{args.command} needs --graph")
    g = load_graph(args.graph)
    sigma = parse_sigma(args.sigma)
    return g if sigma is None else g.with_sigma(sigma)


def _need_n(args) -> int:
    if args.N is None:
        raise UsageError(f"{args.command} needs --N")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    return args.N


def _report_outcome(rep: ex.ExperimentReport) -> Outcome:
    rows = [[r[k] for k in ("N", "empirical", "limit", "abs_error", "rel_error", *rep.columns)] for r in rep.rows()]
    return Outcome(["N", "empirical", "limit", "abs_error", "rel_error", *rep.columns], rows, rep.summary(), rep.verdict)


def cmd_spectrum(args) -> Outcome:
    g = _graph(args)
    cfg = _config(args)
    if (args.N is None) == (args.Lambda is None):
        raise UsageError("spectrum needs exactly one of --N or --Lambda")
    from .secular import eigenvalues

    res = eigenvalues(g, count=args.N, cutoff=args.Lambda, config=cfg)
    rows = []
    n = 0
    for lam, m in res.eigenvalues:
        for _ in range(m):
            n += 1
            if args.N is None or n <= args.N:
                rows.append([n, lam, m])
    diag = res.diagnostics
    summary = {
        "command": "spectrum",
        "graph": g.fingerprint(),
        "count": len(rows),
        "rank_mismatch": len(diag["rank_mismatch"]),
        "cross_check_failures": sum(1 for c in diag["cross_check"] if not c["ok"]),
    }
    return Outcome(["n", "lambda", "multiplicity"], rows, summary, None)


def cmd_gaps(args) -> Outcome:
    g = _graph(args)
    seq = ex.gap_sequence(g, None, _need_n(args), args.reference, _config(args))
    return Outcome(["n", "lambda_sigma", "lambda_reference", "d"], [list(e) for e in seq.entries], {"command": "gaps", "reference": args.reference}, None)


def cmd_mean_gaps(args) -> Outcome:
    g = _graph(args)
    fn = ex.mean_gap_hat if args.hat else ex.mean_gap
    return _report_outcome(fn(g, None, _need_n(args), tolerance=args.tol if args.tol is not None else 0.02, config=_config(args)))


def _point(args, g):
    if not args.point:
        raise UsageError(f"{args.command} needs --point")
    return args.point[0]


def cmd_local_weyl(args) -> Outcome:
    g = _graph(args)
    rep = ex.local_weyl(g, None, _point(args, g), _need_n(args), tolerance=args.tol if args.tol is not None else 0.05, config=_config(args))
    return _report_outcome(rep)


def cmd_weyl(args) -> Outcome:
    g = _graph(args)
    if args.Lambda is None:
        raise UsageError("weyl needs --Lambda")
    w = ex.weyl_counting(g, None, args.Lambda)
    tol = args.tol if args.tol is not None else 0.05
    checked = w.count >= 200
    passed = abs(w.ratio - 1.0) <= tol if checked else True
    summary = {"command": "weyl", "count": w.count, "weyl": w.weyl, "ratio": w.ratio, "checked": checked, "verdict": "PASS" if passed else "FAIL"}
    return Outcome(["Lambda", "count", "weyl", "ratio"], [[w.Lambda, w.count, w.weyl, w.ratio]], summary, passed)


def cmd_heat(args) -> Outcome:
    g = _graph(args)
    times = args.t or [1e-3]
    tol = args.tol if args.tol is not None else 0.05
    rows = []
    ok = True
    for t in times:
        _positive("--t", t)
        h = ex.heat_kernel_diag(g, None, _point(args, g), t, args.trunc_tol, _config(args))
        ok &= abs(h.ratio - 1.0) <= tol
        rows.append([t, h.value, h.asymptote, h.ratio, h.terms, h.tail_bound])
    summary = {"command": "heat", "point": args.point[0], "tolerance": tol, "verdict": "PASS" if ok else "FAIL"}
    return Outcome(["t", "value", "asymptote", "ratio", "terms", "tail_bound"], rows, summary, ok)


def cmd_dominate(args) -> Outcome:
    g = _graph(args)
    if not args.point:
        raise UsageError("dominate needs at least one --point")
    times = args.t or [1e-3, 1e-2, 1e-1, 1.0, 10.0]
    r = ex.heat_domination_check(g, None, args.point, times, args.sigma_hat, args.v_hat, args.trunc_tol, _config(args))
    rows = [[s["t"], s["point"], s["p"], s["dominating"], s["violation"]] for s in r.samples]
    summary = {
        "command": "dominate",
        "sigma_hat": r.sigma_hat,
        "v_hat": r.v_hat,
        "max_violation": r.max_violation,
        "verdict": "PASS" if r.verdict else "FAIL",
    }
    return Outcome(["t", "point", "p", "dominating", "violation"], rows, summary, r.verdict)


def cmd_star_oracle(args) -> Outcome:
    if args.l is None or args.star_sigma is None:
        raise UsageError("star-oracle needs --l and --sigma VALUE")
    n = _need_n(args)
    so = ex.star_oracle(args.l, args.star_sigma, n)
    passed = so.even_gap <= 1e-8 * max(1.0, float(so.spectrum[-1]))
    rows = [[i + 1, lam] for i, lam in enumerate(so.spectrum)]
    summary = {"command": "star-oracle", "l": args.l, "sigma": args.star_sigma, "even_gap": so.even_gap, "verdict": "PASS" if passed else "FAIL"}
    return Outcome(["n", "lambda"], rows, summary, passed)


def cmd_supnorm(args) -> Outcome:
    g = _graph(args)
    s = ex.sup_norm_scan(g, None, _need_n(args), _config(args))
    rows = [[i + 1, lam, sup, bnd] for i, (lam, sup, bnd) in enumerate(zip(s.lam, s.sup_norms, s.bounds))]
    summary = {"command": "supnorm", "bounded": s.bounded, "stable": s.stable(), "max_sup": float(s.sup_norms.max()), "verdict": "PASS" if s.verdict else "FAIL"}
    return Outcome(["n", "lambda", "sup_norm", "sobolev_bound_sq"], rows, summary, s.verdict)


def cmd_cesaro(args) -> Outcome:
    g = _graph(args)
    rep = ex.cesaro_bound_scan(g, None, _need_n(args), args.point or (), tolerance=args.tol if args.tol is not None else 0.1, config=_config(args))
    return _report_outcome(rep)


def cmd_fh_check(args) -> Outcome:
    g = _graph(args)
    n_max = _need_n(args)
    tol = args.tol if args.tol is not None else 1e-6
    rows = []
    ok = True
    for n in range(1, n_max + 1):
        r = ex.feynman_hellmann_check(g, None, n, args.tau_nodes, config=_config(args))
        ok &= r.defect <= tol
        rows.append([n, r.reconstructed, r.direct, r.defect, len(r.degenerate_nodes)])
    summary = {"command": "fh-check", "tau_nodes": args.tau_nodes, "tolerance": tol, "verdict": "PASS" if ok else "FAIL"}
    return Outcome(["n", "reconstructed", "direct", "defect", "degenerate_nodes"], rows, summary, ok)


def cmd_circumference(args) -> Outcome:
    g = _graph(args)
    eff = effective_circumference(g) if not g.has_dirichlet else ""
    boundary = ""
    if args.eps is not None and not g.has_dirichlet:
        boundary = " ".join(sorted(epsilon_boundary(g, args.eps)))
    row = [g.total_length, circumference(g), eff, boundary]
    return Outcome(["total_length", "circumference", "effective_circumference", "epsilon_boundary"], [row], {"command": "circumference"}, None)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "gaps": cmd_gaps,
    "mean-gaps": cmd_mean_gaps,
    "local-weyl": cmd_local_weyl,
    "weyl": cmd_weyl,
    "heat": cmd_heat,
    "dominate": cmd_dominate,
    "star-oracle": cmd_star_oracle,
    "supnorm": cmd_supnorm,
    "cesaro": cmd_cesaro,
    "fh-check": cmd_fh_check,
    "circumference": cmd_circumference,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", type=Path, help="graph description (JSON)")
    common.add_argument("--N", type=int, help="number of eigenvalues (or largest index)")
    common.add_argument("--Lambda", type=float, help="spectral cutoff")
    common.add_argument("--sigma", action="append", metavar="V=VALUE", help="override a vertex coupling (repeatable; VALUE may be 'dirichlet')")
    common.add_argument("--point", action="append", help="vertex id or edge:x (repeatable where it makes sense)")
    common.add_argument("--out", type=Path, help="CSV output path; a JSON summary is written next to it")
    common.add_argument("--seed", type=int, default=0, help="seed recorded with randomized checks")
    common.add_argument("--tol", type=float, help="verdict tolerance")
    common.add_argument("--rank-tol", type=float, default=1e-7)
    common.add_argument("--bracket-tol", type=float, default=1e-12)
    common.add_argument("--trunc-tol", type=float, default=1e-12)
    common.add_argument("--no-cross-check", action="store_true", help="skip the finite-element count check")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qgs", description="Spectra of Schroedinger operators on metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "gaps":
            sp.add_argument("--reference", choices=("neumann", "free"), default="neumann")
        elif name == "mean-gaps":
            sp.add_argument("--hat", action="store_true", help="compare with the free Neumann operator")
        elif name in ("heat", "dominate"):
            sp.add_argument("--t", type=float, action="append", help="time (repeatable)")
            if name == "dominate":
                sp.add_argument("--sigma-hat", type=float)
                sp.add_argument("--v-hat", type=float)
        elif name == "star-oracle":
            sp.add_argument("--l", type=float)
            sp.set_defaults(star_sigma=None)
        elif name == "fh-check":
            sp.add_argument("--tau-nodes", type=int, default=ex.DEFAULT_TAU_NODES)
        elif name == "circumference":
            sp.add_argument("--eps", type=float)
    return p


def _csv_text(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.header)
    for row in outcome.rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "star-oracle":
            # --sigma is a plain number here, not a vertex override
            if args.sigma:
                if len(args.sigma) != 1:
                    raise UsageError("star-oracle takes a single --sigma VALUE")
                try:
                    args.star_sigma = float(args.sigma[0])
                except ValueError:
                    raise UsageError(f"--sigma must be a number for star-oracle, got {args.sigma[0]!r}") from None
        for name in ("tol", "rank_tol", "bracket_tol", "trunc_tol"):
            _positive("--" + name.replace("_", "-"), getattr(args, name))
        outcome = HANDLERS[args.command](args)
    except (UsageError, GraphError, FileNotFoundError, IsADirectoryError, SpectrumError, ex.ExperimentError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    summary = dict(outcome.summary)
    summary.setdefault("command", args.command)
    summary["seed"] = args.seed
    text = _csv_text(outcome)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        args.out.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)
    if outcome.passed is not None:
        print(f"{args.command}: {'PASS' if outcome.passed else 'FAIL'}", file=sys.stderr)
    if outcome.passed is False:
        return EXIT_FAIL
    return EXIT_PASS


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
