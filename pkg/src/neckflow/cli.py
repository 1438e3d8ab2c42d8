"""Command-line surface: build correctors, verify them, run solves and sweeps.

Exit codes: 0 all checks pass, 1 check failures, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import fd
from . import sweeps
from .correctors import build_hierarchy, build_symmetric_green
from .fields import sup_abs
from .geometry import NAMED_PROFILES
from .sweeps import ConfigError, RateReport, RunConfig


def _parse_alphas(text: str) -> tuple:
    try:
        return tuple(sorted({int(a) for a in text.split(",") if a}))
    except ValueError:
        raise ConfigError(f"bad --alpha list {text!r}") from None


def _parse_eps(text: str) -> tuple:
    try:
        return tuple(float(e) for e in text.split(",") if e)
    except ValueError:
        raise ConfigError(f"bad --eps list {text!r}") from None


def _add_common(sp):
    sp.add_argument("--profile", default="sym-quadratic",
                    help=f"named profile {sorted(NAMED_PROFILES)} or JSON path")
    sp.add_argument("--alpha", default="1,2,3", help="comma list within 1,2,3")
    sp.add_argument("--m", type=int, default=2, help="highest derivative order")
    sp.add_argument("--eps", default="1e-2,3e-3,1e-3,3e-4,1e-4",
                    help="comma list, strictly decreasing")
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--format", default="csv,json", help="csv, json or both")


def _config_from_args(args, sweep: bool = True) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = RunConfig.from_json(json.load(fh))
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
    else:
        cfg = RunConfig(
            profile=args.profile,
            alphas=_parse_alphas(args.alpha),
            m_max=args.m,
            eps=_parse_eps(args.eps),
            out_dir=args.out or ".",
            formats=tuple(f for f in args.format.split(",") if f),
            envelopes=getattr(args, "envelopes", False),
            fd_checks=getattr(args, "fd", False),
        )
    return cfg.validate(sweep=sweep)


def _emit_report(report: RateReport, cfg: RunConfig) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    for fmt in cfg.formats:
        path = os.path.join(cfg.out_dir, f"rates-{report.config_digest}.{fmt}")
        sweeps.emit(report, fmt, path)
        print(f"wrote {path}")


def cmd_corrector_build(args) -> int:
    cfg = _config_from_args(args, sweep=False)
    eps = cfg.eps[0]
    prof = cfg.load_profile(eps)
    for alpha in cfg.alphas:
        h = build_hierarchy(prof, alpha, cfg.m_max + 1)
        sups = [sup_abs(h.residual(l), n1=101, n2=17) for l in range(1, h.depth + 1)]
        print(f"alpha={alpha} eps={eps:g}: residual sups "
              + " ".join(f"l{l}={s:.3e}" for l, s in enumerate(sups, 1)))
        if prof.symmetric and alpha == 1:
            hg = build_symmetric_green(prof, cfg.m_max + 1)
            print(f"  green variant: residual sup l{hg.depth}="
                  f"{sup_abs(hg.residual(), n1=101, n2=17):.3e}")
        if args.dump:
            path = os.path.join(cfg.out_dir, f"hierarchy-a{alpha}.sexp")
            os.makedirs(cfg.out_dir, exist_ok=True)
            with open(path, "w") as fh:
                fh.write(h.dump_sexp())
            print(f"  wrote {path}")
    return 0


def cmd_corrector_verify(args) -> int:
    cfg = _config_from_args(args, sweep=False)
    report = sweeps.run(RunConfig(
        profile=cfg.profile, alphas=cfg.alphas, m_max=cfg.m_max, eps=cfg.eps,
        out_dir=cfg.out_dir, formats=cfg.formats,
        structural=True, decay=False, blowup=False))
    for r in report.rows:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check} a={r.alpha} "
              f"{r.window}: measured={r.measured:.3e} tol={r.tolerance:g}")
    _emit_report(report, cfg)
    return 0 if report.all_passed else 1


def cmd_stokes_solve(args) -> int:
    cfg = _config_from_args(args, sweep=False)
    eps = cfg.eps[0]
    prof = cfg.load_profile(eps)
    h = (build_symmetric_green(prof, args.level)
         if prof.symmetric else build_hierarchy(prof, 1, args.level))
    grid = fd.NeckGrid(prof, r=1.5 * prof.R, n1=args.n1, n2=args.n2)
    sol = fd.solve_fields(grid, h.residual(args.level))
    print(f"solved {args.n1}x{args.n2}: residual={sol.residual_rel:.2e} "
          f"div={sol.div_max:.2e} sup|grad w|={fd.sup_grad(sol, prof.R):.4f} "
          f"energy={fd.global_energy(sol):.5e}")
    if args.csv:
        os.makedirs(cfg.out_dir, exist_ok=True)
        path = os.path.join(cfg.out_dir, args.csv)
        fd.export_csv(sol, path)
        print(f"wrote {path}")
    return 0


def cmd_sweep_rates(args) -> int:
    cfg = _config_from_args(args)
    report = sweeps.run(cfg)
    n_fail = sum(not r.passed for r in report.rows)
    for r in report.rows:
        if not r.passed:
            print(f"FAIL {r.check} alpha={r.alpha} m={r.m} s={r.s} "
                  f"predicted={r.predicted} measured={r.measured}")
    print(f"{len(report.rows) - n_fail}/{len(report.rows)} checks passed")
    _emit_report(report, cfg)
    return 0 if n_fail == 0 else 1


def cmd_report_emit(args) -> int:
    with open(args.input) as fh:
        report = sweeps.parse_report(fh.read())
    text = sweeps.emit(report, args.to)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neckflow",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("corrector", help="build or verify corrector hierarchies")
    csub = c.add_subparsers(dest="sub", required=True)
    b = csub.add_parser("build")
    _add_common(b)
    b.add_argument("--dump", action="store_true", help="write s-expression dump")
    b.set_defaults(func=cmd_corrector_build)
    v = csub.add_parser("verify")
    _add_common(v)
    v.add_argument("--config", default=None)
    v.set_defaults(func=cmd_corrector_verify)

    s = sub.add_parser("stokes", help="finite-difference solves on the neck")
    ssub = s.add_subparsers(dest="sub", required=True)
    so = ssub.add_parser("solve")
    _add_common(so)
    so.add_argument("--level", type=int, default=2)
    so.add_argument("--n1", type=int, default=257)
    so.add_argument("--n2", type=int, default=64)
    so.add_argument("--csv", default=None, help="point-cloud output file name")
    so.set_defaults(func=cmd_stokes_solve)

    w = sub.add_parser("sweep", help="full verification sweeps")
    wsub = w.add_subparsers(dest="sub", required=True)
    r = wsub.add_parser("rates")
    _add_common(r)
    r.add_argument("--config", default=None, help="RunConfig JSON path")
    r.add_argument("--envelopes", action="store_true")
    r.add_argument("--fd", action="store_true")
    r.set_defaults(func=cmd_sweep_rates)

    e = sub.add_parser("report", help="re-emit stored reports")
    esub = e.add_subparsers(dest="sub", required=True)
    em = esub.add_parser("emit")
    em.add_argument("--input", required=True, help="JSON report path")
    em.add_argument("--to", default="csv", choices=("csv", "json"))
    em.add_argument("--output", default=None)
    em.set_defaults(func=cmd_report_emit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
