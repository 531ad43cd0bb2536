"""Command-line interface.

Commands::

    helfrich-flow flow run CONFIG [--plot]
    helfrich-flow circles --case {i,ii,iii,iv,sweep} [--theta T] --lambda L --c0 C
    helfrich-flow verify {gradient,circles,example1,monitors,operators}

Exit codes: 0 success, 1 suite failure, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_SUITE, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_flow_run(config_path, plot: bool = False) -> int:
    from .config import ConfigError, load_config
    from .energy import energy, residual_norms
    from .flow import centroid, run, write_diagnostics_json, write_trajectory_csv

    try:
        cfg = load_config(config_path)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = cfg.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    result = run(cfg.curve0, cfg.spec, cfg.flow)
    write_trajectory_csv(result.snapshots, outdir / "trajectory.csv")
    write_diagnostics_json(result.diagnostics, outdir / "diagnostics.json")
    final = result.state.curve
    summary = {
        "outcome": result.outcome,
        "t": result.state.t,
        "steps": result.state.step,
        "message": result.diagnostics.message,
    }
    if result.outcome != "aborted":
        summary["final_energy"] = energy(final, cfg.spec).to_dict()
        res = residual_norms(final, cfg.spec)
        summary["final_residual"] = {"l2": res.l2, "sup": res.sup}
        d = centroid(final) - centroid(cfg.curve0)
        summary["centroid_displacement"] = [float(x) for x in d]
        if result.state.t > 0:
            summary["mean_centroid_velocity"] = [float(x) / result.state.t for x in d]
    with open(outdir / "summary.json", "w") as fh:
        fh.write(_dumps(summary) + "\n")
    if plot or cfg.plot:
        from .plotting import plot_flow
        plot_flow(result.snapshots, result.diagnostics, outdir)
    print(_dumps(summary))
    return EXIT_ABORT if result.outcome == "aborted" else EXIT_OK


def cmd_circles(case: str, lam: float, c0: float, theta: float | None = None,
                out: str = ".", N: int = 512, plot: bool = False) -> int:
    from .stationary import classify, sweep_figure1, write_figure1_csv

    if not (math.isfinite(lam) and lam > 0):
        print(f"config error: --lambda must be positive, got {lam}", file=sys.stderr)
        return EXIT_CONFIG
    if case == "sweep":
        rows = sweep_figure1(lam, c0, 512)
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        write_figure1_csv(rows, outdir / "figure1.csv")
        counts = sorted({len(r) for _, r in rows})
        if plot:
            from .plotting import plot_figure1
            plot_figure1(rows, outdir / "figure1.png")
        print(_dumps({"case": "sweep", "rows": len(rows), "roots_per_angle": counts,
                      "theta0_radii": rows[0][1], "path": str(outdir / "figure1.csv")}))
        return EXIT_OK
    if case == "iv" and theta is None:
        print("config error: --theta is required for case iv", file=sys.stderr)
        return EXIT_CONFIG
    crit = classify(case, lam, c0, theta or 0.0, N_check=N)
    print(_dumps(crit.to_dict()))
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    from .verify import run_suite

    results = run_suite(suite)
    ok = True
    for r in results:
        print(f"[{r.name}] {r.seconds:.1f}s")
        print(r.table())
        ok &= r.passed
    n_pass = sum(c.passed for r in results for c in r.checks)
    n_all = sum(len(r.checks) for r in results)
    print(f"{n_pass}/{n_all} checks passed")
    return EXIT_OK if ok else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helfrich-flow",
                                description="Helfrich gradient flow of closed curves.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    fl = sub.add_parser("flow", help="run a flow from a config file")
    fsub = fl.add_subparsers(dest="action", required=True)
    fr = fsub.add_parser("run")
    fr.add_argument("config")
    fr.add_argument("--plot", action="store_true", help="also render PNG figures")

    ci = sub.add_parser("circles", help="critical circle radii")
    ci.add_argument("--case", required=True, choices=["i", "ii", "iii", "iv", "sweep"])
    ci.add_argument("--theta", type=float)
    ci.add_argument("--lambda", dest="lam", type=float, default=1.0)
    ci.add_argument("--c0", type=float, default=1.0)
    ci.add_argument("--N", type=int, default=512, help="nodes for the residual check")
    ci.add_argument("--out", default=".", help="directory for figure1.csv")
    ci.add_argument("--plot", action="store_true")

    ve = sub.add_parser("verify", help="run a pinned verification suite")
    ve.add_argument("suite", choices=["gradient", "circles", "example1", "monitors", "operators"])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    np.seterr(all="ignore")
    if args.command == "flow":
        return cmd_flow_run(args.config, args.plot)
    if args.command == "circles":
        return cmd_circles(args.case, args.lam, args.c0, args.theta, args.out, args.N, args.plot)
    return cmd_verify(args.suite)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
