"""Command-line front end.

    fracreset run <file>            every analysis the scenario requests
    fracreset simulate <file>       trajectory, resets and metrics only
    fracreset df <kind> ...         describing-function table
    fracreset stability <file>      H_beta search and Lyapunov probe
    fracreset reproduce-paper       regression over the bundled examples

Exit codes: 0 success, 1 a reproduction check failed, 2 invalid scenario,
3 numerical or IO error (the error is written to stderr as JSON).
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .describing import df_table, numerical_df, write_df_csv, DescribingFunctionPoint
from .errors import FracResetError, SchemaViolation
from .fode import MemoryMode
from .models import ResetElement
from .scenario import load_scenario
from .simreset import simulate, step_metrics
from .stability import stability_report

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_NUMERIC = 0, 1, 2, 3


def worker_count(n_jobs):
    """Pool size: ``FRAC_RESET_THREADS`` if set, else the CPU count, capped by jobs."""
    cap = os.environ.get("FRAC_RESET_THREADS")
    try:
        limit = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        limit = 1
    return max(1, min(limit, n_jobs))


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _apply_overrides(scn, step=None, horizon=None, memory_mode=None, beta_range=None):
    if beta_range is not None:
        lo, hi = beta_range
        if not lo < hi:
            raise SchemaViolation("beta range needs lo < hi")
        scn = replace(scn, stability=replace(scn.stability, beta_range=[lo, hi]))
    sim = scn.simulation
    if step is not None:
        sim = replace(sim, step=float(step))
    if horizon is not None:
        sim = replace(sim, horizon=float(horizon))
    if memory_mode is not None:
        sim = replace(sim, memory_mode=MemoryMode(memory_mode).value)
    if not 0 < sim.step < sim.horizon:
        raise SchemaViolation("need 0 < step < horizon")
    return replace(scn, simulation=sim)


def execute(scn, out_dir, analyses=None):
    """Run the requested analyses of a parsed scenario and write artifacts.

    Returns a dict of the headline results keyed by analysis.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    todo = set(analyses if analyses is not None else scn.analyses)
    system = scn.system()
    results = {}

    if todo & {"simulate", "metrics"}:
        traj = simulate(system, scn.simulation.config())
        if "simulate" in todo:
            traj.to_csv(out / f"{scn.name}_trajectory.csv")
            traj.resets_to_json(out / f"{scn.name}_resets.json")
        if "metrics" in todo:
            ref = scn.simulation.reference
            m = step_metrics(traj, r=ref if isinstance(ref, float) else 1.0)
            metrics = {k: _clean(v) for k, v in vars(m).items()}
            metrics.update(n_resets=len(traj.reset_times), step=scn.simulation.step,
                           horizon=scn.simulation.horizon,
                           memory_mode=scn.simulation.memory_mode)
            with open(out / f"{scn.name}_metrics.json", "w") as fh:
                json.dump(metrics, fh, indent=2)
            results["metrics"] = metrics

    if "df" in todo:
        el = scn.reset_element.element()
        points = df_table([el], scn.df.omegas, scn.df.amplitude)
        write_df_csv(points, out / f"{scn.name}_df.csv")
        if scn.df.numerical:
            num = [DescribingFunctionPoint(el.kind, el.alpha, scn.df.amplitude, float(w),
                                           numerical_df(el, scn.df.amplitude, float(w)))
                   for w in scn.df.omegas]
            write_df_csv(num, out / f"{scn.name}_df_numerical.csv")
        results["df"] = [[p.omega, p.value.real, p.value.imag] for p in points]

    if "stability" in todo:
        st = scn.stability
        report = stability_report(system, st.P_R, tuple(st.beta_range), st.sample_betas)
        report.to_json(out / f"{scn.name}_stability.json")
        if st.sample_betas and report.h_beta is not None:
            report.phase_csv(out / f"{scn.name}_phase.csv", st.sample_betas)
        results["stability"] = report.to_dict()
    return results


def _error_json(exc):
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def run_scenario(path, out_dir=".", analyses=None, **overrides):
    """Load, run and report one scenario file; returns ``(exit_code, results)``."""
    try:
        scn = _apply_overrides(load_scenario(path), **overrides)
        return EXIT_OK, execute(scn, out_dir, analyses)
    except SchemaViolation as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_SCHEMA, None
    except (FracResetError, ArithmeticError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_NUMERIC, None


def _run_job(job):
    path, out_dir, analyses, overrides = job
    return run_scenario(path, out_dir, analyses, **overrides)


def run_many(jobs):
    """Run ``(path, out_dir, analyses, overrides)`` jobs, one scenario per worker."""
    n = worker_count(len(jobs))
    if n == 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_job, jobs))


def _pair(text, name):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name} must be numbers separated by commas")
    return parts


def _cmd_df(args):
    lo, hi, *rest = _pair(args.omega_range, "--omega-range") + [None]
    n = int(rest[0]) if rest and rest[0] else 50
    omegas = np.logspace(np.log10(lo), np.log10(hi), n)
    el = ResetElement(args.kind, args.K, args.b, args.alpha)
    points = df_table([el], omegas)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{el.kind.lower()}_alpha{el.alpha:g}"
    write_df_csv(points, out / f"{stem}_df.csv")
    if args.numerical:
        num = [DescribingFunctionPoint(el.kind, el.alpha, 1.0, float(w),
                                       numerical_df(el, 1.0, float(w),
                                                    memory_mode=args.memory_mode or "offset"))
               for w in omegas]
        write_df_csv(num, out / f"{stem}_df_numerical.csv")
    return EXIT_OK


def _cmd_reproduce(args):
    from .reproduction import reproduce
    return reproduce(args.subset, args.out_dir)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--step", type=float, help="override simulation step")
    common.add_argument("--horizon", type=float, help="override simulation horizon")
    common.add_argument("--memory-mode", choices=[m.value for m in MemoryMode],
                        help="GL history treatment at a reset")
    common.add_argument("--out-dir", default=".", help="directory for output files")

    p = argparse.ArgumentParser(prog="fracreset", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run every analysis listed in a scenario"),
                           ("simulate", "simulate a scenario and write trajectory/metrics"),
                           ("stability", "H_beta stability report for a scenario")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("file")
        if name == "stability":
            sp.add_argument("--beta-range", help="lo,hi")
    d = sub.add_parser("df", parents=[common], help="describing-function table")
    d.add_argument("kind", choices=["CI", "FORE", "FCI", "FI", "II"], type=str.upper)
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--K", type=float, default=1.0)
    d.add_argument("--b", type=float, default=0.0)
    d.add_argument("--omega-range", default="0.01,100,50", help="lo,hi[,n] log-spaced")
    d.add_argument("--numerical", action="store_true", help="also write the simulated estimate")
    r = sub.add_parser("reproduce-paper", parents=[common],
                       help="compare bundled examples against published values")
    r.add_argument("--subset", choices=["sim", "df", "stab", "props"], action="append",
                   help="restrict to some check groups (repeatable)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {"step": args.step, "horizon": args.horizon, "memory_mode": args.memory_mode}
    try:
        if args.command == "df":
            return _cmd_df(args)
        if args.command == "reproduce-paper":
            return _cmd_reproduce(args)
        if args.command == "run":
            return run_scenario(args.file, args.out_dir, None, **overrides)[0]
        if args.command == "simulate":
            return run_scenario(args.file, args.out_dir, ["simulate", "metrics"], **overrides)[0]
        beta = _pair(args.beta_range, "--beta-range") if args.beta_range else None
        if beta is not None and len(beta) != 2:
            raise argparse.ArgumentTypeError("--beta-range needs exactly lo,hi")
        return run_scenario(args.file, args.out_dir, ["stability"], beta_range=beta,
                            **overrides)[0]
    except SchemaViolation as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_SCHEMA
    except argparse.ArgumentTypeError as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_SCHEMA
    except (FracResetError, ArithmeticError, ValueError, OSError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
