"""Command-line entry point.

Thin shell over the library: parameter design, scenario simulation, the
verification suites and the escape-set demo.  Flags can also be supplied
through CPFSIM_* environment variables (flag wins over variable).

Exit codes: 0 ok, 1 validation/configuration error, 2 runtime abort,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path as FsPath

from . import config as cfgmod
from .exceptions import ConfigError, CpfsimError, Infeasible, OutsideUniverse
from .param_design import check_feasibility_precondition, coordination_rate_bound
from .simulator import escape_demo, run_scenario
from .verification import run_suites

ENV_PREFIX = "CPFSIM_"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name.upper())


def _resolve(args: argparse.Namespace, name: str, cast=str):
    value = getattr(args, name, None)
    if value is None:
        raw = _env(name)
        if raw is not None:
            try:
                value = cast(raw)
            except ValueError:
                raise ConfigError(f"bad value for {ENV_PREFIX}{name.upper()}: {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpfsim",
        description="Coordinated path following for speed-constrained fixed-wing UAVs")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config file (YAML)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--threads", type=int, help="worker threads")

    p = sub.add_parser("design-params", help="design the coordination-set parameters")
    common(p)

    p = sub.add_parser("simulate", help="run a scenario and write trace/metrics")
    common(p)
    p.add_argument("--dt", type=float, help="integration step override (s)")
    p.add_argument("--duration", type=float, help="duration override (s)")

    p = sub.add_parser("verify", help="run the invariant/reachability suites")
    common(p)
    p.add_argument("--suite", action="append",
                   help="suite name filter (repeatable); default: all")

    p = sub.add_parser("demo-escape", help="escape-set brute-force demonstration")
    common(p)
    return parser


def _load(args):
    path = _resolve(args, "config")
    if not path:
        raise ConfigError("no config given (use --config or CPFSIM_CONFIG)")
    return cfgmod.load_config(path)


def _out_dir(args, cfg) -> FsPath:
    out = _resolve(args, "out") or cfgmod.output_spec(cfg)["dir"]
    path = FsPath(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_design_params(args) -> int:
    cfg = _load(args)
    limits = cfgmod.build_limits(cfg)
    block = cfg.get("params", {}).get("design")
    if block is None:
        raise ConfigError("design-params needs a params.design section")
    speed_margin = float(block.get("speed_margin", 1.0))
    alpha = float(block.get("alpha", 0.01))
    if not check_feasibility_precondition(limits, speed_margin):
        if limits.kappa_bound > limits.omega_max / limits.v_max:
            raise Infeasible("curvature bound exceeds omega_max/v_max")
        raise Infeasible("v_min + speed_margin exceeds v_max")
    params = cfgmod.resolve_params(cfg)

    rows = [("psi_max (rad)", params.psi_max),
            ("rho_max (m)", params.rho_max),
            ("v_coord (m/s)", params.v_coord),
            ("area proxy psi_max*rho_max", params.psi_max * params.rho_max),
            ("rho_universe (m)", params.rho_universe),
            ("spacing-rate bound (m/s)", coordination_rate_bound(params))]
    rows += [(f"slack {k}", v) for k, v in sorted(params.constraint_slacks().items())]
    width = max(len(r[0]) for r in rows)
    print("designed coordination-set parameters")
    for name, value in rows:
        print(f"  {name:<{width}}  {value:.9g}")

    out = _out_dir(args, cfg)
    fragment = out / "params_fragment.yaml"
    fragment.write_text(cfgmod.params_fragment(params), encoding="utf-8")
    print(f"wrote {fragment}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    scenario = cfgmod.build_scenario(
        cfg,
        duration=_resolve(args, "duration", float),
        dt=_resolve(args, "dt", float),
        seed=_resolve(args, "seed", int))
    threads = _resolve(args, "threads", int) or cfgmod.run_threads(cfg)
    trace, metrics = run_scenario(scenario, threads=threads)

    out = _out_dir(args, cfg)
    spec = cfgmod.output_spec(cfg)
    trace.write_csv(out / spec["trace"])
    trace.write_events_csv(out / spec["events"])
    trace.write_long_csv(out / spec["long"], every=int(spec["long_every"]))
    with open(out / spec["metrics"], "w", encoding="utf-8") as fh:
        json.dump(metrics.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    m = metrics.to_dict()
    print(f"simulated {scenario.duration:g}s x {len(scenario.uavs)} UAVs "
          f"(dt={scenario.dt:g}s, threads={threads})")
    print(f"  all-in-coordination-set time: {m['all_in_s1_time']}")
    print(f"  overtake events before/after: {m['overtake_events_before']}"
          f"/{m['overtake_events_after']}")
    for uav_id, pm in m["per_uav"].items():
        print(f"  UAV {uav_id}: entry={pm['s1_entry_time']} "
              f"max|rho|={pm['max_abs_rho_final']:.4g} "
              f"max|psi|={pm['max_abs_psi_final']:.4g} "
              f"|zeta-L|={pm['final_zeta_error']:.4g}")
    print(f"wrote {out / spec['trace']}, {out / spec['metrics']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args)
    scenario = cfgmod.build_scenario(cfg)
    names = getattr(args, "suite", None)
    if names is None:
        raw = _env("suite")
        names = [raw] if raw else None
    seed = _resolve(args, "seed", int) or 0
    threads = _resolve(args, "threads", int) or 1
    results = run_suites(scenario.params, scenario.paths[0],
                         names=names, seed=seed, threads=threads)
    all_ok = True
    for r in results:
        print(r.summary())
        all_ok &= r.passed
    return EXIT_OK if all_ok else EXIT_VERIFY


def cmd_demo_escape(args) -> int:
    cfg = _load(args)
    params = cfgmod.resolve_params(cfg)
    spec = cfgmod.escape_spec(cfg)
    report = escape_demo(params, eps0=spec["eps0"], state_grid=spec["state_grid"],
                         control_grid=spec["control_grid"], kappa=spec["kappa"],
                         dt=spec["dt"])
    print(report.summary())
    out = _out_dir(args, cfg)
    with open(out / "escape_report.json", "w", encoding="utf-8") as fh:
        json.dump(vars(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "design-params": cmd_design_params,
        "simulate": cmd_simulate,
        "verify": cmd_verify,
        "demo-escape": cmd_demo_escape,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, Infeasible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutsideUniverse, CpfsimError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
