"""Command-line entry point: ``activeflux {run,convergence,mesh-info,list-cases}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..mesh import euler_audit, load_gmsh
from .cases import CASE_NAMES, make_case
from .config import ConfigError, RunConfig, default_config, parse_config
from .norms import format_csv, rate_table
from .runner import convergence_study, mood_flag_fraction, run_case
from .vtk import write_fields

log = logging.getLogger("activeflux")


def _load(source: str) -> RunConfig:
    """A config file path, or the name of a built-in case with default settings."""
    if source in CASE_NAMES and not Path(source).exists():
        return default_config(source)
    return parse_config(source)


def _configure(args) -> RunConfig:
    cfg = _load(args.config)
    return cfg.with_overrides(order=args.order, cfl=args.cfl, t_final=args.tfinal,
                              mood=args.mood, loworder=args.loworder, out=args.out)


def _add_overrides(p):
    p.add_argument("config", help="config file or built-in case name")
    p.add_argument("--order", type=int, choices=(2, 3))
    p.add_argument("--cfl", type=float)
    p.add_argument("--tfinal", type=float)
    p.add_argument("--mood", choices=("on", "off", "no-pad"))
    p.add_argument("--loworder", choices=("rusanov", "roe"))
    p.add_argument("--out", metavar="DIR")


def cmd_run(args) -> int:
    cfg = _configure(args)
    out = cfg.output
    out.directory.mkdir(parents=True, exist_ok=True)
    res = run_case(cfg.case, cfg.time, variant=cfg.variant)
    stem = out.directory / out.stem
    if out.log:
        lines = res.log.lines()
        lines.append(f"# steps={res.log.steps} wall_time={res.log.wall_time:.3f}s "
                     f"flag_fraction={mood_flag_fraction(res):.6f}")
        stem.with_name(out.stem + ".log").write_text("\n".join(lines) + "\n")
    if out.vtk:
        for p in write_fields(res.problem.space, res.state, res.flags, stem):
            print(f"wrote {p}")
    print(f"{cfg.case.name}: order {cfg.case.order}, {res.problem.space.n_triangles} triangles, "
          f"{res.log.steps} steps to t={res.state.time:g}")
    if res.errors is not None:
        for q in ("points", "averages"):
            n = res.errors.get(q)
            print(f"  {q:9s} L1={n.L1:.4e} L2={n.L2:.4e} Linf={n.Linf:.4e}")
    return 0


def cmd_convergence(args) -> int:
    cfg = _configure(args)
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes else None
    reports = convergence_study(cfg.case, sizes, cfg.time, cfg.variant)
    out = cfg.output
    out.directory.mkdir(parents=True, exist_ok=True)
    for quantity in ("points", "averages"):
        text = format_csv(rate_table(reports, quantity))
        name = out.csv if quantity == "points" else out.csv.replace(".csv", "") + "_averages.csv"
        (out.directory / name).write_text(text)
        print(f"# {quantity}")
        sys.stdout.write(text)
    return 0


def cmd_mesh_info(args) -> int:
    mesh = load_gmsh(args.mesh)
    info = euler_audit(mesh)
    print(f"vertices={info['vertices']} edges={info['edges']} triangles={info['triangles']}")
    print(f"boundary_edges={info['boundary_edges']} holes={info['holes']} "
          f"euler_characteristic={info['euler_characteristic']} euler_ok={info['euler_ok']}")
    print(f"h={info['h']:.6e}")
    for tag, count in sorted(info["tags"].items()):
        print(f"tag {tag}: {count} edges")
    return 0


def cmd_list_cases(args) -> int:
    for name in CASE_NAMES:
        print(f"{name:26s} {make_case(name).description}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="activeflux", description="Active Flux solver on triangles")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="simulate one case, write fields and log")
    _add_overrides(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("convergence", help="mesh-refinement study with rate tables")
    _add_overrides(p)
    p.add_argument("--sizes", help="comma separated structured mesh sizes")
    p.set_defaults(func=cmd_convergence)
    p = sub.add_parser("mesh-info", help="counts and Euler-relation audit of a GMSH file")
    p.add_argument("mesh")
    p.set_defaults(func=cmd_mesh_info)
    p = sub.add_parser("list-cases", help="list built-in cases")
    p.set_defaults(func=cmd_list_cases)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
