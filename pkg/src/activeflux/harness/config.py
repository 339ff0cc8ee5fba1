"""Run configuration files.

Line-oriented ``key = value`` pairs in five sections.  Every key is optional
except ``[case] name``; unknown sections or keys are errors.

    [case]      name, order (2|3), n, mesh (GMSH file), refine (1|2|3),
                variant (positive|sign), norm (integral|mean), sizes (comma list),
                ramp_angle, ramp_start, x_min, x_max, top          (dmr only)
    [time]      cfl (0.4), t_final (case value), paper_stability (no), max_steps
    [mood]      mode (on|off|no-pad), cad, pad, dmp, per_stage, pad_tolerance (1e-5),
                delta0 (1e-4), delta1 (1e-3), plateau_tolerance (1e-10), pad_lo, pad_hi
    [loworder]  flux (rusanov|roe), points (llf|roe_rd), alpha_safety (1.0)
    [output]    dir (.), stem (case name), vtk (yes), log (yes), csv (<stem>_rates.csv)
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..loworder import LowOrderConfig
from ..mood import MoodConfig
from ..timestepping import TimeConfig
from .cases import CASE_NAMES, CaseDefinition, MeshSource, dmr, make_case

SCHEMA = {
    "case": {"name", "order", "n", "mesh", "refine", "variant", "norm", "sizes",
             "ramp_angle", "ramp_start", "x_min", "x_max", "top"},
    "time": {"cfl", "t_final", "paper_stability", "max_steps"},
    "mood": {"mode", "cad", "pad", "dmp", "per_stage", "pad_tolerance", "delta0", "delta1",
             "plateau_tolerance", "pad_lo", "pad_hi"},
    "loworder": {"flux", "points", "alpha_safety"},
    "output": {"dir", "stem", "vtk", "log", "csv"},
}


class ConfigError(ValueError):
    pass


@dataclass
class OutputConfig:
    directory: Path = Path(".")
    stem: str = ""
    vtk: bool = True
    log: bool = True
    csv: str = ""


@dataclass
class RunConfig:
    case: CaseDefinition
    time: TimeConfig
    mood: MoodConfig
    loworder: LowOrderConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    variant: str = "positive"

    def with_overrides(self, order=None, cfl=None, t_final=None, mood=None, loworder=None, out=None):
        """Apply command-line overrides."""
        cfg = self
        if order is not None:
            if order not in (2, 3):
                raise ConfigError(f"order must be 2 or 3, got {order}")
            cfg = replace(cfg, case=cfg.case.with_(order=order))
        if cfl is not None or t_final is not None:
            cfg = replace(cfg, time=TimeConfig(
                cfl=cfl if cfl is not None else cfg.time.cfl,
                t_final=t_final if t_final is not None else cfg.time.t_final,
                paper_stability=cfg.time.paper_stability,
                max_steps=cfg.time.max_steps))
        if mood is not None:
            cfg = replace(cfg, mood=_mood_mode(cfg.mood, mood))
        if loworder is not None:
            cfg = replace(cfg, loworder=replace(cfg.loworder, flux=_lo_flux(loworder)))
        if out is not None:
            cfg = replace(cfg, output=replace(cfg.output, directory=Path(out)))
        cfg.case = cfg.case.with_(mood=cfg.mood, loworder=cfg.loworder)
        return cfg


def _mood_mode(mood: MoodConfig, mode: str) -> MoodConfig:
    if mode == "on":
        return replace(mood, enabled=True, pad=True)
    if mode == "off":
        return replace(mood, enabled=False)
    if mode == "no-pad":
        return replace(mood, enabled=True, pad=False)
    raise ConfigError(f"mood mode must be on, off or no-pad, got {mode!r}")


def _lo_flux(name):
    if name not in ("rusanov", "roe", "roe_hartenyee"):
        raise ConfigError(f"low-order flux must be rusanov or roe, got {name!r}")
    return "roe_hartenyee" if name == "roe" else name


def _line_of(text, section, key):
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            current = m.group(1).strip()
            if current == section and not key:
                return i
        elif key and current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return 0


def _get(sec, key, conv, default, where):
    if key not in sec:
        return default
    raw = sec[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"line {where(key)}: invalid value {raw!r} for {key}: {exc}") from None


def _bool(raw):
    v = raw.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError("expected yes/no")


def _sizes(raw):
    vals = tuple(int(v) for v in raw.replace(",", " ").split())
    if not vals or min(vals) < 1:
        raise ValueError("expected positive integers")
    return vals


def parse_config_text(text: str, base_dir=".") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"line {_line_of(text, section, '')}: unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"line {_line_of(text, section, key)}: unknown key {key!r} in [{section}]")

    def sec(name):
        return parser[name] if parser.has_section(name) else {}

    def where_in(name):
        return lambda key: _line_of(text, name, key)

    c = sec("case")
    if "name" not in c:
        raise ConfigError("[case] name is required")
    name = c["name"].strip()
    if name not in CASE_NAMES:
        raise ConfigError(f"line {_line_of(text, 'case', 'name')}: unknown case {name!r}")
    wc = where_in("case")
    geom = {k: _get(c, k, float, None, wc) for k in ("ramp_angle", "ramp_start", "x_min", "x_max", "top")}
    geom = {("angle_deg" if k == "ramp_angle" else k): v for k, v in geom.items() if v is not None}
    if geom and name != "dmr":
        raise ConfigError("ramp geometry keys apply to the dmr case only")
    case = dmr(geom) if name == "dmr" else make_case(name)

    order = _get(c, "order", int, case.order, wc)
    if order not in (2, 3):
        raise ConfigError(f"line {wc('order')}: order must be 2 or 3, got {order}")
    mesh = case.mesh
    n = _get(c, "n", int, mesh.n, wc)
    refine = _get(c, "refine", int, mesh.refine, wc)
    if refine not in (1, 2, 3):
        raise ConfigError(f"line {wc('refine')}: refine must be 1, 2 or 3")
    if n < 1:
        raise ConfigError(f"line {wc('n')}: n must be positive")
    mesh_file = c.get("mesh")
    if mesh_file:
        mesh_file = str((Path(base_dir) / mesh_file.strip()))
    mesh = MeshSource(mesh.domain, n, mesh_file, refine, mesh.transform)
    variant = c.get("variant", "positive").strip()
    if variant not in ("positive", "sign"):
        raise ConfigError(f"line {wc('variant')}: variant must be positive or sign")
    norm = c.get("norm", case.norm).strip()
    if norm not in ("integral", "mean"):
        raise ConfigError(f"line {wc('norm')}: norm must be integral or mean")
    sizes = _get(c, "sizes", _sizes, case.convergence_sizes, wc)

    t = sec("time")
    wt = where_in("time")
    try:
        time = TimeConfig(
            cfl=_get(t, "cfl", float, 0.4, wt),
            t_final=_get(t, "t_final", float, case.t_final, wt),
            paper_stability=_get(t, "paper_stability", _bool, False, wt),
            max_steps=_get(t, "max_steps", int, 10_000_000, wt),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    mo = sec("mood")
    wm = where_in("mood")
    mood = case.mood
    if "mode" in mo:
        mood = _mood_mode(mood, mo["mode"].strip())
    updates = {}
    for key in ("cad", "pad", "dmp", "per_stage"):
        if key in mo:
            updates[key] = _get(mo, key, _bool, None, wm)
    for key in ("pad_tolerance", "delta0", "delta1", "plateau_tolerance"):
        if key in mo:
            updates[key] = _get(mo, key, float, None, wm)
    if "pad_lo" in mo or "pad_hi" in mo:
        lo, hi = mood.pad_bounds or (-float("inf"), float("inf"))
        updates["pad_bounds"] = (_get(mo, "pad_lo", float, lo, wm), _get(mo, "pad_hi", float, hi, wm))
    try:
        mood = replace(mood, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    lo_sec = sec("loworder")
    wl = where_in("loworder")
    try:
        low = LowOrderConfig(
            flux=_lo_flux(lo_sec.get("flux", case.loworder.flux).strip()),
            points=lo_sec.get("points", case.loworder.points).strip(),
            alpha_safety=_get(lo_sec, "alpha_safety", float, case.loworder.alpha_safety, wl),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    o = sec("output")
    wo = where_in("output")
    stem = o.get("stem", name).strip()
    output = OutputConfig(
        directory=Path(base_dir) / o.get("dir", ".").strip(),
        stem=stem,
        vtk=_get(o, "vtk", _bool, True, wo),
        log=_get(o, "log", _bool, True, wo),
        csv=o.get("csv", f"{stem}_rates.csv").strip(),
    )

    case = case.with_(order=order, mesh=mesh, t_final=time.t_final, mood=mood, loworder=low,
                      norm=norm, convergence_sizes=sizes)
    return RunConfig(case, time, mood, low, output, variant)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, base_dir=path.parent)


def default_config(name: str) -> RunConfig:
    return parse_config_text(f"[case]\nname = {name}\n")
