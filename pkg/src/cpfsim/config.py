"""Scenario configuration: strict YAML schema, builders, fragment writer.

Units throughout: meters, seconds, radians, m/s, rad/s, 1/m.  Unknown keys
are rejected everywhere so typos fail loudly.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path as FsPath

import yaml

from .exceptions import ConfigError
from .param_design import CoordParams, SpeedLimits, design_coordination_set
from .paths import CirclePath, LinePath, SplinePath, waypoints_from_lonlat
from .simulator import Scenario, UavSpec

_NUM = (int, float)

TOP_KEYS = {"limits", "params", "coordination", "chi", "paths", "uavs",
            "run", "output", "escape"}
OUTPUT_DEFAULTS = {"dir": "out", "trace": "trace.csv", "metrics": "metrics.json",
                   "events": "events.csv", "long": "long.csv", "long_every": 10}


def bundled_config_path(name: str) -> FsPath:
    """Filesystem path of a packaged example config (e.g. 'circle6')."""
    return FsPath(str(resources.files("cpfsim") / "configs" / f"{name}.yaml"))


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _num(d: dict, key: str, where: str, default=None, required=False) -> float:
    if key not in d:
        if required:
            raise ConfigError(f"{where}: missing required key '{key}'")
        return default
    v = d[key]
    if not isinstance(v, _NUM) or isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {type(v).__name__}")
    return float(v)


def _pair(v, where: str) -> tuple[float, float]:
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(x, _NUM) for x in v)):
        raise ConfigError(f"{where}: expected [x, y] numbers")
    return float(v[0]), float(v[1])


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _check_keys(cfg, TOP_KEYS, str(path))
    return cfg


def build_limits(cfg: dict) -> SpeedLimits:
    block = cfg.get("limits")
    if not isinstance(block, dict):
        raise ConfigError("missing 'limits' section")
    _check_keys(block, {"v_min", "v_max", "omega_max", "kappa_bound"}, "limits")
    limits = SpeedLimits(
        v_min=_num(block, "v_min", "limits", required=True),
        v_max=_num(block, "v_max", "limits", required=True),
        omega_max=_num(block, "omega_max", "limits", required=True),
        kappa_bound=_num(block, "kappa_bound", "limits", required=True),
    )
    limits.validate()
    return limits

_PARAM_FIELDS = {"psi_max", "rho_max", "v_coord", "rho_universe", "alpha",
                 "speed_margin", "k1", "k2", "k3", "eps_switch", "chi_blend",
                 "chi_delta1", "chi_delta2", "sign_eps"}
_DESIGN_KEYS = {"speed_margin", "alpha"} | (_PARAM_FIELDS - {"psi_max", "rho_max", "v_coord"})


def resolve_params(cfg: dict) -> CoordParams:
    """Explicit parameter block, or run the designer on a design directive."""
    limits = build_limits(cfg)
    spacing = _num(cfg.get("coordination", {}), "spacing", "coordination", default=0.0)
    block = cfg.get("params")
    if not isinstance(block, dict):
        raise ConfigError("missing 'params' section ('design' or 'explicit')")
    _check_keys(block, {"design", "explicit"}, "params")
    if ("design" in block) == ("explicit" in block):
        raise ConfigError("params: give exactly one of 'design' or 'explicit'")

    if "design" in block:
        d = block["design"] or {}
        _check_keys(d, _DESIGN_KEYS, "params.design")
        kwargs = {k: float(d[k]) for k in d if k not in ("speed_margin", "alpha")}
        if _num(d, "speed_margin", "params.design", default=1.0) <= 0.0:
            raise ConfigError("params.design.speed_margin must be > 0")
        return design_coordination_set(
            limits,
            speed_margin=_num(d, "speed_margin", "params.design", default=1.0),
            alpha=_num(d, "alpha", "params.design", default=0.01),
            spacing=spacing, **kwargs)

    e = block["explicit"] or {}
    _check_keys(e, _PARAM_FIELDS, "params.explicit")
    for key in ("psi_max", "rho_max", "v_coord"):
        if key not in e:
            raise ConfigError(f"params.explicit: missing required key '{key}'")
    fields = {k: float(v) for k, v in e.items()}
    r0 = 1.0 / limits.kappa_bound
    fields.setdefault("rho_universe", 0.9 * (r0 - limits.v_min / limits.omega_max))
    fields.setdefault("k2", fields["rho_max"] / fields["psi_max"] + 1.0)
    params = CoordParams(v_min=limits.v_min, v_max=limits.v_max,
                         omega_max=limits.omega_max, kappa_bound=limits.kappa_bound,
                         spacing=spacing, **fields)
    params.validate_basic()
    return params


def build_paths(cfg: dict, kappa_bound: float) -> list:
    block = cfg.get("paths")
    if not isinstance(block, list) or not block:
        raise ConfigError("'paths' must be a non-empty list")
    out = []
    for i, p in enumerate(block):
        where = f"paths[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(f"{where}: expected a mapping")
        kind = p.get("kind")
        if kind == "circle":
            _check_keys(p, {"kind", "center", "radius", "direction"}, where)
            out.append(CirclePath(
                center=_pair(p.get("center", [0.0, 0.0]), f"{where}.center"),
                radius=_num(p, "radius", where, required=True),
                direction=p.get("direction", "ccw"),
                kappa_bound=kappa_bound))
        elif kind == "line":
            _check_keys(p, {"kind", "origin", "heading", "horizon"}, where)
            out.append(LinePath(
                origin=_pair(p.get("origin", [0.0, 0.0]), f"{where}.origin"),
                heading=_num(p, "heading", where, default=0.0),
                kappa_bound=kappa_bound,
                horizon=_num(p, "horizon", where, default=1.0e5)))
        elif kind == "bspline":
            _check_keys(p, {"kind", "waypoints", "lonlat", "lonlat_origin",
                            "offset", "lut_step"}, where)
            if ("waypoints" in p) == ("lonlat" in p):
                raise ConfigError(f"{where}: give exactly one of 'waypoints' or 'lonlat'")
            if "waypoints" in p:
                wps = [_pair(w, f"{where}.waypoints") for w in p["waypoints"]]
            else:
                if "lonlat_origin" not in p:
                    raise ConfigError(f"{where}: 'lonlat' requires 'lonlat_origin'")
                wps = waypoints_from_lonlat(
                    [_pair(w, f"{where}.lonlat") for w in p["lonlat"]],
                    _pair(p["lonlat_origin"], f"{where}.lonlat_origin"))
            if "offset" in p:
                ox, oy = _pair(p["offset"], f"{where}.offset")
                wps = [(x + ox, y + oy) for x, y in wps]
            out.append(SplinePath(wps, kappa_bound=kappa_bound,
                                  lut_step=_num(p, "lut_step", where, default=0.1)))
        else:
            raise ConfigError(f"{where}: unknown path kind {kind!r}")
    return out


def build_scenario(cfg: dict, *, duration=None, dt=None, seed=None) -> Scenario:
    params = resolve_params(cfg)
    paths = build_paths(cfg, params.kappa_bound)

    coord = cfg.get("coordination", {})
    _check_keys(coord, {"spacing", "topology", "parents"}, "coordination")
    topology = coord.get("topology", "cyclic")
    parents = {}
    if "parents" in coord:
        if not isinstance(coord["parents"], dict):
            raise ConfigError("coordination.parents must be a mapping")
        for k, v in coord["parents"].items():
            if not isinstance(k, int) or not (v is None or isinstance(v, int)):
                raise ConfigError("coordination.parents must map int ids to int ids")
            parents[k] = v

    chi = cfg.get("chi", {"kind": "coordination"})
    _check_keys(chi, {"kind", "slope"}, "chi")
    chi_kind = chi.get("kind", "coordination")
    if chi_kind not in ("coordination", "linear"):
        raise ConfigError(f"chi.kind must be 'coordination' or 'linear', got {chi_kind!r}")
    chi_slope = _num(chi, "slope", "chi", default=None)

    uavs_block = cfg.get("uavs")
    if not isinstance(uavs_block, list) or not uavs_block:
        raise ConfigError("'uavs' must be a non-empty list")
    uavs = []
    for i, u in enumerate(uavs_block):
        where = f"uavs[{i}]"
        if not isinstance(u, dict):
            raise ConfigError(f"{where}: expected a mapping")
        _check_keys(u, {"id", "x", "y", "theta", "path", "spawn_time"}, where)
        if not isinstance(u.get("id"), int):
            raise ConfigError(f"{where}: integer 'id' required")
        uavs.append(UavSpec(
            id=u["id"],
            x=_num(u, "x", where, required=True),
            y=_num(u, "y", where, required=True),
            theta=_num(u, "theta", where, required=True),
            path_index=int(_num(u, "path", where, default=0)),
            spawn_time=_num(u, "spawn_time", where, default=0.0)))

    run = cfg.get("run", {})
    _check_keys(run, {"duration", "dt", "seed", "threads"}, "run")
    scenario = Scenario(
        params=params, paths=paths, uavs=uavs,
        duration=_num(run, "duration", "run", default=100.0) if duration is None else duration,
        dt=_num(run, "dt", "run", default=0.01) if dt is None else dt,
        topology=topology, parents=parents,
        chi_kind=chi_kind, chi_slope=chi_slope,
        seed=int(_num(run, "seed", "run", default=0)) if seed is None else seed)
    scenario.validate()
    return scenario


def run_threads(cfg: dict) -> int:
    return int(_num(cfg.get("run", {}), "threads", "run", default=1))


def output_spec(cfg: dict) -> dict:
    out = dict(OUTPUT_DEFAULTS)
    block = cfg.get("output", {})
    _check_keys(block, set(OUTPUT_DEFAULTS), "output")
    out.update(block)
    return out


def escape_spec(cfg: dict) -> dict:
    block = cfg.get("escape", {})
    _check_keys(block, {"eps0", "kappa", "state_grid", "control_grid", "dt"}, "escape")
    grid = block.get("state_grid", [20, 20])
    ctrl = block.get("control_grid", [21, 21])
    return {
        "eps0": _num(block, "eps0", "escape", default=None),
        "kappa": _num(block, "kappa", "escape", default=0.0),
        "state_grid": (int(grid[0]), int(grid[1])),
        "control_grid": (int(ctrl[0]), int(ctrl[1])),
        "dt": _num(block, "dt", "escape", default=0.01),
    }


def params_fragment(params: CoordParams) -> str:
    """YAML fragment pinning the designed parameters as an explicit block."""
    lines = ["params:", "  explicit:"]
    for key in sorted(_PARAM_FIELDS):
        lines.append(f"    {key}: {getattr(params, key)!r}")
    return "\n".join(lines) + "\n"
