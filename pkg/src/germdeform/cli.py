"""Command line front end.

Every subcommand reads a strict JSON config (unknown keys are rejected so
typos fail loudly), writes deterministic artifacts into --out, and prints a
one-line summary. Exit codes: 0 success, 2 bad configuration, 3 numerical
or domain failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any


from . import cremer as cremer_mod
from .beltrami import field_to_csv
from .cycles import cycles_to_csv, find_cycles
from .errors import ConfigError, ToolkitError
from .germ import Germ
from .koenigs import build_chart
from .local_deform import LocalConjugacy, holomorphy_residual, measure_multiplier
from .render import field_magnitude_raster, mesh_raster, to_ppm, MESH_LINES
from .straighten import (
    Box,
    Deformation,
    box_for,
    global_deform,
    motion_sample,
    DEFAULT_GRID,
    DEFAULT_PAD,
    MOTION_GRID,
    SOLVER_TOL,
)

_REQUIRED = object()


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config: %s" % exc) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config is not valid JSON: %s" % exc) from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return data


def _take(cfg: dict, key: str, kinds, default=_REQUIRED):
    if key not in cfg:
        if default is _REQUIRED:
            raise ConfigError("missing config key %r" % key)
        return default
    val = cfg.pop(key)
    if kinds is not None and not isinstance(val, kinds):
        raise ConfigError("config key %r has wrong type" % key)
    return val


def _finish(cfg: dict):
    if cfg:
        raise ConfigError("unknown config keys: %s" % sorted(cfg))


def _complex_pair(val, what: str) -> complex:
    if not (isinstance(val, list) and len(val) == 2):
        raise ConfigError("%s must be a [re, im] pair" % what)
    try:
        return complex(float(val[0]), float(val[1]))
    except (TypeError, ValueError) as exc:
        raise ConfigError("%s must hold numbers" % what) from exc


def _germ_from(cfg: dict) -> Germ:
    data = _take(cfg, "germ", dict)
    try:
        return Germ.from_json(data)
    except ToolkitError as exc:
        raise ConfigError("bad germ: %s" % exc) from exc


def _box_from(cfg: dict, germ: Germ) -> Box:
    data = _take(cfg, "box", dict, None)
    if data is None:
        return box_for(germ)
    data = dict(data)
    center = _complex_pair(_take(data, "center", list, [0.0, 0.0]), "box center")
    hw = _take(data, "half_width", (int, float))
    _finish(data)
    return Box(center, float(hw))


def _deformations_from(cfg: dict) -> list[Deformation]:
    raw = _take(cfg, "deformations", list)
    if not raw:
        raise ConfigError("deformations must be a nonempty list")
    out = []
    for item in raw:
        if not isinstance(item, dict):
            raise ConfigError("each deformation must be an object")
        item = dict(item)
        order = _take(item, "order", int)
        target = _complex_pair(_take(item, "target", list), "deformation target")
        idx = _take(item, "cycle_index", int, 0)
        _finish(item)
        out.append(Deformation(order=order, target=target, cycle_index=idx))
    return out


def _write(out_dir: Path, name: str, payload) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    if isinstance(payload, bytes):
        path.write_bytes(payload)
    else:
        path.write_text(payload, encoding="utf-8")
    return path


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---- subcommands ---------------------------------------------------------


def _cmd_cycles(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    orders = _take(cfg, "orders", list)
    _finish(cfg)
    if not orders or not all(isinstance(q, int) and q >= 1 for q in orders):
        raise ConfigError("orders must be a nonempty list of positive integers")
    all_cycles = []
    for q in orders:
        all_cycles.extend(find_cycles(germ, q))
    _write(out, "cycles.csv", cycles_to_csv(all_cycles))
    summary = {
        "germ": germ.to_json(),
        "orders": orders,
        "count": len(all_cycles),
        "kinds": {
            kind: sum(1 for c in all_cycles if c.kind == kind)
            for kind in ("attracting", "indifferent", "repelling")
        },
        "critical": sum(1 for c in all_cycles if c.critical),
    }
    _write(out, "cycles.json", _dump_json(summary))
    print("cycles: %d found, wrote cycles.csv" % len(all_cycles))
    return 0


def _cmd_koenigs(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    order = _take(cfg, "order", int)
    cycle_index = _take(cfg, "cycle_index", int, 0)
    base_index = _take(cfg, "base_index", int, 0)
    _finish(cfg)
    reps = [c for c in find_cycles(germ, order) if c.kind == "repelling"]
    if not (0 <= cycle_index < len(reps)):
        raise ConfigError(
            "cycle_index %d out of range, %d repelling cycles of order %d"
            % (cycle_index, len(reps), order)
        )
    chart = build_chart(germ, reps[cycle_index], base_index)
    _write(out, "chart.json", _dump_json(chart.to_json()))
    print(
        "koenigs: chart at %.6g%+.6gi, radius %.6g"
        % (chart.center.real, chart.center.imag, chart.radius)
    )
    return 0


def _cmd_deform_local(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    order = _take(cfg, "order", int)
    cycle_index = _take(cfg, "cycle_index", int, 0)
    target = _complex_pair(_take(cfg, "target", list), "target")
    _finish(cfg)
    reps = [c for c in find_cycles(germ, order) if c.kind == "repelling"]
    if not (0 <= cycle_index < len(reps)):
        raise ConfigError("cycle_index out of range")
    lc = LocalConjugacy.build(germ, reps[cycle_index], target)
    measured = measure_multiplier(lc)
    rel = abs(measured - target) / abs(target)
    r = lc.working_radius()
    res_deformed = holomorphy_residual(
        lc.deformed_return_map, lc.cycle.base, r, auto_shrink=True
    )
    report = {
        "germ": germ.to_json(),
        "order": order,
        "cycle_index": cycle_index,
        "source_multiplier": [lc.cycle.multiplier.real, lc.cycle.multiplier.imag],
        "target": [target.real, target.imag],
        "measured": [measured.real, measured.imag],
        "relative_error": rel,
        "shear_mu": [lc.shear.mu.real, lc.shear.mu.imag],
        "working_radius": r,
        "deformed_map_residual": res_deformed,
    }
    _write(out, "deform_local.json", _dump_json(report))
    print(
        "deform-local: measured %.12g%+.12gi, relative error %.3g"
        % (measured.real, measured.imag, rel)
    )
    return 0


def _cmd_straighten(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    deformations = _deformations_from(cfg)
    box = _box_from(cfg, germ)
    n = _take(cfg, "grid", int, DEFAULT_GRID)
    tol = _take(cfg, "solver_tol", (int, float), SOLVER_TOL)
    pad = _take(cfg, "pad", int, DEFAULT_PAD)
    _finish(cfg)
    if args.grid is not None:
        n = args.grid
    if args.tol is not None:
        tol = args.tol
    dg = global_deform(germ, deformations, box=box, n=n, tol=float(tol), pad=pad)
    measured = []
    for i, d in enumerate(deformations):
        m = dg.measure_multiplier(i)
        measured.append(
            {
                "order": d.order,
                "target": [d.target.real, d.target.imag],
                "measured": [m.real, m.imag],
                "relative_error": abs(m - d.target) / abs(d.target),
            }
        )
    _write(out, "gridmap.bin", dg.grid_map.to_bytes())
    side = dg.grid_map.sidecar()
    side["deformations"] = measured
    _write(out, "gridmap.json", _dump_json(side))
    worst = max(m["relative_error"] for m in measured)
    print("straighten: grid %d, worst multiplier error %.3g" % (n, worst))
    return 0


def _cmd_motion(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    t_values = [_complex_pair(v, "t value") for v in _take(cfg, "t_values", list)]
    points = [_complex_pair(v, "sample point") for v in _take(cfg, "points", list)]
    orders = _take(cfg, "orders", list, [1])
    n = _take(cfg, "grid", int, MOTION_GRID)
    tol = _take(cfg, "solver_tol", (int, float), 1e-10)
    pad = _take(cfg, "pad", int, DEFAULT_PAD)
    _finish(cfg)
    if not t_values or not points:
        raise ConfigError("t_values and points must be nonempty")
    if not all(isinstance(q, int) and q >= 1 for q in orders):
        raise ConfigError("orders must be positive integers")
    if args.grid is not None:
        n = args.grid
    if args.tol is not None:
        tol = args.tol
    lines = ["t_re,t_im,point_re,point_im,image_re,image_im"]
    for t in t_values:
        images = motion_sample(germ, t, points, orders=orders, n=n, tol=float(tol), pad=pad)
        for p, im in zip(points, images):
            lines.append(
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
                % (t.real, t.imag, p.real, p.imag, im.real, im.imag)
            )
    _write(out, "motion.csv", "\n".join(lines) + "\n")
    print("motion: %d parameter values, %d points" % (len(t_values), len(points)))
    return 0


def _cmd_cremer(cfg: dict, out: Path, args) -> int:
    preset = _take(cfg, "preset", str, None)
    quotients = _take(cfg, "quotients", list, None)
    degree = _take(cfg, "degree", int)
    window = _take(cfg, "window", int, None)
    count = _take(cfg, "count", int, 40)
    seed = _take(cfg, "seed", int, 2)
    _finish(cfg)
    if (preset is None) == (quotients is None):
        raise ConfigError("give exactly one of preset or quotients")
    if preset is not None:
        if preset == "golden":
            quots = cremer_mod.golden_quotients(count)
        elif preset == "pell":
            quots = cremer_mod.pell_quotients(count)
        elif preset == "tower":
            quots = cremer_mod.tower_quotients(seed=seed, count=count)
        else:
            raise ConfigError("unknown preset %r" % preset)
    else:
        if not all(isinstance(a, int) for a in quotients):
            raise ConfigError("quotients must be integers")
        quots = tuple(quotients)
    cf = cremer_mod.ContinuedFraction(quots)
    margin = cremer_mod.cremer_margin(cf, degree, window)
    _write(out, "cremer.csv", cremer_mod.margin_rows_csv(cf, degree))
    _write(
        out,
        "cremer.json",
        _dump_json(
            {
                "degree": degree,
                "window": window,
                "quotient_count": len(quots),
                "margin": margin,
                "satisfied": margin > 0,
            }
        ),
    )
    print("cremer: margin %.6g (%s)" % (margin, "satisfied" if margin > 0 else "not satisfied"))
    return 0


def _cmd_render(cfg: dict, out: Path, args) -> int:
    germ = _germ_from(cfg)
    deformations = _deformations_from(cfg)
    box = _box_from(cfg, germ)
    n = _take(cfg, "grid", int, 512)
    tol = _take(cfg, "solver_tol", (int, float), SOLVER_TOL)
    pad = _take(cfg, "pad", int, DEFAULT_PAD)
    lines = _take(cfg, "lines", int, MESH_LINES)
    with_csv = _take(cfg, "field_csv", bool, False)
    _finish(cfg)
    if args.grid is not None:
        n = args.grid
    if args.tol is not None:
        tol = args.tol
    dg = global_deform(germ, deformations, box=box, n=n, tol=float(tol), pad=pad)
    nodes = box.nodes(n)
    mu = dg.field.sample_grid(nodes)
    _write(out, "field.ppm", to_ppm(field_magnitude_raster(mu)))
    _write(out, "mesh.ppm", to_ppm(mesh_raster(dg.grid_map, lines=lines)))
    if with_csv:
        _write(out, "field.csv", field_to_csv(nodes, mu))
    print("render: wrote field.ppm and mesh.ppm at grid %d" % n)
    return 0


_COMMANDS = {
    "cycles": _cmd_cycles,
    "koenigs": _cmd_koenigs,
    "deform-local": _cmd_deform_local,
    "straighten": _cmd_straighten,
    "motion": _cmd_motion,
    "cremer": _cmd_cremer,
    "render": _cmd_render,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="germdeform",
        description="deform repelling cycle multipliers of polynomial germs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid", type=int, default=None, help="override grid size")
        p.add_argument("--tol", type=float, default=None, help="override solver tolerance")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](cfg, Path(args.out), args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
