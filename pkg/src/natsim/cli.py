"""Command-line front end: run configured experiments, emit CSV/JSON artifacts.

One experiment per config file (UTF-8 JSON).  Flags override config keys.
Floats are written with 17 significant digits in lowercase scientific
notation so repeated runs of the same config produce byte-identical CSV
bodies; nothing time-dependent goes into the CSVs (the manifest carries the
wall-clock duration instead).

Exit codes: 0 success, 2 config error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path as FilePath

import numpy as np

from . import __version__
from .analysis import (
    initial_ratio,
    point_source_diagram,
    predict_nat_radius,
    protocol_phase_diagram,
    speed_sweep,
)
from .dynamics import DEFAULT_DT, DEFAULT_STRIDE, BandCoefficients, evolve
from .errors import EpDegenerate, InvalidInput, NatsimError
from .model import EP_TOLERANCE, ControlPoint, _branch_sqrt, eigensystem, spin_polarization
from .paths import path_from_config

EXPERIMENTS = (
    "bands",
    "evolve",
    "speed-sweep",
    "point-source",
    "predict-radius",
    "phase-diagram",
)

OUT_DIR_ENV = "NATSIM_OUT"

TRAJECTORY_HEADER = (
    "t,qx,dgamma,re_c_plus,im_c_plus,re_c_minus,im_c_minus,re_expE,im_expE,"
    "band_index,spin,re_E_plus,im_E_plus,re_E_minus,im_E_minus,log_norm"
)
BANDS_HEADER = "qx,dgamma,re_E_plus,im_E_plus,re_E_minus,im_E_minus,spin_plus,spin_minus,ep_flag"
POINTSOURCE_HEADER = "angle,arclen,qx,dgamma,band_index"
NATFRONT_HEADER = "angle,radius_measured,radius_predicted"
SPEEDSWEEP_HEADER = "speed,band_index_final"
PHASEDIAGRAM_HEADER = "x_m,h,band_index_final"
BOUNDARY_HEADER = "x_m,h_star"


class ConfigError(Exception):
    """Invalid experiment configuration; carries the offending key if known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _fmt(x: float) -> str:
    return f"{float(x):.16e}"


def _write_csv(path: FilePath, header: str, rows) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
            count += 1
    return count


# ---------------------------------------------------------------------------
# Config validation


def _expect_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}", key)
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing required key {key!r} in {where}", key)


def _number(obj: dict, key: str, where: str, *, positive: bool = False) -> float:
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number", key)
    if positive and not val > 0:
        raise ConfigError(f"{where}.{key} must be positive", key)
    if not math.isfinite(val):
        raise ConfigError(f"{where}.{key} must be finite", key)
    return float(val)


def _integer(obj: dict, key: str, where: str, *, minimum: int = 1) -> int:
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{where}.{key} must be an integer", key)
    if val < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}", key)
    return val


def _pair(obj: dict, key: str, where: str) -> tuple[float, float]:
    val = obj[key]
    if not (isinstance(val, list) and len(val) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val)):
        raise ConfigError(f"{where}.{key} must be a [number, number] pair", key)
    return float(val[0]), float(val[1])


def _axis(obj: dict, key: str, where: str) -> np.ndarray:
    """Grid axis: either an explicit list of values or {min, max, n}."""
    val = obj[key]
    if isinstance(val, list):
        if not val or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
            raise ConfigError(f"{where}.{key} must be a non-empty list of numbers", key)
        return np.asarray([float(x) for x in val])
    if isinstance(val, dict):
        _expect_keys(val, {"min", "max", "n"}, {"min", "max", "n"}, f"{where}.{key}")
        lo = _number(val, "min", f"{where}.{key}")
        hi = _number(val, "max", f"{where}.{key}")
        n = _integer(val, "n", f"{where}.{key}")
        return np.linspace(lo, hi, n)
    raise ConfigError(f"{where}.{key} must be a list or a {{min, max, n}} object", key)


def _grid_axis(obj: dict, key: str, where: str) -> np.ndarray:
    val = obj[key]
    if not (isinstance(val, list) and len(val) == 3):
        raise ConfigError(f"{where}.{key} must be [min, max, n]", key)
    lo, hi = val[0], val[1]
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in val[:2]):
        raise ConfigError(f"{where}.{key} bounds must be numbers", key)
    if isinstance(val[2], bool) or not isinstance(val[2], int) or val[2] < 1:
        raise ConfigError(f"{where}.{key} point count must be a positive integer", key)
    return np.linspace(float(lo), float(hi), val[2])


_PROTOCOL_KEYS = {"kind", "direction", "h", "x_m", "origin", "angle", "max_len", "points"}


def _validate_protocol(spec, where: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be an object", "protocol")
    _expect_keys(spec, _PROTOCOL_KEYS, {"kind"}, where)
    kind = spec["kind"]
    if kind not in ("hermitian", "loop", "spike", "ray", "waypoints"):
        raise ConfigError(f"{where}.kind must be one of hermitian/loop/spike/ray/waypoints", "kind")
    if kind == "waypoints":
        pts = spec.get("points")
        if not (isinstance(pts, list) and len(pts) >= 2):
            raise ConfigError(f"{where}.points must list at least two [q, g] pairs", "points")
        for p in pts:
            if not (isinstance(p, list) and len(p) == 2):
                raise ConfigError(f"{where}.points entries must be [q, g] pairs", "points")
    return spec


def _parse_initial(cfg: dict, where: str):
    raw = cfg.get("initial", "lower")
    if isinstance(raw, str):
        if raw not in ("lower", "upper"):
            raise ConfigError(f"{where}.initial must be 'lower', 'upper' or four numbers", "initial")
        return raw
    if isinstance(raw, list) and len(raw) == 4 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
        return BandCoefficients(complex(raw[0], raw[1]), complex(raw[2], raw[3]))
    raise ConfigError(f"{where}.initial must be 'lower', 'upper' or [re_c+, im_c+, re_c-, im_c-]", "initial")


_COMMON_KEYS = {"experiment", "model", "out_dir", "workers", "step", "stride"}

_EXPERIMENT_KEYS = {
    "bands": ({"grid"}, {"grid"}),
    "evolve": ({"protocol", "speed", "initial"}, {"protocol", "speed"}),
    "speed-sweep": ({"protocol", "speeds", "initial"}, {"protocol", "speeds"}),
    "point-source": (
        {"origin", "speed", "initial", "n_rays", "max_arc", "min_samples", "hysteresis"},
        {"origin", "speed"},
    ),
    "predict-radius": ({"origin", "speed", "b0", "initial"}, {"origin", "speed"}),
    "phase-diagram": ({"xm", "h", "speed", "direction"}, {"xm", "h", "speed"}),
}


def validate_config(cfg: dict, experiment: str) -> dict:
    """Check one experiment config against its schema; reject unknown keys."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if "experiment" in cfg and cfg["experiment"] != experiment:
        raise ConfigError(
            f"config is for experiment {cfg['experiment']!r}, requested {experiment!r}",
            "experiment",
        )
    allowed, required = _EXPERIMENT_KEYS[experiment]
    _expect_keys(cfg, _COMMON_KEYS | allowed, required, "config")

    if "model" in cfg:
        if not isinstance(cfg["model"], dict):
            raise ConfigError("config.model must be an object", "model")
        _expect_keys(cfg["model"], {"kappa", "ep_tolerance"}, set(), "config.model")
        if "kappa" in cfg["model"]:
            _number(cfg["model"], "kappa", "config.model", positive=True)
        if "ep_tolerance" in cfg["model"]:
            _number(cfg["model"], "ep_tolerance", "config.model", positive=True)
    if "workers" in cfg:
        _integer(cfg, "workers", "config")
    if "step" in cfg:
        _number(cfg, "step", "config", positive=True)
    if "stride" in cfg and cfg["stride"] is not None:
        _integer(cfg, "stride", "config")
    if "out_dir" in cfg and not isinstance(cfg["out_dir"], str):
        raise ConfigError("config.out_dir must be a string", "out_dir")

    if experiment == "bands":
        grid = cfg["grid"]
        if not isinstance(grid, dict):
            raise ConfigError("config.grid must be an object", "grid")
        _expect_keys(grid, {"q", "g"}, {"q", "g"}, "config.grid")
        _grid_axis(grid, "q", "config.grid")
        _grid_axis(grid, "g", "config.grid")
    elif experiment == "evolve":
        _validate_protocol(cfg["protocol"], "config.protocol")
        _number(cfg, "speed", "config", positive=True)
        _parse_initial(cfg, "config")
    elif experiment == "speed-sweep":
        _validate_protocol(cfg["protocol"], "config.protocol")
        speeds = cfg["speeds"]
        if isinstance(speeds, dict):
            _expect_keys(speeds, {"log_range"}, {"log_range"}, "config.speeds")
            lr = speeds["log_range"]
            if not (isinstance(lr, list) and len(lr) == 3):
                raise ConfigError("config.speeds.log_range must be [lo, hi, n]", "log_range")
        elif isinstance(speeds, list):
            if not speeds or any(isinstance(x, bool) or not isinstance(x, (int, float)) or x <= 0 for x in speeds):
                raise ConfigError("config.speeds must be a non-empty list of positive numbers", "speeds")
        else:
            raise ConfigError("config.speeds must be a list or {log_range}", "speeds")
        _parse_initial(cfg, "config")
    elif experiment == "point-source":
        _pair(cfg, "origin", "config")
        _number(cfg, "speed", "config", positive=True)
        if "n_rays" in cfg:
            _integer(cfg, "n_rays", "config", minimum=4)
        if "max_arc" in cfg:
            _number(cfg, "max_arc", "config", positive=True)
        if "min_samples" in cfg:
            _integer(cfg, "min_samples", "config")
        if "hysteresis" in cfg:
            _number(cfg, "hysteresis", "config", positive=True)
        _parse_initial(cfg, "config")
    elif experiment == "predict-radius":
        _pair(cfg, "origin", "config")
        _number(cfg, "speed", "config", positive=True)
        if "b0" in cfg:
            _pair(cfg, "b0", "config")
        else:
            _parse_initial(cfg, "config")
    elif experiment == "phase-diagram":
        _axis(cfg, "xm", "config")
        _axis(cfg, "h", "config")
        _number(cfg, "speed", "config", positive=True)
        if "direction" in cfg and cfg["direction"] not in ("ccw", "cw"):
            raise ConfigError("config.direction must be 'ccw' or 'cw'", "direction")
    return cfg


# ---------------------------------------------------------------------------
# Experiment runners


def band_surface_scan(
    q_values, g_values, kappa: float = 1.0, ep_tolerance: float = EP_TOLERANCE
):
    """Per-point band energies and eigenstate spins over a control grid.

    Points within ``ep_tolerance`` of the exceptional point are flagged
    rather than fatal: their energies are still reported (both ~0) and the
    spins are NaN.
    """
    rows = []
    nan = float("nan")
    for q in q_values:
        for g in g_values:
            point = ControlPoint(float(q), float(g))
            a = kappa * complex(-point.q, point.g)
            delta_e = _branch_sqrt(1.0 + a * a)
            try:
                eig = eigensystem(point, kappa, ep_tolerance)
                spin_p = spin_polarization(eig.psi_plus)
                spin_m = spin_polarization(eig.psi_minus)
                ep_flag = 0
            except EpDegenerate:
                spin_p = spin_m = nan
                ep_flag = 1
            rows.append((point.q, point.g, delta_e, -delta_e, spin_p, spin_m, ep_flag))
    return rows


def _run_bands(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    qs = _grid_axis(cfg["grid"], "q", "config.grid")
    gs = _grid_axis(cfg["grid"], "g", "config.grid")
    rows = band_surface_scan(qs, gs, ctx["kappa"], ctx["ep_tolerance"])
    count = _write_csv(
        out / "bands.csv",
        BANDS_HEADER,
        (
            [
                _fmt(q),
                _fmt(g),
                _fmt(ep.real),
                _fmt(ep.imag),
                _fmt(em.real),
                _fmt(em.imag),
                _fmt(sp),
                _fmt(sm),
                str(flag),
            ]
            for q, g, ep, em, sp, sm, flag in rows
        ),
    )
    return [("bands.csv", count)]


def _trajectory_rows(traj):
    for s in traj.samples:
        yield [
            _fmt(s.t),
            _fmt(s.point.q),
            _fmt(s.point.g),
            _fmt(s.coeffs.c_plus.real),
            _fmt(s.coeffs.c_plus.imag),
            _fmt(s.coeffs.c_minus.real),
            _fmt(s.coeffs.c_minus.imag),
            _fmt(s.exp_e.real),
            _fmt(s.exp_e.imag),
            _fmt(s.band_index),
            _fmt(s.spin),
            _fmt(s.e_plus.real),
            _fmt(s.e_plus.imag),
            _fmt(s.e_minus.real),
            _fmt(s.e_minus.imag),
            _fmt(s.state.log_norm),
        ]


def _run_evolve(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    path = path_from_config(cfg["protocol"], float(cfg["speed"]))
    traj = evolve(
        path,
        _parse_initial(cfg, "config"),
        kappa=ctx["kappa"],
        dt=ctx["step"],
        sample_stride=ctx["stride"],
        ep_tolerance=ctx["ep_tolerance"],
    )
    count = _write_csv(out / "trajectory.csv", TRAJECTORY_HEADER, _trajectory_rows(traj))
    return [("trajectory.csv", count)]


def _run_speed_sweep(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    speeds = cfg["speeds"]
    if isinstance(speeds, dict):
        lo, hi, n = speeds["log_range"]
        values = [math.exp(x) for x in np.linspace(float(lo), float(hi), int(n))]
    else:
        values = [float(v) for v in speeds]
    curve = speed_sweep(
        cfg["protocol"],
        values,
        _parse_initial(cfg, "config"),
        kappa=ctx["kappa"],
        dt=ctx["step"],
        workers=ctx["workers"],
        ep_tolerance=ctx["ep_tolerance"],
    )
    count = _write_csv(
        out / "speedsweep.csv",
        SPEEDSWEEP_HEADER,
        ([_fmt(v), _fmt(b)] for v, b in curve),
    )
    return [("speedsweep.csv", count)]


def _run_point_source(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    origin = ControlPoint(*_pair(cfg, "origin", "config"))
    speed = float(cfg["speed"])
    initial = _parse_initial(cfg, "config")
    field = point_source_diagram(
        origin,
        initial,
        speed,
        n_rays=cfg.get("n_rays", 360),
        max_arc=cfg.get("max_arc", 2.0),
        kappa=ctx["kappa"],
        dt=ctx["step"],
        min_samples=cfg.get("min_samples", 400),
        hysteresis=cfg.get("hysteresis", 0.02),
        workers=ctx["workers"],
        ep_tolerance=ctx["ep_tolerance"],
    )
    try:
        predicted = predict_nat_radius(origin, initial_ratio(initial), speed, ctx["kappa"]).radius
    except NatsimError:
        predicted = float("nan")

    def ps_rows():
        for ray in field.rays:
            ca, sa = math.cos(ray.angle), math.sin(ray.angle)
            for arc, band in zip(ray.arc_lengths, ray.band_index):
                yield [
                    _fmt(ray.angle),
                    _fmt(arc),
                    _fmt(origin.q + arc * ca),
                    _fmt(origin.g + arc * sa),
                    _fmt(band),
                ]

    n_ps = _write_csv(out / "pointsource.csv", POINTSOURCE_HEADER, ps_rows())
    n_front = _write_csv(
        out / "natfront.csv",
        NATFRONT_HEADER,
        ([_fmt(a), _fmt(r), _fmt(predicted)] for a, r in field.front),
    )
    return [("pointsource.csv", n_ps), ("natfront.csv", n_front)]


def _run_predict_radius(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    origin = ControlPoint(*_pair(cfg, "origin", "config"))
    if "b0" in cfg:
        re, im = _pair(cfg, "b0", "config")
        b0 = complex(re, im)
    else:
        b0 = initial_ratio(_parse_initial(cfg, "config"))
    pred = predict_nat_radius(origin, b0, float(cfg["speed"]), ctx["kappa"])
    payload = {
        "origin": [origin.q, origin.g],
        "speed": float(cfg["speed"]),
        "b0": [b0.real, b0.imag],
        "radius": pred.radius,
        "xi": pred.xi,
        "n0": [pred.n0.real, pred.n0.imag],
        "tau_root": pred.tau_root,
        "t_occur": pred.t_occur,
    }
    with open(out / "prediction.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [("prediction.json", 1)]


def _run_phase_diagram(cfg: dict, ctx: dict, out: FilePath) -> list[tuple[str, int]]:
    xm = _axis(cfg, "xm", "config")
    hs = _axis(cfg, "h", "config")
    diagram = protocol_phase_diagram(
        xm,
        hs,
        float(cfg["speed"]),
        cfg.get("direction", "ccw"),
        kappa=ctx["kappa"],
        dt=ctx["step"],
        workers=ctx["workers"],
        ep_tolerance=ctx["ep_tolerance"],
    )

    def grid_rows():
        for i, x in enumerate(diagram.xm_grid):
            for j, h in enumerate(diagram.h_grid):
                yield [_fmt(x), _fmt(h), _fmt(diagram.band_index_final[i, j])]

    n_grid = _write_csv(out / "phasediagram.csv", PHASEDIAGRAM_HEADER, grid_rows())
    n_bound = _write_csv(
        out / "boundary.csv",
        BOUNDARY_HEADER,
        ([_fmt(x), _fmt(h)] for x, h in diagram.boundary),
    )
    return [("phasediagram.csv", n_grid), ("boundary.csv", n_bound)]


_RUNNERS = {
    "bands": _run_bands,
    "evolve": _run_evolve,
    "speed-sweep": _run_speed_sweep,
    "point-source": _run_point_source,
    "predict-radius": _run_predict_radius,
    "phase-diagram": _run_phase_diagram,
}


def run(experiment: str, cfg: dict, out_dir: FilePath) -> dict:
    """Execute one validated experiment config; returns the manifest dict."""
    ctx = {
        "kappa": float(cfg.get("model", {}).get("kappa", 1.0)),
        "ep_tolerance": float(cfg.get("model", {}).get("ep_tolerance", EP_TOLERANCE)),
        "workers": int(cfg.get("workers", 1)),
        "step": float(cfg.get("step", DEFAULT_DT)),
        "stride": cfg.get("stride", DEFAULT_STRIDE),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    outputs = _RUNNERS[experiment](cfg, ctx, out_dir)
    duration = time.perf_counter() - started
    manifest = {
        "experiment": experiment,
        "version": __version__,
        "duration_seconds": duration,
        "config": cfg,
        "outputs": [{"file": name, "rows": rows} for name, rows in outputs],
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# Entry point


def _locate_key(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="natsim",
        description="Run a configured experiment and write CSV/JSON artifacts.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="path to the experiment JSON config")
    parser.add_argument("--out", help="output directory (overrides config and $NATSIM_OUT)")
    parser.add_argument("--workers", type=int, help="worker process count")
    parser.add_argument("--step", type=float, help="integrator step size")
    parser.add_argument("--stride", type=int, help="sampling stride in steps")
    args = parser.parse_args(argv)

    config_path = FilePath(args.config)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: {config_path}: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"config error: {config_path}:{exc.lineno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        validate_config(cfg, args.experiment)
    except ConfigError as exc:
        line = _locate_key(text, exc.key) if exc.key else None
        at = f"{config_path}:{line}" if line else str(config_path)
        print(f"config error: {at}: {exc}", file=sys.stderr)
        return 2

    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.step is not None:
        cfg["step"] = args.step
    if args.stride is not None:
        cfg["stride"] = args.stride
    out_dir = FilePath(
        args.out or cfg.get("out_dir") or os.environ.get(OUT_DIR_ENV) or "out"
    )

    try:
        manifest = run(args.experiment, cfg, out_dir)
    except NatsimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    files = ", ".join(o["file"] for o in manifest["outputs"])
    print(f"{args.experiment}: wrote {files} in {out_dir} ({manifest['duration_seconds']:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
