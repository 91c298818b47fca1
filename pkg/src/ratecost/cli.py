"""Batch front end: JSON experiment configs in, tables on stdout, CSV/JSON
files and an SVG tradeoff plot out.

Subcommands: bound, simulate, sweep, decompose, validate.  Exit status is 1
when a hard assert fails (curve dominance, distortion guarantee, failed
validation), 2 on config errors, 0 otherwise.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .riccati import b_min, solve_control, solve_filter
from .simloop import (SimConfig, TradeoffPoint, decompose_cost, run, sweep,
                      tradeoff_point)
from .sysmodel import FAMILIES, LinearPlant, NoiseModel, validate

CSV_COLUMNS = ("d", "b_hat", "h_hat_nats", "h_hat_bits", "lower_bound_nats",
               "upper_bound_nats", "c_hat", "e_hat", "d_hat", "residual",
               "diverged")

BOUND_KINDS = bnd.LOWER_KINDS + ("upper", "floor")

DEFAULT_HORIZON = 100_000


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config ingestion

@dataclass(frozen=True)
class ExperimentConfig:
    plant: LinearPlant
    mode: str
    bounds: tuple[str, ...]
    b_grid: tuple[float, ...]
    d_grid: tuple[float, ...]
    distortion: float | None
    horizon: int
    burn_in: int
    seed: int
    i_max: int
    rogers_c: float

    @property
    def partial(self) -> bool:
        return self.mode == "partially_observed"


_KNOWN_KEYS = {"plant", "mode", "bounds", "b_grid", "d_grid", "distortion",
               "horizon", "burn_in", "seed", "i_max", "rogers_c"}
_PLANT_KEYS = {"a", "b", "q", "r", "c", "noise_v", "noise_w", "noise_x1"}


def _matrix(raw, name: str) -> list[list[float]]:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2:
        raise ConfigError(f"plant.{name} must be a nested (row-major) array")
    return arr.tolist()


def _noise(raw, name: str) -> NoiseModel:
    if not isinstance(raw, dict):
        raise ConfigError(f"{name} must be an object with family and covariance")
    family = raw.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"{name}.family must be one of {FAMILIES}")
    if "covariance" not in raw:
        raise ConfigError(f"{name}.covariance is required")
    try:
        return NoiseModel(family, _matrix(raw["covariance"], f"{name}.covariance"))
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from err


def _grid(raw, name: str) -> tuple[float, ...]:
    if raw is None:
        return ()
    vals = tuple(float(v) for v in raw)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{name} must be strictly increasing")
    return vals


def plant_from_dict(raw: dict) -> LinearPlant:
    if not isinstance(raw, dict):
        raise ConfigError("plant must be an object")
    unknown = set(raw) - _PLANT_KEYS
    if unknown:
        raise ConfigError(f"unknown plant keys: {sorted(unknown)}")
    for key in ("a", "b", "q", "r", "noise_v"):
        if key not in raw:
            raise ConfigError(f"plant.{key} is required")
    try:
        return LinearPlant(
            _matrix(raw["a"], "a"),
            _matrix(raw["b"], "b"),
            _matrix(raw["q"], "q"),
            _matrix(raw["r"], "r"),
            _noise(raw["noise_v"], "plant.noise_v"),
            c=None if raw.get("c") is None else _matrix(raw["c"], "c"),
            noise_w=None if raw.get("noise_w") is None
            else _noise(raw["noise_w"], "plant.noise_w"),
            noise_x1=None if raw.get("noise_x1") is None
            else _noise(raw["noise_x1"], "plant.noise_x1"),
        )
    except ValueError as err:
        raise ConfigError(f"plant: {err}") from err


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "plant" not in raw:
        raise ConfigError("plant is required")
    plant = plant_from_dict(raw["plant"])

    default_mode = "fully_observed" if plant.fully_observed else "partially_observed"
    mode = raw.get("mode", default_mode)
    if mode not in ("fully_observed", "partially_observed"):
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "fully_observed" and not plant.fully_observed:
        raise ConfigError("mode fully_observed needs C = I and no observation noise")

    default_kind = "partial" if mode == "partially_observed" else "full"
    kinds = tuple(raw.get("bounds", (default_kind, "upper")))
    for kind in kinds:
        if kind not in BOUND_KINDS:
            raise ConfigError(f"unknown bound kind {kind!r}; choose from {BOUND_KINDS}")

    b_grid = _grid(raw.get("b_grid"), "b_grid")
    d_grid = _grid(raw.get("d_grid"), "d_grid")
    distortion = raw.get("distortion")
    if distortion is not None:
        distortion = float(distortion)
        if distortion <= 0:
            raise ConfigError("distortion must be positive")
    if not kinds and not b_grid and not d_grid and distortion is None:
        raise ConfigError("config requests neither bounds nor a simulation")

    horizon = int(raw.get("horizon", DEFAULT_HORIZON))
    burn_in = int(raw.get("burn_in", 1000))
    if horizon <= burn_in:
        raise ConfigError("horizon must exceed burn_in")
    seed = int(raw.get("seed", 0))
    i_max = int(raw.get("i_max", bnd.DEFAULT_I_MAX))
    if i_max < 1:
        raise ConfigError("i_max must be at least 1")
    rogers_c = float(raw.get("rogers_c", 2.0))

    return ExperimentConfig(
        plant=plant, mode=mode, bounds=kinds, b_grid=b_grid, d_grid=d_grid,
        distortion=distortion, horizon=horizon, burn_in=burn_in, seed=seed,
        i_max=i_max, rogers_c=rogers_c)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# emission helpers

def _fmt(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".12g")


def _js(x):
    """JSON-safe scalar: NaN and infinities become null."""
    if isinstance(x, bool):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def point_row(p: TradeoffPoint) -> dict:
    return {
        "d": p.d, "b_hat": p.b_hat, "h_hat_nats": p.h_nats,
        "h_hat_bits": p.h_bits, "lower_bound_nats": p.lower_nats,
        "upper_bound_nats": p.upper_nats, "c_hat": p.c_hat, "e_hat": p.e_hat,
        "d_hat": p.d_hat, "residual": p.residual, "diverged": p.diverged,
    }


def points_csv(points: list[TradeoffPoint]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for p in points:
        row = point_row(p)
        lines.append(",".join(_fmt(row[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def points_json(points: list[TradeoffPoint], meta: dict) -> str:
    payload = dict(meta)
    payload["columns"] = list(CSV_COLUMNS)
    payload["points"] = [
        {k: _js(v) for k, v in point_row(p).items()} for p in points
    ]
    return json.dumps(payload, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _emit_points(points, meta, args, stem: str) -> None:
    if args.out is None:
        return
    out = Path(args.out)
    if args.format == "json":
        _write(out / f"{stem}.json", points_json(points, meta))
    else:
        _write(out / f"{stem}.csv", points_csv(points))


# ---------------------------------------------------------------------------
# SVG rendering (hand-rolled; no plotting dependency)

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 24, 24, 118


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    raw = np.linspace(lo, hi, count)
    return [float(t) for t in raw]


def render_svg(points: list[TradeoffPoint], bmin: float,
               curve_b: np.ndarray, curve_lower: np.ndarray,
               curve_upper: np.ndarray) -> str:
    """Tradeoff plot: converse and coder-entropy curves, simulated points,
    b_min asymptote.  Diverged runs are listed hollow in the legend strip."""
    live = [p for p in points if not p.diverged and math.isfinite(p.h_nats)]
    dead = [p for p in points if p.diverged]

    xs = list(curve_b) + [p.b_hat for p in live]
    ys = ([v for v in curve_lower if math.isfinite(v)]
          + [v for v in curve_upper if math.isfinite(v)]
          + [p.h_nats for p in live])
    x_lo = min([bmin] + xs)
    x_hi = max(xs) if xs else bmin + 1.0
    x_pad = 0.04 * (x_hi - x_lo or 1.0)
    x_lo -= x_pad
    x_hi += x_pad
    y_lo = 0.0
    y_hi = (max(ys) if ys else 1.0) * 1.08

    def px(b: float) -> float:
        return _ML + (b - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(r: float) -> float:
        return _H - _MB - (r - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    def path_of(bs, vals) -> str:
        pts = [f"{px(b):.2f},{py(v):.2f}" for b, v in zip(bs, vals)
               if math.isfinite(v) and y_lo <= v <= y_hi]
        return " ".join(pts)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    ax = (f'M {_ML} {_MT} L {_ML} {_H - _MB} L {_W - _MR} {_H - _MB}')
    parts.append(f'<path d="{ax}" stroke="black" fill="none"/>')

    for t in _ticks(x_lo + x_pad, x_hi - x_pad):
        x = px(t)
        parts.append(f'<line x1="{x:.2f}" y1="{_H - _MB}" x2="{x:.2f}" '
                     f'y2="{_H - _MB + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{_H - _MB + 18}" '
                     f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" '
                     f'y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.2f}" '
                     f'text-anchor="end">{t:.3g}</text>')
    parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - _MB + 36}" '
                 f'text-anchor="middle">LQR cost b</text>')
    parts.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">'
                 f'rate (nats)</text>')

    if x_lo <= bmin <= x_hi:
        x = px(bmin)
        parts.append(f'<line x1="{x:.2f}" y1="{_MT}" x2="{x:.2f}" '
                     f'y2="{_H - _MB}" stroke="gray" stroke-dasharray="5,4"/>')
        parts.append(f'<text x="{x + 4:.2f}" y="{_MT + 14}" fill="gray">'
                     f'b_min = {bmin:.4f}</text>')

    parts.append(f'<polyline points="{path_of(curve_b, curve_lower)}" '
                 f'fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
    upper_path = path_of(curve_b, curve_upper)
    if upper_path:
        parts.append(f'<polyline points="{upper_path}" fill="none" '
                     f'stroke="#ff7f0e" stroke-width="1.5"/>')
    for p in live:
        parts.append(f'<circle cx="{px(p.b_hat):.2f}" cy="{py(p.h_nats):.2f}" '
                     f'r="3.5" fill="#2ca02c"/>')

    ly = _H - _MB + 52
    legend = [("#1f77b4", "converse lower bound"),
              ("#ff7f0e", "coder entropy upper bound"),
              ("#2ca02c", "simulated (b_hat, h_hat)")]
    lx = _ML
    for color, label in legend:
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{lx + 24}" y="{ly}">{label}</text>')
        lx += 24 + 7 * len(label) + 18
    if dead:
        ly += 20
        parts.append(f'<circle cx="{_ML + 6}" cy="{ly - 4}" r="3.5" '
                     f'fill="none" stroke="#d62728"/>')
        listing = ", ".join(f"d={p.d:.4g}" for p in dead)
        parts.append(f'<text x="{_ML + 18}" y="{ly}" fill="#d62728">'
                     f'diverged: {listing}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _bound_curves(cfg: ExperimentConfig, ctrl, filt, bmin: float,
                  points: list[TradeoffPoint]):
    b_hi = max([p.b_hat for p in points if not p.diverged], default=bmin + 10.0)
    lo = bmin + 1e-3 * max(1.0, bmin)
    bs = np.linspace(lo, b_hi * 1.02, 200)
    lower = np.empty_like(bs)
    upper = np.empty_like(bs)
    for i, b in enumerate(bs):
        if cfg.partial:
            lower[i] = bnd.lower_bound_partial(cfg.plant, ctrl, filt, b)
        else:
            lower[i] = bnd.lower_bound_full(cfg.plant, ctrl, b)
        try:
            upper[i] = bnd.entropy_cost_upper(cfg.plant, ctrl, b, filt=filt)
        except ValueError:
            upper[i] = math.nan
    return bs, lower, upper


# ---------------------------------------------------------------------------
# subcommands

def _print_table(header: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def _solve(cfg: ExperimentConfig):
    ctrl = solve_control(cfg.plant)
    filt = solve_filter(cfg.plant) if cfg.partial else None
    return ctrl, filt, b_min(cfg.plant, ctrl, filt)


def _eval_bound(cfg: ExperimentConfig, kind: str, ctrl, filt, b: float) -> float:
    plant = cfg.plant
    if kind == "floor":
        return bnd.unstable_floor(plant.A)
    if kind == "upper":
        return bnd.entropy_cost_upper(plant, ctrl, b, filt=filt)
    if kind == "full":
        return bnd.lower_bound_full(plant, ctrl, b)
    if kind == "projected":
        return bnd.lower_bound_projected(plant, ctrl, b)
    if kind == "lowrank":
        return bnd.lower_bound_lowrank(plant, ctrl, b, i_max=cfg.i_max).nats
    if filt is None:
        raise ConfigError(f"bound kind {kind!r} needs mode partially_observed")
    if kind == "partial":
        return bnd.lower_bound_partial(plant, ctrl, filt, b)
    if kind == "partial_projected":
        return bnd.lower_bound_partial_projected(plant, ctrl, filt, b)
    return bnd.lower_bound_partial_lowrank(plant, ctrl, filt, b,
                                           i_max=cfg.i_max).nats


def cmd_bound(cfg: ExperimentConfig, args) -> int:
    if not cfg.b_grid:
        raise ConfigError("bound needs a nonempty b_grid")
    if not cfg.bounds:
        raise ConfigError("bound needs a nonempty bounds list")
    ctrl, filt, bmin = _solve(cfg)
    rows = []
    for b in cfg.b_grid:
        for kind in cfg.bounds:
            if kind not in ("floor",) and b <= bmin:
                rows.append({"b": b, "kind": kind, "nats": math.nan,
                             "bits": math.nan,
                             "note": f"infeasible (b <= b_min={bmin:.7f})"})
                continue
            try:
                nats = _eval_bound(cfg, kind, ctrl, filt, b)
            except ValueError as err:
                raise ConfigError(f"bound {kind!r} at b={b:g}: {err}") from err
            rows.append({"b": b, "kind": kind, "nats": nats,
                         "bits": bnd.nats_to_bits(nats), "note": ""})

    print(f"b_min = {bmin:.10g}")
    _print_table(
        ["b", "bound", "nats", "bits", "note"],
        [[_fmt(r["b"]), r["kind"], _fmt(r["nats"]), _fmt(r["bits"]), r["note"]]
         for r in rows])
    if args.out is not None:
        out = Path(args.out)
        if args.format == "json":
            payload = {"b_min": bmin, "rows": [
                {k: _js(v) for k, v in r.items()} for r in rows]}
            _write(out / "bound.json", json.dumps(payload, indent=2) + "\n")
        else:
            lines = ["b,bound,nats,bits,note"]
            lines += [",".join([_fmt(r["b"]), r["kind"], _fmt(r["nats"]),
                                _fmt(r["bits"]), r["note"]]) for r in rows]
            _write(out / "bound.csv", "\n".join(lines) + "\n")
    return 0


def _single_run(cfg: ExperimentConfig):
    sim = SimConfig(plant=cfg.plant, horizon=cfg.horizon,
                    distortion=cfg.distortion, seed=cfg.seed,
                    burn_in=cfg.burn_in, mode=cfg.mode)
    res = run(sim)
    ctrl, filt, bmin = _solve(cfg)
    d = cfg.distortion if cfg.distortion is not None else math.nan
    return res, tradeoff_point(cfg.plant, ctrl, filt, bmin, d, res), bmin


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    res, point, bmin = _single_run(cfg)
    row = point_row(point)
    _print_table(["field", "value"],
                 [[col, _fmt(row[col])] for col in CSV_COLUMNS]
                 + [["se_b", _fmt(res.se_b)],
                    ["max_step_distortion", _fmt(res.max_step_distortion)],
                    ["window", str(res.window)],
                    ["digest", res.digest]])
    if res.diverged:
        print(f"diverged at step {res.diverged_step}")
    meta = {"b_min": bmin, "seed": cfg.seed, "horizon": cfg.horizon,
            "digest": res.digest}
    _emit_points([point], meta, args, "simulate")
    return 0


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    if not cfg.d_grid:
        raise ConfigError("sweep needs a nonempty d_grid")
    points = sweep(cfg.plant, cfg.d_grid, horizon=cfg.horizon, seed=cfg.seed,
                   burn_in=cfg.burn_in, mode=cfg.mode)
    ctrl, filt, bmin = _solve(cfg)

    print(f"b_min = {bmin:.10g}")
    _print_table(
        list(CSV_COLUMNS),
        [[_fmt(point_row(p)[col]) for col in CSV_COLUMNS] for p in points])

    meta = {"b_min": bmin, "seed": cfg.seed, "horizon": cfg.horizon}
    _emit_points(points, meta, args, "sweep")
    if args.svg and args.out is not None:
        bs, lower, upper = _bound_curves(cfg, ctrl, filt, bmin, points)
        _write(Path(args.out) / "sweep.svg",
               render_svg(points, bmin, bs, lower, upper))

    bad = [p for p in points
           if not p.diverged and math.isfinite(p.lower_nats)
           and p.h_nats < p.lower_nats]
    diverged = [p for p in points if p.diverged]
    for p in diverged:
        print(f"diverged: d={p.d:g}")
    if bad:
        for p in bad:
            print(f"DOMINANCE VIOLATION: d={p.d:g} h_hat={p.h_nats:.6f} "
                  f"< lower bound {p.lower_nats:.6f}", file=sys.stderr)
        return 1
    return 0


def cmd_decompose(cfg: ExperimentConfig, args) -> int:
    res, point, bmin = _single_run(cfg)
    try:
        c_hat, e_hat, d_hat, residual = decompose_cost(res)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    ctrl, filt, _ = _solve(cfg)
    c_ref = float(np.trace(cfg.plant.noise_v.covariance @ ctrl.S))
    w_mat = cfg.plant.A.T @ ctrl.M @ cfg.plant.A
    e_ref = (float(np.trace(filt.Sigma @ w_mat)) if filt is not None else 0.0)
    rows = [
        ["b_hat", _fmt(res.b_hat), ""],
        ["c_hat", _fmt(c_hat), f"tr(Cov_V S) = {c_ref:.7f}"],
        ["e_hat", _fmt(e_hat), f"tr(Cov_est W) = {e_ref:.7f}"],
        ["d_hat", _fmt(d_hat),
         "<= d" if cfg.distortion is not None else "unquantized: 0"],
        ["residual", _fmt(residual), f"3*se(b_hat) = {3 * res.se_b:.3g}"],
    ]
    _print_table(["term", "value", "reference"], rows)
    meta = {"b_min": bmin, "seed": cfg.seed, "horizon": cfg.horizon,
            "c_ref": c_ref, "e_ref": e_ref}
    _emit_points([point], meta, args, "decompose")
    return 0


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    report = validate(cfg.plant)
    rows = [
        ["plant", repr(cfg.plant)],
        ["controllable", str(report.controllable)],
        ["observable", str(report.observable)],
        ["controllability_rank", str(report.controllability_rank)],
        ["observability_rank", str(report.observability_rank)],
        ["cost_psd", str(report.cost_psd)],
        ["noise_psd", str(report.noise_psd)],
    ]
    ctrl, filt, bmin = _solve(cfg)
    rows.append(["control_iterations", str(ctrl.iterations)])
    rows.append(["control_residual", _fmt(ctrl.residual)])
    if filt is not None:
        rows.append(["filter_iterations", str(filt.iterations)])
        rows.append(["filter_residual", _fmt(filt.residual)])
    rows.append(["b_min", _fmt(bmin)])
    rows.append(["unstable_floor_nats", _fmt(bnd.unstable_floor(cfg.plant.A))])
    n = cfg.plant.n
    if n >= 3:
        rows.append([f"rogers_reference(c={cfg.rogers_c:g})",
                     _fmt(bnd.rogers_rho_bound(n, cfg.rogers_c))])
    _print_table(["check", "value"], rows)
    for msg in report.messages:
        print(f"problem: {msg}", file=sys.stderr)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratecost",
        description="Rate-cost bounds and quantized-control simulation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_text in (
        ("bound", cmd_bound, "evaluate rate bounds on the configured b grid"),
        ("simulate", cmd_simulate, "run one closed-loop simulation"),
        ("sweep", cmd_sweep, "distortion sweep producing a tradeoff curve"),
        ("decompose", cmd_decompose, "audit the cost decomposition of one run"),
        ("validate", cmd_validate, "structural checks on the configured plant"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "sweep":
            p.add_argument("--svg", action="store_true",
                           help="also render the tradeoff plot (needs --out)")
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        return args.fn(cfg, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except RuntimeError as err:
        # distortion guarantee and friends: hard assert failures
        print(f"hard assert failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
