"""Closed-loop Monte-Carlo simulation of quantized certainty-equivalence
control, with cost decomposition audits and tradeoff-curve sweeps.

The controller applies u = -L A s_hat where s_hat is the DPCM decoder
state; the codec quantizes innovations under the weight W = A^T M A, so
the per-step weighted reconstruction error is bounded by the quantizer
design distortion d on every step.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import entropy_cost_upper, lower_bound_full, lower_bound_partial
from .quantizer import (
    DpcmCodec,
    EntropyEstimate,
    empirical_entropy,
    lattice_for_dimension,
)
from .riccati import b_min, solve_control, solve_filter
from .sysmodel import LinearPlant

DIVERGENCE_NORM = 1e12
BATCH_COUNT = 20
DISTORTION_SLACK = 1e-9
MIN_DECOMPOSE_WINDOW = 10_000


@dataclass(frozen=True)
class SimConfig:
    """One closed-loop run: quantized when distortion is set, else the
    classical (rate-unconstrained) loop."""

    plant: LinearPlant
    horizon: int
    distortion: float | None
    seed: int | np.random.SeedSequence = 0
    burn_in: int = 1000
    mode: str = "fully_observed"

    def __post_init__(self):
        if self.mode not in ("fully_observed", "partially_observed"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.horizon <= self.burn_in:
            raise ValueError("horizon must exceed burn_in")
        if self.distortion is not None and self.distortion <= 0:
            raise ValueError("distortion must be positive when set")


@dataclass(frozen=True)
class SimResult:
    b_hat: float
    se_b: float
    c_hat: float
    e_hat: float
    d_hat: float
    residual: float
    entropy: EntropyEstimate | None
    max_step_distortion: float
    diverged: bool
    diverged_step: int | None
    steps: int
    window: int
    digest: str
    rng_draws: int
    innovation_jump_cov: np.ndarray | None = None


def _batch_se(series: np.ndarray, batches: int = BATCH_COUNT) -> float:
    usable = (len(series) // batches) * batches
    if usable < batches:
        return math.nan
    means = series[:usable].reshape(batches, -1).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _loop_scalar_full(a, bm, g, wsq, inv_wsq, t, x0, v_list, quantized, lim):
    horizon = len(v_list)
    xs = np.empty(horizon)
    us = np.empty(horizon)
    sh = np.empty(horizon)
    idx = np.zeros(horizon, dtype=np.int64)
    x = float(x0)
    s_hat = 0.0
    u = 0.0
    for i in range(horizon):
        pred = a * s_hat + bm * u
        if quantized:
            z = round((wsq * (x - pred)) / t)
            s_hat = pred + (z * t) * inv_wsq
            idx[i] = z
        else:
            s_hat = x
        u = -g * s_hat
        xs[i] = x
        us[i] = u
        sh[i] = s_hat
        x = a * x + bm * u + v_list[i]
        if not -lim < x < lim:
            return xs, us, sh, None, idx, True, i + 1
    return xs, us, sh, None, idx, False, horizon


def _loop_scalar_partial(a, bm, g, wsq, inv_wsq, t, c, kg, x0, v_list, w_list,
                         quantized, lim):
    horizon = len(v_list)
    xs = np.empty(horizon)
    us = np.empty(horizon)
    sh = np.empty(horizon)
    xe_arr = np.empty(horizon)
    idx = np.zeros(horizon, dtype=np.int64)
    x = float(x0)
    xe = 0.0
    s_hat = 0.0
    u = 0.0
    for i in range(horizon):
        y = c * x + w_list[i]
        pred_e = a * xe + bm * u
        xe = pred_e + kg * (y - c * pred_e)
        pred = a * s_hat + bm * u
        if quantized:
            z = round((wsq * (xe - pred)) / t)
            s_hat = pred + (z * t) * inv_wsq
            idx[i] = z
        else:
            s_hat = xe
        u = -g * s_hat
        xs[i] = x
        us[i] = u
        sh[i] = s_hat
        xe_arr[i] = xe
        x = a * x + bm * u + v_list[i]
        if not -lim < x < lim:
            return xs, us, sh, xe_arr, idx, True, i + 1
    return xs, us, sh, xe_arr, idx, False, horizon


def _loop_generic(plant, gain, codec, kalman_gain, x0, v, wn, quantized, lim):
    a_mat, b_mat, c_mat = plant.A, plant.B, plant.C
    n, m = plant.n, plant.m
    horizon = v.shape[0]
    partial = wn is not None
    xs = np.empty((horizon, n))
    us = np.empty((horizon, m))
    sh = np.empty((horizon, n))
    xe_arr = np.empty((horizon, n)) if partial else None
    idx = np.zeros((horizon, n), dtype=np.int64)
    x = np.asarray(x0, dtype=float).copy()
    xe = np.zeros(n)
    u = np.zeros(m)
    for i in range(horizon):
        if partial:
            y = c_mat @ x + wn[i]
            pred_e = a_mat @ xe + b_mat @ u
            xe = pred_e + kalman_gain @ (y - c_mat @ pred_e)
            target = xe
        else:
            target = x
        if quantized:
            index, _ = codec.encode_step(target, u_prev=u)
            idx[i] = index
            s_hat = codec.s_hat
        else:
            s_hat = target.copy()
        u = -(gain @ s_hat)
        xs[i] = x
        us[i] = u
        sh[i] = s_hat
        if partial:
            xe_arr[i] = xe
        x = a_mat @ x + b_mat @ u + v[i]
        if not np.linalg.norm(x) < lim:
            return xs, us, sh, xe_arr, idx, True, i + 1
    return xs, us, sh, xe_arr, idx, False, horizon


def _quad(rows: np.ndarray, weight: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", rows, weight, rows)


def _diverged_result(step: int, steps: int, window: int, digest: str,
                     draws: int) -> SimResult:
    nan = math.nan
    return SimResult(b_hat=math.inf, se_b=nan, c_hat=nan, e_hat=nan,
                     d_hat=nan, residual=nan, entropy=None,
                     max_step_distortion=nan, diverged=True,
                     diverged_step=step, steps=steps, window=window,
                     digest=digest, rng_draws=draws)


def run(cfg: SimConfig, engine: str = "auto") -> SimResult:
    """Simulate one closed loop and audit its cost decomposition.

    engine: "auto" picks a plain-float scalar loop when n = m = (k) = 1,
    "generic"/"scalar" force a path (for cross-checks).
    """
    if engine not in ("auto", "scalar", "generic"):
        raise ValueError(f"unknown engine {engine!r}")
    plant = cfg.plant
    partial = cfg.mode == "partially_observed"
    quantized = cfg.distortion is not None
    ctrl = solve_control(plant)
    filt = solve_filter(plant) if partial else None

    weight = plant.A.T @ ctrl.M @ plant.A
    gain = ctrl.L @ plant.A

    ss = _seed_sequence(cfg.seed)
    ss_v, ss_init, ss_w = ss.spawn(3)
    v = plant.noise_v.sample(np.random.default_rng(ss_v), cfg.horizon)
    x0 = plant.noise_x1.sample(np.random.default_rng(ss_init), 1)[0]
    draws = cfg.horizon + 1
    wn = None
    if partial:
        wn = plant.noise_w.sample(np.random.default_rng(ss_w), cfg.horizon)
        draws += cfg.horizon

    scalar_ok = plant.n == 1 and plant.m == 1 and (not partial or plant.k == 1)
    if engine == "scalar" and not scalar_ok:
        raise ValueError("scalar engine requires a scalar plant")
    use_scalar = scalar_ok and engine != "generic"

    lattice = None
    if quantized:
        lattice = lattice_for_dimension(plant.n).scale_to_distortion(
            cfg.distortion)

    if use_scalar:
        wsq = math.sqrt(weight[0, 0])
        inv_wsq = 1.0 / wsq
        t = lattice.scale if quantized else 1.0
        a_s, b_s, g_s = plant.A[0, 0], plant.B[0, 0], gain[0, 0]
        v_list = v[:, 0].tolist()
        if partial:
            xs, us, sh, xe_arr, idx, diverged, steps = _loop_scalar_partial(
                a_s, b_s, g_s, wsq, inv_wsq, t, plant.C[0, 0], filt.K[0, 0],
                x0[0], v_list, wn[:, 0].tolist(), quantized, DIVERGENCE_NORM)
        else:
            xs, us, sh, xe_arr, idx, diverged, steps = _loop_scalar_full(
                a_s, b_s, g_s, wsq, inv_wsq, t, x0[0], v_list, quantized,
                DIVERGENCE_NORM)
        xs = xs[:steps, None]
        us = us[:steps, None]
        sh = sh[:steps, None]
        xe_arr = None if xe_arr is None else xe_arr[:steps, None]
        idx = idx[:steps, None]
    else:
        codec = None
        if quantized:
            codec = DpcmCodec(lattice, weight, plant.A, b_mat=plant.B)
        xs, us, sh, xe_arr, idx, diverged, steps = _loop_generic(
            plant, gain, codec, None if filt is None else filt.K,
            x0, v, wn, quantized, DIVERGENCE_NORM)
        xs = xs[:steps]
        us = us[:steps]
        sh = sh[:steps]
        xe_arr = None if xe_arr is None else xe_arr[:steps]
        idx = idx[:steps]

    digest = hashlib.sha256(
        np.ascontiguousarray(xs).tobytes()
        + np.ascontiguousarray(idx).tobytes()).hexdigest()
    window = max(steps - cfg.burn_in, 0)
    if diverged:
        return _diverged_result(steps, steps, window, digest, draws)

    enc_target = xs if xe_arr is None else xe_arr
    quant_err = _quad(enc_target - sh, weight)
    max_dist = float(np.max(quant_err)) if quantized else 0.0
    if quantized and max_dist > cfg.distortion + DISTORTION_SLACK:
        raise RuntimeError(
            f"distortion guarantee violated: {max_dist} > {cfg.distortion}")

    sl = slice(cfg.burn_in, steps)
    cost = _quad(xs[sl], plant.Q) + _quad(us[sl], plant.R)
    b_hat = float(cost.mean())
    se_b = _batch_se(cost)
    c_hat = float(_quad(v[sl], ctrl.S).mean())
    e_hat = 0.0 if xe_arr is None else float(_quad((xs - xe_arr)[sl],
                                                   weight).mean())
    d_hat = float(quant_err[sl].mean()) if quantized else 0.0
    residual = b_hat - (c_hat + e_hat + d_hat)

    entropy = None
    if quantized:
        entropy = empirical_entropy(idx, burn_in=cfg.burn_in)

    jump_cov = None
    if xe_arr is not None and window > 1:
        pred_e = xe_arr[:-1] @ plant.A.T + us[:-1] @ plant.B.T
        jumps = (xe_arr[1:] - pred_e)[cfg.burn_in:]
        jump_cov = jumps.T @ jumps / jumps.shape[0]

    return SimResult(b_hat=b_hat, se_b=se_b, c_hat=c_hat, e_hat=e_hat,
                     d_hat=d_hat, residual=residual, entropy=entropy,
                     max_step_distortion=max_dist, diverged=False,
                     diverged_step=None, steps=steps, window=window,
                     digest=digest, rng_draws=draws,
                     innovation_jump_cov=jump_cov)


def run_fully_observed(cfg: SimConfig, engine: str = "auto") -> SimResult:
    if cfg.mode != "fully_observed":
        raise ValueError("config mode is not fully_observed")
    return run(cfg, engine=engine)


def run_partially_observed(cfg: SimConfig, engine: str = "auto") -> SimResult:
    if cfg.mode != "partially_observed":
        raise ValueError("config mode is not partially_observed")
    return run(cfg, engine=engine)


def decompose_cost(result: SimResult):
    """(c_hat, e_hat, d_hat, residual) from a finished run."""
    if result.window < MIN_DECOMPOSE_WINDOW:
        raise ValueError(
            f"need a post-burn-in window of {MIN_DECOMPOSE_WINDOW} steps")
    return result.c_hat, result.e_hat, result.d_hat, result.residual


@dataclass(frozen=True)
class TradeoffPoint:
    d: float
    b_hat: float
    h_nats: float
    h_bits: float
    lower_nats: float
    upper_nats: float
    c_hat: float
    e_hat: float
    d_hat: float
    residual: float
    diverged: bool


def _sweep_worker(packed):
    plant, d, horizon, seed, index, burn_in, mode = packed
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(index,))
    cfg = SimConfig(plant=plant, horizon=horizon, distortion=d,
                    seed=ss, burn_in=burn_in, mode=mode)
    return run(cfg)


def sweep(plant: LinearPlant, d_grid, horizon: int, seed: int = 0,
          burn_in: int = 1000, mode: str = "fully_observed",
          max_workers: int | None = None) -> list[TradeoffPoint]:
    """Run one simulation per distortion and pair each empirical point
    with the matching converse and achievability bounds at the measured
    cost.  Points are returned sorted by b_hat, diverged runs last.

    Seeds derive from (seed, grid index), so results do not depend on the
    worker count (RATECOST_THREADS or max_workers).
    """
    d_grid = [float(d) for d in d_grid]
    if len(d_grid) < 8:
        raise ValueError("need at least 8 distortion grid points")
    partial = mode == "partially_observed"
    ctrl = solve_control(plant)
    filt = solve_filter(plant) if partial else None
    bmin = b_min(plant, ctrl, filt)

    if max_workers is None:
        max_workers = int(os.environ.get("RATECOST_THREADS", "1"))
    packed = [(plant, d, horizon, seed, i, burn_in, mode)
              for i, d in enumerate(d_grid)]
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_sweep_worker, packed))
    else:
        results = [_sweep_worker(p) for p in packed]

    points = [tradeoff_point(plant, ctrl, filt, bmin, d, res)
              for d, res in zip(d_grid, results)]
    points.sort(key=lambda p: (p.diverged, p.b_hat))
    return points


def tradeoff_point(plant, ctrl, filt, bmin: float, d: float,
                   res: SimResult) -> TradeoffPoint:
    """Pair one run with the converse and achievability bounds at its
    measured cost; bounds are NaN when diverged or infeasible."""
    if res.diverged or not res.b_hat > bmin:
        lower = math.nan
        upper = math.nan
    else:
        if filt is not None:
            lower = lower_bound_partial(plant, ctrl, filt, res.b_hat)
        else:
            lower = lower_bound_full(plant, ctrl, res.b_hat)
        try:
            upper = entropy_cost_upper(plant, ctrl, res.b_hat, filt=filt)
        except ValueError:
            upper = math.nan
    h_nats = math.nan if res.entropy is None else res.entropy.plug_in
    return TradeoffPoint(
        d=d, b_hat=res.b_hat, h_nats=h_nats,
        h_bits=h_nats / math.log(2.0),
        lower_nats=lower, upper_nats=upper, c_hat=res.c_hat,
        e_hat=res.e_hat, d_hat=res.d_hat, residual=res.residual,
        diverged=res.diverged)
