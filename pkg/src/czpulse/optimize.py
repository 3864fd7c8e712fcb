"""Derivative-free pulse optimization and the parameter-sweep engine."""

from __future__ import annotations

import concurrent.futures
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, ConfigError, CzPulseError, WaveformRangeError
from .model import CircuitSpec
from .pulse import apply_distortion, apply_filter, awp_generate, calibrate_conditional_phase, fourier_generate
from .spectrum import OperatingMap, operating_map
from . import dynamics


@dataclass(frozen=True)
class OptimizerOptions:
    max_evals: int = 200
    restarts: int = 3
    simplex_scale: float = 0.05
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.max_evals < 50:
            raise ConfigError("max_evals must be >= 50")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")


def nelder_mead(objective, x0, options: OptimizerOptions = OptimizerOptions()):
    """Nelder-Mead with standard coefficients (1, 2, 0.5, 0.5) and restarts.

    Non-finite objective values (or raised CzPulseError) are treated as +inf,
    so infeasible points are rejected rather than aborting the search.
    Deterministic given the options seed and x0.  Returns (x_best, f_best,
    n_evals).
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = len(x0)
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        try:
            v = float(objective(np.asarray(x)))
        except CzPulseError:
            return math.inf
        return v if math.isfinite(v) else math.inf

    f0 = f(x0)
    if not math.isfinite(f0):
        raise ConfigError("objective not finite at the start point")

    rng = np.random.default_rng(options.seed)
    best_x, best_f = x0.copy(), f0
    budget_per = max(options.max_evals // max(options.restarts, 1), 20)

    for restart in range(max(options.restarts, 1)):
        # fresh simplex around the current best (jittered on restarts)
        x_start = best_x.copy()
        if restart > 0:
            x_start = x_start * (1.0 + options.simplex_scale * rng.standard_normal(n))
        simplex = [x_start]
        for k in range(n):
            step = np.zeros(n)
            step[k] = options.simplex_scale * (abs(x_start[k]) if x_start[k] != 0 else 1.0)
            simplex.append(x_start + step)
        fs = [f(x) for x in simplex]
        used = n + 1

        while used < budget_per:
            order = np.argsort(fs)
            simplex = [simplex[i] for i in order]
            fs = [fs[i] for i in order]
            if math.isfinite(fs[-1]) and fs[-1] - fs[0] < options.tol:
                break
            centroid = np.mean(simplex[:-1], axis=0)
            xr = centroid + (centroid - simplex[-1])
            fr = f(xr); used += 1
            if fr < fs[0]:
                xe = centroid + 2.0 * (centroid - simplex[-1])
                fe = f(xe); used += 1
                if fe < fr:
                    simplex[-1], fs[-1] = xe, fe
                else:
                    simplex[-1], fs[-1] = xr, fr
            elif fr < fs[-2]:
                simplex[-1], fs[-1] = xr, fr
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
                fc = f(xc); used += 1
                if fc < fs[-1]:
                    simplex[-1], fs[-1] = xc, fc
                else:  # shrink toward the best vertex
                    for k in range(1, n + 1):
                        simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0])
                        fs[k] = f(simplex[k]); used += 1
        k_best = int(np.argmin(fs))
        if fs[k_best] < best_f:
            best_x, best_f = np.array(simplex[k_best]), fs[k_best]

    return best_x, best_f, evals


def build_pulse(spec: CircuitSpec, kind: str, gate_time: float, lambdas, idle: float,
                *, omap: OperatingMap, filter_mhz: float | None = None,
                distortion: tuple[float, float] | None = None, dt: float = 0.05):
    """Generate + transform one pulse (distort first, then filter)."""
    if kind == "awp":
        p = awp_generate(spec, gate_time, lambdas, idle, omap=omap, dt=dt)
    elif kind == "fourier":
        p = fourier_generate(gate_time, lambdas, idle, dt=dt)
    else:
        raise ConfigError(f"unknown pulse kind {kind!r}")
    if distortion is not None and distortion[0] != 0.0:
        p = apply_distortion(p, *distortion)
    if filter_mhz is not None:
        p = apply_filter(p, filter_mhz)
    return p


def optimize_pulse(spec: CircuitSpec, gate_time: float, m_max: int = 1,
                   options: OptimizerOptions | None = None, *,
                   idle: float, kind: str = "awp", omap: OperatingMap | None = None,
                   filter_mhz: float | None = None, target=None,
                   gate_pair: tuple[int, int] = (0, 1), basis=None, dt: float = 0.05):
    """Minimize the EPG over lambda_1..lambda_m_max (virtual-Z inside).

    The search is seeded by conditional-phase calibration of the
    single-component amplitude, so phase targeting is implicit and the
    optimizer only has to trade phase accuracy against leakage.
    Returns (PulseShape, GateReport, f_evals).
    """
    if not 1 <= m_max <= 4:
        raise ConfigError("m_max must be in [1, 4]")
    if options is None:
        options = OptimizerOptions()
    if omap is None:
        omap = operating_map(spec, idle)
    ratios = np.zeros(m_max)
    ratios[0] = 1.0
    lam0 = calibrate_conditional_phase(
        spec, gate_time, tuple(ratios), idle, math.pi,
        omap=omap, kind=kind, filter_mhz=filter_mhz, dt=dt,
    )
    x0 = np.array(lam0)
    if basis is None:
        basis = dynamics.idle_basis(spec, idle)

    def objective(lam):
        p = build_pulse(spec, kind, gate_time, tuple(lam), idle,
                        omap=omap, filter_mhz=filter_mhz, dt=dt)
        rep = dynamics.gate_report(spec, p, target=target, gate_pair=gate_pair, basis=basis)
        return rep.epg

    x_best, f_best, evals = nelder_mead(objective, x0, options)
    pulse = build_pulse(spec, kind, gate_time, tuple(x_best), idle,
                        omap=omap, filter_mhz=filter_mhz, dt=dt)
    report = dynamics.gate_report(spec, pulse, target=target, gate_pair=gate_pair, basis=basis)
    return pulse, report, evals


# ---------------------------------------------------------------------------
# sweep engine


@dataclass(frozen=True)
class SweepJob:
    """One embarrassingly parallel grid experiment."""

    experiment: str
    axes: dict
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name, values in self.axes.items():
            vals = list(values)
            if not all(np.isfinite(v) for v in vals if isinstance(v, (int, float))):
                raise ConfigError(f"axis {name!r} contains non-finite values")
        object.__setattr__(self, "axes", {k: tuple(v) for k, v in self.axes.items()})


def run_sweep(job: SweepJob, row_fn, columns) -> list[dict]:
    """Evaluate ``row_fn(point, seed)`` over the grid, one dict per point.

    Points run in submission order (deterministic output ordering); per-point
    failures are recorded in the row's ``error`` column and never abort the
    sweep.  Each point gets an independent seed spawned from the job seed.
    """
    names = list(job.axes)
    points = list(itertools.product(*(job.axes[n] for n in names)))
    seeds = np.random.SeedSequence(job.seed).spawn(max(len(points), 1))

    def one(args):
        idx, point = args
        row = dict(zip(names, point))
        try:
            out = row_fn(dict(row), int(seeds[idx].generate_state(1)[0]))
            row.update(out)
            row.setdefault("error", "")
        except CzPulseError as exc:
            for c in columns:
                row.setdefault(c, math.nan)
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    tasks = list(enumerate(points))
    if job.workers > 1 and len(tasks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=job.workers) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]
    return rows
