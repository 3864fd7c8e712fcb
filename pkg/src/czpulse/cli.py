"""czpulse command line: experiment dispatch, CSV artifacts, run manifests.

Exit codes: 0 success, 2 usage/configuration error, 3 numerical or
calibration failure.  CZPULSE_LOG in {error, info, debug} sets verbosity.
"""

from __future__ import annotations

import logging
import os
import sys

import click

from . import __version__, experiments
from .config import load_config
from .errors import ConfigError, CzPulseError
from .io import write_csv, write_manifest
from .optimize import OptimizerOptions
from .presets import FIG2_IDLE

log = logging.getLogger("czpulse")

USAGE_EXIT = 2
NUMERIC_EXIT = 3


def _setup_logging():
    level = os.environ.get("CZPULSE_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(exc: Exception, code: int):
    log.error("%s", exc)
    sys.exit(code)


def _load(config):
    try:
        return load_config(config)
    except ConfigError as exc:
        _fail(exc, USAGE_EXIT)


def _emit(tables: dict, outdir: str, *, config, experiment: str, seed: int):
    os.makedirs(outdir, exist_ok=True)
    files = []
    for name, (cols, rows) in tables.items():
        files.append(write_csv(os.path.join(outdir, name), cols, rows))
        log.info("wrote %s (%d rows)", files[-1], len(rows))
    write_manifest(outdir, config_path=config, experiment=experiment, seed=seed,
                   files=files, version=__version__)
    return files


def _idle(cfg) -> float:
    if cfg.pulse.idle_ghz is not None:
        return cfg.pulse.idle_ghz
    return FIG2_IDLE


common = [
    click.option("--config", required=True, type=click.Path(exists=False),
                 help="YAML run configuration."),
    click.option("--out", required=True, type=click.Path(), help="Output directory."),
    click.option("--seed", default=0, show_default=True, type=int),
    click.option("--workers", default=0, show_default="logical cores", type=int),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


def _workers(n: int) -> int:
    return n if n > 0 else (os.cpu_count() or 1)


@click.group()
@click.version_option(__version__)
def main():
    """Coupler-assisted adiabatic controlled-phase gate toolkit."""
    _setup_logging()


@main.command()
@with_common
@click.option("--range", "wrange", default="5.45:9.0:361", show_default=True,
              help="Coupler-frequency sweep lo:hi[:n] in GHz.")
def spectrum(config, out, seed, workers, wrange):
    """Tracked spectra and zeta(omega_c) tables (CSV: spectrum, zeta)."""
    cfg = _load(config)
    try:
        parts = [p for p in wrange.split(":") if p]
        if len(parts) < 2:
            raise ConfigError(f"--range needs lo:hi[:n], got {wrange!r}")
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) > 2 else 361
        if not lo < hi or n < 2:
            raise ConfigError(f"empty sweep range {wrange!r}")
    except (ValueError, ConfigError) as exc:
        _fail(ConfigError(f"bad --range {wrange!r}: {exc}"), USAGE_EXIT)
    try:
        tables = experiments.spectrum_tables(cfg.circuit, lo, hi, n)
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment="spectrum", seed=seed)


@main.command()
@with_common
@click.option("--tg", default=None, type=float, help="Gate time ns (default from config).")
@click.option("--mmax", default=None, type=int, help="Number of drive components.")
@click.option("--fourier", is_flag=True, help="Plain Fourier pulse instead of AWP.")
@click.option("--optimize", "do_optimize", is_flag=True,
              help="Nelder-Mead EPG optimization (default: phase calibration only).")
@click.option("--distort", default=None, help="Reflection distortion r,td_ns.")
@click.option("--deviate", default=None,
              help="One-at-a-time parameter deviation param,delta "
                   "(delta in GHz, or relative for rho_*).")
def gate(config, out, seed, workers, tg, mmax, fourier, do_optimize, distort, deviate):
    """Simulate one CZ gate; prints 'epg=<val> phi_zz=<val>'."""
    cfg = _load(config)
    p = cfg.pulse
    tg = tg if tg is not None else p.tg_ns
    mmax = mmax if mmax is not None else p.mmax
    kind = "fourier" if fourier else p.kind
    dist = p.distortion
    if distort is not None:
        try:
            r, td = (float(x) for x in distort.split(","))
        except ValueError:
            _fail(ConfigError(f"bad --distort {distort!r}, need r,td_ns"), USAGE_EXIT)
        dist = (r, td)
    dev = None
    if deviate is not None:
        try:
            param, delta = deviate.split(",")
            dev = (param.strip(), float(delta))
        except ValueError:
            _fail(ConfigError(f"bad --deviate {deviate!r}, need param,delta"), USAGE_EXIT)
        if dev[0] not in experiments.DEVIATION_PARAMS:
            _fail(ConfigError(f"unknown deviation parameter {dev[0]!r}"), USAGE_EXIT)
    try:
        pulse, report, meta = experiments.evaluate_gate(
            cfg.circuit, tg=tg, idle=_idle(cfg), mmax=mmax, kind=kind,
            filter_mhz=p.filter_mhz, distortion=dist, deviate=dev,
            lambdas=p.lambdas, optimize=do_optimize,
            options=OptimizerOptions(seed=seed) if do_optimize else None, seed=seed,
        )
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    row = experiments.gate_row(report, tg_ns=tg)
    waveform = [{"t_ns": float(t), "omega_c_ghz": float(w)}
                for t, w in zip(pulse.times, pulse.omega_c)]
    _emit({"gate.csv": (experiments.GATE_COLUMNS, [row]),
           "waveform.csv": (["t_ns", "omega_c_ghz"], waveform)}, out,
          config=config, experiment="gate", seed=seed)
    click.echo(f"epg={report.epg:.6g} phi_zz={report.phi_zz:.6g}")


@main.command()
@with_common
def designmap(config, out, seed, workers):
    """|zeta| and D* indicator maps versus (alpha_c, omega_c)."""
    cfg = _load(config)
    axes = cfg.job.axes
    try:
        tables = experiments.designmap_tables(
            levels=int(axes.get("levels", 6)),
            delta12_mhz=tuple(axes.get("delta12_mhz", (100.0, 800.0))),
            n_alpha=int(axes.get("n_alpha", 21)),
            n_omega=int(axes.get("n_omega", 161)),
            workers=_workers(workers), seed=seed,
        )
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment="designmap", seed=seed)


@main.command()
@with_common
def stray(config, out, seed, workers):
    """Five-mode stray-coupling sweep: CZ (x) I error versus stray strength."""
    cfg = _load(config)
    axes = cfg.job.axes
    try:
        tables = experiments.stray_tables(
            levels=int(axes.get("levels", 3)),
            kinds=tuple(axes.get("kinds", ("qc", "cc", "qq"))),
            strengths_mhz=tuple(axes.get("strengths_mhz",
                                          (0.5, 1.0, 2.0, 4.0, 8.0, 14.0, 20.0))),
            tg=float(axes.get("tg_ns", 30.0)), seed=seed,
        )
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment="stray", seed=seed)


@main.command()
@with_common
@click.option("--with-coherent", is_flag=True,
              help="Also optimize pulses for the coherent-error column (slow).")
def noise(config, out, seed, workers, with_coherent):
    """Instantaneous rate curves and the RB error budget versus gate time."""
    cfg = _load(config)
    if cfg.noise is None:
        _fail(ConfigError("noise block required for the noise command"), USAGE_EXIT)
    axes = cfg.job.axes
    try:
        tables, _curves = experiments.rates_tables(
            cfg.circuit, cfg.noise,
            lo=float(axes.get("rate_lo_ghz", 5.45)),
            hi=float(axes.get("rate_hi_ghz", 8.2)),
            n=int(axes.get("rate_n", 240)),
        )
        tables.update(experiments.error_vs_tg_tables(
            cfg.circuit, cfg.noise, _idle(cfg),
            tg_list=tuple(axes.get("tg_list", (12, 16, 20, 24, 30, 36, 44, 52, 60))),
            with_coherent=with_coherent, seed=seed,
        ))
        if bool(axes.get("sensitivity", False)):
            tables.update(experiments.sensitivity_tables(cfg.circuit, cfg.noise))
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment="noise", seed=seed)


@main.command()
@with_common
def schemes(config, out, seed, workers):
    """CAQ/CBQ scheme comparison: zeta/D curves and reachable strength."""
    cfg = _load(config)
    axes = cfg.job.axes
    try:
        tables = experiments.schemes_tables(levels=int(axes.get("levels", 6)),
                                            n=int(axes.get("n", 221)),
                                            workers=_workers(workers), seed=seed)
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment="schemes", seed=seed)


SWEEPS = {
    "fig3a": lambda cfg, axes, seed, workers: experiments.locus_tables(
        levels=int(axes.get("levels", 6)),
        delta12_mhz=tuple(axes.get("delta12_mhz", (600.0, 150.0))),
        n_d1c=int(axes.get("n_d1c", 50)), n_g12=int(axes.get("n_g12", 50)),
        workers=workers, seed=seed),
    "fig3b": lambda cfg, axes, seed, workers: experiments.parabola_tables(
        levels=int(axes.get("levels", 6)),
        delta12_mhz=tuple(axes.get("delta12_mhz", (150.0, 600.0, 800.0))),
        n_g12=int(axes.get("n_g12", 21)), workers=workers, seed=seed),
    "fig4a": lambda cfg, axes, seed, workers: experiments.epg_vs_tg_tables(
        cfg.circuit, cfg.pulse.idle_ghz or FIG2_IDLE,
        tg_list=tuple(axes.get("tg_list", (16, 20, 24, 26, 30, 36, 40))),
        kinds=tuple(axes.get("kinds", ("awp",))),
        mmax_list=tuple(axes.get("mmax_list", (1,))),
        filter_mhz=cfg.pulse.filter_mhz, seed=seed),
    "fig4b": lambda cfg, axes, seed, workers: experiments.robustness_tables(
        cfg.circuit, cfg.pulse.idle_ghz or FIG2_IDLE,
        tg=float(axes.get("tg_ns", 30.0)), filter_mhz=cfg.pulse.filter_mhz, seed=seed),
    "fig4c": lambda cfg, axes, seed, workers: experiments.distortion_tables(
        levels=int(axes.get("levels", 5)),
        r_list=tuple(axes.get("r_list", (0.0, 0.05, 0.1, 0.15, 0.2))),
        delay_ns=float(axes.get("td_ns", 10.0)),
        configs=tuple(axes.get("configs", ("gqc105", "coupler_free"))),
        filter_mhz=cfg.pulse.filter_mhz, seed=seed),
    "figs2": lambda cfg, axes, seed, workers: experiments.perturbation_tables(
        levels=int(axes.get("levels", 6)),
        delta12_mhz=float(axes.get("delta12_mhz", 600.0)),
        workers=workers, seed=seed),
    "figs3": lambda cfg, axes, seed, workers: experiments.sensitivity_tables(
        cfg.circuit, cfg.noise, tg=float(axes.get("tg_ns", 40.0)), seed=seed),
}


@main.command()
@with_common
def sweep(config, out, seed, workers):
    """Run the experiment named in the config's job block."""
    cfg = _load(config)
    name = cfg.job.experiment
    if name in ("", None):
        _fail(ConfigError("job.experiment missing from config"), USAGE_EXIT)
    if name not in SWEEPS:
        _fail(ConfigError(f"unknown experiment {name!r}; choices: {sorted(SWEEPS)}"),
              USAGE_EXIT)
    seed = seed if seed else cfg.job.seed
    try:
        tables = SWEEPS[name](cfg, cfg.job.axes, seed, _workers(workers or cfg.job.workers))
    except CzPulseError as exc:
        _fail(exc, NUMERIC_EXIT)
    _emit(tables, out, config=config, experiment=name, seed=seed)


if __name__ == "__main__":
    main()
