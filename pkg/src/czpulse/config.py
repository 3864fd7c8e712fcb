"""YAML run-configuration loading.

One file carries up to four blocks:

circuit:
  modes:      [{label, freq_ghz, anh_ghz, levels, tunable}, ...]
  couplings:  [{pair: [i, j], rho}, ...]
  qubits:     [i, ...]
  flux:       {omega_max_ghz, alpha_c_ghz}          # optional
noise:        {t1_us: [...], flux_a_uphi0sq, sigma_uphi0,
               f_ir_hz, f_uv_hz, white_flux_psd}    # optional block
pulse:        {kind, tg_ns, mmax, lambdas, idle_ghz,
               filter_mhz, distortion: [r, td_ns]}  # optional block
job:          {experiment, axes, seed, workers}     # optional block
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .model import CircuitSpec, CouplingSpec, FluxMapSpec, ModeSpec
from .noise import NoiseSpec


@dataclass(frozen=True)
class PulseConfig:
    kind: str = "awp"
    tg_ns: float = 30.0
    mmax: int = 1
    lambdas: tuple[float, ...] | None = None
    idle_ghz: float | None = None
    filter_mhz: float | None = None
    distortion: tuple[float, float] | None = None


@dataclass(frozen=True)
class JobConfig:
    experiment: str = ""
    seed: int = 0
    workers: int = 1
    axes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    circuit: CircuitSpec
    noise: NoiseSpec | None
    pulse: PulseConfig
    job: JobConfig


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return block[key]


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a mapping")
    if "circuit" not in data:
        raise ConfigError("config: missing 'circuit' block")
    cb = data["circuit"]
    modes = []
    for k, m in enumerate(_require(cb, "modes", "circuit")):
        where = f"circuit.modes[{k}]"
        modes.append(ModeSpec(
            label=str(m.get("label", f"m{k}")),
            frequency=float(_require(m, "freq_ghz", where)),
            anharmonicity=float(_require(m, "anh_ghz", where)),
            levels=int(_require(m, "levels", where)),
            tunable=bool(m.get("tunable", False)),
        ))
    couplings = []
    for k, c in enumerate(cb.get("couplings", [])):
        where = f"circuit.couplings[{k}]"
        pair = _require(c, "pair", where)
        couplings.append(CouplingSpec(pair=(int(pair[0]), int(pair[1])),
                                      rho=float(_require(c, "rho", where))))
    flux = None
    if cb.get("flux"):
        fb = cb["flux"]
        flux = FluxMapSpec(omega_max=float(_require(fb, "omega_max_ghz", "circuit.flux")),
                           alpha_c=float(_require(fb, "alpha_c_ghz", "circuit.flux")))
    circuit = CircuitSpec(modes=tuple(modes), couplings=tuple(couplings),
                          qubit_indices=tuple(_require(cb, "qubits", "circuit")),
                          flux_map=flux)

    noise = None
    if data.get("noise"):
        nb = data["noise"]
        noise = NoiseSpec(
            t1_us=tuple(float(t) for t in _require(nb, "t1_us", "noise")),
            flux_a_uphi0sq=float(nb.get("flux_a_uphi0sq", 0.0)),
            sigma_uphi0=(float(nb["sigma_uphi0"]) if nb.get("sigma_uphi0") is not None else None),
            f_ir_hz=float(nb.get("f_ir_hz", 0.01)),
            f_uv_hz=float(nb.get("f_uv_hz", 1.0e7)),
            white_flux_psd=(float(nb["white_flux_psd"]) if nb.get("white_flux_psd") is not None else None),
        )

    pb = data.get("pulse") or {}
    dist = pb.get("distortion")
    pulse = PulseConfig(
        kind=str(pb.get("kind", "awp")),
        tg_ns=float(pb.get("tg_ns", 30.0)),
        mmax=int(pb.get("mmax", 1)),
        lambdas=(tuple(float(x) for x in pb["lambdas"]) if pb.get("lambdas") else None),
        idle_ghz=(float(pb["idle_ghz"]) if pb.get("idle_ghz") is not None else None),
        filter_mhz=(float(pb["filter_mhz"]) if pb.get("filter_mhz") is not None else None),
        distortion=((float(dist[0]), float(dist[1])) if dist else None),
    )

    jb = data.get("job") or {}
    job = JobConfig(
        experiment=str(jb.get("experiment", "")),
        seed=int(jb.get("seed", 0)),
        workers=int(jb.get("workers", 1)),
        axes={str(k): v for k, v in (jb.get("axes") or {}).items()},
    )
    return RunConfig(circuit=circuit, noise=noise, pulse=pulse, job=job)


def load_config(path) -> RunConfig:
    """Parse a YAML run configuration; errors carry file/line anchors."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{loc}: invalid YAML: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
