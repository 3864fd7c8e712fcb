"""Coupler-frequency waveform generation and transforms.

The adiabatically weighted pulse (AWP) integrates

    d(omega_c)/dt = (1/D(omega_c)) * sum_m lambda_m sin(2 pi m t / T_g),

so the sweep slows down wherever the instantaneous diabaticity D is large.
Because the equation is separable and every sine component integrates to zero
over [0, T_g], the waveform returns to the idle frequency regardless of the
amplitudes.  The plain Fourier pulse is the same construction with D == 1
(closed form).  Net-Zero pulses are generated in flux at the sweet spot and
concatenated with a flux-negated copy, canceling low-frequency flux-noise
sensitivity.

lambda_m are free scalars fixed by calibration (the 1/D prefactor absorbs
their units); they are reported as plain numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AdiabaticityError,
    CalibrationError,
    ConfigError,
    DomainError,
    IntegratorError,
    WaveformRangeError,
)
from .model import CircuitSpec, flux_to_frequency, frequency_to_flux
from .spectrum import OperatingMap, operating_map

#: Default sample spacing, ns (>= 20 samples per ns).
DT = 0.05

#: Return-to-idle tolerance, GHz (1 kHz).
IDLE_TOL = 1e-6


@dataclass(frozen=True)
class PulseShape:
    """Sampled coupler-frequency waveform plus its generating parameters.

    ``times`` are uniform with t_0 = 0; ``gate_time`` is the generating T_g.
    Filtering and distortion extend the sampled window past T_g (the ring-out
    is part of the gate), recorded in the provenance fields.  Net-Zero pulses
    also carry the signed flux waveform (Phi0 units).
    """

    gate_time: float
    times: np.ndarray
    omega_c: np.ndarray
    lambdas: tuple[float, ...]
    idle_frequency: float
    kind: str
    filter_cutoff: float | None = None
    over_filtered: bool = False
    distortion: tuple[float, float] | None = None
    flux: np.ndarray | None = None

    def __post_init__(self):
        t, w = self.times, self.omega_c
        if len(t) != len(w) or len(t) < 2:
            raise ConfigError("pulse needs matching times/omega arrays")
        if t[0] != 0.0:
            raise ConfigError("pulse samples must start at t = 0")
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ConfigError("pulse samples must be uniformly spaced")
        if steps[0] > 1.0 / 20 + 1e-12:
            raise ConfigError("pulse needs at least 20 samples per ns")
        if w[0] != self.idle_frequency:
            raise ConfigError("pulse must start exactly at the idle frequency")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def resampled(self, dt: float) -> "PulseShape":
        """Same waveform linearly interpolated to a finer step."""
        n = int(round(self.duration / dt))
        t = np.arange(n + 1) * dt
        w = np.interp(t, self.times, self.omega_c)
        w[0] = self.idle_frequency
        flux = np.interp(t, self.times, self.flux) if self.flux is not None else None
        return replace(self, times=t, omega_c=w, flux=flux)

    def signed_slope_per_flux(self, spec: CircuitSpec):
        """d omega_c / d Phi along the pulse, GHz/Phi0, honoring the flux sign."""
        if spec.flux_map is None:
            raise ConfigError("circuit has no flux map")
        if self.flux is not None:
            phis = self.flux
        else:
            phis = np.array([frequency_to_flux(spec.flux_map, w) for w in self.omega_c])
        return np.array([flux_to_frequency(spec.flux_map, p)[1] if abs(p) > 0 else 0.0
                         for p in phis])


def _drive(lambdas, gate_time):
    lam = np.asarray(lambdas, dtype=float)
    ms = np.arange(1, len(lam) + 1)

    def s(t):
        if t > gate_time:
            return 0.0
        return float(np.dot(lam, np.sin(2.0 * math.pi * ms * t / gate_time)))

    return s


def awp_generate(spec: CircuitSpec, gate_time: float, lambdas, idle_frequency: float,
                 *, omap: OperatingMap | None = None, dt: float = DT) -> PulseShape:
    """Integrate the D-weighted pulse ODE with classic RK4 at the sample step."""
    if omap is None:
        omap = operating_map(spec, idle_frequency)
    drive = _drive(lambdas, gate_time)
    lo, hi = omap.omega_lo, omap.omega_hi
    d_of = omap.d_scalar()

    def rhs(t, w):
        if not lo <= w <= hi:
            raise WaveformRangeError(
                f"trajectory left the operating table at {w:.4f} GHz "
                f"(range [{lo:.4f}, {hi:.4f}])"
            )
        d = d_of(w)
        if d <= 0:
            raise AdiabaticityError(f"non-positive D = {d} at {w:.4f} GHz")
        return drive(t) / d

    # RK4 with substeps: the equation is stiff at the dispersive end (small
    # D means steep slopes), and the return-to-idle invariant needs the
    # integration error well under 1 kHz at any amplitude; the substep count
    # adapts upward for extreme excursions
    n = int(round(gate_time / dt))
    t = np.arange(n + 1) * dt
    w = np.empty(n + 1)
    ladders = (4, 16, 64, 256)
    for nsub in ladders:
        h = dt / nsub
        w[0] = idle_frequency
        try:
            for k in range(n):
                wk = w[k]
                for j in range(nsub):
                    tj = t[k] + j * h
                    k1 = rhs(tj, wk)
                    k2 = rhs(tj + h / 2, wk + h / 2 * k1)
                    k3 = rhs(tj + h / 2, wk + h / 2 * k2)
                    k4 = rhs(tj + h, wk + h * k3)
                    wk = wk + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                w[k + 1] = wk
        except WaveformRangeError:
            # stage points overshoot the table edge at steep slopes; retry
            # finer before concluding the trajectory truly left the range
            if nsub == ladders[-1]:
                raise
            continue
        if abs(w[-1] - idle_frequency) <= IDLE_TOL:
            break
    else:
        raise IntegratorError(
            f"AWP failed to return to idle: |dw| = {abs(w[-1]-idle_frequency):.2e} GHz"
        )
    w[-1] = idle_frequency
    return PulseShape(gate_time=float(gate_time), times=t, omega_c=w,
                      lambdas=tuple(float(x) for x in lambdas),
                      idle_frequency=float(idle_frequency), kind="awp")


def fourier_generate(gate_time: float, lambdas, idle_frequency: float,
                     *, dt: float = DT) -> PulseShape:
    """Plain Fourier pulse (D == 1): closed-form sum of (1 - cos) terms."""
    lam = np.asarray(lambdas, dtype=float)
    ms = np.arange(1, len(lam) + 1)
    n = int(round(gate_time / dt))
    t = np.arange(n + 1) * dt
    phase = 2.0 * math.pi * np.outer(t, ms) / gate_time
    w = idle_frequency + ((1.0 - np.cos(phase)) * (lam * gate_time / (2.0 * math.pi * ms))).sum(axis=1)
    w[0] = idle_frequency
    w[-1] = idle_frequency
    return PulseShape(gate_time=float(gate_time), times=t, omega_c=w,
                      lambdas=tuple(float(x) for x in lambdas),
                      idle_frequency=float(idle_frequency), kind="fourier")


def netzero(spec: CircuitSpec, half_gate_time: float, lambdas, idle_frequency: float,
            *, omap: OperatingMap | None = None, dt: float = DT) -> PulseShape:
    """Two opposite-flux unipolar halves; total duration 2 x half_gate_time.

    Requires idling at the flux sweet spot so the flux-negated copy maps to
    the same frequency excursion.
    """
    if spec.flux_map is None:
        raise ConfigError("Net-Zero pulses need a flux map")
    phi_idle = frequency_to_flux(spec.flux_map, idle_frequency)
    if abs(phi_idle) > 1e-6:
        raise ConfigError(
            f"Net-Zero idling must sit at the sweet spot (phi = 0), got phi = {phi_idle:.4g}"
        )
    half = awp_generate(spec, half_gate_time, lambdas, idle_frequency, omap=omap, dt=dt)
    phi_half = np.array([frequency_to_flux(spec.flux_map, wk) for wk in half.omega_c])
    n = len(half.times) - 1
    t = np.arange(2 * n + 1) * dt
    w = np.concatenate([half.omega_c, half.omega_c[1:]])
    flux = np.concatenate([phi_half, -phi_half[1:]])
    return PulseShape(gate_time=2.0 * float(half_gate_time), times=t, omega_c=w,
                      lambdas=tuple(float(x) for x in lambdas),
                      idle_frequency=float(idle_frequency), kind="netzero", flux=flux)


def apply_filter(pulse: PulseShape, cutoff_mhz: float) -> PulseShape:
    """Gaussian low-pass with -3 dB point at ``cutoff_mhz``.

    The transfer function is exp(-w^2 sigma_t^2 / 2); the waveform is padded
    with the idle value on both sides (6 sigma) so the smoothed ring-in/out is
    kept and the endpoints stay at idle within 1 kHz.
    """
    if cutoff_mhz <= 0:
        raise DomainError("filter cutoff must be positive")
    w_cut = 2.0 * math.pi * cutoff_mhz * 1e-3  # rad/ns
    sigma = math.sqrt(math.log(2.0)) / w_cut
    dt = pulse.dt
    half = int(math.ceil(6.0 * sigma / dt))
    kern = np.exp(-0.5 * (np.arange(-half, half + 1) * dt / sigma) ** 2)
    kern /= kern.sum()

    delta = pulse.omega_c - pulse.idle_frequency
    padded = np.concatenate([np.zeros(half), delta, np.zeros(half)])
    out = np.convolve(padded, kern, mode="same")
    if max(abs(out[0]), abs(out[-1])) > IDLE_TOL:
        raise IntegratorError("filtered endpoints deviate from idle by > 1 kHz")
    out[0] = 0.0
    out[-1] = 0.0
    t = np.arange(len(out)) * dt
    flux = None
    if pulse.flux is not None:
        fpad = np.concatenate([np.zeros(half), pulse.flux, np.zeros(half)])
        flux = np.convolve(fpad, kern, mode="same")
    over = cutoff_mhz * 1e-3 < 10.0 / pulse.gate_time
    return replace(pulse, times=t, omega_c=pulse.idle_frequency + out,
                   filter_cutoff=float(cutoff_mhz), over_filtered=bool(over), flux=flux)


def apply_distortion(pulse: PulseShape, r: float, delay: float) -> PulseShape:
    """Reflection distortion: delta(t) -> delta(t) + r * delta(t - delay).

    The sampled window is extended by the delay so the reflected tail is kept;
    it decays back to idle on its own and the final sample is clamped there.
    r = 0 is the exact identity.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError("reflection coefficient must satisfy 0 <= r < 1")
    if delay >= pulse.gate_time:
        raise DomainError("reflection delay must be shorter than the gate time")
    if r == 0.0:
        return replace(pulse)
    dt = pulse.dt
    nd = int(round(delay / dt))
    delta = pulse.omega_c - pulse.idle_frequency
    n = len(delta)
    out = np.zeros(n + nd)
    out[:n] += delta
    out[nd:nd + n] += r * delta
    out[-1] = 0.0
    t = np.arange(len(out)) * dt
    flux = None
    if pulse.flux is not None:
        fx = np.zeros(n + nd)
        fx[:n] += pulse.flux
        fx[nd:nd + n] += r * pulse.flux
        fx[-1] = pulse.flux[-1]
        flux = fx
    return replace(pulse, times=t, omega_c=pulse.idle_frequency + out,
                   distortion=(float(r), float(delay)), flux=flux)


def conditional_phase(pulse: PulseShape, omap: OperatingMap) -> float:
    """phi_zz = integral of zeta(omega_c(t)) dt along the pulse, rad."""
    if not omap.contains(pulse.omega_c):
        raise WaveformRangeError("pulse leaves the tabulated zeta range")
    return float(np.trapezoid(omap.zeta(pulse.omega_c), pulse.times))


def calibrate_conditional_phase(spec: CircuitSpec, gate_time: float, ratios,
                                idle_frequency: float, target_phase: float = math.pi,
                                *, omap: OperatingMap | None = None, kind: str = "awp",
                                filter_mhz: float | None = None,
                                distortion: tuple[float, float] | None = None,
                                zeta_map: OperatingMap | None = None,
                                transform=None,
                                tol: float = 1e-4, dt: float = DT) -> tuple[float, ...]:
    """Scale ``ratios`` so |phi_zz| hits ``target_phase`` within ``tol`` rad.

    Bisection on the overall lambda scale; the excursion direction is taken
    from the operating table (toward its far edge).  ``zeta_map`` lets the
    phase integral run against a different circuit's zeta than the one whose
    D table shapes the pulse (in-situ recalibration on a deviated system);
    ``transform`` is applied to each trial pulse before integration (e.g. a
    control-frequency offset).  Raises CalibrationError when the target is
    unreachable within the tabulated range.
    """
    if omap is None:
        omap = operating_map(spec, idle_frequency)
    if zeta_map is None:
        zeta_map = omap
    target = abs(float(target_phase))
    ratios = np.asarray(ratios, dtype=float)
    if np.max(np.abs(ratios)) == 0:
        raise ConfigError("lambda ratios must not all vanish")
    ratios = ratios / np.max(np.abs(ratios))
    sign = -1.0 if omap.omega_lo < idle_frequency else 1.0

    def phase_of(scale: float) -> float:
        lam = tuple(sign * scale * ratios)
        if kind == "awp":
            p = awp_generate(spec, gate_time, lam, idle_frequency, omap=omap, dt=dt)
        elif kind == "fourier":
            p = fourier_generate(gate_time, lam, idle_frequency, dt=dt)
        elif kind == "netzero":
            p = netzero(spec, gate_time / 2.0, lam, idle_frequency, omap=omap, dt=dt)
        else:
            raise ConfigError(f"unknown pulse kind {kind!r}")
        if distortion is not None and distortion[0] != 0.0:
            p = apply_distortion(p, *distortion)
        if filter_mhz is not None:
            p = apply_filter(p, filter_mhz)
        if transform is not None:
            p = transform(p)
        return abs(conditional_phase(p, zeta_map))

    if target == 0.0:
        return tuple(0.0 * ratios)

    # bracket: grow the scale until the phase exceeds the target, bisecting
    # the feasibility edge if the trajectory hits the table boundary first
    s_lo, p_lo = 0.0, 0.0
    s_hi = None
    for _ in range(60):
        s_try = 1e-3 if s_lo == 0.0 else 2.0 * s_lo
        try:
            p_try = phase_of(s_try)
        except (WaveformRangeError, IntegratorError):
            bad = s_try
            for _ in range(40):
                mid = 0.5 * (s_lo + bad)
                try:
                    p_mid = phase_of(mid)
                except (WaveformRangeError, IntegratorError):
                    bad = mid
                    continue
                if p_mid >= target:
                    s_hi = mid
                    break
                s_lo, p_lo = mid, p_mid
            if s_hi is None:
                raise CalibrationError(
                    f"conditional phase {target:.4f} rad unreachable: "
                    f"max |phi_zz| = {p_lo:.4f} rad within the operating range"
                )
            break
        if p_try >= target:
            s_hi = s_try
            break
        s_lo, p_lo = s_try, p_try
    if s_hi is None:
        raise CalibrationError("lambda bracketing did not terminate")

    for _ in range(200):
        mid = 0.5 * (s_lo + s_hi)
        p_mid = phase_of(mid)
        if abs(p_mid - target) < tol:
            return tuple(sign * mid * ratios)
        if p_mid < target:
            s_lo = mid
        else:
            s_hi = mid
    raise CalibrationError("phase bisection did not converge")
