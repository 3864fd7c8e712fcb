"""Time-domain gate simulation and error metrics.

The Schrodinger propagator is piecewise-constant: per sample step dt the
midpoint Hamiltonian is exponentiated through its eigendecomposition, so
every step is unitary to machine precision.  Gate quality is reported on the
computational subspace spanned by the adiabatic states at the idle bias,
after closed-form virtual-Z correction of the single-qubit phases:

    phi_k  = -arg U[e_k, e_k]          (single excitation on qubit k)
    phi_zz = arg U[11, 11] + phi_1 + phi_2        (mod 2pi, in (-pi, pi])
    EPG    = 1 - |Tr(U_target^dag U_corrected) / d|^2

with the global phase fixed so U[00, 00] is real positive.

The Lindblad oracle lives in the reduced basis {|00>, |01>, |10>, |11>, |l>}
with time-dependent jump operators c_i(t) = sqrt(gamma_i(t)) |dst><src| built
between instantaneous adiabatic states, and the diagonal computational-state
Hamiltonian taken from the operating map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, IntegratorError
from .model import CircuitSpec, assemble_raw, computational_labels
from .pulse import PulseShape
from .spectrum import OperatingMap, _tracked_point

#: Propagator unitarity tolerance (max |U^dag U - I|).
UNITARITY_TOL = 1e-8

#: Reduced Lindblad basis ordering.
REDUCED_BASIS = ("00", "01", "10", "11", "leak")


def propagate(spec: CircuitSpec, pulse: PulseShape, *, columns: np.ndarray | None = None,
              dt: float | None = None) -> np.ndarray:
    """Propagate the full truncated-space Schrodinger equation along a pulse.

    Returns the propagator applied to ``columns`` (default: the identity,
    i.e. the full dim x dim unitary).  ``dt`` resamples the pulse first
    (convergence checks); the stated contract is dt <= 0.05 ns.
    """
    if dt is not None and abs(dt - pulse.dt) > 1e-12:
        pulse = pulse.resampled(dt)
    if pulse.dt > 0.05 + 1e-12:
        raise ConfigError(f"propagation step {pulse.dt} ns exceeds 0.05 ns")
    w = pulse.omega_c
    step = pulse.dt
    dim = spec.dim
    u = np.eye(dim, dtype=complex) if columns is None else np.array(columns, dtype=complex)
    for k in range(len(w) - 1):
        h = assemble_raw(spec, 0.5 * (w[k] + w[k + 1]))
        vals, vecs = np.linalg.eigh(h)
        c = vecs.T @ u
        c *= np.exp(-1j * vals * step)[:, None]
        u = vecs @ c
    gram = u.conj().T @ u
    defect = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    if defect > UNITARITY_TOL:
        raise IntegratorError(f"propagator unitarity defect {defect:.2e} > {UNITARITY_TOL}")
    return u


def idle_basis(spec: CircuitSpec, omega_idle: float) -> np.ndarray:
    """Adiabatic computational basis columns (dim x d) at the idle bias."""
    labels = computational_labels(spec)
    vals, vecs, cols = _tracked_point(spec, omega_idle, labels)
    return vecs[:, np.asarray(cols)]


def cz_target(n_qubits: int, pair: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Diagonal CZ (x identity on spectators) on the qubit-binary basis."""
    d = 2 ** n_qubits
    diag = np.ones(d)
    for s in range(d):
        bits = [(s >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)]
        if bits[pair[0]] and bits[pair[1]]:
            diag[s] = -1.0
    return np.diag(diag)


@dataclass
class GateReport:
    """Computational-subspace unitary, extracted phases, EPG and leakage."""

    unitary: np.ndarray        # raw subspace block, global phase fixed
    u_corrected: np.ndarray    # after virtual-Z correction
    phases: tuple[float, ...]  # per-qubit virtual-Z angles
    phi_zz: float
    epg: float
    leakage: np.ndarray        # per input basis state
    unitarity_defect: float

    @property
    def phi1(self) -> float:
        return self.phases[0]

    @property
    def phi2(self) -> float:
        return self.phases[1]

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]


def virtual_z_correct(u_g: np.ndarray, n_qubits: int) -> tuple[np.ndarray, tuple]:
    """Closed-form virtual-Z correction from the single-excitation diagonals."""
    d = u_g.shape[0]
    phases = tuple(
        float(-np.angle(u_g[1 << (n_qubits - 1 - k), 1 << (n_qubits - 1 - k)]))
        for k in range(n_qubits)
    )
    z = np.ones(d, dtype=complex)
    for s in range(d):
        acc = 0.0
        for k in range(n_qubits):
            if (s >> (n_qubits - 1 - k)) & 1:
                acc += phases[k]
        z[s] = np.exp(1j * acc)
    return z[:, None] * u_g, phases


def epg(u_corrected: np.ndarray, target: np.ndarray) -> float:
    """Error per gate: 1 - |Tr(target^dag u)/d|^2."""
    if u_corrected.shape != target.shape:
        raise ConfigError("EPG: unitary and target dimensions differ")
    d = target.shape[0]
    return float(1.0 - abs(np.trace(target.conj().T @ u_corrected) / d) ** 2)


def gate_report(spec: CircuitSpec, pulse: PulseShape, *, target: np.ndarray | None = None,
                gate_pair: tuple[int, int] = (0, 1), dt: float | None = None,
                basis: np.ndarray | None = None) -> GateReport:
    """Simulate a gate and extract the computational-subspace report."""
    nq = len(spec.qubit_indices)
    if basis is None:
        basis = idle_basis(spec, pulse.idle_frequency)
    cols = propagate(spec, pulse, columns=basis, dt=dt)
    gram = cols.conj().T @ cols
    defect = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    u_g = basis.T @ cols
    ph = u_g[0, 0]
    if abs(ph) > 0:
        u_g = u_g * (ph.conjugate() / abs(ph))
    leakage = 1.0 - np.sum(np.abs(u_g) ** 2, axis=0)
    u_corr, phases = virtual_z_correct(u_g, nq)
    idx11 = (1 << (nq - 1 - gate_pair[0])) | (1 << (nq - 1 - gate_pair[1]))
    phi_zz = float(np.angle(u_corr[idx11, idx11]))
    if target is None:
        target = cz_target(nq, gate_pair)
    return GateReport(unitary=u_g, u_corrected=u_corr, phases=phases, phi_zz=phi_zz,
                      epg=epg(u_corr, target), leakage=leakage, unitarity_defect=defect)


def state_averaged_error(channel, target: np.ndarray, states) -> float:
    """Mean 1 - <psi_th| P(rho) |psi_th> over the state set.

    ``channel`` is either a unitary matrix (P(rho) = U rho U^dag) or a
    callable rho -> rho'; ``target`` is the ideal unitary defining psi_th.
    """
    if callable(channel):
        apply = channel
    else:
        u = np.asarray(channel)
        apply = lambda rho: u @ rho @ u.conj().T  # noqa: E731
    total = 0.0
    for psi in states:
        psi = np.asarray(psi, dtype=complex)
        rho = np.outer(psi, psi.conj())
        psi_th = target @ psi
        total += 1.0 - float(np.real(psi_th.conj() @ apply(rho) @ psi_th))
    return total / len(states)


# ---------------------------------------------------------------------------
# reduced Lindblad oracle


def lindblad_propagate(spec: CircuitSpec, pulse: PulseShape, jumps, rho0: np.ndarray,
                       *, omap: OperatingMap, include_hamiltonian: bool = True,
                       rtol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
    """Integrate the reduced-basis Lindblad equation along the pulse.

    ``jumps`` is a list of (rate_curve, (src, dst)) with rate_curve a callable
    of omega_c (GHz) returning a nonnegative rate in 1/ns, and src/dst in
    {"00", "01", "10", "11", "leak"}.  Trace preservation is enforced to 1e-6
    and positivity monitored to -1e-8 on the final state.
    """
    idx = {s: i for i, s in enumerate(REDUCED_BASIS)}
    labels = computational_labels(spec)
    if len(labels) != 4:
        raise ConfigError("the reduced Lindblad model is two-qubit only")
    times, omegas = pulse.times, pulse.omega_c

    ops = []
    for curve, (src, dst) in jumps:
        rates = np.asarray([curve(w) for w in omegas], dtype=float)
        if np.any(rates < -1e-15):
            raise ConfigError(f"negative jump rate for {src}->{dst}")
        ops.append((np.clip(rates, 0.0, None), idx[src], idx[dst]))

    # interaction picture of the diagonal H(t): jump operators |dst><src| only
    # move populations and damp coherences, so the dissipator is
    # frame-invariant and the Hamiltonian phases apply exactly at the end
    def rhs(t, y):
        rho = y.reshape(5, 5)
        drho = np.zeros_like(rho)
        for rates, i_src, i_dst in ops:
            g = np.interp(t, times, rates)
            if g <= 0:
                continue
            drho[i_dst, i_dst] += g * rho[i_src, i_src]
            drho[i_src, :] -= 0.5 * g * rho[i_src, :]
            drho[:, i_src] -= 0.5 * g * rho[:, i_src]
        return drho.ravel()

    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape == (4, 4):
        full = np.zeros((5, 5), dtype=complex)
        full[:4, :4] = rho0
        rho0 = full
    if ops:
        sol = solve_ivp(rhs, (times[0], times[-1]), rho0.ravel(), method="RK45",
                        rtol=rtol, atol=atol, dense_output=False)
        if not sol.success:
            raise IntegratorError(f"Lindblad integration failed: {sol.message}")
        rho = sol.y[:, -1].reshape(5, 5)
    else:
        rho = rho0.copy()
    if include_hamiltonian:
        phases = np.zeros(5)
        for j, lab in enumerate(labels[1:], start=1):
            phases[j] = np.trapezoid(omap.omega_tilde(lab, omegas), times)
        u = np.exp(-1j * phases)
        rho = (u[:, None] * rho) * u.conj()[None, :]
    drift = abs(np.trace(rho).real - np.trace(rho0).real)
    if drift > 1e-6:
        raise IntegratorError(f"Lindblad trace drift {drift:.2e} > 1e-6")
    mineig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).real))
    if mineig < -1e-8:
        raise IntegratorError(f"Lindblad positivity violated: min eig {mineig:.2e}")
    return rho
