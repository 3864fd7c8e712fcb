"""Named circuit configurations used by the bundled experiments and tests.

All frequencies/anharmonicities are ordinary GHz.  Mode ordering follows the
ket convention |n_1 n_c n_2> (qubit, coupler, qubit), and for the five-mode
spectator circuit |n_q1 n_c1 n_q2 n_c2 n_q3>.
"""

from __future__ import annotations

import math

from .model import CircuitSpec, CouplingSpec, FluxMapSpec, ModeSpec, effective_coupling_zero

#: Idle bias (GHz) minimizing residual |zeta| for the reference circuit.
FIG2_IDLE = 7.87


def standard_circuit(levels: int = 6, *, omega1: float = 6.0, omega2: float = 5.4,
                     alpha1: float = -0.25, alpha2: float = -0.25, alpha_c: float = -0.30,
                     rho_1c: float = 0.018, rho_2c: float = 0.018, rho_12: float = 0.0015,
                     flux: bool = True, idle: float = FIG2_IDLE) -> CircuitSpec:
    """Two fixed-frequency transmons plus a tunable coupler (reference params)."""
    modes = (
        ModeSpec("q1", omega1, alpha1, levels),
        ModeSpec("c", idle, alpha_c, levels, tunable=True),
        ModeSpec("q2", omega2, alpha2, levels),
    )
    couplings = []
    if rho_1c:
        couplings.append(CouplingSpec((0, 1), rho_1c))
    if rho_2c:
        couplings.append(CouplingSpec((1, 2), rho_2c))
    if rho_12:
        couplings.append(CouplingSpec((0, 2), rho_12))
    return CircuitSpec(
        modes=modes, couplings=tuple(couplings), qubit_indices=(0, 2),
        flux_map=FluxMapSpec(omega_max=8.2, alpha_c=alpha_c) if flux else None,
    )


def circuit_from_g(omega1: float, omega2: float, omega_c_ref: float,
                   g_1c: float, g_2c: float, g_12: float, *,
                   alpha1: float = -0.25, alpha2: float = -0.25, alpha_c: float = -0.30,
                   levels: int = 6) -> CircuitSpec:
    """Circuit with couplings fixed in GHz at the reference coupler frequency.

    rho is back-solved from g_ij = rho_ij sqrt(w_i w_j), so the target g values
    hold exactly at omega_c_ref (couplings to the coupler still scale as
    sqrt(omega_c) away from it).
    """
    return standard_circuit(
        levels, omega1=omega1, omega2=omega2,
        alpha1=alpha1, alpha2=alpha2, alpha_c=alpha_c,
        rho_1c=g_1c / math.sqrt(omega1 * omega_c_ref),
        rho_2c=g_2c / math.sqrt(omega2 * omega_c_ref),
        rho_12=g_12 / math.sqrt(omega1 * omega2),
        idle=omega_c_ref, flux=False,
    )


#: Coupling variants for the distortion study: label -> (rho_1c, rho_2c, rho_12).
GQC_VARIANTS = {
    "gqc70": (0.012, 0.012, 0.0006),
    "gqc105": (0.018, 0.018, 0.0015),
    "gqc175": (0.030, 0.030, 0.0036),
}


def coupler_free_circuit(levels: int = 6) -> CircuitSpec:
    """Traditional two-transmon design: q2 tunable, idling at 8.0 GHz."""
    modes = (
        ModeSpec("q1", 6.0, -0.25, levels),
        ModeSpec("q2", 8.0, -0.25, levels, tunable=True),
    )
    return CircuitSpec(
        modes=modes, couplings=(CouplingSpec((0, 1), 0.005),), qubit_indices=(0, 1),
    )


COUPLER_FREE_IDLE = 8.0


def five_mode_circuit(levels: int = 3, *, stray: tuple[str, float] | None = None,
                      omega_c2: float | None = None) -> CircuitSpec:
    """Spectator study: Q1-C1-Q2-C2-Q3 chain, C1 tunable, C2 parked.

    ``stray`` adds one extra coupling: kind in {"qq" (Q1-Q3), "qc" (C1-Q3),
    "cc" (C1-C2)} with the given rho.  C2 is parked where the Q2-Q3 net
    coupling vanishes (computed once unless ``omega_c2`` is given).
    """
    if omega_c2 is None:
        omega_c2 = _c2_idle(levels)
    modes = (
        ModeSpec("q1", 6.0, -0.25, levels),
        ModeSpec("c1", FIG2_IDLE, -0.30, levels, tunable=True),
        ModeSpec("q2", 5.4, -0.25, levels),
        ModeSpec("c2", omega_c2, -0.30, levels),
        ModeSpec("q3", 6.1, -0.25, levels),
    )
    couplings = [
        CouplingSpec((0, 1), 0.018),
        CouplingSpec((1, 2), 0.018),
        CouplingSpec((2, 3), 0.018),
        CouplingSpec((3, 4), 0.018),
        CouplingSpec((0, 2), 0.0015),
        CouplingSpec((2, 4), 0.0015),
    ]
    if stray is not None:
        kind, rho = stray
        pair = {"qq": (0, 4), "qc": (1, 4), "cc": (1, 3)}[kind]
        if rho:
            couplings.append(CouplingSpec(pair, rho))
    return CircuitSpec(modes=modes, couplings=tuple(couplings), qubit_indices=(0, 2, 4))


def _c2_idle(levels: int) -> float:
    sub = standard_circuit(levels, omega1=6.1, omega2=5.4)  # Q3-C2-Q2 triple
    return round(effective_coupling_zero(sub, 6.6, 9.5), 4)


#: Section-V scheme variants: (omega2, rho_qc, rho_qq, idle side).
SCHEME_PARAMS = {
    "caq-d": dict(omega2=5.4, rho_qc=0.03, rho_qq=0.004, side="above"),
    "caq-u": dict(omega2=5.9, rho_qc=0.03, rho_qq=0.004, side="above"),
    "cbq-u": dict(omega2=5.4, rho_qc=0.04, rho_qq=-0.004, side="below"),
    "cbq-d": dict(omega2=5.9, rho_qc=0.04, rho_qq=-0.004, side="below"),
}


def scheme_circuit(name: str, levels: int = 6) -> tuple[CircuitSpec, float]:
    """Circuit and idle bias (g~ = 0 root on the scheme's idling side)."""
    p = SCHEME_PARAMS[name]
    spec = standard_circuit(
        levels, omega2=p["omega2"], rho_1c=p["rho_qc"], rho_2c=p["rho_qc"],
        rho_12=p["rho_qq"], flux=False,
    )
    if p["side"] == "above":
        idle = effective_coupling_zero(spec, 6.6, 12.0)
    else:
        idle = effective_coupling_zero(spec, 1.2, min(5.9, p["omega2"]) - 0.45)
    return spec, round(idle, 4)
