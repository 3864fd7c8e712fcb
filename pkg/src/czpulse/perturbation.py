"""Dispersive-regime ZZ interaction from perturbation theory.

Two routes:

* ``zeta_simplified`` - the two-line closed form valid when
  Sigma_ic >> |Delta_ic| >> g_ic >> g_12, written in terms of the effective
  coupling g~ and nu = g_1c g_2c / (2 Delta_1c Delta_2c).  With equal qubit
  anharmonicity alpha_q it reduces to the quadratic law
      zeta = 4 alpha_q/(Delta_12^2 - alpha_q^2) (g~ - alpha_q nu)^2
             + 4 (2 alpha_c + alpha_q) nu^2,
  whose vertex-independent common point sits at
  (g~, zeta) = (alpha_q nu, (8 alpha_c + 4 alpha_q) nu^2).

* ``zeta_fourth_order_generic`` - a numerical Rayleigh-Schrodinger expansion
  to 4th order over the truncated diabatic basis (the interaction has no
  diagonal part, so the 1st order vanishes identically and the standard
  V_nn = 0 formulas apply).  Each order's correction to the four
  computational diabatic levels is combined as E_11 - E_10 - E_01 + E_00.

The printed closed form of the 2nd order (pure direct coupling) is
transcribed in ``zeta2_direct`` and serves as an exact oracle for the
generic engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DispersiveError, SingularityError
from .model import TWO_PI, CircuitSpec, assemble_raw, build_basis, computational_labels

#: Minimum energy denominator for reachable intermediate states, rad/ns.
DENOMINATOR_MIN = 1e-3

#: Dispersive-validity guard: |Delta_ic| must exceed this multiple of g_ic.
DISPERSIVE_RATIO = 3.0


@dataclass(frozen=True)
class PerturbativeResult:
    """Order-by-order ZZ contributions (rad/ns) and their sum."""

    zeta_orders: tuple[float, float, float, float]
    nu: float

    @property
    def zeta_total(self) -> float:
        return float(sum(self.zeta_orders))


def nu_of(spec: CircuitSpec, omega_c: float) -> float:
    """nu = g_1c g_2c / (2 Delta_1c Delta_2c), dimensionless."""
    q1, q2 = spec.qubit_indices
    c = spec.coupler_index
    w1 = TWO_PI * spec.modes[q1].frequency
    w2 = TWO_PI * spec.modes[q2].frequency
    wc = TWO_PI * omega_c
    g1c = spec.rho(q1, c) * math.sqrt(w1 * wc)
    g2c = spec.rho(q2, c) * math.sqrt(w2 * wc)
    d1, d2 = w1 - wc, w2 - wc
    if min(abs(d1), abs(d2)) < 1e-9:
        raise SingularityError("nu undefined at qubit-coupler degeneracy")
    return g1c * g2c / (2.0 * d1 * d2)


def zeta_simplified(delta12: float, alpha1: float, alpha2: float, alpha_c: float,
                    g_eff: float, nu: float) -> float:
    """Closed-form dispersive zeta (rad/ns in, rad/ns out)."""
    den1 = delta12 + alpha1
    den2 = delta12 - alpha2
    if min(abs(den1), abs(den2)) < 1e-4:
        raise SingularityError("resonant denominator: |Delta_12 +- alpha| too small")
    den = den1 * den2
    first = 2.0 * ((alpha1 + alpha2) * g_eff**2
                   - 2.0 * nu * (2.0 * alpha1 * alpha2 + (alpha1 - alpha2) * delta12) * g_eff) / den
    second = 2.0 * nu**2 * (4.0 * alpha_c + (alpha1 + alpha2) * delta12**2 / den)
    return first + second


def zeta2_direct(g12: float, delta12: float, sigma12: float,
                 alpha1: float, alpha2: float) -> float:
    """Transcribed 2nd-order zeta for pure direct coupling (no ellipses)."""
    g2 = g12 * g12
    return (-2.0 * g2 / (delta12 + alpha1)
            + 2.0 * g2 / (delta12 - alpha2)
            + 2.0 * g2 / (sigma12 + alpha1)
            + 2.0 * g2 / (sigma12 + alpha2)
            - 4.0 * g2 / (sigma12 + alpha1 + alpha2))


def _rs_orders(e0: np.ndarray, v: np.ndarray, n_idx: int) -> tuple[float, float, float]:
    """2nd/3rd/4th Rayleigh-Schrodinger corrections for level ``n_idx``.

    Valid for interactions with vanishing diagonal (V_nn = 0 for all n).
    """
    d = e0[n_idx] - e0
    v_n = v[:, n_idx].copy()
    mask = np.arange(len(e0)) != n_idx
    w = np.zeros_like(v_n)
    w[mask] = v_n[mask] / d[mask]
    u = v @ w
    u[n_idx] = 0.0
    reach = mask & ((np.abs(v_n) > 1e-12) | (np.abs(u) > 1e-12))
    if np.any(reach) and np.min(np.abs(d[reach])) < DENOMINATOR_MIN:
        k = int(np.argmin(np.where(reach, np.abs(d), np.inf)))
        raise DispersiveError(
            f"near-resonant intermediate state: denominator {d[k]:.2e} rad/ns"
        )
    e2 = float(v_n @ w)
    e3 = float(w @ u)
    y = np.zeros_like(u)
    y[mask] = u[mask] / d[mask]
    e4 = float(u @ y - e2 * (w @ w))
    return e2, e3, e4


def zeta_fourth_order_generic(spec: CircuitSpec, omega_c: float) -> PerturbativeResult:
    """Generic 4th-order perturbative zeta over the truncated diabatic basis."""
    q1, q2 = spec.qubit_indices
    c = spec.coupler_index
    wc = TWO_PI * omega_c
    for q in (q1, q2):
        g_qc = abs(spec.rho(q, c)) * math.sqrt(TWO_PI * spec.modes[q].frequency * wc)
        delta = abs(TWO_PI * spec.modes[q].frequency - wc)
        if g_qc > 0 and delta < DISPERSIVE_RATIO * g_qc:
            raise DispersiveError(
                f"|Delta_{q}c| = {delta:.3f} rad/ns below {DISPERSIVE_RATIO} x g = {g_qc:.3f}"
            )
    h = assemble_raw(spec, omega_c)
    e0 = np.diag(h).copy()
    v = h - np.diag(e0)
    basis = build_basis(spec)
    orders = np.zeros(4)
    signs = {0: +1.0, 1: -1.0, 2: -1.0, 3: +1.0}  # 00, 01, 10, 11
    for pos, lab in enumerate(computational_labels(spec)):
        n_idx = basis.index_of(lab)
        e2, e3, e4 = _rs_orders(e0, v, n_idx)
        s = signs[pos]
        orders[1] += s * e2
        orders[2] += s * e3
        orders[3] += s * e4
    return PerturbativeResult(zeta_orders=tuple(orders), nu=nu_of(spec, omega_c))
