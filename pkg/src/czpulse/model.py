"""Circuit model: anharmonic modes, exchange couplings, truncated Fock Hamiltonian.

A circuit is a set of weakly anharmonic bosonic modes (transmon-like), one of
which is flux tunable, with capacitive exchange couplings

    H = sum_i [w_i n_i + (alpha_i/2) n_i (n_i - 1)]
        + sum_(i<j) g_ij (a_i + a_i^dag)(a_j + a_j^dag),

    g_ij = rho_ij sqrt(w_i w_j),

with the counter-rotating terms kept (no rotating-wave approximation).

Unit conventions
----------------
All configuration input/output uses ordinary frequency in GHz (w/2pi).
Matrix entries, eigen-energies and rates are internal angular frequencies in
rad/ns.  Time is in ns, flux in units of Phi0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError, SingularityError

TWO_PI = 2.0 * math.pi

#: Valid coupler-frequency range for Hamiltonian assembly, GHz.
OMEGA_C_RANGE = (1.0, 20.0)

#: Dispersive-coupling bound on |rho|; larger values are rejected at load time.
RHO_MAX = 0.1


@dataclass(frozen=True)
class ModeSpec:
    """One anharmonic mode: frequency/anharmonicity in GHz, Fock truncation."""

    label: str
    frequency: float
    anharmonicity: float
    levels: int
    tunable: bool = False

    def __post_init__(self):
        if self.levels < 2:
            raise ConfigError(f"mode {self.label!r}: levels must be >= 2, got {self.levels}")
        if not self.frequency > 0:
            raise ConfigError(f"mode {self.label!r}: frequency must be > 0 GHz")


@dataclass(frozen=True)
class CouplingSpec:
    """Exchange coupling between modes ``pair`` with dimensionless rho (sign allowed)."""

    pair: tuple[int, int]
    rho: float

    def __post_init__(self):
        i, j = self.pair
        object.__setattr__(self, "pair", (int(i), int(j)))
        if not self.pair[0] < self.pair[1]:
            raise ConfigError(f"coupling pair must be ordered i < j, got {self.pair}")
        if not abs(self.rho) < RHO_MAX:
            raise ConfigError(
                f"coupling {self.pair}: |rho| = {abs(self.rho)} outside dispersive regime (< {RHO_MAX})"
            )


@dataclass(frozen=True)
class FluxMapSpec:
    """Split-transmon coupler frequency vs external flux.

    w_c(Phi) = (w_max + |alpha_c|) sqrt(|cos(pi Phi/Phi0)|) - |alpha_c|,
    the standard symmetric-junction approximation, parameterized by the
    zero-flux maximum frequency and the coupler anharmonicity (GHz).
    """

    omega_max: float
    alpha_c: float

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ConfigError("flux map: omega_max must be > 0 GHz")


@dataclass(frozen=True)
class CircuitSpec:
    """Static circuit: modes, couplings, computational-qubit designation."""

    modes: tuple[ModeSpec, ...]
    couplings: tuple[CouplingSpec, ...]
    qubit_indices: tuple[int, ...]
    flux_map: FluxMapSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "qubit_indices", tuple(int(q) for q in self.qubit_indices))
        n = len(self.modes)
        tunables = [i for i, m in enumerate(self.modes) if m.tunable]
        if len(tunables) != 1:
            raise ConfigError(f"exactly one tunable mode required, found {len(tunables)}")
        if not self.qubit_indices:
            raise ConfigError("at least one computational qubit index required")
        for q in self.qubit_indices:
            if not 0 <= q < n:
                raise ConfigError(f"qubit index {q} out of range")
        if len(set(self.qubit_indices)) != len(self.qubit_indices):
            raise ConfigError("duplicate qubit indices")
        seen = set()
        for c in self.couplings:
            i, j = c.pair
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigError(f"coupling pair {c.pair} references missing mode")
            if c.pair in seen:
                raise ConfigError(f"duplicate coupling pair {c.pair}")
            seen.add(c.pair)

    @property
    def coupler_index(self) -> int:
        return next(i for i, m in enumerate(self.modes) if m.tunable)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(m.levels for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.levels))

    def rho(self, i: int, j: int) -> float:
        """Coupling coefficient for the (unordered) mode pair, 0 if absent."""
        key = (min(i, j), max(i, j))
        for c in self.couplings:
            if c.pair == key:
                return c.rho
        return 0.0

    def replace_mode(self, index: int, **changes) -> "CircuitSpec":
        modes = list(self.modes)
        modes[index] = replace(modes[index], **changes)
        return replace(self, modes=tuple(modes))

    def replace_rho(self, pair: tuple[int, int], rho: float) -> "CircuitSpec":
        key = (min(pair), max(pair))
        coups = [replace(c, rho=rho) if c.pair == key else c for c in self.couplings]
        if key not in [c.pair for c in self.couplings]:
            coups.append(CouplingSpec(pair=key, rho=rho))
        return replace(self, couplings=tuple(coups))

    def with_levels(self, levels: int) -> "CircuitSpec":
        """Copy with a uniform Fock truncation on every mode."""
        modes = tuple(replace(m, levels=levels) for m in self.modes)
        return replace(self, modes=modes)


@dataclass(frozen=True)
class FockBasis:
    """Lexicographically ordered occupation-number basis with index bijection."""

    levels: tuple[int, ...]
    occupations: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.occupations)

    def index_of(self, occ: tuple[int, ...]) -> int:
        # mixed-radix index, consistent with lexicographic ordering
        idx = 0
        for n, lev in zip(occ, self.levels):
            if not 0 <= n < lev:
                raise KeyError(f"occupation {occ} outside truncation {self.levels}")
            idx = idx * lev + n
        return idx


def build_basis(spec: CircuitSpec) -> FockBasis:
    """Enumerate the truncated Fock basis of ``spec`` in lexicographic order."""
    levels = spec.levels
    occs = tuple(itertools.product(*(range(l) for l in levels)))
    return FockBasis(levels=levels, occupations=occs)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian Hamiltonian in rad/ns with its Fock basis."""

    entries: np.ndarray
    basis: FockBasis

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


# ---------------------------------------------------------------------------
# operator assembly (cached per circuit)


def _lowering(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)


def _embed(levels: tuple[int, ...], index: int, op: np.ndarray) -> np.ndarray:
    mats = [op if k == index else np.eye(l) for k, l in enumerate(levels)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@lru_cache(maxsize=8)
def _structure(spec: CircuitSpec):
    """Frequency-independent pieces of H(omega_c).

    H(wc) = diag(d0 + wc * n_c) + H_off + sqrt(wc) * C,
    with wc the tunable mode's angular frequency; C collects the
    coupler-frequency dependence of the qubit-coupler couplings.
    """
    levels = spec.levels
    basis = build_basis(spec)
    occ = np.array(basis.occupations, dtype=float)  # (dim, nmodes)
    c = spec.coupler_index

    d0 = np.zeros(basis.dim)
    for i, m in enumerate(spec.modes):
        n = occ[:, i]
        anh = TWO_PI * m.anharmonicity / 2.0 * n * (n - 1.0)
        d0 += anh
        if i != c:
            d0 += TWO_PI * m.frequency * n
    n_c = occ[:, c].copy()

    quads = {}

    def quad(i):
        if i not in quads:
            a = _lowering(levels[i])
            quads[i] = _embed(levels, i, a + a.T)
        return quads[i]

    h_off = np.zeros((basis.dim, basis.dim))
    c_sum = np.zeros_like(h_off)
    for cp in spec.couplings:
        i, j = cp.pair
        xx = quad(i) @ quad(j)
        if c in (i, j):
            other = i if j == c else j
            w_other = TWO_PI * spec.modes[other].frequency
            c_sum += cp.rho * math.sqrt(w_other) * xx
        else:
            g = cp.rho * math.sqrt(
                TWO_PI * spec.modes[i].frequency * TWO_PI * spec.modes[j].frequency
            )
            h_off += g * xx
    return basis, d0, n_c, h_off, c_sum


def _check_omega_c(omega_c: float):
    lo, hi = OMEGA_C_RANGE
    if not lo <= omega_c <= hi:
        raise DomainError(f"coupler frequency {omega_c} GHz outside [{lo}, {hi}] GHz")


def assemble_raw(spec: CircuitSpec, omega_c: float) -> np.ndarray:
    """Dense real-symmetric H (rad/ns) at coupler frequency ``omega_c`` (GHz)."""
    _check_omega_c(omega_c)
    basis, d0, n_c, h_off, c_sum = _structure(spec)
    wc = TWO_PI * omega_c
    h = h_off + math.sqrt(wc) * c_sum
    h[np.diag_indices_from(h)] += d0 + wc * n_c
    return h


def assemble_hamiltonian(spec: CircuitSpec, omega_c: float) -> HamiltonianMatrix:
    """Assemble the truncated-Fock Hamiltonian at ``omega_c`` (GHz)."""
    basis, *_ = _structure(spec)
    return HamiltonianMatrix(entries=assemble_raw(spec, omega_c), basis=basis)


def apply_dh_domega_c(spec: CircuitSpec, omega_c: float, block: np.ndarray) -> np.ndarray:
    """(dH/dw_c) @ block, with dH/dw_c = n_c + C/(2 sqrt(w_c)) (dimensionless).

    Includes both the coupler number operator and the coupling-strength
    dependence dg_ic/dw_c = g_ic/(2 w_c).
    """
    _, _, n_c, _, c_sum = _structure(spec)
    wc = TWO_PI * omega_c
    return n_c[:, None] * block + (c_sum @ block) / (2.0 * math.sqrt(wc))


@lru_cache(maxsize=32)
def mode_quadrature(spec: CircuitSpec, index: int) -> np.ndarray:
    """a_i + a_i^dag embedded in the full space (noise matrix elements)."""
    levels = spec.levels
    a = _lowering(levels[index])
    return _embed(levels, index, a + a.T)


def mode_number(spec: CircuitSpec, index: int) -> np.ndarray:
    """Occupation of one mode as a diagonal vector over the Fock basis."""
    basis = build_basis(spec)
    return np.array([occ[index] for occ in basis.occupations], dtype=float)


# ---------------------------------------------------------------------------
# effective qubit-qubit coupling


def effective_coupling(spec: CircuitSpec, omega_c: float) -> float:
    """Net qubit-qubit exchange coupling g~ in rad/ns.

    g~ = g_12 + (g_1c g_2c / 2)(1/D_1c + 1/D_2c - 1/S_1c - 1/S_2c)
    with D_ic = w_i - w_c and S_ic = w_i + w_c; requires the two-qubit,
    one-coupler topology.
    """
    if len(spec.qubit_indices) != 2:
        raise ConfigError("effective_coupling requires exactly two computational qubits")
    _check_omega_c(omega_c)
    q1, q2 = spec.qubit_indices
    c = spec.coupler_index
    w1 = TWO_PI * spec.modes[q1].frequency
    w2 = TWO_PI * spec.modes[q2].frequency
    wc = TWO_PI * omega_c
    g1c = spec.rho(q1, c) * math.sqrt(w1 * wc)
    g2c = spec.rho(q2, c) * math.sqrt(w2 * wc)
    g12 = spec.rho(q1, q2) * math.sqrt(w1 * w2)
    d1, d2 = w1 - wc, w2 - wc
    if min(abs(d1), abs(d2)) < 1e-9:
        raise SingularityError("degenerate qubit-coupler frequency (Delta_ic = 0)")
    return g12 + 0.5 * g1c * g2c * (1.0 / d1 + 1.0 / d2 - 1.0 / (w1 + wc) - 1.0 / (w2 + wc))


def effective_coupling_zero(spec: CircuitSpec, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Bisection root of g~(omega_c) = 0 on [lo, hi] GHz."""
    flo, fhi = effective_coupling(spec, lo), effective_coupling(spec, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise DomainError(f"g~ has no sign change on [{lo}, {hi}] GHz")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = effective_coupling(spec, mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# flux map


def flux_to_frequency(fmap: FluxMapSpec, phi: float) -> tuple[float, float]:
    """Coupler frequency (GHz) and slope (GHz/Phi0) at flux ``phi`` (Phi0 units)."""
    c = math.cos(math.pi * phi)
    if abs(c) < 1e-12:
        raise SingularityError("flux at half-integer flux quantum: singular slope")
    amp = fmap.omega_max + abs(fmap.alpha_c)
    root = math.sqrt(abs(c))
    omega = amp * root - abs(fmap.alpha_c)
    sign = 1.0 if c > 0 else -1.0
    domega = -amp * math.pi * math.sin(math.pi * phi) * sign / (2.0 * root)
    return omega, domega


def frequency_to_flux(fmap: FluxMapSpec, omega_c: float) -> float:
    """Invert the flux map on the principal branch phi in [0, 1/2)."""
    amp = fmap.omega_max + abs(fmap.alpha_c)
    val = ((omega_c + abs(fmap.alpha_c)) / amp) ** 2
    if not 0.0 < val <= 1.0 + 1e-12:
        raise DomainError(f"coupler frequency {omega_c} GHz outside flux-map range")
    return math.acos(min(val, 1.0)) / math.pi


def computational_labels(spec: CircuitSpec) -> tuple[tuple[int, ...], ...]:
    """Adiabatic labels of the computational subspace, qubit-binary ordered.

    For qubits (q1, .., qk) the m-th label puts the binary digits of m
    (q1 = most significant) on the qubit modes and 0 on all others.
    """
    nmodes = len(spec.modes)
    out = []
    for bits in itertools.product((0, 1), repeat=len(spec.qubit_indices)):
        occ = [0] * nmodes
        for q, b in zip(spec.qubit_indices, bits):
            occ[q] = b
        out.append(tuple(occ))
    return tuple(out)
