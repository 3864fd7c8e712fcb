"""Adiabatic spectra over coupler-frequency grids.

Eigenstates are labeled by their dispersive-limit diabatic partner
|n_1 n_c n_2>^0 and continued through avoided crossings by maximum-overlap
matching, with automatic grid refinement where consecutive overlaps drop.
Derived quantities per grid sample:

* zeta = E_101 - E_100 - E_001 + E_000, the ZZ interaction strength,
* g~  = effective qubit-qubit coupling (two-qubit circuits),
* D    = sum_(s in S) sum_(s' != s) |<s'|ds/dw_c> / (w_s - w_s')|,
  the instantaneous diabaticity measure, with <s'|ds/dw_c> evaluated
  analytically as <s'|dH/dw_c|s> / (w_s - w_s').

Everything in this module is a pure function of the circuit spec; grids in
GHz, energies and zeta in rad/ns, D in (ns/rad)^2 (multiply by 1e-18 for s^2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import linear_sum_assignment

from .errors import AnchorError, ConfigError, SingularityError, TrackingError
from .model import (
    TWO_PI,
    CircuitSpec,
    HamiltonianMatrix,
    apply_dh_domega_c,
    assemble_raw,
    build_basis,
    computational_labels,
    effective_coupling,
)

#: Diabatic overlap required to name an adiabatic state at the anchor.
ANCHOR_OVERLAP = 0.9
#: Consecutive-sample overlap below which the grid is refined.
CONTINUITY_MIN = 0.5
#: Maximum bisection depth during refinement.
MAX_REFINE_DEPTH = 10
#: Energy splitting (rad/ns) below which a pair is flagged divergent in D.
DEGENERACY_TOL = 1e-6


def diagonalize(H) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors.

    The global phase of each eigenvector is fixed so its largest-magnitude
    component is real positive.  Raises on non-Hermitian input.
    """
    mat = H.entries if isinstance(H, HamiltonianMatrix) else np.asarray(H)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
        raise ConfigError("diagonalize: matrix is not Hermitian to 1e-12")
    vals, vecs = np.linalg.eigh(mat)
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    if np.iscomplexobj(vecs):
        phase = np.where(np.abs(lead) > 0, lead / np.abs(lead), 1.0)
        vecs = vecs / phase
    else:
        vecs = vecs * np.where(lead < 0, -1.0, 1.0)
    return vals, vecs


def _identify(vecs: np.ndarray, rows: np.ndarray, threshold: float) -> np.ndarray | None:
    """One-to-one map of diabatic rows -> eigencolumns by global assignment.

    Returns the assigned column per label, or None if any assigned overlap
    falls below ``threshold``.
    """
    m = np.abs(vecs[rows, :])  # (nlab, dim)
    _, cols = linear_sum_assignment(-m)
    if np.min(m[np.arange(len(rows)), cols]) < threshold:
        return None
    return cols


def _d_factor(spec, omega_c, vals, vecs, s_cols,
              window: float = DEGENERACY_TOL) -> tuple[float, bool]:
    """Diabaticity sum over the computational states; pairs split by less than ``window`` are
    excluded (the divergence flag reports true degeneracies below
    DEGENERACY_TOL regardless of the window)."""
    block = vecs[:, s_cols]
    m = vecs.T @ apply_dh_domega_c(spec, omega_c, block)  # <s'|dH/dwc|s>
    total = 0.0
    flagged = False
    for k, col in enumerate(s_cols):
        d = vals - vals[col]
        d[col] = np.inf
        if np.any(np.abs(d) < DEGENERACY_TOL):
            flagged = True
        small = np.abs(d) < window
        if small.any():
            d = d.copy()
            d[small] = np.inf
        total += float(np.sum(np.abs(m[:, k]) / d**2))
    return total, flagged


class _Walker:
    """Maximum-overlap continuation of labeled eigenstates along omega_c.

    With ``jump_on_exhaustion`` the walker crosses features narrower than the
    refinement resolution diabatically (best-overlap assignment at the full
    step) instead of failing: micro-gap crossings from weak stray couplings
    are swept near-fully diabatically by any finite-speed pulse, and the
    operating tables must continue through them.
    """

    def __init__(self, spec: CircuitSpec, labels, omega_anchor: float,
                 eig_cache: dict | None = None, jump_on_exhaustion: bool = False):
        self.spec = spec
        basis = build_basis(spec)
        self.rows = np.array([basis.index_of(l) for l in labels])
        self.labels = tuple(labels)
        vals, vecs = self._eig(omega_anchor, eig_cache)
        cols = _identify(vecs, self.rows, ANCHOR_OVERLAP)
        if cols is None:
            raise AnchorError(
                f"no dispersive anchor at omega_c = {omega_anchor} GHz: "
                f"diabatic overlap below {ANCHOR_OVERLAP} for requested labels"
            )
        self.omega = omega_anchor
        self.vals = vals
        self.vecs = vecs
        self.cols = cols
        self.jump = jump_on_exhaustion

    def _eig(self, omega, cache=None):
        if cache is not None and omega in cache:
            return cache[omega]
        out = diagonalize(assemble_raw(self.spec, omega))
        if cache is not None:
            cache[omega] = out
        return out

    def _attempt(self, omega):
        vals, vecs = self._eig(omega)
        block = self.vecs[:, self.cols]
        m = np.abs(vecs.T @ block)  # (dim, nlab)
        _, cols = linear_sum_assignment(-m.T)
        ovl = m[cols, np.arange(len(cols))]
        # align signs with the previous sample for smooth continuation
        dots = np.einsum("ij,ij->j", vecs[:, cols], block)
        vecs = vecs.copy()
        vecs[:, cols] *= np.where(dots < 0, -1.0, 1.0)
        return vals, vecs, cols, float(np.min(ovl))

    def advance(self, omega_target: float, depth: int = 0) -> list:
        """Step to ``omega_target``, bisecting where continuity drops.

        Returns the list of accepted samples (omega, vals, vecs, cols),
        including refinement-inserted intermediate points.
        """
        vals, vecs, cols, ovl = self._attempt(omega_target)
        if ovl > CONTINUITY_MIN:
            self.omega, self.vals, self.vecs, self.cols = omega_target, vals, vecs, cols
            return [(omega_target, vals, vecs, cols)]
        if depth >= MAX_REFINE_DEPTH or abs(omega_target - self.omega) < 1e-9:
            if self.jump:
                self.omega, self.vals, self.vecs, self.cols = omega_target, vals, vecs, cols
                return [(omega_target, vals, vecs, cols)]
            raise TrackingError(
                f"adiabatic tracking lost between {self.omega} and {omega_target} GHz "
                f"(max overlap {ovl:.3f} after {depth} refinement levels)",
                interval=(min(self.omega, omega_target), max(self.omega, omega_target)),
            )
        mid = 0.5 * (self.omega + omega_target)
        out = self.advance(mid, depth + 1)
        out += self.advance(omega_target, depth + 1)
        return out


@dataclass
class SpectrumGrid:
    """Tracked adiabatic quantities over an ascending coupler-frequency grid."""

    spec: CircuitSpec
    omega_c: np.ndarray                 # GHz, ascending (refinement included)
    labels: tuple[tuple[int, ...], ...]
    eigenvalues: np.ndarray             # (n, dim) ascending energies, rad/ns
    tracked_energies: np.ndarray        # (n, nlab) rad/ns
    tracked_vectors: np.ndarray | None  # (n, dim, nlab)
    zeta: np.ndarray                    # (n,) rad/ns (NaN without the 4 labels)
    g_eff: np.ndarray                   # (n,) rad/ns (NaN unless 2-qubit)
    d_factor: np.ndarray                # (n,) (ns/rad)^2
    d_flags: np.ndarray                 # (n,) bool: divergent pair excluded

    @property
    def n_samples(self) -> int:
        return len(self.omega_c)

    def label_index(self, label) -> int:
        return self.labels.index(tuple(label))


def track_adiabatic(spec: CircuitSpec, grid, labels=None, *,
                    store_vectors: bool = True,
                    diabatic_jumps: bool = False,
                    d_window: float = DEGENERACY_TOL) -> SpectrumGrid:
    """Track labeled adiabatic states over ``grid`` (GHz, any order).

    The anchor is the most dispersive sample where every requested label has
    diabatic overlap above 0.9; tracking proceeds outward by maximum-overlap
    continuation with one-to-one assignment, bisecting the grid (up to 10
    levels) wherever the matched overlap drops below 0.5.
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size < 2:
        raise ConfigError("tracking grid needs at least two samples")
    comp = computational_labels(spec)
    if labels is None:
        labels = comp
    labels = tuple(tuple(l) for l in labels)

    cache: dict = {}
    basis = build_basis(spec)
    rows = np.array([basis.index_of(l) for l in labels])

    def anchor_quality(i):
        vals, vecs = cache.get(grid[i]) or diagonalize(assemble_raw(spec, grid[i]))
        cache[grid[i]] = (vals, vecs)
        m = np.abs(vecs[rows, :])
        _, cols = linear_sum_assignment(-m)
        return float(np.min(m[np.arange(len(rows)), cols]))

    # endpoints are the usual dispersive anchors; fall back to a full scan
    order = [len(grid) - 1, 0] + list(range(1, len(grid) - 1))
    anchor_idx = None
    best = (-1.0, None)
    for i in order:
        q = anchor_quality(i)
        if q > best[0]:
            best = (q, i)
        if q > ANCHOR_OVERLAP:
            anchor_idx = i
            break
    if anchor_idx is None:
        raise AnchorError(
            f"no dispersive anchor on the grid (best min-overlap {best[0]:.3f} "
            f"at omega_c = {grid[best[1]]} GHz, need > {ANCHOR_OVERLAP})"
        )

    have_comp = all(c in labels for c in comp)
    comp_pos = [labels.index(c) for c in comp] if have_comp else None
    two_qubit = (len(spec.qubit_indices) == 2
                 and spec.coupler_index not in spec.qubit_indices)
    rows_out = []  # per-sample reductions; full eigenvector matrices are transient

    # zeta of the gate pair (the first two designated qubits, spectators in 0)
    nq = len(spec.qubit_indices)
    z_idx = (0, 1 << (nq - 2), 1 << (nq - 1), (1 << (nq - 1)) | (1 << (nq - 2))) \
        if nq >= 2 else None

    def process(sample):
        w, vals, vecs, cols = sample
        cols = np.asarray(cols)
        row = {
            "omega": w, "vals": vals.copy(), "tracked": vals[cols],
            "block": vecs[:, cols].copy() if store_vectors else None,
            "zeta": np.nan, "g_eff": np.nan, "d": np.nan, "flag": False,
        }
        if have_comp:
            e = vals[cols[comp_pos]]  # qubit-binary ordering
            if z_idx is not None:
                row["zeta"] = e[z_idx[3]] - e[z_idx[2]] - e[z_idx[1]] + e[z_idx[0]]
            row["d"], row["flag"] = _d_factor(spec, w, vals, vecs, cols[comp_pos],
                                              window=d_window)
        if two_qubit:
            try:
                row["g_eff"] = effective_coupling(spec, w)
            except SingularityError:
                pass  # qubit-coupler degeneracy on the grid: leave NaN
        rows_out.append(row)

    walker = _Walker(spec, labels, grid[anchor_idx], eig_cache=cache,
                     jump_on_exhaustion=diabatic_jumps)
    process((grid[anchor_idx], walker.vals, walker.vecs, walker.cols))
    for i in range(anchor_idx + 1, len(grid)):
        for s in walker.advance(grid[i]):
            process(s)
    walker = _Walker(spec, labels, grid[anchor_idx], eig_cache=cache,
                     jump_on_exhaustion=diabatic_jumps)
    for i in range(anchor_idx - 1, -1, -1):
        for s in walker.advance(grid[i]):
            process(s)
    cache.clear()
    rows_out.sort(key=lambda r: r["omega"])

    n = len(rows_out)
    omega = np.array([r["omega"] for r in rows_out])
    eigenvalues = np.stack([r["vals"] for r in rows_out])
    tracked_e = np.stack([r["tracked"] for r in rows_out])
    vectors = np.stack([r["block"] for r in rows_out]) if store_vectors else None
    return SpectrumGrid(
        spec=spec, omega_c=omega, labels=labels, eigenvalues=eigenvalues,
        tracked_energies=tracked_e, tracked_vectors=vectors,
        zeta=np.array([r["zeta"] for r in rows_out]),
        g_eff=np.array([r["g_eff"] for r in rows_out]),
        d_factor=np.array([r["d"] for r in rows_out]),
        d_flags=np.array([r["flag"] for r in rows_out], dtype=bool),
    )


# ---------------------------------------------------------------------------
# pointwise wrappers


def _auto_anchor(spec: CircuitSpec, omega_c: float) -> float:
    freqs = [m.frequency for i, m in enumerate(spec.modes) if i != spec.coupler_index]
    lo, hi = min(freqs), max(freqs)
    if omega_c < lo:
        return max(1.0, lo - 2.5)
    return min(20.0, hi + 2.5)


def _tracked_point(spec: CircuitSpec, omega_c: float, labels):
    """Identify labels at omega_c directly, or track in from a dispersive anchor."""
    basis = build_basis(spec)
    rows = np.array([basis.index_of(l) for l in labels])
    vals, vecs = diagonalize(assemble_raw(spec, omega_c))
    cols = _identify(vecs, rows, ANCHOR_OVERLAP)
    if cols is not None:
        return vals, vecs, cols
    anchor = _auto_anchor(spec, omega_c)
    n = max(41, int(abs(anchor - omega_c) / 0.025) + 2)
    walker = _Walker(spec, labels, anchor)
    path = np.linspace(anchor, omega_c, n)
    for w in path[1:]:
        last = walker.advance(w)[-1]
    _, vals, vecs, cols = last
    return vals, vecs, cols


def zz_strength(spec: CircuitSpec, omega_c: float) -> float:
    """ZZ interaction zeta(omega_c) in rad/ns from tracked adiabatic energies."""
    comp = computational_labels(spec)
    if len(comp) != 4:
        raise ConfigError("zz_strength requires a two-qubit circuit")
    vals, _, cols = _tracked_point(spec, omega_c, comp)
    e = vals[cols]
    return float(e[3] - e[2] - e[1] + e[0])


def d_factor(spec: CircuitSpec, omega_c: float) -> tuple[float, bool]:
    """Instantaneous diabaticity D and its divergent-pair flag at omega_c."""
    comp = computational_labels(spec)
    vals, vecs, cols = _tracked_point(spec, omega_c, comp)
    return _d_factor(spec, omega_c, vals, vecs, np.asarray(cols))


def d_star(spec: CircuitSpec, omega_c: float, omega_idle: float, n: int = 200) -> tuple[float, bool]:
    """Maximum instantaneous D between omega_c and the idle bias (>= n samples)."""
    grid = np.linspace(min(omega_c, omega_idle), max(omega_c, omega_idle), max(int(n), 2))
    sg = track_adiabatic(spec, grid, store_vectors=False)
    return float(np.max(sg.d_factor)), bool(np.any(sg.d_flags))


# ---------------------------------------------------------------------------
# operating map: spline tables along the pulse's reachable range


class _FastCubic:
    """Scalar cubic-spline evaluation without scipy call overhead."""

    def __init__(self, spline: CubicSpline):
        self.x = spline.x
        self.c = spline.c
        self.n = len(spline.x) - 2

    def __call__(self, w: float) -> float:
        i = min(max(self.x.searchsorted(w) - 1, 0), self.n)
        u = w - self.x[i]
        c = self.c
        return ((c[0, i] * u + c[1, i]) * u + c[2, i]) * u + c[3, i]


@dataclass
class OperatingMap:
    """Tabulated zeta, D, energies and flux sensitivities on [floor, idle].

    Built once per circuit and reused by pulse generation (D weighting),
    phase calibration (zeta integral), noise-rate interpolation, and the
    reduced Lindblad model (computational-state energies).
    """

    spec: CircuitSpec
    omega_idle: float
    grid: SpectrumGrid
    _zeta: CubicSpline
    _d: CubicSpline
    _energies: dict
    _sens: dict
    _dstar_base: np.ndarray

    def d_scalar(self):
        """Fast scalar D(omega) evaluator for tight integrator loops."""
        fast = _FastCubic(self._d)
        return lambda w: math.exp(fast(w))

    @property
    def omega_lo(self) -> float:
        return float(self.grid.omega_c[0])

    @property
    def omega_hi(self) -> float:
        return float(self.grid.omega_c[-1])

    def contains(self, omega) -> bool:
        return bool(np.all(omega >= self.omega_lo) and np.all(omega <= self.omega_hi))

    def zeta(self, omega):
        return self._zeta(omega)

    def d(self, omega):
        # the table holds log D: strictly positive by construction, and
        # narrow near-crossing spikes cannot push the interpolant negative
        return np.exp(self._d(omega))

    def d_star(self, omega):
        """Running maximum of D from the idle end toward ``omega``."""
        i = np.searchsorted(self.grid.omega_c, omega)
        i = np.clip(i, 0, len(self._dstar_base) - 1)
        return self._dstar_base[i]

    def omega_tilde(self, label, omega):
        """E_label - E_000 in rad/ns (spline)."""
        return self._energies[tuple(label)](omega)

    def sensitivity(self, label, omega):
        """d(E_label - E_000)/dw_c, dimensionless (Hellmann-Feynman)."""
        return self._sens[tuple(label)](omega)

    @property
    def idle_states(self) -> np.ndarray:
        """Adiabatic computational basis (dim x nlab) at the idle bias."""
        k = int(np.argmin(np.abs(self.grid.omega_c - self.omega_idle)))
        return self.grid.tracked_vectors[k]

    @property
    def labels(self):
        return self.grid.labels


@lru_cache(maxsize=6)
def operating_map(spec: CircuitSpec, omega_idle: float, *, floor: float | None = None,
                  direction: str = "toward", samples: int = 600,
                  zeta_cap: float = TWO_PI * 0.35, d_cap: float = 10.0,
                  max_span: float = 3.2, probe_step: float = 0.02,
                  d_window: float = DEGENERACY_TOL,
                  d_ceiling: float = 50.0) -> OperatingMap:
    """Build the operating table from the idle bias along the pulse direction.

    ``direction`` is "toward" (the qubit band; coupler-assisted gates),
    "away", or explicit "up"/"down".  Without an explicit ``floor`` the
    reachable edge is found by probing: stop before tracking failure, a
    divergent-D sample, D exceeding ``d_cap``, |zeta| exceeding ``zeta_cap``
    (rad/ns), or |zeta| turning over after its near-resonance rise (so the
    tabulated |zeta| stays monotone and phase calibration stays invertible).
    The final table is a tracked grid of ``samples`` points with cubic-spline
    accessors.
    """
    comp = computational_labels(spec)
    freqs = [m.frequency for i, m in enumerate(spec.modes) if i != spec.coupler_index]
    toward = -1.0 if omega_idle > np.mean(freqs) else 1.0
    sign = {"toward": toward, "away": -toward, "down": -1.0, "up": 1.0}[direction]

    if floor is None:
        walker = _Walker(spec, comp, omega_idle, jump_on_exhaustion=True)
        w = omega_idle
        good = omega_idle
        turn_engaged = False
        zeta_peak = 0.0
        zeta_peak_at = omega_idle
        hot = 0  # consecutive D-cap/degeneracy violations (skip isolated spikes)
        nq = len(spec.qubit_indices)
        zi = (0, 1 << (nq - 2), 1 << (nq - 1), (1 << (nq - 1)) | (1 << (nq - 2)))
        n_steps = int(max_span / probe_step)
        for _ in range(n_steps):
            w_next = w + sign * probe_step
            if not (1.0 + probe_step) <= w_next <= (20.0 - probe_step):
                break
            try:
                _, vals, vecs, cols = walker.advance(w_next)[-1]
            except TrackingError:
                break
            e = vals[np.asarray(cols)]
            z = abs(e[zi[3]] - e[zi[2]] - e[zi[1]] + e[zi[0]])
            dval, dflag = _d_factor(spec, w_next, vals, vecs, np.asarray(cols),
                                    window=d_window)
            hot = hot + 1 if (dflag or min(dval, d_ceiling) > d_cap) else 0
            if hot >= 2 or z > zeta_cap:
                break
            if z > zeta_peak:
                zeta_peak, zeta_peak_at = z, w_next
            if z > TWO_PI * 0.02:
                turn_engaged = True
            if turn_engaged and z < 0.97 * zeta_peak:
                good = zeta_peak_at
                break
            good = w_next
            w = w_next
        floor = good - sign * probe_step  # one-step safety margin
        if abs(floor - omega_idle) < 4 * probe_step:
            raise TrackingError(
                f"no usable operating range from idle {omega_idle} GHz "
                f"(floor search stopped at {good} GHz)"
            )

    # headroom past the idle edge keeps integrator stage points in range
    head = 0.05
    if floor < omega_idle:
        lo, hi = floor, min(omega_idle + head, 20.0)
    else:
        lo, hi = max(omega_idle - head, 1.0), floor
    grid = np.linspace(lo, hi, int(samples))
    sg = track_adiabatic(spec, grid, comp, store_vectors=True, diabatic_jumps=True,
                         d_window=d_window)

    zeta_sp = CubicSpline(sg.omega_c, sg.zeta)
    d_tab = np.clip(sg.d_factor, 1e-12, d_ceiling)
    d_sp = CubicSpline(sg.omega_c, np.log(d_tab))

    # ground-referenced energies and Hellmann-Feynman flux sensitivities
    n = sg.n_samples
    hf = np.empty((n, len(comp)))
    for k in range(n):
        block = sg.tracked_vectors[k]
        dh = apply_dh_domega_c(spec, sg.omega_c[k], block)
        hf[k] = np.einsum("ij,ij->j", block, dh)
    energies = {}
    sens = {}
    for j, lab in enumerate(comp):
        energies[lab] = CubicSpline(sg.omega_c, sg.tracked_energies[:, j] - sg.tracked_energies[:, 0])
        sens[lab] = CubicSpline(sg.omega_c, hf[:, j] - hf[:, 0])

    # running max of D from the idle end (ascending index base array)
    if omega_idle >= sg.omega_c[-1] - 1e-12:
        dstar = np.maximum.accumulate(d_tab[::-1])[::-1]
    else:
        dstar = np.maximum.accumulate(d_tab)

    return OperatingMap(
        spec=spec, omega_idle=omega_idle, grid=sg, _zeta=zeta_sp, _d=d_sp,
        _energies=energies, _sens=sens, _dstar_base=dstar,
    )


# ---------------------------------------------------------------------------
# CSV emitters


def _fmt(x) -> str:
    return f"{x:.10g}"


def write_spectrum_csv(sg: SpectrumGrid, path):
    """Tracked energies, one row per (omega_c, label), energies in GHz."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_c_ghz", "label", "energy_ghz"])
        for k in range(sg.n_samples):
            for j, lab in enumerate(sg.labels):
                w.writerow([
                    _fmt(sg.omega_c[k]),
                    "".join(str(b) for b in lab),
                    _fmt(sg.tracked_energies[k, j] / TWO_PI),
                ])


def write_zeta_csv(sg: SpectrumGrid, path):
    """zeta / g~ (MHz) and D ((ns/rad)^2) versus omega_c (GHz)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_c_ghz", "zeta_mhz", "g_eff_mhz", "d_factor"])
        for k in range(sg.n_samples):
            w.writerow([
                _fmt(sg.omega_c[k]),
                _fmt(sg.zeta[k] / TWO_PI * 1e3),
                _fmt(sg.g_eff[k] / TWO_PI * 1e3),
                _fmt(sg.d_factor[k]),
            ])
