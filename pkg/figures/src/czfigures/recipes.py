"""Figure recipes: one deterministic static image per CSV table.

Each recipe names its input CSV, the columns it needs, and a draw function.
Values are plotted exactly as read (unit relabeling only); rendering is
deterministic (fixed size/dpi, no timestamps) so re-rendering the same CSV
is byte-identical.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class SchemaError(Exception):
    """Input CSV is missing columns the recipe needs."""


@dataclass(frozen=True)
class PlotRecipe:
    name: str
    source: str                  # CSV file name produced by the czpulse CLI
    columns: tuple[str, ...]     # required columns
    draw: callable               # draw(ax/fig, table) -> None


def read_table(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{os.path.basename(path)}: missing columns {missing}")
        rows = list(reader)
    out: dict[str, np.ndarray] = {}
    for c in header:
        vals = [r[c] for r in rows]
        try:
            out[c] = np.array([float(v) if v != "" else math.nan for v in vals])
        except ValueError:
            out[c] = np.array(vals, dtype=object)
    return out


def _finite(*arrays):
    mask = np.ones(len(arrays[0]), dtype=bool)
    for a in arrays:
        mask &= np.isfinite(a)
    return mask


def _series(table, key_col, keys=None):
    keys = keys if keys is not None else sorted(set(table[key_col].tolist()))
    for k in keys:
        sel = table[key_col] == k
        yield k, sel


# --- draw functions ---------------------------------------------------------


def _draw_fig2a(fig, t):
    ax = fig.subplots()
    for lab, sel in _series(t, "label"):
        ax.plot(t["omega_c_ghz"][sel], t["energy_ghz"][sel], lw=1, label=str(lab))
    ax.set_xlabel("coupler frequency (GHz)")
    ax.set_ylabel("tracked energy (GHz)")
    ax.legend(fontsize=6, ncol=2)


def _draw_fig2b(fig, t):
    ax = fig.subplots()
    m = _finite(t["omega_c_ghz"], t["zeta_mhz"])
    ax.semilogy(t["omega_c_ghz"][m], np.abs(t["zeta_mhz"][m]), lw=1.2)
    ax.set_xlabel("coupler frequency (GHz)")
    ax.set_ylabel("|zeta|/2pi (MHz)")


def _heat(ax, x, y, z, log=True):
    xs, ys = np.unique(x), np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[yi, xi] = np.log10(np.abs(z) + 1e-12) if log else z
    im = ax.pcolormesh(xs, ys, grid, shading="nearest", rasterized=True)
    return im


def _draw_fig3a(fig, t):
    d12s = sorted(set(t["delta12_mhz"].tolist()))
    axes = fig.subplots(1, len(d12s), squeeze=False)[0]
    for ax, d12 in zip(axes, d12s):
        sel = (t["delta12_mhz"] == d12) & _finite(t["zeta_mhz"])
        im = _heat(ax, t["delta1c_ghz"][sel], t["g12_mhz"][sel], t["zeta_mhz"][sel])
        fig.colorbar(im, ax=ax, label="log10 |zeta| (MHz)")
        ax.set_title(f"detuning {d12:.0f} MHz", fontsize=8)
        ax.set_xlabel("Delta_1c (GHz)")
        ax.set_ylabel("g12 (MHz)")


def _draw_fig3b(fig, t):
    ax = fig.subplots()
    for d12, sel in _series(t, "delta12_mhz"):
        m = sel & _finite(t["g_eff_mhz"], t["zeta_khz"])
        ax.plot(t["g_eff_mhz"][m], t["zeta_khz"][m], "o-", ms=2, lw=1,
                label=f"{d12:.0f} MHz")
    ax.set_xlabel("effective coupling (MHz)")
    ax.set_ylabel("zeta/2pi (kHz)")
    ax.legend(fontsize=7)


def _draw_fig4a(fig, t):
    ax = fig.subplots()
    kinds = sorted({(k, m) for k, m in zip(t["kind"].tolist(), t["mmax"].tolist())})
    for kind, mmax in kinds:
        sel = (t["kind"] == kind) & (t["mmax"] == mmax) & _finite(t["epg"])
        ax.semilogy(t["tg_ns"][sel], t["epg"][sel], "o-", ms=3, lw=1,
                    label=f"{kind} m={mmax:g}")
    ax.set_xlabel("gate time (ns)")
    ax.set_ylabel("EPG")
    ax.legend(fontsize=7)


def _draw_fig4b(fig, t):
    ax = fig.subplots()
    labels = [f"{p}{d:+g}" for p, d in zip(t["param"].tolist(), t["delta"])]
    ax.semilogy(range(len(labels)), np.abs(t["epg"]), "o", ms=4)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=5)
    ax.set_ylabel("EPG")


def _draw_fig4c(fig, t):
    ax = fig.subplots()
    for cfg, sel in _series(t, "config"):
        m = sel & _finite(t["epg"])
        ax.semilogy(t["r"][m], t["epg"][m], "o-", ms=3, lw=1, label=str(cfg))
    ax.set_xlabel("reflection coefficient r")
    ax.set_ylabel("EPG")
    ax.legend(fontsize=7)


def _draw_fig5fg(fig, t):
    d12s = sorted(set(t["delta12_mhz"].tolist()))
    axes = fig.subplots(2, len(d12s), squeeze=False)
    for j, d12 in enumerate(d12s):
        sel = (t["delta12_mhz"] == d12) & _finite(t["omega_c_ghz"], t["abs_zeta_mhz"])
        im = _heat(axes[0][j], t["omega_c_ghz"][sel], t["alpha_c_mhz"][sel],
                   t["abs_zeta_mhz"][sel])
        fig.colorbar(im, ax=axes[0][j], label="log10 |zeta| (MHz)")
        axes[0][j].set_title(f"detuning {d12:.0f} MHz", fontsize=8)
        ds = np.clip(t["d_star"][sel], None, 1e3)
        im = _heat(axes[1][j], t["omega_c_ghz"][sel], t["alpha_c_mhz"][sel], ds)
        fig.colorbar(im, ax=axes[1][j], label="log10 D* ((ns/rad)^2)")
        for ax in (axes[0][j], axes[1][j]):
            ax.set_xlabel("coupler frequency (GHz)")
            ax.set_ylabel("alpha_c (MHz)")


def _draw_fig6b(fig, t):
    ax = fig.subplots()
    for kind, sel in _series(t, "stray_kind"):
        m = sel & _finite(t["epg"]) & (t["stray_mhz"] > 0)
        if not m.any():
            continue
        ax.loglog(t["stray_mhz"][m], t["epg"][m], "o-", ms=3, lw=1, label=str(kind))
    ax.set_xlabel("stray coupling (MHz)")
    ax.set_ylabel("CZ (x) I EPG")
    ax.legend(fontsize=7)


def _draw_fig7b(fig, t):
    ax = fig.subplots()
    for col, style in (("gamma_ss", "-"), ("gamma_sl", "--")):
        m = _finite(t[col]) & (t[col] > 0)
        ax.semilogy(t["omega_c_ghz"][m], t[col][m], style, lw=1.2, label=col)
    ax.set_xlabel("coupler frequency (GHz)")
    ax.set_ylabel("transition rate (1/s)")
    ax.legend(fontsize=7)


def _draw_fig7c(fig, t):
    ax = fig.subplots()
    for col in ("gamma_phi_100", "gamma_phi_001", "gamma_phi_101"):
        m = _finite(t[col]) & (t[col] > 0)
        ax.semilogy(t["omega_c_ghz"][m], t[col][m], lw=1.2, label=col)
    ax.set_xlabel("coupler frequency (GHz)")
    ax.set_ylabel("dephasing rate (1/s)")
    ax.legend(fontsize=7)


def _draw_fig7d(fig, t):
    ax = fig.subplots()
    for col in ("eps_tr", "eps_ph", "eps_total"):
        m = _finite(t[col]) & (t[col] > 0)
        ax.semilogy(t["tg_ns"][m], t[col][m], "o-", ms=3, lw=1, label=col)
    if "epg_coherent" in t:
        m = _finite(t["epg_coherent"])
        ax.semilogy(t["tg_ns"][m], t["epg_coherent"][m], "k.", label="coherent")
    ax.set_xlabel("gate time (ns)")
    ax.set_ylabel("RB error per gate")
    ax.legend(fontsize=7)


def _draw_fig8(fig, t):
    axes = fig.subplots(2, 1, sharex=True)
    for scheme, sel in _series(t, "scheme"):
        m = sel & _finite(t["abs_zeta_mhz"]) & (t["abs_zeta_mhz"] > 0)
        axes[0].semilogy(t["omega_c_ghz"][m], t["abs_zeta_mhz"][m], lw=1,
                         label=str(scheme))
        md = sel & _finite(t["d_factor"]) & (t["d_factor"] > 0)
        axes[1].semilogy(t["omega_c_ghz"][md], t["d_factor"][md], lw=1)
    axes[0].set_ylabel("|zeta|/2pi (MHz)")
    axes[1].set_ylabel("D ((ns/rad)^2)")
    axes[1].set_xlabel("coupler frequency (GHz)")
    axes[0].legend(fontsize=7)


def _draw_figs2(fig, t):
    axes = fig.subplots(1, 2, squeeze=False)[0]
    sel = _finite(t["zeta_exact_mhz"], t["zeta_pert_mhz"])
    for ax, col, title in ((axes[0], "zeta_exact_mhz", "diagonalization"),
                           (axes[1], "zeta_pert_mhz", "4th-order")):
        im = _heat(ax, t["omega_c_ghz"][sel], t["g12_mhz"][sel], t[col][sel])
        fig.colorbar(im, ax=ax, label="log10 |zeta| (MHz)")
        ax.set_title(title, fontsize=8)
        ax.set_xlabel("coupler frequency (GHz)")
        ax.set_ylabel("g12 (MHz)")


def _draw_figs3(fig, t):
    ax = fig.subplots()
    for col in ("sens_unipolar", "sens_netzero"):
        m = _finite(t[col]) & (t["freq_hz"] > 0) & (t[col] > 0)
        ax.loglog(t["freq_hz"][m], t[col][m], lw=1.2, label=col)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("phase-error sensitivity (rad^2/Phi0^2)")
    ax.legend(fontsize=7)


RECIPES: dict[str, PlotRecipe] = {
    "fig2a": PlotRecipe("fig2a", "spectrum.csv",
                        ("omega_c_ghz", "label", "energy_ghz"), _draw_fig2a),
    "fig2b": PlotRecipe("fig2b", "zeta.csv",
                        ("omega_c_ghz", "zeta_mhz"), _draw_fig2b),
    "fig3a": PlotRecipe("fig3a", "locus.csv",
                        ("delta12_mhz", "delta1c_ghz", "g12_mhz", "zeta_mhz"), _draw_fig3a),
    "fig3b": PlotRecipe("fig3b", "parabola.csv",
                        ("delta12_mhz", "g_eff_mhz", "zeta_khz"), _draw_fig3b),
    "fig4a": PlotRecipe("fig4a", "epg_vs_tg.csv",
                        ("kind", "mmax", "tg_ns", "epg"), _draw_fig4a),
    "fig4b": PlotRecipe("fig4b", "robustness.csv",
                        ("param", "delta", "epg"), _draw_fig4b),
    "fig4c": PlotRecipe("fig4c", "distortion.csv",
                        ("config", "r", "epg"), _draw_fig4c),
    "fig5fg": PlotRecipe("fig5fg", "designmap.csv",
                         ("delta12_mhz", "alpha_c_mhz", "omega_c_ghz",
                          "abs_zeta_mhz", "d_star"), _draw_fig5fg),
    "fig6b": PlotRecipe("fig6b", "stray.csv",
                        ("stray_kind", "stray_mhz", "epg"), _draw_fig6b),
    "fig7b": PlotRecipe("fig7b", "rates.csv",
                        ("omega_c_ghz", "gamma_ss", "gamma_sl"), _draw_fig7b),
    "fig7c": PlotRecipe("fig7c", "rates.csv",
                        ("omega_c_ghz", "gamma_phi_100", "gamma_phi_001",
                         "gamma_phi_101"), _draw_fig7c),
    "fig7d": PlotRecipe("fig7d", "error_vs_tg.csv",
                        ("tg_ns", "eps_tr", "eps_ph", "eps_total"), _draw_fig7d),
    "fig8": PlotRecipe("fig8", "schemes.csv",
                       ("scheme", "omega_c_ghz", "abs_zeta_mhz", "d_factor"), _draw_fig8),
    "figs2": PlotRecipe("figs2", "perturbation.csv",
                        ("omega_c_ghz", "g12_mhz", "zeta_pert_mhz",
                         "zeta_exact_mhz"), _draw_figs2),
    "figs3": PlotRecipe("figs3", "sensitivity.csv",
                        ("freq_hz", "sens_unipolar", "sens_netzero"), _draw_figs3),
}


def render(name: str, indir: str, outdir: str) -> str:
    """Render one recipe from ``indir`` CSVs into ``outdir``/<name>.png.

    Fails (without leaving a partial file) when the CSV is absent or missing
    required columns; output is byte-identical across re-renders.
    """
    if name not in RECIPES:
        raise SchemaError(f"unknown recipe {name!r}; choices: {sorted(RECIPES)}")
    recipe = RECIPES[name]
    src = os.path.join(indir, recipe.source)
    if not os.path.exists(src):
        raise SchemaError(f"input table {recipe.source} not found in {indir}")
    table = read_table(src, recipe.columns)

    wide = name in ("fig3a", "fig5fg", "figs2", "fig8")
    fig = plt.figure(figsize=(8.0, 5.0) if wide else (5.0, 3.6), dpi=160)
    try:
        recipe.draw(fig, table)
        fig.tight_layout()
        os.makedirs(outdir, exist_ok=True)
        out = os.path.join(outdir, f"{name}.png")
        fd, tmp = tempfile.mkstemp(suffix=".png", dir=outdir)
        os.close(fd)
        try:
            fig.savefig(tmp, format="png", metadata={"Software": None})
            os.replace(tmp, out)
        except BaseException:
            os.unlink(tmp)
            raise
    finally:
        plt.close(fig)
    return out
