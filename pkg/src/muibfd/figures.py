"""PNG figures for maps and RSSI series (matplotlib, Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_map_png", "render_jitter_png"]

# strip the version stamp so identical data gives identical bytes
_META = {"Software": None}


def render_map_png(grid, path, title="", center_zero=None):
    """One panel per height; masked cells blank. Diverging colors around 0 for
    signed quantities unless `center_zero` says otherwise."""
    nz = grid.shape[0]
    valid = grid.values[grid.mask]
    lo = float(valid.min()) if valid.size else 0.0
    hi = float(valid.max()) if valid.size else 1.0
    if center_zero is None:
        center_zero = lo < 0 < hi and grid.unit in ("percent", "dB")
    if center_zero:
        m = max(abs(lo), abs(hi))
        vmin, vmax, cmap = -m, m, "RdBu_r"
    else:
        vmin, vmax, cmap = lo, hi, "viridis"
    xs, ys, zs = grid.x.coords(), grid.y.coords(), grid.z.coords()
    half = (grid.x.step / 2.0, grid.y.step / 2.0)
    extent = (xs[0] - half[0], xs[-1] + half[0], ys[0] - half[1], ys[-1] + half[1])
    fig, axes = plt.subplots(1, nz, figsize=(3.2 * nz + 1.2, 3.4), squeeze=False, sharey=True)
    im = None
    for k, ax in enumerate(axes[0]):
        data = np.ma.masked_invalid(grid.values[k])
        im = ax.imshow(data, origin="lower", extent=extent, cmap=cmap, vmin=vmin, vmax=vmax,
                       aspect="equal", interpolation="nearest")
        ax.set_title(f"z = {zs[k]:g} m", fontsize=9)
        ax.set_xlabel("x [m]")
        if k == 0:
            ax.set_ylabel("y [m]")
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.85, label=grid.unit)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def render_jitter_png(rssi, ber, path, title="", ber_threshold=1e-6):
    t = np.arange(len(rssi))
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(7, 4.5), sharex=True)
    a1.plot(t, rssi, lw=0.8)
    a1.set_ylabel("RSSI [dBm]")
    # floor keeps error-free samples visible on the log axis
    a2.semilogy(t, np.maximum(ber, 1e-15), lw=0.8)
    a2.axhline(ber_threshold, color="k", ls="--", lw=0.7)
    a2.set_ylabel("BER")
    a2.set_xlabel("sample")
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
