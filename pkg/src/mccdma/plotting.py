"""Render sweep results as BER/FER figures next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

#: Row keys that identify one curve; everything else varies along it.
_GROUP_KEYS = ("detector", "chip_mapping", "nt", "nr", "users", "lc",
               "modulation", "coding")


def _curve_label(key) -> str:
    detector, mapping, nt, nr, users, lc, modulation, cod = key
    label = f"{detector.upper()} {nt}x{nr} {mapping} {modulation}"
    if cod != "none":
        label += " coded"
    if users != lc:
        label += f" {users}/{lc} users"
    return label


def group_rows(rows) -> dict:
    curves: dict = {}
    for row in rows:
        key = tuple(row[k] for k in _GROUP_KEYS)
        curves.setdefault(key, []).append(row)
    for points in curves.values():
        points.sort(key=lambda r: r["ebn0_db"])
    return curves


def plot_results(rows, path) -> None:
    """Write a two-panel BER/FER versus Eb/N0 figure to `path`.

    Zero-error points cannot be drawn on the log axis and are skipped.
    """
    curves = group_rows(rows)
    fig, (ax_ber, ax_fer) = plt.subplots(1, 2, figsize=(11, 4.5), sharex=True)
    for key, points in curves.items():
        label = _curve_label(key)
        x = [p["ebn0_db"] for p in points]
        for ax, field in ((ax_ber, "ber"), (ax_fer, "fer")):
            xs = [xi for xi, p in zip(x, points) if p[field] > 0]
            ys = [p[field] for p in points if p[field] > 0]
            if xs:
                ax.semilogy(xs, ys, marker="o", label=label)
    for ax, title in ((ax_ber, "BER"), (ax_fer, "FER")):
        ax.set_xlabel("Eb/N0 (dB)")
        ax.set_ylabel(title)
        ax.grid(True, which="both", alpha=0.4)
    handles, labels = ax_ber.get_legend_handles_labels()
    if handles:
        ax_ber.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
