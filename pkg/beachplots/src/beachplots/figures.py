"""The four figure builders and the FigureSpec dispatcher.

Every builder returns (figure, info) where info is a small dict of the
numbers that were drawn, so callers and tests can check what the image
shows without parsing it back. Rendering is deterministic: Agg backend,
fixed figure sizes, pinned SVG hash salt, and scrubbed metadata, so
identical inputs produce byte-identical image files.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import io
from .errors import SchemaMismatch

plt.rcParams["svg.hashsalt"] = "beachplots"

KINDS = ("decay_curve", "snapshot", "residual_vs_resolution", "circle_norms")

# input paths per kind, in the order FigureSpec.inputs carries them
INPUT_SIGNATURES = {
    "decay_curve": "(timeseries_csv, summary_json?)",
    "snapshot": "(snapshot_csv, summary_json, manifest_json)",
    "residual_vs_resolution": "(convergence_csv,)",
    "circle_norms": "(norms_csv,)",
}


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: what to draw, from which files, to where."""

    kind: str
    inputs: tuple
    output: Path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatch(
                f"unknown figure kind {self.kind!r}; pick from {KINDS}"
            )


def save_figure(fig, output):
    """Write the PNG and SVG siblings of `output` and close the figure."""
    stem = Path(output).with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    png, svg = stem.with_suffix(".png"), stem.with_suffix(".svg")
    # a fixed Software string and no date keep the bytes reproducible
    fig.savefig(png, dpi=150, metadata={"Software": "beachplots"})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return png, svg


def render(spec: FigureSpec):
    """Build and save the figure a spec describes.

    Returns ((png_path, svg_path), info).
    """
    builders = {
        "decay_curve": plot_decay,
        "snapshot": plot_snapshot,
        "residual_vs_resolution": plot_residuals,
        "circle_norms": plot_circle,
    }
    fig, info = builders[spec.kind](*spec.inputs)
    return save_figure(fig, spec.output), info


def plot_decay(timeseries_csv, summary_json=None):
    """Log-scale energy history with fitted overlay and certificate bound.

    The overlay slope and the bound level come from the summary's decay
    block; with no summary (or no decay block) only the raw curve and the
    endpoint marker are drawn. The bound drawn on H(T) is the
    certificate's right side divided by its H(T) prefactor, so the run
    satisfies the certificate exactly when the marker sits below the line.
    """
    table = io.read_timeseries(timeseries_csv)
    t, H = table["t"], table["H"]

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(t, H, color="tab:blue", lw=1.5, label="H(t)")
    if np.all(H > 0.0):
        ax.set_yscale("log")

    span = float(t[-1] - t[0])
    h_scale = float(np.max(np.abs(H)))
    info = {
        "final_H": float(H[-1]),
        "rate": None,
        "bound_level": None,
        "flat": bool(
            h_scale == 0.0 or (np.max(H) - np.min(H)) <= 1e-6 * h_scale
        ),
    }

    if summary_json is not None:
        decay = io.read_summary(summary_json).get("decay")
        if decay is not None and decay.get("decay_rate") is not None:
            rate = float(decay["decay_rate"])
            info["rate"] = rate
            tail = t >= t[0] + 0.5 * span
            if np.any(tail) and H[-1] > 0.0:
                overlay = H[-1] * np.exp(rate * (t[tail] - t[-1]))
                ax.plot(
                    t[tail],
                    overlay,
                    ls="--",
                    color="tab:orange",
                    lw=1.2,
                    label=f"tail fit, rate {rate:.3g}",
                )
            margin = 0.5 - float(decay["c"]) - float(decay["alpha"])
            if margin > 0.0 and span > 0.0:
                level = float(decay["certificate_rhs"]) / (margin * span)
                ax.axhline(
                    level,
                    color="tab:red",
                    ls=":",
                    lw=1.2,
                    label="certificate bound on H(T)",
                )
                info["bound_level"] = level

    ax.plot(
        [t[-1]], [H[-1]], marker="o", ms=6, color="tab:blue",
        label="measured H(T)",
    )
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("Energy decay")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig, info


def plot_snapshot(snapshot_csv, summary_json, manifest_json):
    """Surface elevation with the damping zone shaded and the external
    pressure on a twin axis, annotated with the recorded pressure mean."""
    snap = io.read_snapshot(snapshot_csv)
    summary = io.read_summary(summary_json)
    manifest = io.read_manifest(manifest_json)
    entry = io.snapshot_entry(summary, snapshot_csv)
    zone = io.beach_zone(manifest)

    x, eta, pressure = snap["x"], snap["eta"], snap["P_ext"]
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ax.plot(x, eta, color="tab:blue", lw=1.5, label="surface")
    if zone is not None:
        ax.axvspan(zone[0], zone[1], color="tab:orange", alpha=0.2,
                   label="damping zone")
    ax.set_xlabel("x")
    ax.set_ylabel("elevation")
    ax.set_title(f"surface at t = {entry['t']:g}")

    twin = ax.twinx()
    twin.plot(x, pressure, color="tab:green", ls="--", lw=1.0,
              label="external pressure")
    twin.set_ylabel("external pressure")
    ax.annotate(
        f"mean pressure = {entry['pressure_mean']:.3e}",
        xy=(0.02, 0.94),
        xycoords="axes fraction",
        fontsize=9,
    )
    handles_a, labels_a = ax.get_legend_handles_labels()
    handles_b, labels_b = twin.get_legend_handles_labels()
    ax.legend(handles_a + handles_b, labels_a + labels_b,
              loc="lower left", fontsize=8)
    fig.tight_layout()

    info = {
        "zone": zone,
        "t": float(entry["t"]),
        "pressure_mean": float(entry["pressure_mean"]),
        "max_eta": float(np.max(np.abs(eta))),
    }
    return fig, info


def plot_residuals(convergence_csv):
    """Relative residual against refinement factor, log-log, one line per
    identity, each labeled with its fitted order (slope)."""
    table = io.read_convergence(convergence_csv)
    factors = np.array([1.0, 2.0, 4.0])

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    slopes = {}
    floor = 1e-18  # display floor; exact zeros cannot sit on a log axis
    for i, name in enumerate(table["identity"]):
        residuals = np.array(
            [table["residual_1x"][i], table["residual_2x"][i],
             table["residual_4x"][i]]
        )
        fitted = float(table["fitted_factor"][i])
        slope = -math.log2(fitted) if math.isfinite(fitted) and fitted > 0 \
            else float("-inf")
        slopes[name] = slope
        label = f"{name} (slope {slope:.2f})" if math.isfinite(slope) \
            else f"{name} (at floor)"
        ax.loglog(factors, np.maximum(residuals, floor), marker="o",
                  lw=1.2, label=label)

    finite = [s for s in slopes.values() if math.isfinite(s)]
    mean_slope = sum(finite) / len(finite) if finite else float("nan")
    ax.text(
        0.02, 0.04,
        f"mean slope {mean_slope:.2f}",
        transform=ax.transAxes,
        fontsize=9,
    )
    ax.set_xticks([1.0, 2.0, 4.0], labels=["1x", "2x", "4x"])
    ax.set_xlabel("refinement factor")
    ax.set_ylabel("relative residual")
    ax.set_title("Identity residual convergence")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    return fig, {"slopes": slopes, "mean_slope": mean_slope}


def plot_circle(norms_csv):
    """Norm trajectories of a circle-model run, one line per tracked norm."""
    table = io.read_circle_norms(norms_csv)
    t = table["t"]

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    series = {"l2": table["l2_norm"]}
    for col in sorted(c for c in table if c.startswith("sobolev_")):
        series[col.replace("sobolev_", "s = ")] = table[col]

    variation = {}
    positive = True
    for label, values in series.items():
        ax.plot(t, values, lw=1.2, label=label)
        low = float(np.min(values))
        high = float(np.max(values))
        variation[label] = high / low - 1.0 if low > 0.0 else float("inf")
        positive = positive and low > 0.0
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title("Circle-model norm trajectories")
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()

    info = {
        "variation": variation,
        "l2_first": float(table["l2_norm"][0]),
        "l2_last": float(table["l2_norm"][-1]),
    }
    return fig, info
