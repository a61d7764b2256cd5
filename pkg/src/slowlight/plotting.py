"""Figures for the experiment outputs, rendered headless next to the CSV files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import TWO_PI  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
    "svg.hashsalt": "slowlight",
}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    # strip timestamps so repeated runs give identical files where the backend allows
    meta = {"png": {"Software": None}, "svg": {"Date": None}, "pdf": {"CreationDate": None}}
    fig.savefig(path, metadata=meta.get(path.suffix.lstrip("."), None))
    plt.close(fig)
    return path


def band_diagram(diagrams, path) -> Path:
    """Re(kd) and Im(kd) against frequency, one colour per control strength."""
    with plt.rc_context(STYLE):
        fig, (ax_re, ax_im) = plt.subplots(1, 2, sharey=True)
        for d in diagrams:
            f = d.solution.omega / TWO_PI / 1e9
            label = f"{d.Omega_c / TWO_PI / 1e6:g} MHz"
            ax_re.plot(d.solution.kd.real, f, label=label)
            ax_im.plot(d.solution.kd.imag, f, label=label)
        ax_re.set_xlabel("Re(kd)")
        ax_im.set_xlabel("Im(kd)")
        ax_re.set_ylabel("frequency (GHz)")
        ax_re.set_xlim(0, np.pi)
        ax_im.legend(title="control Rabi", fontsize=7)
        return _save(fig, path)


def sweep_map(points, ylabel: str, path) -> Path:
    """|S21| in dB over probe frequency (x) and sweep parameter (y)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        f = points[0].spectrum.frequency / 1e9
        y = np.array([p.label for p in points], dtype=float)
        z = np.array([20 * np.log10(np.maximum(np.abs(p.spectrum.values), 1e-6)) for p in points])
        if len(points) > 1:
            mesh = ax.pcolormesh(f, y, z, shading="nearest", cmap="viridis", vmin=-40, vmax=0)
            fig.colorbar(mesh, ax=ax, label="|S21| (dB)")
        else:
            ax.plot(f, z[0])
        ax.set_xlabel("probe frequency (GHz)")
        ax.set_ylabel(ylabel)
        return _save(fig, path)


def delay_curve(points, xlabel: str, path) -> Path:
    """Spectroscopic and (if present) pulsed delays against the sweep parameter."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = [p.label for p in points]
        ax.plot(x, [p.tau * 1e9 for p in points], "o-", ms=3, label="spectroscopic")
        pulsed = [p for p in points if p.pulse is not None]
        if pulsed:
            ax.plot([p.label for p in pulsed], [p.pulse.result.delay * 1e9 for p in pulsed],
                    "s--", ms=3, label="pulsed")
            ax2 = ax.twinx()
            ax2.plot([p.label for p in pulsed], [p.pulse.result.efficiency for p in pulsed],
                     ":", color="gray", label="efficiency")
            ax2.set_ylabel("pulse efficiency")
            ax2.set_ylim(0, 1)
            ax2.grid(False)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("delay (ns)")
        ax.legend(loc="upper left")
        return _save(fig, path)


def pulse_traces(run, path) -> Path:
    """Input, reference and delayed pulse envelopes."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for wave, label in ((run.reference_in, "input"), (run.reference_out, "reference"),
                            (run.signal_out, "through chain")):
            ax.plot((wave.times - wave.latency) * 1e9, np.abs(wave.samples), label=label)
        ax.set_xlabel("time (ns)")
        ax.set_ylabel("|envelope|")
        ax.legend()
        return _save(fig, path)


def line_shape_fits(trace, comparison, path) -> Path:
    """Measured dip ``1 - |S21|`` with both fitted line-shape models."""
    from .spectroscopy import MODELS

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        f = trace.frequency / 1e9
        ax.plot(f, 1 - np.abs(trace.values), "k.", ms=3, label="data")
        mid = 0.5 * (trace.omega[0] + trace.omega[-1])
        half = 0.5 * (trace.omega[-1] - trace.omega[0])
        x = (trace.omega - mid) / half
        for name, (model, _k) in MODELS.items():
            p = comparison.params.get(name)
            if p is None:
                continue
            q = np.array(p, dtype=float)
            centres = (1, 4) if name == "ATS" else (1,)
            widths = (2, 5) if name == "ATS" else (2, 4)
            q[list(centres)] = (q[list(centres)] - mid) / half
            q[list(widths)] = q[list(widths)] / half
            w = comparison.weights.get(name, float("nan"))
            ax.plot(f, model(x, q), label=f"{name} (weight {w:.3g})")
        ax.set_xlabel("probe frequency (GHz)")
        ax.set_ylabel("1 - |S21|")
        ax.legend()
        return _save(fig, path)
