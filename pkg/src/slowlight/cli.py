"""Command-line driver: ``slowlight <command> --config run.toml --out results/``.

Every command writes UTF-8 CSV/JSON files plus ``run_manifest.json`` into the
output directory, and (unless ``--no-figures``) matplotlib figures beside them.
Exit status is 0 on success, 2 for configuration problems and 3 for numerical
or fit failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, experiments
from .config import ExperimentConfig, load_config
from .errors import ConfigError, InvalidParameterError, SlowLightError
from .model import TWO_PI

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class OutputDir:
    """Collects the files written by one run, in write order."""

    def __init__(self, path, figures: bool, figure_format: str):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.figures = figures
        self.figure_format = figure_format
        self.written = []

    def file(self, name: str) -> Path:
        self.written.append(name)
        return self.path / name

    def json(self, name: str, data):
        text = json.dumps(_clean(data), indent=2, sort_keys=True) + "\n"
        self.file(name).write_text(text, encoding="utf-8")

    def text(self, name: str, text: str):
        self.file(name).write_text(text, encoding="utf-8")

    def figure(self, stem: str, draw, *args):
        if self.figures:
            draw(*args, self.file(f"{stem}.{self.figure_format}"))


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def sweep_csv(points, label_column: str) -> str:
    """Long-format 2D table of S21 over (sweep parameter, probe frequency)."""
    rows = []
    for p in points:
        for f, v in zip(p.spectrum.frequency, p.spectrum.values):
            rows.append((float(p.label), float(f), float(v.real), float(v.imag), float(abs(v))))
    return _rows_csv([label_column, "frequency_Hz", "re_S21", "im_S21", "abs_S21"], rows)


# -- commands ------------------------------------------------------------------

def cmd_band(cfg, out, threads):
    from . import plotting
    run = experiments.run_band(cfg, threads)
    for d in run.diagrams:
        d.solution.to_csv(out.file(f"band_Omega_{d.Omega_c / TWO_PI / 1e6:g}MHz.csv"))
    out.json("band_slopes.json", {"lossless": True, "rows": run.slopes})
    out.figure("band_structure", plotting.band_diagram, run.diagrams)


def _sweep_summary(points, label_name):
    return [p.to_dict(label_name) for p in points]


def cmd_ats_sweep(cfg, out, threads):
    from . import plotting
    points = experiments.run_ats_sweep(cfg, threads)
    out.text("ats_S21.csv", sweep_csv(points, "power_dBm"))
    out.json("delay_vs_power.json", {"points": _sweep_summary(points, "power_dBm")})
    out.figure("ats_map", plotting.sweep_map, points, "control power (dBm)")
    out.figure("delay_vs_power", plotting.delay_curve, points, "control power (dBm)")


def cmd_dispersion_sweep(cfg, out, threads):
    from . import plotting
    points = experiments.run_dispersion_sweep(cfg, threads)
    out.text("dispersion_S21.csv", sweep_csv(points, "detuning_MHz"))
    f2 = cfg.dispersion.f2_GHz
    summary = _sweep_summary(points, "detuning_MHz")
    for row in summary:
        row["f1_Hz"] = (f2 - row["detuning_MHz"] * 1e-3) * 1e9
    out.json("delay_vs_detuning.json", {"f2_Hz": f2 * 1e9, "N": cfg.dispersion.N,
                                        "averaging_bandwidth_Hz": cfg.dispersion.averaging_MHz * 1e6,
                                        "points": summary})
    out.figure("dispersion_map", plotting.sweep_map, points, "f2 - f1 (MHz)")
    out.figure("delay_vs_detuning", plotting.delay_curve, points, "f2 - f1 (MHz)")


def cmd_pulse(cfg, out, threads):
    from . import plotting
    runs = experiments.run_pulses(cfg, threads)
    rows = []
    for i, (dbm, Om, run) in enumerate(runs):
        run.reference_out.to_csv(out.file(f"pulse_{i:03d}_reference.csv"))
        run.signal_out.to_csv(out.file(f"pulse_{i:03d}_chain.csv"))
        rows.append({"index": i, "power_dBm": dbm, "Omega_c_Hz": Om / TWO_PI,
                     **run.result.to_dict()})
        out.figure(f"pulse_{i:03d}", plotting.pulse_traces, run)
    out.json("pulse_results.json", {"sigma_s": cfg.pulse.sigma_ns * 1e-9, "points": rows})


def cmd_calibrate(cfg, out, threads):
    run = experiments.run_calibrate(cfg)
    out.json("calibration.json", run.to_dict())


def cmd_discriminate(cfg, out, threads):
    from . import plotting
    trace, comparison = experiments.run_discriminate(cfg)
    trace.to_csv(out.file("discriminate_trace.csv"))
    out.json("discriminate.json", comparison.to_dict())
    out.figure("line_shape_fits", plotting.line_shape_fits, trace, comparison)


COMMANDS = {
    "band": (cmd_band, "lossless Bloch band diagrams per control strength"),
    "ats-sweep": (cmd_ats_sweep, "dressed-chain spectra and delays versus control power"),
    "dispersion-sweep": (cmd_dispersion_sweep, "alternating-frequency chain versus detuning"),
    "pulse": (cmd_pulse, "Gaussian pulse through the dressed chain"),
    "calibrate": (cmd_calibrate, "synthetic power calibration and gamma20 extraction"),
    "discriminate": (cmd_discriminate, "EIT versus ATS line-shape model selection"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slowlight", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_fn, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="TOML config or a previous run_manifest.json")
        p.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        p.add_argument("--threads", type=int, default=1, help="sweep points evaluated in parallel")
        p.add_argument("--seed", type=int, help="noise seed (overrides [noise] seed)")
        p.add_argument("--no-figures", action="store_true", help="write data files only")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.noise.seed = args.seed
        if args.out is not None:
            cfg.output.dir = str(args.out)
        if args.no_figures:
            cfg.output.figures = False
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = OutputDir(cfg.output.dir, cfg.output.figures, cfg.output.figure_format)
        fn, _ = COMMANDS[args.command]
        fn(cfg, out, args.threads)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"slowlight: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SlowLightError as exc:
        print(f"slowlight: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {"command": args.command, "version": __version__,
                "config": cfg.to_dict(), "outputs": out.written}
    out.json("run_manifest.json", manifest)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
