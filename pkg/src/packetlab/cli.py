"""Command-line runner.

    packetlab <subcommand> [--config PATH] [--seed U64] [--samples N] [--bins N]
                           [--streams K] [--out DIR] [--param key=value ...]

Each run writes ``<subcommand>.csv`` and ``<subcommand>.json`` into ``--out``.
The JSON summary echoes the fully resolved configuration under ``"config"``;
passing that file back with ``--config`` reproduces the CSV byte for byte.

Exit codes: 0 success, 2 configuration or precondition error, 3 analysis error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from packetlab import __version__
from packetlab.errors import AnalysisError, PacketLabError
from packetlab.experiments import (
    CavityConfig,
    MachZehnderConfig,
    TwoSlitConfig,
    cavity_profile,
    fringe_spacing,
    mach_zehnder_probabilities,
    node_positions,
    resonance_check,
    two_laser_intensity,
    two_slit_intensity,
    visibility,
)
from packetlab.kinematics import ParticleState, kinematic_state, wavelengths
from packetlab.sampler import (
    GENERATOR_ALGORITHM,
    SeededStream,
    cumulative,
    expected_counts,
    goodness_of_fit,
    sample_detectors,
    sample_histogram,
)

log = logging.getLogger("packetlab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3

SCREEN_COLUMNS = ["bin_left_edge_m", "bin_right_edge_m", "count", "analytic_density_per_m", "expected_count"]
DETECTOR_COLUMNS = ["detector", "probability", "count", "expected_count"]
KINEMATICS_COLUMNS = ["quantity", "value", "unit"]

REQUIRED = object()


class ConfigError(PacketLabError, ValueError):
    """The run configuration cannot be parsed or validated."""


@dataclass(frozen=True)
class Param:
    kind: type
    default: object = REQUIRED
    positive: bool = False


_GRID = Param(int, None)

# default None means "derived from the other parameters"
PARAMETERS: dict[str, dict[str, Param]] = {
    "kinematics": {
        "rest_mass": Param(float, positive=True),
        "speed": Param(float),
    },
    "two-slit": {
        "wavelength": Param(float, positive=True),
        "slit_separation": Param(float, positive=True),
        "slit_width": Param(float, positive=True),
        "screen_distance": Param(float, positive=True),
        "screen_halfwidth": Param(float, None, positive=True),
        "open_a": Param(bool, True),
        "open_b": Param(bool, True),
        "grid_points": _GRID,
    },
    "mach-zehnder": {
        "phase_difference": Param(float),
        "second_beamsplitter": Param(bool, True),
    },
    "cavity": {
        "cavity_length": Param(float, positive=True),
        "wavelength": Param(float, positive=True),
        "tolerance": Param(float, 1e-9, positive=True),
        "grid_points": _GRID,
    },
    "two-laser": {
        "wavelength": Param(float, positive=True),
        "effective_slit_separation": Param(float, positive=True),
        "screen_distance": Param(float, positive=True),
        "screen_halfwidth": Param(float, None, positive=True),
        "relative_phase": Param(float, 0.0),
        "grid_points": _GRID,
    },
}

RUN_KEYS: dict[str, Param] = {
    "seed": Param(int, 0),
    "samples": Param(int, 100_000),
    "bins": Param(int, 256),
    "streams": Param(int, 1),
}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    samples: int = 100_000
    bins: int = 256
    seed: int = 0
    streams: int = 1
    output_path: Path = Path("packetlab-out")

    def echo(self) -> dict:
        out = {"subcommand": self.subcommand, "seed": self.seed, "samples": self.samples,
               "bins": self.bins, "streams": self.streams}
        out.update(self.parameters)
        return out


def _coerce(key: str, raw, spec: Param):
    if spec.kind is bool:
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if spec.kind is int:
        if isinstance(raw, bool):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        try:
            value = int(str(raw).strip(), 0) if isinstance(raw, str) else int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
        if not isinstance(raw, str) and value != raw:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return value
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number in SI units, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite, got {raw!r}")
    return value


def read_config_file(path) -> dict:
    """Load a flat ``key = value`` file or a single JSON object.

    A JSON run summary is accepted too; its ``"config"`` object is used.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON config {path}: {exc}") from None
        if isinstance(data.get("config"), dict):
            data = data["config"]
        return dict(data)
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed config {path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        data[key.strip()] = value.strip()
    return data


def parse_config(subcommand: str, file_values: dict | None = None, flag_values: dict | None = None,
                 output_path=None) -> RunConfig:
    """Merge file and flag values (flags win), validate, and fill defaults.

    Every problem found is reported in a single ConfigError.
    """
    if subcommand not in PARAMETERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; valid: {', '.join(PARAMETERS)}")
    schema = PARAMETERS[subcommand]
    merged = dict(file_values or {})
    echoed = merged.pop("subcommand", subcommand)
    if echoed != subcommand:
        raise ConfigError(f"config file is for subcommand {echoed!r}, not {subcommand!r}")
    merged.update({k: v for k, v in (flag_values or {}).items() if v is not None})

    problems = []
    unknown = sorted(set(merged) - set(schema) - set(RUN_KEYS))
    if unknown:
        valid = sorted(set(schema) | set(RUN_KEYS))
        problems.append(f"unknown key(s) {', '.join(unknown)}; valid keys for {subcommand}: {', '.join(valid)}")
    missing = [k for k, p in schema.items() if p.default is REQUIRED and k not in merged]
    if missing:
        problems.append(f"missing required key(s) for {subcommand}: {', '.join(missing)}")

    values = {}
    for key, spec in list(schema.items()) + list(RUN_KEYS.items()):
        if key not in merged:
            if spec.default is not REQUIRED:
                values[key] = spec.default
            continue
        try:
            value = _coerce(key, merged[key], spec)
        except ConfigError as exc:
            problems.append(str(exc))
            continue
        if spec.positive and not value > 0:
            problems.append(f"{key} must be > 0, got {merged[key]!r}")
            continue
        values[key] = value

    for key, lo in (("samples", 0), ("bins", 2), ("streams", 1), ("grid_points", 3)):
        if values.get(key) is not None and values[key] < lo:
            problems.append(f"{key} must be >= {lo}, got {values[key]!r}")
    if "seed" in values and not (0 <= values["seed"] < 2 ** 64):
        problems.append(f"seed must be an unsigned 64-bit integer, got {values['seed']!r}")
    if problems:
        raise ConfigError("; ".join(problems))

    params = {k: values[k] for k in schema}
    _fill_derived(subcommand, params)
    return RunConfig(
        subcommand=subcommand,
        parameters=params,
        samples=values["samples"],
        bins=values["bins"],
        seed=values["seed"],
        streams=values["streams"],
        output_path=Path(output_path) if output_path is not None else Path("packetlab-out"),
    )


def _fill_derived(subcommand: str, params: dict):
    if subcommand == "two-slit":
        if params["screen_halfwidth"] is None:
            # first zero of the single-slit envelope
            params["screen_halfwidth"] = params["wavelength"] * params["screen_distance"] / params["slit_width"]
        if params["grid_points"] is None:
            params["grid_points"] = 8001
    elif subcommand == "two-laser":
        if params["screen_halfwidth"] is None:
            params["screen_halfwidth"] = (5.0 * params["wavelength"] * params["screen_distance"]
                                          / params["effective_slit_separation"])
        if params["grid_points"] is None:
            params["grid_points"] = 8001
    elif subcommand == "cavity":
        if params["grid_points"] is None:
            params["grid_points"] = 1001


def _screen_rows(intensity, hist):
    edges = hist.bin_edges
    density = np.diff(cumulative(intensity, edges)) / np.diff(edges)
    expected = expected_counts(hist, intensity)
    return [[repr(float(edges[i])), repr(float(edges[i + 1])), str(int(hist.counts[i])),
             repr(float(density[i])), repr(float(expected[i]))] for i in range(hist.bin_count)]


def _screen_run(cfg: RunConfig, intensity):
    stream = SeededStream(cfg.seed)
    hist = sample_histogram(intensity, cfg.samples, stream, cfg.bins, streams=cfg.streams, workers=cfg.streams)
    rows = _screen_rows(intensity, hist)
    fit = asdict(goodness_of_fit(hist, intensity)) if hist.total >= 100 else None
    sampling = {"total": hist.total, "overflow": hist.overflow, "fit": fit}
    return SCREEN_COLUMNS, rows, sampling


def _run_kinematics(cfg: RunConfig):
    p = cfg.parameters
    state = ParticleState(p["rest_mass"], p["speed"])
    ks = asdict(kinematic_state(state))
    analytic = {"kinematic_state": ks}
    units = {"gamma": "1", "relativistic_mass": "kg", "momentum": "kg*m/s", "total_energy": "J",
             "internal_energy": "J", "kinetic_term": "J", "direction_angle_cos": "1"}
    rows = [[k, repr(float(v)), units[k]] for k, v in ks.items()]
    if state.speed > 0.0:
        wl = asdict(wavelengths(state))
        analytic["wavelengths_m"] = wl
        rows += [[f"{k}_wavelength", repr(float(v)), "m"] for k, v in wl.items()]
    else:
        analytic["wavelengths_m"] = None
    return KINEMATICS_COLUMNS, rows, analytic, None


def _run_two_slit(cfg: RunConfig):
    p = cfg.parameters
    tc = TwoSlitConfig(p["wavelength"], p["slit_separation"], p["slit_width"], p["screen_distance"],
                       p["screen_halfwidth"], p["open_a"], p["open_b"])
    intensity = two_slit_intensity(tc, p["grid_points"])
    period = tc.wavelength * tc.screen_distance / tc.slit_separation
    analytic = {"fringe_spacing_oracle_m": period}
    if tc.open_a and tc.open_b:
        analytic["fringe_spacing_m"] = fringe_spacing(intensity)
    else:
        analytic["fringe_spacing_m"] = None
    if period / 2.0 <= tc.screen_halfwidth:
        analytic["central_visibility"] = visibility(intensity, period / 2.0)
    columns, rows, sampling = _screen_run(cfg, intensity)
    return columns, rows, analytic, sampling


def _run_mach_zehnder(cfg: RunConfig):
    p = cfg.parameters
    probs = mach_zehnder_probabilities(MachZehnderConfig(p["phase_difference"], p["second_beamsplitter"]))
    c1, c2 = sample_detectors(probs, cfg.samples, SeededStream(cfg.seed))
    rows = [["1", repr(probs.p1), str(c1), repr(probs.p1 * cfg.samples)],
            ["2", repr(probs.p2), str(c2), repr(probs.p2 * cfg.samples)]]
    analytic = {"p1": probs.p1, "p2": probs.p2}
    return DETECTOR_COLUMNS, rows, analytic, {"total": cfg.samples, "counts": [c1, c2]}


def _run_cavity(cfg: RunConfig):
    p = cfg.parameters
    cc = CavityConfig(p["cavity_length"], p["wavelength"])
    resonant, mode = resonance_check(cc.cavity_length, cc.wavelength, p["tolerance"])
    intensity = cavity_profile(cc, p["grid_points"], p["tolerance"])
    nodes = node_positions(cc)
    analytic = {"resonant": resonant, "mode_number": mode, "node_count": int(nodes.size),
                "node_positions_m": [float(x) for x in nodes] if nodes.size <= 1000 else None}
    columns, rows, sampling = _screen_run(cfg, intensity)
    return columns, rows, analytic, sampling


def _run_two_laser(cfg: RunConfig):
    p = cfg.parameters
    intensity = two_laser_intensity(p["wavelength"], p["effective_slit_separation"], p["screen_distance"],
                                    p["screen_halfwidth"], p["relative_phase"], p["grid_points"])
    period = p["wavelength"] * p["screen_distance"] / p["effective_slit_separation"]
    analytic = {"fringe_spacing_oracle_m": period, "fringe_spacing_m": fringe_spacing(intensity)}
    if period / 2.0 <= p["screen_halfwidth"]:
        analytic["central_visibility"] = visibility(intensity, period / 2.0)
    columns, rows, sampling = _screen_run(cfg, intensity)
    return columns, rows, analytic, sampling


RUNNERS = {
    "kinematics": _run_kinematics,
    "two-slit": _run_two_slit,
    "mach-zehnder": _run_mach_zehnder,
    "cavity": _run_cavity,
    "two-laser": _run_two_laser,
}


def write_csv(path: Path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def run(cfg: RunConfig) -> int:
    """Execute one configured run and write its CSV and JSON files. Returns the exit code."""
    try:
        columns, rows, analytic, sampling = RUNNERS[cfg.subcommand](cfg)
    except AnalysisError as exc:
        print(f"packetlab: analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except PacketLabError as exc:
        print(f"packetlab: precondition violated: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.subcommand}.csv"
    json_path = out / f"{cfg.subcommand}.json"
    write_csv(csv_path, columns, rows)
    summary = {
        "artifact": {"name": "packetlab", "version": __version__},
        "generator": GENERATOR_ALGORITHM,
        "config": cfg.echo(),
        "analytic": analytic,
        "sampling": sampling,
        "csv": csv_path.name,
    }
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %s and %s", csv_path, json_path)
    return EXIT_OK


def _param_pair(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="packetlab", description="Photon-by-photon interference experiments.")
    parser.add_argument("subcommand", choices=list(PARAMETERS))
    parser.add_argument("--config", help="key = value file or JSON object (a run summary works too)")
    parser.add_argument("--seed", help="unsigned 64-bit seed")
    parser.add_argument("--samples", help="number of simulated particles")
    parser.add_argument("--bins", help="histogram bins")
    parser.add_argument("--streams", help="number of independent random streams to split sampling over")
    parser.add_argument("--out", default="packetlab-out", help="output directory")
    parser.add_argument("--param", action="append", type=_param_pair, default=[], metavar="KEY=VALUE",
                        help="experiment parameter in SI units; repeatable, overrides --config")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        flags = dict(args.param)
        for key in ("seed", "samples", "bins", "streams"):
            if getattr(args, key) is not None:
                flags[key] = getattr(args, key)
        cfg = parse_config(args.subcommand, file_values, flags, args.out)
    except ConfigError as exc:
        print(f"packetlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)
