"""``squeezed-echo`` command line front end.

Each experiment starts from a preset (the figure parameter sets where one
exists), then applies a JSON config file, then ``--group.key=value`` flags.
Results go to ``--out`` (written atomically) or stdout.

Exit codes: 0 success, 1 invalid config, 2 expectation not met,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .analysis import (
    decompose_q_response,
    decompose_variance_response,
    detect_echo,
    squeezing_duty_cycle,
)
from .core import (
    LinearPulsePair,
    OscillatorParams,
    PhasePoint,
    PulsePair,
    ThermalParams,
    thermal_echo,
    variance_two_pulse,
)
from .ensemble import (
    EnsembleConfig,
    LorentzianSpec,
    displacement_variance,
    mean_displacement,
    mean_displacement_linear,
    mean_quantum_variance,
    snapshot,
)
from .oracle import IntegratorConfig, IntegratorError, random_cross_check
from .timeseries import TimeGrid, TimeSeries

EXPERIMENTS = (
    "mean-q",
    "mean-q-linear",
    "variance",
    "variance-classical",
    "snapshot",
    "thermal",
    "oracle-check",
    "detect-echo",
    "sweep",
    "duty-cycle",
)

# group -> key -> parser
SCHEMA = {
    "oscillator": {"omega": float},
    "lorentzian": {
        "omega0": float,
        "gamma": float,
        "truncation_halfwidth": float,
        "min_frequency": float,
    },
    "pulses": {"mu1": float, "mu2": float, "delta": float},
    "linear": {"pi1": float, "pi2": float, "delta": float},
    "init": {"q": float, "p": float},
    "thermal": {"kT": float},
    "grid": {"t_start": float, "t_end": float, "n_points": int},
    "ensemble": {"mode": str, "n_members": int, "quadrature_order": int, "seed": int},
    "snapshot": {"times": str},
    "detect": {"series": str, "threshold": float, "carrier": float},
    "sweep": {
        "param": str,
        "min": float,
        "max": float,
        "count": int,
        "scale": str,
        "param2": str,
        "min2": float,
        "max2": float,
        "count2": int,
        "series": str,
    },
    "oracle": {"draws": int, "seed": int, "tolerance": float, "n_points": int, "step": float},
    "duty": {"mu1": str},
}
TOP_LEVEL = {"out": str, "format": str, "seed": int, "expect_echo": str}

# Symmetric truncation keeps the 1/omega^5 growth of post-kick variances at
# low frequency from swamping the ensemble averages (support omega0 +- 5).
FIGURE_TRUNCATION = 10.0

_FIG1 = {
    "lorentzian": {"omega0": 7.5, "gamma": 0.5, "truncation_halfwidth": FIGURE_TRUNCATION},
    "pulses": {"mu1": 5.0, "mu2": 2.5, "delta": 10.0},
    "init": {"q": 25.0, "p": 10.0},
}
_FIG1_INSET = {
    "lorentzian": {"omega0": 10.0, "gamma": 0.5, "truncation_halfwidth": FIGURE_TRUNCATION},
    "linear": {"pi1": 1.0, "pi2": -100.0, "delta": 10.0},
    "init": {"q": 25.0, "p": 1.0},
}
_FIG3 = {
    "lorentzian": {"omega0": 7.5, "gamma": 0.5, "truncation_halfwidth": FIGURE_TRUNCATION},
    "pulses": {"mu1": 5.0, "mu2": 2.5, "delta": 10.0},
}
_FIG3_INSET = {
    "lorentzian": {"omega0": 7.5, "gamma": 0.5, "truncation_halfwidth": FIGURE_TRUNCATION},
    "pulses": {"mu1": 2.0, "mu2": 5.0, "delta": 10.0},
    "init": {"q": 25.0, "p": 100.0},
}
SERIES_PRESETS = {
    "mean-q": _FIG1,
    "mean-q-linear": _FIG1_INSET,
    "variance": _FIG3,
    "variance-classical": _FIG3_INSET,
}
REQUIRED = {
    "mean-q": ("lorentzian", "pulses", "init"),
    "mean-q-linear": ("lorentzian", "linear", "init"),
    "variance": ("lorentzian", "pulses"),
    "variance-classical": ("lorentzian", "pulses", "init"),
    "snapshot": ("lorentzian", "pulses", "init"),
    "thermal": ("oscillator", "pulses", "thermal"),
    "oracle-check": (),
    "detect-echo": ("detect",),
    "sweep": ("sweep",),
    "duty-cycle": ("oscillator", "duty"),
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors (exit 1); exit 2 is reserved for expectations
    def error(self, message):
        raise ConfigError(message)


def _preset(experiment: str, series: str | None = None) -> dict:
    if experiment in SERIES_PRESETS:
        return copy.deepcopy(SERIES_PRESETS[experiment])
    if experiment == "snapshot":
        return copy.deepcopy(_FIG1)
    if experiment == "detect-echo":
        cfg = copy.deepcopy(SERIES_PRESETS.get(series or "mean-q", {}))
        return cfg
    if experiment == "sweep":
        cfg = copy.deepcopy(SERIES_PRESETS.get(series or "variance", {}))
        cfg["ensemble"] = {"mode": "quadrature"}
        return cfg
    return {}


def _parse_value(group: str, key: str, raw):
    if group not in SCHEMA:
        raise ConfigError(f"unknown parameter group {group!r}")
    if key not in SCHEMA[group]:
        raise ConfigError(f"unknown key {group}.{key}")
    kind = SCHEMA[group][key]
    if isinstance(raw, str) and kind is not str:
        try:
            raw = kind(raw)
        except ValueError:
            raise ConfigError(f"{group}.{key}: cannot parse {raw!r} as {kind.__name__}") from None
    if kind is float and isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    if kind is int and isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    if kind is str and isinstance(raw, (str, int, float)) and not isinstance(raw, bool):
        return str(raw)
    if kind is str and isinstance(raw, list):
        return ",".join(str(x) for x in raw)
    raise ConfigError(f"{group}.{key}: expected {kind.__name__}, got {raw!r}")


def _merge(config: dict, group: str, key: str, raw):
    config.setdefault(group, {})[key] = _parse_value(group, key, raw)


def load_config_file(path: str | os.PathLike) -> tuple[dict, dict]:
    """Read a JSON config: parameter groups plus optional top-level options."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    groups, options = {}, {}
    for name, value in data.items():
        if name in TOP_LEVEL:
            options[name] = value
        elif isinstance(value, dict):
            for key, raw in value.items():
                _merge(groups, name, key, raw)
        elif name in SCHEMA:
            raise ConfigError(f"group {name!r} must be an object")
        else:
            raise ConfigError(f"unknown key {name!r}")
    return groups, options


def _split_flags(extra: list[str]) -> list[tuple[str, str, str]]:
    out = []
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--") or "." not in arg.split("=", 1)[0]:
            raise ConfigError(f"unrecognized argument {arg!r}")
        name, eq, value = arg[2:].partition("=")
        if not eq:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {arg}")
            value = extra[i + 1]
            i += 1
        group, _, key = name.partition(".")
        out.append((group, key, value))
        i += 1
    return out


def _parse_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected true or false, got {raw!r}")


def build_argparser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="squeezed-echo",
        description="Simulate echoes of impulsively squeezed oscillator ensembles.",
        epilog="Parameters are set with --group.key=value, e.g. --pulses.mu2=2.5.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON file with parameter groups")
    parser.add_argument("--out", help="output path (stdout if omitted)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--seed", type=int, help="seed for ensembles and oracle draws")
    parser.add_argument("--expect-echo", help="detect-echo: expected outcome (true|false)")
    return parser


def resolve(argv: list[str]) -> tuple[str, dict, dict]:
    """Parse arguments into (experiment, groups, options); flags override the file."""
    parser = build_argparser()
    args, extra = parser.parse_known_args(argv)
    file_groups, options = load_config_file(args.config) if args.config else ({}, {})
    flag_items = _split_flags(extra)

    cli_groups: dict = {}
    for group, key, value in flag_items:
        _merge(cli_groups, group, key, value)
    for name in ("out", "format", "seed"):
        if getattr(args, name) is not None:
            options[name] = getattr(args, name)
    if args.expect_echo is not None:
        options["expect_echo"] = args.expect_echo
    options["expect_echo"] = _parse_bool(options.get("expect_echo", True))

    series_key = "series" if args.experiment in ("detect-echo", "sweep") else None
    series = None
    if series_key:
        group = "detect" if args.experiment == "detect-echo" else "sweep"
        series = cli_groups.get(group, {}).get("series") or file_groups.get(group, {}).get("series")
    groups = _preset(args.experiment, series)
    for source in (file_groups, cli_groups):
        for group, values in source.items():
            groups.setdefault(group, {}).update(values)
    if args.experiment == "detect-echo":
        groups.setdefault("detect", {}).setdefault("series", "mean-q")
    if args.experiment == "sweep" and "sweep" in groups:
        groups["sweep"].setdefault("series", "variance")

    for group in REQUIRED[args.experiment]:
        if group not in groups:
            raise ConfigError(f"experiment {args.experiment!r} needs parameter group {group!r}")
    if "seed" in options:
        seed = _parse_value("ensemble", "seed", options["seed"])
        groups.setdefault("ensemble", {})["seed"] = seed
        groups.setdefault("oracle", {})["seed"] = seed
    fmt = options.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    options["format"] = fmt
    return args.experiment, groups, options


# ---------------------------------------------------------------- builders


def _need(groups, group, key, default=None):
    value = groups.get(group, {}).get(key, default)
    if value is None:
        raise ConfigError(f"missing required key {group}.{key}")
    return value


def _lorentzian(groups) -> LorentzianSpec:
    g = groups.get("lorentzian", {})
    return LorentzianSpec(
        _need(groups, "lorentzian", "omega0"),
        _need(groups, "lorentzian", "gamma"),
        g.get("truncation_halfwidth", 20.0),
        g.get("min_frequency"),
    )


def _ensemble(groups) -> EnsembleConfig:
    e = groups.get("ensemble", {})
    return EnsembleConfig(
        _lorentzian(groups),
        mode=e.get("mode", "monte-carlo"),
        n_members=e.get("n_members", 10_000),
        quadrature_order=e.get("quadrature_order", 2048),
        seed=e.get("seed", 0),
    )


def _pulses(groups) -> PulsePair:
    return PulsePair(*(_need(groups, "pulses", k) for k in ("mu1", "mu2", "delta")))


def _linear(groups) -> LinearPulsePair:
    return LinearPulsePair(*(_need(groups, "linear", k) for k in ("pi1", "pi2", "delta")))


def _init(groups) -> PhasePoint:
    return PhasePoint(_need(groups, "init", "q"), _need(groups, "init", "p"))


def _grid(groups, delta) -> TimeGrid:
    g = groups.get("grid", {})
    return TimeGrid(g.get("t_start", -1.0), g.get("t_end", 3.0 * delta), g.get("n_points", 12_000))


def _series(kind: str, groups) -> tuple[TimeSeries, float, float]:
    """Compute an ensemble series; returns it with its pulse delay and carrier."""
    cfg = _ensemble(groups)
    omega0 = cfg.spec.omega0
    if kind == "mean-q":
        pulses = _pulses(groups)
        grid = _grid(groups, pulses.delta)
        return mean_displacement(cfg, _init(groups), pulses, grid), pulses.delta, omega0
    if kind == "mean-q-linear":
        pulses = _linear(groups)
        grid = _grid(groups, pulses.delta)
        return mean_displacement_linear(cfg, _init(groups), pulses, grid), pulses.delta, omega0
    if kind == "variance":
        pulses = _pulses(groups)
        grid = _grid(groups, pulses.delta)
        return mean_quantum_variance(cfg, pulses, grid), pulses.delta, 2 * omega0
    if kind == "variance-classical":
        pulses = _pulses(groups)
        grid = _grid(groups, pulses.delta)
        return displacement_variance(cfg, _init(groups), pulses, grid), pulses.delta, 2 * omega0
    raise ConfigError(f"unknown series {kind!r}")


def _echo_input(kind: str, series: TimeSeries) -> TimeSeries:
    """Variance series are mean-detrended; the classical variance echo is a dip."""
    if kind in ("variance", "variance-classical"):
        detrended = series.values - series.values.mean()
        if kind == "variance-classical":
            detrended = -detrended
        return TimeSeries(series.grid, detrended)
    return series


# ---------------------------------------------------------------- experiments


def _run_series(experiment, groups):
    series, _, _ = _series(experiment, groups)
    column = "mean_q" if experiment.startswith("mean-q") else "variance"
    return ["t", column], list(zip(series.times, series.values))


def _run_thermal(groups):
    params = OscillatorParams(_need(groups, "oscillator", "omega"))
    pulses = _pulses(groups)
    thermal = ThermalParams(_need(groups, "thermal", "kT"))
    grid = _grid(groups, pulses.delta)
    t = grid.times
    if grid.t_start < 0:
        raise ConfigError("thermal grids must start at t >= 0")
    # a thermal state follows the vacuum ratio with kT/omega^2 in place of 1/(2 omega)
    variance = thermal.kT / params.omega**2 * variance_two_pulse(params, pulses, t)
    echo = thermal_echo(params, pulses, thermal, t)
    return ["t", "variance", "echo_term"], list(zip(t, variance, echo))


def _run_detect(groups):
    kind = groups["detect"]["series"]
    series, delta, carrier = _series(kind, groups)
    carrier = groups["detect"].get("carrier", carrier)
    threshold = groups["detect"].get("threshold", 3.0)
    report = detect_echo(_echo_input(kind, series), delta, carrier, threshold)
    row = (report.center, report.amplitude, report.baseline, report.contrast, report.detected)
    return ["center", "amplitude", "baseline", "contrast", "detected"], [row], report


def _sweep_values(lo, hi, count, scale):
    if count < 1:
        raise ConfigError("sweep counts must be >= 1")
    if count == 1:
        return [lo]
    if scale == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log sweeps need positive bounds")
        return list(np.geomspace(lo, hi, count))
    if scale != "lin":
        raise ConfigError(f"unknown sweep scale {scale!r}")
    return list(np.linspace(lo, hi, count))


def _echo_amplitude(kind, groups):
    """Analytic echo-term amplitude for the central oscillator of the ensemble."""
    params = OscillatorParams(_lorentzian(groups).omega0)
    if kind == "mean-q":
        return decompose_q_response(params, _init(groups), _pulses(groups))[2].amplitude
    if kind == "variance":
        _, comps = decompose_variance_response(params, _pulses(groups))
        return params.vacuum_variance * comps[2].amplitude
    return float("nan")


def _run_sweep(groups):
    sw = groups["sweep"]
    kind = sw["series"]
    axes = []
    for suffix in ("", "2"):
        name = sw.get("param" + suffix)
        if name is None:
            if suffix == "":
                raise ConfigError("missing required key sweep.param")
            continue
        group, _, key = name.partition(".")
        _parse_value(group, key, 0.0)
        values = _sweep_values(
            _need(groups, "sweep", "min" + suffix),
            _need(groups, "sweep", "max" + suffix),
            _need(groups, "sweep", "count" + suffix),
            sw.get("scale", "lin"),
        )
        axes.append((group, key, values))
    columns = [key for _, key, _ in axes]
    if len(set(columns)) != len(columns):
        columns = [f"{g}.{k}" for g, k, _ in axes]
    rows = []
    for point in np.ndindex(*(len(v) for _, _, v in axes)):
        local = copy.deepcopy(groups)
        coords = []
        for (group, key, values), i in zip(axes, point):
            local.setdefault(group, {})[key] = float(values[i])
            coords.append(float(values[i]))
        series, delta, carrier = _series(kind, local)
        report = detect_echo(_echo_input(kind, series), delta, carrier)
        rows.append((*coords, _echo_amplitude(kind, local), report.contrast, report.center))
    return columns + ["echo_amplitude", "echo_contrast", "echo_center"], rows


def _run_duty(groups):
    params = OscillatorParams(_need(groups, "oscillator", "omega"))
    raw = _need(groups, "duty", "mu1")
    try:
        mus = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"duty.mu1: cannot parse {raw!r}") from None
    return ["mu1", "duty_cycle"], [(mu, squeezing_duty_cycle(params, mu)) for mu in mus]


def _run_oracle(groups):
    o = groups.get("oracle", {})
    tol = o.get("tolerance", 1e-9)
    icfg = IntegratorConfig(step=o.get("step"))
    worst = random_cross_check(o.get("draws", 50), o.get("seed", 0), o.get("n_points", 600), icfg)
    rows = [(name, float(dev), tol, bool(dev < tol)) for name, dev in worst.items()]
    return ["check", "max_deviation", "tolerance", "passed"], rows


def parse_snapshot_times(raw: str, delta: float) -> list[tuple[str, float, bool]]:
    """Tokens like ``0-``, ``10+``, ``delta-`` or ``2delta``: (label, t, before_kick)."""
    out = []
    for token in (s.strip() for s in raw.split(",")):
        if not token:
            continue
        before = token.endswith("-")
        body = token.rstrip("+-")
        try:
            if body.endswith("delta"):
                factor = body[: -len("delta")]
                t = (float(factor) if factor else 1.0) * delta
            else:
                t = float(body)
        except ValueError:
            raise ConfigError(f"snapshot.times: cannot parse {token!r}") from None
        label = body + ("minus" if before else "plus" if token.endswith("+") else "")
        out.append((label, t, before))
    if not out:
        raise ConfigError("snapshot.times is empty")
    return out


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, str):
        return x
    x = float(x)
    return x if math.isfinite(x) else None


def render(columns, rows, fmt: str, config: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    records = [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows]
    return json.dumps({"config": config, "records": records}, indent=1) + "\n"


def write_atomic(path: str | os.PathLike, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv: list[str] | None = None, stdout=None) -> int:
    """Run one experiment; returns the process exit status."""
    stdout = stdout or sys.stdout
    try:
        experiment, groups, options = resolve(list(sys.argv[1:] if argv is None else argv))
        fmt = options["format"]
        out = options.get("out")
        echo_block = {"experiment": experiment, **groups}
        status, summary = 0, experiment

        if experiment == "snapshot":
            if out is None:
                raise ConfigError("snapshot writes several files and needs --out")
            cfg = _ensemble(groups)
            pulses = _pulses(groups)
            default = "0-,delta-,delta+,2delta"
            times = parse_snapshot_times(
                groups.get("snapshot", {}).get("times", default), pulses.delta
            )
            base = Path(out)
            for label, t, before in times:
                pts = snapshot(cfg, _init(groups), pulses, t, before_kick=before)
                text = render(["q", "p"], zip(pts.q, pts.p), fmt, {**echo_block, "t": t})
                write_atomic(
                    base.with_name(f"{base.stem}_t{label}{base.suffix or '.' + fmt}"), text
                )
            summary = f"snapshot: wrote {len(times)} files of {cfg.n_members} members"
        else:
            report = None
            if experiment in SERIES_PRESETS:
                columns, rows = _run_series(experiment, groups)
            elif experiment == "thermal":
                columns, rows = _run_thermal(groups)
            elif experiment == "detect-echo":
                columns, rows, report = _run_detect(groups)
            elif experiment == "sweep":
                columns, rows = _run_sweep(groups)
            elif experiment == "duty-cycle":
                columns, rows = _run_duty(groups)
            else:
                columns, rows = _run_oracle(groups)
            text = render(columns, rows, fmt, echo_block)
            if out is None:
                stdout.write(text)
            else:
                write_atomic(out, text)

            if experiment == "detect-echo":
                expect = options["expect_echo"]
                summary = (
                    f"detect-echo: detected={report.detected} contrast={report.contrast:.3g} "
                    f"center={report.center:.4g}"
                )
                if report.detected != expect:
                    status = 2
            elif experiment == "oracle-check":
                failed = [r[0] for r in rows if not r[3]]
                summary = "oracle-check: " + (
                    "all checks passed" if not failed else f"failed {failed}"
                )
                status = 2 if failed else 0
            else:
                summary = f"{experiment}: {len(rows)} rows"
        print(summary, file=sys.stderr)
        return status
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IntegratorError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return 1
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
