"""Command-line front end.

Subcommands
-----------
point      full pipeline at one distance, every intermediate bound printed
scan       key rate versus distance as CSV
compare    four-state, six-four and six-state rates side by side as CSV
process    re-analyze a tally file (optionally per-slice with grouping)
simulate   write Monte Carlo tally files

Configuration is a flat ``key = value`` text file; every key missing from
the file falls back to a built-in default. ``--show-defaults`` prints the
effective configuration with the provenance of each value. Exit codes:
0 success with a positive key, 2 success with zero key, 1 error.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, replace
from typing import Sequence, TextIO

from . import baselines
from .channel import expected_tallies
from .core import (
    BASES,
    KINDS,
    STATES,
    BasisLabel,
    CellCount,
    ChannelParams,
    IntensityKind,
    ObservedTallies,
    ProtocolConfig,
    SecurityParams,
    StateLabel,
    TallyError,
    intensity_triple,
    validate_config,
)
from .keyrate import DriftClassifier, ExtractionResult, analyze_tallies, group_and_extract
from .simulate import DriftTrace, drift_beta, sample_drifting_tallies, sample_tallies

TWO_PI = 2.0 * math.pi

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_KEY = 2

_HW = "baseline hardware parameters"
_PROTO = "baseline protocol parameters"
_ASSUMED = "assumption, not fixed by the baseline system"
_DERIVED = "derived: (1 - p_z_alice) / 2"

# key -> (default, parser, provenance)
_SCHEMA: dict[str, tuple[object, type | str, str]] = {
    "e0": (0.01, float, _HW),
    "alpha_db_per_km": (0.19, float, _HW),
    "eta_z_db": (4.0, float, _HW),
    "eta_xy_db": (9.0, float, _HW),
    "e_d": (1.3e-7, float, _HW),
    "eta_det": (0.6, float, _HW),
    "beta_rad": (0.0, float, _ASSUMED),
    "mu": (0.55, float, _PROTO),
    "nu": (0.28, float, _PROTO),
    "omega": (0.0, float, _PROTO),
    "p_mu": (0.54, float, _PROTO),
    "p_nu": (0.36, float, _PROTO),
    "p_omega": (0.10, float, _PROTO),
    "p_z_alice": (0.77, float, _PROTO),
    "p_x0": (None, "optional_float", _DERIVED),
    "p_y0": (None, "optional_float", _DERIVED),
    "p_z_bob": (0.5, float, _ASSUMED),
    "n_total": (3_000_000_000_000, "count", _PROTO),
    "m_groups": (1, int, _ASSUMED),
    "eps_bar": (1e-10, float, _HW),
    "eps_ec": (1e-10, float, _HW),
    "eps_pa": (1e-10, float, _HW),
    "f_ec": (1.1, float, _HW),
    "distance_km": (200.0, float, _ASSUMED),
    "mode": ("analytic", "mode", _ASSUMED),
    "seed": (0, int, _ASSUMED),
    "scan_min_km": (0.0, float, _ASSUMED),
    "scan_max_km": (200.0, float, _ASSUMED),
    "scan_step_km": (10.0, float, _ASSUMED),
    "n_values": ((), "counts", _ASSUMED),
    "drift": ("fixed", "drift", _ASSUMED),
    "n_slices": (1, int, _ASSUMED),
    "drift_beta0_rad": (0.0, float, _ASSUMED),
    "drift_rate_rad": (TWO_PI, float, _ASSUMED),
    "drift_amplitude_rad": (math.pi / 4.0, float, _ASSUMED),
    "drift_period": (1.0, float, _ASSUMED),
    "slice_duration_s": (1.0, float, _ASSUMED),
    "n_zz_all_intensities": (True, bool, _ASSUMED),
    "rho_negated_exponent": (False, bool, _ASSUMED),
}


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str, kind) -> object:
    raw = raw.strip()
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "count":
            return _as_count(raw)
        if kind == "counts":
            if not raw:
                return ()
            return tuple(_as_count(part) for part in raw.split(","))
        if kind == "optional_float":
            return None if raw.lower() in ("", "none", "derived") else float(raw)
        if kind == "mode":
            if raw not in ("analytic", "montecarlo"):
                raise ValueError(raw)
            return raw
        if kind == "drift":
            if raw not in ("fixed", "linear", "sinusoidal"):
                raise ValueError(raw)
            return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from exc
    raise ConfigError(f"{key}: unhandled schema kind {kind!r}")


def _as_count(raw: str) -> int:
    value = float(raw)
    count = int(round(value))
    if abs(value - count) > 0.5:
        raise ValueError(raw)
    return count


@dataclass
class RunConfig:
    """Typed view of the flat configuration document."""

    values: dict[str, object]
    explicit: frozenset[str]

    def __getitem__(self, key: str) -> object:
        return self.values[key]

    def protocol_config(self) -> ProtocolConfig:
        v = self.values
        return ProtocolConfig(
            intensities=intensity_triple(
                v["mu"], v["nu"], v["omega"], v["p_mu"], v["p_nu"], v["p_omega"]
            ),
            p_z_alice=v["p_z_alice"],
            p_x0=v["p_x0"],
            p_y0=v["p_y0"],
            p_z_bob=v["p_z_bob"],
            n_total=v["n_total"],
            m_groups=v["m_groups"],
        )

    def channel_params(self) -> ChannelParams:
        v = self.values
        return ChannelParams(
            e0=v["e0"],
            alpha_db_per_km=v["alpha_db_per_km"],
            eta_z_db=v["eta_z_db"],
            eta_xy_db=v["eta_xy_db"],
            e_d=v["e_d"],
            eta_det=v["eta_det"],
            beta=v["beta_rad"],
        )

    def security_params(self) -> SecurityParams:
        v = self.values
        return SecurityParams(
            eps_bar=v["eps_bar"], eps_ec=v["eps_ec"], eps_pa=v["eps_pa"], f_ec=v["f_ec"]
        )

    def provenance_lines(self) -> list[str]:
        lines = []
        for key in sorted(_SCHEMA):
            default, _, origin = _SCHEMA[key]
            source = "config file" if key in self.explicit else f"default: {origin}"
            lines.append(f"{key} = {_fmt(self.values[key])}  ({source})")
        return lines


def load_config(path: str | None) -> RunConfig:
    """Read a ``key = value`` file; unknown keys are rejected as a group."""
    values = {key: default for key, (default, _, _) in _SCHEMA.items()}
    explicit: set[str] = set()
    if path is not None:
        unknown = []
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
                key, _, raw = stripped.partition("=")
                key = key.strip()
                if key not in _SCHEMA:
                    unknown.append(f"line {lineno}: unknown key {key!r}")
                    continue
                values[key] = _parse_value(key, raw, _SCHEMA[key][1])
                explicit.add(key)
        if unknown:
            raise ConfigError("; ".join(unknown))
    return RunConfig(values, frozenset(explicit))


def _fmt(x: object) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, tuple):
        return ",".join(_fmt(item) for item in x)
    return str(x)


# ---------------------------------------------------------------------------
# tally file io

_TALLY_HEADER = ["state", "basis", "intensity", "sent", "detected", "errors"]

_STATE_BY_NAME = {s.value: s for s in STATES}
_BASIS_BY_NAME = {b.value: b for b in BASES}
_KIND_BY_NAME = {k.value: k for k in KINDS}


def write_tally_csv(slices: Sequence[ObservedTallies], out: TextIO) -> None:
    """Write tallies as CSV; more than one slice adds a leading slice column."""
    sliced = len(slices) > 1
    header = (["slice"] if sliced else []) + _TALLY_HEADER
    out.write(",".join(header) + "\n")
    for index, tallies in enumerate(slices):
        for state in STATES:
            for basis in BASES:
                for kind in KINDS:
                    cc = tallies.cell(state, basis, kind)
                    row = ([str(index)] if sliced else []) + [
                        state.value,
                        basis.value,
                        kind.value,
                        str(cc.sent),
                        str(cc.detected),
                        str(cc.errors),
                    ]
                    out.write(",".join(row) + "\n")


def read_tally_csv(handle: TextIO) -> list[ObservedTallies]:
    """Parse a tally CSV into one tally table per slice.

    Parse and consistency errors carry the offending line number; cell
    constraint violations name the cell.
    """
    lines = handle.read().splitlines()
    if not lines:
        raise TallyError("line 1: empty tally file")
    header = [col.strip() for col in lines[0].split(",")]
    if header == _TALLY_HEADER:
        sliced = False
    elif header == ["slice"] + _TALLY_HEADER:
        sliced = True
    else:
        raise TallyError(f"line 1: unexpected header {','.join(header)!r}")

    per_slice: dict[int, dict] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise TallyError(
                f"line {lineno}: expected {len(header)} columns, got {len(parts)}"
            )
        offset = 0
        slice_index = 0
        if sliced:
            slice_index = _int_field(parts[0], lineno, "slice")
            offset = 1
        state = _STATE_BY_NAME.get(parts[offset])
        basis = _BASIS_BY_NAME.get(parts[offset + 1])
        kind = _KIND_BY_NAME.get(parts[offset + 2])
        if state is None or basis is None or kind is None:
            raise TallyError(
                f"line {lineno}: bad cell label "
                f"({parts[offset]},{parts[offset + 1]},{parts[offset + 2]})"
            )
        sent = _int_field(parts[offset + 3], lineno, "sent")
        detected = _int_field(parts[offset + 4], lineno, "detected")
        errors = _int_field(parts[offset + 5], lineno, "errors")
        cells = per_slice.setdefault(slice_index, {})
        key = (state, basis, kind)
        if key in cells:
            raise TallyError(f"line {lineno}: duplicate cell ({parts[offset]},...)")
        cells[key] = CellCount(sent, detected, errors)

    result = []
    for slice_index in sorted(per_slice):
        try:
            result.append(ObservedTallies(per_slice[slice_index]))
        except TallyError as exc:
            raise TallyError(f"slice {slice_index}: {exc}") from exc
    if not result:
        raise TallyError("line 2: no tally rows")
    return result


def _int_field(raw: str, lineno: int, column: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise TallyError(f"line {lineno}: column {column}: not an integer: {raw!r}") from exc


# ---------------------------------------------------------------------------
# shared runner pieces


def _validated(run: RunConfig, out_err: TextIO):
    cfg = run.protocol_config()
    ch = run.channel_params()
    sec = run.security_params()
    problems = validate_config(cfg, ch, sec)
    if problems:
        for problem in problems:
            print(f"config error: {problem}", file=out_err)
        return None
    return cfg, ch, sec


def _analysis_options(run: RunConfig, literal: bool) -> dict:
    return {
        "n_zz_all_intensities": bool(run["n_zz_all_intensities"]),
        "literal_paper_formulas": literal,
    }


def _make_slices(
    run: RunConfig,
    cfg: ProtocolConfig,
    ch: ChannelParams,
    distance: float,
    seed: int,
) -> tuple[list[ObservedTallies], DriftTrace | None]:
    """Produce per-slice tallies per the configured mode and drift model."""
    n_slices = int(run["n_slices"])
    if n_slices <= 1:
        if run["mode"] == "analytic":
            return [expected_tallies(cfg, ch, distance)], None
        return [sample_tallies(cfg, ch, distance, seed).observed()], None
    if cfg.n_total % n_slices != 0:
        raise ConfigError(
            f"n_total={cfg.n_total} is not divisible by n_slices={n_slices}"
        )
    params = {
        "beta0": float(run["drift_beta0_rad"]),
        "rate": float(run["drift_rate_rad"]),
        "amplitude": float(run["drift_amplitude_rad"]),
        "period": float(run["drift_period"]),
    }
    trace = drift_beta(
        str(run["drift"]),
        params,
        n_slices,
        seed=seed,
        slice_duration_s=float(run["slice_duration_s"]),
        pulses_per_slice=cfg.n_total // n_slices,
    )
    if run["mode"] == "analytic":
        slice_cfg = replace(cfg, n_total=trace.pulses_per_slice)
        slices = [
            expected_tallies(slice_cfg, ch, distance, beta=beta) for beta in trace.betas
        ]
    else:
        slices = [
            oracle.observed()
            for oracle in sample_drifting_tallies(cfg, ch, distance, trace, seed)
        ]
    return slices, trace


def _run_pipeline(
    run: RunConfig,
    cfg: ProtocolConfig,
    ch: ChannelParams,
    sec: SecurityParams,
    distance: float,
    seed: int,
    literal: bool,
):
    """Either a single KeyRateReport or a grouped ExtractionResult."""
    slices, _ = _make_slices(run, cfg, ch, distance, seed)
    options = _analysis_options(run, literal)
    m_groups = cfg.m_groups
    if len(slices) == 1 and m_groups == 1:
        return analyze_tallies(slices[0], cfg, sec, **options), slices
    classifier = DriftClassifier.from_channel(
        ch, cfg, distance, negated_exponent=bool(run["rho_negated_exponent"])
    )
    return group_and_extract(slices, m_groups, cfg, sec, classifier, **options), slices


def _flags_of(intermediate) -> str:
    tokens = set()
    if intermediate.get("negative_length"):
        tokens.add("negative_length")
    if intermediate.get("c44_clamped"):
        tokens.add("c44_clamped")
    if any(key.endswith("_degenerate") for key in intermediate):
        tokens.add("degenerate")
    return ";".join(sorted(tokens))


def _render_report(report, n_total: int) -> list[str]:
    lines = [
        f"n_total = {n_total}",
        f"s0_zz_lower = {_fmt(report.s0_zz_lower)}",
        f"s1_zz_lower = {_fmt(report.s1_zz_lower)}",
        f"c44_lower = {_fmt(report.c44_lower)}",
        f"i_e = {_fmt(report.i_e)}",
        f"e_zz = {_fmt(report.e_zz)}",
        f"n_zz = {report.n_zz}",
        f"key_length = {_fmt(report.key_length)}",
        f"key_rate = {_fmt(report.key_rate)}",
    ]
    for key in sorted(report.intermediate):
        lines.append(f"intermediate.{key} = {_fmt(report.intermediate[key])}")
    return lines


def _render_extraction(result: ExtractionResult, n_total: int) -> list[str]:
    lines = []
    for outcome in result.outcomes:
        bucket = outcome.bucket
        label = "overflow" if bucket.index is None else str(bucket.index)
        lines.append(
            f"group {label}: rho=[{_fmt(bucket.rho_low)},{_fmt(bucket.rho_high)}) "
            f"slices={bucket.n_slices} pulses={bucket.n_pulses}"
        )
        if outcome.diagnostic is not None:
            lines.append(f"  skipped: {outcome.diagnostic}")
            continue
        report = outcome.report
        lines.append(
            f"  c44_lower={_fmt(report.c44_lower)} i_e={_fmt(report.i_e)} "
            f"e_zz={_fmt(report.e_zz)} key_length={_fmt(report.key_length)}"
        )
    lines.append(f"key_length = {_fmt(result.key_length)}")
    lines.append(f"key_rate = {_fmt(result.key_length / n_total)}")
    return lines


def _emit(text: str, path: str | None, default: TextIO) -> None:
    if path is None:
        default.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_point(args, out: TextIO, err: TextIO) -> int:
    run = _overridden(args)
    built = _validated(run, err)
    if built is None:
        return EXIT_ERROR
    cfg, ch, sec = built
    distance = float(run["distance_km"])
    result, slices = _run_pipeline(
        run, cfg, ch, sec, distance, int(run["seed"]), args.literal_paper_formulas
    )
    if args.dump_tallies:
        with open(args.dump_tallies, "w", encoding="utf-8", newline="") as handle:
            write_tally_csv(slices, handle)
    lines = [f"distance_km = {_fmt(distance)}", f"mode = {run['mode']}"]
    if isinstance(result, ExtractionResult):
        lines += _render_extraction(result, cfg.n_total)
        total = result.key_length
    else:
        lines += _render_report(result, cfg.n_total)
        total = result.key_length
    _emit("\n".join(lines) + "\n", args.out, out)
    return EXIT_OK if total > 0.0 else EXIT_NO_KEY


def _scan_distances(run: RunConfig) -> list[float]:
    start = float(run["scan_min_km"])
    stop = float(run["scan_max_km"])
    step = float(run["scan_step_km"])
    if step <= 0:
        raise ConfigError(f"scan_step_km must be > 0, got {step}")
    distances = []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    for i in range(max(count, 0)):
        value = start + i * step
        if value <= stop + 1e-9:
            distances.append(value)
    return distances


def _scan_n_values(run: RunConfig, cfg: ProtocolConfig) -> list[int]:
    n_values = tuple(run["n_values"])  # type: ignore[arg-type]
    return [int(n) for n in n_values] if n_values else [cfg.n_total]


def cmd_scan(args, out: TextIO, err: TextIO) -> int:
    run = _overridden(args)
    built = _validated(run, err)
    if built is None:
        return EXIT_ERROR
    cfg, ch, sec = built
    rows = ["distance_km,n_total,key_rate,c44_lower,e_zz,s1_lower,flags"]
    any_key = False
    for n_total in _scan_n_values(run, cfg):
        cfg_n = replace(cfg, n_total=n_total)
        for index, distance in enumerate(_scan_distances(run)):
            run_n = RunConfig(dict(run.values, n_total=n_total), run.explicit)
            result, _ = _run_pipeline(
                run_n, cfg_n, ch, sec, distance, int(run["seed"]) + index,
                args.literal_paper_formulas,
            )
            if isinstance(result, ExtractionResult):
                # per-group bounds do not aggregate; emit zeros plus a flag
                rate = result.key_length / cfg_n.n_total
                rows.append(
                    f"{_fmt(distance)},{n_total},{_fmt(rate)},0,0,0,grouped"
                )
            else:
                rate = result.key_rate
                rows.append(
                    f"{_fmt(distance)},{n_total},{_fmt(rate)},"
                    f"{_fmt(result.c44_lower)},{_fmt(result.e_zz)},"
                    f"{_fmt(result.s1_zz_lower)},{_flags_of(result.intermediate)}"
                )
            any_key = any_key or rate > 0.0
    _emit("\n".join(rows) + "\n", args.out, out)
    return EXIT_OK if any_key else EXIT_NO_KEY


def cmd_compare(args, out: TextIO, err: TextIO) -> int:
    run = _overridden(args)
    built = _validated(run, err)
    if built is None:
        return EXIT_ERROR
    cfg, ch, sec = built
    literal = args.literal_paper_formulas
    asym = args.asymptotic
    rows = ["distance_km,n_total,protocol,key_rate,c_lower,e_zz,flags"]
    any_key = False
    for n_total in _scan_n_values(run, cfg):
        cfg_n = replace(cfg, n_total=n_total)
        for distance in _scan_distances(run):
            tallies = expected_tallies(cfg_n, ch, distance)
            report = analyze_tallies(
                tallies,
                cfg_n,
                sec,
                fluctuations=not asym,
                finite_key_terms=not asym,
                n_zz_all_intensities=bool(run["n_zz_all_intensities"]),
                literal_paper_formulas=literal,
            )
            entries = [
                (
                    baselines.FOUR_STATE,
                    report.key_rate,
                    report.c44_lower,
                    report.e_zz,
                    _flags_of(report.intermediate),
                )
            ]
            for runner in (baselines.run_six_four, baselines.run_six_state):
                base = runner(
                    cfg_n,
                    ch,
                    sec,
                    distance,
                    fluctuations=not asym,
                    finite_key_terms=not asym,
                    literal_paper_formulas=literal,
                )
                flags = ";".join(
                    token
                    for token, flag in (
                        ("c_clamped", base.clamped),
                        ("negative_length", base.negative_length),
                    )
                    if flag
                )
                entries.append(
                    (base.protocol, base.key_rate, base.c_lower, base.e_zz, flags)
                )
            for name, rate, c_low, e_zz, flags in entries:
                rows.append(
                    f"{_fmt(distance)},{n_total},{name},{_fmt(rate)},"
                    f"{_fmt(c_low)},{_fmt(e_zz)},{flags}"
                )
                any_key = any_key or rate > 0.0
    _emit("\n".join(rows) + "\n", args.out, out)
    return EXIT_OK if any_key else EXIT_NO_KEY


def cmd_process(args, out: TextIO, err: TextIO) -> int:
    run = _overridden(args)
    built = _validated(run, err)
    if built is None:
        return EXIT_ERROR
    cfg, ch, sec = built
    try:
        with open(args.tally_file, "r", encoding="utf-8") as handle:
            slices = read_tally_csv(handle)
    except (OSError, TallyError) as exc:
        print(f"tally file error: {exc}", file=err)
        return EXIT_ERROR
    options = _analysis_options(run, args.literal_paper_formulas)
    m_groups = cfg.m_groups
    lines = [f"tally_file = {args.tally_file}"]
    if len(slices) == 1 and m_groups == 1:
        report = analyze_tallies(slices[0], cfg, sec, **options)
        lines += _render_report(report, cfg.n_total)
        total = report.key_length
    else:
        classifier = DriftClassifier.from_channel(
            ch, cfg, float(run["distance_km"]),
            negated_exponent=bool(run["rho_negated_exponent"]),
        )
        result = group_and_extract(slices, m_groups, cfg, sec, classifier, **options)
        lines += _render_extraction(result, cfg.n_total)
        total = result.key_length
    _emit("\n".join(lines) + "\n", args.out, out)
    return EXIT_OK if total > 0.0 else EXIT_NO_KEY


def cmd_simulate(args, out: TextIO, err: TextIO) -> int:
    run = _overridden(args)
    built = _validated(run, err)
    if built is None:
        return EXIT_ERROR
    cfg, ch, sec = built
    values = dict(run.values, mode="montecarlo")
    slices, _ = _make_slices(
        RunConfig(values, run.explicit), cfg, ch, float(run["distance_km"]),
        int(run["seed"]),
    )
    buffer = io.StringIO()
    write_tally_csv(slices, buffer)
    _emit(buffer.getvalue(), args.out, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _overridden(args) -> RunConfig:
    run = load_config(args.config)
    values = dict(run.values)
    explicit = set(run.explicit)
    overrides = {
        "distance": "distance_km",
        "n_total": "n_total",
        "mode": "mode",
        "seed": "seed",
        "groups": "m_groups",
        "drift": "drift",
    }
    for arg_name, key in overrides.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            if key == "n_total":
                value = _as_count(str(value))
            values[key] = value
            explicit.add(key)
    return RunConfig(values, frozenset(explicit))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="flat key=value configuration file")
    parser.add_argument("--distance", type=float, default=None, help="fiber length in km")
    parser.add_argument("--n-total", dest="n_total", default=None, help="total pulses")
    parser.add_argument(
        "--mode", choices=("analytic", "montecarlo"), default=None, help="statistics source"
    )
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--groups", type=int, default=None, help="drift group count")
    parser.add_argument(
        "--drift", choices=("fixed", "linear", "sinusoidal"), default=None,
        help="drift model for sliced runs",
    )
    parser.add_argument("--out", default=None, help="write output to this path")
    parser.add_argument(
        "--literal-paper-formulas",
        action="store_true",
        help="restore the printed variants of the corrected formulas",
    )
    parser.add_argument(
        "--show-defaults",
        action="store_true",
        help="print the effective configuration with provenance and exit",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfiqkd",
        description="security analysis pipeline for a four-state "
        "reference-frame-independent QKD protocol",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_point = sub.add_parser("point", help="full pipeline at one distance")
    p_point.add_argument("--dump-tallies", default=None, help="also write the tallies as CSV")
    p_point.set_defaults(func=cmd_point)

    p_scan = sub.add_parser("scan", help="key rate versus distance as CSV")
    p_scan.set_defaults(func=cmd_scan)

    p_cmp = sub.add_parser("compare", help="protocol comparison as CSV")
    p_cmp.add_argument(
        "--asymptotic", action="store_true",
        help="drop fluctuation and block-size penalty terms",
    )
    p_cmp.set_defaults(func=cmd_compare)

    p_proc = sub.add_parser("process", help="re-analyze a tally file")
    p_proc.add_argument("tally_file")
    p_proc.set_defaults(func=cmd_process)

    p_sim = sub.add_parser("simulate", help="write Monte Carlo tally files")
    p_sim.set_defaults(func=cmd_simulate)

    for sub_parser in (p_point, p_scan, p_cmp, p_proc, p_sim):
        _add_common(sub_parser)
    return parser


def main(
    argv: Sequence[str] | None = None,
    out: TextIO | None = None,
    err: TextIO | None = None,
) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.show_defaults:
            run = _overridden(args)
            out.write("\n".join(run.provenance_lines()) + "\n")
            return EXIT_OK
        return args.func(args, out, err)
    except (ConfigError, TallyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
