"""
Command-line front end.

    python -m app times    --group a3 --order 2
    python -m app verify   --sequence out/sequence_qdd3_3.json --order 3 --mode quantum
    python -m app filter   --group udd --order 1
    python -m app chi      --group a3 --order 2 --spectrum ohmic --param alpha=1e-3 --param omega_c=6.3e7
    python -m app simulate --kind classical --orders 0 1 2 --T-start 1e-8 --T-stop 3e-4
    python -m app search   --order 2 --max-intervals 5 --pool 1 2 3

Every command writes run_config.yaml next to its outputs; `--config` replays it.
Exit codes: 0 success, 2 validation failure, 3 input error.
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml
from pydantic import ValidationError

from app.config import get_settings
from app.exceptions import DecouplingError, InputError
from app.models.spectra import SpectralDensity
from app.schemas.schemas import BathKindEnum, ChiRecord, GroupEnum, RunConfig, SpectrumEnum
from app.services import filter as filters
from app.services import io
from app.services.expansion import globalization_report, search_sequences
from app.services.sequences import build_sequence, max_moment_residual, moment_report, switching_functions
from app.services.simulator import T_grid, sweep_infidelity

logger = logging.getLogger(__name__)
settings = get_settings()

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INPUT = 3

MOMENT_TOLERANCE = 1e-12

# rad/s
SPECTRUM_DEFAULTS: dict[SpectrumEnum, dict[str, float]] = {
    SpectrumEnum.gaussian: {"weight": 1e12, "omega0": 2 * np.pi * 1e6, "width": 2 * np.pi * 1e5},
    SpectrumEnum.lorentzian: {"amplitude": 1e3, "omega0": 0.0, "width": 2 * np.pi * 1e6},
    SpectrumEnum.ohmic: {"alpha": 1e-3, "omega_c": 2 * np.pi * 1e7},
    SpectrumEnum.one_over_f: {"amplitude": 1e3, "omega_ir": 2 * np.pi * 1e2, "omega_c": 2 * np.pi * 1e7},
}


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 3), not argparse's exit 2."""

    def error(self, message):
        raise InputError(message)


def _key_value(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, float(value)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--config", help="RunConfig YAML; its values override flags")
    common.add_argument("--n-jobs", dest="n_jobs", type=int)
    common.add_argument("--log-level", dest="log_level")

    group = _Parser(add_help=False)
    group.add_argument("--group", type=GroupEnum)
    group.add_argument("--order", type=int)
    group.add_argument("--solve", action="store_true", default=None, help="solve instead of using stored tables")

    grid = _Parser(add_help=False)
    grid.add_argument("--T-start", dest="T_start", type=float, help="microseconds")
    grid.add_argument("--T-stop", dest="T_stop", type=float, help="microseconds")
    grid.add_argument("--T-points", dest="T_points", type=int)

    parser = _Parser(prog="exdd", description="Exchange-only dynamical decoupling for the 3-qubit DFS")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("times", parents=[common, group], help="switching times and sequence JSON")

    p = sub.add_parser("verify", parents=[common], help="moment residuals or globalization verdict")
    p.add_argument("--sequence", dest="sequence_path", required=False)
    p.add_argument("--order", type=int)
    p.add_argument("--mode", type=BathKindEnum)

    p = sub.add_parser("filter", parents=[common, group], help="filter-function curves")
    p.add_argument("--omega-min", dest="omega_t_min", type=float)
    p.add_argument("--omega-max", dest="omega_t_max", type=float)
    p.add_argument("--points", dest="omega_t_points", type=int)

    p = sub.add_parser("chi", parents=[common, group, grid], help="decoherence integral chi(T) and W(T)")
    p.add_argument("--spectrum", type=SpectrumEnum)
    p.add_argument("--param", dest="spectrum_params", type=_key_value, action="append")

    p = sub.add_parser("simulate", parents=[common, grid], help="infidelity sweep and exponent fits")
    p.add_argument("--kind", type=BathKindEnum)
    p.add_argument("--orders", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--states", type=int)
    p.add_argument("--J-mhz", dest="J_mhz", type=float)
    p.add_argument("--beta-khz", dest="beta_khz", type=float)
    p.add_argument("--bath-rms-mhz", dest="bath_rms_mhz", type=float)
    p.add_argument("--bath-bandwidth-mhz", dest="bath_bandwidth_mhz", type=float)
    p.add_argument("--bath-modes", dest="bath_modes", type=int)
    p.add_argument("--fit-window", dest="fit_window", type=float, nargs=2)

    p = sub.add_parser("search", parents=[common], help="brute-force search for globalized sequences")
    p.add_argument("--order", type=int)
    p.add_argument("--max-intervals", dest="max_intervals", type=int)
    p.add_argument("--pool", type=int, nargs="+")
    return parser


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _settings_defaults() -> dict:
    return {
        "seed": settings.seed,
        "n_jobs": settings.n_jobs,
        "out": settings.output_dir,
        "states": settings.classical_states,
        "J_mhz": settings.spin_bath_j_mhz,
        "beta_khz": settings.spin_bath_beta_khz,
        "bath_rms_mhz": settings.bath_rms_mhz,
        "bath_bandwidth_mhz": settings.bath_bandwidth_mhz,
        "bath_modes": settings.bath_modes,
        "omega_t_min": settings.filter_grid_min,
        "omega_t_max": settings.filter_grid_max,
        "omega_t_points": settings.filter_grid_points,
        "fit_window": (settings.fit_window_min, settings.fit_window_max),
    }


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """settings < command-line flags < --config file."""
    values = _settings_defaults()
    given = {k: v for k, v in vars(args).items() if v is not None and k in RunConfig.model_fields}
    if "spectrum_params" in given:
        given["spectrum_params"] = dict(given["spectrum_params"])
    values.update(given)
    values["command"] = args.command
    if getattr(args, "config", None):
        try:
            loaded = yaml.safe_load(Path(args.config).read_text()) or {}
        except yaml.YAMLError as exc:
            raise InputError(f"cannot parse {args.config}: {exc}") from exc
        if loaded.get("command", args.command) != args.command:
            raise InputError(f"{args.config} is a {loaded['command']!r} configuration, not {args.command!r}")
        values.update(loaded)
    config = RunConfig.model_validate(values)
    if config.trials is None:
        default = settings.quantum_trials if config.kind is BathKindEnum.quantum else settings.classical_baths
        config = config.model_copy(update={"trials": default})
    return config


def save_config(config: RunConfig) -> Path:
    path = Path(config.out) / "run_config.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False))
    return path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_times(config: RunConfig) -> int:
    seq = build_sequence(config.group, config.order, solve=config.solve)
    out = Path(config.out)
    io.write_sequence_json(seq, out / f"sequence_{config.group.value}_{config.order}.json")
    io.write_times_csv(seq, out / f"times_{config.group.value}_{config.order}.csv")
    if config.group is GroupEnum.qdd3:
        report = globalization_report(seq, seq.order)
        print(f"{seq.n_intervals} intervals, quantum verdict {report.verdict}")
        return EXIT_OK if report.verdict >= seq.order else EXIT_VALIDATION
    residual = max_moment_residual(seq, config.order)
    tolerance = config.tolerances.get("moment", MOMENT_TOLERANCE)
    print(f"{seq.n_intervals} intervals, max moment residual {residual:.3e}")
    return EXIT_OK if residual <= tolerance else EXIT_VALIDATION


def cmd_verify(config: RunConfig) -> int:
    if not config.sequence_path:
        raise InputError("verify needs --sequence")
    seq = io.read_sequence_json(config.sequence_path)
    out = Path(config.out)
    if config.mode is BathKindEnum.classical:
        report = moment_report(seq, config.order, config.tolerances.get("moment", MOMENT_TOLERANCE))
        io.write_json(report.model_dump(mode="json"), out / "verify_classical.json")
        print(f"max moment residual {report.max_residual:.3e} through order {config.order}")
        return EXIT_OK if report.passed else EXIT_VALIDATION

    tolerance = config.tolerances.get("globalization")
    report = globalization_report(seq, config.order, tolerance)
    io.write_json(report.to_document(), out / "verify_quantum.json")
    for order, spread in report.max_spread.items():
        print(f"order {order}: max relative spread {spread:.3e}")
    print(f"verdict {report.verdict}")
    return EXIT_OK if report.verdict >= config.order else EXIT_VALIDATION


def cmd_filter(config: RunConfig) -> int:
    seq = build_sequence(config.group, config.order, solve=config.solve)
    functions = switching_functions(seq)
    grid = filters.default_grid(config.omega_t_points, config.omega_t_min, config.omega_t_max)
    for name in functions.names:
        curve = filters.filter_curve(functions, name, seq.times, grid)
        io.write_frame(curve.to_frame(), Path(config.out) / f"filter_{config.group.value}_{config.order}_{name}.csv")
        try:
            slope = filters.low_frequency_slope(functions, name, seq.times)
            print(f"{name}: low-frequency slope {slope:.3f} (expected {2 * (config.order + 1)})")
        except ValueError:
            print(f"{name}: identically zero")
    return EXIT_OK


def spectral_density(kind: SpectrumEnum, params: dict[str, float]) -> SpectralDensity:
    merged = {**SPECTRUM_DEFAULTS[kind], **params}
    unknown = set(merged) - set(SPECTRUM_DEFAULTS[kind])
    if unknown:
        raise InputError(f"unknown {kind.value} parameters: {sorted(unknown)}")
    constructors = {
        SpectrumEnum.gaussian: SpectralDensity.gaussian_peak,
        SpectrumEnum.lorentzian: SpectralDensity.lorentzian,
        SpectrumEnum.ohmic: SpectralDensity.ohmic,
        SpectrumEnum.one_over_f: SpectralDensity.one_over_f,
    }
    return constructors[kind](**merged)


def cmd_chi(config: RunConfig) -> int:
    seq = build_sequence(config.group, config.order, solve=config.solve)
    functions = switching_functions(seq)
    S = spectral_density(config.spectrum, config.spectrum_params)
    records: dict[str, list[dict]] = {}
    for name in functions.names:
        rows = []
        for T_us in T_grid(config.T_start, config.T_stop, config.T_points):
            value = filters.chi(S, functions, name, seq.times, float(T_us) * 1e-6)
            rows.append(ChiRecord(T=float(T_us), chi=value, W=filters.decoherence_function(value)).model_dump())
        records[name] = rows
    io.write_json(records, Path(config.out) / f"chi_{config.group.value}_{config.order}_{S.name}.json")
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    result = sweep_infidelity(
        config.kind,
        config.orders,
        T_grid(config.T_start, config.T_stop, config.T_points),
        trials=config.trials,
        seed=config.seed,
        states=config.states,
        window=config.fit_window,
        n_jobs=config.n_jobs,
        rms_mhz=config.bath_rms_mhz,
        bandwidth_mhz=config.bath_bandwidth_mhz,
        modes=config.bath_modes,
        J_mhz=config.J_mhz,
        beta_khz=config.beta_khz,
    )
    out = Path(config.out)
    io.write_frame(result.to_frame(), out / f"sweep_{config.kind.value}.csv")
    summaries = result.fit_summaries()
    io.write_json([s.model_dump(mode="json") for s in summaries], out / f"fits_{config.kind.value}.json")
    print(f"{'order':>5}  {'exponent':>9}  {'expected':>8}  {'r2':>8}")
    for s in summaries:
        exponent = "-" if s.exponent is None else f"{s.exponent:.3f}"
        r2 = "-" if s.r2 is None else f"{s.r2:.5f}"
        print(f"{s.order:>5}  {exponent:>9}  {s.expected_exponent:>8}  {r2:>8}")
    return EXIT_OK


def cmd_search(config: RunConfig) -> int:
    hits = search_sequences(config.order, config.max_intervals, config.pool, n_jobs=config.n_jobs, seed=config.seed)
    out = Path(config.out)
    for i, hit in enumerate(hits):
        io.write_sequence_json(hit.sequence, out / f"search_{config.order}_{i}.json")
    io.write_json([h.to_document().model_dump(mode="json") for h in hits], out / f"search_{config.order}.json")
    for hit in hits:
        intervals = ", ".join(f"{t:.6f}" for t in hit.sequence.intervals)
        print(f"H{list(hit.sequence.hamiltonians)}  tau=[{intervals}]  ratio {hit.ratio:.3f}")
    if not hits:
        print("no sequences found")
    return EXIT_OK


COMMANDS = {
    "times": cmd_times,
    "verify": cmd_verify,
    "filter": cmd_filter,
    "chi": cmd_chi,
    "simulate": cmd_simulate,
    "search": cmd_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=args.log_level or settings.log_level,
            format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        )
        config = resolve_config(args)
        save_config(config)
        return COMMANDS[config.command](config)
    except (InputError, ValidationError, OSError) as exc:
        logger.error("Input error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DecouplingError as exc:
        logger.error("Validation failure: %s", exc)
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
