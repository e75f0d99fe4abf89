"""Command-line interface.

Subcommands: check (assumption audit), elicit (one switch point), simulate
(synthetic cohort CSV), analyze (full dataset analysis), regions
(prediction-region maps).  Flags override values from a TOML config given
via --config or the QELICIT_CONFIG environment variable.

Exit codes: 0 success, 2 validation error, 3 degenerate elicitation
(no crossing), 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import audit as audit_mod
from . import regions as regions_mod
from .cohort import DEFAULT_PRODUCTS, simulate_cohort, uniform_quality_profiles
from .config import ConfigError, RunConfig, build_model, build_scenario, parse_config
from .dataio import (
    DatasetFormatError,
    read_dataset,
    write_dataset,
    write_provenance,
)
from .elicitation import NoCrossingError, elicit_bisect, elicit_rowscan
from .models import ModelError, catalog_name
from .stats import format_report, run_analysis

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4

CONFIG_ENV = "QELICIT_CONFIG"


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", help="rn|rn-linear|rn-kinked|rn-power|pn|gpn|gpn-power|cc|ncc")
    g.add_argument("--utility", help="linear|kinked|power (with --model rn)")
    g.add_argument("--gamma", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--theta", type=float)


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--scenario", help="m|p-ignore|p-separate|p-combine")
    g.add_argument("--endowment", type=float)
    g.add_argument(
        "--extra-constant",
        dest="extra_constants",
        type=float,
        action="append",
        help="constant attribute appended to both alternatives (repeatable)",
    )


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("price grid")
    g.add_argument("--grid-min", type=float)
    g.add_argument("--grid-max", type=float)
    g.add_argument("--grid-step", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qelicit",
        description="Multi-attribute choice models and price-list quality elicitation",
    )
    parser.add_argument("--config", help=f"TOML config path (or ${CONFIG_ENV})")
    parser.add_argument("--threads", type=int, help="cap worker parallelism")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_check = sub.add_parser("check", help="audit the elicitation assumptions")
    _add_model_flags(p_check)
    p_check.add_argument("--check-lo", type=float)
    p_check.add_argument("--check-hi", type=float)
    p_check.add_argument("--check-count", type=int)
    p_check.add_argument("--check-tolerance", type=float)
    p_check.add_argument("--output", help="also write the report as CSV")

    p_elicit = sub.add_parser("elicit", help="find one switch point")
    _add_model_flags(p_elicit)
    _add_scenario_flags(p_elicit)
    _add_grid_flags(p_elicit)
    p_elicit.add_argument("--q", type=float, help="true quality in dollars")
    p_elicit.add_argument("--method", choices=("rowscan", "bisect"))
    p_elicit.add_argument("--tol", type=float)

    p_sim = sub.add_parser("simulate", help="generate a synthetic cohort CSV")
    _add_model_flags(p_sim)
    _add_scenario_flags(p_sim)
    _add_grid_flags(p_sim)
    p_sim.add_argument("--subjects", type=int)
    p_sim.add_argument("--noise-sd", type=float)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--q-low", type=float)
    p_sim.add_argument("--q-high", type=float)
    p_sim.add_argument("--output", help="dataset CSV path (default dataset.csv)")

    p_an = sub.add_parser("analyze", help="run the analysis pipeline on a CSV")
    p_an.add_argument("--input", help="dataset CSV path")
    p_an.add_argument("--significance", type=float)
    p_an.add_argument(
        "--equal-value-rule", choices=("discard", "equal_split", "proportional_split")
    )
    p_an.add_argument("--include-nonpositive", action="store_true", default=None)
    p_an.add_argument("--outlier-abs-diff", type=float)
    p_an.add_argument("--output", help="directory for machine-readable CSVs")

    p_re = sub.add_parser("regions", help="prediction-region map and boundaries")
    _add_model_flags(p_re)
    p_re.add_argument("--lq", type=float)
    p_re.add_argument("--hq", type=float)
    for axis in ("lp", "hp"):
        p_re.add_argument(f"--{axis}-min", type=float)
        p_re.add_argument(f"--{axis}-max", type=float)
        p_re.add_argument(f"--{axis}-step", type=float)
    p_re.add_argument("--output", help="directory for the CSVs (default .)")

    return parser


def _effective_config(args: argparse.Namespace) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(f"cannot read config {path}: {exc}") from exc
        config = parse_config(text)
    else:
        config = RunConfig()
    overrides = {"subcommand": args.subcommand}
    for field in dataclasses.fields(RunConfig):
        if field.name == "subcommand":
            continue
        value = getattr(args, field.name, None)
        if value is not None:
            if field.name == "extra_constants":
                value = tuple(value)
            overrides[field.name] = value
    if config.subcommand is not None and config.subcommand != args.subcommand:
        raise ConfigError(
            f"config subcommand {config.subcommand!r} conflicts with "
            f"{args.subcommand!r}"
        )
    return dataclasses.replace(config, **overrides)


class _IOFailure(RuntimeError):
    pass


def _config_digest_text(config: RunConfig) -> str:
    return json.dumps(dataclasses.asdict(config), sort_keys=True)


def _model_label(config: RunConfig) -> str:
    model = build_model(config)
    return catalog_name(model) or "custom"


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _fmt_witness(outcome) -> str:
    if outcome.witness is None:
        return "-"
    parts = ", ".join(f"{w:.6g}" for w in outcome.witness)
    return f"({parts})"


def _cmd_check(config: RunConfig) -> int:
    model = build_model(config)
    grid = audit_mod.AuditGrid(
        config.check_lo, config.check_hi, config.check_count, config.check_tolerance
    )
    report = audit_mod.audit(model, grid)
    print(f"model: {catalog_name(model) or 'custom'}")
    print(
        f"grid: [{grid.lo:.2f}, {grid.hi:.2f}] count={grid.count} "
        f"tolerance={grid.tolerance:g}"
    )
    print(f"{'check':<12}{'verdict':<16}{'witness':<24}")
    rows = [
        ("injective", report.injective),
        ("symmetry", report.symmetry),
        ("linearity", report.linearity),
    ]
    for name, outcome in rows:
        print(f"{name:<12}{outcome.verdict.value:<16}{_fmt_witness(outcome):<24}")
    acc = report.accuracy()
    print(
        "accurate: m-list {m} | p-list ignore/separate {ps} | p-list combine {pc}"
        .format(
            m="yes" if acc["m"] else "no",
            ps="yes" if acc["p_ignore_or_separate"] else "no",
            pc="yes" if acc["p_combine"] else "no",
        )
    )
    if config.output:
        lines = ["check,verdict,witness,gap"]
        for name, outcome in rows:
            witness = "" if outcome.witness is None else ";".join(
                f"{w!r}" for w in outcome.witness
            )
            gap = "" if outcome.gap is None else repr(outcome.gap)
            lines.append(f"{name},{outcome.verdict.value},{witness},{gap}")
        Path(config.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_elicit(config: RunConfig) -> int:
    model = build_model(config)
    scenario = build_scenario(config)
    if config.q is None:
        raise ConfigError("elicit needs q (the true quality)")
    mpl = config.mpl()
    if config.method == "bisect":
        result = elicit_bisect(model, scenario, config.q, mpl, config.tol)
    else:
        result = elicit_rowscan(model, scenario, config.q, mpl)
    switch = "" if result.switch_point is None else f"{result.switch_point:.6f}"
    print(
        f"{_model_label(config)},{config.scenario},{config.q:.2f},"
        f"{switch},{result.crossing_count},{result.clamped}"
    )
    return EXIT_OK


def _cmd_simulate(config: RunConfig) -> int:
    model = build_model(config)
    scenario = build_scenario(config)
    if scenario.tag == "m":
        raise ConfigError("simulate needs a price-list scenario for the p block")
    profiles = uniform_quality_profiles(
        config.subjects,
        model,
        scenario,
        products=DEFAULT_PRODUCTS,
        master_seed=config.seed,
        noise_sd=config.noise_sd,
        q_low=config.q_low,
        q_high=config.q_high,
    )
    dataset = simulate_cohort(profiles, config.mpl(), config.seed)
    out = Path(config.output or "dataset.csv")
    write_dataset(dataset, out)
    write_provenance(out, config.seed, _config_digest_text(config))
    print(f"wrote {len(dataset.records)} records to {out}")
    return EXIT_OK


def _write_analysis_csvs(report, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        "subject_id,treatment,individual_m,individual_p,n_positive,n_nonpositive,"
        "n_equal_value,abs_m_score,abs_p_score,adj_m_score,adj_p_score,"
        "k_effective,threshold,type"
    ]
    for s in report.summaries:
        ind_m = "" if s.individual_m is None else f"{s.individual_m:.6f}"
        ind_p = "" if s.individual_p is None else f"{s.individual_p:.6f}"
        thr = "" if s.threshold is None else str(s.threshold)
        lines.append(
            f"{s.subject_id},{s.treatment},{ind_m},{ind_p},{s.n_positive},"
            f"{s.n_nonpositive},{s.n_equal_value},{s.abs_m_score},{s.abs_p_score},"
            f"{s.adj_m_score},{s.adj_p_score},{s.k_effective},{thr},{s.subject_type}"
        )
    (out_dir / "subject_summaries.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )

    lines = ["group,n_subjects,mean_m,sd_m,mean_p,sd_p"]
    for g in list(report.means) + [report.pooled]:
        lines.append(
            f"{g.group},{g.n_subjects},{g.mean_m:.6f},{g.sd_m:.6f},"
            f"{g.mean_p:.6f},{g.sd_p:.6f}"
        )
    (out_dir / "cohort_means.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["difference,cumulative_fraction"]
    for value, frac in report.diff_cdf:
        lines.append(f"{value:.6f},{frac:.8f}")
    (out_dir / "diff_cdf.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["fixed_effects,term,coefficient,std_error,n_obs,n_clusters"]
    for reg in report.regressions:
        for term, coef in reg.coefficients.items():
            lines.append(
                f"{reg.fixed_effects},{term},{coef:.8f},"
                f"{reg.std_errors[term]:.8f},{reg.n_obs},{reg.n_clusters}"
            )
    (out_dir / "regressions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_analyze(config: RunConfig) -> int:
    if config.input is None:
        raise ConfigError("analyze needs an input dataset (--input)")
    dataset = read_dataset(config.input)
    report = run_analysis(dataset, config.analysis())
    sys.stdout.write(format_report(report))
    if config.output:
        _write_analysis_csvs(report, Path(config.output))
    return EXIT_OK


def _cmd_regions(config: RunConfig) -> int:
    model = build_model(config)
    if config.lq is None or config.hq is None:
        raise ConfigError("regions needs --lq and --hq")
    spec = regions_mod.RegionSpec(
        config.lq,
        config.hq,
        model,
        (config.lp_min, config.lp_max, config.lp_step),
        (config.hp_min, config.hp_max, config.hp_step),
    )
    grid = regions_mod.region_grid(spec)
    out_dir = Path(config.output or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["lp,hp,label,v_h,v_l,tie"]
    for lp, hp, cell in grid.iter_cells():
        lines.append(
            f"{lp:.4f},{hp:.4f},{cell.label},{cell.v_h:.8f},{cell.v_l:.8f},"
            f"{int(cell.tie)}"
        )
    (out_dir / "region_cells.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["pair,lp,hp"]
    counts = {}
    for pair in (("h", "l"), ("l", "o"), ("h", "o")):
        try:
            points = regions_mod.boundary_trace(grid, pair)
        except regions_mod.NoBoundaryError:
            counts["-".join(pair)] = 0
            continue
        counts["-".join(pair)] = len(points)
        for lp, hp in points:
            lines.append(f"{pair[0]}-{pair[1]},{lp:.6f},{hp:.6f}")
    (out_dir / "region_boundaries.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )
    cells = grid.labels.size
    print(
        f"labeled {cells} cells; boundary points: "
        + ", ".join(f"{k}={v}" for k, v in counts.items())
    )
    return EXIT_OK


_HANDLERS = {
    "check": _cmd_check,
    "elicit": _cmd_elicit,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "regions": _cmd_regions,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _effective_config(args)
        if config.threads < 1:
            raise ConfigError("threads must be at least 1")
        return _HANDLERS[args.subcommand](config)
    except NoCrossingError as exc:
        print(f"degenerate elicitation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, DatasetFormatError, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _IOFailure as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
