"""Structured run configuration (TOML) with strict key checking.

A config file is a flat TOML document; any unknown key aborts.  CLI flags
override config values, and a config path can also come from the
QELICIT_CONFIG environment variable.  Defaults: the cent grid 0.01-10.00,
endowment 10, significance 5%.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .elicitation import MplSpec, Scenario
from .models import CATALOG, ModelError, ModelSpec, UtilitySpec, WeightSpec
from .stats import AnalysisConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "build_model", "build_scenario"]

SUBCOMMANDS = ("check", "elicit", "simulate", "analyze", "regions")

_SCENARIOS = {
    "m": "m",
    "p-ignore": "p_ignore",
    "p-separate": "p_separate",
    "p-combine": "p_combine",
}


class ConfigError(ValueError):
    """Bad configuration: unknown key, missing value, or out-of-range value."""


@dataclass(frozen=True)
class RunConfig:
    """One fully-specified run; every field has a flat TOML key of its name
    (``lambda`` maps to ``lam``)."""

    subcommand: str | None = None
    # model
    model: str | None = None
    utility: str | None = None
    gamma: float | None = None
    lam: float | None = None
    alpha: float | None = None
    sigma: float | None = None
    theta: float | None = None
    # elicitation
    scenario: str | None = None
    endowment: float = 10.0
    q: float | None = None
    extra_constants: tuple[float, ...] = ()
    method: str = "rowscan"
    tol: float = 1e-6
    grid_min: float = 0.01
    grid_max: float = 10.0
    grid_step: float = 0.01
    # audit
    check_count: int = 1000
    check_lo: float = 0.01
    check_hi: float = 10.0
    check_tolerance: float = 1e-9
    # simulation
    seed: int = 0
    subjects: int = 85
    noise_sd: float = 0.0
    q_low: float = 0.0
    q_high: float = 8.0
    # analysis
    significance: float = 0.05
    equal_value_rule: str = "discard"
    include_nonpositive: bool = False
    outlier_abs_diff: float | None = None
    # regions
    lq: float | None = None
    hq: float | None = None
    lp_min: float = 0.0
    lp_max: float = 25.0
    lp_step: float = 0.25
    hp_min: float = 0.0
    hp_max: float = 25.0
    hp_step: float = 0.25
    # io
    input: str | None = None
    output: str | None = None
    threads: int = 1

    def mpl(self) -> MplSpec:
        return MplSpec(self.grid_min, self.grid_max, self.grid_step)

    def analysis(self) -> AnalysisConfig:
        return AnalysisConfig(
            include_nonpositive=self.include_nonpositive,
            significance=self.significance,
            equal_value_rule=self.equal_value_rule,
            outlier_abs_diff=self.outlier_abs_diff,
        )


_KEY_ALIASES = {"lambda": "lam"}
_FIELD_NAMES = {f.name for f in fields(RunConfig)}
_FLOAT_FIELDS = {
    "gamma", "lam", "alpha", "sigma", "theta", "endowment", "q", "tol",
    "grid_min", "grid_max", "grid_step", "check_lo", "check_hi",
    "check_tolerance", "noise_sd", "q_low", "q_high", "significance",
    "outlier_abs_diff", "lq", "hq", "lp_min", "lp_max", "lp_step",
    "hp_min", "hp_max", "hp_step",
}
_INT_FIELDS = {"check_count", "seed", "subjects", "threads"}


def parse_config(text: str) -> RunConfig:
    """Parse flat TOML into a RunConfig; unknown keys are rejected."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    values = {}
    for key, value in raw.items():
        name = _KEY_ALIASES.get(key, key)
        if name not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key {key!r}")
        if name in _FLOAT_FIELDS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"config key {key!r} must be a number")
            value = float(value)
        elif name in _INT_FIELDS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"config key {key!r} must be an integer")
        elif name == "include_nonpositive":
            if not isinstance(value, bool):
                raise ConfigError("include_nonpositive must be a boolean")
        elif name == "extra_constants":
            if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                raise ConfigError("extra_constants must be an array of numbers")
            value = tuple(float(v) for v in value)
        elif not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string")
        values[name] = value
    config = RunConfig(**values)
    if config.subcommand is not None and config.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"subcommand must be one of {SUBCOMMANDS}")
    if config.method not in ("rowscan", "bisect"):
        raise ConfigError("method must be 'rowscan' or 'bisect'")
    return config


def build_model(config: RunConfig) -> ModelSpec:
    """Instantiate the configured model; parameter misuse raises."""
    name = config.model
    if name is None:
        raise ConfigError("a model is required (e.g. model = 'rn-linear')")
    utility = config.utility
    if name == "rn":
        if utility is None:
            raise ConfigError("model 'rn' needs utility = linear|kinked|power")
        name = f"rn-{utility}"
    elif name.startswith("rn-"):
        implied = name.split("-", 1)[1]
        if utility is not None and utility != implied:
            raise ConfigError(f"model {name!r} conflicts with utility {utility!r}")
        utility = implied
    elif utility is not None:
        raise ConfigError(f"model {name!r} does not take a utility key")
    if name not in CATALOG:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(CATALOG)}")

    given = {
        "gamma": config.gamma,
        "lam": config.lam,
        "alpha": config.alpha,
        "sigma": config.sigma,
        "theta": config.theta,
    }
    try:
        if name == "rn-linear":
            _reject(given, {"gamma"}, name)
            return CATALOG[name](_default(config.gamma, 0.0))
        if name == "rn-kinked":
            _reject(given, {"gamma", "lam"}, name)
            return CATALOG[name](_default(config.gamma, 0.0), _require(config.lam, "lambda"))
        if name == "rn-power":
            _reject(given, {"gamma", "alpha"}, name)
            return CATALOG[name](_default(config.gamma, 0.0), _require(config.alpha, "alpha"))
        if name == "pn":
            _reject(given, set(), name)
            return CATALOG[name]()
        if name == "gpn":
            _reject(given, {"sigma"}, name)
            return CATALOG[name](_require(config.sigma, "sigma"))
        if name == "gpn-power":
            _reject(given, {"sigma", "alpha"}, name)
            return CATALOG[name](
                _require(config.sigma, "sigma"), _require(config.alpha, "alpha")
            )
        # cc / ncc
        _reject(given, {"theta"}, name)
        return CATALOG[name](_require(config.theta, "theta"))
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _require(value, key):
    if value is None:
        raise ConfigError(f"config key {key!r} is required for this model")
    return value


def _default(value, fallback):
    return fallback if value is None else value


def _reject(given: dict, allowed: set, model: str) -> None:
    for key, value in given.items():
        if value is not None and key not in allowed:
            shown = "lambda" if key == "lam" else key
            raise ConfigError(f"config key {shown!r} does not apply to model {model!r}")


def build_scenario(config: RunConfig) -> Scenario:
    if config.scenario is None:
        raise ConfigError("a scenario is required (m, p-ignore, p-separate, p-combine)")
    tag = _SCENARIOS.get(config.scenario)
    if tag is None:
        raise ConfigError(f"unknown scenario {config.scenario!r}")
    extras = config.extra_constants
    try:
        if tag in ("p_separate", "p_combine"):
            return Scenario(tag, config.endowment, extras)
        return Scenario(tag, extra_constants=extras)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
