"""Scenario config files: INI-style sections, typed validation, echo.

Every key has a default, so a minimal file (or none at all) is valid. The
resolved configuration is echoed byte-identically into the output directory
for provenance.
"""

import configparser
from dataclasses import dataclass

from .allocation import ClaConfig
from .errors import ConfigurationError, UnknownNameError
from .harness import LOOKBACK_POLICIES, ScenarioConfig
from .reports import METHOD_ORDER, all_method_ids, parse_method_id
from .trace_gen import (
    ArfimaConfig,
    GaussianConfig,
    GarchConfig,
    GbmConfig,
    ShockConfig,
)

_DEFAULTS = {
    "scenario": {
        "num_iters": "100",
        "sim_length": "520",
        "delta_t": "60",
        "num_assets": "32",
        "generator": "gaussian",
        "methods": "all",
        "box_length": "60",
        "netmod_alpha": "0.3",
        "var_alpha": "0.05",
        "risk_free_rate": "0.0",
        "master_seed": "12345",
        "pearson_lookback": "delta_t",
        "detrended_lookback": "full_history",
        "dpcca_ridge": "off",
    },
    "gaussian": {
        "num_independent": "16",
        "num_dependent": "16",
        "base_mean": "0.0",
        "base_std": "0.01",
        "noise_std_ratio": "0.25",
    },
    "gbm": {
        "num_independent": "16",
        "num_dependent": "16",
        "drift": "0.0",
        "volatility": "0.2",
        "initial_value": "0.01",
        "dt": "1.0",
        "noise_std_ratio": "0.25",
    },
    "garch": {
        "num_independent": "16",
        "num_dependent": "16",
        "alpha0": "0.4",
        "alpha1": "0.4",
        "beta1": "0.3",
        "noise_std_ratio": "0.25",
    },
    "arfima": {
        "num_pairs": "8",
        "num_dependent": "16",
        "coupling_weight": "0.8",
        "rho1": "0.4",
        "rho2": "0.3",
        "kernel_truncation": "100",
        "noise_std_ratio": "0.25",
    },
    "shocks": {
        "max_shocks": "5",
        "mixing_beta": "0.5",
        "max_duration_fraction": "0.1",
        "num_mixed_pairs": "4",
    },
    "cla": {
        "lower_bound": "0.0",
        "upper_bound": "1.0",
        "target_return": "",
    },
}

_GENERATOR_SECTIONS = {
    "gaussian": "gaussian",
    "gbm": "gbm",
    "garch": "garch",
    "arfima": "arfima",
    "arfima_shocks": "arfima",
}


def _as_int(raw, section, key):
    try:
        return int(raw[section][key])
    except ValueError:
        raise ConfigurationError(
            f"{section}.{key}: expected an integer, got {raw[section][key]!r}"
        ) from None


def _as_float(raw, section, key):
    try:
        return float(raw[section][key])
    except ValueError:
        raise ConfigurationError(
            f"{section}.{key}: expected a number, got {raw[section][key]!r}"
        ) from None


def _as_bool(raw, section, key):
    text = raw[section][key].strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{section}.{key}: expected on/off, got {text!r}")


@dataclass
class ConfigBundle:
    """A validated scenario plus the method list and the resolved echo text."""

    base: ScenarioConfig
    methods: list
    resolved_text: str
    raw: dict

    def scenarios(self):
        return [self.base.replace(scheme=s, metric=m) for s, m in self.methods]

    def for_backtest(self, num_assets, num_returns):
        """Rebuild the scenario for an ingested table: no generator, actual sizes."""
        lo, hi, target = _cla_scalars(self.raw)
        return self.base.replace(
            num_assets=num_assets,
            sim_length=num_returns,
            num_iters=1,
            generator_kind=None,
            generator_config=None,
            shock_config=None,
            cla=ClaConfig.uniform(num_assets, lo, hi, target),
        )


def _cla_scalars(raw):
    lo = _as_float(raw, "cla", "lower_bound")
    hi = _as_float(raw, "cla", "upper_bound")
    target_text = raw["cla"]["target_return"].strip()
    target = float(target_text) if target_text else None
    return lo, hi, target


def _parse_overrides(raw, overrides):
    for item in overrides:
        if "=" not in item:
            raise UnknownNameError(f"override {item!r} is not of the form section.key=value")
        key_path, value = item.split("=", 1)
        if "." not in key_path:
            raise UnknownNameError(f"override key {key_path!r} must be section.key")
        section, key = key_path.split(".", 1)
        section = section.strip().lower()
        key = key.strip().lower()
        if section not in raw or key not in _DEFAULTS[section]:
            raise UnknownNameError(f"unknown config key {section}.{key}")
        raw[section][key] = value.strip()


def _render_echo(raw, generator_kind):
    """Deterministic resolved-config text: fixed section and key order."""
    sections = ["scenario", _GENERATOR_SECTIONS[generator_kind], "cla"]
    if generator_kind == "arfima_shocks":
        sections.insert(2, "shocks")
    lines = []
    for section in sections:
        lines.append(f"[{section}]")
        for key in _DEFAULTS[section]:
            lines.append(f"{key} = {raw[section][key]}")
        lines.append("")
    return "\n".join(lines)


def load_config(path=None, overrides=(), seed=None):
    """Parse, override, and validate a scenario config file.

    Returns a ConfigBundle; raises ConfigurationError (invalid values) or
    UnknownNameError (unknown sections, keys, methods).
    """
    raw = {section: dict(values) for section, values in _DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config file {path}: {exc}") from None
        for section in parser.sections():
            if section not in raw:
                raise ConfigurationError(f"{section}: unknown config section")
            for key, value in parser.items(section):
                if key not in _DEFAULTS[section]:
                    raise ConfigurationError(f"{section}.{key}: unknown config key")
                raw[section][key] = value.strip()
    _parse_overrides(raw, overrides)
    if seed is not None:
        raw["scenario"]["master_seed"] = str(int(seed))

    generator_kind = raw["scenario"]["generator"].strip().lower()
    if generator_kind not in _GENERATOR_SECTIONS:
        raise UnknownNameError(f"scenario.generator: unknown generator {generator_kind!r}")

    methods_text = raw["scenario"]["methods"].strip().lower()
    if methods_text == "all":
        methods = list(METHOD_ORDER)
    else:
        methods = []
        for token in methods_text.split(","):
            token = token.strip()
            if not token:
                continue
            pair = parse_method_id(token)
            if pair not in methods:
                methods.append(pair)
        if not methods:
            raise ConfigurationError(
                f"scenario.methods: expected 'all' or method ids from {all_method_ids()}"
            )

    num_assets = _as_int(raw, "scenario", "num_assets")
    section = _GENERATOR_SECTIONS[generator_kind]
    if generator_kind in ("arfima", "arfima_shocks"):
        generator_config = ArfimaConfig(
            num_pairs=_as_int(raw, section, "num_pairs"),
            num_dependent=_as_int(raw, section, "num_dependent"),
            coupling_weight=_as_float(raw, section, "coupling_weight"),
            rho1=_as_float(raw, section, "rho1"),
            rho2=_as_float(raw, section, "rho2"),
            kernel_truncation=_as_int(raw, section, "kernel_truncation"),
            noise_std_ratio=_as_float(raw, section, "noise_std_ratio"),
        )
    elif generator_kind == "gaussian":
        generator_config = GaussianConfig(
            num_independent=_as_int(raw, section, "num_independent"),
            num_dependent=_as_int(raw, section, "num_dependent"),
            base_mean=_as_float(raw, section, "base_mean"),
            base_std=_as_float(raw, section, "base_std"),
            noise_std_ratio=_as_float(raw, section, "noise_std_ratio"),
        )
    elif generator_kind == "gbm":
        generator_config = GbmConfig(
            num_independent=_as_int(raw, section, "num_independent"),
            num_dependent=_as_int(raw, section, "num_dependent"),
            drift=_as_float(raw, section, "drift"),
            volatility=_as_float(raw, section, "volatility"),
            initial_value=_as_float(raw, section, "initial_value"),
            dt=_as_float(raw, section, "dt"),
            noise_std_ratio=_as_float(raw, section, "noise_std_ratio"),
        )
    else:
        generator_config = GarchConfig(
            num_independent=_as_int(raw, section, "num_independent"),
            num_dependent=_as_int(raw, section, "num_dependent"),
            alpha0=_as_float(raw, section, "alpha0"),
            alpha1=_as_float(raw, section, "alpha1"),
            beta1=_as_float(raw, section, "beta1"),
            noise_std_ratio=_as_float(raw, section, "noise_std_ratio"),
        )
    shock_config = None
    if generator_kind == "arfima_shocks":
        shock_config = ShockConfig(
            max_shocks=_as_int(raw, "shocks", "max_shocks"),
            mixing_beta=_as_float(raw, "shocks", "mixing_beta"),
            max_duration_fraction=_as_float(raw, "shocks", "max_duration_fraction"),
            num_mixed_pairs=_as_int(raw, "shocks", "num_mixed_pairs"),
        )

    lo, hi, target = _cla_scalars(raw)
    lookback = raw["scenario"]["pearson_lookback"].strip().lower()
    detrended = raw["scenario"]["detrended_lookback"].strip().lower()
    for name, value in (("pearson_lookback", lookback), ("detrended_lookback", detrended)):
        if value not in LOOKBACK_POLICIES:
            raise ConfigurationError(
                f"scenario.{name}: expected one of {LOOKBACK_POLICIES}, got {value!r}"
            )

    scheme, metric = methods[0]
    base = ScenarioConfig(
        num_iters=_as_int(raw, "scenario", "num_iters"),
        sim_length=_as_int(raw, "scenario", "sim_length"),
        delta_t=_as_int(raw, "scenario", "delta_t"),
        num_assets=num_assets,
        scheme=scheme,
        metric=metric,
        generator_kind=generator_kind,
        generator_config=generator_config,
        shock_config=shock_config,
        box_length=_as_int(raw, "scenario", "box_length"),
        netmod_alpha=_as_float(raw, "scenario", "netmod_alpha"),
        cla=ClaConfig.uniform(num_assets, lo, hi, target),
        master_seed=_as_int(raw, "scenario", "master_seed"),
        var_alpha=_as_float(raw, "scenario", "var_alpha"),
        risk_free_rate=_as_float(raw, "scenario", "risk_free_rate"),
        pearson_lookback=lookback,
        detrended_lookback=detrended,
        dpcca_ridge=_as_bool(raw, "scenario", "dpcca_ridge"),
    )
    return ConfigBundle(base, methods, _render_echo(raw, generator_kind), raw)
