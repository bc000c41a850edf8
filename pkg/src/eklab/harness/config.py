"""Scenario configuration: INI text with sections, validated up front.

Every violated key is collected before anything runs, so a broken config
fails once with the complete list.
"""
from __future__ import annotations

import configparser
import copy
import io
import math
from dataclasses import dataclass, field

PIPELINES = ("simulate", "madelung", "energy-audit", "commutator-scan", "besov-fit", "cross-validate")
INITIAL_TYPES = ("constant", "cosine", "madelung", "weierstrass-synthetic")
BESOV_SOURCES = ("weierstrass", "random-fourier", "snapshot")

# Pass/fail thresholds; any of them can be overridden in [tolerances].
DEFAULT_TOLERANCES = {
    "mass_drift": 1e-12,         # relative mass drift over the run
    "energy_drift": 1e-6,        # relative total-energy drift over the run
    "weak_residual": 1e-6,       # |weak energy residual| / total energy
    "min_slope": 0.15,           # smallest acceptable commutator decay slope
    "slope_tolerance": 0.2,      # allowed shortfall below the predicted exponent
    "identity_factor": 10.0,     # identity residual vs its discretisation-error estimate
    "alpha_tolerance": 0.05,     # |fitted - generator| Besov exponent
    "cross_validate": 1e-6,      # relative L2 gap between the two solvers
}

_SCHEMA = {
    "scenario": {"pipeline": str, "seed": int, "output": str},
    "grid": {"dim": int, "n": int, "l": float},
    "energy_law": {"type": str, "a": float, "gamma": float, "c": float},
    "capillarity": {"type": str, "kappa0": float, "eps0": float, "rho_min": float},
    "initial": {
        "type": str,
        "rho0": float,
        "amplitude": float,
        "mode": int,
        "velocity": float,
        "phase_amplitude": float,
        "alpha": float,
        "beta": float,
        "j": int,
        "samples": int,
        "rho_amplitude": float,
        "u_amplitude": float,
    },
    "time": {"t": float, "dt": str, "sample_every": int, "cfl": float, "dealias": bool},
    "mollifier": {"eps": str},
    "test_function": {"t_a": float, "t_b": float, "spatial": str, "center": float, "width": float, "profile": str},
    "besov": {"source": str, "alpha": float, "j": int, "p": float, "field": str, "component": str, "n": int},
    "tolerances": {k: float for k in DEFAULT_TOLERANCES},
}

# canonical spellings for the case-insensitive keys
_CANON = {
    "grid": {"n": "N", "l": "L"},
    "energy_law": {"a": "A"},
    "initial": {"j": "J"},
    "time": {"t": "T"},
    "besov": {"j": "J", "n": "N"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every offending key."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def _canon(section, key):
    return _CANON.get(section, {}).get(key, key)


def _convert(kind, raw):
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        value = float(raw)
        if value != int(value):
            raise ValueError(f"not an integer: {raw!r}")
        return int(value)
    if kind is float:
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(f"not finite: {raw!r}")
        return value
    return raw.strip()


@dataclass
class ScenarioConfig:
    """Parsed scenario.  ``sections`` maps section name to typed key/values."""

    sections: dict = field(default_factory=dict)

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    @property
    def pipeline(self) -> str:
        return self.get("scenario", "pipeline")

    @property
    def seed(self) -> int:
        return self.get("scenario", "seed", 0)

    @property
    def T(self) -> float:
        return self.get("time", "T", 0.0)

    @property
    def tolerances(self) -> dict:
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.sections.get("tolerances", {}))
        return tol

    def eps_ladder(self):
        """Explicit ladder from the config, or ``None`` for the default."""
        raw = self.get("mollifier", "eps")
        if raw is None or raw.strip().lower() in ("", "default"):
            return None
        return [float(v) for v in raw.replace(",", " ").split()]

    def dt_value(self):
        """Solver step as a float, or ``None`` for the CFL choice."""
        raw = self.get("time", "dt", "cfl")
        return None if raw.strip().lower() == "cfl" else float(raw)

    def with_updates(self, **sections) -> "ScenarioConfig":
        new = copy.deepcopy(self.sections)
        for name, values in sections.items():
            new.setdefault(name, {}).update(values)
        return validate(ScenarioConfig(new))

    # -- text form --

    def to_text(self) -> str:
        """Normalised INI text: known sections in schema order, sorted keys."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for name in _SCHEMA:
            values = self.sections.get(name)
            if not values:
                continue
            parser[name] = {k: _format(v) for k, v in sorted(values.items())}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate INI text; raises ``ConfigError`` listing all problems."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    problems = []
    sections = {}
    for name in parser.sections():
        if name not in _SCHEMA:
            problems.append(f"[{name}]: unknown section")
            continue
        typed = {}
        for key, raw in parser[name].items():
            kind = _SCHEMA[name].get(key.lower())
            if kind is None:
                problems.append(f"[{name}] {key}: unknown key")
                continue
            try:
                typed[_canon(name, key.lower())] = _convert(kind, raw)
            except ValueError as exc:
                problems.append(f"[{name}] {key}: {exc}")
        sections[name] = typed
    if problems:
        # report the schema problems together with the semantic ones
        try:
            validate(ScenarioConfig(sections))
        except ConfigError as exc:
            problems.extend(exc.problems)
        raise ConfigError(problems)
    return validate(ScenarioConfig(sections))


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _is_pow2(n):
    return isinstance(n, int) and n >= 8 and not n & (n - 1)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Semantic checks; collects every violation before raising."""
    p = []
    get = cfg.get
    pipeline = get("scenario", "pipeline")
    if pipeline not in PIPELINES:
        p.append(f"[scenario] pipeline: must be one of {', '.join(PIPELINES)}, got {pipeline!r}")

    dim, n, length = get("grid", "dim", 1), get("grid", "N"), get("grid", "L", 2 * math.pi)
    if pipeline != "besov-fit" or get("besov", "source") != "snapshot":
        if dim not in (1, 2):
            p.append(f"[grid] dim: must be 1 or 2, got {dim}")
        if n is None and pipeline != "besov-fit":
            p.append("[grid] N: required")
        elif n is not None and not _is_pow2(n):
            p.append(f"[grid] N: must be a power of two >= 8, got {n}")
        if not length > 0:
            p.append(f"[grid] L: must be positive, got {length}")

    etype = get("energy_law", "type", "gamma")
    if etype not in ("gamma", "log", "linear"):
        p.append(f"[energy_law] type: unknown {etype!r}")
    if etype == "gamma":
        if not get("energy_law", "gamma", 2.0) > 1:
            p.append("[energy_law] gamma: must exceed 1")
        if not get("energy_law", "A", 1.0) > 0:
            p.append("[energy_law] A: must be positive")
    ctype = get("capillarity", "type", "constant")
    if ctype not in ("constant", "qhd"):
        p.append(f"[capillarity] type: unknown {ctype!r}")
    if ctype == "constant" and not get("capillarity", "kappa0", 1.0) > 0:
        p.append("[capillarity] kappa0: must be positive")
    if ctype == "qhd" and not get("capillarity", "eps0", 1.0) > 0:
        p.append("[capillarity] eps0: must be positive")
    if not get("capillarity", "rho_min", 1e-6) > 0:
        p.append("[capillarity] rho_min: must be positive")

    itype = get("initial", "type")
    needs_initial = pipeline in ("simulate", "madelung", "energy-audit", "commutator-scan", "cross-validate")
    if needs_initial and itype is None:
        p.append("[initial] type: required")
    if itype is not None and itype not in INITIAL_TYPES:
        p.append(f"[initial] type: unknown generator {itype!r}")
    if pipeline in ("madelung", "cross-validate") and itype not in (None, "madelung"):
        p.append(f"[initial] type: pipeline {pipeline} needs the madelung generator")
    if pipeline == "simulate" and itype == "weierstrass-synthetic":
        p.append("[initial] type: synthetic fields cannot be evolved")
    if pipeline == "madelung" or itype == "madelung":
        if ctype != "qhd":
            p.append("[capillarity] type: the madelung generator requires qhd capillarity")
    for key in ("alpha", "beta"):
        v = get("initial", key)
        if v is not None and not 0 < v < 1:
            p.append(f"[initial] {key}: must lie in (0, 1), got {v}")
    if itype == "weierstrass-synthetic" and n is not None and _is_pow2(n):
        j = get("initial", "J", 8)
        if 2**j >= n // 2:
            p.append(f"[initial] J: 2^J must stay below N/2 = {n // 2}")
        if get("initial", "samples", 512) < 16:
            p.append("[initial] samples: need at least 16 time samples")

    T = get("time", "T")
    if pipeline not in ("besov-fit",) and itype != "weierstrass-synthetic":
        if T is None:
            p.append("[time] T: required")
        elif T < 0:
            p.append(f"[time] T: must be nonnegative, got {T}")
    if itype == "weierstrass-synthetic" and T is not None and not T > 0:
        p.append("[time] T: must be positive")
    raw_dt = get("time", "dt", "cfl")
    if raw_dt.strip().lower() != "cfl":
        try:
            if not float(raw_dt) > 0:
                p.append(f"[time] dt: must be positive or 'cfl', got {raw_dt}")
        except ValueError:
            p.append(f"[time] dt: must be a number or 'cfl', got {raw_dt!r}")
    if get("time", "sample_every", 1) < 1:
        p.append("[time] sample_every: must be >= 1")
    if not get("time", "cfl", 0.25) > 0:
        p.append("[time] cfl: must be positive")

    try:
        ladder = cfg.eps_ladder()
    except ValueError:
        p.append(f"[mollifier] eps: not a list of numbers: {get('mollifier', 'eps')!r}")
        ladder = None
    if ladder is not None and T is not None:
        bad = [e for e in ladder if not 0 < e < T / 4]
        if bad:
            p.append(f"[mollifier] eps: values {bad} outside (0, T/4) with T={T}")

    tf = cfg.sections.get("test_function", {})
    if tf:
        ta, tb = tf.get("t_a"), tf.get("t_b")
        if ta is None or tb is None:
            p.append("[test_function] t_a, t_b: both required")
        elif not tb > ta:
            p.append("[test_function] t_b: must exceed t_a")
        elif T is not None and not (0 < ta and tb < T):
            p.append(f"[test_function] t_a, t_b: support must lie inside (0, T={T})")
        if tf.get("spatial", "constant") not in ("constant", "bump"):
            p.append(f"[test_function] spatial: unknown {tf.get('spatial')!r}")
        if tf.get("profile", "poly") not in ("poly", "smooth"):
            p.append(f"[test_function] profile: unknown {tf.get('profile')!r}")

    if pipeline == "besov-fit":
        src = get("besov", "source", "weierstrass")
        if src not in BESOV_SOURCES:
            p.append(f"[besov] source: unknown {src!r}")
        if src == "snapshot" and not get("besov", "field"):
            p.append("[besov] field: snapshot path required")
        if src != "snapshot":
            alpha = get("besov", "alpha")
            if alpha is None or not 0 < alpha < 1:
                p.append(f"[besov] alpha: must lie in (0, 1), got {alpha}")
            bn = get("besov", "N", n)
            if bn is None or not _is_pow2(bn):
                p.append(f"[besov] N: power of two >= 8 required, got {bn}")
            elif src == "weierstrass" and 2 ** get("besov", "J", 8) >= bn // 2:
                p.append(f"[besov] J: 2^J must stay below N/2 = {bn // 2}")
        if get("besov", "p", 3.0) not in (2.0, 3.0):
            p.append("[besov] p: only 2 and 3 are supported")

    for key, value in cfg.sections.get("tolerances", {}).items():
        if not value > 0 and key != "slope_tolerance":
            p.append(f"[tolerances] {key}: must be positive")
    if p:
        raise ConfigError(p)
    return cfg


__all__ = [
    "PIPELINES",
    "DEFAULT_TOLERANCES",
    "ConfigError",
    "ScenarioConfig",
    "parse_config",
    "load_config",
    "validate",
]
