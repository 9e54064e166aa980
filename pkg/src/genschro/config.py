"""Flat dotted-key scenario configuration.

One ``key = value`` pair per line; ``#`` starts a comment. Values are JSON
literals (numbers, ``true``/``false``, quoted strings); bare words are accepted
for string keys. Example::

    grid.half_width = 10
    grid.points = 401
    time.dt = 0.01
    time.steps = 200
    mu.kind = "quadratic_real"
    mu.gamma = 0.1
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .core import (
    MU_KINDS,
    Grid,
    MuProfile,
    PhysicalConstants,
    PotentialProfile,
    make_grid,
)
from .errors import ConfigurationError
from .fields import PHI_MODES, FieldState, init_gaussian
from .operators import HAMILTONIAN_FORMS

CONFIG_POTENTIAL_KINDS = ("zero", "harmonic", "cubic_imag", "table")
INITIAL_KINDS = ("gaussian",)

# dotted key -> (attribute, type, default); REQUIRED marks keys with no default
REQUIRED = object()
SCHEMA = {
    "physics.hbar": ("hbar", float, 1.0),
    "physics.mass": ("mass", float, 1.0),
    "grid.half_width": ("half_width", float, REQUIRED),
    "grid.points": ("points", int, REQUIRED),
    "time.dt": ("dt", float, REQUIRED),
    "time.steps": ("steps", int, REQUIRED),
    "time.snapshot_every": ("snapshot_every", int, 10),
    "time.enforce_pt": ("enforce_pt", bool, False),
    "mu.kind": ("mu_kind", str, "zero"),
    "mu.gamma": ("mu_gamma", float, None),
    "mu.lambda": ("mu_lambda", float, None),
    "mu.file": ("mu_file", str, None),
    "potential.kind": ("potential_kind", str, "zero"),
    "potential.omega": ("potential_omega", float, None),
    "potential.epsilon": ("potential_epsilon", float, None),
    "potential.file": ("potential_file", str, None),
    "initial.kind": ("initial_kind", str, "gaussian"),
    "initial.x0": ("x0", float, 0.0),
    "initial.k0": ("k0", float, 0.0),
    "initial.sigma": ("sigma", float, 1.0),
    "initial.phi_mode": ("phi_mode", str, "pt_of_psi"),
    "initial.phi_x0": ("phi_x0", float, None),
    "initial.phi_k0": ("phi_k0", float, None),
    "initial.phi_sigma": ("phi_sigma", float, None),
    "assembly.form": ("form", str, "divergence"),
    "spectral.k": ("spectral_k", int, 8),
    "spectral.enabled": ("spectral_enabled", bool, False),
    "output.dir": ("output_dir", str, "output"),
    "output.precision": ("precision", int, 17),
}
ATTR_TO_KEY = {attr: key for key, (attr, _, _) in SCHEMA.items()}


@dataclass(frozen=True)
class ScenarioConfig:
    half_width: float
    points: int
    dt: float
    steps: int
    hbar: float = 1.0
    mass: float = 1.0
    snapshot_every: int = 10
    enforce_pt: bool = False
    mu_kind: str = "zero"
    mu_gamma: float | None = None
    mu_lambda: float | None = None
    mu_file: str | None = None
    potential_kind: str = "zero"
    potential_omega: float | None = None
    potential_epsilon: float | None = None
    potential_file: str | None = None
    initial_kind: str = "gaussian"
    x0: float = 0.0
    k0: float = 0.0
    sigma: float = 1.0
    phi_mode: str = "pt_of_psi"
    phi_x0: float | None = None
    phi_k0: float | None = None
    phi_sigma: float | None = None
    form: str = "divergence"
    spectral_k: int = 8
    spectral_enabled: bool = False
    output_dir: str = "output"
    precision: int = 17

    # -- builders -----------------------------------------------------------------

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.hbar, self.mass)

    def grid(self) -> Grid:
        return make_grid(self.half_width, self.points)

    def mu(self) -> MuProfile:
        if self.mu_kind == "quadratic_real":
            return MuProfile.quadratic_real(self.mu_gamma)
        if self.mu_kind == "linear_imag":
            return MuProfile.linear_imag(self.mu_lambda)
        if self.mu_kind == "table":
            return MuProfile.from_table(self.mu_file)
        return MuProfile.zero()

    def potential(self) -> PotentialProfile:
        if self.potential_kind == "harmonic":
            return PotentialProfile.harmonic(self.potential_omega, self.mass)
        if self.potential_kind == "cubic_imag":
            return PotentialProfile.cubic_imag(self.potential_epsilon)
        if self.potential_kind == "table":
            return PotentialProfile.from_table(self.potential_file)
        return PotentialProfile.zero()

    def phi_params(self) -> dict:
        p = {"x0": self.phi_x0, "k0": self.phi_k0, "sigma": self.phi_sigma}
        return {k: v for k, v in p.items() if v is not None}

    def initial_state(self, grid: Grid | None = None) -> FieldState:
        return init_gaussian(
            grid or self.grid(), self.x0, self.k0, self.sigma, self.phi_mode, self.phi_params()
        )

    def as_dict(self) -> dict:
        return {ATTR_TO_KEY[f.name]: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


def _coerce(raw: str, kind, key: str, line: int):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        if kind is str:
            return raw
        try:
            value = float(raw)  # accepts inf/nan spellings so they can be rejected below
        except ValueError:
            raise ConfigurationError(f"cannot parse value {raw!r} for {key}", line, key) from None
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key} expects true or false, got {raw!r}", line, key)
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{key} expects a string, got {raw!r}", line, key)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{key} expects a number, got {raw!r}", line, key)
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigurationError(f"{key} expects an integer, got {raw!r}", line, key)
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{key} must be finite, got {raw!r}", line, key)
    return value


def _resolve(path: str, base_dir: Path, key: str, line: int) -> str:
    p = Path(path)
    if not p.is_absolute():
        p = base_dir / p
    if not p.is_file():
        raise ConfigurationError(f"{key}: file not found: {p}", line, key)
    return str(p)


def parse_config(text: str, base_dir=None) -> ScenarioConfig:
    """Parse and validate config text; relative file paths resolve against ``base_dir``."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    values, lines = {}, {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        content = _strip_comment(raw_line)
        if not content:
            continue
        if "=" not in content:
            raise ConfigurationError(f"expected 'key = value', got {content!r}", number)
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in SCHEMA:
            raise ConfigurationError(f"unknown key {key!r}", number, key)
        if key in values:
            raise ConfigurationError(f"duplicate key {key!r} (first set on line {lines[key]})", number, key)
        attr, kind, _ = SCHEMA[key]
        values[key] = _coerce(raw, kind, key, number)
        lines[key] = number
    for key, (_, _, default) in SCHEMA.items():
        if default is REQUIRED and key not in values:
            raise ConfigurationError(f"missing required key {key!r}", key=key)
    for key in ("mu.file", "potential.file"):
        if key in values:
            values[key] = _resolve(values[key], base_dir, key, lines[key])
    kwargs = {SCHEMA[k][0]: v for k, v in values.items()}
    _validate(kwargs, lines)
    return ScenarioConfig(**kwargs)


def _strip_comment(line: str) -> str:
    """Drop a trailing comment, ignoring '#' inside double quotes."""
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i].strip()
    return line.strip()


def _validate(kw: dict, lines: dict):
    def fail(key, message):
        raise ConfigurationError(message, lines.get(key), key)

    def need(owner_key, param_key, label):
        if kw.get(SCHEMA[param_key][0]) is None:
            fail(owner_key, f"{label} requires {param_key}")

    for key in ("physics.hbar", "physics.mass"):
        attr = SCHEMA[key][0]
        if attr in kw and not kw[attr] > 0:
            fail(key, f"{key} must be positive")
    try:
        make_grid(kw["half_width"], kw["points"])
    except ConfigurationError as exc:
        bad = "grid.points" if "point" in str(exc) else "grid.half_width"
        fail(bad, str(exc))
    if not kw["dt"] > 0:
        fail("time.dt", "time.dt must be positive")
    if kw["steps"] < 0:
        fail("time.steps", "time.steps must be >= 0")
    if kw.get("snapshot_every", 10) < 1:
        fail("time.snapshot_every", "time.snapshot_every must be >= 1")
    if kw.get("spectral_k", 8) < 1:
        fail("spectral.k", "spectral.k must be >= 1")
    if not 1 <= kw.get("precision", 17) <= 17:
        fail("output.precision", "output.precision must be between 1 and 17")
    if kw.get("sigma", 1.0) <= 0 or (kw.get("phi_sigma") is not None and kw["phi_sigma"] <= 0):
        fail("initial.sigma", "initial widths must be positive")

    enums = {
        "mu.kind": MU_KINDS,
        "potential.kind": CONFIG_POTENTIAL_KINDS,
        "initial.kind": INITIAL_KINDS,
        "initial.phi_mode": PHI_MODES,
        "assembly.form": HAMILTONIAN_FORMS,
    }
    for key, allowed in enums.items():
        value = kw.get(SCHEMA[key][0], SCHEMA[key][2])
        if value not in allowed:
            fail(key, f"{key} must be one of {', '.join(allowed)}; got {value!r}")

    mu_kind = kw.get("mu_kind", "zero")
    need_mu = {"quadratic_real": "mu.gamma", "linear_imag": "mu.lambda", "table": "mu.file"}.get(mu_kind)
    if need_mu:
        need("mu.kind", need_mu, f"mu.kind = {mu_kind}")
    pot_kind = kw.get("potential_kind", "zero")
    need_pot = {"harmonic": "potential.omega", "cubic_imag": "potential.epsilon", "table": "potential.file"}.get(pot_kind)
    if need_pot:
        need("potential.kind", need_pot, f"potential.kind = {pot_kind}")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)


def serialize_config(config: ScenarioConfig) -> str:
    """Config text that parses back to an equal config (file paths are absolute)."""
    return "".join(f"{key} = {json.dumps(value)}\n" for key, value in config.as_dict().items())
