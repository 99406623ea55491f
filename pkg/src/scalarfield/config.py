"""Flat key = value run configuration with [section] headers.

Grammar (documented in the README): lines are either blank, comments
starting with '#', section headers '[name]', or 'key = value' assignments.
Unknown sections or keys are rejected.  Example:

    [grid]
    mode = cartesian1d
    R = 15
    h = 0.005

    [potential]
    variant = exp_well
    V_inf = 1.0
    c0 = 0.3
    a = 0.5

    [problem]
    p = 4

    [run]
    command = nodal
"""

from dataclasses import dataclass, field as dc_field

from .errors import ConfigurationError
from .fieldio import read_field
from .grid import build_grid
from .potentials import PotentialSpec, ProblemParams

_SCHEMA = {
    "grid": {"mode": str, "R": float, "h": float, "N": int},
    "potential": {"variant": str, "V_inf": float, "c0": float, "a": float,
                  "table_path": str},
    "problem": {"p": float},
    "solver": {"tol_residual": float, "tol_h": float, "max_iter": int,
               "ground_max_iter": int, "ground_tol": float, "eigen_tol": float,
               "eigen_res": float, "seed_separation": float, "rng_seed": int,
               "nodal_delta": float},
    "run": {"command": str, "out": str, "field_path": str, "lambda": float,
            "loop_samples": int, "sweep_c0": str, "sweep_a": str,
            "radial_check": str},
}

COMMANDS = ("ground", "linearize", "nodal", "bounds", "verify", "sweep")

_DEFAULTS = {
    "grid": {"mode": "cartesian1d", "R": 15.0, "h": 0.01, "N": 2},
    "potential": {"variant": "constant", "V_inf": 1.0, "c0": 0.0, "a": 1.0,
                  "table_path": None},
    "problem": {"p": 4.0},
    "solver": {"tol_residual": 1e-4, "tol_h": 1e-9, "max_iter": 6000,
               "ground_max_iter": 20000, "ground_tol": 1e-8, "eigen_tol": 1e-10,
               "eigen_res": 1e-11, "seed_separation": None, "rng_seed": 0,
               "nodal_delta": 1e-3},
    "run": {"command": "nodal", "out": "out", "field_path": None, "lambda": None,
            "loop_samples": 64, "sweep_c0": None, "sweep_a": None,
            "radial_check": "false"},
}


def parse_config_text(text, path="<config>"):
    """Parse the flat config grammar; returns {section: {key: value}}."""
    values = {s: dict(d) for s, d in _DEFAULTS.items()}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigurationError(f"{path}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        if section is None:
            raise ConfigurationError(f"{path}:{lineno}: assignment before any section")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA[section]:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
        caster = _SCHEMA[section][key]
        try:
            values[section][key] = caster(val)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


@dataclass
class RunConfig:
    """Validated run configuration (all module preconditions re-checked)."""

    sections: dict
    grid: object = None
    potential_spec: object = None
    params: object = None
    echo: dict = dc_field(default_factory=dict)

    @classmethod
    def from_text(cls, text, path="<config>"):
        sections = parse_config_text(text, path)
        cfg = cls(sections)
        cfg._validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read(), path=str(path))

    def _validate(self):
        g = self.sections["grid"]
        self.grid = build_grid(g["mode"], g["R"], g["h"],
                               N=g["N"] if g["mode"] == "radial" else None)
        pot = self.sections["potential"]
        table = None
        if pot["variant"] == "table":
            if not pot["table_path"]:
                raise ConfigurationError("table potential requires table_path")
            table, _ = read_field(pot["table_path"])
        self.potential_spec = PotentialSpec(
            pot["variant"], pot["V_inf"],
            c0=pot["c0"] if pot["variant"] == "exp_well" else 0.0,
            a=pot["a"], table=table,
        )
        pr = self.sections["problem"]
        self.params = ProblemParams(pr["p"], self.grid.dim, pot["V_inf"])
        cmd = self.sections["run"]["command"]
        if cmd not in COMMANDS:
            raise ConfigurationError(f"unknown command {cmd!r}")
        if cmd in ("linearize", "verify") and not self.sections["run"]["field_path"]:
            raise ConfigurationError(f"command {cmd!r} requires run.field_path")
        if cmd == "sweep" and not self.sections["run"]["sweep_c0"]:
            raise ConfigurationError("command 'sweep' requires run.sweep_c0")
        self.echo = {s: {k: v for k, v in d.items()} for s, d in self.sections.items()}

    def __getitem__(self, section):
        return self.sections[section]

    def sweep_values(self, key):
        raw = self.sections["run"][key]
        if raw is None:
            return None
        try:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"bad sweep list {raw!r}") from exc
