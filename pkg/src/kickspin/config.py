"""Run configuration: ``key = value`` files, command-line overrides, seeded RNG."""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import InvalidArgument

DEFAULT_SEED = 20071101
COMMANDS = ("spectrum", "cycle", "connection", "protocol", "mobile")
FORMATS = ("csv", "json", "both")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_number(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_number(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    raise ValueError("not a number")


def parse_real(text: str) -> float:
    """A float, optionally written with ``pi`` and ``+ - * /`` (e.g. ``4*pi``, ``pi/2``)."""
    try:
        value = _eval_number(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"cannot read {text!r} as a number") from exc
    if not math.isfinite(value):
        raise InvalidArgument(f"{text!r} is not finite")
    return value


def parse_int(text: str) -> int:
    try:
        return int(text.strip(), 0)
    except ValueError as exc:
        raise InvalidArgument(f"cannot read {text!r} as an integer") from exc


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InvalidArgument(f"cannot read {text!r} as a boolean")


def parse_seed(text: str) -> int:
    seed = parse_int(text)
    if not 0 <= seed < 2**64:
        raise InvalidArgument("seed must be an unsigned 64-bit integer")
    return seed


def parse_complex_pair(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise InvalidArgument(f"expected two comma-separated amplitudes, got {text!r}")
    try:
        return tuple(complex(p.replace(" ", "")) for p in parts)
    except ValueError as exc:
        raise InvalidArgument(f"cannot read amplitudes {text!r}") from exc


def parse_int_list(text: str) -> tuple:
    return tuple(parse_int(p) for p in text.split(",") if p.strip())


def parse_name_list(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    command: str = "spectrum"
    out: str = "out"
    format: str = "both"
    seed: int = DEFAULT_SEED
    plotdata: bool = False
    # spectrum
    lambda_start: float = 0.0
    lambda_end: float = 2 * math.pi
    steps: int = 64
    # cycle
    cycle_steps: int = 4096
    cycles: int = 1
    # connection
    r: float | None = None
    r_start: float = 0.0
    r_end: float = 4 * math.pi
    r_samples: int = 10
    h: float = 1e-4
    gauges: tuple = ("real_gauge", "parallel_transport", "kick_component_real")
    wilson: bool = True
    wilson_end: float = 4 * math.pi
    wilson_steps: int = 512
    random_models: int = 0
    # protocol
    num_kicks: int = 2
    period: float = 1.0
    initial: tuple = (1 / math.sqrt(2), 1 / math.sqrt(2))
    m_min: int = 1
    fidelity_kicks: tuple = (64, 128, 256, 512)
    # mobile
    n_points: int = 64
    mass: float = 1.0
    mode: str = "both"
    compare: bool = True
    misaligned_demo: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InvalidArgument(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise InvalidArgument(f"format must be one of {FORMATS}")
        if self.mode not in ("spectral", "conjugated", "both"):
            raise InvalidArgument("mode must be spectral, conjugated or both")
        if self.steps < 1 or self.cycle_steps < 1 or self.r_samples < 1:
            raise InvalidArgument("step counts must be positive")
        return self

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [[x.real, x.imag] if isinstance(x, complex) else x for x in v]
            out[f.name] = v
        return out

    def rng(self) -> np.random.Generator:
        """PCG64 generator seeded with ``seed``."""
        return np.random.Generator(np.random.PCG64(self.seed))


_PARSERS = {
    "command": str,
    "out": str,
    "format": str,
    "mode": str,
    "seed": parse_seed,
    "gauges": parse_name_list,
    "initial": parse_complex_pair,
    "fidelity_kicks": parse_int_list,
}


def _parser_for(name):
    if name in _PARSERS:
        return _PARSERS[name]
    default = RunConfig.__dataclass_fields__[name].type
    if default in ("bool",):
        return parse_bool
    if default in ("int",):
        return parse_int
    return parse_real


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))
BOOL_FIELDS = tuple(f.name for f in fields(RunConfig) if f.type == "bool")


def parse_value(key: str, text: str):
    if key not in FIELD_NAMES:
        raise InvalidArgument(f"unknown config key {key!r}")
    return _parser_for(key)(text)


def read_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise InvalidArgument(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = parse_value(key, value)
        except InvalidArgument as exc:
            raise InvalidArgument(f"{source}:{lineno}: {exc}") from exc
    return values


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return read_config_text(fh.read(), path)


def resolve(command: str, file_values: dict, overrides: dict) -> RunConfig:
    """Defaults, then the config file, then command-line overrides."""
    merged = dict(file_values)
    merged.update(overrides)
    if merged.get("command", command) != command:
        raise InvalidArgument(f"config is for {merged['command']!r}, not {command!r}")
    merged["command"] = command
    return replace(RunConfig(), **merged).validate()
