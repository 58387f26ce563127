"""Frozen numerical constants and JSON config handling.

Every tunable that the checks depend on lives in one Constants object so a
run can be reproduced from its config alone.  JSON configs are plain dicts;
unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .geometry import SphereParams


@dataclass(frozen=True)
class Constants:
    """Default parameters shared across solvers, audits and experiments.

    b: anticoncentration ceiling (entry laws must have level <= b);
    K: second-moment budget factor (E||X||^2 <= K n, E||A||_HS^2 <= K n N);
    delta, rho: compressibility parameters;
    u: default denominator closeness parameter;
    lambda_guard: dimension guard d <= lambda_guard * n / log n;
    esseen_C1: constant in the Esseen integral bound;
    smallball_C: constant in the closed-form small-ball bounds.
    """

    b: float = 0.9
    K: float = 2.0
    delta: float = 0.1
    rho: float = 0.3
    u: float = 0.25
    lambda_guard: float = 0.1
    esseen_C1: float = 1.0
    smallball_C: float = 1.0

    def __post_init__(self):
        if not (0 < self.b < 1):
            raise ConfigError("b must lie in (0,1)")
        if not (self.K > 0):
            raise ConfigError("K must be positive")
        if not (0 < self.delta < 1) or not (0 < self.rho < 1):
            raise ConfigError("delta and rho must lie in (0,1)")
        if not (0 < self.u < 1):
            raise ConfigError("u must lie in (0,1)")
        if not (self.lambda_guard > 0):
            raise ConfigError("lambda_guard must be positive")
        if not (self.esseen_C1 > 0) or not (self.smallball_C > 0):
            raise ConfigError("constants must be positive")

    def sphere_params(self) -> SphereParams:
        return SphereParams(delta=self.delta, rho=self.rho)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONSTANTS = Constants()


def constants_from_dict(data: dict | None) -> Constants:
    if not data:
        return DEFAULT_CONSTANTS
    known = {f.name for f in fields(Constants)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown constants: {sorted(unknown)}")
    return Constants(**data)


def load_config(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {p} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return data
