"""Distance-to-random-span experiments and power-law slope fits.

For each (d, t) cell: draw a random n x (n-d) matrix A and an independent
random vector X, measure how often dist(X, span A) <= t*sqrt(d), and record
the hit fraction with its binomial standard error.  The decay of that
fraction in t should follow (C t)^d plus an exponentially small additive
term; fit_power_law recovers the exponent and the constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import Constants, DEFAULT_CONSTANTS, constants_from_dict
from ..errors import ConfigError
from ..geometry import distance_to_colspan
from ..models import (
    EntryDistribution,
    RandomMatrixModel,
    RandomVectorModel,
    SeedSpec,
    distribution_from_spec,
    sample_matrix_block,
    sample_vector_block,
)

BLOCK_SIZE = 1024

CSV_HEADER = "n,d,t,trials,hits,phat,stderr,seed,flags"


@dataclass(frozen=True)
class ExperimentRecord:
    """One (n, d, t) cell of a distance experiment."""

    n: int
    d: int
    t: float
    trials: int
    hits: int
    phat: float
    stderr: float
    seed: int
    flags: tuple[str, ...]


@dataclass(frozen=True)
class DistanceExperimentConfig:
    """Inputs of one experiment sweep.

    x_model fixes the law of X in R^n; a_pattern is cycled across the
    n - d columns of A for each d (a single law gives an iid ensemble).
    Sampling is deterministic in (seed, n, d_list, t_grid, trials): each
    (d, t) cell draws from its own substream pair, so cells are independent
    and any subset of the sweep reproduces identical rows.
    """

    n: int
    d_list: tuple[int, ...]
    t_grid: tuple[float, ...]
    trials: int
    x_model: RandomVectorModel
    a_pattern: tuple[EntryDistribution, ...]
    seed: SeedSpec
    constants: Constants = DEFAULT_CONSTANTS
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.x_model.n != self.n:
            raise ConfigError("x_model length must equal n")
        if not self.d_list:
            raise ConfigError("d_list must be nonempty")
        for d in self.d_list:
            if not (1 <= d < self.n):
                raise ConfigError(f"need 1 <= d < n, got d={d}")
        if not self.t_grid:
            raise ConfigError("t_grid must be nonempty")
        if any(t < 0 for t in self.t_grid):
            raise ConfigError("t values must be nonnegative")
        if list(self.t_grid) != sorted(self.t_grid):
            raise ConfigError("t_grid must be ascending")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not self.a_pattern:
            raise ConfigError("a_pattern must be nonempty")
        if self.block_size < 1:
            raise ConfigError("block_size must be positive")

    @classmethod
    def iid(
        cls,
        n: int,
        d_list,
        t_grid,
        trials: int,
        x_dist: EntryDistribution,
        a_dist: EntryDistribution,
        seed: SeedSpec,
        constants: Constants = DEFAULT_CONSTANTS,
        block_size: int = BLOCK_SIZE,
    ) -> "DistanceExperimentConfig":
        return cls(
            n=n,
            d_list=tuple(int(d) for d in d_list),
            t_grid=tuple(float(t) for t in t_grid),
            trials=trials,
            x_model=RandomVectorModel.iid(x_dist, n),
            a_pattern=(a_dist,),
            seed=seed,
            constants=constants,
            block_size=block_size,
        )

    @classmethod
    def from_dict(cls, data: dict, seed: SeedSpec | None = None):
        """Build from a JSON-style dict: keys n, d, t_grid, trials, x_law,
        a_law (one spec or a list cycled over columns), seed, constants."""
        known = {"n", "d", "t_grid", "trials", "x_law", "a_law", "seed",
                 "constants", "block_size"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("n", "d", "t_grid", "trials", "x_law", "a_law"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")
        n = int(data["n"])
        d_list = data["d"] if isinstance(data["d"], list) else [data["d"]]
        x_spec = data["x_law"]
        if isinstance(x_spec, list):
            x_model = RandomVectorModel.from_entries(
                [distribution_from_spec(s) for s in x_spec]
            )
        else:
            x_model = RandomVectorModel.iid(distribution_from_spec(x_spec), n)
        a_spec = data["a_law"]
        if isinstance(a_spec, list):
            a_pattern = tuple(distribution_from_spec(s) for s in a_spec)
        else:
            a_pattern = (distribution_from_spec(a_spec),)
        if seed is None:
            seed = SeedSpec(int(data.get("seed", 0)))
        return cls(
            n=n,
            d_list=tuple(int(d) for d in d_list),
            t_grid=tuple(float(t) for t in data["t_grid"]),
            trials=int(data["trials"]),
            x_model=x_model,
            a_pattern=a_pattern,
            seed=seed,
            constants=constants_from_dict(data.get("constants")),
            block_size=int(data.get("block_size", BLOCK_SIZE)),
        )

    def matrix_model(self, d: int) -> RandomMatrixModel:
        """The A-ensemble at codimension parameter d (columns cycled from
        the pattern; the budget check is reported as a flag, not enforced)."""
        cols = self.n - d
        laws = tuple(self.a_pattern[j % len(self.a_pattern)] for j in range(cols))
        if len(set(laws)) == 1:
            return RandomMatrixModel.iid(laws[0], self.n, cols, hs_budget=math.inf)
        return RandomMatrixModel.per_column(laws, self.n, hs_budget=math.inf)


def _cell_flags(cfg: DistanceExperimentConfig, d: int, a_model: RandomMatrixModel):
    c = cfg.constants
    flags = set()
    if (
        cfg.x_model.anticoncentration_level() > c.b
        or a_model.anticoncentration_level() > c.b
    ):
        flags.add("anticoncentration")
    if cfg.x_model.second_moment() > c.K * cfg.n * (1 + 1e-12):
        flags.add("second-moment")
    N = cfg.n - d
    if a_model.expected_hs_sq() > c.K * cfg.n * N * (1 + 1e-12):
        flags.add("hs-budget")
    if d > c.lambda_guard * cfg.n / math.log(cfg.n):
        flags.add("out-of-theorem-range")
    return tuple(sorted(flags))


def run_distance_experiment(cfg: DistanceExperimentConfig) -> list[ExperimentRecord]:
    """Run the sweep; rows ordered by (d_list position, t_grid position).

    Each cell (d_idx, t_idx) draws A from substream child(1, d_idx, t_idx)
    and X from child(2, d_idx, t_idx), in blocks of block_size, and counts
    dist(X, span A) <= t * sqrt(d).
    """
    records: list[ExperimentRecord] = []
    for d_idx, d in enumerate(cfg.d_list):
        a_model = cfg.matrix_model(d)
        flags = _cell_flags(cfg, d, a_model)
        for t_idx, t in enumerate(cfg.t_grid):
            rng_a = cfg.seed.child(1, d_idx, t_idx).substream(0)
            rng_x = cfg.seed.child(2, d_idx, t_idx).substream(0)
            radius = t * math.sqrt(d)
            hits = 0
            remaining = cfg.trials
            while remaining > 0:
                b = min(cfg.block_size, remaining)
                A = sample_matrix_block(a_model, rng_a, b)
                X = sample_vector_block(cfg.x_model, rng_x, b)
                dists = distance_to_colspan(A, X)
                hits += int(np.count_nonzero(dists <= radius))
                remaining -= b
            phat = hits / cfg.trials
            stderr = math.sqrt(phat * (1 - phat) / cfg.trials)
            records.append(
                ExperimentRecord(
                    n=cfg.n,
                    d=d,
                    t=float(t),
                    trials=cfg.trials,
                    hits=hits,
                    phat=phat,
                    stderr=stderr,
                    seed=cfg.seed.master_seed,
                    flags=flags,
                )
            )
    return records


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log phat = slope * log t + intercept.

    c_fit = exp(intercept / d) is the constant in the (C t)^d reading;
    rows at t = 0 or below the Monte Carlo floor phat <= 10/trials are
    excluded.
    """

    slope: float
    intercept: float
    c_fit: float
    r_squared: float
    rows_used: int
    t_window: tuple[float, float]
    d: int


def fit_power_law(records: list[ExperimentRecord], min_rows: int = 4) -> PowerLawFit:
    if not records:
        raise ConfigError("no records to fit")
    keys = {(r.n, r.d) for r in records}
    if len(keys) != 1:
        raise ConfigError("fit needs records from a single (n, d) group")
    d = records[0].d
    usable = [r for r in records if r.t > 0 and r.phat > 10.0 / r.trials]
    if len(usable) < min_rows:
        raise ConfigError(
            f"only {len(usable)} rows above the Monte Carlo floor "
            f"(need {min_rows})"
        )
    x = np.log([r.t for r in usable])
    y = np.log([r.phat for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(
        slope=float(slope),
        intercept=float(intercept),
        c_fit=float(math.exp(intercept / d)),
        r_squared=r2,
        rows_used=len(usable),
        t_window=(min(r.t for r in usable), max(r.t for r in usable)),
        d=d,
    )
