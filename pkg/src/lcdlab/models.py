"""Entry laws, their symmetrizations, and seeded sampling.

Every random object in the package is built from scalar entry laws: finite
atom lists or gaussians.  The module keeps laws exact (atom lists carry exact
float values and probabilities) so that downstream expectations over a
symmetrized law X - X' can be computed in closed form rather than by
simulation.

Reproducibility contract: all sampling goes through a SeedSpec, which derives
independent substreams from a 64-bit master seed via SeedSequence spawning.
Identical (model, seed, index) always yields bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, ConfigError

MAX_ATOMS = 64
MAX_CONVOLVED_ATOMS = MAX_ATOMS * MAX_ATOMS
_PROB_TOL = 1e-12

# Default second-moment budget multiplier for matrix models: E||A||_HS^2 is
# required to stay below K * rows * cols unless the caller declares otherwise.
DEFAULT_K = 2.0


@dataclass(frozen=True)
class EntryDistribution:
    """A scalar law: either a finite atom list or a gaussian.

    kind is "finite" or "gaussian".  Finite laws store parallel tuples
    (values, probs) with probs summing to 1 within 1e-12 and at most
    MAX_ATOMS atoms.  Gaussian laws store (mean, sigma) with sigma > 0.
    """

    kind: str
    values: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    mean_param: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind == "finite":
            if len(self.values) == 0 or len(self.values) != len(self.probs):
                raise ConfigError("finite law needs matching nonempty values/probs")
            if len(self.values) > MAX_ATOMS:
                raise BudgetError(
                    f"finite law has {len(self.values)} atoms, budget is {MAX_ATOMS}"
                )
            if any(p < 0 for p in self.probs):
                raise ConfigError("negative probability in finite law")
            if abs(sum(self.probs) - 1.0) > _PROB_TOL:
                raise ConfigError("finite law probabilities must sum to 1 within 1e-12")
            if len(set(self.values)) != len(self.values):
                raise ConfigError("duplicate atom values; merge them first")
        elif self.kind == "gaussian":
            if not (self.sigma > 0):
                raise ConfigError("gaussian law needs sigma > 0")
        else:
            raise ConfigError(f"unknown law kind {self.kind!r}")

    # -- constructors ----------------------------------------------------

    @staticmethod
    def finite(atoms: Iterable[tuple[float, float]]) -> "EntryDistribution":
        """Finite law from (value, prob) pairs; zero-prob atoms are dropped."""
        merged: dict[float, float] = {}
        for v, p in atoms:
            if p == 0.0:
                continue
            merged[float(v)] = merged.get(float(v), 0.0) + float(p)
        items = sorted(merged.items())
        return EntryDistribution(
            kind="finite",
            values=tuple(v for v, _ in items),
            probs=tuple(p for _, p in items),
        )

    @staticmethod
    def gaussian(sigma: float, mean: float = 0.0) -> "EntryDistribution":
        return EntryDistribution(kind="gaussian", mean_param=float(mean), sigma=float(sigma))

    @staticmethod
    def rademacher() -> "EntryDistribution":
        return EntryDistribution.finite([(-1.0, 0.5), (1.0, 0.5)])

    @staticmethod
    def bernoulli(p: float) -> "EntryDistribution":
        if not 0 < p < 1:
            raise ConfigError("bernoulli parameter must lie in (0,1)")
        return EntryDistribution.finite([(0.0, 1.0 - p), (1.0, p)])

    @staticmethod
    def point_mass(v: float) -> "EntryDistribution":
        return EntryDistribution.finite([(float(v), 1.0)])

    @staticmethod
    def uniform_atoms(values: Sequence[float]) -> "EntryDistribution":
        vals = list(values)
        return EntryDistribution.finite([(v, 1.0 / len(vals)) for v in vals])

    # -- moments ---------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def mean(self) -> float:
        if self.is_finite:
            return float(sum(v * p for v, p in zip(self.values, self.probs)))
        return self.mean_param

    def variance(self) -> float:
        if self.is_finite:
            m = self.mean()
            return float(sum(p * (v - m) ** 2 for v, p in zip(self.values, self.probs)))
        return self.sigma**2

    def second_moment(self) -> float:
        return self.variance() + self.mean() ** 2

    def shifted(self, delta: float) -> "EntryDistribution":
        """The law of xi + delta."""
        if delta == 0.0:
            return self
        if self.is_finite:
            return EntryDistribution.finite(
                [(v + delta, p) for v, p in zip(self.values, self.probs)]
            )
        return EntryDistribution.gaussian(self.sigma, self.mean_param + delta)

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.is_finite:
            vals = np.asarray(self.values)
            if len(vals) == 1:
                return np.full(shape, vals[0])
            probs = np.asarray(self.probs)
            # uniform atom lists can use the integer sampler, which is much
            # faster than choice-with-p on large blocks
            if np.allclose(probs, 1.0 / len(vals), rtol=0, atol=1e-15):
                idx = rng.integers(0, len(vals), size=shape)
            else:
                idx = rng.choice(len(vals), size=shape, p=probs)
            return vals[idx]
        out = rng.standard_normal(size=shape)
        if self.sigma != 1.0:
            out *= self.sigma
        if self.mean_param != 0.0:
            out += self.mean_param
        return out


@dataclass(frozen=True)
class SymmetrizedDistribution:
    """The law of X - X' for independent copies of an EntryDistribution.

    `law` is itself an EntryDistribution (exact convolution for finite
    inputs, N(0, 2 sigma^2) for gaussians); `base` is the original.
    Symmetrized laws are the arguments of expected squared lattice
    distances, so exactness here is what makes the LCD thresholds exact.
    """

    law: EntryDistribution
    base: EntryDistribution

    @property
    def is_finite(self) -> bool:
        return self.law.is_finite

    @property
    def values(self) -> tuple[float, ...]:
        return self.law.values

    @property
    def probs(self) -> tuple[float, ...]:
        return self.law.probs

    @property
    def sigma(self) -> float:
        return self.law.sigma

    def variance(self) -> float:
        return self.law.variance()

    def base_variance(self) -> float:
        return self.base.variance()

    def max_abs_support(self) -> float:
        """Largest |atom| for finite laws; 3 sigma effective width otherwise."""
        if self.is_finite:
            return max(abs(v) for v in self.values)
        return 3.0 * self.law.sigma

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.law.sample(rng, shape)


def symmetrize(dist: EntryDistribution) -> SymmetrizedDistribution:
    """Exact law of X - X'.

    Finite laws convolve atom-by-atom; values that collide after
    subtraction merge (IEEE subtraction is sign-symmetric, so the result is
    exactly symmetric about 0).  Gaussians map to N(0, 2 sigma^2).
    """
    if dist.is_finite:
        pairs: dict[float, float] = {}
        for v1, p1 in zip(dist.values, dist.probs):
            for v2, p2 in zip(dist.values, dist.probs):
                d = v1 - v2
                pairs[d] = pairs.get(d, 0.0) + p1 * p2
        if len(pairs) > MAX_CONVOLVED_ATOMS:
            raise BudgetError(
                f"symmetrized support has {len(pairs)} atoms, "
                f"budget is {MAX_CONVOLVED_ATOMS}"
            )
        items = sorted(pairs.items())
        law = EntryDistribution(
            kind="finite",
            values=tuple(v for v, _ in items),
            probs=tuple(p for _, p in items),
        )
        return SymmetrizedDistribution(law=law, base=dist)
    law = EntryDistribution.gaussian(dist.sigma * math.sqrt(2.0), 0.0)
    return SymmetrizedDistribution(law=law, base=dist)


def anticoncentration_level(dist: EntryDistribution) -> float:
    """sup_u P(|xi - u| < 1), the unit-window concentration of the law.

    The strict inequality matters for atom lists: a window of length 2 may
    touch two atoms at its endpoints (Rademacher at u = 0) without ever
    containing both in its interior.  For finite laws the sup equals the
    largest mass of a half-open window [a, a + 2) anchored at an atom; for
    gaussians the sup sits at the mean and equals 2 Phi(1/sigma) - 1.
    """
    if dist.is_finite:
        vals = np.asarray(dist.values)
        probs = np.asarray(dist.probs)
        order = np.argsort(vals)
        vals, probs = vals[order], probs[order]
        cum = np.concatenate([[0.0], np.cumsum(probs)])
        best = 0.0
        for i, v in enumerate(vals):
            j = np.searchsorted(vals, v + 2.0, side="left")
            best = max(best, cum[j] - cum[i])
        return float(best)
    # 2 Phi(1/sigma) - 1 without importing scipy here
    return float(math.erf(1.0 / (dist.sigma * math.sqrt(2.0))))


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a path of child indices.

    substream(i) mixes (master_seed, path, i) through numpy's SeedSequence,
    so distinct indices give independent, reproducible generators; child(...)
    extends the path for nested experiment structure.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= int(self.master_seed) < 2**64):
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    def substream(self, index: int) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=tuple(self.path) + (int(index),)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *indices: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, tuple(self.path) + tuple(int(i) for i in indices))


@dataclass(frozen=True)
class RandomVectorModel:
    """n independent coordinates, each with its own entry law."""

    entries: tuple[EntryDistribution, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ConfigError("vector model needs at least one coordinate")

    @staticmethod
    def iid(dist: EntryDistribution, n: int) -> "RandomVectorModel":
        return RandomVectorModel(entries=(dist,) * int(n))

    @staticmethod
    def from_entries(dists: Sequence[EntryDistribution]) -> "RandomVectorModel":
        return RandomVectorModel(entries=tuple(dists))

    @property
    def n(self) -> int:
        return len(self.entries)

    def second_moment(self) -> float:
        """E||X||^2."""
        return float(sum(d.second_moment() for d in self.entries))

    def total_variance(self) -> float:
        return float(sum(d.variance() for d in self.entries))

    def anticoncentration_level(self) -> float:
        return max(anticoncentration_level(d) for d in self.entries)

    def symmetrized(self) -> list[SymmetrizedDistribution]:
        cache: dict[EntryDistribution, SymmetrizedDistribution] = {}
        out = []
        for d in self.entries:
            if d not in cache:
                cache[d] = symmetrize(d)
            out.append(cache[d])
        return out


@dataclass(frozen=True)
class RandomMatrixModel:
    """rows x cols grid of independent entries with a broadcast law layout.

    broadcast is one of "single" (one shared law), "per-row" (laws has
    `rows` laws), "per-column" (`cols` laws), or "grid" (row-major
    rows*cols laws).  hs_budget bounds E||A||_HS^2; construction fails if
    the declared laws exceed it.
    """

    rows: int
    cols: int
    broadcast: str
    laws: tuple[EntryDistribution, ...]
    hs_budget: float

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ConfigError("matrix model needs positive shape")
        need = {
            "single": 1,
            "per-row": self.rows,
            "per-column": self.cols,
            "grid": self.rows * self.cols,
        }
        if self.broadcast not in need:
            raise ConfigError(f"unknown broadcast mode {self.broadcast!r}")
        if len(self.laws) != need[self.broadcast]:
            raise ConfigError(
                f"broadcast {self.broadcast!r} needs {need[self.broadcast]} laws, "
                f"got {len(self.laws)}"
            )
        if self.expected_hs_sq() > self.hs_budget * (1 + 1e-12) + 1e-12:
            raise ConfigError(
                f"E||A||_HS^2 = {self.expected_hs_sq():.6g} exceeds declared "
                f"budget {self.hs_budget:.6g}"
            )

    @staticmethod
    def iid(dist: EntryDistribution, rows: int, cols: int, hs_budget: float | None = None):
        if hs_budget is None:
            hs_budget = DEFAULT_K * rows * cols
        return RandomMatrixModel(rows, cols, "single", (dist,), float(hs_budget))

    @staticmethod
    def per_column(dists: Sequence[EntryDistribution], rows: int, hs_budget: float | None = None):
        dists = tuple(dists)
        if hs_budget is None:
            hs_budget = DEFAULT_K * rows * len(dists)
        return RandomMatrixModel(rows, len(dists), "per-column", dists, float(hs_budget))

    @staticmethod
    def per_row(dists: Sequence[EntryDistribution], cols: int, hs_budget: float | None = None):
        dists = tuple(dists)
        if hs_budget is None:
            hs_budget = DEFAULT_K * len(dists) * cols
        return RandomMatrixModel(len(dists), cols, "per-row", dists, float(hs_budget))

    @staticmethod
    def from_grid(grid: Sequence[Sequence[EntryDistribution]], hs_budget: float | None = None):
        rows = len(grid)
        cols = len(grid[0])
        flat = []
        for row in grid:
            if len(row) != cols:
                raise ConfigError("ragged law grid")
            flat.extend(row)
        if hs_budget is None:
            hs_budget = DEFAULT_K * rows * cols
        return RandomMatrixModel(rows, cols, "grid", tuple(flat), float(hs_budget))

    def law_at(self, i: int, j: int) -> EntryDistribution:
        if self.broadcast == "single":
            return self.laws[0]
        if self.broadcast == "per-row":
            return self.laws[i]
        if self.broadcast == "per-column":
            return self.laws[j]
        return self.laws[i * self.cols + j]

    def expected_hs_sq(self) -> float:
        if self.broadcast == "single":
            return self.rows * self.cols * self.laws[0].second_moment()
        if self.broadcast == "per-row":
            return self.cols * sum(d.second_moment() for d in self.laws)
        if self.broadcast == "per-column":
            return self.rows * sum(d.second_moment() for d in self.laws)
        return float(sum(d.second_moment() for d in self.laws))

    def anticoncentration_level(self) -> float:
        return max(anticoncentration_level(d) for d in set(self.laws))

    def column_symmetrized(self, j: int) -> list[SymmetrizedDistribution]:
        """Per-coordinate symmetrized laws of column j (length = rows)."""
        cache: dict[EntryDistribution, SymmetrizedDistribution] = {}
        out = []
        for i in range(self.rows):
            d = self.law_at(i, j)
            if d not in cache:
                cache[d] = symmetrize(d)
            out.append(cache[d])
        return out


# -- sampling -------------------------------------------------------------


def _runs(laws: Sequence[EntryDistribution]):
    """Consecutive runs of equal laws, as (start, stop, law) triples."""
    out = []
    start = 0
    for i in range(1, len(laws) + 1):
        if i == len(laws) or laws[i] != laws[start]:
            out.append((start, i, laws[start]))
            start = i
    return out


def sample_vector_block(
    model: RandomVectorModel, rng: np.random.Generator, count: int
) -> np.ndarray:
    """(count, n) draws; coordinates are filled in order, grouped by law."""
    out = np.empty((count, model.n))
    for start, stop, law in _runs(model.entries):
        out[:, start:stop] = law.sample(rng, (count, stop - start))
    return out


def sample_matrix_block(
    model: RandomMatrixModel, rng: np.random.Generator, count: int
) -> np.ndarray:
    """(count, rows, cols) draws; fill order is fixed by the broadcast mode."""
    out = np.empty((count, model.rows, model.cols))
    if model.broadcast == "single":
        out[...] = model.laws[0].sample(rng, (count, model.rows, model.cols))
    elif model.broadcast == "per-row":
        for start, stop, law in _runs(model.laws):
            out[:, start:stop, :] = law.sample(rng, (count, stop - start, model.cols))
    elif model.broadcast == "per-column":
        for start, stop, law in _runs(model.laws):
            out[:, :, start:stop] = law.sample(rng, (count, model.rows, stop - start))
    else:  # grid: row-major cell runs
        flat = out.reshape(count, model.rows * model.cols)
        for start, stop, law in _runs(model.laws):
            flat[:, start:stop] = law.sample(rng, (count, stop - start))
    return out


def sample_vector(model: RandomVectorModel, seed: SeedSpec, index: int) -> np.ndarray:
    """One n-vector from substream `index`; a pure function of its arguments."""
    return sample_vector_block(model, seed.substream(index), 1)[0]


def sample_matrix(model: RandomMatrixModel, seed: SeedSpec, index: int) -> np.ndarray:
    """One rows x cols matrix from substream `index`."""
    return sample_matrix_block(model, seed.substream(index), 1)[0]


# -- config-facing law parsing ---------------------------------------------


def distribution_from_spec(spec: dict) -> EntryDistribution:
    """Build an entry law from a JSON-compatible dict.

    Recognized kinds: "gaussian" {sigma, mean-shift?}, "finite-support"
    {atoms: [[value, prob], ...], mean-shift?}, and the shorthands
    "rademacher", "bernoulli" {p}, "uniform" {values}.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("distribution spec must be a dict with a 'kind' field")
    kind = spec["kind"]
    shift = float(spec.get("mean-shift", 0.0))
    try:
        if kind == "gaussian":
            base = EntryDistribution.gaussian(float(spec["sigma"]))
        elif kind in ("finite-support", "finite"):
            atoms = [(float(v), float(p)) for v, p in spec["atoms"]]
            base = EntryDistribution.finite(atoms)
        elif kind == "rademacher":
            base = EntryDistribution.rademacher()
        elif kind == "bernoulli":
            base = EntryDistribution.bernoulli(float(spec["p"]))
        elif kind == "uniform":
            base = EntryDistribution.uniform_atoms([float(v) for v in spec["values"]])
        else:
            raise ConfigError(f"unknown distribution kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"distribution spec missing field {exc}") from exc
    return base.shifted(shift)
