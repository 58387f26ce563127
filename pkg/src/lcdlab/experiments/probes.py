"""Qualitative probes: compressible envelopes, tensorization, unstructured
fractions.

Each probe exercises one step of the small-ball pipeline at desk scale and
reports what it saw; none of them asserts a theorem (the regimes where the
statements bite are far beyond these sizes), but each records whether its
hypotheses held so trends can be read honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import Constants, DEFAULT_CONSTANTS
from ..errors import ConfigError
from ..geometry import SphereParams, compressibility
from ..lcd import LcdQuery, LcdVariant, lcd_infimum
from ..models import (
    EntryDistribution,
    RandomMatrixModel,
    SeedSpec,
    sample_matrix_block,
    symmetrize,
)
from ..nets import sample_structured_lattice


# --- compressible vectors vs a random matrix ---------------------------------


@dataclass(frozen=True)
class CompressibleProbeReport:
    """Smallest normalized image norm over compressible test vectors.

    min_ratios[i] = min over the i-th trial's test vectors of
    ||A x|| / sqrt(rows).  fraction_below is measured against c_threshold
    when one is supplied.
    """

    rows: int
    cols: int
    trials: int
    samples_per_trial: int
    min_ratios: np.ndarray = field(compare=False)
    c_threshold: float | None
    fraction_below: float | None


def run_compressible_probe(
    a_model: RandomMatrixModel,
    params: SphereParams,
    trials: int,
    samples_per_trial: int,
    seed: SeedSpec,
    c_threshold: float | None = None,
) -> CompressibleProbeReport:
    """Probe inf{||Ax||/sqrt(rows) : x compressible} by random search.

    Test vectors are unit perturbations of floor(delta*n)-sparse unit
    vectors with perturbation norm below rho/3, so each is certified
    compressible (checked); the per-trial minimum is a random upper bound
    of the true envelope.
    """
    n = a_model.cols
    k = params.sparsity(n)
    if k < 1:
        raise ConfigError("floor(delta*cols) must be at least 1")
    if trials < 1 or samples_per_trial < 1:
        raise ConfigError("trials and samples_per_trial must be positive")
    rng_a = seed.child(1).substream(0)
    rng_x = seed.child(2).substream(0)
    mins = np.empty(trials)
    for i in range(trials):
        A = sample_matrix_block(a_model, rng_a, 1)[0]
        best = math.inf
        for _ in range(samples_per_trial):
            x = _compressible_direction(rng_x, n, k, params)
            r = float(np.linalg.norm(A @ x)) / math.sqrt(a_model.rows)
            best = min(best, r)
        mins[i] = best
    frac = None
    if c_threshold is not None:
        frac = float(np.mean(mins < c_threshold))
    return CompressibleProbeReport(
        rows=a_model.rows,
        cols=n,
        trials=trials,
        samples_per_trial=samples_per_trial,
        min_ratios=mins,
        c_threshold=c_threshold,
        fraction_below=frac,
    )


def _compressible_direction(
    rng: np.random.Generator, n: int, k: int, params: SphereParams
) -> np.ndarray:
    support = rng.choice(n, size=k, replace=False)
    y = np.zeros(n)
    y[support] = rng.standard_normal(k)
    y /= np.linalg.norm(y)
    z = rng.standard_normal(n)
    z *= (rng.random() * params.rho / 3.0) / np.linalg.norm(z)
    x = y + z
    x /= np.linalg.norm(x)
    # ||x - y||/||y + z|| <= 2||z|| <= 2 rho/3 < rho, so x tests compressible
    assert compressibility(x, params).is_compressible
    return x


# --- tensorization of a one-dimensional small-ball bound ----------------------


@dataclass(frozen=True)
class TensorizationRow:
    t: float
    phat: float
    stderr: float
    c_t: float | None  # phat^(1/d) / (K t), None below the MC floor


@dataclass(frozen=True)
class TensorizationReport:
    """Fit of P(||xi||_2 <= t sqrt(d)) against the (C K t)^d tensor bound.

    Requires the per-coordinate hypothesis P(|xi| <= eps) <= K eps on
    eps >= eps0; c_fit is the largest per-row constant and flatness_ratio
    (max/min over usable rows) should be near 1 when the power law holds.
    """

    d: int
    k_used: float
    rows: tuple[TensorizationRow, ...]
    c_fit: float
    flatness_ratio: float
    trials: int


def empirical_small_ball_constant(
    dist: EntryDistribution, eps0: float = 1e-6
) -> float:
    """Smallest K with P(|xi| <= eps) <= K eps for all eps >= eps0.

    For finite laws the ratio is maximized at atom radii (and at eps0);
    an atom at zero forces K ~ P(xi=0)/eps0, which callers should treat as
    a failed hypothesis.
    """
    if dist.kind == "gaussian":
        # the centered window is the worst case over means, so this K is
        # valid (if conservative) for mean-shifted gaussians too; the ratio
        # decreases in eps, so the supremum sits at eps0
        sigma = dist.sigma
        best = 0.0
        for eps in [eps0, sigma / 8, sigma / 2, sigma, 2 * sigma]:
            best = max(best, math.erf(eps / (sigma * math.sqrt(2.0))) / eps)
        return best
    vals = np.asarray(dist.values)
    probs = np.asarray(dist.probs)
    radii = np.unique(np.abs(vals))
    best = 0.0
    for r in np.concatenate([[eps0], radii[radii >= eps0]]):
        mass = float(probs[np.abs(vals) <= r * (1 + 1e-12)].sum())
        best = max(best, mass / r)
    return best


def run_tensorization_probe(
    dist: EntryDistribution,
    d: int,
    t_grid,
    trials: int,
    seed: SeedSpec,
    K: float | None = None,
    eps0: float = 1e-6,
    k_cap: float = 100.0,
) -> TensorizationReport:
    """Monte Carlo check that d-fold tensorization decays like (C K t)^d."""
    if d < 1:
        raise ConfigError("d must be positive")
    if trials < 1000:
        raise ConfigError("need trials >= 1000")
    k_emp = empirical_small_ball_constant(dist, eps0)
    if K is None:
        if k_emp > k_cap:
            raise ConfigError(
                f"per-coordinate small-ball hypothesis fails: empirical "
                f"K = {k_emp:.3g} exceeds cap {k_cap:g} (atom at 0?)"
            )
        k_used = k_emp
    else:
        if k_emp > K * (1 + 1e-9):
            raise ConfigError(
                f"supplied K = {K:g} is below the empirical constant {k_emp:.3g}"
            )
        k_used = K
    rng = seed.substream(0)
    x = dist.sample(rng, (trials, d))
    sq = np.sum(x * x, axis=1)
    rows = []
    usable = []
    for t in t_grid:
        if t <= 0:
            raise ConfigError("t values must be positive")
        phat = float(np.mean(sq <= (t * t * d) * (1 + 1e-12)))
        stderr = math.sqrt(phat * (1 - phat) / trials)
        if phat > 10.0 / trials:
            c_t = phat ** (1.0 / d) / (k_used * t)
            usable.append(c_t)
        else:
            c_t = None
        rows.append(TensorizationRow(float(t), phat, stderr, c_t))
    if not usable:
        raise ConfigError("every t fell below the Monte Carlo floor")
    return TensorizationReport(
        d=d,
        k_used=k_used,
        rows=tuple(rows),
        c_fit=max(usable),
        flatness_ratio=max(usable) / min(usable),
        trials=trials,
    )


# --- unstructured fraction of the structured lattice --------------------------


@dataclass(frozen=True)
class UnstructuredProbeReport:
    """Fraction of structured-lattice points with a denominator below the
    ceiling min((2L/u) exp(n (gamma/L)^2), min_i 1/lambda_i).

    hypothesis_ok records whether the second-moment smallness condition
    E||X||^2 <= (1 - b) delta gamma^2 n^2 / 8 held (it will not at desk
    scale); the fraction is still informative as a trend across n.
    """

    n: int
    threshold: float
    trials: int
    fraction_below: float
    stderr: float
    censored: int
    hypothesis_ok: bool
    acceptance_rate: float


def run_unstructured_probe(
    lambdas,
    dist: EntryDistribution,
    L: float,
    u: float,
    gamma: float,
    trials: int,
    seed: SeedSpec,
    constants: Constants = DEFAULT_CONSTANTS,
) -> UnstructuredProbeReport:
    """Sample the structured lattice and solve the randomized-logarithmic
    denominator of each point, censored at the two-term ceiling."""
    lam = np.asarray(lambdas, dtype=float)
    n = lam.size
    if not (gamma > 0):
        raise ConfigError("gamma must be positive")
    growth = (2.0 * L / u) * math.exp(min(n * (gamma / L) ** 2, 700.0))
    threshold = min(growth, float(np.min(1.0 / lam)))
    params = constants.sphere_params()
    sample = sample_structured_lattice(lam, params, trials, seed.child(1))
    law = symmetrize(dist)
    variant = LcdVariant.randomized_logarithmic(L, u)
    censored = 0
    below = 0
    for i in range(sample.count):
        res = lcd_infimum(
            LcdQuery(variant, sample.points[i], law, theta_max=threshold)
        )
        if res.censored:
            censored += 1
        else:
            below += 1
    frac = below / trials
    stderr = math.sqrt(frac * (1 - frac) / trials)
    second_moment = dist.second_moment() * n
    budget = (1.0 - constants.b) * constants.delta * gamma**2 * n**2 / 8.0
    return UnstructuredProbeReport(
        n=n,
        threshold=threshold,
        trials=trials,
        fraction_below=frac,
        stderr=stderr,
        censored=censored,
        hypothesis_ok=second_moment <= budget,
        acceptance_rate=sample.acceptance_rate,
    )
