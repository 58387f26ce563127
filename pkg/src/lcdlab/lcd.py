"""Least common denominators: four variants and a censored infimum solver.

A vector v has arithmetic structure when some dilation theta*v lies close to
the integer lattice.  Each variant formalizes "close" differently:

  essential                dist(theta*v, Z^n)            < min(u*||theta*v||, L)
  logarithmic              dist(theta*v, Z^n)            < L*sqrt(log+(u*||theta*v||/L))
  randomized               E dist^2(theta*(v*X), Z^n)    < min(u*||theta*v||^2, L^2)
  randomized-logarithmic   E dist^2(theta*(v*X), Z^n)    < L^2*log+(u*||theta*v||/L)

where v*X is the coordinatewise product with a symmetrized random vector and
log+ = max(0, log).  The LCD is the infimum of theta > 0 satisfying the
inequality; solvers search (0, theta_max] on a grid fine enough to see every
crossing, refine by bisection, and report censoring when no crossing exists
below the ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ResolutionError
from .models import (
    EntryDistribution,
    SeedSpec,
    SymmetrizedDistribution,
    symmetrize,
)

VARIANTS = ("essential", "logarithmic", "randomized", "randomized-logarithmic")

#: a crossing must beat the threshold by this absolute slack to count
CROSSING_SLACK = 1e-12

DEFAULT_BISECT_TOL = 1e-9

_SCAN_CHUNK = 8192

# --- expected squared distance to Z under a centered gaussian -------------
# For c >= 0, E dist^2(c*G, Z) with G standard normal has the rapidly
# convergent theta-series form
#   1/12 + sum_{k>=1} (-1)^k / (pi^2 k^2) * exp(-2 pi^2 k^2 c^2),
# while for small c the wrap-around is negligible and the value is c^2 up to
# an error below 1e-22 (first correction term at c = 0.05).
_GAUSS_SERIES_KMAX = 70
_GAUSS_SMALL_C = 0.05
_K_RANGE = np.arange(1.0, _GAUSS_SERIES_KMAX + 1.0)
_K_COEF = ((-1.0) ** np.arange(1, _GAUSS_SERIES_KMAX + 1)) / (np.pi**2 * _K_RANGE**2)


def gaussian_lattice_sq(c):
    """E dist^2(c*G, Z) for standard normal G, vectorized in c."""
    c_arr = np.abs(np.asarray(c, dtype=float))
    scalar = c_arr.ndim == 0
    c_arr = np.atleast_1d(c_arr)
    out = np.empty_like(c_arr)
    small = c_arr < _GAUSS_SMALL_C
    out[small] = c_arr[small] ** 2
    big = ~small
    if np.any(big):
        cb = c_arr[big]
        ex = np.exp(-2.0 * np.pi**2 * np.square(np.outer(cb, _K_RANGE)))
        out[big] = 1.0 / 12.0 + ex @ _K_COEF
    return float(out[0]) if scalar else out


# --- variants and queries --------------------------------------------------


@dataclass(frozen=True)
class LcdVariant:
    """One of the four denominator variants with its (L, u) parameters."""

    tag: str
    L: float
    u: float

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise ConfigError(f"unknown variant {self.tag!r}")
        if not (self.L > 0):
            raise ConfigError("L must be positive")
        if not (0 < self.u < 1):
            raise ConfigError("u must lie in (0,1)")

    @classmethod
    def essential(cls, L: float, u: float) -> "LcdVariant":
        return cls("essential", L, u)

    @classmethod
    def logarithmic(cls, L: float, u: float) -> "LcdVariant":
        return cls("logarithmic", L, u)

    @classmethod
    def randomized(cls, L: float, u: float) -> "LcdVariant":
        return cls("randomized", L, u)

    @classmethod
    def randomized_logarithmic(cls, L: float, u: float) -> "LcdVariant":
        return cls("randomized-logarithmic", L, u)

    @property
    def is_randomized(self) -> bool:
        return self.tag in ("randomized", "randomized-logarithmic")

    @property
    def has_log_threshold(self) -> bool:
        return self.tag in ("logarithmic", "randomized-logarithmic")


LawInput = SymmetrizedDistribution | EntryDistribution | Sequence


@dataclass(frozen=True)
class LcdQuery:
    """A solve request: variant, direction vector, laws, search controls.

    grid_step=None lets the solver pick the largest step guaranteed not to
    skip a crossing; an explicit coarser step raises ResolutionError.
    """

    variant: LcdVariant
    v: np.ndarray
    law: LawInput | None = None
    theta_max: float = 100.0
    grid_step: float | None = None
    bisect_tol: float = DEFAULT_BISECT_TOL

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.v.ndim != 1 or self.v.size == 0:
            raise ConfigError("v must be a nonempty vector")
        if not (self.theta_max > 0):
            raise ConfigError("theta_max must be positive")
        if self.grid_step is not None and not (0 < self.grid_step < self.theta_max):
            raise ConfigError("grid_step must lie in (0, theta_max)")
        if not (0 < self.bisect_tol < self.theta_max):
            raise ConfigError("bisect_tol must lie in (0, theta_max)")
        if self.variant.is_randomized and self.law is None:
            raise ConfigError(f"{self.variant.tag} LCD needs a coordinate law")


@dataclass(frozen=True)
class LcdResult:
    """Solver outcome.

    value is the smallest certified theta with the defining inequality
    strict, located to within bisect_tol; censored means no crossing was
    found on (0, theta_max] and value == theta_max.  crossing_residual is
    |lhs - rhs| at value (small when uncensored; diagnostic when censored).
    witness carries variant-specific extra data (column index or direction).
    """

    value: float
    censored: bool
    crossing_residual: float
    theta_max: float
    witness: object = None

    def __post_init__(self):
        if self.censored and self.value != self.theta_max:
            raise ConfigError("censored result must sit at theta_max")


def _normalize_laws(n: int, law: LawInput) -> list[SymmetrizedDistribution]:
    """Coerce a law argument to one symmetrized law per coordinate."""

    def one(x) -> SymmetrizedDistribution:
        if isinstance(x, SymmetrizedDistribution):
            return x
        if isinstance(x, EntryDistribution):
            return symmetrize(x)
        raise ConfigError(f"cannot interpret {type(x).__name__} as a coordinate law")

    if isinstance(law, (SymmetrizedDistribution, EntryDistribution)):
        return [one(law)] * n
    laws = [one(x) for x in law]
    if len(laws) != n:
        raise ConfigError(f"got {len(laws)} laws for {n} coordinates")
    return laws


# --- left-hand sides -------------------------------------------------------


class _SqDistEvaluator:
    """E dist^2(theta * (v ∘ Xbar), Z^n) as a vectorized function of theta.

    Finite coordinates contribute sum_j w_j * frac2(theta * c_j) over the
    flattened atoms c_j = v_i * s; gaussian coordinates contribute the
    theta-series kernel at scale |v_i| * sigma_bar_i.
    """

    def __init__(self, v: np.ndarray, laws: Sequence[SymmetrizedDistribution]):
        coeffs: list[float] = []
        weights: list[float] = []
        gscales: list[float] = []
        for vi, law in zip(v, laws):
            if vi == 0.0:
                continue
            if law.is_finite:
                for s, p in zip(law.values, law.probs):
                    c = vi * s
                    if c != 0.0:
                        coeffs.append(c)
                        weights.append(p)
            else:
                gscales.append(abs(vi) * law.sigma)
        self.coeffs = np.asarray(coeffs)
        self.weights = np.asarray(weights)
        self.gscales = np.asarray(gscales)

    def __call__(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        out = np.zeros(thetas.shape)
        if self.coeffs.size:
            x = np.outer(thetas, self.coeffs)
            np.subtract(x, np.rint(x), out=x)
            np.square(x, out=x)
            out += x @ self.weights
        if self.gscales.size:
            c = np.abs(np.outer(thetas, self.gscales))
            out += gaussian_lattice_sq(c).sum(axis=1)
        return out


class _PointDistEvaluator:
    """dist(theta * v, Z^n) as a vectorized function of theta."""

    def __init__(self, v: np.ndarray):
        self.v = v[v != 0.0]

    def __call__(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        if self.v.size == 0:
            return np.zeros(thetas.shape)
        x = np.outer(thetas, self.v)
        np.subtract(x, np.rint(x), out=x)
        np.square(x, out=x)
        return np.sqrt(x.sum(axis=1))


def expected_sq_dist(
    theta: float,
    v: np.ndarray,
    laws: LawInput,
    mode: str = "exact",
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """E dist^2(theta * (v ∘ Xbar), Z^n), exactly or by Monte Carlo."""
    v = np.asarray(v, dtype=float)
    laws_n = _normalize_laws(v.size, laws)
    if mode == "exact":
        return float(_SqDistEvaluator(v, laws_n)(np.array([theta]))[0])
    if mode == "mc":
        mean, _ = expected_sq_dist_mc(theta, v, laws_n, samples, rng)
        return mean
    raise ConfigError(f"unknown mode {mode!r}")


def expected_sq_dist_mc(
    theta: float,
    v: np.ndarray,
    laws: LawInput,
    samples: int,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate of E dist^2 with its standard error."""
    v = np.asarray(v, dtype=float)
    laws_n = _normalize_laws(v.size, laws)
    if rng is None:
        rng = SeedSpec(0).substream(0)
    if samples < 2:
        raise ConfigError("need at least 2 samples")
    total = np.zeros(samples)
    for vi, law in zip(v, laws_n):
        if vi == 0.0:
            continue
        x = theta * vi * law.sample(rng, (samples,))
        frac = x - np.rint(x)
        total += frac * frac
    mean = float(total.mean())
    stderr = float(total.std(ddof=1) / math.sqrt(samples))
    return mean, stderr


# --- right-hand sides -------------------------------------------------------


def threshold(variant: LcdVariant, theta, v: np.ndarray):
    """The variant's closeness threshold at dilation theta (vectorized)."""
    norm_v = float(np.linalg.norm(np.asarray(v, dtype=float)))
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    out = _threshold_at_norms(variant, thetas * norm_v)
    return float(out[0]) if np.ndim(theta) == 0 else out


def _threshold_at_norms(variant: LcdVariant, norms: np.ndarray) -> np.ndarray:
    L, u = variant.L, variant.u
    if variant.tag == "essential":
        return np.minimum(u * norms, L)
    if variant.tag == "logarithmic":
        return L * np.sqrt(_log_plus(u * norms / L))
    if variant.tag == "randomized":
        return np.minimum(u * norms**2, L**2)
    return L**2 * _log_plus(u * norms / L)


def _log_plus(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 1.0
    out[pos] = np.log(x[pos])
    return out


# --- the censored infimum solver -------------------------------------------


def scan_step_bound(
    variant: LcdVariant,
    v: np.ndarray,
    laws: Sequence[SymmetrizedDistribution] | None,
) -> float:
    """Largest grid step guaranteed to land in every violation window.

    Each term frac2(theta * c) has period 1/|c|; sampling at a quarter of the
    shortest period cannot jump across a dip of the lhs.  Deterministic
    variants use c = v_i; randomized ones use v_i times the symmetrized
    support bound (3 sigma for gaussians, beyond which mass is negligible).
    """
    v = np.asarray(v, dtype=float)
    rates: list[float] = []
    for i, vi in enumerate(v):
        if vi == 0.0:
            continue
        if laws is None:
            rates.append(abs(vi))
        else:
            rates.append(abs(vi) * laws[i].max_abs_support())
    if not rates:
        return math.inf
    return 1.0 / (4.0 * max(rates))


def lcd_infimum(query: LcdQuery) -> LcdResult:
    """Solve inf{theta in (0, theta_max] : lhs(theta) < rhs(theta)}.

    Grid scan at a period-safe step, first strict crossing bracketed and
    bisected to bisect_tol; the returned value is the certified violating
    endpoint of the final bracket.  No crossing: censored at theta_max.
    """
    variant = query.variant
    v = query.v
    norm_v = float(np.linalg.norm(v))

    if variant.is_randomized:
        laws = _normalize_laws(v.size, query.law)
        lhs: Callable[[np.ndarray], np.ndarray] = _SqDistEvaluator(v, laws)
    else:
        laws = None
        lhs = _PointDistEvaluator(v)

    if norm_v == 0.0:
        return LcdResult(query.theta_max, True, 0.0, query.theta_max)

    step_bound = scan_step_bound(variant, v, laws)
    if query.grid_step is None:
        step = min(step_bound, query.theta_max / 8.0)
    else:
        step = query.grid_step
        if step > step_bound * (1.0 + 1e-12):
            raise ResolutionError(
                f"grid_step {step:g} exceeds the period-safe bound {step_bound:g}"
            )

    def crossing(thetas: np.ndarray) -> np.ndarray:
        rhs = _threshold_at_norms(variant, thetas * norm_v)
        return lhs(thetas) <= rhs - CROSSING_SLACK

    # below theta = L/(u*||v||) the log_+ thresholds vanish, so a crossing
    # is impossible there; start the scan at the edge of that dead zone
    scan_lo = 0.0
    if variant.has_log_threshold:
        scan_lo = variant.L / (variant.u * norm_v)
        if scan_lo >= query.theta_max:
            res = abs(
                float(lhs(np.array([query.theta_max]))[0])
                - threshold(variant, query.theta_max, v)
            )
            return LcdResult(query.theta_max, True, res, query.theta_max)

    k0 = max(1, int(math.floor(scan_lo / step)) + 1)
    k_end = int(math.ceil(query.theta_max / step))
    hit_theta = None
    prev_theta = scan_lo  # crossing is false (or vacuous) at the scan floor
    for start in range(k0, k_end + 1, _SCAN_CHUNK):
        ks = np.arange(start, min(start + _SCAN_CHUNK, k_end + 1), dtype=float)
        thetas = ks * step
        thetas[thetas > query.theta_max] = query.theta_max
        hits = crossing(thetas)
        idx = int(np.argmax(hits)) if hits.any() else -1
        if idx >= 0:
            hit_theta = float(thetas[idx])
            if idx > 0:
                prev_theta = float(thetas[idx - 1])
            break
        prev_theta = float(thetas[-1])

    if hit_theta is None:
        res = abs(
            float(lhs(np.array([query.theta_max]))[0])
            - threshold(variant, query.theta_max, v)
        )
        return LcdResult(query.theta_max, True, res, query.theta_max)

    lo, hi = prev_theta, hit_theta
    while hi - lo > query.bisect_tol:
        mid = 0.5 * (lo + hi)
        if crossing(np.array([mid]))[0]:
            hi = mid
        else:
            lo = mid
    residual = abs(float(lhs(np.array([hi]))[0]) - threshold(variant, hi, v))
    if variant.tag == "randomized-logarithmic":
        # the threshold is zero until u*theta*||v|| exceeds L, so any
        # crossing must sit above that dead zone
        assert hi >= variant.L / (variant.u * norm_v) - query.bisect_tol - 1e-12
    return LcdResult(hi, False, residual, query.theta_max)


# --- column, matrix and subspace versions ----------------------------------


def _pick_min(results: Sequence[LcdResult], theta_max: float) -> LcdResult:
    """Minimum of per-part solves; censored only if every part is censored."""
    best = min(results, key=lambda r: (r.value, r.censored))
    all_censored = all(r.censored for r in results)
    if all_censored:
        return LcdResult(theta_max, True, best.crossing_residual, theta_max, best.witness)
    return best


def log_rlcd_columns(
    column_laws: Sequence[LawInput],
    v: np.ndarray,
    L: float,
    u: float,
    theta_max: float = 100.0,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> LcdResult:
    """Randomized-logarithmic LCD of v against each column law; the minimum.

    column_laws[j] is the coordinate law (or per-coordinate laws) of the
    j-th symmetrized column; the witness of the result is the argmin index.
    """
    if len(column_laws) == 0:
        raise ConfigError("need at least one column law")
    variant = LcdVariant.randomized_logarithmic(L, u)
    results = []
    for j, law in enumerate(column_laws):
        q = LcdQuery(variant, v, law, theta_max, grid_step, bisect_tol)
        r = lcd_infimum(q)
        results.append(
            LcdResult(r.value, r.censored, r.crossing_residual, r.theta_max, witness=j)
        )
    return _pick_min(results, theta_max)


def _gaussian_directions(dim: int, budget: int, seed: SeedSpec) -> np.ndarray:
    """budget unit directions; a larger budget extends the same stream, so
    the direction set is monotone in budget for a fixed seed."""
    rng = seed.substream(0)
    w = rng.standard_normal((budget, dim))
    norms = np.linalg.norm(w, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - measure zero
        bad = norms == 0.0
        w[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(w, axis=1)
    return w / norms[:, None]


def _min_over_directions(
    to_vector: Callable[[np.ndarray], np.ndarray],
    dim: int,
    law: LawInput,
    L: float,
    u: float,
    theta_max: float,
    direction_budget: int,
    seed: SeedSpec,
    grid_step: float | None,
    bisect_tol: float,
) -> LcdResult:
    variant = LcdVariant.randomized_logarithmic(L, u)
    if dim == 1:
        dirs = np.array([[1.0]])
    else:
        dirs = _gaussian_directions(dim, direction_budget, seed)
    results = []
    for w in dirs:
        v_eff = to_vector(w)
        q = LcdQuery(variant, v_eff, law, theta_max, grid_step, bisect_tol)
        r = lcd_infimum(q)
        results.append(
            LcdResult(
                r.value, r.censored, r.crossing_residual, r.theta_max, witness=w.copy()
            )
        )
    return _pick_min(results, theta_max)


def log_rlcd_matrix(
    V: np.ndarray,
    law: LawInput,
    L: float,
    u: float,
    theta_max: float = 100.0,
    direction_budget: int = 64,
    seed: SeedSpec | None = None,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> LcdResult:
    """Matrix version: inf ||theta|| over theta in R^n with V^T theta close
    to the lattice in the randomized-logarithmic sense.

    Estimated from above by restricting to rays theta = r*w over a random
    direction net (exact for n = 1); the witness is the best direction, and
    the estimate is monotone nonincreasing in direction_budget at fixed seed.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ConfigError("V must be n x N")
    n, N = V.shape
    if seed is None:
        seed = SeedSpec(0)
    return _min_over_directions(
        lambda w: V.T @ w, n, law, L, u, theta_max, direction_budget, seed,
        grid_step, bisect_tol,
    )


def log_rlcd_subspace(
    basis: np.ndarray,
    law: LawInput,
    L: float,
    u: float,
    theta_max: float = 100.0,
    direction_budget: int = 64,
    seed: SeedSpec | None = None,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> LcdResult:
    """Subspace version: inf over unit vectors of the subspace spanned by
    the orthonormal columns of basis (N x dim).

    Through the parametrization x = basis @ w this is the matrix version of
    basis^T with the same direction stream, so the two agree exactly at
    matching seeds and budgets.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] > basis.shape[0]:
        raise ConfigError("basis must be N x dim with dim <= N")
    gram = basis.T @ basis
    if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-8):
        raise ConfigError("basis columns must be orthonormal")
    if seed is None:
        seed = SeedSpec(0)
    return _min_over_directions(
        lambda w: basis @ w, basis.shape[1], law, L, u, theta_max,
        direction_budget, seed, grid_step, bisect_tol,
    )


# --- parameter grids and lemma checkers ------------------------------------


@dataclass(frozen=True)
class LGrid:
    base: float
    values: tuple[float, ...]


def lgrid(L: float) -> LGrid:
    """The threshold grid {L, 2L} ∪ {L + i/10 : 1 <= i <= floor(10 L)}.

    Requires L >= 1; all points lie in [L, 2L] and exact duplicates are
    removed.
    """
    if L < 1.0:
        raise ConfigError("lgrid needs L >= 1")
    i_max = int(math.floor(10.0 * L + 1e-9))
    pts = {L, 2.0 * L}
    for i in range(1, i_max + 1):
        pts.add(L + i / 10.0)
    values = tuple(sorted(p for p in pts if p <= 2.0 * L + 1e-12))
    return LGrid(base=L, values=values)


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Outcome of the threshold-monotonicity check at one instance.

    For L1 > L2, once the smaller-threshold denominator D2 clears the
    hypothesis_threshold, D2 >= D1 must hold.  status is 'held', 'vacuous'
    (hypothesis not met) or 'violated'; censored denominators compare at
    theta_max.
    """

    status: str
    value_small_L: float
    value_large_L: float | None
    hypothesis_threshold: float
    margin: float | None
    small_censored: bool = False
    large_censored: bool = False


def check_monotone_in_L(
    v: np.ndarray,
    law: LawInput,
    L1: float,
    L2: float,
    u: float,
    theta_max: float = 100.0,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> MonotonicityVerdict:
    """Check D_{L2,u} >= D_{L1,u} (randomized-logarithmic) when D_{L2,u} is
    large enough; L1 > L2 required.

    The hypothesis floor is max(L1/u, u^-1 * L1^e1 / L2^e2) with
    e1 = L1^2/(L1^2-L2^2) and e2 = L2^2/(L1^2-L2^2): above it the L2
    threshold dominates the L1 threshold pointwise, so the L2 crossing can
    only come later.
    """
    if not (L1 > L2 > 0):
        raise ConfigError("need L1 > L2 > 0")
    e1 = L1**2 / (L1**2 - L2**2)
    e2 = L2**2 / (L1**2 - L2**2)
    log_floor = math.log(L1) * e1 - math.log(L2) * e2 - math.log(u)
    hyp = max(L1 / u, math.exp(log_floor) if log_floor < 700 else math.inf)

    r2 = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(L2, u), v, law, theta_max,
                 grid_step, bisect_tol)
    )
    d2 = r2.value  # censored compares at theta_max by convention
    norm_v = float(np.linalg.norm(np.asarray(v, dtype=float)))
    if d2 * norm_v < hyp:
        return MonotonicityVerdict(
            "vacuous", d2, None, hyp, None, small_censored=r2.censored
        )
    r1 = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(L1, u), v, law, theta_max,
                 grid_step, bisect_tol)
    )
    margin = d2 - r1.value
    tol = 2.0 * bisect_tol
    status = "held" if margin >= -tol else "violated"
    return MonotonicityVerdict(
        status, d2, r1.value, hyp, margin,
        small_censored=r2.censored, large_censored=r1.censored,
    )


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of the two-scale comparison at one instance.

    Claims logRLCD_{L,u}(v) >= min(RLCD_{gamma*sqrt(n), t}(v), growth_term)
    with growth_term = (L/(u*||v||)) * exp(n * (gamma/L)^2), under the
    precondition u^2 <= 2t.  A censored left-hand side cannot falsify the
    inequality and is recorded as 'hold-at-ceiling'.
    """

    status: str
    lhs_value: float
    lhs_censored: bool
    rlcd_value: float
    rlcd_censored: bool
    growth_term: float
    margin: float | None
    symbol_reading: str = "comparison scale a = gamma, small-ball scale s = u"


def check_comparison(
    v: np.ndarray,
    law: LawInput,
    L: float,
    u: float,
    gamma: float,
    t: float,
    theta_max: float = 100.0,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> ComparisonVerdict:
    v = np.asarray(v, dtype=float)
    if not (0 < t < 1):
        raise ConfigError("t must lie in (0,1)")
    if u * u > 2.0 * t + 1e-15:
        raise ConfigError("precondition u^2 <= 2t fails")
    if not (gamma > 0):
        raise ConfigError("gamma must be positive")
    n = v.size
    norm_v = float(np.linalg.norm(v))
    if norm_v == 0.0:
        raise ConfigError("v must be nonzero")

    lhs = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(L, u), v, law, theta_max,
                 grid_step, bisect_tol)
    )
    rl = lcd_infimum(
        LcdQuery(LcdVariant.randomized(gamma * math.sqrt(n), t), v, law,
                 theta_max, grid_step, bisect_tol)
    )
    log_growth = math.log(L / (u * norm_v)) + n * (gamma / L) ** 2
    growth = math.exp(log_growth) if log_growth < 700 else math.inf

    if lhs.censored:
        return ComparisonVerdict(
            "hold-at-ceiling", lhs.value, True, rl.value, rl.censored, growth, None
        )
    rhs = min(rl.value, growth)  # censored rlcd compares at theta_max
    margin = lhs.value - rhs
    status = "held" if margin >= -2.0 * bisect_tol else "violated"
    return ComparisonVerdict(
        status, lhs.value, False, rl.value, rl.censored, growth, margin
    )


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of the perturbation-stability check at one (x, y) pair.

    With D the randomized-logarithmic denominator of x at (L, u) and x, y in
    the annulus r2 B \\ r1 B, an infinity-norm perturbation below
    epsilon_bound must sandwich D:

        value at (2L, 2u r2/r1) of y  <=  D  <=  value at (L/2, (u/2) r1/r2) of y

    where epsilon_bound^2 * Var(X) = (1/8)(L/D)^2 log_+(u ||Dx|| / L).  A
    censored base solve certifies only "D >= theta_max"; then only the lower
    half is implied (any D' <= D satisfying the epsilon condition inherits
    it) and the check covers just that half.  status is 'held', 'vacuous'
    (perturbation too large, annulus miss, or zero epsilon budget) or
    'violated'.
    """

    status: str
    base_value: float
    base_censored: bool
    epsilon_bound: float
    perturbation: float
    upper_value: float | None
    lower_value: float | None
    margin: float | None


def stability_epsilon_bound(
    D: float, norm_x: float, L: float, u: float, total_variance: float
) -> float:
    """Largest admissible infinity-norm perturbation at denominator D.

    total_variance is the summed per-coordinate variance of the base
    (unsymmetrized) vector; zero variance puts no limit on epsilon.
    """
    if not (D > 0 and norm_x > 0):
        raise ConfigError("need D > 0 and a nonzero x")
    rhs = 0.125 * (L / D) ** 2 * math.log(max(1.0, u * D * norm_x / L))
    if total_variance <= 0.0:
        return math.inf
    return math.sqrt(rhs / total_variance)


def check_stability(
    x: np.ndarray,
    y: np.ndarray,
    law: LawInput,
    L: float,
    u: float,
    r1: float = 0.5,
    r2: float = 1.5,
    theta_max: float = 100.0,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> StabilityVerdict:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigError("x and y must be vectors of equal length")
    if not (0 < r1 < r2):
        raise ConfigError("need 0 < r1 < r2")
    u_upper = 2.0 * u * (r2 / r1)
    if not (0 < u_upper < 1):
        raise ConfigError("2u(r2/r1) must stay below 1 for the upper solve")
    norm_x = float(np.linalg.norm(x))
    norm_y = float(np.linalg.norm(y))
    slack = 1e-12
    in_annulus = (
        r1 * (1 - slack) <= norm_x <= r2 * (1 + slack)
        and r1 * (1 - slack) <= norm_y <= r2 * (1 + slack)
    )

    laws_n = _normalize_laws(x.size, law)
    # Var(X-bar) = 2 Var(X) exactly, whatever the base law was
    total_var = sum(0.5 * l.variance() for l in laws_n)

    base = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(L, u), x, laws_n, theta_max,
                 grid_step, bisect_tol)
    )
    D = base.value
    eps = stability_epsilon_bound(D, norm_x, L, u, total_var)
    pert = float(np.max(np.abs(x - y)))
    if not in_annulus or not (pert < eps):
        return StabilityVerdict(
            "vacuous", D, base.censored, eps, pert, None, None, None
        )

    tol = 10.0 * bisect_tol
    lower = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(0.5 * L, 0.5 * u * (r1 / r2)),
                 y, laws_n, theta_max, grid_step, bisect_tol)
    )
    lower_margin = lower.value - D  # censored lower counts as theta_max >= D
    if base.censored:
        status = "held" if lower_margin >= -tol else "violated"
        return StabilityVerdict(
            status, D, True, eps, pert, None, lower.value, lower_margin
        )
    upper = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(2.0 * L, u_upper), y,
                 laws_n, theta_max, grid_step, bisect_tol)
    )
    upper_margin = D - upper.value
    if upper.censored:
        # no crossing found below theta_max >= D: the sandwich demands one
        status = "violated"
        margin = -math.inf
    else:
        margin = min(upper_margin, lower_margin)
        status = "held" if margin >= -tol else "violated"
    return StabilityVerdict(
        status, D, False, eps, pert, upper.value, lower.value, margin
    )
