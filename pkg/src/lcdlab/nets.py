"""Weighted lattice nets and the water-filling regularized matrix norm.

A weight vector alpha in (0,1]^n with product at least kappa^{-n} rescales
the coordinate grid so that a matrix A distorts the rounding error as little
as possible.  This module builds finite covers of the weight region, the
induced lattice nets on a centered annulus, the exact water-filling solution
of the regularized squared Hilbert-Schmidt norm

    B_kappa(A) = min { sum_i alpha_i^2 ||A_i||^2 : prod alpha_i >= kappa^-n },

and the rounding map that approximates a point by a net point with certified
coordinate-wise and image-side errors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetError, ConfigError, InfeasibleError
from .geometry import SphereParams
from .lcd import DEFAULT_BISECT_TOL, LcdResult, log_rlcd_columns
from .models import SeedSpec

#: relative tolerance for annulus / grid membership tests (floating boundary
#: cases like 150 * fl(0.01) > 1.5 must not flip)
BOUNDARY_RTOL = 1e-9

R_INNER = 0.5
R_OUTER = 1.5


# --- weight vectors and their nets -----------------------------------------


@dataclass(frozen=True)
class WeightVector:
    """A coordinate weight profile alpha in (0,1]^n."""

    alpha: tuple[float, ...]
    exponents: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.alpha) == 0:
            raise ConfigError("weight vector must be nonempty")
        for a in self.alpha:
            if not (0 < a <= 1.0 + 1e-15):
                raise ConfigError("weights must lie in (0,1]")

    @property
    def n(self) -> int:
        return len(self.alpha)

    def log_product(self) -> float:
        return float(sum(math.log(a) for a in self.alpha))

    def in_omega(self, kappa: float) -> bool:
        """Whether prod alpha_i >= kappa^{-n} (within 1e-9 in log space)."""
        return self.log_product() >= -self.n * math.log(kappa) - 1e-9

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)


def _net_exponent_sum(kappa: float, n: int) -> int:
    if not kappa > math.e:
        raise ConfigError("kappa must exceed e")
    return int(math.floor(n * (1.0 + math.log(kappa)) + 1e-12))


def weight_net(kappa: float, n: int, max_size: int = 2_000_000) -> list[WeightVector]:
    """Finite net of geometric weight profiles covering the weight region.

    Net points are alpha = (e^{-j_1}, ..., e^{-j_n}) over all nonnegative
    integer exponent vectors with sum_i j_i = floor(n(1 + log kappa)).  Every
    beta with prod beta_i >= kappa^{-n} dominates some net point coordinatewise
    (see dominated_element); near the product floor the witness also satisfies
    alpha_i >= beta_i * e^{-2}.
    """
    S = _net_exponent_sum(kappa, n)
    size = math.comb(S + n - 1, n - 1)
    if size > max_size:
        raise BudgetError(
            f"weight net would have {size} elements (cap {max_size})",
            estimate=float(size),
        )
    net = []
    for js in _compositions(S, n):
        net.append(
            WeightVector(alpha=tuple(math.exp(-j) for j in js), exponents=js)
        )
    return net


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`, lex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def dominated_element(beta: Sequence[float], kappa: float) -> WeightVector:
    """The net element dominated by beta (the coverage witness).

    Rounds each coordinate down to the geometric grid, then tops exponents up
    round-robin to reach the net's exponent sum; the result has alpha <= beta
    coordinatewise and lies in weight_net(kappa, n).
    """
    beta_arr = np.asarray(beta, dtype=float)
    n = beta_arr.size
    wv = WeightVector(alpha=tuple(float(b) for b in beta_arr))
    if not wv.in_omega(kappa):
        raise ConfigError("beta is outside the weight region")
    S = _net_exponent_sum(kappa, n)
    js = [int(math.ceil(math.log(1.0 / b) - 1e-9)) for b in beta_arr]
    js = [max(0, j) for j in js]
    total = sum(js)
    if total > S:  # cannot happen for beta in the region, up to fp slack
        raise ConfigError("rounding overshot the net hyperplane")
    i = 0
    while total < S:
        js[i % n] += 1
        total += 1
        i += 1
    return WeightVector(alpha=tuple(math.exp(-j) for j in js), exponents=tuple(js))


def weight_net_constant(net_size: int, kappa: float, n: int) -> float:
    """Empirical growth constant |net|^(1/n) / log(kappa), reported not asserted."""
    if net_size < 1:
        raise ConfigError("net must be nonempty")
    return net_size ** (1.0 / n) / math.log(kappa)


# --- annulus lattices -------------------------------------------------------


@dataclass(frozen=True)
class AnnulusLattice:
    """Lattice points alpha_i*eps/sqrt(n) * Z^n inside the annulus.

    mode 'exact' holds the full enumeration (n <= 10); 'sampled' holds a
    census of rounded random annulus points with the observed acceptance
    rate.  Every stored point is annulus- and grid-consistent to relative
    tolerance 1e-9.
    """

    points: np.ndarray = field(compare=False)
    alpha: tuple[float, ...]
    epsilon: float
    mode: str
    r_inner: float = R_INNER
    r_outer: float = R_OUTER
    acceptance_rate: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != len(self.alpha):
            raise ConfigError("points must be (count, n)")
        object.__setattr__(self, "points", pts)
        h = self.steps()
        if pts.size:
            norms = np.linalg.norm(pts, axis=1)
            if np.any(norms > self.r_outer * (1 + BOUNDARY_RTOL)) or np.any(
                norms < self.r_inner * (1 - BOUNDARY_RTOL)
            ):
                raise ConfigError("a stored point leaves the annulus")
            ratio = pts / h
            if np.any(
                np.abs(ratio - np.rint(ratio))
                > BOUNDARY_RTOL * np.maximum(1.0, np.abs(ratio))
            ):
                raise ConfigError("a stored point is off the grid")

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    @property
    def n(self) -> int:
        return len(self.alpha)

    def steps(self) -> np.ndarray:
        return (
            np.asarray(self.alpha, dtype=float) * self.epsilon / math.sqrt(self.n)
        )


def enumerate_annulus_lattice(
    alpha: WeightVector | Sequence[float],
    epsilon: float,
    n: int,
    budget: int = 500_000,
    mode: str = "auto",
    seed: SeedSpec | None = None,
    sample_count: int | None = None,
    r_inner: float = R_INNER,
    r_outer: float = R_OUTER,
) -> AnnulusLattice:
    """Census of the weighted lattice inside the annulus.

    Exact enumeration for n <= 10 (level-by-level expansion with norm
    pruning; more than `budget` points raises BudgetError carrying a
    volume-based size estimate).  For larger n, or mode='sampled', rounds
    random annulus points to the grid instead and reports the acceptance
    rate of the annulus membership check after rounding.
    """
    alpha_arr = (
        alpha.as_array() if isinstance(alpha, WeightVector)
        else np.asarray(alpha, dtype=float)
    )
    if alpha_arr.size != n:
        raise ConfigError("alpha length must equal n")
    if np.any(alpha_arr <= 0) or np.any(alpha_arr > 1 + 1e-15):
        raise ConfigError("alpha must lie in (0,1]^n")
    if not (epsilon > 0):
        raise ConfigError("epsilon must be positive")
    if not (0 <= r_inner < r_outer):
        raise ConfigError("need 0 <= r_inner < r_outer")
    h = alpha_arr * epsilon / math.sqrt(n)

    if mode == "auto":
        mode = "exact" if n <= 10 else "sampled"
    if mode == "exact":
        if n > 10:
            raise ConfigError("exact enumeration is limited to n <= 10")
        pts = _enumerate_exact(h, r_inner, r_outer, budget)
        return AnnulusLattice(
            pts, tuple(alpha_arr), epsilon, "exact", r_inner, r_outer
        )
    if mode == "sampled":
        if seed is None:
            seed = SeedSpec(0)
        count = sample_count if sample_count is not None else min(budget, 10_000)
        pts, rate = _sample_rounded(h, n, r_inner, r_outer, count, seed)
        return AnnulusLattice(
            pts, tuple(alpha_arr), epsilon, "sampled", r_inner, r_outer, rate
        )
    raise ConfigError(f"unknown mode {mode!r}")


def _volume_estimate(h: np.ndarray, r_inner: float, r_outer: float) -> float:
    n = h.size
    ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    shell = ball * (r_outer**n - r_inner**n)
    return shell / float(np.prod(h))


def _enumerate_exact(
    h: np.ndarray, r_inner: float, r_outer: float, budget: int
) -> np.ndarray:
    n = h.size
    est = _volume_estimate(h, r_inner, r_outer)
    if est > 50.0 * budget:
        raise BudgetError(
            f"estimated {est:.3g} lattice points exceed budget {budget}",
            estimate=est,
        )
    hi2 = (r_outer * (1 + BOUNDARY_RTOL)) ** 2
    lo2 = (r_inner * (1 - BOUNDARY_RTOL)) ** 2
    partial = np.zeros((1, 0))
    sumsq = np.zeros(1)
    cap = max(8 * budget, 2_000_000)
    for i in range(n):
        kmax = int(math.floor(r_outer / h[i] + BOUNDARY_RTOL))
        vals = np.arange(-kmax, kmax + 1, dtype=float) * h[i]
        new_sumsq = sumsq[:, None] + vals[None, :] ** 2
        keep = new_sumsq <= hi2
        rows, cols = np.nonzero(keep)
        if rows.size > cap:
            raise BudgetError(
                f"partial expansion hit {rows.size} prefixes (cap {cap})",
                estimate=est,
            )
        partial = np.concatenate([partial[rows], vals[cols, None]], axis=1)
        sumsq = new_sumsq[keep]
    final = sumsq >= lo2
    pts = partial[final]
    if pts.shape[0] > budget:
        raise BudgetError(
            f"annulus lattice has {pts.shape[0]} points (budget {budget})",
            estimate=float(pts.shape[0]),
        )
    return pts


def _round_to_grid(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Nearest grid multiple per coordinate, half-ties toward zero."""
    r = x / h
    k = np.where(r >= 0, np.ceil(r - 0.5), np.floor(r + 0.5))
    return k * h


def _sample_rounded(
    h: np.ndarray,
    n: int,
    r_inner: float,
    r_outer: float,
    count: int,
    seed: SeedSpec,
) -> tuple[np.ndarray, float]:
    rng = seed.substream(0)
    kept: list[np.ndarray] = []
    total_drawn = 0
    accepted = 0
    max_draws = max(200 * count, 10_000)
    while accepted < count and total_drawn < max_draws:
        m = min(4096, max_draws - total_drawn)
        g = rng.standard_normal((m, n))
        g /= np.linalg.norm(g, axis=1)[:, None]
        u = rng.random(m)
        radii = (r_inner**n + u * (r_outer**n - r_inner**n)) ** (1.0 / n)
        pts = _round_to_grid(g * radii[:, None], h)
        norms = np.linalg.norm(pts, axis=1)
        ok = (norms <= r_outer * (1 + BOUNDARY_RTOL)) & (
            norms >= r_inner * (1 - BOUNDARY_RTOL)
        )
        total_drawn += m
        accepted += int(ok.sum())
        kept.append(pts[ok])
    pts = np.concatenate(kept, axis=0)[:count] if kept else np.zeros((0, n))
    rate = accepted / total_drawn if total_drawn else 0.0
    if pts.shape[0] < count:
        raise InfeasibleError(
            f"rounded-annulus acceptance rate {rate:.2e} too low to collect "
            f"{count} points"
        )
    return pts, rate


# --- water-filling regularized norm -----------------------------------------


@dataclass(frozen=True)
class RegularizedHsResult:
    """Exact minimizer of sum alpha_i^2 c_i under prod alpha_i >= kappa^{-n}.

    alpha_i = min(1, lam / ||A_i||): columns with norm above the water level
    lam are scaled down (the active set), the rest keep alpha = 1.
    kkt_residual measures complementary slackness (|log prod alpha + n log
    kappa| when the constraint binds) and is ~1e-15 for exact solves.
    """

    value: float
    alpha: tuple[float, ...]
    lam: float
    active: tuple[int, ...]
    kkt_residual: float
    kappa: float


def regularized_hs(column_norms_sq: Sequence[float], kappa: float) -> RegularizedHsResult:
    """Water-filling solution of the regularized squared HS norm.

    The minimizer has alpha_i = min(1, lam/n_i) with n_i the column norms;
    the water level solves sum_i min(0, log lam - log n_i) = -n log kappa,
    a piecewise-linear equation in log lam solved exactly by scanning the
    sorted breakpoints.  Zero-cost columns take alpha = 1.
    """
    if not kappa > 1.0:
        raise ConfigError("kappa must exceed 1")
    ns = np.asarray(column_norms_sq, dtype=float)
    if ns.ndim != 1 or ns.size == 0:
        raise ConfigError("need a nonempty vector of squared column norms")
    if np.any(ns < 0):
        raise ConfigError("squared norms must be nonnegative")
    n = ns.size
    target = -n * math.log(kappa)
    pos = ns > 0
    m = int(pos.sum())
    if m == 0:
        return RegularizedHsResult(0.0, (1.0,) * n, 0.0, (), 0.0, kappa)

    logs = np.sort(0.5 * np.log(ns[pos]))[::-1]  # log column norms, descending
    cum = np.cumsum(logs)
    ks = np.arange(1, m + 1, dtype=float)
    cand = (cum + target) / ks
    next_log = np.concatenate([logs[1:], [-np.inf]])
    ok = (cand <= logs + 1e-12) & (cand >= next_log - 1e-12)
    k = int(np.argmax(ok))
    if not ok[k]:  # pragma: no cover - the scan always succeeds
        raise ConfigError("water level scan failed")
    log_lam = float(cand[k])
    lam = math.exp(log_lam)

    norms = np.sqrt(ns)
    alpha = np.ones(n)
    alpha[pos] = np.minimum(1.0, lam / norms[pos])
    # alpha_i^2 * c_i = min(c_i, lam^2) on costly coords, 0 on free ones
    value = float(np.sum(np.minimum(ns, lam * lam)))
    active = tuple(int(i) for i in np.flatnonzero(alpha < 1.0 - 1e-15))
    log_prod = float(np.sum(np.log(alpha[alpha < 1.0])))
    if active:
        kkt = abs(log_prod - target)
    else:
        kkt = max(0.0, target - log_prod)
    return RegularizedHsResult(
        value, tuple(float(a) for a in alpha), lam, active, kkt, kappa
    )


def regularized_hs_batch(
    column_norms_sq: np.ndarray, kappa: float
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise water-filling values and weights for a (B, n) array."""
    arr = np.atleast_2d(np.asarray(column_norms_sq, dtype=float))
    values = np.empty(arr.shape[0])
    alphas = np.empty_like(arr)
    for b in range(arr.shape[0]):
        res = regularized_hs(arr[b], kappa)
        values[b] = res.value
        alphas[b] = res.alpha
    return values, alphas


def column_norms_sq(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ConfigError("A must be a matrix")
    return np.sum(A * A, axis=0)


# --- rounding onto the optimal net ------------------------------------------


@dataclass(frozen=True)
class NetApproximation:
    """x rounded to the water-filling-optimal weighted lattice.

    linf certificate |x_i - y_i| <= alpha*_i * eps / (2 sqrt(n)) <= eps/sqrt(n)
    holds by construction; the image certificate ||A(x-y)|| <=
    eps * sqrt(B_kappa(A)) / sqrt(n) uses the rounding errors' worst case and
    can fail for adversarial sign patterns, so it is reported, not assumed.
    annulus_miss flags a rounded point that left the annulus.
    """

    y: np.ndarray = field(compare=False)
    alpha_star: tuple[float, ...]
    hs_value: float
    linf_err: float
    linf_bound: float
    image_err: float
    image_bound: float
    linf_ok: bool
    image_ok: bool
    annulus_miss: bool


def approximate_on_net(
    A: np.ndarray,
    x: np.ndarray,
    kappa: float,
    epsilon: float,
    r_inner: float = R_INNER,
    r_outer: float = R_OUTER,
) -> NetApproximation:
    """Round x onto the lattice weighted by the water-filling minimizer of A."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.ndim != 2 or x.ndim != 1 or A.shape[1] != x.size:
        raise ConfigError("need A (m x n) and x in R^n")
    if not (epsilon > 0):
        raise ConfigError("epsilon must be positive")
    n = x.size
    res = regularized_hs(column_norms_sq(A), kappa)
    alpha = np.asarray(res.alpha)
    h = alpha * epsilon / math.sqrt(n)
    y = _round_to_grid(x, h)
    diff = x - y
    linf_err = float(np.max(np.abs(diff)))
    linf_bound = epsilon / math.sqrt(n)
    image_err = float(np.linalg.norm(A @ diff))
    image_bound = epsilon * math.sqrt(res.value) / math.sqrt(n)
    ynorm = float(np.linalg.norm(y))
    miss = not (
        r_inner * (1 - BOUNDARY_RTOL) <= ynorm <= r_outer * (1 + BOUNDARY_RTOL)
    )
    out = NetApproximation(
        y=y,
        alpha_star=res.alpha,
        hs_value=res.value,
        linf_err=linf_err,
        linf_bound=linf_bound,
        image_err=image_err,
        image_bound=image_bound,
        linf_ok=linf_err <= linf_bound * (1 + 1e-12),
        image_ok=image_err <= image_bound * (1 + 1e-12),
        annulus_miss=miss,
    )
    assert out.linf_ok, "coordinate certificate must hold by construction"
    return out


# --- level-set membership ---------------------------------------------------


@dataclass(frozen=True)
class LevelSetQuery:
    """Parameters of the denominator level set at scale D.

    The core set collects annulus points whose column-minimal
    randomized-logarithmic LCD at (L, u) lies in [D, 2D]; the widened set
    relaxes the two sides to parameters (2L, 6u) and (L/2, u/6), so u < 1/6
    is required.
    """

    L: float
    u: float
    D: float
    r_inner: float = R_INNER
    r_outer: float = R_OUTER

    def __post_init__(self):
        if not (self.L > 0):
            raise ConfigError("L must be positive")
        if not (0 < self.u < 1.0 / 6.0):
            raise ConfigError("widened parameters need u < 1/6")
        if not (self.D > 0):
            raise ConfigError("D must be positive")
        if not (0 <= self.r_inner < self.r_outer):
            raise ConfigError("need 0 <= r_inner < r_outer")


@dataclass(frozen=True)
class LevelSetResult:
    label: str  # 'annulus-miss' | 'core' | 'widened' | 'neither'
    norm: float
    in_annulus: bool
    in_core: bool
    in_widened: bool
    core_result: LcdResult | None
    upper_result: LcdResult | None
    lower_result: LcdResult | None


def level_set_classify(
    x: np.ndarray,
    column_laws: Sequence,
    query: LevelSetQuery,
    theta_max: float,
    grid_step: float | None = None,
    bisect_tol: float = DEFAULT_BISECT_TOL,
) -> LevelSetResult:
    """Classify x against the level set and its widened relaxation.

    Core membership needs the (L,u) column LCD inside [D, 2D]; widened
    membership needs the (2L,6u) LCD at most 2D and the (L/2,u/6) LCD at
    least D.  Requires theta_max >= 2D so censoring cannot fake membership:
    a censored (2L,6u) solve compares as theta_max > 2D (correctly failing
    the upper test) and a censored (L/2,u/6) solve certifies >= D.  Core
    membership always implies widened membership.
    """
    x = np.asarray(x, dtype=float)
    if theta_max < 2.0 * query.D * (1 - 1e-12):
        raise ConfigError("theta_max must be at least 2D")
    nrm = float(np.linalg.norm(x))
    in_annulus = (
        query.r_inner * (1 - BOUNDARY_RTOL)
        <= nrm
        <= query.r_outer * (1 + BOUNDARY_RTOL)
    )
    if not in_annulus:
        return LevelSetResult("annulus-miss", nrm, False, False, False, None, None, None)

    core = log_rlcd_columns(
        column_laws, x, query.L, query.u, theta_max, grid_step, bisect_tol
    )
    upper = log_rlcd_columns(
        column_laws, x, 2.0 * query.L, 6.0 * query.u, theta_max, grid_step, bisect_tol
    )
    lower = log_rlcd_columns(
        column_laws, x, 0.5 * query.L, query.u / 6.0, theta_max, grid_step, bisect_tol
    )
    D = query.D
    in_core = (not core.censored) and (D <= core.value <= 2.0 * D)
    in_widened = (upper.value <= 2.0 * D and not upper.censored) and (
        lower.value >= D
    )
    if in_core:
        label = "core"
    elif in_widened:
        label = "widened"
    else:
        label = "neither"
    return LevelSetResult(label, nrm, True, in_core, in_widened, core, upper, lower)


# --- structured lattice sampling --------------------------------------------


@dataclass(frozen=True)
class StructuredLatticeSample:
    """Uniform draws from a spread lattice slice of the 3/2-ball.

    Points are k * lambda_i/sqrt(n) with ||p|| <= 3/2 and at least delta*n
    coordinates of magnitude >= rho/(2 sqrt(n)).
    """

    points: np.ndarray = field(compare=False)
    lambdas: tuple[float, ...]
    acceptance_rate: float
    draws: int

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


def sample_structured_lattice(
    lambdas: Sequence[float],
    params: SphereParams,
    count: int,
    seed: SeedSpec,
    r_outer: float = R_OUTER,
) -> StructuredLatticeSample:
    """Rejection-sample the structured lattice uniformly.

    Draws integer coordinates uniformly from the bounding box grid and keeps
    points satisfying the ball and spread constraints (relative tolerance
    1e-9 on both boundaries, so e.g. 150 * fl(0.01) still counts as inside
    the 3/2-ball).  Aborts with InfeasibleError when the acceptance rate
    drops below 1e-6.
    """
    lam = np.asarray(lambdas, dtype=float)
    n = lam.size
    if n == 0:
        raise ConfigError("need at least one coordinate")
    # the floor 6^-n only bites once it sits below the 0.01 ceiling (n >= 3);
    # at smaller n the window collapses to the single admissible scale 0.01
    lo = min(6.0 ** (-n), 0.01)
    if np.any(lam < lo * (1 - 1e-12)) or np.any(lam > 0.01 * (1 + 1e-12)):
        raise ConfigError(
            f"each lambda must lie in [{lo:.3g}, 0.01] at n={n}"
        )
    if count < 1:
        raise ConfigError("count must be positive")
    h = lam / math.sqrt(n)
    kmax = np.floor(r_outer / h + BOUNDARY_RTOL).astype(np.int64)
    floor_mag = (params.rho / (2.0 * math.sqrt(n))) * (1 - BOUNDARY_RTOL)
    need = params.delta * n - 1e-9

    rng = seed.substream(0)
    out: list[np.ndarray] = []
    accepted = 0
    draws = 0
    batch = max(1024, min(65536, 64 * count))
    while accepted < count:
        ks = rng.integers(-kmax, kmax + 1, size=(batch, n))
        pts = ks * h
        norms = np.linalg.norm(pts, axis=1)
        spread = (np.abs(pts) >= floor_mag).sum(axis=1)
        ok = (norms <= r_outer * (1 + BOUNDARY_RTOL)) & (spread >= need)
        draws += batch
        accepted += int(ok.sum())
        out.append(pts[ok])
        if draws >= 2_000_000 and accepted < max(1, draws * 1e-6):
            raise InfeasibleError(
                f"structured lattice acceptance rate {accepted/draws:.2e} "
                "below 1e-6"
            )
    points = np.concatenate(out, axis=0)[:count]
    return StructuredLatticeSample(
        points=points,
        lambdas=tuple(float(x) for x in lam),
        acceptance_rate=accepted / draws,
        draws=draws,
    )
