"""Small-ball probabilities: Lévy concentration, Esseen integrals, bounds.

The Lévy concentration function L(Y, t) = sup_y P(||Y - y|| <= t) (closed
ball) is computed exactly for finite laws in dimension at most 3 and by a
documented lower-bound Monte Carlo estimator otherwise.  The Esseen route
dominates it by an integral of the characteristic-function modulus over the
ball of radius sqrt(d), and two closed-form bounds translate a denominator
floor D into small-ball decay (Ct)^d.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import BudgetError, ConfigError
from .models import EntryDistribution, SeedSpec

#: exact-mode atom budgets per dimension (candidate sets are cubic/quartic)
EXACT_ATOM_BUDGET = {1: 100_000, 2: 128, 3: 48}

#: product-law construction refuses beyond this many atoms
PRODUCT_ATOM_BUDGET = 200_000

#: relative slack when testing ||y - c|| <= t, absorbing candidate rounding
BALL_RTOL = 1e-11

DEFAULT_CENTER_BUDGET = 64


@dataclass(frozen=True)
class FiniteVectorLaw:
    """A finitely supported law on R^dim: atoms (k, dim) with probabilities."""

    atoms: np.ndarray = field(compare=False)
    probs: np.ndarray = field(compare=False)

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        probs = np.asarray(self.probs, dtype=float)
        if atoms.ndim != 2 or probs.ndim != 1 or atoms.shape[0] != probs.size:
            raise ConfigError("atoms must be (k, dim) with k probabilities")
        if atoms.shape[0] == 0:
            raise ConfigError("need at least one atom")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ConfigError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return int(self.atoms.shape[1])

    @property
    def size(self) -> int:
        return int(self.atoms.shape[0])

    @classmethod
    def from_entry(cls, dist: EntryDistribution) -> "FiniteVectorLaw":
        if dist.kind != "finite":
            raise ConfigError("need a finitely supported entry law")
        return cls(np.asarray(dist.values)[:, None], np.asarray(dist.probs))

    @classmethod
    def product(cls, dists: Sequence[EntryDistribution]) -> "FiniteVectorLaw":
        """Law of the independent coordinate vector (xi_1, ..., xi_d)."""
        sizes = []
        for d in dists:
            if d.kind != "finite":
                raise ConfigError("product law needs finite coordinates")
            sizes.append(len(d.values))
        total = math.prod(sizes)
        if total > PRODUCT_ATOM_BUDGET:
            raise BudgetError(
                f"product law would carry {total} atoms "
                f"(cap {PRODUCT_ATOM_BUDGET})",
                estimate=float(total),
            )
        merged: dict[tuple[float, ...], float] = {}
        for combo in itertools.product(
            *(zip(d.values, d.probs) for d in dists)
        ):
            vals = tuple(v for v, _ in combo)
            p = math.prod(p for _, p in combo)
            merged[vals] = merged.get(vals, 0.0) + p
        atoms = np.array(sorted(merged), dtype=float)
        probs = np.array([merged[tuple(a)] for a in atoms])
        return cls(atoms, probs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.choice(self.size, size=size, p=self.probs)
        return self.atoms[idx]


@dataclass(frozen=True)
class ConcentrationEstimate:
    """L(Y, t) value: exact, or a Monte Carlo lower-bound estimate.

    MC centers the ball at the first center_budget sample points only, so it
    can undershoot the true supremum; stderr is the binomial error of the
    winning center's hit fraction.
    """

    value: float
    stderr: float
    mode: str
    center: np.ndarray = field(compare=False, default=None)
    trials: int = 0


def levy_concentration(
    law,
    t: float,
    mode: str = "auto",
    trials: int | None = None,
    seed: SeedSpec | None = None,
    center_budget: int = DEFAULT_CENTER_BUDGET,
) -> ConcentrationEstimate:
    """Worst-case closed-ball mass sup_y P(||Y - y|| <= t).

    Exact mode (finite laws, dim <= 3): in dimension 1 a sliding window over
    sorted atoms; in dimensions 2 and 3 the optimal center is a minimal
    enclosing ball center of some subset of covered atoms, so it suffices to
    scan atoms, midpoints of pairs, and circumcenters of triples/quadruples
    within radius t.  Atom budgets: 128 (dim 2), 48 (dim 3).

    MC mode (any sampler): draws `trials` points, reuses the first
    center_budget of them as candidate centers, returns the best hit
    fraction -- a lower-bound estimator of the supremum.  `law` may be a
    FiniteVectorLaw or a callable (rng, size) -> (size, dim) array.
    """
    if t < 0:
        raise ConfigError("t must be nonnegative")
    is_finite = isinstance(law, FiniteVectorLaw)
    if mode == "auto":
        if is_finite and law.dim <= 3 and law.size <= EXACT_ATOM_BUDGET[law.dim]:
            mode = "exact"
        else:
            mode = "mc"
    if mode == "exact":
        if not is_finite:
            raise ConfigError("exact mode needs a FiniteVectorLaw")
        if law.dim > 3:
            raise ConfigError("exact mode is limited to dim <= 3")
        if law.size > EXACT_ATOM_BUDGET[law.dim]:
            raise BudgetError(
                f"{law.size} atoms exceed the exact budget "
                f"{EXACT_ATOM_BUDGET[law.dim]} in dim {law.dim}",
                estimate=float(law.size),
            )
        value, center = _levy_exact(law, t)
        return ConcentrationEstimate(value, 0.0, "exact", center)
    if mode == "mc":
        if trials is None or trials < 1000:
            raise ConfigError("mc mode needs trials >= 1000")
        if seed is None:
            seed = SeedSpec(0)
        sampler = law.sample if is_finite else law
        rng = seed.substream(0)
        samples = np.asarray(sampler(rng, trials), dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        centers = samples[: min(center_budget, trials)]
        tau = t * t * (1 + BALL_RTOL) + 1e-28
        best_val, best_center = -1.0, centers[0]
        for c in centers:
            d2 = np.sum((samples - c) ** 2, axis=1)
            v = float(np.mean(d2 <= tau))
            if v > best_val:
                best_val, best_center = v, c
        stderr = math.sqrt(max(best_val * (1 - best_val), 1e-300) / trials)
        return ConcentrationEstimate(best_val, stderr, "mc", best_center, trials)
    raise ConfigError(f"unknown mode {mode!r}")


def _levy_exact(law: FiniteVectorLaw, t: float) -> tuple[float, np.ndarray]:
    if law.dim == 1:
        vals = law.atoms[:, 0]
        order = np.argsort(vals)
        v = vals[order]
        p = law.probs[order]
        cum = np.concatenate([[0.0], np.cumsum(p)])
        width = 2.0 * t
        # optimal window has an atom at its left edge
        right = np.searchsorted(v, v + width, side="right")
        masses = cum[right] - cum[np.arange(v.size)]
        i = int(np.argmax(masses))
        return float(masses[i]), np.array([v[i] + t])
    candidates = _ball_center_candidates(law.atoms, t)
    tau = t * t * (1 + BALL_RTOL) + 1e-28
    best_val, best_center = -1.0, candidates[0]
    for block in range(0, candidates.shape[0], 4096):
        C = candidates[block : block + 4096]
        d2 = (
            np.sum(C * C, axis=1)[:, None]
            - 2.0 * C @ law.atoms.T
            + np.sum(law.atoms * law.atoms, axis=1)[None, :]
        )
        masses = (d2 <= tau) @ law.probs
        j = int(np.argmax(masses))
        if masses[j] > best_val:
            best_val, best_center = float(masses[j]), C[j]
    return min(best_val, 1.0), best_center


def _ball_center_candidates(atoms: np.ndarray, t: float) -> np.ndarray:
    """Atoms, pair midpoints and subset circumcenters with radius <= t.

    The maximizing ball can be shrunk until its boundary atoms pin it, so
    its center is the minimal enclosing ball center of those atoms: either
    an atom, the midpoint of two, or the circumcenter of an affinely
    independent subset of size <= dim + 1 lying in that subset's affine
    hull.
    """
    m, dim = atoms.shape
    rt = t * (1 + BALL_RTOL)
    cands = [atoms]
    if m >= 2 and t > 0:
        ii, jj = np.triu_indices(m, k=1)
        mids = 0.5 * (atoms[ii] + atoms[jj])
        rad = 0.5 * np.linalg.norm(atoms[ii] - atoms[jj], axis=1)
        cands.append(mids[rad <= rt])
    for k in range(2, dim + 1):  # circumcenters of (k+1)-point subsets
        if m < k + 1 or t == 0:
            continue
        idx = np.array(list(itertools.combinations(range(m), k + 1)))
        p0 = atoms[idx[:, 0]]
        V = atoms[idx[:, 1:]] - p0[:, None, :]  # (B, k, dim)
        G = V @ V.transpose(0, 2, 1)  # (B, k, k)
        rhs = 0.5 * np.einsum("bij,bij->bi", V, V)  # (B, k)
        det = np.linalg.det(G)
        scale = np.einsum("bii->b", G) / k + 1e-300
        good = np.abs(det) > 1e-12 * scale**k
        if not np.any(good):
            continue
        y = np.linalg.solve(G[good], rhs[good][..., None])[..., 0]
        centers = p0[good] + np.einsum("bi,bij->bj", y, V[good])
        rad = np.linalg.norm(centers - p0[good], axis=1)
        cands.append(centers[rad <= rt])
    return np.concatenate([c for c in cands if c.size], axis=0)


# --- characteristic-function moduli and the Esseen route ---------------------


def charfn_modulus_product(
    dists: EntryDistribution | Sequence[EntryDistribution],
    d: int,
) -> Callable[[np.ndarray], float]:
    """|phi_Y(theta)| for Y with d independent coordinates of the given laws.

    Uses the e^{2 pi i <theta, Y>} convention, so the lattice scale matches
    the denominator solvers.
    """
    laws = [dists] * d if isinstance(dists, EntryDistribution) else list(dists)
    if len(laws) != d:
        raise ConfigError(f"got {len(laws)} laws for dimension {d}")

    def modulus(theta: np.ndarray) -> float:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.size != d:
            raise ConfigError("theta has the wrong dimension")
        out = 1.0
        for tj, law in zip(th, laws):
            out *= _entry_charfn_modulus(law, tj)
        return out

    return modulus


def charfn_modulus_projected(
    dists: EntryDistribution | Sequence[EntryDistribution],
    U: np.ndarray,
) -> Callable[[np.ndarray], float]:
    """|phi| of U^T X for X with independent coordinates; U is n x d."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ConfigError("U must be n x d")
    n, d = U.shape
    laws = [dists] * n if isinstance(dists, EntryDistribution) else list(dists)
    if len(laws) != n:
        raise ConfigError(f"got {len(laws)} laws for {n} ambient coordinates")

    def modulus(theta: np.ndarray) -> float:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.size != d:
            raise ConfigError("theta has the wrong dimension")
        w = U @ th
        out = 1.0
        for wj, law in zip(w, laws):
            out *= _entry_charfn_modulus(law, wj)
        return out

    return modulus


def _entry_charfn_modulus(law: EntryDistribution, t: float) -> float:
    if law.kind == "gaussian":
        return math.exp(-2.0 * math.pi**2 * law.sigma**2 * t * t)
    vals = np.asarray(law.values)
    probs = np.asarray(law.probs)
    ang = 2.0 * math.pi * t * vals
    re = float(probs @ np.cos(ang))
    im = float(probs @ np.sin(ang))
    return math.hypot(re, im)


def esseen_bound(
    charfn_modulus: Callable[[np.ndarray], float],
    d: int,
    C1: float = 1.0,
    epsabs: float = 1e-6,
    epsrel: float = 1e-6,
    limit: int = 200,
    breakpoints: Sequence[float] | None = None,
) -> float:
    """C1^d times the integral of |phi| over the ball of radius sqrt(d).

    This dominates L(Y, sqrt(d)) for C1 = 1 in our normalization.  d <= 3
    only; d >= 2 integrates in polar/spherical coordinates with nested
    adaptive quadrature.  breakpoints (d = 1 only) mark known kinks of the
    modulus, e.g. quarter-periods of |cos|.  Kinked moduli in d >= 2 (any
    lattice law) subdivide heavily; loosen epsabs/epsrel when the caller
    only needs a few digits.
    """
    if d not in (1, 2, 3):
        raise ConfigError("esseen_bound supports d in {1, 2, 3}")
    if not (C1 > 0):
        raise ConfigError("C1 must be positive")
    R = math.sqrt(d)
    if d == 1:
        pts = None
        if breakpoints is not None:
            pts = [p for p in breakpoints if -R < p < R]
        val, _ = integrate.quad(
            lambda x: charfn_modulus(np.array([x])),
            -R, R, epsabs=epsabs, epsrel=epsrel, limit=limit, points=pts,
        )
        return C1**d * val
    if breakpoints is not None:
        raise ConfigError("breakpoints are only supported for d = 1")
    if d == 2:

        def ring(r: float) -> float:
            val, _ = integrate.quad(
                lambda psi: charfn_modulus(
                    np.array([r * math.cos(psi), r * math.sin(psi)])
                ),
                0.0, 2.0 * math.pi, epsabs=epsabs, epsrel=epsrel, limit=limit,
            )
            return r * val

        val, _ = integrate.quad(
            ring, 0.0, R, epsabs=epsabs, epsrel=epsrel, limit=limit
        )
        return C1**d * val

    def shell(r: float) -> float:
        def meridian(phi: float) -> float:
            val, _ = integrate.quad(
                lambda psi: charfn_modulus(
                    np.array(
                        [
                            r * math.sin(phi) * math.cos(psi),
                            r * math.sin(phi) * math.sin(psi),
                            r * math.cos(phi),
                        ]
                    )
                ),
                0.0, 2.0 * math.pi,
                epsabs=max(epsabs, 1e-7), epsrel=max(epsrel, 1e-6), limit=60,
            )
            return math.sin(phi) * val

        val, _ = integrate.quad(
            meridian, 0.0, math.pi,
            epsabs=max(epsabs, 1e-7), epsrel=max(epsrel, 1e-6), limit=60,
        )
        return r * r * val

    val, _ = integrate.quad(
        shell, 0.0, R,
        epsabs=max(epsabs, 1e-7), epsrel=max(epsrel, 1e-6), limit=60,
    )
    return C1**d * val


# --- closed-form small-ball bounds -------------------------------------------


@dataclass(frozen=True)
class SbpBoundInputs:
    """Parameters of the closed-form small-ball bound.

    d: projection dimension; (L, u): denominator variant parameters with
    2 L^2 >= d + 2; D: certified denominator floor; t: ball radius in units
    of sqrt(d); det_root: 2d-th root of the projection Gram determinant;
    C: the absolute constant (default 1, reported alongside results).
    """

    d: int
    L: float
    u: float
    D: float
    t: float
    det_root: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d must be a positive integer")
        if not (self.L > 0) or not (self.u > 0):
            raise ConfigError("need L > 0 and u > 0")
        if 2.0 * self.L**2 < self.d + 2 - 1e-12:
            raise ConfigError("need 2 L^2 >= d + 2")
        if not (self.D > 0):
            raise ConfigError("D must be positive")
        if self.t < 0:
            raise ConfigError("t must be nonnegative")
        if not (self.det_root > 0) or not (self.C > 0):
            raise ConfigError("det_root and C must be positive")


def sbp_formula_bound(inputs: SbpBoundInputs) -> float:
    """(C L / (sqrt(d) u))^d * max(t, sqrt(d)/D)^d / det_root.

    Monotone nondecreasing in t and flat below the floor t0 = sqrt(d)/D:
    a larger certified denominator D pushes the floor down.
    """
    d = inputs.d
    t0 = math.sqrt(d) / inputs.D
    lead = inputs.C * inputs.L / (math.sqrt(d) * inputs.u)
    return lead**d * max(inputs.t, t0) ** d / inputs.det_root


def projection_sbp_bound(
    D_subspace: float, L: float, u: float, d: int, t: float, C: float = 1.0
) -> float:
    """Small-ball bound for an orthogonal projection with subspace
    denominator D_subspace: (C L / u)^d * (max(t, sqrt(d)/D) / sqrt(d))^d.

    Algebraically equal to sbp_formula_bound with det_root = 1 where both
    apply; this corollary form requires only L >= 1, not the formula form's
    2 L^2 >= d + 2.
    """
    if d < 1:
        raise ConfigError("d must be a positive integer")
    if not (L >= 1.0) or not (u > 0):
        raise ConfigError("need L >= 1 and u > 0")
    if not (D_subspace > 0):
        raise ConfigError("D must be positive")
    if t < 0:
        raise ConfigError("t must be nonnegative")
    if not (C > 0):
        raise ConfigError("C must be positive")
    t0 = math.sqrt(d) / D_subspace
    return (C * L / u) ** d * (max(t, t0) / math.sqrt(d)) ** d
