"""A deterministic suite of cross-cutting invariant checks.

Each property draws its own instances from a fixed seed, verifies one
structural fact (scaling laws, censoring semantics, certificate validity,
agreement between independent computation routes), and reports pass/fail
with instance counts.  The suite is what `props check` runs from the CLI;
the same invariants appear as unit/property tests with independent fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import (
    SphereParams,
    compressibility,
    dist_to_integer_lattice,
    distance_to_colspan,
    spread_set,
)
from ..lcd import (
    LcdQuery,
    LcdVariant,
    check_comparison,
    check_monotone_in_L,
    check_stability,
    expected_sq_dist,
    expected_sq_dist_mc,
    lcd_infimum,
    lgrid,
    log_rlcd_columns,
    stability_epsilon_bound,
)
from ..models import EntryDistribution, SeedSpec, symmetrize
from ..nets import (
    LevelSetQuery,
    approximate_on_net,
    dominated_element,
    level_set_classify,
    regularized_hs,
    weight_net,
)
from ..smallball import (
    FiniteVectorLaw,
    charfn_modulus_product,
    esseen_bound,
    levy_concentration,
    projection_sbp_bound,
    sbp_formula_bound,
)


@dataclass(frozen=True)
class PropertyOutcome:
    name: str
    passed: bool
    checked: int
    violations: int
    vacuous: int
    detail: str


@dataclass(frozen=True)
class SuiteReport:
    outcomes: tuple[PropertyOutcome, ...]
    n_pass: int
    n_fail: int

    @property
    def ok(self) -> bool:
        return self.n_fail == 0


def _mixed_laws(rng) -> EntryDistribution:
    roll = rng.integers(0, 4)
    if roll == 0:
        return EntryDistribution.rademacher()
    if roll == 1:
        return EntryDistribution.gaussian(float(rng.uniform(0.5, 2.0)))
    if roll == 2:
        return EntryDistribution.bernoulli(float(rng.uniform(0.2, 0.8)))
    vals = np.round(rng.uniform(-3, 3, size=3), 3)
    vals = np.unique(vals)
    probs = rng.dirichlet(np.ones(vals.size))
    return EntryDistribution.finite(
        [(float(v), float(p)) for v, p in zip(vals, probs)]
    )


def _prop_lattice_shift_invariance(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(8, int(40 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(1, 12))
        w = rng.standard_normal(n) * 3
        k = rng.integers(-5, 6, size=n).astype(float)
        a = dist_to_integer_lattice(w)
        b = dist_to_integer_lattice(w + k)
        if abs(a - b) > 1e-9:
            bad += 1
    return PropertyOutcome(
        "geometry.lattice-shift-invariance", bad == 0, checks, bad, 0,
        "dist(w, Z^n) unchanged by integer shifts",
    )


def _prop_colspan_column_ops(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(5, int(20 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(4, 12))
        m = int(rng.integers(1, n - 1))
        A = rng.standard_normal((n, m))
        X = rng.standard_normal(n)
        T = rng.standard_normal((m, m)) + 3 * np.eye(m)  # invertible mix
        d1 = distance_to_colspan(A, X)
        d2 = distance_to_colspan(A @ T, X)
        d3 = distance_to_colspan(np.hstack([A, A[:, :1]]), X)  # duplicate col
        if abs(d1 - d2) > 1e-8 * max(1.0, d1) or abs(d1 - d3) > 1e-8 * max(1.0, d1):
            bad += 1
    return PropertyOutcome(
        "geometry.colspan-span-invariance", bad == 0, checks, bad, 0,
        "distance depends only on the span",
    )


def _prop_compressibility_routes(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    params = SphereParams(delta=0.34, rho=0.4)
    checks = max(10, int(60 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(3, 9))
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        rep = compressibility(x, params)
        # independent route: distance to the reported support's best vector
        y = rep.nearest
        if abs(np.linalg.norm(x - y) - rep.distance) > 1e-9:
            bad += 1
        ss = spread_set(x, params)
        if not rep.is_compressible and ss is None:
            bad += 1
    return PropertyOutcome(
        "geometry.compressibility-consistency", bad == 0, checks, bad, 0,
        "distance matches its witness; incompressible implies spread set",
    )


def _prop_lcd_scaling(seed: SeedSpec, scale: float) -> PropertyOutcome:
    # LCD(c*v) = LCD(v)/c for the essential variant: dist(theta*c*v, Z^n)
    # and the threshold both see only theta*c
    rng = seed.substream(0)
    checks = max(5, int(15 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(2, 6))
        v = rng.uniform(0.5, 2.0, size=n)
        c = float(rng.uniform(0.5, 3.0))
        var = LcdVariant.essential(1.5, 0.3)
        r1 = lcd_infimum(LcdQuery(var, v, theta_max=60.0))
        r2 = lcd_infimum(LcdQuery(var, c * v, theta_max=60.0 / c))
        if r1.censored != r2.censored:
            bad += 1
        elif not r1.censored and abs(r2.value - r1.value / c) > 5e-8 * r1.value:
            bad += 1
    return PropertyOutcome(
        "lcd.dilation-scaling", bad == 0, checks, bad, 0,
        "essential LCD of c*v equals LCD(v)/c",
    )


def _prop_lcd_trivial_floor(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(8, int(30 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(1, 5))
        v = rng.uniform(0.3, 2.0, size=n)
        law = symmetrize(_mixed_laws(rng))
        L = float(rng.uniform(0.7, 2.0))
        u = float(rng.uniform(0.1, 0.6))
        res = lcd_infimum(
            LcdQuery(LcdVariant.randomized_logarithmic(L, u), v, law, theta_max=50.0)
        )
        floor = L / (u * float(np.linalg.norm(v)))
        if res.value < min(floor, 50.0) - 2e-9:
            bad += 1
    return PropertyOutcome(
        "lcd.dead-zone-floor", bad == 0, checks, bad, 0,
        "randomized-log LCD is at least L/(u||v||)",
    )


def _prop_exact_vs_mc(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(5, int(12 * scale))
    bad = 0
    for i in range(checks):
        n = int(rng.integers(1, 5))
        v = rng.uniform(-2, 2, size=n)
        law = symmetrize(_mixed_laws(rng))
        theta = float(rng.uniform(0.1, 5.0))
        exact = expected_sq_dist(theta, v, law)
        mean, se = expected_sq_dist_mc(
            theta, v, law, samples=40_000, rng=seed.child(3).substream(i)
        )
        if abs(mean - exact) > 4.0 * max(se, 1e-12):
            bad += 1
    return PropertyOutcome(
        "lcd.exact-vs-mc", bad == 0, checks, bad, 0,
        "closed-form E dist^2 agrees with Monte Carlo within 4 stderr",
    )


def _prop_monotone_in_L(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(6, int(20 * scale))
    bad = 0
    vac = 0
    held = 0
    gauss = symmetrize(EntryDistribution.gaussian(1.0))
    rad = symmetrize(EntryDistribution.rademacher())
    for i in range(checks):
        if i % 2 == 0:
            # gaussian small-L: the smooth kernel has no lattice dips, so the
            # crossing lands far past the dead zone and clears the floor
            n = int(rng.integers(4, 9))
            v = rng.uniform(0.3, 1.7, size=n)
            v /= np.linalg.norm(v)
            L2 = float(rng.uniform(0.3, 0.8))
            L1 = L2 * float(rng.uniform(1.05, 1.5))
            verdict = check_monotone_in_L(v, gauss, L1, L2, u=0.25,
                                          theta_max=4000.0)
        else:
            # discrete law + grid endpoints: crossing right past the dead
            # zone, so the hypothesis floor usually fails (vacuous branch)
            n = int(rng.integers(1, 4))
            v = rng.uniform(0.4, 1.5, size=n)
            v /= np.linalg.norm(v)
            grid = lgrid(float(rng.uniform(1.0, 1.6)))
            verdict = check_monotone_in_L(v, rad, grid.values[-1],
                                          grid.values[0], u=0.3,
                                          theta_max=4000.0)
        if verdict.status == "violated":
            bad += 1
        elif verdict.status == "vacuous":
            vac += 1
        else:
            held += 1
    ok = bad == 0 and held > 0
    return PropertyOutcome(
        "lcd.monotone-in-threshold", ok, checks, bad, vac,
        "denominator shrinks when the threshold grows (above the floor)",
    )


def _prop_stability(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(6, int(16 * scale))
    bad = 0
    vac = 0
    gauss = symmetrize(EntryDistribution.gaussian(1.0))
    rad = symmetrize(EntryDistribution.rademacher())
    for i in range(checks):
        law = gauss if i % 2 == 0 else rad
        n = int(rng.integers(2, 6))
        x = rng.standard_normal(n)
        x *= float(rng.uniform(0.65, 1.35)) / np.linalg.norm(x)
        L = float(rng.uniform(0.3, 0.9))
        u = float(rng.uniform(0.03, 0.15))
        base = lcd_infimum(
            LcdQuery(LcdVariant.randomized_logarithmic(L, u), x, law, 800.0)
        )
        eps = stability_epsilon_bound(
            base.value, float(np.linalg.norm(x)), L, u,
            n * 0.5 * law.variance(),
        )
        if not (math.isfinite(eps) and eps > 0):
            vac += 1
            continue
        y = x + rng.uniform(-1, 1, n) * min(0.9 * eps, 0.05)
        verdict = check_stability(x, y, law, L, u, theta_max=800.0)
        if verdict.status == "violated":
            bad += 1
        elif verdict.status == "vacuous":
            vac += 1
    return PropertyOutcome(
        "lcd.perturbation-stability", bad == 0, checks, bad, vac,
        "small perturbations sandwich the denominator between relaxed solves",
    )


def _prop_comparison(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(6, int(20 * scale))
    bad = 0
    ceiling = 0
    for _ in range(checks):
        n = int(rng.integers(1, 4))
        v = rng.uniform(0.4, 1.5, size=n)
        v /= np.linalg.norm(v)
        law = symmetrize(EntryDistribution.rademacher())
        verdict = check_comparison(
            v, law, L=float(rng.uniform(1.0, 2.0)), u=0.3,
            gamma=float(rng.uniform(0.5, 1.5)), t=float(rng.uniform(0.1, 0.5)),
            theta_max=2000.0,
        )
        if verdict.status == "violated":
            bad += 1
        elif verdict.status == "hold-at-ceiling":
            ceiling += 1
    return PropertyOutcome(
        "lcd.two-scale-comparison", bad == 0, checks, bad, ceiling,
        "log-denominator dominates min(randomized denominator, growth term)",
    )


def _prop_weight_net_domination(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(10, int(60 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(1, 5))
        kappa = float(rng.uniform(2.8, 7.5))
        net = {wv.exponents for wv in weight_net(kappa, n)}
        # random beta in the region: mix of interior and boundary points
        logs = -rng.uniform(0, math.log(kappa), size=n)
        if rng.random() < 0.5:
            logs *= (n * math.log(kappa)) / max(-logs.sum(), 1e-12)  # boundary
        beta = np.exp(logs)
        wv = dominated_element(beta, kappa)
        if wv.exponents not in net:
            bad += 1
        elif not np.all(wv.as_array() <= beta * (1 + 1e-12)):
            bad += 1
    return PropertyOutcome(
        "nets.weight-net-coverage", bad == 0, checks, bad, 0,
        "every admissible profile dominates a net element",
    )


def _prop_waterfill(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(10, int(50 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(1, 12))
        ns = rng.uniform(0, 4, size=n) ** 2
        if rng.random() < 0.3:
            ns[rng.integers(0, n)] = 0.0
        kappa = float(rng.uniform(1.2, 6.0))
        res = regularized_hs(ns, kappa)
        if res.kkt_residual > 1e-10:
            bad += 1
            continue
        if res.value > float(np.sum(ns)) * (1 + 1e-12):
            bad += 1  # must not exceed the unregularized HS mass
            continue
        res2 = regularized_hs(ns, kappa * 1.5)
        if res2.value > res.value * (1 + 1e-12):
            bad += 1  # larger kappa relaxes the constraint
    return PropertyOutcome(
        "nets.water-filling-kkt", bad == 0, checks, bad, 0,
        "KKT residual < 1e-10; value below HS mass and monotone in kappa",
    )


def _prop_net_certificates(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(10, int(60 * scale))
    bad = 0
    for _ in range(checks):
        n = int(rng.integers(2, 10))
        m = int(rng.integers(2, 10))
        A = rng.standard_normal((m, n))
        x = rng.standard_normal(n)
        x *= rng.uniform(0.5, 1.5) / np.linalg.norm(x)
        approx = approximate_on_net(
            A, x, kappa=float(rng.uniform(1.5, 4.0)),
            epsilon=float(rng.uniform(0.05, 0.5)),
        )
        if not approx.linf_ok or not approx.image_ok:
            bad += 1
    return PropertyOutcome(
        "nets.rounding-certificates", bad == 0, checks, bad, 0,
        "both rounding certificates hold on random instances",
    )


def _prop_level_set_implication(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(6, int(25 * scale))
    bad = 0
    vac = 0
    hit = 0
    law = symmetrize(EntryDistribution.rademacher())
    for _ in range(checks):
        n = int(rng.integers(1, 4))
        x = rng.standard_normal(n)
        x *= rng.uniform(0.5, 1.5) / np.linalg.norm(x)
        laws = [law] * n
        # aim the band at the observed denominator so the core is populated
        probe = log_rlcd_columns(laws, x, 1.0, 0.12, 400.0)
        if probe.censored:
            vac += 1
            continue
        D = max(1.0, probe.value / float(rng.uniform(0.9, 2.2)))
        q = LevelSetQuery(L=1.0, u=0.12, D=D)
        res = level_set_classify(x, laws, q, theta_max=max(400.0, 2.2 * D))
        if res.in_core and not res.in_widened:
            bad += 1
        if res.in_core:
            hit += 1
        else:
            vac += 1
    ok = bad == 0 and hit > 0
    return PropertyOutcome(
        "nets.level-set-implication", ok, checks, bad, vac,
        "core membership implies widened membership",
    )


def _prop_levy(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(6, int(20 * scale))
    bad = 0
    for i in range(checks):
        dim = int(rng.integers(1, 4))
        k = int(rng.integers(2, 7))
        atoms = rng.uniform(-2, 2, size=(k, dim))
        probs = rng.dirichlet(np.ones(k))
        law = FiniteVectorLaw(atoms, probs)
        t1 = float(rng.uniform(0.1, 1.0))
        t2 = t1 + float(rng.uniform(0.1, 1.0))
        v1 = levy_concentration(law, t1).value
        v2 = levy_concentration(law, t2).value
        if v2 < v1 - 1e-12:
            bad += 1
            continue
        # isometry invariance: a random rotation preserves the value
        Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        law_rot = FiniteVectorLaw(atoms @ Q.T, probs)
        if abs(levy_concentration(law_rot, t1).value - v1) > 1e-9:
            bad += 1
            continue
        # MC lower bound cannot exceed the exact value (4 sigma slack)
        est = levy_concentration(
            law, t1, mode="mc", trials=4000, seed=seed.child(7, i)
        )
        if est.value > v1 + 4.0 * est.stderr + 1e-9:
            bad += 1
    return PropertyOutcome(
        "smallball.levy-structure", bad == 0, checks, bad, 0,
        "monotone in t, rotation invariant, MC stays below exact",
    )


def _prop_esseen_dominates(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(4, int(10 * scale))
    bad = 0
    for _ in range(checks):
        k = int(rng.integers(2, 5))
        vals = np.unique(np.round(rng.uniform(-2, 2, size=k), 3))
        probs = rng.dirichlet(np.ones(vals.size))
        dist = EntryDistribution.finite(
            [(float(v), float(p)) for v, p in zip(vals, probs)]
        )
        law = FiniteVectorLaw.from_entry(dist)
        exact = levy_concentration(law, 1.0).value
        bound = esseen_bound(charfn_modulus_product(dist, 1), 1)
        if exact > bound + 1e-9:
            bad += 1
    return PropertyOutcome(
        "smallball.esseen-domination", bad == 0, checks, bad, 0,
        "L(xi, 1) <= integral of |phi| over [-1, 1]",
    )


def _prop_sbp_bounds(seed: SeedSpec, scale: float) -> PropertyOutcome:
    rng = seed.substream(0)
    checks = max(10, int(40 * scale))
    bad = 0
    from ..smallball import SbpBoundInputs

    for _ in range(checks):
        d = int(rng.integers(1, 4))
        L = float(rng.uniform(math.sqrt((d + 2) / 2.0), 4.0))
        u = float(rng.uniform(0.1, 0.9))
        D = float(rng.uniform(1.0, 50.0))
        t1 = float(rng.uniform(0.0, 2.0))
        t2 = t1 + float(rng.uniform(0.0, 2.0))
        b1 = sbp_formula_bound(SbpBoundInputs(d=d, L=L, u=u, D=D, t=t1))
        b2 = sbp_formula_bound(SbpBoundInputs(d=d, L=L, u=u, D=D, t=t2))
        if b2 < b1 * (1 - 1e-12):
            bad += 1
            continue
        # at the floor, bounds agree with the projection form
        p = projection_sbp_bound(D, L, u, d, t1)
        q = sbp_formula_bound(SbpBoundInputs(d=d, L=L, u=u, D=D, t=t1, det_root=1.0))
        if abs(p - q) > 1e-12 * max(p, q):
            bad += 1
    return PropertyOutcome(
        "smallball.bound-monotonicity", bad == 0, checks, bad, 0,
        "bounds monotone in t; projection form matches det_root = 1",
    )


_PROPERTIES = (
    _prop_lattice_shift_invariance,
    _prop_colspan_column_ops,
    _prop_compressibility_routes,
    _prop_lcd_scaling,
    _prop_lcd_trivial_floor,
    _prop_exact_vs_mc,
    _prop_monotone_in_L,
    _prop_stability,
    _prop_comparison,
    _prop_weight_net_domination,
    _prop_waterfill,
    _prop_net_certificates,
    _prop_level_set_implication,
    _prop_levy,
    _prop_esseen_dominates,
    _prop_sbp_bounds,
)


def run_property_suite(seed: SeedSpec | None = None, scale: float = 1.0) -> SuiteReport:
    """Run every registered property at the given instance-count scale."""
    if seed is None:
        seed = SeedSpec(20260819)
    outcomes = []
    for i, prop in enumerate(_PROPERTIES):
        outcomes.append(prop(seed.child(i), scale))
    n_pass = sum(1 for o in outcomes if o.passed)
    return SuiteReport(tuple(outcomes), n_pass, len(outcomes) - n_pass)
