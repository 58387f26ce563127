"""Threshold functions, expected squared lattice distance, and the censored
infimum solver with its comparison/monotonicity/stability utilities."""

import math

import numpy as np
import pytest

from lcdlab import (
    EntryDistribution,
    LcdQuery,
    LcdVariant,
    SeedSpec,
    check_comparison,
    check_monotone_in_L,
    check_stability,
    expected_sq_dist,
    expected_sq_dist_mc,
    gaussian_lattice_sq,
    lcd_infimum,
    lgrid,
    log_rlcd_columns,
    log_rlcd_matrix,
    log_rlcd_subspace,
    stability_epsilon_bound,
    symmetrize,
    threshold,
)
from lcdlab.errors import ConfigError, ResolutionError

RAD = symmetrize(EntryDistribution.rademacher())
GAUSS = symmetrize(EntryDistribution.gaussian(1.0))


# --- expected squared distance ------------------------------------------------


def test_expected_sq_dist_rademacher_quarter():
    # theta=0.25: Xbar = +-2 with prob 1/4 each lands at dist(0.5, Z) = 0.5
    got = expected_sq_dist(0.25, np.array([1.0]), RAD)
    assert got == pytest.approx(0.125, abs=1e-14)


def test_expected_sq_dist_zero_theta():
    got = expected_sq_dist(0.0, np.array([0.7, -0.2]), RAD)
    assert got == 0.0


def test_expected_sq_dist_half_theta_on_lattice():
    got = expected_sq_dist(0.5, np.array([1.0]), RAD)
    assert got == pytest.approx(0.0, abs=1e-14)


def test_expected_sq_dist_separable_over_coordinates():
    v = np.array([0.3, 0.45, 0.7])
    total = expected_sq_dist(0.37, v, RAD)
    parts = sum(
        expected_sq_dist(0.37, np.array([vi]), RAD) for vi in v
    )
    assert total == pytest.approx(parts, abs=1e-13)


def test_expected_sq_dist_mc_agrees_with_exact():
    rng = SeedSpec(41).substream(0)
    for i in range(6):
        n = int(rng.integers(1, 4))
        v = rng.uniform(0.2, 1.5, n)
        theta = float(rng.uniform(0.1, 3.0))
        law = RAD if i % 2 == 0 else GAUSS
        exact = expected_sq_dist(theta, v, law)
        mc, se = expected_sq_dist_mc(theta, v, law, samples=200_000, rng=rng)
        assert abs(mc - exact) <= 4.0 * se


def test_gaussian_lattice_kernel_against_mc():
    rng = SeedSpec(42).substream(0)
    for c in (0.02, 0.2, 0.5, 1.3):
        draws = c * rng.standard_normal(400_000)
        frac = draws - np.round(draws)
        mc = float(np.mean(frac**2))
        se = float(np.std(frac**2) / math.sqrt(draws.size))
        assert abs(gaussian_lattice_sq(c) - mc) <= 4.0 * se


def test_gaussian_kernel_limits():
    # tiny c: everything is near 0, dist^2 ~ c^2; large c: uniform mod 1, 1/12
    assert gaussian_lattice_sq(0.001) == pytest.approx(1e-6, rel=1e-3)
    assert gaussian_lattice_sq(5.0) == pytest.approx(1.0 / 12.0, abs=1e-12)


# --- thresholds ----------------------------------------------------------------


def test_threshold_randomized_logarithmic_examples():
    var = LcdVariant.randomized_logarithmic(1.0, 0.5)
    # u*norm = 1: boundary of log_+
    assert threshold(var, 2.0, np.array([1.0])) == 0.0
    # u*norm = e: log(e) = 1
    assert threshold(var, 2.0 * math.e, np.array([1.0])) == pytest.approx(1.0)


def test_threshold_randomized_min_form():
    var = LcdVariant.randomized(1.0, 0.5)
    assert threshold(var, 10.0, np.array([1.0])) == pytest.approx(1.0)
    # below the cap: u * ||theta v||^2 = 0.5 * 0.04
    assert threshold(var, 0.2, np.array([1.0])) == pytest.approx(0.02)


def test_threshold_essential_and_logarithmic():
    ess = LcdVariant.essential(2.0, 0.3)
    assert threshold(ess, 1.0, np.array([3.0, 4.0])) == pytest.approx(
        min(0.3 * 5.0, 2.0)
    )
    logv = LcdVariant.logarithmic(1.0, 0.5)
    assert threshold(logv, 2.0 * math.e, np.array([1.0])) == pytest.approx(1.0)
    assert threshold(logv, 1.0, np.array([1.0])) == 0.0


def test_variant_validation():
    with pytest.raises(ConfigError):
        LcdVariant.essential(0.0, 0.5)
    with pytest.raises(ConfigError):
        LcdVariant.randomized(1.0, 1.5)


# --- the infimum solver ----------------------------------------------------------


def test_rlcd_closed_form_one_third():
    # crossing of (1/2)(1-2 theta)^2 = u theta^2 at theta = 1/(2 + sqrt(2u))
    q = LcdQuery(LcdVariant.randomized(1.0, 0.5), np.array([1.0]), RAD, 2.0)
    res = lcd_infimum(q)
    assert not res.censored
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-8)


def test_randomized_log_dead_zone_censors():
    # u*theta*||v|| never exceeds L below theta_max: threshold identically 0
    q = LcdQuery(
        LcdVariant.randomized_logarithmic(1.0, 0.5),
        np.array([1.0]),
        RAD,
        theta_max=1.9,
    )
    res = lcd_infimum(q)
    assert res.censored
    assert res.value == 1.9


def test_trivial_floor_for_randomized_log():
    rng = SeedSpec(43).substream(0)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        v = rng.uniform(0.3, 1.5, n)
        L = float(rng.uniform(0.2, 1.0))
        u = float(rng.uniform(0.1, 0.6))
        res = lcd_infimum(
            LcdQuery(LcdVariant.randomized_logarithmic(L, u), v, RAD, 500.0)
        )
        floor = L / (u * float(np.linalg.norm(v)))
        assert res.value >= floor - 1e-9


def test_scaling_identity():
    # logRLCD(c v) = logRLCD(v) / c
    v = np.array([0.62, 0.81])
    q1 = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(0.5, 0.3), v, RAD, 400.0)
    )
    for c in (0.5, 2.0, 3.7):
        qc = lcd_infimum(
            LcdQuery(LcdVariant.randomized_logarithmic(0.5, 0.3), c * v, RAD, 400.0)
        )
        assert not qc.censored
        assert qc.value == pytest.approx(q1.value / c, abs=2e-9 / c + 2e-9)


def test_censored_result_reports_ceiling():
    q = LcdQuery(
        LcdVariant.randomized_logarithmic(2.0, 0.1), np.array([1.0]), RAD, 10.0
    )
    res = lcd_infimum(q)
    assert res.censored and res.value == 10.0 and res.theta_max == 10.0


def test_resolution_error_on_coarse_grid():
    with pytest.raises(ResolutionError):
        lcd_infimum(
            LcdQuery(
                LcdVariant.randomized(1.0, 0.5),
                np.array([1.0]),
                RAD,
                theta_max=5.0,
                grid_step=1.0,  # period bound for Rademacher v=1 is 1/8
            )
        )


def test_fine_explicit_grid_accepted():
    res = lcd_infimum(
        LcdQuery(
            LcdVariant.randomized(1.0, 0.5),
            np.array([1.0]),
            RAD,
            theta_max=2.0,
            grid_step=0.01,
        )
    )
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-8)


def _dense_scan(variant, v, law, theta_max, step=1e-5):
    """Brute-force first-crossing locator used as an independent oracle."""
    thetas = np.arange(step, theta_max + step, step)
    if variant.is_randomized:
        lhs = np.array(
            [expected_sq_dist(t, v, law) for t in thetas]
        )
    else:
        from lcdlab import dist_to_integer_lattice

        lhs = np.array([dist_to_integer_lattice(t * v) for t in thetas])
    rhs = threshold(variant, thetas, v)
    hits = np.flatnonzero(lhs <= rhs - 1e-12)
    return None if hits.size == 0 else float(thetas[hits[0]])


def test_solver_agrees_with_dense_scan():
    rng = SeedSpec(44).substream(0)
    done = 0
    while done < 5:
        L = float(rng.uniform(0.3, 1.2))
        u = float(rng.uniform(0.2, 0.8))
        v = np.array([float(rng.uniform(0.5, 1.5))])
        variant = LcdVariant.randomized(L, u)
        scan = _dense_scan(variant, v, RAD, theta_max=4.0)
        res = lcd_infimum(LcdQuery(variant, v, RAD, 4.0))
        if scan is None:
            assert res.censored
        else:
            assert abs(res.value - scan) <= 2e-5
        done += 1


def test_essential_variant_integer_vector():
    # v = (1,): on [1/2, 1] the lhs is 1 - theta and the rhs is u*theta,
    # so the first strict crossing sits at theta = 1/(1+u)
    res = lcd_infimum(
        LcdQuery(LcdVariant.essential(5.0, 0.9), np.array([1.0]), theta_max=3.0)
    )
    assert res.value == pytest.approx(1.0 / 1.9, abs=1e-8)


def test_essential_requires_no_law():
    res = lcd_infimum(
        LcdQuery(LcdVariant.essential(1.0, 0.5), np.array([0.7]), theta_max=5.0)
    )
    assert res.value > 0


def test_randomized_needs_law():
    with pytest.raises(ConfigError):
        LcdQuery(LcdVariant.randomized(1.0, 0.5), np.array([1.0]))


# --- lgrid -------------------------------------------------------------------


def test_lgrid_two():
    g = lgrid(2.0)
    assert len(g.values) == 21
    assert g.values[0] == 2.0 and g.values[-1] == 4.0
    assert g.values == tuple(pytest.approx(2.0 + i / 10.0) for i in range(21))


def test_lgrid_one():
    g = lgrid(1.0)
    assert len(g.values) == 11
    assert g.values == tuple(pytest.approx(1.0 + i / 10.0) for i in range(11))


def test_lgrid_range_and_validation():
    g = lgrid(3.7)
    assert all(3.7 - 1e-12 <= x <= 7.4 + 1e-12 for x in g.values)
    assert len(g.values) <= 39
    with pytest.raises(ConfigError):
        lgrid(0.9)


# --- column / matrix / subspace reductions ---------------------------------------


def test_columns_min_of_identical_is_single():
    v = np.array([0.8, 0.6])
    single = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(0.4, 0.3), v, RAD, 300.0)
    )
    double = log_rlcd_columns([RAD, RAD], v, 0.4, 0.3, 300.0)
    assert double.value == pytest.approx(single.value, abs=1e-12)


def test_columns_min_below_each_column():
    rng = SeedSpec(45).substream(0)
    laws = [RAD, GAUSS, RAD]
    for _ in range(10):
        v = rng.uniform(0.3, 1.4, 2)
        combined = log_rlcd_columns(laws, v, 0.5, 0.25, 300.0)
        per = [
            log_rlcd_columns([law], v, 0.5, 0.25, 300.0).value for law in laws
        ]
        assert combined.value <= min(per) + 1e-12
        assert combined.value == pytest.approx(min(per), abs=1e-12)


def test_columns_empty_rejected():
    with pytest.raises(ConfigError):
        log_rlcd_columns([], np.array([1.0]), 1.0, 0.5)


def test_matrix_n1_reduces_to_vector():
    v = np.array([0.9, 0.55, 0.3])
    vec = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(0.4, 0.3), v, RAD, 200.0)
    )
    mat = log_rlcd_matrix(
        V=v.reshape(1, 3),  # n=1 row, so V^T theta = theta * v
        law=RAD,
        L=0.4,
        u=0.3,
        theta_max=200.0,
        seed=SeedSpec(46),
    )
    assert mat.value == pytest.approx(vec.value, abs=1e-9)


def test_matrix_estimate_monotone_in_budget():
    rng = SeedSpec(47).substream(0)
    V = rng.standard_normal((4, 2))  # N=4 rows, n=2
    kwargs = dict(law=RAD, L=0.3, u=0.2, theta_max=300.0, seed=SeedSpec(48))
    small = log_rlcd_matrix(V, direction_budget=8, **kwargs)
    big = log_rlcd_matrix(V, direction_budget=64, **kwargs)
    # same seed: the 8 directions are a prefix of the 64
    assert big.value <= small.value + 1e-12


def test_matrix_dense_sweep_oracle_n2():
    rng = SeedSpec(49).substream(0)
    raw = rng.standard_normal((6, 2))
    Q, _ = np.linalg.qr(raw)  # orthonormal 6x2
    est = log_rlcd_matrix(
        Q.T, RAD, 0.3, 0.2, theta_max=120.0, direction_budget=720,
        seed=SeedSpec(50),
    )
    # dense angular sweep as an oracle
    best = math.inf
    for ang in np.linspace(0.0, math.pi, 360, endpoint=False):
        w = np.array([math.cos(ang), math.sin(ang)])
        r = lcd_infimum(
            LcdQuery(
                LcdVariant.randomized_logarithmic(0.3, 0.2), Q @ w, RAD, 120.0
            )
        )
        if not r.censored:
            best = min(best, r.value)
    assert est.value <= best * 1.05 + 1e-9
    assert est.value >= best * 0.95 - 1e-9


def test_subspace_dim1_is_vector_value():
    x = np.array([0.64, 0.48, 0.6])
    x = x / np.linalg.norm(x)
    vec = lcd_infimum(
        LcdQuery(LcdVariant.randomized_logarithmic(0.4, 0.3), x, RAD, 300.0)
    )
    sub = log_rlcd_subspace(
        x.reshape(3, 1), RAD, 0.4, 0.3, theta_max=300.0, seed=SeedSpec(51)
    )
    assert sub.value == pytest.approx(vec.value, abs=1e-9)


def test_subspace_matches_matrix_transpose():
    rng = SeedSpec(52).substream(0)
    for i in range(5):
        raw = rng.standard_normal((6, 2))
        Q, _ = np.linalg.qr(raw)
        sub = log_rlcd_subspace(
            Q, RAD, 0.35, 0.2, theta_max=150.0,
            direction_budget=48, seed=SeedSpec(53, (i,)),
        )
        mat = log_rlcd_matrix(
            Q.T, RAD, 0.35, 0.2, theta_max=150.0,
            direction_budget=48, seed=SeedSpec(53, (i,)),
        )
        assert sub.value == pytest.approx(mat.value, abs=1e-9)


def test_subspace_rejects_skewed_basis():
    basis = np.array([[1.0, 0.5], [0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ConfigError):
        log_rlcd_subspace(basis, RAD, 0.5, 0.3, seed=SeedSpec(54))


def test_full_space_upper_bounded_by_first_unit_vector():
    est = log_rlcd_subspace(
        np.eye(2), RAD, 0.3, 0.25, theta_max=200.0,
        direction_budget=128, seed=SeedSpec(55),
    )
    e1 = lcd_infimum(
        LcdQuery(
            LcdVariant.randomized_logarithmic(0.3, 0.25),
            np.array([1.0, 0.0]), RAD, 200.0,
        )
    )
    # the sampled-direction infimum can only undercut any single witness
    # up to the radial solve tolerance
    assert est.value <= e1.value + 1e-8


# --- monotonicity / comparison / stability -----------------------------------------


def test_monotone_gaussian_instances_hold():
    rng = SeedSpec(56).substream(0)
    held = 0
    for _ in range(6):
        n = int(rng.integers(4, 9))
        v = rng.uniform(0.3, 1.7, n)
        v /= np.linalg.norm(v)
        L2 = float(rng.uniform(0.3, 0.8))
        L1 = L2 * float(rng.uniform(1.05, 1.5))
        verdict = check_monotone_in_L(v, GAUSS, L1, L2, u=0.25, theta_max=4000.0)
        assert verdict.status != "violated"
        held += verdict.status == "held"
    assert held >= 4


def test_monotone_vacuous_when_floor_unmet():
    # Rademacher crossings land just past the dead zone, far below the floor
    verdict = check_monotone_in_L(
        np.array([1.0]), RAD, L1=2.0, L2=1.0, u=0.3, theta_max=500.0
    )
    assert verdict.status == "vacuous"
    assert verdict.value_large_L is None


def test_monotone_rejects_bad_L_order():
    with pytest.raises(ConfigError):
        check_monotone_in_L(np.array([1.0]), RAD, L1=1.0, L2=1.0, u=0.3)


def test_comparison_example_instance():
    verdict = check_comparison(
        np.array([1.0]), RAD, L=1.0, u=0.5, gamma=1.0, t=0.5, theta_max=2000.0
    )
    assert verdict.status in ("held", "hold-at-ceiling")
    assert "gamma" in verdict.symbol_reading


def test_comparison_random_instances_never_violate():
    rng = SeedSpec(57).substream(0)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        v = rng.uniform(0.4, 1.5, n)
        v /= np.linalg.norm(v)
        verdict = check_comparison(
            v, RAD,
            L=float(rng.uniform(1.0, 2.0)), u=0.3,
            gamma=float(rng.uniform(0.5, 1.5)),
            t=float(rng.uniform(0.1, 0.5)),
            theta_max=2000.0,
        )
        assert verdict.status != "violated"


def test_comparison_precondition_enforced():
    with pytest.raises(ConfigError):
        check_comparison(
            np.array([1.0]), RAD, L=1.0, u=0.9, gamma=1.0, t=0.1
        )


def test_stability_sandwich_holds():
    rng = SeedSpec(58).substream(0)
    held = 0
    for i in range(8):
        law = GAUSS if i % 2 == 0 else RAD
        n = int(rng.integers(2, 5))
        x = rng.standard_normal(n)
        x *= float(rng.uniform(0.65, 1.35)) / np.linalg.norm(x)
        L = float(rng.uniform(0.3, 0.9))
        u = float(rng.uniform(0.03, 0.15))
        base = lcd_infimum(
            LcdQuery(LcdVariant.randomized_logarithmic(L, u), x, law, 800.0)
        )
        eps = stability_epsilon_bound(
            base.value, float(np.linalg.norm(x)), L, u, n * 0.5 * law.variance()
        )
        if not (math.isfinite(eps) and eps > 0):
            continue
        y = x + rng.uniform(-1, 1, n) * min(0.9 * eps, 0.05)
        verdict = check_stability(x, y, law, L, u, theta_max=800.0)
        assert verdict.status != "violated"
        held += verdict.status == "held"
    assert held >= 6


def test_stability_vacuous_on_large_perturbation():
    x = np.array([0.8, 0.6])
    y = x + 0.4  # far beyond any epsilon budget
    verdict = check_stability(x, y, RAD, L=0.5, u=0.1, theta_max=400.0)
    assert verdict.status == "vacuous"
    assert verdict.perturbation > verdict.epsilon_bound


def test_stability_vacuous_outside_annulus():
    x = np.array([2.0, 0.1])  # norm > 3/2
    verdict = check_stability(x, x.copy(), RAD, L=0.5, u=0.1, theta_max=400.0)
    assert verdict.status == "vacuous"


def test_stability_rejects_upper_u_overflow():
    with pytest.raises(ConfigError):
        check_stability(
            np.array([1.0]), np.array([1.0]), RAD, L=0.5, u=0.4,
            r1=0.5, r2=1.5,  # 2u r2/r1 = 2.4 >= 1
        )
