"""Weight nets, annulus lattices, water-filling, level sets, spread lattices."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from lcdlab import (
    BudgetError,
    ConfigError,
    EntryDistribution,
    InfeasibleError,
    LevelSetQuery,
    SeedSpec,
    SphereParams,
    WeightVector,
    approximate_on_net,
    column_norms_sq,
    dominated_element,
    enumerate_annulus_lattice,
    level_set_classify,
    log_rlcd_columns,
    regularized_hs,
    regularized_hs_batch,
    sample_structured_lattice,
    weight_net,
    weight_net_constant,
)

E2 = math.e**2


# --- weight nets -------------------------------------------------------------


def test_weight_net_single_coordinate():
    # n=1, kappa=e^2: exponent sum floor(1*(1+2)) = 3, one composition
    net = weight_net(E2, 1)
    assert len(net) == 1
    assert net[0].exponents == (3,)
    assert net[0].alpha == (math.exp(-3.0),)
    assert math.isclose(weight_net_constant(len(net), E2, 1), 0.5)


def test_weight_net_product_floor():
    net = weight_net(E2, 3)
    assert len(net) == math.comb(9 + 2, 2)  # compositions of 9 into 3 parts
    for wv in net:
        assert sum(wv.exponents) == 9
        assert math.isclose(wv.log_product(), -9.0)
        assert wv.in_omega(math.e * E2)  # the net lives in the enlarged region


@pytest.mark.parametrize("n,kappa", [(1, E2), (2, 4.2), (3, E2), (3, 5.5)])
def test_weight_net_domination_audit(n, kappa):
    rng = SeedSpec(11, (1, n)).substream(0)
    net_exponents = {wv.exponents for wv in weight_net(kappa, n)}
    for i in range(300):
        logs = -rng.uniform(0, math.log(kappa), size=n)
        if i % 2 == 0:  # push half the draws onto the product boundary
            logs *= (n * math.log(kappa)) / max(-logs.sum(), 1e-12)
        beta = np.exp(logs)
        witness = dominated_element(beta, kappa)
        assert witness.exponents in net_exponents
        assert np.all(witness.as_array() <= beta * (1 + 1e-12))


def test_weight_net_requires_kappa_above_e():
    with pytest.raises(ConfigError):
        weight_net(math.e, 2)
    with pytest.raises(ConfigError):
        weight_net(2.5, 2)
    with pytest.raises(ConfigError):
        dominated_element([0.9, 0.9], 2.5)


def test_weight_net_size_budget():
    with pytest.raises(BudgetError) as exc:
        weight_net(E2, 12)
    assert exc.value.estimate > 2_000_000


def test_dominated_element_rejects_outside_region():
    with pytest.raises(ConfigError):
        dominated_element([math.exp(-3.0)], E2)  # product below e^{-2}


def test_weight_vector_validation():
    with pytest.raises(ConfigError):
        WeightVector(alpha=())
    with pytest.raises(ConfigError):
        WeightVector(alpha=(0.0, 0.5))
    with pytest.raises(ConfigError):
        WeightVector(alpha=(1.2,))
    with pytest.raises(ConfigError):
        weight_net_constant(0, E2, 1)


# --- annulus lattices --------------------------------------------------------


def test_annulus_line_census():
    lat = enumerate_annulus_lattice((1.0,), 1.0, 1)
    assert lat.mode == "exact"
    assert lat.count == 2
    assert sorted(lat.points[:, 0]) == [-1.0, 1.0]  # unit grid traps only ±1
    assert 0.0 not in lat.points[:, 0]


def test_annulus_plane_census_matches_brute_force():
    eps = 0.5
    lat = enumerate_annulus_lattice((1.0, 1.0), eps, 2)
    h = eps / math.sqrt(2.0)
    brute = []
    for kx, ky in itertools.product(range(-4, 5), repeat=2):
        p = (kx * h, ky * h)
        r = math.hypot(*p)
        if 0.5 * (1 - 1e-9) <= r <= 1.5 * (1 + 1e-9):
            brute.append(p)
    got = {tuple(np.round(p, 12)) for p in lat.points}
    want = {tuple(np.round(p, 12)) for p in brute}
    assert got == want
    assert lat.count == len(brute)


def test_annulus_origin_never_included():
    for n in (1, 2, 3):
        lat = enumerate_annulus_lattice((1.0,) * n, 0.8, n)
        assert not np.any(np.all(lat.points == 0.0, axis=1))
        norms = np.linalg.norm(lat.points, axis=1)
        assert np.all(norms >= 0.5 * (1 - 1e-9))
        assert np.all(norms <= 1.5 * (1 + 1e-9))


def test_annulus_budget_abort():
    with pytest.raises(BudgetError) as exc:
        enumerate_annulus_lattice((1.0, 1.0), 0.01, 2, budget=1000)
    assert exc.value.estimate > 1000


def test_annulus_sampled_mode():
    seed = SeedSpec(7, (2,))
    lat = enumerate_annulus_lattice(
        (1.0,) * 12, 0.5, 12, mode="sampled", seed=seed, sample_count=2000
    )
    assert lat.mode == "sampled"
    assert lat.count == 2000
    assert 0.0 < lat.acceptance_rate <= 1.0
    h = lat.steps()
    ratio = lat.points / h
    assert np.allclose(ratio, np.rint(ratio), atol=1e-9)
    norms = np.linalg.norm(lat.points, axis=1)
    assert np.all((norms >= 0.5 * (1 - 1e-9)) & (norms <= 1.5 * (1 + 1e-9)))
    again = enumerate_annulus_lattice(
        (1.0,) * 12, 0.5, 12, mode="sampled", seed=seed, sample_count=2000
    )
    assert np.array_equal(lat.points, again.points)


def test_annulus_validation():
    with pytest.raises(ConfigError):
        enumerate_annulus_lattice((1.0, 1.0), 0.5, 3)  # alpha length mismatch
    with pytest.raises(ConfigError):
        enumerate_annulus_lattice((1.0,), 0.0, 1)
    with pytest.raises(ConfigError):
        enumerate_annulus_lattice((1.0,) * 11, 0.5, 11, mode="exact")
    with pytest.raises(ConfigError):
        enumerate_annulus_lattice((1.0,), 0.5, 1, mode="bogus")
    with pytest.raises(ConfigError):
        enumerate_annulus_lattice((1.5,), 0.5, 1)  # weights above 1


# --- water-filling -----------------------------------------------------------


def test_waterfill_symmetric_pair():
    res = regularized_hs((1.0, 1.0), E2)
    assert np.allclose(res.alpha, (math.exp(-2.0),) * 2, atol=1e-14)
    assert math.isclose(res.value, 2.0 * math.exp(-4.0), rel_tol=1e-13)
    assert res.active == (0, 1)
    assert res.kkt_residual < 1e-12
    assert math.isclose(res.lam, math.exp(-2.0), rel_tol=1e-13)


def test_waterfill_free_coordinate():
    # zero-cost column keeps alpha=1; the other absorbs the whole product floor
    res = regularized_hs((0.0, 4.0), E2)
    assert res.alpha[0] == 1.0
    assert math.isclose(res.alpha[1], math.exp(-4.0), rel_tol=1e-13)
    assert math.isclose(res.value, 4.0 * math.exp(-8.0), rel_tol=1e-13)
    assert res.active == (1,)
    assert res.kkt_residual < 1e-12


def test_waterfill_zero_matrix():
    res = regularized_hs((0.0, 0.0, 0.0), E2)
    assert res.value == 0.0
    assert res.alpha == (1.0, 1.0, 1.0)
    assert res.kkt_residual == 0.0


def _waterfill_brute_force(norms_sq, kappa, step):
    """2-D grid over (log a1, log a2); a3 binds the product constraint."""
    n1, n2, n3 = norms_sq
    target = -3.0 * math.log(kappa)
    grid = np.arange(target, 0.0 + step / 2, step)
    best = math.inf
    for a1 in grid:
        a3 = target - a1 - grid
        ok = a3 <= 1e-15
        if not np.any(ok):
            continue
        vals = (
            math.exp(2 * a1) * n1
            + np.exp(2 * grid[ok]) * n2
            + np.exp(2 * a3[ok]) * n3
        )
        best = min(best, float(vals.min()))
    return best


def test_waterfill_matches_brute_force():
    rng = SeedSpec(5, (3,)).substream(0)
    for _ in range(6):
        norms_sq = rng.uniform(0.25, 4.0, size=3)
        res = regularized_hs(norms_sq, E2)
        brute = _waterfill_brute_force(norms_sq, E2, step=2e-3)
        assert brute >= res.value - 1e-12  # exact solve is the true minimum
        assert brute - res.value <= 1e-4 * res.value + 1e-9


def test_waterfill_kkt_and_feasibility():
    rng = SeedSpec(5, (4,)).substream(0)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        norms_sq = np.exp(rng.normal(0.0, 1.2, size=n)) * rng.uniform(0.1, 3.0)
        kappa = float(rng.uniform(2.9, 20.0))
        res = regularized_hs(norms_sq, kappa)
        alpha = np.asarray(res.alpha)
        assert np.all((alpha > 0) & (alpha <= 1.0))
        assert res.kkt_residual < 1e-10
        assert np.sum(np.log(alpha)) >= -n * math.log(kappa) - 1e-9
        assert math.isclose(
            res.value, float(np.sum(alpha**2 * norms_sq)), rel_tol=1e-12
        )
        # alpha = 1 is feasible, so the regularized norm never exceeds HS^2
        assert res.value <= float(np.sum(norms_sq)) * (1 + 1e-12)
        # larger kappa enlarges the feasible set
        looser = regularized_hs(norms_sq, kappa * 1.5)
        assert looser.value <= res.value * (1 + 1e-12)


def test_waterfill_batch_matches_loop():
    rng = SeedSpec(5, (5,)).substream(0)
    arr = np.exp(rng.normal(0.0, 1.0, size=(15, 4)))
    values, alphas = regularized_hs_batch(arr, E2)
    for b in range(arr.shape[0]):
        res = regularized_hs(arr[b], E2)
        assert values[b] == res.value
        assert np.array_equal(alphas[b], np.asarray(res.alpha))


def test_waterfill_validation():
    with pytest.raises(ConfigError):
        regularized_hs((1.0,), 1.0)
    with pytest.raises(ConfigError):
        regularized_hs((), E2)
    with pytest.raises(ConfigError):
        regularized_hs((-1.0, 2.0), E2)
    with pytest.raises(ConfigError):
        column_norms_sq(np.ones(3))


def test_column_norms_sq():
    A = np.array([[1.0, 2.0], [2.0, 0.0]])
    assert np.allclose(column_norms_sq(A), [5.0, 4.0])


def test_regularized_hs_concentration_one_sided():
    # fraction of gaussian draws with B_kappa >= 2 E||A||_HS^2 stays below
    # (kappa/sqrt 2)^{-2n}; far from tight at these sizes, hence one-sided
    for n, draws in ((4, 100_000), (8, 100_000)):
        rng = SeedSpec(29, (6, n)).substream(0)
        A = rng.standard_normal((draws, n, n))
        norms_sq = np.einsum("bij,bij->bj", A, A)
        values, _ = regularized_hs_batch(norms_sq, E2)
        threshold = 2.0 * n * n
        fraction = float(np.mean(values >= threshold))
        bound = (E2 / math.sqrt(2.0)) ** (-2 * n)
        assert fraction <= bound


# --- rounding onto the optimal net -------------------------------------------


def test_net_approx_grid_point_is_fixed():
    rng = SeedSpec(13, (7,)).substream(0)
    A = rng.standard_normal((3, 3))
    x = rng.standard_normal(3)
    x /= np.linalg.norm(x)
    first = approximate_on_net(A, x, E2, 0.25)
    res = approximate_on_net(A, first.y, E2, 0.25)
    assert np.array_equal(res.y, first.y)
    assert res.linf_err == 0.0
    assert res.image_err == 0.0


def test_net_approx_certificates_random():
    rng = SeedSpec(13, (8,)).substream(0)
    for i in range(200):
        n = int(rng.integers(2, 33))
        if i % 2 == 0:
            A = rng.standard_normal((n, n))
        else:
            A = rng.choice([-1.0, 1.0], size=(n, n))
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        eps = float(rng.uniform(0.1, 0.9))
        kappa = E2 if i % 3 else 10.0
        res = approximate_on_net(A, x, kappa, eps)
        assert res.linf_ok
        assert res.image_ok
        assert res.linf_err <= eps / math.sqrt(n) * (1 + 1e-12)
        assert res.image_err <= res.image_bound * (1 + 1e-12)
        assert res.hs_value <= float(np.sum(A * A)) * (1 + 1e-12)
        # rounding moves x by at most eps/2 in l2, so the annulus holds
        assert not res.annulus_miss
        h = np.asarray(res.alpha_star) * eps / math.sqrt(n)
        ratio = res.y / h
        assert np.allclose(ratio, np.rint(ratio), atol=1e-9)


def test_net_approx_validation():
    A = np.eye(3)
    with pytest.raises(ConfigError):
        approximate_on_net(np.ones(3), np.ones(3), E2, 0.5)
    with pytest.raises(ConfigError):
        approximate_on_net(A, np.ones(2), E2, 0.5)
    with pytest.raises(ConfigError):
        approximate_on_net(A, np.ones(3), E2, 0.0)


# --- level sets --------------------------------------------------------------


def _adaptive_level_instance(rng, ratio=None):
    """Probe an instance's column denominator, then aim D so value/D = ratio."""
    n = int(rng.integers(2, 5))
    if rng.random() < 0.5:
        laws = [EntryDistribution.rademacher() for _ in range(n)]
    else:
        laws = [EntryDistribution.gaussian(1.0) for _ in range(n)]
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    probe = log_rlcd_columns(laws, x, 1.0, 0.12, 400.0)
    if probe.censored:
        return None
    r = ratio if ratio is not None else float(rng.uniform(0.9, 2.2))
    D = max(1.0, probe.value / r)
    return x, laws, LevelSetQuery(1.0, 0.12, D), max(400.0, 2.2 * D)


def test_level_set_core_membership():
    rng = SeedSpec(17, (9,)).substream(0)
    inst = None
    while inst is None:
        inst = _adaptive_level_instance(rng, ratio=1.5)
    x, laws, query, theta_max = inst
    res = level_set_classify(x, laws, query, theta_max)
    assert res.label == "core"
    assert res.in_annulus and res.in_core and res.in_widened
    assert not res.core_result.censored
    assert query.D <= res.core_result.value <= 2.0 * query.D
    assert math.isclose(res.norm, 1.0, rel_tol=1e-12)


def test_level_set_annulus_miss():
    res = level_set_classify(
        np.array([2.0, 0.0]),
        [EntryDistribution.rademacher()] * 2,
        LevelSetQuery(1.0, 0.12, 2.0),
        theta_max=10.0,
    )
    assert res.label == "annulus-miss"
    assert not (res.in_annulus or res.in_core or res.in_widened)
    assert res.core_result is None


def test_level_set_core_implies_widened():
    rng = SeedSpec(17, (10,)).substream(0)
    cores = 0
    for _ in range(25):
        inst = _adaptive_level_instance(rng)
        if inst is None:
            continue
        x, laws, query, theta_max = inst
        res = level_set_classify(x, laws, query, theta_max)
        assert res.in_core == (res.label == "core")
        if res.in_core:
            cores += 1
            assert res.in_widened  # relaxed parameters only widen the set
    assert cores >= 5


def test_level_set_validation():
    with pytest.raises(ConfigError):
        LevelSetQuery(1.0, 0.2, 2.0)  # widened parameters need u < 1/6
    with pytest.raises(ConfigError):
        LevelSetQuery(1.0, 0.12, 0.0)
    with pytest.raises(ConfigError):
        LevelSetQuery(0.0, 0.12, 1.0)
    with pytest.raises(ConfigError):
        level_set_classify(
            np.array([1.0, 0.0]),
            [EntryDistribution.rademacher()] * 2,
            LevelSetQuery(1.0, 0.12, 8.0),
            theta_max=10.0,  # below 2D
        )


# --- structured spread lattices ----------------------------------------------


def test_structured_lattice_line_support_and_uniformity():
    params = SphereParams(delta=0.5, rho=0.5)
    count = 20_000
    sample = sample_structured_lattice(
        (0.01,), params, count, SeedSpec(23, (11,))
    )
    assert sample.count == count
    ks = np.rint(sample.points[:, 0] / 0.01).astype(int)
    assert np.allclose(sample.points[:, 0], ks * 0.01, atol=1e-12)
    # admissible coordinates: |k| in [25, 150]  (252 lattice points)
    assert np.all((np.abs(ks) >= 25) & (np.abs(ks) <= 150))
    support, counts = np.unique(ks, return_counts=True)
    assert support.size == 252
    p = 1.0 / 252.0
    stderr = math.sqrt(count * p * (1 - p))
    assert np.max(np.abs(counts - count * p)) <= 4.0 * stderr
    assert 0.0 < sample.acceptance_rate <= 1.0


def test_structured_lattice_constraints():
    lambdas = (0.008, 0.01, 0.0009, 0.009)
    params = SphereParams(delta=0.5, rho=0.5)
    sample = sample_structured_lattice(
        lambdas, params, 500, SeedSpec(23, (12,))
    )
    pts = sample.points
    n = 4
    h = np.asarray(lambdas) / math.sqrt(n)
    ratio = pts / h
    assert np.allclose(ratio, np.rint(ratio), atol=1e-9)
    norms = np.linalg.norm(pts, axis=1)
    assert np.all(norms <= 1.5 * (1 + 1e-9))
    floor = params.rho / (2.0 * math.sqrt(n))
    spread_counts = (np.abs(pts) >= floor * (1 - 1e-9)).sum(axis=1)
    assert np.all(spread_counts >= params.delta * n - 1e-9)


def test_structured_lattice_scale_window():
    params = SphereParams(delta=0.5, rho=0.5)
    seed = SeedSpec(23, (13,))
    with pytest.raises(ConfigError):
        sample_structured_lattice((0.005,), params, 10, seed)  # n=1 pins 0.01
    with pytest.raises(ConfigError):
        sample_structured_lattice((0.02,), params, 10, seed)
    with pytest.raises(ConfigError):
        # below the 6^-3 floor at n=3
        sample_structured_lattice((0.003, 0.005, 0.005), params, 10, seed)
    ok = sample_structured_lattice((0.005, 0.005, 0.005), params, 5, seed)
    assert ok.count == 5


def test_structured_lattice_infeasible_aborts():
    params = SphereParams(delta=0.1, rho=0.1)
    with pytest.raises(InfeasibleError):
        # the ball occupies ~2.5e-8 of the n=20 bounding box
        sample_structured_lattice(
            (0.01,) * 20, params, 3, SeedSpec(23, (14,))
        )


def test_structured_lattice_validation():
    params = SphereParams(delta=0.5, rho=0.5)
    with pytest.raises(ConfigError):
        sample_structured_lattice((), params, 5, SeedSpec(0))
    with pytest.raises(ConfigError):
        sample_structured_lattice((0.01,), params, 0, SeedSpec(0))
