"""Entry laws, symmetrization, anti-concentration, and seeded sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from lcdlab import (
    EntryDistribution,
    RandomMatrixModel,
    RandomVectorModel,
    SeedSpec,
    anticoncentration_level,
    distribution_from_spec,
    sample_matrix,
    sample_matrix_block,
    sample_vector,
    sample_vector_block,
    symmetrize,
)
from lcdlab.errors import BudgetError, ConfigError


# --- symmetrize -------------------------------------------------------------


def test_symmetrize_rademacher_atoms():
    s = symmetrize(EntryDistribution.rademacher())
    assert s.values == (-2.0, 0.0, 2.0)
    assert s.probs == (0.25, 0.5, 0.25)


def test_symmetrize_point_mass_is_zero():
    s = symmetrize(EntryDistribution.point_mass(7.0))
    assert s.values == (0.0,)
    assert s.probs == (1.0,)


def test_symmetrize_gaussian_scales_sigma():
    s = symmetrize(EntryDistribution.gaussian(1.0))
    assert s.sigma == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert s.variance() == pytest.approx(2.0, abs=1e-12)


def test_symmetrize_is_symmetric_and_centered():
    law = EntryDistribution.finite([(0.3, 0.2), (1.0, 0.5), (-2.0, 0.3)])
    s = symmetrize(law)
    vals = np.array(s.values)
    probs = np.array(s.probs)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    # support symmetric about 0 with matching masses
    for v, p in zip(vals, probs):
        j = np.flatnonzero(vals == -v)
        assert j.size == 1 and probs[j[0]] == pytest.approx(p, abs=1e-12)
    assert float(vals @ probs) == pytest.approx(0.0, abs=1e-12)
    # Var(X - X') = 2 Var(X)
    assert s.variance() == pytest.approx(2.0 * law.variance(), abs=1e-12)


def test_atom_budget_enforced():
    with pytest.raises(BudgetError):
        EntryDistribution.uniform_atoms(list(range(65)))


def test_finite_law_validation():
    with pytest.raises(ConfigError):
        EntryDistribution(kind="finite", values=(1.0,), probs=(0.5,))
    with pytest.raises(ConfigError):
        EntryDistribution(kind="gaussian", sigma=0.0)
    with pytest.raises(ConfigError):
        EntryDistribution(kind="weird")


# --- anticoncentration_level -------------------------------------------------


def test_anticoncentration_rademacher():
    assert anticoncentration_level(EntryDistribution.rademacher()) == pytest.approx(0.5)


def test_anticoncentration_point_mass():
    assert anticoncentration_level(EntryDistribution.point_mass(0.0)) == 1.0


def test_anticoncentration_gaussian():
    expected = 2.0 * norm.cdf(1.0) - 1.0
    got = anticoncentration_level(EntryDistribution.gaussian(1.0))
    assert got == pytest.approx(expected, abs=1e-12)


def test_anticoncentration_full_mass_window():
    # an interval of length 2 carrying all mass forces level 1
    law = EntryDistribution.finite([(0.0, 0.4), (1.5, 0.6)])
    assert anticoncentration_level(law) == pytest.approx(1.0)


@given(
    st.lists(
        st.tuples(
            st.floats(-50, 50, allow_nan=False),
            st.floats(0.01, 1.0),
        ),
        min_size=1,
        max_size=10,
        unique_by=lambda t: t[0],
    )
)
@settings(max_examples=60, deadline=None)
def test_anticoncentration_in_unit_interval(pairs):
    total = sum(p for _, p in pairs)
    law = EntryDistribution.finite([(v, p / total) for v, p in pairs])
    level = anticoncentration_level(law)
    assert 0.0 < level <= 1.0 + 1e-12
    # the window achieving the sup must cover at least the largest atom
    assert level >= max(p / total for _, p in pairs) - 1e-12


# --- sampling ----------------------------------------------------------------


def test_sample_vector_point_mass():
    model = RandomVectorModel.iid(EntryDistribution.point_mass(3.0), 4)
    v = sample_vector(model, SeedSpec(1), 0)
    assert np.array_equal(v, np.array([3.0, 3.0, 3.0, 3.0]))


def test_sample_vector_rademacher_support():
    model = RandomVectorModel.iid(EntryDistribution.rademacher(), 50)
    v = sample_vector(model, SeedSpec(2), 5)
    assert set(np.unique(v)).issubset({-1.0, 1.0})


def test_sample_vector_bernoulli_mean():
    model = RandomVectorModel.iid(EntryDistribution.bernoulli(0.3), 1)
    block = sample_vector_block(model, SeedSpec(3).substream(0), 100_000)
    mean = float(block[:, 0].mean())
    stderr = math.sqrt(0.3 * 0.7 / 100_000)
    assert abs(mean - 0.3) <= 3.0 * stderr


def test_sample_matrix_point_mass():
    model = RandomMatrixModel.iid(EntryDistribution.point_mass(1.0), 2, 2)
    m = sample_matrix(model, SeedSpec(4), 0)
    assert np.array_equal(m, np.ones((2, 2)))


def test_sample_matrix_rademacher_hs_norm():
    # every draw has squared HS norm exactly rows*cols
    model = RandomMatrixModel.iid(EntryDistribution.rademacher(), 4, 3)
    block = sample_matrix_block(model, SeedSpec(5).substream(0), 200)
    hs = np.sum(block**2, axis=(1, 2))
    assert np.all(hs == 12.0)


def test_sampling_is_pure_in_seed_and_index():
    model = RandomVectorModel.iid(EntryDistribution.gaussian(1.0), 8)
    a = sample_vector(model, SeedSpec(6, (1, 2)), 3)
    b = sample_vector(model, SeedSpec(6, (1, 2)), 3)
    c = sample_vector(model, SeedSpec(6, (1, 2)), 4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)

    mm = RandomMatrixModel.iid(EntryDistribution.rademacher(), 5, 4)
    ma = sample_matrix(mm, SeedSpec(7), 0)
    mb = sample_matrix(mm, SeedSpec(7), 0)
    mc = sample_matrix(mm, SeedSpec(7), 1)
    assert np.array_equal(ma, mb)
    assert not np.array_equal(ma, mc)


def test_seedspec_child_extends_path():
    s = SeedSpec(11)
    assert s.child(2, 5).path == (2, 5)
    r1 = s.child(2).substream(0).standard_normal(4)
    r2 = SeedSpec(11, (2,)).substream(0).standard_normal(4)
    assert np.array_equal(r1, r2)


def test_finite_law_moments_match_samples():
    law = EntryDistribution.finite([(-1.0, 0.25), (0.5, 0.5), (2.0, 0.25)])
    model = RandomVectorModel.iid(law, 1)
    block = sample_vector_block(model, SeedSpec(8).substream(0), 1_000_000)[:, 0]
    n = block.size
    mean_se = math.sqrt(law.variance() / n)
    assert abs(block.mean() - law.mean()) <= 4.0 * mean_se
    m2 = law.second_moment()
    m4 = sum(p * v**4 for v, p in zip(law.values, law.probs))
    m2_se = math.sqrt(max(m4 - m2**2, 0.0) / n)
    assert abs(np.mean(block**2) - m2) <= 4.0 * m2_se


# --- matrix model broadcasts --------------------------------------------------


def test_per_column_layout():
    cols = [EntryDistribution.point_mass(float(j)) for j in range(3)]
    model = RandomMatrixModel.per_column(cols, rows=2)
    m = sample_matrix(model, SeedSpec(9), 0)
    assert np.array_equal(m, np.tile([0.0, 1.0, 2.0], (2, 1)))


def test_per_row_layout():
    rows = [EntryDistribution.point_mass(float(i)) for i in range(3)]
    model = RandomMatrixModel.per_row(rows, cols=2)
    m = sample_matrix(model, SeedSpec(9), 0)
    assert np.array_equal(m, np.repeat([[0.0], [1.0], [2.0]], 2, axis=1))


def test_grid_layout_and_expected_hs():
    grid = [
        [EntryDistribution.point_mass(1.0), EntryDistribution.gaussian(2.0)],
        [EntryDistribution.rademacher(), EntryDistribution.point_mass(0.0)],
    ]
    model = RandomMatrixModel.from_grid(grid)
    # E||A||_HS^2 = 1 + 4 + 1 + 0
    assert model.expected_hs_sq() == pytest.approx(6.0)
    m = sample_matrix(model, SeedSpec(10), 0)
    assert m[0, 0] == 1.0 and m[1, 1] == 0.0 and m[1, 0] in (-1.0, 1.0)


# --- config-facing parsing ----------------------------------------------------


def test_distribution_from_spec_kinds():
    assert distribution_from_spec({"kind": "rademacher"}).values == (-1.0, 1.0)
    g = distribution_from_spec({"kind": "gaussian", "sigma": 2.0})
    assert g.sigma == 2.0
    f = distribution_from_spec(
        {"kind": "finite-support", "atoms": [[0.0, 0.5], [1.0, 0.5]], "mean-shift": 1.0}
    )
    assert f.values == (1.0, 2.0)
    b = distribution_from_spec({"kind": "bernoulli", "p": 0.25})
    assert b.probs == (0.75, 0.25)
    u = distribution_from_spec({"kind": "uniform", "values": [1, 2, 4]})
    assert u.values == (1.0, 2.0, 4.0)


def test_distribution_from_spec_rejects_garbage():
    with pytest.raises(ConfigError):
        distribution_from_spec({"kind": "cauchy"})
    with pytest.raises(ConfigError):
        distribution_from_spec({"sigma": 1.0})
    with pytest.raises(ConfigError):
        distribution_from_spec({"kind": "gaussian"})
