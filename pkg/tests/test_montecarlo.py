from __future__ import annotations

import numpy as np
import pytest

from projbalance import (
    PointCloud,
    closed_form_moments,
    pair_stats_over_haar,
    subspace_coords,
    total_variance,
)


@pytest.fixture(scope="module")
def cloud():
    rng = np.random.default_rng(21)
    return PointCloud(rng.standard_normal((8, 12)))


def test_shapes_and_engine_label(cloud):
    stats = pair_stats_over_haar(cloud, 3, 500, seed=1, engine="direct")
    assert stats.engine == "direct"
    for arr in (stats.tvar, stats.mean_rel, stats.var_rel, stats.min_rel, stats.max_rel):
        assert arr.shape == (500,)
    assert np.all(stats.min_rel <= stats.mean_rel)
    assert np.all(stats.mean_rel <= stats.max_rel)
    assert np.all(stats.var_rel >= 0.0)


def test_same_seed_same_draws(cloud):
    a = pair_stats_over_haar(cloud, 3, 200, seed=9, engine="direct")
    b = pair_stats_over_haar(cloud, 3, 200, seed=9, engine="direct")
    assert np.array_equal(a.mean_rel, b.mean_rel)
    assert np.array_equal(a.tvar, b.tvar)
    c = pair_stats_over_haar(cloud, 3, 200, seed=10, engine="direct")
    assert not np.array_equal(a.mean_rel, c.mean_rel)


def test_reduced_engine_reproducible(cloud):
    a = pair_stats_over_haar(cloud, 3, 200, seed=9, engine="reduced")
    b = pair_stats_over_haar(cloud, 3, 200, seed=9, engine="reduced")
    assert a.engine == "reduced"
    assert np.array_equal(a.mean_rel, b.mean_rel)


def test_engines_agree_with_closed_forms(cloud):
    cm = closed_form_moments(cloud, 3)
    for engine in ("direct", "reduced"):
        stats = pair_stats_over_haar(cloud, 3, 20_000, seed=5, engine=engine)
        n = stats.mean_rel.size
        for sample, exact, var in (
            (stats.mean_rel, cm.e_M, cm.var_M),
            (stats.tvar, cm.e_tvar, cm.var_tvar),
        ):
            halfwidth = 5.0 * np.sqrt(var / n)
            assert abs(sample.mean() - exact) < halfwidth, engine


def test_engines_agree_with_each_other(cloud):
    a = pair_stats_over_haar(cloud, 2, 20_000, seed=3, engine="direct")
    b = pair_stats_over_haar(cloud, 2, 20_000, seed=4, engine="reduced")
    cm = closed_form_moments(cloud, 2)
    tol = 6.0 * np.sqrt(2.0 * cm.var_M / 20_000)
    assert abs(a.mean_rel.mean() - b.mean_rel.mean()) < tol


def test_full_rank_shortcut(cloud):
    stats = pair_stats_over_haar(cloud, cloud.d, 50, seed=0)
    assert stats.engine == "identity"
    tv = total_variance(cloud)
    assert np.allclose(stats.tvar, tv, rtol=1e-14)
    assert np.allclose(stats.mean_rel, 1.0, atol=1e-14)
    assert np.allclose(stats.var_rel, 0.0, atol=1e-14)


def test_auto_engine_is_one_of_the_real_ones(cloud):
    stats = pair_stats_over_haar(cloud, 3, 100, seed=2, engine="auto")
    assert stats.engine in ("direct", "reduced")


def test_unknown_engine_rejected(cloud):
    with pytest.raises(ValueError):
        pair_stats_over_haar(cloud, 3, 10, seed=0, engine="quantum")


def test_draw_count_must_be_positive(cloud):
    with pytest.raises(ValueError):
        pair_stats_over_haar(cloud, 3, 0, seed=0)


def test_subspace_coords_preserve_geometry():
    rng = np.random.default_rng(17)
    x = PointCloud(rng.standard_normal((6, 40)))
    diffs = x.pair_diffs
    coords = subspace_coords(diffs)
    assert coords.shape[1] == 5  # m - 1 for points in general position
    assert np.abs(coords @ coords.T - diffs @ diffs.T).max() < 1e-8


def test_subspace_coords_low_rank_input():
    base = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    diffs = np.vstack([base[0], base[0] * 2.0, base[1]])
    coords = subspace_coords(diffs)
    assert coords.shape == (3, 2)
    assert np.abs(np.linalg.norm(coords, axis=1) - [1.0, 2.0, 1.0]).max() < 1e-12


def test_complement_sizes_give_matching_laws(cloud):
    # k and d-k subspaces are drawn through the same reduced problem, so
    # the mean statistic must satisfy E M = 1 on both sides.
    lo = pair_stats_over_haar(cloud, 2, 20_000, seed=11)
    hi = pair_stats_over_haar(cloud, cloud.d - 2, 20_000, seed=11)
    assert abs(lo.mean_rel.mean() - 1.0) < 0.02
    assert abs(hi.mean_rel.mean() - 1.0) < 0.01
