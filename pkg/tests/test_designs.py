"""Candidate sets, cubature strength checks, and covering radii."""
from __future__ import annotations

import math

import numpy as np
import pytest

from projbalance import (
    CandidateSet,
    DesignFileError,
    DimensionError,
    builtin_design,
    builtin_names,
    covering_radius_estimate,
    cubature_strength_test,
    equiangular_lines_design,
    haar_candidate_set,
    load_design,
    save_design,
)

EXACT_RADIUS_5_LINES = math.sqrt(2.0) * math.sin(math.pi / 10.0)


def test_candidate_set_shape_checks():
    with pytest.raises(DimensionError):
        CandidateSet(np.zeros((3, 4)))
    frames = haar_candidate_set(2, 5, 4, seed=0).frames.copy()
    frames[2, 0, 0] += 0.1
    with pytest.raises(DimensionError) as exc:
        CandidateSet(frames)
    assert "frame 2" in str(exc.value)


def test_haar_candidate_set_reproducible():
    a = haar_candidate_set(2, 6, 10, seed=3)
    b = haar_candidate_set(2, 6, 10, seed=3)
    assert np.array_equal(a.frames, b.frames)
    assert a.frames.shape == (10, 2, 6)


def test_equiangular_lines_are_strength_two():
    for n in (3, 5, 9):
        cands = equiangular_lines_design(n)
        ok, dev = cubature_strength_test(cands, 2, n_trials=100, seed=7, tol=1e-8)
        assert ok, f"n={n} deviated by {dev}"


def test_equiangular_lines_need_three():
    with pytest.raises(DimensionError):
        equiangular_lines_design(2)


def test_builtin_design_is_strength_two():
    cands = builtin_design()
    assert cands.frames.shape == (5, 1, 2)
    ok, dev = cubature_strength_test(cands, 2, n_trials=200, seed=7, tol=1e-8)
    assert ok
    assert dev < 1e-10


def test_builtin_names_and_unknown_name():
    names = builtin_names()
    assert "equiangular-g12-n5" in names
    assert "haar-g24-n10000" in names
    with pytest.raises(KeyError) as exc:
        builtin_design("no-such-design")
    assert "equiangular-g12-n5" in str(exc.value)


def test_builtin_haar_substitute():
    cands = builtin_design("haar-g24-n10000")
    assert cands.frames.shape == (10_000, 2, 4)
    again = builtin_design("haar-g24-n10000")
    assert np.array_equal(cands.frames, again.frames)
    ok, dev = cubature_strength_test(cands, 2, n_trials=50, seed=9, tol=5e-2)
    assert ok, dev


def test_large_haar_set_passes_loose_fails_tight():
    cands = haar_candidate_set(2, 4, 100_000, seed=30)
    for strength in (1, 2):
        ok_loose, dev = cubature_strength_test(cands, strength, 50, seed=31, tol=1e-2)
        ok_tight, _ = cubature_strength_test(cands, strength, 50, seed=31, tol=1e-8)
        assert ok_loose, f"strength {strength} deviated by {dev}"
        assert not ok_tight


def test_single_frame_fails_strength_one():
    cands = CandidateSet(haar_candidate_set(2, 4, 1, seed=4).frames)
    ok, dev = cubature_strength_test(cands, 1, n_trials=20, seed=5, tol=1e-2)
    assert not ok
    assert dev > 0.1


def test_cubature_test_reproducible():
    cands = haar_candidate_set(1, 3, 500, seed=2)
    _, dev1 = cubature_strength_test(cands, 2, n_trials=30, seed=8, tol=1e-2)
    _, dev2 = cubature_strength_test(cands, 2, n_trials=30, seed=8, tol=1e-2)
    assert dev1 == dev2


def test_cubature_strength_validated():
    cands = builtin_design()
    with pytest.raises(ValueError):
        cubature_strength_test(cands, 3, n_trials=10, seed=0)
    with pytest.raises(ValueError):
        cubature_strength_test(cands, 0, n_trials=10, seed=0)


def test_covering_radius_of_five_lines():
    est = covering_radius_estimate(builtin_design(), 20_000, seed=11)
    assert est <= EXACT_RADIUS_5_LINES + 1e-12
    assert abs(est - EXACT_RADIUS_5_LINES) < 1e-3


def test_covering_radius_zero_on_own_elements():
    cands = haar_candidate_set(2, 5, 50, seed=6)
    est = covering_radius_estimate(cands, 0, seed=None, probes=cands.frames)
    assert est < 1e-7


def test_covering_radius_monotone_in_candidates():
    frames = haar_candidate_set(1, 3, 40, seed=9).frames
    small = CandidateSet(frames[:10])
    large = CandidateSet(frames)
    probes = haar_candidate_set(1, 3, 400, seed=10).frames
    r_small = covering_radius_estimate(small, 0, seed=None, probes=probes)
    r_large = covering_radius_estimate(large, 0, seed=None, probes=probes)
    assert r_large <= r_small + 1e-15


def test_fine_net_has_small_radius():
    cands = haar_candidate_set(1, 2, 10_000, seed=12)
    est = covering_radius_estimate(cands, 2000, seed=13)
    assert est <= 0.1


def test_design_roundtrip_and_byte_stability(tmp_path):
    cands = haar_candidate_set(2, 4, 6, seed=14)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_design(cands, p1)
    save_design(cands, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = load_design(p1)
    assert np.array_equal(back.frames, cands.frames)


def test_load_design_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    with pytest.raises(DesignFileError):
        load_design(bad)
    bad.write_text("[]")
    with pytest.raises(DesignFileError):
        load_design(bad)
    bad.write_text('[{"k": 1, "d": 2, "rows": [[1.0, 1.0]]}]')
    with pytest.raises((DesignFileError, DimensionError)) as exc:
        load_design(bad)
    assert "0" in str(exc.value)


def test_load_design_rejects_mixed_shapes(tmp_path):
    bad = tmp_path / "mixed.json"
    bad.write_text(
        '[{"k": 1, "d": 2, "rows": [[1.0, 0.0]]},'
        ' {"k": 1, "d": 3, "rows": [[1.0, 0.0, 0.0]]}]'
    )
    with pytest.raises(DesignFileError) as exc:
        load_design(bad)
    assert "1" in str(exc.value)
