"""Proximal and projection operators against closed forms and the oracles."""

import numpy as np
import pytest

from apdpro.problem import BlockNormObjective
from apdpro.prox import (
    DualSlab,
    InfeasibleCutError,
    block_soft_threshold,
    project_dual_set,
    prox_f_over_ball,
)
from helpers import random_partition
from oracles import project_oracle, prox_oracle


def _l1(n):
    return BlockNormObjective(blocks=tuple((i, 1) for i in range(n)), weights=np.ones(n))


def test_soft_threshold_scalar_shrinkage():
    out = block_soft_threshold(np.array([3.0, -0.5]), _l1(2), 1.0)
    assert np.array_equal(out, [2.0, 0.0])


def test_soft_threshold_tiny_step_is_identity_limit():
    v = np.array([3.0, -0.5])
    out = block_soft_threshold(v, _l1(2), 1e-12)
    assert np.allclose(out, v, atol=1e-11)


def test_soft_threshold_block_formula():
    obj = BlockNormObjective(blocks=((0, 2),), weights=(1.0,))
    out = block_soft_threshold(np.array([3.0, 4.0]), obj, 1.0)  # norm 5
    assert np.allclose(out, [2.4, 3.2], atol=1e-15)


def test_soft_threshold_rejects_bad_step():
    with pytest.raises(ValueError):
        block_soft_threshold(np.zeros(2), _l1(2), 0.0)


def test_prox_unconstrained_when_ball_is_huge():
    out = prox_f_over_ball(np.array([3.0, -0.5]), 1.0, _l1(2), (np.zeros(2), 100.0))
    assert np.array_equal(out, [2.0, 0.0])


def test_prox_zero_objective_is_ball_projection():
    obj = BlockNormObjective(blocks=((0, 1), (1, 1)), weights=(0.0, 0.0))
    out = prox_f_over_ball(np.array([3.0, 0.0]), 1.0, obj, (np.zeros(2), 1.0))
    assert np.allclose(out, [1.0, 0.0], atol=1e-10)


def test_prox_boundary_case_1d():
    # Unconstrained prox is 2; the objective decreases toward it on [-1, 1].
    out = prox_f_over_ball(np.array([3.0]), 1.0, _l1(1), (np.zeros(1), 1.0))
    assert out[0] == pytest.approx(1.0, abs=1e-10)


def test_prox_stays_in_ball():
    rng = np.random.default_rng(5)
    for _ in range(500):
        n = int(rng.integers(1, 7))
        blocks = random_partition(rng, n)
        obj = BlockNormObjective(blocks=blocks, weights=rng.uniform(0.0, 2.0, size=len(blocks)))
        center = rng.normal(size=n)
        radius = float(rng.uniform(0.2, 3.0))
        v = center + rng.normal(scale=2.0, size=n)
        out = prox_f_over_ball(v, float(rng.uniform(0.05, 3.0)), obj, (center, radius))
        assert np.linalg.norm(out - center) <= radius + 1e-10


def test_prox_beats_random_feasible_perturbations():
    rng = np.random.default_rng(6)
    for _ in range(5):
        n = int(rng.integers(1, 6))
        blocks = random_partition(rng, n)
        obj = BlockNormObjective(blocks=blocks, weights=rng.uniform(0.0, 2.0, size=len(blocks)))
        center = rng.normal(size=n)
        radius = float(rng.uniform(0.5, 2.0))
        eta = float(rng.uniform(0.1, 2.0))
        v = center + rng.normal(scale=1.5, size=n)
        x = prox_f_over_ball(v, eta, obj, (center, radius))

        def objective(z):
            return obj.value(z) + float((z - v) @ (z - v)) / (2.0 * eta)

        base = objective(x)
        for _ in range(200):
            z = x + rng.uniform(-1e-3, 1e-3, size=n)
            d = z - center
            nd = np.linalg.norm(d)
            if nd > radius:
                z = center + d * (radius / nd)
            assert base <= objective(z) + 1e-12


def test_prox_matches_independent_oracle():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        blocks = random_partition(rng, n)
        weights = rng.uniform(0.0, 2.0, size=len(blocks))
        obj = BlockNormObjective(blocks=blocks, weights=weights)
        center = rng.normal(size=n)
        radius = float(rng.uniform(0.5, 2.0))
        v = center + rng.normal(scale=1.5, size=n)
        eta = float(rng.uniform(0.05, 2.0))
        mine = prox_f_over_ball(v, eta, obj, (center, radius))
        ref = prox_oracle(v, eta, blocks, weights, center, radius)
        assert np.max(np.abs(mine - ref)) <= 1e-5


def test_prox_multiplier_path_is_monotone():
    # The bisection assumes the radius residual shrinks as the multiplier grows.
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        blocks = random_partition(rng, n)
        obj = BlockNormObjective(blocks=blocks, weights=rng.uniform(0.0, 2.0, size=len(blocks)))
        center = rng.normal(size=n)
        v = center + rng.normal(scale=2.0, size=n)
        eta = float(rng.uniform(0.1, 2.0))
        dists = []
        for lam in np.linspace(0.0, 50.0, 40):
            eta_eff = 1.0 / (1.0 / eta + lam)
            w = (v / eta + lam * center) * eta_eff
            dists.append(np.linalg.norm(block_soft_threshold(w, obj, eta_eff) - center))
        assert all(b <= a + 1e-10 for a, b in zip(dists, dists[1:]))


def test_dual_projection_interval_clamp():
    slab = DualSlab(lower=1.0, upper=2.0, m=1)
    assert project_dual_set(np.array([0.5]), slab)[0] == pytest.approx(1.0, abs=1e-12)
    assert project_dual_set(np.array([3.0]), slab)[0] == pytest.approx(2.0, abs=1e-12)
    assert project_dual_set(np.array([1.7]), slab)[0] == pytest.approx(1.7, abs=1e-15)


def test_dual_projection_upper_bound_split():
    out = project_dual_set(np.array([2.0, 2.0]), DualSlab(lower=0.0, upper=3.0, m=2))
    assert np.allclose(out, [1.5, 1.5], atol=1e-12)


def test_dual_projection_empty_slab_raises():
    with pytest.raises(InfeasibleCutError):
        project_dual_set(np.array([1.0]), DualSlab(lower=2.0, upper=1.0, m=1))


def test_dual_projection_degenerate_equality_slab():
    out = project_dual_set(np.array([0.2, 0.9]), DualSlab(lower=1.0, upper=1.0, m=2))
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(out >= 0.0)


def test_dual_projection_matches_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(250):
        m = int(rng.integers(1, 4))
        u = rng.normal(scale=2.0, size=m)
        bounds = np.sort(rng.uniform(0.0, 3.0, size=2))
        slab = DualSlab(lower=float(bounds[0]), upper=float(bounds[1]), m=m)
        mine = project_dual_set(u, slab)
        ref = project_oracle(u, slab.lower, slab.upper)
        assert np.max(np.abs(mine - ref)) <= 1e-8
        assert np.all(mine >= 0.0)
        assert slab.lower - 1e-10 <= mine.sum() <= slab.upper + 1e-10


def test_dual_projection_nonexpansive():
    rng = np.random.default_rng(10)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        bounds = np.sort(rng.uniform(0.0, 3.0, size=2))
        slab = DualSlab(lower=float(bounds[0]), upper=float(bounds[1]), m=m)
        u1 = rng.normal(scale=2.0, size=m)
        u2 = rng.normal(scale=2.0, size=m)
        d_out = np.linalg.norm(project_dual_set(u1, slab) - project_dual_set(u2, slab))
        assert d_out <= np.linalg.norm(u1 - u2) + 1e-12
