import numpy as np
import pytest

from proxnaggs.exceptions import InputError, ReferenceFailure
from proxnaggs.model import optimality_residual
from proxnaggs.problems import (active_groups, compute_reference,
                                gen_classification, gen_elastic_net,
                                gen_group_lasso, sparsity, with_reference)
from proxnaggs.prox import GroupPartition, L1Penalty
from proxnaggs.solvers import prox_sgd_run

from conftest import quadratic_1d


def condition_number(A):
    s = np.linalg.svd(A, compute_uv=False)
    return s[0] / s[-1]


@pytest.mark.parametrize("seed", range(3))
def test_hard_condition_number(seed):
    inst = gen_elastic_net(variant="hard", cond_target=1e3, seed=seed)
    assert 950 <= condition_number(inst.A) <= 1050
    gl = gen_group_lasso(variant="hard", seed=seed)
    assert 950 <= condition_number(gl.A) <= 1050


@pytest.mark.parametrize("gen", [gen_elastic_net, gen_group_lasso])
def test_generators_are_seed_deterministic(gen):
    a, b, c = gen(seed=11), gen(seed=11), gen(seed=12)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b)
    assert not np.array_equal(a.A, c.A)


def test_scalar_elastic_net_matches_hand_solution():
    inst = gen_elastic_net(n=1, d=1, seed=0, lambda1=0.01, lambda2=0.1)
    A, b = inst.A[0, 0], inst.b[0]
    # scalar soft-threshold: argmin (a x - b)^2/2 + l2 x^2/2 + l1 |x|
    x_hand = np.sign(A * b) * max(abs(A * b) - 0.01, 0) / (A * A + 0.1)
    ref = compute_reference(inst.problem())
    assert ref.x_star[0] == pytest.approx(x_hand, abs=1e-12)


def test_group_lasso_default_shape():
    inst = gen_group_lasso(seed=0)
    assert len(inst.partition) == 20
    assert all(len(g) == 10 for g in inst.partition.groups)
    count, idx = active_groups(inst.x_true, inst.partition)
    assert count == 8 and idx == inst.planted_support


def test_group_lasso_rejects_indivisible_dimension():
    with pytest.raises(InputError):
        gen_group_lasso(d=195)


def test_classification_split_and_balance():
    inst = gen_classification(n=1000, d=5, C=3, seed=0)
    assert (len(inst.train), len(inst.val), len(inst.test)) == (800, 100, 100)
    all_idx = np.concatenate([inst.train, inst.val, inst.test])
    assert len(np.unique(all_idx)) == 1000
    counts = np.bincount(inst.y)
    assert counts.max() - counts.min() <= 1


def test_zero_separation_is_chance_level():
    inst = gen_classification(n=3000, d=5, C=3, separation=0.0, seed=1)
    p = inst.problem(lambda2=1e-3)
    res = prox_sgd_run(p, 1 / p.L, 100, 5, seed=0)
    assert abs(inst.accuracy(p, res.x, "train") - 1 / 3) < 0.06


def test_large_separation_is_learnable():
    inst = gen_classification(n=1000, d=10, C=2, separation=6.0, seed=2)
    p = inst.problem(lambda2=1e-4)
    res = prox_sgd_run(p, 1 / p.L, 50, 20, seed=0)
    assert inst.accuracy(p, res.x, "test") >= 0.95


def test_reference_analytic_examples():
    ref = compute_reference(quadratic_1d(center=2.0))
    assert ref.x_star[0] == pytest.approx(2.0, abs=1e-12) and ref.F_star == pytest.approx(0.0, abs=1e-20)
    ref = compute_reference(quadratic_1d(r=L1Penalty(1.0)))
    assert ref.x_star[0] == 0.0 and ref.F_star == 0.0
    grid = np.linspace(-3, 3, 60001)
    assert grid[np.argmin(grid ** 2 / 2 + np.abs(grid))] == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("variant", ["easy", "hard"])
def test_reference_residual_on_generated_instances(variant):
    for inst in (gen_elastic_net(variant=variant, seed=0),
                 gen_group_lasso(variant=variant, seed=0)):
        p = with_reference(inst)
        assert p.reference.residual <= 1e-12
        assert optimality_residual(p, p.reference.x_star) <= 1e-12


def test_reference_failure_reports_best_residual():
    p = gen_elastic_net(variant="hard", seed=0).problem()
    with pytest.raises(ReferenceFailure) as err:
        compute_reference(p, iter_cap=5)
    assert err.value.best_residual > 1e-12 and err.value.iterations == 5


def test_sparsity_and_active_group_examples():
    assert sparsity(np.zeros(4)) == 1.0
    assert sparsity(np.ones(4)) == 0.0
    assert sparsity(np.array([1.0, 0.0, 0.0, 2.0])) == 0.5
    part = GroupPartition.contiguous(6, 2)
    assert active_groups(np.zeros(6), part) == (0, ())
    assert active_groups(np.array([0, 0, 1e-9, 0, 0, 3.0]), part) == (1, (2,))
