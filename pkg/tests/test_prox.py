import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from proxnaggs.exceptions import InputError
from proxnaggs.prox import (BoxIndicator, GroupL2Penalty, GroupPartition,
                            L1Penalty, ZeroRegularizer, prox_box, prox_group_l2,
                            prox_l1, prox_oracle_check)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def regularizers():
    part = GroupPartition.contiguous(6, 2)
    return [
        L1Penalty(0.7),
        GroupL2Penalty(0.9, part),
        BoxIndicator(-np.ones(6), 2 * np.ones(6)),
        ZeroRegularizer(),
    ]


def prox_objective(r, tau, z, u):
    return r.evaluate(u) + np.sum((u - z) ** 2) / (2 * tau)


def test_l1_example():
    np.testing.assert_array_equal(prox_l1(1.0, 1.0, [3.0, -0.5, 0.0]), [2.0, 0.0, 0.0])


def test_group_example_against_grid_oracle():
    part = GroupPartition([np.array([0, 1])])
    out = prox_group_l2(1.0, part, 1.0, np.array([3.0, 4.0]))
    np.testing.assert_allclose(out, [2.4, 3.2], atol=1e-12)
    # dense 2-D search around the closed form
    r = GroupL2Penalty(1.0, part)
    g = np.linspace(-6, 6, 1201)
    U, W = np.meshgrid(g, g, indexing="ij")
    vals = np.hypot(U, W) + ((U - 3) ** 2 + (W - 4) ** 2) / 2
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    np.testing.assert_allclose([g[i], g[j]], out, atol=0.02)
    assert prox_oracle_check(r, 1.0, np.array([3.0, 4.0]))


def test_group_small_blocks_are_zeroed_exactly():
    part = GroupPartition.contiguous(4, 2)
    out = prox_group_l2(1.0, part, 1.0, np.array([0.6, 0.8, 3.0, 0.0]))
    assert out[0] == 0.0 and out[1] == 0.0
    np.testing.assert_allclose(out[2:], [2.0, 0.0])


def test_box_clamps_and_ignores_tau():
    z = np.array([-3.0, 0.5, 7.0])
    out = prox_box(-1.0, 2.0, 1.0, z)
    np.testing.assert_array_equal(out, [-1.0, 0.5, 2.0])
    np.testing.assert_array_equal(prox_box(-1.0, 2.0, 100.0, z), out)


@pytest.mark.parametrize("call", [
    lambda: prox_l1(-1.0, 1.0, [1.0]),
    lambda: prox_l1(1.0, 0.0, [1.0]),
    lambda: prox_box(1.0, 0.0, 1.0, [0.5]),
    lambda: prox_group_l2(1.0, GroupPartition.contiguous(4, 2), 1.0, np.ones(3)),
])
def test_invalid_inputs(call):
    with pytest.raises(InputError):
        call()


def test_partition_rejects_overlap_and_gaps():
    with pytest.raises(InputError):
        GroupPartition([np.array([0, 1]), np.array([1, 2])])
    with pytest.raises(InputError):
        GroupPartition([np.array([0]), np.array([2])])


def test_partition_label_round_trip():
    part = GroupPartition.per_feature(3, 2)
    assert len(part) == 3
    assert list(part.groups[1]) == [1, 4]
    again = GroupPartition.from_labels(part.to_labels())
    np.testing.assert_array_equal(again.membership, part.membership)


def test_infeasible_box_value_is_infinite():
    r = BoxIndicator(np.zeros(2), np.ones(2))
    assert r.evaluate(np.array([0.5, 0.5])) == 0.0
    assert r.evaluate(np.array([1.5, 0.5])) == np.inf
    assert not r.is_feasible(np.array([1.5, 0.5]))


@pytest.mark.parametrize("r", [
    L1Penalty(1.3),
    GroupL2Penalty(0.8, GroupPartition([np.array([0, 2]), np.array([1])])),
    BoxIndicator(np.array([-0.5, 0.0, -2.0]), np.array([1.0, 0.3, 2.0])),
])
def test_oracle_accepts_closed_form_and_rejects_perturbation(r, rng):
    for _ in range(3):
        z = rng.uniform(-2, 2, size=3)
        tau = rng.uniform(0.2, 1.5)
        assert prox_oracle_check(r, tau, z, grid=41)
        bad = r.prox(tau, z) + 0.1
        if isinstance(r, BoxIndicator):
            bad = np.clip(bad, r.lower, r.upper)
            if np.allclose(bad, r.prox(tau, z)):
                continue
        assert not prox_oracle_check(r, tau, z, grid=41, candidate=bad)


def test_oracle_refuses_high_dimension():
    with pytest.raises(NotImplementedError):
        prox_oracle_check(L1Penalty(1.0), 1.0, np.zeros(4))


@pytest.mark.parametrize("r", regularizers(), ids=lambda r: type(r).__name__)
def test_nonexpansive(r, rng):
    for _ in range(1000):
        tau = rng.uniform(0.01, 5)
        z1, z2 = rng.normal(scale=3, size=(2, 6))
        lhs = np.linalg.norm(r.prox(tau, z1) - r.prox(tau, z2))
        assert lhs <= np.linalg.norm(z1 - z2) * (1 + 1e-12) + 1e-15


@settings(max_examples=200, deadline=None)
@given(z=arrays(float, 6, elements=finite), u=arrays(float, 6, elements=finite),
       tau=st.floats(0.01, 10), which=st.integers(0, 3))
def test_prox_minimizes_its_objective(z, u, tau, which):
    r = regularizers()[which]
    p = r.prox(tau, z)
    assert prox_objective(r, tau, z, p) <= prox_objective(r, tau, z, u) + 1e-9


@settings(max_examples=100, deadline=None)
@given(z=arrays(float, 6, elements=finite), tau=st.floats(0.01, 10))
def test_group_prox_commutes_with_block_permutation(z, tau):
    part = GroupPartition.contiguous(6, 2)
    r = GroupL2Penalty(0.9, part)
    perm = np.array([4, 5, 0, 1, 2, 3])
    np.testing.assert_allclose(r.prox(tau, z[perm]), r.prox(tau, z)[perm], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(z=arrays(float, 6, elements=finite), tau=st.floats(0.01, 10), which=st.integers(0, 2))
def test_prox_residual_is_a_subgradient(z, tau, which):
    r = regularizers()[which]
    v = r.prox(tau, z)
    assert r.contains_subgradient(v, (z - v) / tau, 1e-8)


def test_oracle_examples():
    assert prox_oracle_check(L1Penalty(1.0), 1.0, np.array([3.0]))
    assert not prox_oracle_check(L1Penalty(1.0), 1.0, np.array([3.0]), candidate=np.array([2.1]))
    thin = BoxIndicator(np.array([0.5, 0.5, 0.5]), np.array([0.501, 0.6, 0.5]))
    z = np.array([3.0, -1.0, 0.0])
    assert prox_oracle_check(thin, 1.0, z, grid=41)
    assert not prox_oracle_check(thin, 1.0, z, grid=41, candidate=np.array([0.6, 0.5, 0.5]))
