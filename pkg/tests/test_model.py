import numpy as np
import pytest

from proxnaggs.exceptions import InputError
from proxnaggs.model import (CompositeProblem, LeastSquaresRidge, SoftmaxLoss,
                             composite_value, estimate_smoothness,
                             optimality_residual)
from proxnaggs.prox import L1Penalty

from conftest import quadratic_1d


def central_fd(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (fun(x + e) - fun(x - e)) / (2 * step)
    return g


def softmax_instance(rng, n=40, d=6, C=4, lambda2=0.05):
    X = rng.standard_normal((n, d))
    y = rng.integers(0, C, size=n)
    return SoftmaxLoss(X, y, C, lambda2)


def test_composite_value_examples():
    f = LeastSquaresRidge(np.eye(2), np.zeros(2))
    assert composite_value(CompositeProblem(f), np.ones(2)) == 1.0
    assert composite_value(CompositeProblem(f, L1Penalty(1.0)), np.ones(2)) == 3.0


def test_composite_value_matches_elementwise_sum(rng):
    A = rng.standard_normal((5, 3))
    b = rng.standard_normal(5)
    x = rng.standard_normal(3)
    p = CompositeProblem(LeastSquaresRidge(A, b, 0.3), L1Penalty(0.7))
    brute = 0.0
    for i in range(5):
        brute += 0.5 * (sum(A[i, j] * x[j] for j in range(3)) - b[i]) ** 2
    brute += sum(0.15 * xj * xj + 0.7 * abs(xj) for xj in x)
    assert composite_value(p, x) == pytest.approx(brute, abs=1e-12)


def test_composite_value_dimension_mismatch():
    p = CompositeProblem(LeastSquaresRidge(np.eye(2), np.zeros(2)))
    with pytest.raises(InputError):
        composite_value(p, np.ones(3))


@pytest.mark.parametrize("A, lam, expected", [
    (np.eye(2), 0.0, 1.0),
    (np.diag([1.0, 2.0]), 0.5, 4.5),
    (np.zeros((3, 3)), 2.0, 2.0),
])
def test_estimate_smoothness_examples(A, lam, expected):
    assert estimate_smoothness(A, lam) == pytest.approx(expected, rel=1e-10)


def test_estimate_smoothness_matches_svd(rng):
    A = rng.standard_normal((30, 12))
    exact = np.linalg.svd(A, compute_uv=False)[0] ** 2
    assert estimate_smoothness(A, 0.0) == pytest.approx(exact, rel=1e-9)


def test_estimate_smoothness_rejects_zero_iters():
    with pytest.raises(InputError):
        estimate_smoothness(np.eye(2), iters=0)


def test_least_squares_constants(rng):
    A = rng.standard_normal((20, 5))
    f = LeastSquaresRidge(A, rng.standard_normal(20), 0.25)
    s = np.linalg.svd(A, compute_uv=False)
    assert f.smoothness == pytest.approx(s[0] ** 2 + 0.25, rel=1e-9)
    assert f.strong_convexity == pytest.approx(s[-1] ** 2 + 0.25, rel=1e-9)
    under = LeastSquaresRidge(rng.standard_normal((3, 5)), np.zeros(3))
    assert under.strong_convexity == 0.0


def test_optimality_residual_examples(easy_en):
    p = quadratic_1d()
    assert optimality_residual(p, np.array([0.0])) == 0.0
    assert optimality_residual(p, np.array([1.0])) == 1.0
    assert optimality_residual(easy_en, easy_en.reference.x_star) <= 1e-10


def test_softmax_uniform_at_zero(rng):
    f = softmax_instance(rng)
    P = f.probabilities(np.zeros(f.dimension))
    np.testing.assert_allclose(P, 1.0 / f.n_classes)
    assert f.evaluate(np.zeros(f.dimension)) == pytest.approx(np.log(f.n_classes))


def test_softmax_flattening_is_column_major(rng):
    f = softmax_instance(rng, d=3, C=2)
    x = np.arange(6.0)
    W = f.weights(x)
    assert W[2, 0] == 2.0 and W[0, 1] == 3.0


@pytest.mark.parametrize("kind", ["ls", "softmax"])
def test_gradient_matches_finite_differences(kind, rng):
    if kind == "ls":
        f = LeastSquaresRidge(rng.standard_normal((15, 8)), rng.standard_normal(15), 0.1)
    else:
        f = softmax_instance(rng)
    for _ in range(20):
        x = rng.standard_normal(f.dimension)
        g = f.gradient(x)
        fd = central_fd(f.evaluate, x)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))


@pytest.mark.parametrize("kind", ["ls", "softmax"])
def test_convexity_and_smoothness_witnesses(kind, rng):
    if kind == "ls":
        f = LeastSquaresRidge(rng.standard_normal((15, 8)), rng.standard_normal(15), 0.1)
    else:
        f = softmax_instance(rng)
    assert f.strong_convexity <= f.smoothness
    for _ in range(100):
        x, y = rng.standard_normal((2, f.dimension))
        lower = f.evaluate(x) + f.gradient(x) @ (y - x) \
            + 0.5 * f.strong_convexity * np.sum((y - x) ** 2)
        assert f.evaluate(y) >= lower - 1e-9 * max(1.0, abs(lower))
        lhs = np.linalg.norm(f.gradient(x) - f.gradient(y))
        assert lhs <= f.smoothness * np.linalg.norm(x - y) * (1 + 1e-9)


def test_batch_gradient_full_batch_is_exact(rng):
    f = softmax_instance(rng)
    x = rng.standard_normal(f.dimension)
    np.testing.assert_array_equal(f.batch_gradient(x, None), f.gradient(x))
    np.testing.assert_allclose(f.batch_gradient(x, np.arange(f.n_samples)), f.gradient(x),
                               atol=1e-14)


def test_problem_rejects_small_mu_F(rng):
    f = LeastSquaresRidge(np.eye(2), np.zeros(2), 1.0)
    with pytest.raises(InputError):
        CompositeProblem(f, mu_F=0.5)
