"""Seeded benchmark instances and the high-precision reference solver."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InputError, ReferenceFailure
from .model import (CompositeProblem, LeastSquaresRidge, SoftmaxLoss,
                    forward_backward, optimality_residual, composite_value)
from .prox import GroupL2Penalty, GroupPartition, L1Penalty

NOISE_SIGMA = 0.01


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    x_star: np.ndarray
    F_star: float
    residual: float
    method: str = "fista"
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class ElasticNetInstance:
    A: np.ndarray
    b: np.ndarray
    lambda1: float
    lambda2: float
    seed: int
    variant: str
    cond_target: float
    x_true: np.ndarray

    kind = "elastic-net"

    def problem(self, reference=None):
        return CompositeProblem(LeastSquaresRidge(self.A, self.b, self.lambda2),
                                L1Penalty(self.lambda1), reference=reference)


@dataclass(frozen=True, eq=False)
class GroupLassoInstance:
    A: np.ndarray
    b: np.ndarray
    lambda2: float
    lambda_g: float
    partition: GroupPartition
    planted_support: tuple
    seed: int
    variant: str
    cond_target: float
    x_true: np.ndarray

    kind = "group-lasso"

    def problem(self, reference=None):
        return CompositeProblem(LeastSquaresRidge(self.A, self.b, self.lambda2),
                                GroupL2Penalty(self.lambda_g, self.partition),
                                reference=reference)


@dataclass(frozen=True, eq=False)
class ClassificationInstance:
    X: np.ndarray
    y: np.ndarray
    n_classes: int
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: Optional[int] = None

    def problem(self, lambda1=0.0, lambda2=0.0, penalty="l1"):
        """Regularized softmax regression on the training split."""
        f = SoftmaxLoss(self.X[self.train], self.y[self.train], self.n_classes, lambda2)
        if penalty == "l1":
            r = L1Penalty(lambda1)
        elif penalty == "group":
            r = GroupL2Penalty(lambda1, GroupPartition.per_feature(f.n_features,
                                                                   self.n_classes))
        else:
            raise InputError(f"unknown penalty {penalty!r}")
        return CompositeProblem(f, r)

    def accuracy(self, p, x, split="test"):
        idx = getattr(self, split)
        return p.f.accuracy(x, self.X[idx], self.y[idx])


def split_indices(n, fractions, rng):
    if len(fractions) != 3 or abs(sum(fractions) - 1) > 1e-9:
        raise InputError("split fractions must be three numbers summing to 1")
    perm = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def _design(rng, n, d, variant, cond_target, s_max):
    if variant == "easy":
        return rng.standard_normal((n, d))
    if variant != "hard":
        raise InputError(f"unknown variant {variant!r}")
    m = min(n, d)
    U, _ = np.linalg.qr(rng.standard_normal((n, m)))
    V, _ = np.linalg.qr(rng.standard_normal((d, m)))
    s = np.geomspace(s_max, s_max / cond_target, m)
    return (U * s) @ V.T


def gen_elastic_net(n=200, d=100, variant="easy", cond_target=1e3, lambda1=None,
                    lambda2=0.1, seed=0, s_max=None, support_frac=0.1):
    """Elastic-net instance ``(A, b)`` with a sparse planted signal.

    The hard variant has singular values spaced geometrically from ``s_max``
    (default ``sqrt(n) + sqrt(d)``, the Gaussian scale) down to
    ``s_max / cond_target``.  ``lambda1`` defaults to ``0.1 ||A^T b||_inf``.
    """
    if n < 1 or d < 1:
        raise InputError("n and d must be positive")
    if cond_target < 1:
        raise InputError("cond_target must be >= 1")
    rng = np.random.default_rng(seed)
    s_max = np.sqrt(n) + np.sqrt(d) if s_max is None else s_max
    A = _design(rng, n, d, variant, cond_target, s_max)
    x_true = np.zeros(d)
    k = max(1, int(round(support_frac * d)))
    support = rng.choice(d, size=k, replace=False)
    x_true[support] = rng.standard_normal(k)
    b = A @ x_true + NOISE_SIGMA * rng.standard_normal(n)
    if lambda1 is None:
        lambda1 = 0.1 * float(np.max(np.abs(A.T @ b)))
    return ElasticNetInstance(A=A, b=b, lambda1=float(lambda1), lambda2=float(lambda2),
                              seed=seed, variant=variant, cond_target=cond_target,
                              x_true=x_true)


def gen_group_lasso(n=300, d=200, n_groups_active=8, group_size=10, lambda_g=None,
                    lambda2=0.1, seed=0, variant="easy", cond_target=1e3, s_max=None):
    """Group-lasso instance with contiguous groups and planted active groups.

    ``lambda_g`` defaults to ``0.1 max_G ||A_G^T b||``.
    """
    if n < 1 or d < 1:
        raise InputError("n and d must be positive")
    if d % group_size:
        raise InputError(f"d={d} is not divisible by group_size={group_size}")
    partition = GroupPartition.contiguous(d, group_size)
    if n_groups_active > len(partition):
        raise InputError("more active groups than groups")
    rng = np.random.default_rng(seed)
    s_max = np.sqrt(n) + np.sqrt(d) if s_max is None else s_max
    A = _design(rng, n, d, variant, cond_target, s_max)
    active = np.sort(rng.choice(len(partition), size=n_groups_active, replace=False))
    x_true = np.zeros(d)
    for g in active:
        x_true[partition.groups[g]] = rng.standard_normal(group_size)
    b = A @ x_true + NOISE_SIGMA * rng.standard_normal(n)
    if lambda_g is None:
        lambda_g = 0.1 * float(np.max(partition.group_norms(A.T @ b)))
    return GroupLassoInstance(A=A, b=b, lambda2=float(lambda2), lambda_g=float(lambda_g),
                              partition=partition,
                              planted_support=tuple(int(g) for g in active),
                              seed=seed, variant=variant, cond_target=cond_target,
                              x_true=x_true)


def gen_classification(n=1000, d=50, C=3, separation=1.0, seed=0,
                       split=(0.8, 0.1, 0.1)):
    """Gaussian clusters with unit covariance and means ``separation * e_c``-like.

    Class means are random unit vectors scaled by ``separation``; labels are
    balanced to within one sample.
    """
    if C < 2:
        raise InputError("need at least two classes")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((C, d))
    means *= separation / np.linalg.norm(means, axis=1, keepdims=True)
    y = rng.permutation(np.arange(n) % C)
    X = means[y] + rng.standard_normal((n, d))
    train, val, test = split_indices(n, split, rng)
    return ClassificationInstance(X=X, y=y, n_classes=C, train=train, val=val,
                                  test=test, seed=seed)


def compute_reference(p, residual_tol=1e-12, iter_cap=200_000):
    """FISTA at step ``1/L`` until the residual reaches ``residual_tol``, then
    one forward-backward polish step (kept only if it does not hurt)."""
    eta = 1.0 / p.L
    x = np.zeros(p.dimension)
    y = x.copy()
    t = 1.0
    best = np.inf
    for it in range(1, iter_cap + 1):
        x_next = forward_backward(p, y, eta)
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = x_next + ((t - 1) / t_next) * (x_next - x)
        x, t = x_next, t_next
        res = optimality_residual(p, x)
        best = min(best, res)
        if res <= residual_tol:
            break
    else:
        raise ReferenceFailure(best, iter_cap)
    polished = forward_backward(p, x, eta)
    res_polished = optimality_residual(p, polished)
    if res_polished <= res:
        x, res = polished, res_polished
    return ReferenceSolution(x_star=x, F_star=composite_value(p, x), residual=res,
                             iterations=it)


def active_groups(x, partition, threshold=1e-8):
    """Number and indices of groups with ``||x_G|| > threshold``."""
    idx = tuple(int(i) for i in np.flatnonzero(partition.group_norms(x) > threshold))
    return len(idx), idx


def sparsity(x, threshold=1e-8):
    """Fraction of coordinates with ``|x_i| <= threshold``."""
    x = np.asarray(x)
    return float(np.mean(np.abs(x) <= threshold))


def with_reference(inst, **kw):
    """Build the instance's problem and attach its reference solution."""
    p = inst.problem()
    return p.with_reference(compute_reference(p, **kw))
