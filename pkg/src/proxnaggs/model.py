"""Composite problems ``F = f + r`` and the smooth losses used in benchmarks."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .exceptions import InputError
from .prox import ZeroRegularizer


def estimate_smoothness(A, lambda2=0.0, iters=1000, tol=1e-10):
    """Largest eigenvalue of ``A^T A`` plus ``lambda2`` by power iteration.

    The start vector is the normalized all-ones vector so results are
    reproducible.  Iteration stops once the Rayleigh quotient changes by less
    than ``tol`` relative.
    """
    if iters < 1:
        raise InputError("iters must be >= 1")
    A = np.asarray(A, dtype=float)
    d = A.shape[1]
    v = np.ones(d) / np.sqrt(d)
    est = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return float(lambda2)
        new = float(v @ w)
        v = w / nrm
        if abs(new - est) <= tol * abs(new):
            est = new
            break
        est = new
    # the final Rayleigh quotient is a lower bound on lambda_max; use it
    est = max(est, float(v @ (A.T @ (A @ v))))
    return est + float(lambda2)


class LeastSquaresRidge:
    """``f(x) = ||Ax - b||^2 / 2 + lambda2 ||x||^2 / 2``."""

    def __init__(self, A, b, lambda2=0.0):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise InputError(f"A has shape {A.shape} but b has length {b.shape[0]}")
        if lambda2 < 0:
            raise InputError("lambda2 must be nonnegative")
        A.flags.writeable = False
        b.flags.writeable = False
        self.A, self.b, self.lambda2 = A, b, float(lambda2)
        self.n_samples, self.dimension = A.shape
        self.smoothness = estimate_smoothness(A, lambda2)
        if self.n_samples < self.dimension:
            smin2 = 0.0
        else:
            smin2 = max(float(np.linalg.eigvalsh(A.T @ A)[0]), 0.0)
        self.strong_convexity = min(smin2 + self.lambda2, self.smoothness)

    def evaluate(self, x):
        res = self.A @ x - self.b
        return 0.5 * float(res @ res) + 0.5 * self.lambda2 * float(x @ x)

    def gradient(self, x):
        return self.A.T @ (self.A @ x - self.b) + self.lambda2 * x

    def batch_gradient(self, x, idx):
        """Unbiased mini-batch estimate of the gradient from rows ``idx``."""
        if idx is None:
            return self.gradient(x)
        Ab = self.A[idx]
        scale = self.n_samples / len(idx)
        return scale * (Ab.T @ (Ab @ x - self.b[idx])) + self.lambda2 * x


class SoftmaxLoss:
    """Mean multinomial cross-entropy plus ridge, over a flattened weight matrix.

    The variable is ``W`` of shape ``(d, C)`` stored column-major, so
    coordinate ``j + d*c`` is the weight of feature ``j`` for class ``c``.
    """

    def __init__(self, X, y, n_classes=None, lambda2=0.0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.intp).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise InputError("X rows and label count differ")
        if X.shape[0] == 0:
            raise InputError("empty dataset")
        C = int(n_classes if n_classes is not None else y.max() + 1)
        if C < 2 or y.min() < 0 or y.max() >= C:
            raise InputError("labels must lie in 0..C-1 with C >= 2")
        X.flags.writeable = False
        self.X, self.y, self.n_classes, self.lambda2 = X, y, C, float(lambda2)
        self.n_samples, self.n_features = X.shape
        self.dimension = self.n_features * C
        self._onehot = np.eye(C)[y]
        # Hessian of the mean cross-entropy is bounded by ||X||^2 / (2n)
        self.smoothness = (estimate_smoothness(X) / (2 * self.n_samples)
                           + self.lambda2)
        self.strong_convexity = self.lambda2

    def weights(self, x):
        return np.reshape(x, (self.n_features, self.n_classes), order="F")

    def _data_fit(self, W, X, y):
        logits = X @ W
        return float(np.mean(logsumexp(logits, axis=1) - logits[np.arange(len(y)), y]))

    def data_fit(self, x):
        return self._data_fit(self.weights(x), self.X, self.y)

    def evaluate(self, x):
        return self.data_fit(x) + 0.5 * self.lambda2 * float(x @ x)

    def probabilities(self, x, X=None):
        X = self.X if X is None else X
        logits = X @ self.weights(x)
        return np.exp(logits - logsumexp(logits, axis=1, keepdims=True))

    def _grad(self, x, X, onehot):
        P = self.probabilities(x, X)
        G = X.T @ (P - onehot) / X.shape[0]
        return G.ravel(order="F") + self.lambda2 * x

    def gradient(self, x):
        return self._grad(x, self.X, self._onehot)

    def batch_gradient(self, x, idx):
        if idx is None:
            return self.gradient(x)
        return self._grad(x, self.X[idx], self._onehot[idx])

    def accuracy(self, x, X=None, y=None):
        X = self.X if X is None else np.asarray(X, dtype=float)
        y = self.y if y is None else np.asarray(y)
        pred = np.argmax(X @ self.weights(x), axis=1)
        return float(np.mean(pred == y))


@dataclass(frozen=True, eq=False)
class CompositeProblem:
    """``F(x) = f(x) + r(x)`` with an optional attached reference solution."""

    f: object
    r: object = ZeroRegularizer()
    mu_F: Optional[float] = None
    reference: Optional[object] = None

    def __post_init__(self):
        mu_F = self.f.strong_convexity if self.mu_F is None else float(self.mu_F)
        if mu_F < self.f.strong_convexity:
            raise InputError("mu_F must be at least the strong convexity of f")
        object.__setattr__(self, "mu_F", mu_F)

    @property
    def dimension(self):
        return self.f.dimension

    @property
    def L(self):
        return self.f.smoothness

    @property
    def mu_f(self):
        return self.f.strong_convexity

    @property
    def F_star(self):
        return None if self.reference is None else self.reference.F_star

    def with_reference(self, reference):
        return replace(self, reference=reference)

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InputError(
                f"expected a vector of length {self.dimension}, got shape {x.shape}")
        return x


def composite_value(p, x):
    """``f(x) + r(x)``; ``inf`` when ``r`` is an indicator and ``x`` is infeasible."""
    x = p.check(x)
    return p.f.evaluate(x) + p.r.evaluate(x)


def forward_backward(p, x, eta):
    return p.r.prox(eta, x - eta * p.f.gradient(x))


def optimality_residual(p, x):
    """``||x - prox_{r/L}(x - grad f(x)/L)||``; zero exactly at minimizers."""
    x = p.check(x)
    return float(np.linalg.norm(x - forward_backward(p, x, 1.0 / p.L)))
