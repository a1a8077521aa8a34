"""Prox-NAG-GS and the baseline solvers, all producing uniform traces."""

from dataclasses import dataclass, field
import math
import time
from typing import Optional

import numpy as np

from .certificates import convex_energy, lyapunov_value
from .exceptions import ConfigurationError, InputError, NumericalFailure
from .model import composite_value, optimality_residual
from .trace import TraceRow


@dataclass(frozen=True)
class ProxNAGGSConfig:
    """Constant-schedule parameters.

    ``gamma0=None`` means ``gamma0 = mu_hat`` (the constant-damping regime,
    where ``b_k = a_k`` for every k).  ``stop_on`` picks the iterate whose gap
    is compared with ``gap_tol``.  ``residual_tol`` is the stopping fallback
    used when no reference solution is attached.
    """

    mu_hat: float
    alpha: float = 1.0
    gamma0: Optional[float] = None
    max_iter: int = 1000
    gap_tol: float = 0.0
    residual_tol: float = 0.0
    record_trace: bool = True
    keep_iterates: bool = False
    stop_on: str = "v"

    def __post_init__(self):
        if self.mu_hat <= 0 or self.alpha <= 0:
            raise ConfigurationError("mu_hat and alpha must be positive")
        if self.gamma0 is not None and self.gamma0 <= 0:
            raise ConfigurationError("gamma0 must be positive")
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be nonnegative")
        if self.stop_on not in ("x", "v"):
            raise ConfigurationError("stop_on must be 'x' or 'v'")

    @property
    def a(self):
        return self.alpha / (1 + self.alpha)

    @property
    def initial_gamma(self):
        return self.mu_hat if self.gamma0 is None else self.gamma0


@dataclass(frozen=True)
class ProxNAGGSState:
    x: np.ndarray
    v: np.ndarray
    gamma: float
    k: int = 0

    @classmethod
    def initial(cls, x0, cfg):
        x0 = np.array(x0, dtype=float)
        return cls(x=x0, v=x0.copy(), gamma=cfg.initial_gamma, k=0)


@dataclass(frozen=True)
class ProxStepDiagnostics:
    x_next: np.ndarray
    z: np.ndarray
    q: np.ndarray
    s: np.ndarray
    a: float
    b: float
    D: float
    R: float
    M: float


@dataclass
class RunResult:
    """Outcome of a solver run.

    ``x`` is the reported iterate (``x_k`` for Prox-NAG-GS), ``trace`` the
    per-iteration rows and ``iterates`` the optional ``(x_k, v_k)`` history.
    """

    x: np.ndarray
    trace: list
    state: Optional[ProxNAGGSState] = None
    iterates: list = field(default_factory=list)
    b_history: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _sqdist(u, w):
    d = u - w
    return float(d @ d)


def prox_naggs_step(p, cfg, st, grad):
    """One iteration of Prox-NAG-GS.

    ``grad`` is either a callable evaluated at the freshly computed
    ``x_{k+1}`` or an array already holding the (possibly stochastic)
    gradient there.
    """
    a = cfg.a
    mu_hat = cfg.mu_hat
    x_next = (1 - a) * st.x + a * st.v
    b = cfg.alpha * mu_hat / (cfg.alpha * mu_hat + st.gamma)
    z = (1 - b) * st.v + b * x_next
    g = grad(x_next) if callable(grad) else np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericalFailure("non-finite gradient", st.k)
    step = b / mu_hat
    v_next = p.r.prox(step, z - step * g)
    gamma_next = (1 - a) * st.gamma + a * mu_hat
    q = (z - v_next) / step
    diag = ProxStepDiagnostics(
        x_next=x_next, z=z, q=q, s=q - g, a=a, b=b,
        D=_sqdist(st.x, st.v), R=_sqdist(v_next, z), M=_sqdist(v_next, x_next))
    return ProxNAGGSState(x=x_next, v=v_next, gamma=gamma_next, k=st.k + 1), diag


def _gaps(p, x, v=None):
    F_x = composite_value(p, x)
    F_v = None if v is None else composite_value(p, v)
    F_star = p.F_star
    if F_star is None:
        return F_x, F_v, None, None
    return (F_x, F_v, F_x - F_star, None if v is None else F_v - F_star)


def _naggs_row(p, cfg, lyap_params, k, x, v, R, M, elapsed):
    F_x, F_v, gap_x, gap_v = _gaps(p, x, v)
    D = _sqdist(x, v)
    V = X = lyap = energy = None
    if p.reference is not None:
        xs = p.reference.x_star
        V, X = _sqdist(v, xs), _sqdist(x, xs)
        energy = convex_energy(cfg.mu_hat, cfg.a, gap_v, V, X)
        if lyap_params is not None:
            lyap = lyapunov_value(lyap_params, gap_v, V, X)
    return TraceRow(k=k, F_x=F_x, F_v=F_v, gap_x=gap_x, gap_v=gap_v, V=V, X=X,
                    D=D, R=R, M=M, lyap=lyap, energy=energy, elapsed_s=elapsed)


def _check_stopping(p, gap_tol):
    if gap_tol > 0 and p.reference is None:
        raise ConfigurationError("gap_tol > 0 needs a reference solution on the problem")


def prox_naggs_run(p, cfg, x0, grad_source=None, lyap_params=None):
    """Run Prox-NAG-GS for up to ``cfg.max_iter`` iterations.

    ``grad_source`` defaults to the exact gradient ``p.f.gradient``.  The trace
    starts with the initial state (``k = 0``) followed by one row per
    iteration; it is empty when ``max_iter == 0``.
    """
    _check_stopping(p, cfg.gap_tol)
    grad = p.f.gradient if grad_source is None else grad_source
    st = ProxNAGGSState.initial(p.check(x0), cfg)
    result = RunResult(x=st.x, trace=[], state=st)
    if cfg.max_iter == 0:
        return result
    if cfg.keep_iterates:
        result.iterates.append((st.x, st.v))
    t0 = time.perf_counter()
    if cfg.record_trace:
        result.trace.append(_naggs_row(p, cfg, lyap_params, 0, st.x, st.v,
                                       None, None, 0.0))
    for _ in range(cfg.max_iter):
        st, diag = prox_naggs_step(p, cfg, st, grad)
        elapsed = time.perf_counter() - t0
        result.b_history.append(diag.b)
        if cfg.keep_iterates:
            result.iterates.append((st.x, st.v))
        row = None
        if cfg.record_trace or cfg.gap_tol > 0:
            row = _naggs_row(p, cfg, lyap_params, st.k, st.x, st.v,
                             diag.R, diag.M, elapsed)
            if cfg.record_trace:
                result.trace.append(row)
        if not (np.all(np.isfinite(st.x)) and np.all(np.isfinite(st.v))):
            raise NumericalFailure("iterates diverged", st.k)
        if cfg.gap_tol > 0:
            gap = row.gap_v if cfg.stop_on == "v" else row.gap_x
            if gap <= cfg.gap_tol:
                result.converged = True
                break
        elif cfg.residual_tol > 0:
            if optimality_residual(p, st.x) <= cfg.residual_tol:
                result.converged = True
                break
    result.state = st
    result.x = st.x
    result.iterations = st.k
    return result


def averaged_iterate(vs, k):
    """Mean of the first ``k`` iterates ``v_0 .. v_{k-1}``."""
    if k < 1:
        raise InputError("k must be >= 1")
    if k > len(vs):
        raise InputError(f"only {len(vs)} iterates available, asked for {k}")
    return np.mean(np.asarray(vs[:k], dtype=float), axis=0)


def ista_step(p, eta, x):
    if eta <= 0:
        raise ConfigurationError("eta must be positive")
    return p.r.prox(eta, x - eta * p.f.gradient(x))


def _single_row(p, k, x, elapsed):
    F_x, _, gap_x, _ = _gaps(p, x)
    X = None
    if p.reference is not None:
        X = _sqdist(x, p.reference.x_star)
    return TraceRow(k=k, F_x=F_x, gap_x=gap_x, X=X, elapsed_s=elapsed)


def _baseline_loop(p, x0, max_iter, gap_tol, step_fn, record_trace=True):
    """Drive a single-iterate method; ``step_fn(k, x) -> x_next``."""
    _check_stopping(p, gap_tol)
    x = np.array(p.check(x0), dtype=float)
    result = RunResult(x=x, trace=[])
    if max_iter == 0:
        return result
    t0 = time.perf_counter()
    if record_trace:
        result.trace.append(_single_row(p, 0, x, 0.0))
    k = 0
    for k in range(1, max_iter + 1):
        x = step_fn(k, x)
        elapsed = time.perf_counter() - t0
        if not np.all(np.isfinite(x)):
            raise NumericalFailure("iterates diverged", k)
        if record_trace or gap_tol > 0:
            row = _single_row(p, k, x, elapsed)
            if record_trace:
                result.trace.append(row)
            if gap_tol > 0 and row.gap_x <= gap_tol:
                result.converged = True
                break
    result.x = x
    result.iterations = k
    return result


def ista_run(p, x0, max_iter, gap_tol=0.0, eta=None, record_trace=True):
    eta = 1.0 / p.L if eta is None else eta
    return _baseline_loop(p, x0, max_iter, gap_tol,
                          lambda k, x: ista_step(p, eta, x), record_trace)


def fista_momentum(t):
    return (1 + math.sqrt(1 + 4 * t * t)) / 2


def fista_run(p, x0, max_iter, gap_tol=0.0, eta=None, momentum=True,
              record_trace=True):
    """FISTA with ``t_1 = 1``; ``momentum=False`` degenerates to ISTA."""
    eta = 1.0 / p.L if eta is None else eta
    if eta <= 0:
        raise ConfigurationError("eta must be positive")
    state = {"y": np.array(x0, dtype=float), "t": 1.0}

    def step(k, x):
        x_next = ista_step(p, eta, state["y"])
        t_next = fista_momentum(state["t"])
        beta = (state["t"] - 1) / t_next if momentum else 0.0
        state["y"] = x_next + beta * (x_next - x)
        state["t"] = t_next
        return x_next

    return _baseline_loop(p, x0, max_iter, gap_tol, step, record_trace)


def dual_prox_quadratic(y, Ax_bar, b, sigma):
    """Prox of ``sigma h*`` at ``y + sigma A x_bar`` for ``h*(y) = |y|^2/2 + <b, y>``."""
    return (y + sigma * Ax_bar - sigma * b) / (1 + sigma)


def chambolle_pock_run(p, x0, max_iter, gap_tol=0.0, sigma=None, tau=None,
                       theta_relax=1.0, record_trace=True):
    """Primal-dual iteration on ``min_x max_y <Ax, y> - h*(y) + g(x)``.

    ``g`` collects the ridge term and the regularizer; its prox is the
    regularizer prox at a rescaled point.  Requires ``sigma * tau * ||A||^2 <= 1``.
    """
    f = p.f
    if not hasattr(f, "A"):
        raise ConfigurationError("Chambolle-Pock needs a least-squares smooth part")
    norm_A = math.sqrt(max(f.smoothness - f.lambda2, 0.0))
    if sigma is None:
        sigma = 0.99 / norm_A
    if tau is None:
        tau = 0.99 / norm_A
    if sigma <= 0 or tau <= 0:
        raise ConfigurationError("sigma and tau must be positive")
    if sigma * tau * norm_A ** 2 > 1 + 1e-12:
        raise ConfigurationError(
            f"sigma*tau*||A||^2 = {sigma * tau * norm_A ** 2:.4f} exceeds 1")
    if not 0 <= theta_relax <= 1:
        raise ConfigurationError("theta_relax must lie in [0, 1]")
    A, b, lam2 = f.A, f.b, f.lambda2
    shrink = 1.0 / (1.0 + tau * lam2)
    state = {"y": np.zeros(A.shape[0]), "x_bar": np.array(x0, dtype=float)}

    def step(k, x):
        y = dual_prox_quadratic(state["y"], A @ state["x_bar"], b, sigma)
        x_next = p.r.prox(tau * shrink, (x - tau * (A.T @ y)) * shrink)
        state["x_bar"] = x_next + theta_relax * (x_next - x)
        state["y"] = y
        return x_next

    return _baseline_loop(p, x0, max_iter, gap_tol, step, record_trace)


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    objective: float
    data_fit: float
    regularization: float
    sparsity: float
    elapsed_s: float


def _data_fit(p, x):
    fit = getattr(p.f, "data_fit", None)
    return fit(x) if fit is not None else p.f.evaluate(x)


def _epoch_row(p, epoch, x, elapsed):
    F = composite_value(p, x)
    fit = _data_fit(p, x)
    return EpochRow(epoch=epoch, objective=F, data_fit=fit, regularization=F - fit,
                    sparsity=float(np.mean(np.abs(x) <= 1e-8)), elapsed_s=elapsed)


def _batches(rng, n, batch_size):
    """Index arrays for one epoch; ``None`` stands for the whole dataset."""
    perm = rng.permutation(n)
    if batch_size >= n:
        return [None]
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def _check_stochastic(p, batch_size, epochs):
    n = getattr(p.f, "n_samples", 0)
    if n == 0:
        raise InputError("stochastic runs need a dataset attached to the problem")
    if not 1 <= batch_size <= n:
        raise InputError(f"batch_size must lie in [1, {n}]")
    if epochs < 0:
        raise InputError("epochs must be nonnegative")
    return n


def prox_sgd_run(p, eta, batch_size, epochs, seed, x0=None):
    """Mini-batch proximal SGD; ``eta`` is a constant or ``epoch -> step``.

    The full regularized objective is evaluated after every epoch.  With
    ``batch_size == n`` every step uses the exact gradient, matching ISTA.
    """
    n = _check_stochastic(p, batch_size, epochs)
    rng = np.random.default_rng(seed)
    x = np.zeros(p.dimension) if x0 is None else np.array(p.check(x0), dtype=float)
    t0 = time.perf_counter()
    trace = [_epoch_row(p, 0, x, 0.0)]
    for epoch in range(1, epochs + 1):
        step = eta(epoch) if callable(eta) else eta
        for idx in _batches(rng, n, batch_size):
            g = p.f.batch_gradient(x, idx)
            if not np.all(np.isfinite(g)):
                raise NumericalFailure("non-finite gradient", epoch)
            x = p.r.prox(step, x - step * g)
        trace.append(_epoch_row(p, epoch, x, time.perf_counter() - t0))
    return RunResult(x=x, trace=trace, iterations=epochs)


def stochastic_prox_naggs_run(p, cfg, batch_size, epochs, seed, x0=None):
    """Prox-NAG-GS driven by mini-batch gradients at ``x_{k+1}``.

    The reported iterate is the prox output ``v_k``: it carries the exact
    zeros that sparsity is measured on, while ``x_k`` is a running average.
    """
    n = _check_stochastic(p, batch_size, epochs)
    rng = np.random.default_rng(seed)
    x0 = np.zeros(p.dimension) if x0 is None else p.check(x0)
    st = ProxNAGGSState.initial(x0, cfg)
    t0 = time.perf_counter()
    trace = [_epoch_row(p, 0, st.v, 0.0)]
    for epoch in range(1, epochs + 1):
        for idx in _batches(rng, n, batch_size):
            st, _ = prox_naggs_step(
                p, cfg, st, lambda x, idx=idx: p.f.batch_gradient(x, idx))
        trace.append(_epoch_row(p, epoch, st.v, time.perf_counter() - t0))
    return RunResult(x=st.v, trace=trace, state=st, iterations=st.k)


SOLVERS = ("ista", "fista", "chambolle-pock", "prox-naggs")
STOCHASTIC_SOLVERS = ("prox-sgd", "prox-naggs")
