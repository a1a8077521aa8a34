"""Benchmark orchestration: instances, tuning grids, per-seed runs, summaries."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .exceptions import ConfigurationError, InputError, NumericalFailure
from .model import composite_value
from .problems import (active_groups, gen_classification, gen_elastic_net,
                       gen_group_lasso, sparsity)
from .solvers import (ProxNAGGSConfig, chambolle_pock_run, fista_run, ista_run,
                      prox_naggs_run, prox_sgd_run, stochastic_prox_naggs_run)
from .trace import first_crossing

GAP_THRESHOLD = 1e-6
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DETERMINISTIC_PROBLEMS = ("elastic-net", "group-lasso")
STOCHASTIC_PROBLEMS = ("softmax-l1", "softmax-group")
SOLVER_NAMES = ("ista", "fista", "chambolle-pock", "prox-naggs")
STOCHASTIC_SOLVER_NAMES = ("prox-sgd", "prox-naggs")

# Tuning grids.  Step sizes are relative to the smoothness constant L.
NAGGS_GRID = {"mu_hat_factor": tuple(float(v) for v in np.geomspace(1e-3, 1.0, 7)),
              "alpha": (0.2, 0.5, 1.0, 2.0, 5.0)}
CP_GRID = {"sigma_ratio": (0.1, 0.3, 1.0, 3.0, 10.0)}
SGD_GRID = {"eta_factor": (0.25, 0.5, 1.0, 2.0)}
STOCH_NAGGS_GRID = {"mu_hat_factor": (0.25, 0.5, 1.0), "alpha": (0.5, 1.0, 2.0)}


def make_instance(problem, variant="easy", seed=0, **overrides):
    if problem == "elastic-net":
        return gen_elastic_net(variant=variant, seed=seed, **overrides)
    if problem == "group-lasso":
        return gen_group_lasso(variant=variant, seed=seed, **overrides)
    if problem in STOCHASTIC_PROBLEMS:
        return gen_classification(seed=seed, **overrides)
    raise InputError(f"unknown problem {problem!r}")


def solver_grid(name):
    """Candidate hyperparameter dicts for a deterministic solver."""
    if name in ("ista", "fista"):
        return [{}]
    if name == "chambolle-pock":
        return [{"sigma_ratio": s} for s in CP_GRID["sigma_ratio"]]
    if name == "prox-naggs":
        return [{"mu_hat_factor": m, "alpha": a}
                for m in NAGGS_GRID["mu_hat_factor"] for a in NAGGS_GRID["alpha"]]
    raise ConfigurationError(f"unknown solver {name!r}")


def run_solver(name, p, params=None, max_iter=5000, gap_tol=GAP_THRESHOLD,
               record_trace=True, lyap_params=None, keep_iterates=False):
    """Run one deterministic solver from ``x0 = 0``.

    ``params`` uses L-relative units: ``eta_factor`` (ISTA/FISTA step
    ``eta_factor / L``), ``sigma_ratio`` (Chambolle-Pock ``sigma / tau``),
    ``mu_hat_factor`` and ``alpha`` (Prox-NAG-GS).  Gaps are measured at the
    reported iterate.
    """
    params = dict(params or {})
    x0 = np.zeros(p.dimension)
    if name == "ista":
        return ista_run(p, x0, max_iter, gap_tol, eta=params.get("eta_factor", 1.0) / p.L,
                        record_trace=record_trace)
    if name == "fista":
        return fista_run(p, x0, max_iter, gap_tol, eta=params.get("eta_factor", 1.0) / p.L,
                         record_trace=record_trace)
    if name == "chambolle-pock":
        norm_A = math.sqrt(p.L - p.f.lambda2)
        ratio = params.get("sigma_ratio", 1.0)
        sigma = 0.99 * math.sqrt(ratio) / norm_A
        tau = 0.99 / (math.sqrt(ratio) * norm_A)
        return chambolle_pock_run(p, x0, max_iter, gap_tol, sigma=sigma, tau=tau,
                                  theta_relax=params.get("theta_relax", 1.0),
                                  record_trace=record_trace)
    if name == "prox-naggs":
        mu_hat = params["mu_hat"] if "mu_hat" in params else \
            params.get("mu_hat_factor", 1.0) * p.L
        cfg = ProxNAGGSConfig(mu_hat=mu_hat, alpha=params.get("alpha", 1.0),
                              max_iter=max_iter, gap_tol=gap_tol, stop_on="x",
                              record_trace=record_trace, keep_iterates=keep_iterates)
        return prox_naggs_run(p, cfg, x0, lyap_params=lyap_params)
    raise ConfigurationError(f"unknown solver {name!r}")


def iterations_to_gap(name, p, params, max_iter):
    """First iteration with gap <= 1e-6 at the reported iterate, or None."""
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_solver(name, p, params, max_iter=max_iter, record_trace=False)
    except NumericalFailure:
        return None
    return res.iterations if res.converged else None


def tune(name, problems, max_iter=5000):
    """Deterministic grid sweep minimizing mean iterations-to-gap over ``problems``.

    Each candidate runs with an iteration cap equal to the best total found so
    far, so hopeless points stop early.  Returns ``(best_params, mean_iters)``;
    ``mean_iters`` is None when no candidate reached the gap on every problem.
    """
    best, best_mean = None, None
    for params in solver_grid(name):
        total = 0
        for p in problems:
            cap = max_iter if best_mean is None else \
                min(max_iter, int(best_mean * len(problems)) - total)
            if cap <= 0:
                total = None
                break
            its = iterations_to_gap(name, p, params, cap)
            if its is None:
                total = None
                break
            total += its
        if total is None:
            continue
        mean = total / len(problems)
        if best_mean is None or mean < best_mean:
            best, best_mean = params, mean
    if best is None:
        best = solver_grid(name)[0]
    return best, best_mean


@dataclass
class SeedResult:
    seed: int
    final_objective: float
    iterations: int
    reached: bool
    time_s: float
    extras: dict = field(default_factory=dict)


@dataclass
class SummaryRow:
    method: str
    seeds: tuple
    final_obj_mean: float
    final_obj_std: float
    iters_mean: float
    iters_std: float
    time_mean: float
    time_std: float
    not_reached: int = 0
    extras: dict = field(default_factory=dict)

    HEADER = ("method", "n_seeds", "final_obj_mean", "final_obj_std", "iters_mean",
              "iters_std", "time_mean", "time_std", "not_reached")

    def as_row(self):
        return (self.method, len(self.seeds), self.final_obj_mean, self.final_obj_std,
                self.iters_mean, self.iters_std, self.time_mean, self.time_std,
                self.not_reached)


def seed_result(name, p, res, seed):
    """Collapse a run into the per-seed metrics of the summary tables."""
    k = first_crossing(res.trace, GAP_THRESHOLD) if res.trace else None
    reached = k is not None
    iters = k if reached else res.iterations
    # structural zeros are read off the prox output (v_k for Prox-NAG-GS)
    support_iterate = res.state.v if res.state is not None else res.x
    extras = {}
    if hasattr(p.r, "partition"):
        extras["active_groups"] = active_groups(support_iterate, p.r.partition)[0]
    else:
        extras["sparsity"] = sparsity(support_iterate)
    elapsed = res.trace[-1].elapsed_s if res.trace else 0.0
    return SeedResult(seed=seed, final_objective=composite_value(p, res.x),
                      iterations=iters, reached=reached, time_s=elapsed, extras=extras)


def _mean_std(vals):
    arr = np.asarray(vals, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def summarize(method, results):
    """Aggregate per-seed results over exactly the seeds given."""
    if not results:
        raise InputError("no seed results to summarize")
    fo = _mean_std([r.final_objective for r in results])
    it = _mean_std([r.iterations for r in results])
    tm = _mean_std([r.time_s for r in results])
    extras = {}
    for key in results[0].extras:
        extras[key] = _mean_std([r.extras[key] for r in results])[0]
    return SummaryRow(method=method, seeds=tuple(r.seed for r in results),
                      final_obj_mean=fo[0], final_obj_std=fo[1], iters_mean=it[0],
                      iters_std=it[1], time_mean=tm[0], time_std=tm[1],
                      not_reached=sum(not r.reached for r in results), extras=extras)


def stochastic_run(name, inst, p, params, batch_size, epochs, seed):
    """One stochastic run; ``params`` holds ``eta_factor`` or
    ``mu_hat_factor``/``alpha`` relative to ``L``."""
    if name == "prox-sgd":
        eta = params.get("eta", params.get("eta_factor", 1.0) / p.L)
        return prox_sgd_run(p, eta, batch_size, epochs, seed)
    if name == "prox-naggs":
        mu_hat = params.get("mu_hat", params.get("mu_hat_factor", 1.0) * p.L)
        cfg = ProxNAGGSConfig(mu_hat=mu_hat, alpha=params.get("alpha", 1.0))
        return stochastic_prox_naggs_run(p, cfg, batch_size, epochs, seed)
    raise ConfigurationError(f"unknown stochastic solver {name!r}")


def stochastic_grid(name):
    if name == "prox-sgd":
        return [{"eta_factor": e} for e in SGD_GRID["eta_factor"]]
    if name == "prox-naggs":
        return [{"mu_hat_factor": m, "alpha": a} for m in STOCH_NAGGS_GRID["mu_hat_factor"]
                for a in STOCH_NAGGS_GRID["alpha"]]
    raise ConfigurationError(f"unknown stochastic solver {name!r}")


def tune_stochastic(name, inst, p, batch_size, epochs, seed):
    """Pick the grid point with the best validation accuracy (ties: lower objective)."""
    best, best_key = None, None
    for params in stochastic_grid(name):
        try:
            with np.errstate(all="ignore"):
                res = stochastic_run(name, inst, p, params, batch_size, epochs, seed)
        except NumericalFailure:
            continue
        obj = res.trace[-1].objective
        if not math.isfinite(obj):
            continue
        key = (-inst.accuracy(p, res.x, "val"), obj)
        if best_key is None or key < best_key:
            best, best_key = params, key
    return best


EXTRA_FORMATS = {"active_groups": "{:.1f}"}


def format_table(rows, extra_columns=(), iteration_label="Iter. to 1e-6"):
    """Aligned text table, ``mean ± std`` per metric; best mean per column starred.

    The ``± std`` suffix is dropped when a row was aggregated over one seed.
    """
    metrics = [("Final obj.", "final_obj_mean", "final_obj_std", "{:.4f}"),
               (iteration_label, "iters_mean", "iters_std", "{:.1f}"),
               ("Time (s)", "time_mean", "time_std", "{:.4f}")]
    header = ["Method", metrics[0][0]] + list(extra_columns) + [m[0] for m in metrics[1:]]
    best = {m[1]: min(getattr(r, m[1]) for r in rows) for m in metrics}
    body = []
    for r in rows:
        cells = [r.method]
        for i, (_, mean_attr, std_attr, fmt) in enumerate(metrics):
            mean = getattr(r, mean_attr)
            cell = fmt.format(mean)
            if len(r.seeds) > 1:
                cell += " ± " + fmt.format(getattr(r, std_attr))
            if mean == best[mean_attr]:
                cell += " *"
            if mean_attr == "iters_mean" and r.not_reached:
                cell += f" ({r.not_reached} not reached)"
            cells.append(cell)
            if i == 0:
                cells.extend(EXTRA_FORMATS.get(c, "{:.3f}").format(
                    r.extras.get(c, float("nan"))) for c in extra_columns)
        body.append(cells)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(cells, widths)) for cells in body]
    return "\n".join(lines)
