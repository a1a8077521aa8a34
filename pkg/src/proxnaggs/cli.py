"""Command-line front end: ``gen``, ``solve``, ``certify``, ``sweep``, ``table``."""

import argparse
from dataclasses import replace
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench
from .certificates import (check_contraction, check_convex_descent,
                           check_mismatch_absorption, compute_params,
                           gap_coupling_burn_in, CertificateReport)
from .exceptions import (ConfigurationError, DegenerateIntervalError, InputError,
                         NumericalFailure, ParseError, ReferenceFailure)
from .io import (ensure_fresh_dir, load_idx, read_instance, read_keyvalue,
                 read_rows_csv, to_features, write_instance, write_keyvalue,
                 write_report, write_rows_csv, write_trace_csv, write_violations_csv)
from .model import composite_value
from .problems import compute_reference, sparsity
from .solvers import ProxNAGGSConfig, averaged_iterate, prox_naggs_run
from .trace import column

log = logging.getLogger("proxnaggs")

DEFAULTS = {
    "problem": "elastic-net",
    "variant": "easy",
    "solver": "all",
    "seeds": "0,1,2,3,4",
    "mu_hat": None,
    "alpha": None,
    "max_iter": None,
    "gap_tol": 1e-6,
    "out": None,
    "force": False,
    "n": None,
    "d": None,
    "lambda1": None,
    "lambda2": None,
    "cond_target": 1e3,
    "c": "midpoint",
    "classes": 3,
    "separation": 2.0,
    "epochs": 10,
    "batch_size": 50,
    "grid": None,
    "param": "lambda1",
    "tune": False,
    "plot": False,
    "instances": None,
    "idx_images": None,
    "idx_labels": None,
    "timing": True,
}

EPOCH_HEADER = ("epoch", "objective", "data_fit", "regularization", "sparsity",
                "elapsed_s")


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


def parse_seeds(text):
    try:
        seeds = [int(t) for t in str(text).replace(" ", "").split(",") if t != ""]
    except ValueError:
        raise InputError(f"cannot parse seeds {text!r}") from None
    if not seeds:
        raise InputError("seed list is empty")
    return seeds


def parse_mu_hat(text, L):
    """``"2.5"`` is absolute; ``"0.1L"`` or ``"L"`` is relative to ``L``."""
    s = str(text).strip()
    if s.endswith("L"):
        factor = s[:-1]
        return (float(factor) if factor else 1.0) * L
    return float(s)


def parse_grid(text):
    if text is None:
        return []
    return [float(t) for t in str(text).split(",") if t.strip()]


def effective_config(args):
    """Merge defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, value in read_keyvalue(args.config).items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise InputError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    if getattr(args, "no_timing", False):
        cfg["timing"] = False
    for key in ("force", "tune", "plot", "timing"):
        if isinstance(cfg[key], str):
            cfg[key] = cfg[key].lower() in ("1", "true", "yes")
    return cfg


def _num(cfg, key, cast=float):
    return None if cfg[key] is None else cast(cfg[key])


def instance_overrides(cfg):
    out = {}
    for key in ("n", "d"):
        if cfg[key] is not None:
            out[key] = int(cfg[key])
    if cfg["problem"] in bench.DETERMINISTIC_PROBLEMS:
        if cfg["lambda2"] is not None:
            out["lambda2"] = float(cfg["lambda2"])
        if cfg["lambda1"] is not None:
            key = "lambda1" if cfg["problem"] == "elastic-net" else "lambda_g"
            out[key] = float(cfg["lambda1"])
        if cfg["variant"] == "hard":
            out["cond_target"] = float(cfg["cond_target"])
    return out


def load_problems(cfg, seeds):
    """``[(seed, instance, problem_with_reference)]`` from disk or generated."""
    out = []
    for seed in seeds:
        if cfg["instances"]:
            inst, ref = read_instance(Path(cfg["instances"]) / f"seed_{seed}")
            if ref is None:
                raise InputError(f"instance seed_{seed} has no reference solution")
            p = inst.problem(reference=ref)
        else:
            inst = bench.make_instance(cfg["problem"], cfg["variant"], seed,
                                       **instance_overrides(cfg))
            p = inst.problem()
            p = p.with_reference(compute_reference(p))
        out.append((seed, inst, p))
    return out


def save_trace(trace, path, cfg):
    """Write a trace; without timing the ``elapsed_s`` column is left empty so
    repeated runs give identical bytes."""
    if not cfg["timing"]:
        trace = [replace(r, elapsed_s=None) for r in trace]
    write_trace_csv(trace, path)


def write_effective_config(out, cfg, command):
    write_keyvalue(Path(out) / "config.txt",
                   {"command": command, **{k: v for k, v in cfg.items() if v is not None}})


# gen -------------------------------------------------------------------------

def cmd_gen(cfg):
    if cfg["problem"] not in bench.DETERMINISTIC_PROBLEMS:
        raise InputError("gen writes deterministic instances (elastic-net, group-lasso)")
    out = ensure_fresh_dir(cfg["out"] or f"instances-{cfg['problem']}-{cfg['variant']}",
                           cfg["force"])
    for seed in parse_seeds(cfg["seeds"]):
        inst = bench.make_instance(cfg["problem"], cfg["variant"], seed,
                                   **instance_overrides(cfg))
        try:
            ref = compute_reference(inst.problem())
        except ReferenceFailure as exc:
            raise StageError("reference", exc) from exc
        write_instance(out / f"seed_{seed}", inst, ref)
        print(f"seed {seed}: F* = {ref.F_star:.10g} (residual {ref.residual:.2e})")
    write_effective_config(out, cfg, "gen")
    return 0


# solve -----------------------------------------------------------------------

def _solver_names(cfg, stochastic):
    names = bench.STOCHASTIC_SOLVER_NAMES if stochastic else bench.SOLVER_NAMES
    if cfg["solver"] == "all":
        return list(names)
    chosen = [s.strip() for s in str(cfg["solver"]).split(",")]
    for s in chosen:
        if s not in names:
            raise ConfigurationError(f"unknown solver {s!r}; choose from {', '.join(names)}")
    return chosen


def _explicit_params(name, cfg, L):
    params = {}
    if name == "prox-naggs":
        if cfg["mu_hat"] is not None:
            params["mu_hat"] = parse_mu_hat(cfg["mu_hat"], L)
        if cfg["alpha"] is not None:
            params["alpha"] = float(cfg["alpha"])
    return params


def _curve(traces, attr):
    length = max(len(t) for t in traces)
    mat = np.full((len(traces), length), np.nan)
    for i, t in enumerate(traces):
        vals = [np.nan if v is None else v for v in column(t, attr)]
        mat[i, :len(vals)] = vals
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.arange(length), np.nanmean(mat, axis=0), np.nanstd(mat, axis=0)


def _summary_rows(summaries, extra_keys):
    header = list(bench.SummaryRow.HEADER) + list(extra_keys)
    rows = [list(s.as_row()) + [s.extras.get(k) for k in extra_keys] for s in summaries]
    return header, rows


def solve_deterministic(cfg, out):
    seeds = parse_seeds(cfg["seeds"])
    problems = load_problems(cfg, seeds)
    max_iter = int(cfg["max_iter"] or 5000)
    gap_tol = float(cfg["gap_tol"])
    summaries, seed_rows, curves = [], [], {}
    for name in _solver_names(cfg, stochastic=False):
        explicit = _explicit_params(name, cfg, problems[0][2].L)
        if cfg["tune"] and not explicit:
            params, mean_it = bench.tune(name, [p for _, _, p in problems], max_iter)
            print(f"{name}: tuned {params} (mean iterations {mean_it})")
        else:
            params = explicit
        results, traces = [], []
        for seed, _, p in problems:
            run_params = dict(params)
            if name == "prox-naggs" and "mu_hat" in run_params and cfg["mu_hat"] is not None:
                run_params["mu_hat"] = parse_mu_hat(cfg["mu_hat"], p.L)
            try:
                res = bench.run_solver(name, p, run_params, max_iter=max_iter,
                                       gap_tol=gap_tol)
            except NumericalFailure as exc:
                raise StageError(f"solve[{name}, seed {seed}]", exc) from exc
            (out / name).mkdir(exist_ok=True)
            save_trace(res.trace, out / name / f"trace_seed{seed}.csv", cfg)
            sr = bench.seed_result(name, p, res, seed)
            results.append(sr)
            traces.append(res.trace)
            seed_rows.append([name, seed, sr.final_objective, sr.iterations,
                              int(sr.reached), sr.time_s]
                             + [sr.extras.get(k) for k in ("active_groups", "sparsity")])
        summaries.append(bench.summarize(name, results))
        curves[name] = _curve(traces, "gap_x")
        write_keyvalue(out / name / "params.txt",
                       {k: float(v) for k, v in params.items()} or {"params": "default"})
    extra = ["active_groups"] if cfg["problem"] == "group-lasso" else ["sparsity"]
    header, rows = _summary_rows(summaries, extra)
    write_rows_csv(out / "summary.csv", header, rows)
    write_rows_csv(out / "seeds.csv", ("method", "seed", "final_objective", "iterations",
                                       "reached", "time_s", "active_groups", "sparsity"),
                   seed_rows)
    print(bench.format_table(summaries, extra))
    if cfg["plot"]:
        from .plotting import plot_gap_curves
        plot_gap_curves(curves, out / "gap_vs_iteration.png",
                        title=f"{cfg['problem']} ({cfg['variant']})")
    return 0


def _classification(cfg, seed):
    if cfg["idx_images"]:
        return to_features(load_idx(cfg["idx_images"]), load_idx(cfg["idx_labels"]),
                           seed=seed)
    kw = {"C": int(cfg["classes"]), "separation": float(cfg["separation"])}
    if cfg["n"] is not None:
        kw["n"] = int(cfg["n"])
    if cfg["d"] is not None:
        kw["d"] = int(cfg["d"])
    return bench.make_instance(cfg["problem"], seed=seed, **kw)


def _stochastic_problem(cfg, inst, lambda1=None):
    penalty = "l1" if cfg["problem"] == "softmax-l1" else "group"
    lam1 = float(cfg["lambda1"] if lambda1 is None and cfg["lambda1"] is not None
                 else (lambda1 if lambda1 is not None else 1e-3))
    lam2 = float(cfg["lambda2"]) if cfg["lambda2"] is not None else 1e-4
    return inst.problem(lambda1=lam1, lambda2=lam2, penalty=penalty)


def _stochastic_params(name, cfg, inst, p, seed):
    if cfg["tune"]:
        return bench.tune_stochastic(name, inst, p, int(cfg["batch_size"]),
                                     int(cfg["epochs"]), seed)
    if name == "prox-naggs":
        params = {"mu_hat_factor": 0.5, "alpha": 1.0}
        params.update(_explicit_params(name, cfg, p.L))
        return params
    return {"eta_factor": 1.0}


def solve_stochastic(cfg, out):
    seeds = parse_seeds(cfg["seeds"])
    epochs, batch = int(cfg["epochs"]), int(cfg["batch_size"])
    summaries = []
    for name in _solver_names(cfg, stochastic=True):
        results = []
        (out / name).mkdir(exist_ok=True)
        for seed in seeds:
            inst = _classification(cfg, seed)
            p = _stochastic_problem(cfg, inst)
            params = _stochastic_params(name, cfg, inst, p, seed)
            res = bench.stochastic_run(name, inst, p, params, batch, epochs, seed)
            write_rows_csv(out / name / f"epochs_seed{seed}.csv", EPOCH_HEADER,
                           [[r.epoch, r.objective, r.data_fit, r.regularization,
                             r.sparsity, r.elapsed_s] for r in res.trace])
            last = res.trace[-1]
            results.append(bench.SeedResult(
                seed=seed, final_objective=last.objective, iterations=epochs,
                reached=True, time_s=last.elapsed_s,
                extras={"test_accuracy": inst.accuracy(p, res.x, "test"),
                        "sparsity": sparsity(res.x), "data_fit": last.data_fit}))
        summaries.append(bench.summarize(name, results))
    extra = ["test_accuracy", "sparsity", "data_fit"]
    header, rows = _summary_rows(summaries, extra)
    write_rows_csv(out / "summary.csv", header, rows)
    print(bench.format_table(summaries, extra, iteration_label="Epochs"))
    return 0


def cmd_solve(cfg):
    out = ensure_fresh_dir(cfg["out"] or f"run-{cfg['problem']}-{cfg['variant']}",
                           cfg["force"])
    write_effective_config(out, cfg, "solve")
    if cfg["problem"] in bench.STOCHASTIC_PROBLEMS:
        return solve_stochastic(cfg, out)
    if cfg["problem"] not in bench.DETERMINISTIC_PROBLEMS:
        raise ConfigurationError(f"unknown problem {cfg['problem']!r}")
    return solve_deterministic(cfg, out)


# certify ---------------------------------------------------------------------

def certify_one(p, mu_hat, alpha, max_iter, c_choice="midpoint"):
    """Run Prox-NAG-GS and check every inequality that applies.

    Returns ``(report, trace, params_or_None)``.
    """
    a = alpha / (1 + alpha)
    try:
        params = compute_params(a, mu_hat, p.L, p.mu_f, p.mu_F, c_choice)
    except DegenerateIntervalError:
        params = None
    keep = params is None
    cfg = ProxNAGGSConfig(mu_hat=mu_hat, alpha=alpha, max_iter=max_iter,
                          keep_iterates=keep)
    res = prox_naggs_run(p, cfg, np.zeros(p.dimension), lyap_params=params)
    if params is not None:
        report = check_contraction(res.trace, params)
    else:
        vs = [v for _, v in res.iterates]
        ks = [k for k in (10, 100, 1000) if k < len(vs)]
        avg = {k: composite_value(p, averaged_iterate(vs, k)) - p.F_star for k in ks}
        report = check_convex_descent(res.trace, mu_hat, a, averaged_gaps=avg)
        report.in_regime = mu_hat >= p.L
    report.mismatch_violations = check_mismatch_absorption(res.trace, mu_hat, p.L, a)
    report.extras["gap_burn_in"] = gap_coupling_burn_in(res.trace)
    return report, res.trace, params


def cmd_certify(cfg):
    if cfg["problem"] not in bench.DETERMINISTIC_PROBLEMS:
        raise ConfigurationError("certify runs on deterministic problems")
    out = ensure_fresh_dir(cfg["out"] or f"certify-{cfg['problem']}-{cfg['variant']}",
                           cfg["force"])
    write_effective_config(out, cfg, "certify")
    seeds = parse_seeds(cfg["seeds"])
    alpha = float(cfg["alpha"] or 1.0)
    max_iter = int(cfg["max_iter"] or 2000)
    c_choice = cfg["c"] if cfg["c"] == "midpoint" else float(cfg["c"])
    traces, statuses, envelopes = [], [], []
    burn_ins = []
    for seed, _, p in load_problems(cfg, seeds):
        mu_hat = parse_mu_hat(cfg["mu_hat"], p.L) if cfg["mu_hat"] is not None else p.L
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report, trace, params = certify_one(p, mu_hat, alpha, max_iter, c_choice)
        save_trace(trace, out / f"trace_seed{seed}.csv", cfg)
        write_report(out / f"report_seed{seed}.txt", report, {"seed": seed})
        write_violations_csv(out / f"violations_seed{seed}.csv", report)
        statuses.append(report.status)
        burn_ins.append(report.extras["gap_burn_in"])
        traces.append(trace)
        if params is not None:
            l0 = trace[0].lyap
            envelopes.append([l0 * params.theta ** r.k for r in trace])
        print(f"seed {seed}: {report.status}; contraction violations "
              f"{len(report.contraction_violations)}, envelope "
              f"{len(report.envelope_violations)}, mismatch "
              f"{len(report.mismatch_violations)}, descent "
              f"{len(report.convex_descent_violations)}; gap burn-in {burn_ins[-1]}")
    series = {}
    for attr in ("gap_x", "gap_v", "lyap" if envelopes else "energy"):
        k, mean, std = _curve(traces, attr)
        series["k"] = k
        series[f"{attr}_mean"], series[f"{attr}_std"] = mean, std
    if envelopes:
        series["envelope_mean"] = np.mean(envelopes, axis=0)
    names = list(series)
    write_rows_csv(out / "series.csv", names,
                   [[int(series["k"][i])] + [float(series[n][i]) for n in names[1:]]
                    for i in range(len(series["k"]))])
    overall = ("outside theoretical regime"
               if "outside theoretical regime" in statuses
               else "pass" if all(s == "pass" for s in statuses) else "fail")
    write_keyvalue(out / "report.txt", {
        "status": overall, "seeds": ",".join(map(str, seeds)),
        "gap_burn_in_max": max((b for b in burn_ins if b is not None), default=None),
        "gap_burn_in_all_found": all(b is not None for b in burn_ins)})
    if cfg["plot"]:
        from .plotting import plot_theory_check
        plot_theory_check(series, out / "theory_check.png")
    print(f"overall: {overall}")
    return 0 if overall != "fail" else 1


# sweep -----------------------------------------------------------------------

def cmd_sweep(cfg):
    grid = parse_grid(cfg["grid"])
    if not grid:
        raise ConfigurationError("sweep needs a nonempty --grid")
    out = ensure_fresh_dir(cfg["out"] or f"sweep-{cfg['problem']}", cfg["force"])
    write_effective_config(out, cfg, "sweep")
    seeds = parse_seeds(cfg["seeds"])
    if cfg["problem"] in bench.STOCHASTIC_PROBLEMS:
        rows = sweep_stochastic(cfg, grid, seeds)
        header = ("method", "lambda1", "n_seeds", "accuracy_mean", "accuracy_std",
                  "sparsity_mean", "sparsity_std", "objective_mean", "data_fit_mean")
    else:
        rows = sweep_deterministic(cfg, grid, seeds)
        header = ("method", "param", "value", "n_seeds", "iters_mean",
                  "final_obj_mean", "not_reached")
    write_rows_csv(out / "sweep.csv", header, rows)
    for row in rows:
        print("  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    if cfg["plot"] and cfg["problem"] in bench.STOCHASTIC_PROBLEMS:
        from .plotting import plot_tradeoff
        plot_tradeoff(read_rows_csv(out / "sweep.csv"), out / "accuracy_sparsity.png")
    return 0


def sweep_stochastic(cfg, grid, seeds):
    if cfg["param"] != "lambda1":
        raise ConfigurationError("stochastic sweeps run over lambda1")
    epochs, batch = int(cfg["epochs"]), int(cfg["batch_size"])
    rows = []
    instances = {seed: _classification(cfg, seed) for seed in seeds}
    for name in _solver_names(cfg, stochastic=True):
        for lam in grid:
            acc, spars, obj, fit = [], [], [], []
            for seed in seeds:
                inst = instances[seed]
                p = _stochastic_problem(cfg, inst, lambda1=lam)
                params = _stochastic_params(name, cfg, inst, p, seed)
                res = bench.stochastic_run(name, inst, p, params, batch, epochs, seed)
                acc.append(inst.accuracy(p, res.x, "test"))
                spars.append(sparsity(res.x))
                obj.append(res.trace[-1].objective)
                fit.append(res.trace[-1].data_fit)
            rows.append((name, lam, len(seeds), float(np.mean(acc)),
                         float(np.std(acc)), float(np.mean(spars)),
                         float(np.std(spars)), float(np.mean(obj)), float(np.mean(fit))))
    return rows


def sweep_deterministic(cfg, grid, seeds):
    param = cfg["param"]
    problems = [p for _, _, p in load_problems(cfg, seeds)]
    max_iter = int(cfg["max_iter"] or 5000)
    valid = {"ista": ("eta_factor",), "fista": ("eta_factor",),
             "chambolle-pock": ("sigma_ratio",),
             "prox-naggs": ("mu_hat_factor", "alpha")}
    rows = []
    for name in _solver_names(cfg, stochastic=False):
        if param not in valid[name]:
            continue
        for value in grid:
            params = {param: value}
            if name == "prox-naggs" and cfg["alpha"] is not None and param != "alpha":
                params["alpha"] = float(cfg["alpha"])
            its, objs, missing = [], [], 0
            for p in problems:
                n_it = bench.iterations_to_gap(name, p, params, max_iter)
                if n_it is None:
                    missing += 1
                    n_it = max_iter
                its.append(n_it)
                with np.errstate(all="ignore"):
                    try:
                        res = bench.run_solver(name, p, params, max_iter=n_it,
                                               gap_tol=0.0, record_trace=False)
                        objs.append(composite_value(p, res.x))
                    except NumericalFailure:
                        objs.append(math.inf)
            rows.append((name, param, value, len(problems), float(np.mean(its)),
                         float(np.mean(objs)), missing))
    if not rows:
        raise ConfigurationError(f"no selected solver takes parameter {param!r}")
    return rows


# table -----------------------------------------------------------------------

def cmd_table(paths):
    tables = []
    seed_counts = set()
    for path in paths:
        rows = read_rows_csv(Path(path) / "summary.csv")
        if not rows:
            raise InputError(f"{path}/summary.csv has no rows")
        extra = [k for k in rows[0] if k not in bench.SummaryRow.HEADER]
        summaries = []
        for r in rows:
            n = int(r["n_seeds"])
            seed_counts.add(n)
            summaries.append(bench.SummaryRow(
                method=r["method"], seeds=tuple(range(n)),
                final_obj_mean=float(r["final_obj_mean"]),
                final_obj_std=float(r["final_obj_std"]),
                iters_mean=float(r["iters_mean"]), iters_std=float(r["iters_std"]),
                time_mean=float(r["time_mean"]), time_std=float(r["time_std"]),
                not_reached=int(r["not_reached"]),
                extras={k: float(r[k]) for k in extra if r[k] != ""}))
        shown = [k for k in extra if k in ("active_groups", "sparsity", "test_accuracy",
                                           "data_fit")]
        label = "Epochs" if "test_accuracy" in extra else "Iter. to 1e-6"
        tables.append(f"== {path}\n" + bench.format_table(summaries, shown, label))
    if len(seed_counts) > 1:
        print(f"warning: inconsistent seed counts {sorted(seed_counts)}", file=sys.stderr)
    print("\n\n".join(tables))
    return 0


# parser ----------------------------------------------------------------------

def _common(p, problem_positional=True):
    if problem_positional:
        p.add_argument("problem_pos", nargs="?", metavar="PROBLEM",
                       choices=bench.DETERMINISTIC_PROBLEMS + bench.STOCHASTIC_PROBLEMS)
    p.add_argument("--problem",
                   choices=bench.DETERMINISTIC_PROBLEMS + bench.STOCHASTIC_PROBLEMS)
    p.add_argument("--variant", choices=("easy", "hard"))
    p.add_argument("--solver")
    p.add_argument("--seeds", "--seed", dest="seeds")
    p.add_argument("--mu-hat", dest="mu_hat")
    p.add_argument("--alpha", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--gap-tol", dest="gap_tol", type=float)
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--cond-target", dest="cond_target", type=float)
    p.add_argument("--instances")
    p.add_argument("--tune", action="store_true")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.add_argument("--no-timing", dest="no_timing", action="store_true",
                   help="leave elapsed_s empty in trace files")
    p.add_argument("--classes", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--idx-images", dest="idx_images")
    p.add_argument("--idx-labels", dest="idx_labels")


def build_parser():
    parser = argparse.ArgumentParser(prog="proxnaggs",
                                     description="Prox-NAG-GS benchmarks and certificates")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("gen", help="write seeded instances and references"))
    _common(sub.add_parser("solve", help="run solvers over seeds"))
    c = sub.add_parser("certify", help="check the Lyapunov certificates with mu_hat = L")
    _common(c)
    c.add_argument("--c", help="Lyapunov weight c, or 'midpoint'")
    s = sub.add_parser("sweep", help="grid sweep over lambda1 or a step parameter")
    _common(s)
    s.add_argument("--grid", help="comma-separated values")
    s.add_argument("--param", help="lambda1 | mu_hat_factor | alpha | eta_factor | sigma_ratio")
    t = sub.add_parser("table", help="print summary tables of run directories")
    t.add_argument("dirs", nargs="+")
    return parser


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "certify": cmd_certify,
            "sweep": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "table":
            return cmd_table(args.dirs)
        if getattr(args, "problem_pos", None) and not args.problem:
            args.problem = args.problem_pos
        cfg = effective_config(args)
        if args.command == "certify" and args.variant is None and \
                not (args.config and "variant" in read_keyvalue(args.config)):
            cfg["variant"] = "hard"
        return COMMANDS[args.command](cfg)
    except StageError as exc:
        print(f"error in {exc.stage}: {exc.exc}", file=sys.stderr)
        return 1
    except (InputError, ConfigurationError, ParseError, FileExistsError,
            FileNotFoundError, ReferenceFailure, NumericalFailure) as exc:
        print(f"error in {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
