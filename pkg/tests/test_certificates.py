import numpy as np
import pytest

from proxnaggs.certificates import (CertificateReport, check_contraction,
                                    check_convex_descent,
                                    check_mismatch_absorption, compute_params,
                                    convex_energy, gap_coupling_burn_in,
                                    lyapunov_value, mismatch_term, theta_for)
from proxnaggs.exceptions import DegenerateIntervalError, InputError
from proxnaggs.io import read_trace_csv, write_trace_csv
from proxnaggs.problems import gen_elastic_net, with_reference
from proxnaggs.solvers import ProxNAGGSConfig, prox_naggs_run
from proxnaggs.trace import TraceRow


def lyap_trace(values):
    return [TraceRow(k=k, gap_v=v, V=0.0, X=0.0) for k, v in enumerate(values)]


@pytest.fixture
def example_params():
    return compute_params(0.5, 1.0, 1.0, 0.1, 0.1)


def test_example_parameters(example_params):
    p = example_params
    assert p.b == 1.0
    assert p.beta == pytest.approx(0.45)
    assert (p.c_lower, p.c_upper) == pytest.approx((0.45, 0.65))
    assert p.c == pytest.approx(0.55)
    assert p.theta == pytest.approx(max(1.0 / 1.05, 0.5 / 0.55))
    assert p.theta == pytest.approx(0.95238, abs=1e-5)


def test_degenerate_interval():
    with pytest.raises(DegenerateIntervalError):
        compute_params(0.5, 1.0, 1.0, 0.0, 0.0)


def test_endpoints_give_unit_theta(example_params):
    for c in (example_params.c_lower, example_params.c_upper):
        assert compute_params(0.5, 1.0, 1.0, 0.1, 0.1, c_choice=c).theta == pytest.approx(1.0, abs=1e-12)


def test_below_smoothness_is_outside_regime():
    with pytest.warns(UserWarning):
        p = compute_params(0.5, 0.5, 1.0, 0.1, 0.1)
    assert not p.in_regime
    report = check_contraction(lyap_trace([1.0, 0.5]), p)
    assert report.status == "outside theoretical regime"


def test_lyapunov_and_energy_values(example_params):
    assert lyapunov_value(example_params, 0, 0, 0) == 0
    assert lyapunov_value(example_params, 1, 1, 1) == pytest.approx(2.55)
    assert convex_energy(1.0, 0.5, 0, 0, 0) == 0
    assert convex_energy(1.0, 0.5, 1.0, 1.0, 1.0) == pytest.approx(2.5)
    assert convex_energy(1.0, 1 - 1e-15, 0, 0, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_contraction_examples():
    p = compute_params(0.5, 1.0, 1.0, 0.1, 0.1)
    p = p.__class__(**{**p.__dict__, "theta": 0.95})
    assert check_contraction(lyap_trace([1.0, 0.9, 0.81]), p).passed
    report = check_contraction(lyap_trace([1.0, 0.96]), p)
    assert report.contraction_violations[0][0] == 0
    assert report.contraction_violations[0][1] == pytest.approx(0.01)
    assert report.status == "fail"
    with pytest.raises(InputError):
        check_contraction(lyap_trace([1.0]), p)


def test_mismatch_examples():
    rows = [TraceRow(k=0, D=0.0), TraceRow(k=1, R=0.0, M=0.0)]
    assert check_mismatch_absorption(rows, 1.0, 1.0, 0.5) == []
    assert mismatch_term(1.0, 1.0, 0.5, 0, 0, 0) == 0
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, mu, D, R = rng.uniform(0.05, 0.95), rng.uniform(0.1, 10), rng.uniform(0, 5), rng.uniform(0, 5)
        M = (1 - a) ** 3 * D + R / a
        assert mismatch_term(mu, mu, a, D, R, M) == pytest.approx(0.0, abs=1e-12 * mu * (D + R + M))
    with pytest.raises(InputError):
        check_mismatch_absorption([TraceRow(k=0, D=0.0), TraceRow(k=1)], 1.0, 1.0, 0.5)


def test_convex_descent_trivial_at_solution():
    rows = [TraceRow(k=k, gap_v=0.0, V=0.0, X=0.0, D=0.0) for k in range(5)]
    report = check_convex_descent(rows, 1.0, 0.5, averaged_gaps={1: 0.0, 4: 0.0})
    assert report.passed and report.rate_check == {
        "sum_gap": True, "best_rate": True, "ergodic_rate": True}


def test_theta_below_one_for_interior_c():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = rng.uniform(0.01, 0.99)
        L = rng.uniform(0.1, 10)
        mu_hat = L * rng.uniform(1, 3)
        mu_f = rng.uniform(0, L)
        mu_F = mu_f + rng.uniform(0, 1)
        if mu_F == 0:
            continue
        p = compute_params(a, mu_hat, L, mu_f, mu_F)
        c = rng.uniform(p.c_lower, p.c_upper)
        if not p.c_lower < c < p.c_upper:
            continue
        assert theta_for(a, p.b, p.beta, c, mu_F) < 1
        assert p.theta < 1
        width = p.c_upper - p.c_lower
        assert width == pytest.approx((mu_F + mu_f) / (2 * a), abs=1e-12 * max(1, width))


def test_envelope_follows_from_contraction():
    rng = np.random.default_rng(2)
    p = compute_params(0.5, 1.0, 1.0, 0.1, 0.1)
    for _ in range(50):
        vals = [1.0]
        for _ in range(30):
            vals.append(vals[-1] * p.theta * rng.uniform(0.5, 1.0))
        report = check_contraction(lyap_trace(vals), p)
        assert not report.contraction_violations and not report.envelope_violations


def test_burn_in():
    rows = [TraceRow(k=0, gap_x=1.0, gap_v=0.5), TraceRow(k=1, gap_x=1.0, gap_v=0.95),
            TraceRow(k=2, gap_x=1.0, gap_v=1.05)]
    assert gap_coupling_burn_in(rows) == 1
    assert gap_coupling_burn_in(rows[:1]) is None


def test_report_reproduced_from_csv(tmp_path):
    p = with_reference(gen_elastic_net(n=60, d=30, variant="hard", seed=1))
    params = compute_params(0.5, p.L, p.L, p.mu_f, p.mu_f)
    cfg = ProxNAGGSConfig(mu_hat=p.L, alpha=1.0, max_iter=300)
    trace = prox_naggs_run(p, cfg, np.zeros(p.dimension), lyap_params=params).trace
    write_trace_csv(trace, tmp_path / "t.csv")
    back = read_trace_csv(tmp_path / "t.csv")

    def report(t):
        r = check_contraction(t, params)
        r.mismatch_violations = check_mismatch_absorption(t, p.L, p.L, 0.5)
        return r

    a, b = report(trace), report(back)
    assert a.passed and a.violations() == b.violations()
    assert a.max_slack == b.max_slack and a.extras == b.extras


def test_report_merge_and_status():
    r = CertificateReport()
    r.merge(CertificateReport(contraction_violations=[(3, 0.1)], max_slack=0.1))
    assert r.status == "fail" and r.violations() == [(3, "contraction", 0.1)]
