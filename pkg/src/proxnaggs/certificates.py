"""Numerical checks of the Lyapunov contraction and convex-case energy descent.

All checks are pure functions of a trace, so re-running them on a trace read
back from CSV gives the same report.
"""

from dataclasses import dataclass, field
import math
import warnings
from typing import Optional

from .exceptions import DegenerateIntervalError, InputError


@dataclass(frozen=True)
class LyapunovParams:
    a: float
    mu_hat: float
    L: float
    mu_f: float
    mu_F: float
    b: float
    beta: float
    c: float
    theta: float
    c_lower: float
    c_upper: float
    in_regime: bool

    @property
    def c_interior(self):
        return self.c_lower < self.c < self.c_upper


def theta_for(a, b, beta, c, mu_F):
    """Contraction factor for a given weight ``c`` on ``||x - x*||^2``."""
    first = (b * (1 - a) + a * (beta + c)) / (b + mu_F / 2)
    second = (1 - a) * (beta + c) / c
    return max(first, second)


def compute_params(a, mu_hat, L, mu_f, mu_F, c_choice="midpoint"):
    """Constants of the augmented Lyapunov function.

    ``c_choice`` is ``"midpoint"`` or an explicit positive value.  When
    ``mu_hat < L`` a warning is issued and ``in_regime`` is False; the
    constants are still returned.
    """
    if not 0 < a < 1:
        raise InputError(f"a must lie in (0, 1), got {a}")
    if mu_f < 0 or mu_F < mu_f:
        raise InputError("need 0 <= mu_f <= mu_F")
    in_regime = mu_hat >= L
    if not in_regime:
        warnings.warn(f"mu_hat={mu_hat:g} < L={L:g}: outside the certified regime",
                      stacklevel=2)
    b = mu_hat / (2 * a)
    beta = (mu_hat - mu_f) / 2
    lower = beta * (1 - a) / a
    upper = (mu_hat + mu_F) / (2 * a) - beta
    if not upper > lower:
        raise DegenerateIntervalError(
            "no admissible c (mu_f = mu_F = 0); use the convex-case energy check")
    if isinstance(c_choice, str):
        if c_choice != "midpoint":
            raise InputError(f"unknown c_choice {c_choice!r}")
        c = 0.5 * (lower + upper)
    else:
        c = float(c_choice)
        if c <= 0:
            raise InputError("c must be positive")
    theta = theta_for(a, b, beta, c, mu_F)
    return LyapunovParams(a=a, mu_hat=mu_hat, L=L, mu_f=mu_f, mu_F=mu_F, b=b,
                          beta=beta, c=c, theta=theta, c_lower=lower,
                          c_upper=upper, in_regime=in_regime)


def lyapunov_value(params, F_v_gap, V, X):
    return F_v_gap + params.b * V + params.c * X


def convex_energy(mu_hat, a, F_v_gap, V, X):
    return F_v_gap + mu_hat / (2 * a) * V + mu_hat * (1 - a) / (2 * a) * X


@dataclass
class CertificateReport:
    params: Optional[LyapunovParams] = None
    contraction_violations: list = field(default_factory=list)
    envelope_violations: list = field(default_factory=list)
    mismatch_violations: list = field(default_factory=list)
    convex_descent_violations: list = field(default_factory=list)
    rate_check: dict = field(default_factory=dict)
    max_slack: float = -math.inf
    in_regime: bool = True
    n_rows: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return (not self.contraction_violations and not self.envelope_violations
                and not self.mismatch_violations
                and not self.convex_descent_violations
                and all(self.rate_check.values()))

    @property
    def status(self):
        if not self.in_regime:
            return "outside theoretical regime"
        return "pass" if self.passed else "fail"

    def violations(self):
        """All violations as ``(k, kind, slack)`` triples."""
        out = []
        for kind, items in (("contraction", self.contraction_violations),
                            ("envelope", self.envelope_violations),
                            ("mismatch", self.mismatch_violations),
                            ("convex_descent", self.convex_descent_violations)):
            out.extend((k, kind, slack) for k, slack in items)
        return sorted(out)

    def merge(self, other):
        self.contraction_violations += other.contraction_violations
        self.envelope_violations += other.envelope_violations
        self.mismatch_violations += other.mismatch_violations
        self.convex_descent_violations += other.convex_descent_violations
        self.rate_check.update(other.rate_check)
        self.max_slack = max(self.max_slack, other.max_slack)
        self.in_regime = self.in_regime and other.in_regime
        self.params = self.params or other.params
        self.n_rows = max(self.n_rows, other.n_rows)
        self.extras.update(other.extras)
        return self


def _require(trace, names, minimum=2):
    if len(trace) < minimum:
        raise InputError(f"trace needs at least {minimum} rows, got {len(trace)}")
    for row in trace:
        for name in names:
            if getattr(row, name) is None:
                raise InputError(f"trace row k={row.k} is missing {name}")


def check_contraction(trace, params, rel_tol=1e-10):
    """Flag steps with ``L_{k+1} > theta L_k`` and points above ``L_0 theta^k``."""
    _require(trace, ("gap_v", "V", "X"))
    theta = params.theta
    lyap = [lyapunov_value(params, r.gap_v, r.V, r.X) for r in trace]
    report = CertificateReport(params=params, in_regime=params.in_regime,
                               n_rows=len(trace))
    for row, cur, nxt in zip(trace, lyap, lyap[1:]):
        slack = nxt - theta * cur
        report.max_slack = max(report.max_slack, slack / max(1.0, cur))
        if slack > rel_tol * max(1.0, cur):
            report.contraction_violations.append((row.k, slack))
    k0 = trace[0].k
    env_tol = rel_tol * max(1.0, lyap[0])
    for row, val in zip(trace, lyap):
        excess = val - lyap[0] * theta ** (row.k - k0)
        if excess > env_tol:
            report.envelope_violations.append((row.k, excess))
    report.extras["lyap_0"] = lyap[0]
    report.extras["lyap_last"] = lyap[-1]
    return report


def mismatch_term(mu_hat, L, a, D_k, R_next, M_next):
    return (-mu_hat * (1 - a) ** 3 / 2 * D_k - mu_hat / (2 * a) * R_next
            + L / 2 * M_next)


def check_mismatch_absorption(trace, mu_hat, L, a, abs_tol=1e-12):
    """List ``(k, value)`` where the mismatch expression is positive beyond tolerance.

    The expression pairs ``D_k`` from row ``k`` with ``R``, ``M`` from row
    ``k+1``.  Tolerance scales with ``max(1, mu_hat (D + R + M))``.
    """
    if len(trace) < 2:
        raise InputError("trace needs at least 2 rows")
    out = []
    for prev, row in zip(trace, trace[1:]):
        if prev.D is None or row.R is None or row.M is None:
            raise InputError(f"missing step diagnostics around k={prev.k}")
        val = mismatch_term(mu_hat, L, a, prev.D, row.R, row.M)
        scale = max(1.0, mu_hat * (prev.D + row.R + row.M))
        if val > abs_tol * scale:
            out.append((prev.k, val))
    return out


def max_mismatch(trace, mu_hat, L, a):
    return max(mismatch_term(mu_hat, L, a, p.D, r.R, r.M)
               for p, r in zip(trace, trace[1:]))


def check_convex_descent(trace, mu_hat, a, rel_tol=1e-10, averaged_gaps=None):
    """Energy descent plus the summed, best-iterate and ergodic rate bounds.

    ``averaged_gaps`` maps ``k`` to ``F(mean(v_0..v_{k-1})) - F*`` for the
    ergodic check; the caller evaluates those since the trace carries no
    iterates.
    """
    _require(trace, ("gap_v", "V", "X", "D"))
    energy = [convex_energy(mu_hat, a, r.gap_v, r.V, r.X) for r in trace]
    report = CertificateReport(in_regime=True, n_rows=len(trace))
    for row, cur, nxt in zip(trace, energy, energy[1:]):
        bound = cur - row.gap_v - mu_hat * (1 - a) / 2 * row.D
        slack = nxt - bound
        report.max_slack = max(report.max_slack, slack / max(1.0, cur))
        if slack > rel_tol * max(1.0, cur):
            report.convex_descent_violations.append((row.k, slack))

    e0 = energy[0]
    tol0 = rel_tol * max(1.0, e0)
    running_sum = 0.0
    running_min = math.inf
    sum_ok = best_ok = True
    for i, row in enumerate(trace[:-1]):
        running_sum += row.gap_v
        running_min = min(running_min, row.gap_v)
        k = i + 1
        sum_ok &= running_sum <= e0 + tol0
        best_ok &= running_min <= e0 / k + tol0
    report.rate_check["sum_gap"] = bool(sum_ok)
    report.rate_check["best_rate"] = bool(best_ok)
    if averaged_gaps:
        report.rate_check["ergodic_rate"] = all(
            gap <= e0 / k + tol0 for k, gap in averaged_gaps.items())
    report.extras["energy_0"] = e0
    return report


def gap_coupling_burn_in(trace, rel_tol=0.1, eps=1e-12):
    """Smallest ``K0`` after which ``|gap_x - gap_v| / max(gap_x, eps) <= rel_tol``.

    Returns None when the last row already fails.
    """
    burn_in = None
    for row in reversed(trace):
        rel = abs(row.gap_x - row.gap_v) / max(row.gap_x, eps)
        if rel > rel_tol:
            break
        burn_in = row.k
    return burn_in
