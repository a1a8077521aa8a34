"""Closed-form proximal operators and the regularizers that own them.

Every regularizer exposes ``evaluate(x)`` and ``prox(tau, z)``, where
``prox(tau, z)`` minimizes ``r(u) + ||u - z||^2 / (2 tau)``.  Penalty weights
are stored on the regularizer; callers pass only the step scale ``tau``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .exceptions import InputError


def prox_l1(lambda1, tau, z):
    """Soft-thresholding: ``sign(z) * max(|z| - tau*lambda1, 0)``."""
    if lambda1 < 0:
        raise InputError("lambda1 must be nonnegative")
    if tau <= 0:
        raise InputError("tau must be positive")
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - tau * lambda1, 0.0)


def prox_group_l2(lambda_g, partition, tau, z):
    """Block soft-thresholding over the groups of ``partition``.

    A block whose norm is at or below ``tau*lambda_g`` is set exactly to zero.
    """
    if lambda_g < 0:
        raise InputError("lambda_g must be nonnegative")
    if tau <= 0:
        raise InputError("tau must be positive")
    z = np.asarray(z, dtype=float)
    if z.shape[0] != partition.dimension:
        raise InputError(
            f"vector has length {z.shape[0]}, partition covers {partition.dimension}")
    thresh = tau * lambda_g
    norms = partition.group_norms(z)
    scale = np.zeros_like(norms)
    keep = norms > thresh
    scale[keep] = 1.0 - thresh / norms[keep]
    return z * scale[partition.membership]


def prox_box(lower, upper, tau, z):
    """Euclidean projection onto ``[lower, upper]``; ``tau`` is ignored."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise InputError("box bounds are inconsistent: lower > upper")
    if tau <= 0:
        raise InputError("tau must be positive")
    return np.clip(np.asarray(z, dtype=float), lower, upper)


@dataclass(frozen=True, eq=False)
class GroupPartition:
    """Disjoint index sets covering ``range(dimension)``."""

    groups: tuple
    dimension: int = field(init=False)
    membership: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        groups = tuple(np.asarray(g, dtype=np.intp).ravel() for g in self.groups)
        if not groups or any(g.size == 0 for g in groups):
            raise InputError("partition needs at least one nonempty group")
        flat = np.concatenate(groups)
        d = flat.size
        if flat.min() < 0 or flat.max() >= d or np.unique(flat).size != d:
            raise InputError("groups must be disjoint and cover 0..d-1")
        membership = np.empty(d, dtype=np.intp)
        for i, g in enumerate(groups):
            membership[g] = i
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "dimension", d)
        object.__setattr__(self, "membership", membership)

    @classmethod
    def contiguous(cls, dimension, group_size):
        if dimension % group_size:
            raise InputError(
                f"dimension {dimension} is not divisible by group size {group_size}")
        idx = np.arange(dimension)
        return cls(tuple(idx[i:i + group_size] for i in range(0, dimension, group_size)))

    @classmethod
    def per_feature(cls, n_features, n_classes):
        """One group per feature row of a column-major ``(d, C)`` weight matrix."""
        return cls(tuple(j + n_features * np.arange(n_classes) for j in range(n_features)))

    def __len__(self):
        return len(self.groups)

    def group_norms(self, x):
        sq = np.bincount(self.membership, weights=np.asarray(x, dtype=float) ** 2,
                         minlength=len(self.groups))
        return np.sqrt(sq)

    def to_labels(self):
        """Group label per coordinate (the serialized form)."""
        return self.membership.copy()

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels, dtype=np.intp)
        return cls(tuple(np.flatnonzero(labels == g) for g in np.unique(labels)))


class ZeroRegularizer:
    """``r = 0``; its prox is the identity."""

    def evaluate(self, x):
        return 0.0

    def prox(self, tau, z):
        return np.array(z, dtype=float, copy=True)

    def contains_subgradient(self, v, s, tol):
        return bool(np.all(np.abs(s) <= tol))

    def describe(self):
        return {"regularizer": "zero"}


@dataclass(frozen=True)
class L1Penalty:
    lambda1: float

    def __post_init__(self):
        if self.lambda1 < 0:
            raise InputError("lambda1 must be nonnegative")

    def evaluate(self, x):
        return self.lambda1 * float(np.sum(np.abs(x)))

    def prox(self, tau, z):
        return prox_l1(self.lambda1, tau, z)

    def contains_subgradient(self, v, s, tol):
        """Check ``s`` lies in the subdifferential of the l1 penalty at ``v``."""
        v = np.asarray(v)
        s = np.asarray(s)
        lam = self.lambda1
        scale = max(1.0, lam)
        if np.any(np.abs(s) > lam + tol * scale):
            return False
        nz = v != 0
        return bool(np.all(np.abs(s[nz] - lam * np.sign(v[nz])) <= tol * scale))

    def describe(self):
        return {"regularizer": "l1", "lambda1": self.lambda1}


@dataclass(frozen=True, eq=False)
class GroupL2Penalty:
    lambda_g: float
    partition: GroupPartition

    def __post_init__(self):
        if self.lambda_g < 0:
            raise InputError("lambda_g must be nonnegative")

    def evaluate(self, x):
        return self.lambda_g * float(np.sum(self.partition.group_norms(x)))

    def prox(self, tau, z):
        return prox_group_l2(self.lambda_g, self.partition, tau, z)

    def contains_subgradient(self, v, s, tol):
        lam = self.lambda_g
        scale = max(1.0, lam)
        vn = self.partition.group_norms(v)
        sn = self.partition.group_norms(s)
        if np.any(sn > lam + tol * scale):
            return False
        for i in np.flatnonzero(vn > 0):
            g = self.partition.groups[i]
            expected = lam * np.asarray(v)[g] / vn[i]
            if np.linalg.norm(np.asarray(s)[g] - expected) > tol * scale:
                return False
        return True

    def describe(self):
        return {"regularizer": "group_l2", "lambda_g": self.lambda_g,
                "n_groups": len(self.partition)}


@dataclass(frozen=True, eq=False)
class BoxIndicator:
    """Indicator of ``{x : lower <= x <= upper}``; infinite bounds allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape:
            raise InputError("box bounds must have the same shape")
        if np.any(lo > hi):
            raise InputError("box bounds are inconsistent: lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def is_feasible(self, x):
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def evaluate(self, x):
        return 0.0 if self.is_feasible(x) else math.inf

    def prox(self, tau, z):
        return prox_box(self.lower, self.upper, tau, z)

    def contains_subgradient(self, v, s, tol):
        # normal cone: s_i <= 0 at lower, >= 0 at upper, 0 in the interior
        v = np.asarray(v)
        s = np.asarray(s)
        at_lo = v <= self.lower
        at_hi = v >= self.upper
        ok = np.where(at_lo & at_hi, True,
                      np.where(at_lo, s <= tol,
                               np.where(at_hi, s >= -tol, np.abs(s) <= tol)))
        return bool(np.all(ok))

    def describe(self):
        return {"regularizer": "box"}


def _penalty_scale(r):
    return getattr(r, "lambda1", None) or getattr(r, "lambda_g", None) or 0.0


def prox_oracle_check(r, tau, z, grid=401, candidate=None, tol=1e-6, zooms=4):
    """Compare a prox output against exhaustive grid search.

    Evaluates ``r(u) + ||u - z||^2 / (2 tau)`` on a cube of half-width
    ``2 (||z||_inf + tau*lambda + 1)`` centred at ``z`` with ``grid`` points
    per axis (clipped to the box for an indicator), then re-grids ``zooms`` times on a cube of two cell widths
    around the best point so far.  Returns True iff ``candidate`` (default
    ``r.prox(tau, z)``) attains a value no larger than the grid minimum plus
    ``tol``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = z.size
    if d > 3:
        raise NotImplementedError("grid oracle supports dimension <= 3")
    if candidate is None:
        candidate = r.prox(tau, z)
    candidate = np.asarray(candidate, dtype=float)
    cand_val = r.evaluate(candidate) + float(np.sum((candidate - z) ** 2)) / (2 * tau)

    if not math.isfinite(cand_val):
        return False
    # search only the domain of r (all of R^d except for the box)
    lo = np.broadcast_to(getattr(r, "lower", -np.inf), z.shape)
    hi = np.broadcast_to(getattr(r, "upper", np.inf), z.shape)
    centre = z
    half = 2.0 * (np.max(np.abs(z)) + tau * _penalty_scale(r) + 1.0)
    best_val, best_pt = math.inf, z
    for _ in range(zooms + 1):
        axes = [np.linspace(np.clip(c - half, l, h), np.clip(c + half, l, h), grid)
                for c, l, h in zip(centre, lo, hi)]
        val, pt = _grid_min(r, axes, z, tau)
        if val < best_val:
            best_val, best_pt = val, pt
        centre = best_pt
        half = 4.0 * half / (grid - 1)
    return cand_val <= best_val + tol


def _grid_min(r, axes, z, tau, chunk=1 << 20):
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    best, arg = math.inf, None
    for start in range(0, mesh.shape[0], chunk):
        pts = mesh[start:start + chunk]
        vals = _batch_objective(r, pts, z, tau)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, arg = float(vals[i]), pts[i]
    return best, arg


def _batch_objective(r, pts, z, tau):
    quad = np.sum((pts - z) ** 2, axis=1) / (2 * tau)
    if isinstance(r, L1Penalty):
        return r.lambda1 * np.abs(pts).sum(axis=1) + quad
    if isinstance(r, GroupL2Penalty):
        total = np.zeros(pts.shape[0])
        for g in r.partition.groups:
            total += np.linalg.norm(pts[:, g], axis=1)
        return r.lambda_g * total + quad
    if isinstance(r, BoxIndicator):
        inside = np.all((pts >= r.lower) & (pts <= r.upper), axis=1)
        return np.where(inside, quad, math.inf)
    return np.array([r.evaluate(p) for p in pts]) + quad
