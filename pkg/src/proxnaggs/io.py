"""IDX ingestion, trace CSV round-trips, instance directories and report files."""

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InputError, ParseError
from .problems import (ClassificationInstance, ElasticNetInstance,
                       GroupLassoInstance, ReferenceSolution,
                       split_indices)
from .prox import GroupPartition
from .trace import TRACE_HEADER, TraceRow

IDX_UBYTE = 0x08


@dataclass(frozen=True, eq=False)
class IdxTensor:
    dims: tuple
    payload: bytes

    def __post_init__(self):
        if len(self.payload) != math.prod(self.dims):
            raise InputError("payload length does not match dims")

    def to_array(self):
        return np.frombuffer(self.payload, dtype=np.uint8).reshape(self.dims)


def parse_idx(data):
    """Parse an in-memory IDX blob (big-endian, unsigned-byte payload only)."""
    if len(data) < 4:
        raise ParseError("truncated header", offset=len(data))
    if data[0] != 0 or data[1] != 0:
        raise ParseError("bad magic: first two bytes must be zero", offset=0)
    if data[2] != IDX_UBYTE:
        raise ParseError(f"unsupported element type 0x{data[2]:02x}", offset=2)
    rank = data[3]
    header_end = 4 + 4 * rank
    if len(data) < header_end:
        raise ParseError("truncated dimension table", offset=len(data))
    dims = struct.unpack(f">{rank}I", data[4:header_end])
    size = math.prod(dims)
    if len(data) < header_end + size:
        raise ParseError(f"truncated payload: expected {size} bytes",
                         offset=len(data))
    if len(data) > header_end + size:
        raise ParseError("trailing bytes after payload", offset=header_end + size)
    return IdxTensor(dims=tuple(dims), payload=bytes(data[header_end:]))


def load_idx(path):
    return parse_idx(Path(path).read_bytes())


def to_features(images, labels, n_classes=None, seed=0, split=(0.8, 0.1, 0.1)):
    """Flatten images to ``[0, 1]`` feature rows and attach labels."""
    if images.dims[0] != labels.dims[0]:
        raise InputError(
            f"{images.dims[0]} images but {labels.dims[0]} labels")
    if len(labels.dims) != 1:
        raise InputError("labels must be a rank-1 tensor")
    n = images.dims[0]
    X = images.to_array().reshape(n, -1).astype(np.float64) / 255.0
    y = labels.to_array().astype(np.intp)
    C = int(n_classes if n_classes is not None else y.max() + 1)
    train, val, test = split_indices(n, split, np.random.default_rng(seed))
    return ClassificationInstance(X=X, y=y, n_classes=C, train=train, val=val,
                                  test=test, seed=seed)


def _fmt(value):
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        raise InputError("NaN cannot be written to a trace file")
    return repr(value)


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in trace:
            w.writerow([str(row.k)] + [_fmt(v) for v in row.as_tuple()[1:]])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ParseError("trace header does not match the expected schema", line=1)
    out = []
    for lineno, fields in enumerate(rows[1:], start=2):
        if len(fields) != len(TRACE_HEADER):
            raise ParseError(f"expected {len(TRACE_HEADER)} fields, got {len(fields)}",
                             line=lineno)
        try:
            k = int(fields[0])
            vals = [None if f == "" else float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(f"malformed number ({exc})", line=lineno) from None
        out.append(TraceRow(k, *vals))
    return out


def write_rows_csv(path, header, rows):
    """Generic CSV writer for summary, sweep and epoch tables."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float)
                                              else v) for v in row])


def read_rows_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_keyvalue(path, mapping):
    with open(path, "w") as fh:
        for key, value in mapping.items():
            if isinstance(value, float):
                value = repr(value)
            fh.write(f"{key}={value}\n")


def read_keyvalue(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key=value", line=lineno)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _save_matrix(path, M):
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt="%.17g")


def _load_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_instance(directory, inst, reference=None):
    """Write ``A.csv``, ``b.csv``, ``x_true.csv``, ``meta.txt`` and, when
    given, ``reference.csv``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _save_matrix(d / "A.csv", inst.A)
    _save_matrix(d / "b.csv", inst.b[:, None])
    _save_matrix(d / "x_true.csv", inst.x_true[:, None])
    meta = {"kind": inst.kind, "variant": inst.variant, "seed": inst.seed,
            "n": inst.A.shape[0], "d": inst.A.shape[1],
            "cond_target": float(inst.cond_target), "lambda2": inst.lambda2}
    if isinstance(inst, ElasticNetInstance):
        meta["lambda1"] = inst.lambda1
    else:
        meta["lambda_g"] = inst.lambda_g
        meta["partition"] = " ".join(map(str, inst.partition.to_labels()))
        meta["planted_support"] = " ".join(map(str, inst.planted_support))
    if reference is not None:
        _save_matrix(d / "reference.csv", reference.x_star[:, None])
        meta.update(F_star=reference.F_star, residual=reference.residual,
                    reference_method=reference.method,
                    reference_iterations=reference.iterations)
    write_keyvalue(d / "meta.txt", meta)


def read_instance(directory):
    """Inverse of :func:`write_instance`: returns ``(instance, reference | None)``."""
    d = Path(directory)
    if not (d / "meta.txt").exists():
        raise InputError(f"{d} is not an instance directory (no meta.txt)")
    meta = read_keyvalue(d / "meta.txt")
    A = _load_matrix(d / "A.csv")
    b = _load_matrix(d / "b.csv")[:, 0]
    x_true = _load_matrix(d / "x_true.csv")[:, 0]
    common = dict(A=A, b=b, lambda2=float(meta["lambda2"]), seed=int(meta["seed"]),
                  variant=meta["variant"], cond_target=float(meta["cond_target"]),
                  x_true=x_true)
    if meta["kind"] == "elastic-net":
        inst = ElasticNetInstance(lambda1=float(meta["lambda1"]), **common)
    elif meta["kind"] == "group-lasso":
        labels = [int(t) for t in meta["partition"].split()]
        inst = GroupLassoInstance(
            lambda_g=float(meta["lambda_g"]),
            partition=GroupPartition.from_labels(labels),
            planted_support=tuple(int(t) for t in meta["planted_support"].split()),
            **common)
    else:
        raise ParseError(f"unknown instance kind {meta['kind']!r}")
    reference = None
    if (d / "reference.csv").exists():
        reference = ReferenceSolution(
            x_star=_load_matrix(d / "reference.csv")[:, 0],
            F_star=float(meta["F_star"]), residual=float(meta["residual"]),
            method=meta.get("reference_method", "unknown"),
            iterations=int(meta.get("reference_iterations", 0)))
    return inst, reference


def write_report(path, report, extra=None):
    """Flat key=value certificate report."""
    kv = {"status": report.status, "passed": report.passed,
          "in_regime": report.in_regime, "n_rows": report.n_rows,
          "max_slack": float(report.max_slack),
          "contraction_violations": len(report.contraction_violations),
          "envelope_violations": len(report.envelope_violations),
          "mismatch_violations": len(report.mismatch_violations),
          "convex_descent_violations": len(report.convex_descent_violations)}
    if report.params is not None:
        for name in ("a", "mu_hat", "L", "mu_f", "mu_F", "b", "beta", "c",
                     "theta", "c_lower", "c_upper"):
            kv[f"param_{name}"] = float(getattr(report.params, name))
    for name, ok in report.rate_check.items():
        kv[f"rate_{name}"] = ok
    for name, val in report.extras.items():
        kv[name] = float(val) if isinstance(val, (float, np.floating)) else val
    if extra:
        kv.update(extra)
    write_keyvalue(path, kv)


def write_violations_csv(path, report):
    write_rows_csv(path, ("k", "kind", "slack"),
                   [(k, kind, float(s)) for k, kind, s in report.violations()])


def ensure_fresh_dir(path, force):
    p = Path(path)
    if p.exists() and any(p.iterdir()) and not force:
        raise FileExistsError(f"{p} exists; pass --force to overwrite")
    p.mkdir(parents=True, exist_ok=True)
    return p


