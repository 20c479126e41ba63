"""Error metrics between two receiver data sets.

The first argument is the reference: relative errors are normalised by its
norm. When the time grids differ, the second data set is resampled onto
the part of the reference grid that both cover, using a clamped cubic
spline (zero end slopes, matching pulses that start and end at rest).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .analytic import FieldResult
from .errors import DomainError, ReceiverMappingError
from .fieldio import Table, fmt, read_table

#: Receivers of the two data sets are paired when closer than this (m).
RECEIVER_MATCH_TOL = 1e-9
#: Time grids closer than this fraction of a step count as identical.
GRID_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class ReceiverError:
    receiver: float
    rel_l2: float
    rel_linf: float
    abs_linf: float
    peak_offset: int


@dataclass(frozen=True)
class ErrorReport:
    per_receiver: tuple
    aligned: bool
    n_samples: int
    labels: tuple = ("a", "b")
    notes: list = field(default_factory=list)

    @property
    def max_rel_l2(self) -> float:
        return max(e.rel_l2 for e in self.per_receiver)

    def passes(self, tol: float) -> bool:
        """True when every receiver's relative L2 error is within ``tol``."""
        return all(e.rel_l2 <= tol for e in self.per_receiver)

    def to_text(self) -> str:
        ref, other = self.labels
        lines = [
            f"reference: {ref}",
            f"compared:  {other}",
            "errors are normalised by the reference norm",
            f"resampled: {'yes' if self.aligned else 'no'} ({self.n_samples} common samples)",
            f"{'receiver_m':>14} {'rel_L2':>12} {'rel_Linf':>12} {'peak_offset':>12}",
        ]
        for e in self.per_receiver:
            lines.append(f"{e.receiver:14.6g} {e.rel_l2:12.4e} {e.rel_linf:12.4e} "
                         f"{e.peak_offset:12d}")
        lines += self.notes
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("receiver,rel_l2,rel_linf,abs_linf,peak_offset\n")
        for e in self.per_receiver:
            buf.write(f"{fmt(e.receiver)},{fmt(e.rel_l2)},{fmt(e.rel_linf)},"
                      f"{fmt(e.abs_linf)},{e.peak_offset}\n")
        return buf.getvalue()


def as_table(x) -> Table:
    if isinstance(x, Table):
        return x
    if isinstance(x, FieldResult):
        return Table.from_result(x)
    if isinstance(x, (str, Path)):
        return read_table(x)
    raise TypeError(f"cannot compare object of type {type(x).__name__}")


def match_receivers(ra, rb) -> list[int]:
    """Index into ``rb`` for every receiver of ``ra`` (a one-to-one pairing)."""
    if len(ra) != len(rb):
        raise ReceiverMappingError(
            f"receiver sets differ in size ({len(ra)} vs {len(rb)})")
    rb = np.asarray(rb, dtype=float)
    out = []
    for r in ra:
        hits = np.flatnonzero(np.abs(rb - r) <= RECEIVER_MATCH_TOL)
        if hits.size != 1:
            raise ReceiverMappingError(f"receiver {r:g} m has no unique partner")
        out.append(int(hits[0]))
    if len(set(out)) != len(out):
        raise ReceiverMappingError("receiver pairing is not one-to-one")
    return out


def same_grid(ta, tb) -> bool:
    if ta.size != tb.size:
        return False
    if ta.size < 2:
        return bool(np.all(ta == tb))
    step = (ta[-1] - ta[0]) / (ta.size - 1)
    return bool(np.max(np.abs(ta - tb)) <= GRID_MATCH_TOL * step)


def resample(times, values, target) -> np.ndarray:
    """Clamped cubic spline of ``values`` evaluated on ``target``."""
    times = np.asarray(times, dtype=float)
    target = np.asarray(target, dtype=float)
    if same_grid(times, target):
        return np.array(values, dtype=float)
    if times.size < 2:
        raise DomainError("need at least two samples to resample")
    return CubicSpline(times, values, axis=0, bc_type="clamped")(target)


def _metrics(r, a, b) -> ReceiverError:
    diff = a - b
    na2 = float(np.linalg.norm(a))
    nai = float(np.max(np.abs(a)))
    d2 = float(np.linalg.norm(diff))
    di = float(np.max(np.abs(diff)))
    rel_l2 = d2 / na2 if na2 > 0 else (0.0 if d2 == 0 else np.inf)
    rel_linf = di / nai if nai > 0 else (0.0 if di == 0 else np.inf)
    offset = int(np.argmax(np.abs(b))) - int(np.argmax(np.abs(a)))
    return ReceiverError(r, rel_l2, rel_linf, di, offset)


def compare(a, b, labels=None) -> ErrorReport:
    """Per-receiver errors of ``b`` against the reference ``a``."""
    ta, tb = as_table(a), as_table(b)
    if labels is None:
        labels = (str(a) if isinstance(a, (str, Path)) else "a",
                  str(b) if isinstance(b, (str, Path)) else "b")
    order = match_receivers(ta.receivers, tb.receivers)
    if same_grid(ta.times, tb.times):
        a_data, b_data, aligned = ta.data, tb.data[:, order], False
    else:
        lo = max(ta.times[0], tb.times[0])
        hi = min(ta.times[-1], tb.times[-1])
        keep = (ta.times >= lo) & (ta.times <= hi)
        if hi < lo or not keep.any():
            raise DomainError(
                f"time ranges do not overlap ([{ta.times[0]:g}, {ta.times[-1]:g}] s vs "
                f"[{tb.times[0]:g}, {tb.times[-1]:g}] s)")
        a_data = ta.data[keep]
        b_data = resample(tb.times, tb.data[:, order], ta.times[keep])
        aligned = True
    errors = tuple(_metrics(r, a_data[:, j], b_data[:, j]) for j, r in enumerate(ta.receivers))
    return ErrorReport(errors, aligned, a_data.shape[0], tuple(labels))
