"""Semi-analytic time-domain solutions for 1D, 2D and 3D radiation problems.

Each geometry is reduced to a transfer function between the Dirichlet
boundary value and a receiver, evaluated on the DFT grid:

* 1D half-line ``x >= 0``:     ``exp(-i k x)``
* 2D exterior of a disc:       ``H0^(2)(k r) / H0^(2)(k r0)``
* 3D exterior of a sphere:     ``(r0/r) exp(-i k (r - r0))``

The receiver signal is the real part of the inverse transform of
``transfer * FFT(excitation)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dispersion import wavenumber
from .errors import GeometryError, ValidationError
from .excitation import SampledSignal
from .material import EquivalentFluid
from .spectral import DEFAULT_PAD_FACTOR, apply_transfer, forward, inverse_real
from .specfun import hankel_ratio

log = logging.getLogger(__name__)

#: Share of the padded window, at its end, used for the wrap-around estimate.
WRAP_TAIL_FRACTION = 0.05
#: Tail-energy ratio above which a larger pad factor is suggested.
WRAP_WARN_THRESHOLD = 1e-6


@dataclass(frozen=True)
class Geometry:
    """Boundary location ``r0`` and receiver coordinates.

    In 1D the boundary sits at ``x = 0`` and receivers are distances from
    it; in 2D/3D ``r0`` is the hole radius and receivers are radii.
    """

    dim: int
    receivers: tuple
    r0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(float(r) for r in self.receivers))
        object.__setattr__(self, "r0", float(self.r0))
        if self.dim not in (1, 2, 3):
            raise GeometryError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.receivers:
            raise GeometryError("at least one receiver is required")
        if self.dim == 1:
            if self.r0 != 0.0:
                raise GeometryError("the 1D boundary is fixed at x = 0")
            if min(self.receivers) < 0:
                raise GeometryError("1D receivers must satisfy x >= 0")
        else:
            if not self.r0 > 0:
                raise GeometryError("hole radius r0 must be positive")
            if min(self.receivers) < self.r0:
                raise GeometryError(
                    f"receiver inside hole (r = {min(self.receivers):g} < r0 = {self.r0:g})"
                )


@dataclass
class FieldResult:
    """Receiver time series sharing one time grid, plus run metadata."""

    geometry: Geometry
    material: str
    signals: list
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.signals) != len(self.geometry.receivers):
            raise ValidationError("one signal per receiver is required")
        first = self.signals[0]
        for s in self.signals[1:]:
            if s.fs != first.fs or len(s) != len(first) or s.t0 != first.t0:
                raise ValidationError("receiver signals must share fs, t0 and length")

    @property
    def fs(self) -> float:
        return self.signals[0].fs

    @property
    def times(self) -> np.ndarray:
        return self.signals[0].times

    @property
    def receivers(self) -> tuple:
        return self.geometry.receivers

    def matrix(self) -> np.ndarray:
        """Samples as an array of shape ``(n_samples, n_receivers)``."""
        return np.column_stack([s.samples for s in self.signals])


def transfer_1d(mat: EquivalentFluid, d: float, omega):
    if d < 0:
        raise GeometryError("distance must be nonnegative")
    k = np.asarray(wavenumber(mat, omega))
    out = np.exp(-1j * k * d)
    return out[()] if out.ndim == 0 else out


def transfer_2d(mat: EquivalentFluid, r: float, r0: float, omega):
    """Hankel ratio, evaluated at ``|w|`` and conjugated for ``w < 0``.

    At ``w = 0`` the ratio tends to 1 (both Hankel functions behave like
    ``-(2i/pi) ln(k r)`` as ``k -> 0``), and that limit is returned.
    """
    if not (r >= r0 > 0):
        raise GeometryError("2D transfer needs r >= r0 > 0")
    w = np.asarray(omega, dtype=float)
    out = np.ones(w.shape, dtype=complex)
    nz = w != 0
    if nz.any() and r != r0:
        k = np.asarray(wavenumber(mat, np.abs(w[nz])))
        ratio = np.asarray(hankel_ratio(k * r, k * r0))
        out[nz] = np.where(w[nz] < 0, np.conj(ratio), ratio)
    return out[()] if out.ndim == 0 else out


def transfer_3d(mat: EquivalentFluid, r: float, r0: float, omega):
    if not (r >= r0 > 0):
        raise GeometryError("3D transfer needs r >= r0 > 0")
    out = (r0 / r) * np.asarray(transfer_1d(mat, r - r0, omega))
    return out[()] if out.ndim == 0 else out


def _transfer_for(mat, geom, receiver):
    if geom.dim == 1:
        return lambda w: transfer_1d(mat, receiver, w)
    if geom.dim == 2:
        return lambda w: transfer_2d(mat, receiver, geom.r0, w)
    return lambda w: transfer_3d(mat, receiver, geom.r0, w)


def wraparound_estimate(samples: np.ndarray) -> float:
    """Energy in the last 5% of the window over the total energy."""
    total = float(np.sum(samples * samples))
    if total == 0:
        return 0.0
    tail = samples[int(np.floor((1 - WRAP_TAIL_FRACTION) * samples.size)):]
    return float(np.sum(tail * tail)) / total


def solve(mat: EquivalentFluid, geom: Geometry, excitation: SampledSignal,
          pad_factor: int = DEFAULT_PAD_FACTOR) -> FieldResult:
    """Receiver signals for ``excitation`` applied at the boundary.

    Output signals have the excitation's length and start time; the padded
    window is only used internally and for the diagnostics.
    """
    if len(excitation) == 0:
        raise ValidationError("excitation is empty")
    spectrum = forward(excitation, pad_factor)
    signals, residues, wraps = [], [], []
    for receiver in geom.receivers:
        out_spec = apply_transfer(spectrum, _transfer_for(mat, geom, receiver), one_sided=True)
        full, residue = inverse_real(out_spec)
        residues.append(residue)
        wraps.append(wraparound_estimate(full.samples))
        signals.append(SampledSignal(excitation.fs, full.samples[: len(excitation)],
                                     excitation.t0))
    warnings_ = []
    if max(wraps) > WRAP_WARN_THRESHOLD:
        msg = (f"wrap-around tail energy {max(wraps):.3g} exceeds {WRAP_WARN_THRESHOLD:g}; "
               "increase the pad factor or the window")
        log.warning(msg)
        warnings_.append(msg)
    diagnostics = {
        "imag_residue": max(residues),
        "imag_residue_per_receiver": residues,
        "wraparound": wraps,
        "n_fft": spectrum.n,
        "fs": excitation.fs,
        "pad_factor": pad_factor,
        "n_samples": len(excitation),
        "warnings": warnings_,
    }
    return FieldResult(geom, mat.name, signals, diagnostics)
