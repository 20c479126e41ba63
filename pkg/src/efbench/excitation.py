"""Windowed multi-sine boundary excitation and the sampled-signal carrier."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ResolutionError, TruncationError, ValidationError

DEFAULT_AMPLITUDES = (Fraction(1), Fraction(-21, 32), Fraction(63, 768), Fraction(-1, 512))
DEFAULT_BETA = (Fraction(1), Fraction(2), Fraction(4), Fraction(8))

#: Minimum samples per period of the central frequency accepted by :func:`sample`.
MIN_SAMPLES_PER_PERIOD = 8


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled real time series starting at ``t0``."""

    fs: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if not self.fs > 0 or not math.isfinite(self.fs):
            raise ValidationError("sample rate must be positive")
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1:
            raise ValidationError("samples must be one-dimensional")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.fs


@dataclass(frozen=True)
class ExcitationSpec:
    """``p0(t) = sum_m a_m sin(beta_m w_c t)`` on ``0 < t < 1/fc``, zero elsewhere.

    The defaults make the odd endpoint derivative sums vanish through
    order 5, so ``p0`` is six times continuously differentiable. Custom
    coefficients that break this are allowed but flagged (``is_smooth``).
    """

    fc: float
    amplitudes: tuple = DEFAULT_AMPLITUDES
    beta: tuple = DEFAULT_BETA
    is_smooth: bool = field(init=False)

    def __post_init__(self):
        if not self.fc > 0 or not math.isfinite(self.fc):
            raise ValidationError("central frequency fc must be positive")
        if len(self.amplitudes) != len(self.beta) or not self.amplitudes:
            raise ValidationError("amplitudes and beta must have the same nonzero length")
        amps = tuple(Fraction(a) for a in self.amplitudes)
        betas = tuple(Fraction(b) for b in self.beta)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "beta", betas)
        smooth = all(s == 0 for s in endpoint_derivative_sums(self, (1, 3, 5)).values())
        object.__setattr__(self, "is_smooth", smooth)
        if not smooth:
            warnings.warn("excitation coefficients are nonsmooth at the pulse edges",
                          stacklevel=2)

    @property
    def omega_c(self) -> float:
        return 2 * math.pi * self.fc

    @property
    def support(self) -> float:
        return 1.0 / self.fc


def endpoint_derivative_sums(spec: ExcitationSpec, orders=(1, 3, 5, 7)) -> dict:
    """Exact ``sum_m a_m beta_m^n`` for each order ``n``.

    The ``n``-th derivative of ``p0`` at ``t=0`` equals this sum times
    ``w_c^n`` (up to sign) for odd ``n``; even orders vanish identically.
    """
    return {n: sum(a * b**n for a, b in zip(spec.amplitudes, spec.beta)) for n in orders}


def p0(spec: ExcitationSpec, t):
    """Excitation value(s) in Pa at time(s) ``t`` in seconds."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < spec.support)
    wt = spec.omega_c * np.where(inside, t, 0.0)
    out = np.zeros(t.shape)
    for a, b in zip(spec.amplitudes, spec.beta):
        out = out + float(a) * np.sin(float(b) * wt)
    out = np.where(inside, out, 0.0)
    return out[()] if out.ndim == 0 else out


def sample(spec: ExcitationSpec, fs: float, duration: float) -> SampledSignal:
    """Sample ``p0`` at ``t_n = n/fs`` for ``n = 0 .. ceil(duration*fs) - 1``."""
    if not fs >= MIN_SAMPLES_PER_PERIOD * spec.fc * (1 - 1e-12):
        raise ResolutionError(
            f"sample rate {fs:g} Hz is below {MIN_SAMPLES_PER_PERIOD} * fc = "
            f"{MIN_SAMPLES_PER_PERIOD * spec.fc:g} Hz"
        )
    if not duration >= spec.support * (1 - 1e-12):
        raise TruncationError(
            f"duration {duration:g} s is shorter than the pulse length 1/fc = {spec.support:g} s"
        )
    # tolerate representation error in duration*fs (e.g. (1/700)*44800)
    n = math.ceil(duration * fs - 1e-9)
    return SampledSignal(fs=fs, samples=p0(spec, np.arange(n) / fs), t0=0.0)
