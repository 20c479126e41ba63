"""Discrete Fourier machinery with one pinned sign convention.

Transforms are numpy's: the forward DFT has kernel ``exp(-i w t)``, the
inverse carries ``1/n``. Bin ``m`` of an ``n``-point grid sampled at ``fs``
sits at the signed angular frequency ``w_m = 2 pi fs m / n`` with
``m in [-n/2, n/2)`` (numpy ordering; the Nyquist bin is ``m = -n/2``).

The material formulas are written with the opposite kernel ``exp(+i w t)``;
there a causal kernel ``A exp(-alpha t) H(t)`` transforms to
``A / (alpha - i w)``. Under this module's DFT the same kernel transforms
to ``A / (alpha + i w)``, so every material-side formula is evaluated at
``material_frequency(w) = -w`` before it meets a spectrum. Because the
material FRFs are conjugate-symmetric this is the same as conjugating them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, TransferSingularityError, TransferSymmetryError
from .excitation import SampledSignal

DEFAULT_PAD_FACTOR = 8


def material_frequency(omega):
    """Map a DFT-grid angular frequency to the material-formula convention."""
    return -np.asarray(omega, dtype=float) if np.ndim(omega) else -float(omega)


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


@dataclass(frozen=True)
class Spectrum:
    fs: float
    bins: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=complex)
        n = bins.size
        if n == 0 or n & (n - 1):
            raise ValueError(f"spectrum length must be a power of two, got {n}")
        object.__setattr__(self, "bins", bins)

    @property
    def n(self) -> int:
        return self.bins.size

    @property
    def omega(self) -> np.ndarray:
        """Signed angular frequency of every bin, in bin order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=1.0 / self.fs)

    def with_bins(self, bins) -> "Spectrum":
        return Spectrum(self.fs, bins, self.t0)


def forward(signal: SampledSignal, pad_factor: int = 1) -> Spectrum:
    """Zero-pad to ``next_pow2(len) * pad_factor`` samples and transform.

    A non power-of-two ``pad_factor`` is rounded up so the grid stays a
    power of two.
    """
    if len(signal) == 0:
        raise EmptyInputError("cannot transform an empty signal")
    if int(pad_factor) != pad_factor or pad_factor < 1:
        raise ValueError("pad_factor must be an integer >= 1")
    n = next_pow2(next_pow2(len(signal)) * int(pad_factor))
    return Spectrum(signal.fs, np.fft.fft(signal.samples, n), signal.t0)


def inverse(spec: Spectrum) -> np.ndarray:
    """Complex inverse transform (length ``spec.n``)."""
    return np.fft.ifft(spec.bins)


def inverse_real(spec: Spectrum) -> tuple[SampledSignal, float]:
    """Inverse transform, keep the real part.

    Returns the signal and the discarded imaginary residue
    ``max|Im| / max|Re|`` (0 for an all-zero output).
    """
    x = inverse(spec)
    peak = np.max(np.abs(x.real))
    imag = np.max(np.abs(x.imag))
    residue = float(imag / peak) if peak > 0 else (0.0 if imag == 0 else math.inf)
    return SampledSignal(spec.fs, x.real.copy(), spec.t0), residue


def hermitian_symmetrize(spec: Spectrum) -> Spectrum:
    """Project onto Hermitian spectra: ``(X[m] + conj(X[-m])) / 2``."""
    b = spec.bins
    mirrored = np.conj(np.roll(b[::-1], 1))
    return spec.with_bins(0.5 * (b + mirrored))


def apply_transfer(spec: Spectrum, transfer, *, one_sided: bool = False,
                   symmetry_tol: float = 1e-10) -> Spectrum:
    """Multiply each bin by ``transfer(w_m)``.

    ``transfer`` is vectorised over signed angular frequency. With
    ``one_sided=True`` it is only evaluated for ``w >= 0`` (the Nyquist bin
    at ``+pi fs``) and the negative bins are filled by conjugation.
    Otherwise it is evaluated everywhere and must be conjugate-symmetric to
    ``symmetry_tol`` relative to its peak. The Nyquist bin of the result is
    forced real either way.
    """
    n = spec.n
    half = n // 2
    pos_omega = 2 * np.pi * spec.fs * np.arange(half + 1) / n
    if one_sided:
        h_pos = np.asarray(transfer(pos_omega), dtype=complex)
        _check_finite(h_pos, pos_omega)
        h = np.empty(n, dtype=complex)
        h[: half + 1] = h_pos
        h[half + 1:] = np.conj(h_pos[1:half][::-1])
    else:
        omega = spec.omega
        h = np.asarray(transfer(omega), dtype=complex)
        _check_finite(h, omega)
        mirrored = np.conj(np.roll(h[::-1], 1))
        scale = np.max(np.abs(h)) or 1.0
        # the Nyquist bin is its own mirror, skip it
        mismatch = np.abs(h - mirrored)
        mismatch[half] = 0.0
        if np.max(mismatch) > symmetry_tol * scale:
            m = int(np.argmax(mismatch))
            raise TransferSymmetryError(
                f"transfer is not conjugate-symmetric near w = {omega[m]:g} rad/s"
            )
    out = spec.bins * h
    if n > 1:
        out[half] = out[half].real
    return spec.with_bins(out)


def _check_finite(h, omega):
    bad = ~np.isfinite(h)
    if bad.any():
        w = float(omega[np.argmax(bad)])
        raise TransferSingularityError(f"transfer is not finite at w = {w:g} rad/s", omega=w)
