"""Complex wavenumber, phase/group velocity and attenuation of a material.

Everything here is expressed on the DFT convention of
:mod:`efbench.spectral` (time dependence ``exp(+i w t)`` in the inverse
transform). On that convention the plane wave ``exp(-i k x)`` travels
towards ``+x`` and decays when ``Im k <= 0``, and the dispersion relation
reads ``k^2 = w^2 C(-w) / v(-w)`` with ``C``, ``v`` the material FRFs as
written in :mod:`efbench.material`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDispersionError, EvanescentError, SingularMaterialError
from .material import EquivalentFluid, evaluate_frf, evaluate_frf_derivative
from .spectral import material_frequency


@dataclass(frozen=True)
class DispersionSample:
    omega: float
    k: complex
    phase_velocity: float
    group_velocity: float
    attenuation: float


def _out(a):
    return a[()] if a.ndim == 0 else a


def slowness_squared(mat: EquivalentFluid, omega):
    """``k^2 / w^2 = C / v`` evaluated on the DFT convention."""
    w_mat = material_frequency(omega)
    c = np.asarray(evaluate_frf(mat.compressibility, w_mat))
    v = np.asarray(evaluate_frf(mat.specific_volume, w_mat))
    bad = (c == 0) | (v == 0)
    if bad.any():
        w = np.asarray(omega, dtype=float)[bad].ravel()[0] if np.ndim(omega) else omega
        raise SingularMaterialError(
            f"material {mat.name!r} has a vanishing compressibility or specific volume "
            f"at w = {float(w):g} rad/s"
        )
    return c / v


def _decay_branch(root, omega):
    """Pick the sign of ``root`` with ``Im k <= 0``; lossless ties go outgoing."""
    flip = (root.imag > 0) | ((root.imag == 0) & (root.real * np.sign(omega) < 0))
    return np.where(flip, -root, root)


def wavenumber(mat: EquivalentFluid, omega):
    """Complex wavenumber (rad/m) on the decaying, outgoing branch; ``k(0) = 0``."""
    w = np.asarray(omega, dtype=float)
    g = slowness_squared(mat, w)
    k = _decay_branch(np.sqrt(w * w * g), w)
    k = np.where(w == 0, 0.0 + 0.0j, k)
    return _out(k)


def dk_domega(mat: EquivalentFluid, omega):
    """Closed-form ``dk/dw`` from ``d(w^2 g)/dw = 2 k dk/dw``."""
    w = np.asarray(omega, dtype=float)
    w_mat = material_frequency(w)
    c = np.asarray(evaluate_frf(mat.compressibility, w_mat))
    v = np.asarray(evaluate_frf(mat.specific_volume, w_mat))
    g = slowness_squared(mat, w)
    # chain rule through w -> -w flips the sign of the derivatives
    dc = -np.asarray(evaluate_frf_derivative(mat.compressibility, w_mat))
    dv = -np.asarray(evaluate_frf_derivative(mat.specific_volume, w_mat))
    dg = (dc * v - c * dv) / (v * v)
    k = np.asarray(wavenumber(mat, w))
    dk2 = 2 * w * g + w * w * dg
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = dk2 / (2 * k)
    # at w = 0, k ~ w sqrt(g(0)), so dk/dw -> sqrt(g(0)) on the outgoing branch
    dc_limit = _decay_branch(np.sqrt(g), np.ones_like(w))
    return _out(np.where(w == 0, dc_limit, slope))


def group_velocity(mat: EquivalentFluid, omega):
    """``1 / Re(dk/dw)`` in m/s."""
    slope = np.asarray(dk_domega(mat, omega)).real
    if np.any(slope == 0):
        raise DegenerateDispersionError("Re(dk/dw) vanishes; group velocity undefined")
    return _out(1.0 / slope)


def phase_velocity(mat: EquivalentFluid, omega):
    """``w / Re k(w)`` in m/s; at ``w = 0`` the limit ``1 / Re sqrt(C(0)/v(0))``."""
    w = np.asarray(omega, dtype=float)
    k = np.asarray(wavenumber(mat, w))
    g0 = _decay_branch(np.sqrt(np.asarray(slowness_squared(mat, np.zeros_like(w)))),
                       np.ones_like(w))
    denom = np.where(w == 0, g0.real, k.real)
    numer = np.where(w == 0, 1.0, w)
    if np.any(denom == 0):
        raise EvanescentError("Re k vanishes; the wave is evanescent")
    return _out(numer / denom)


def attenuation(mat: EquivalentFluid, omega):
    """Amplitude decay rate ``-Im k`` in Np/m."""
    return _out(-np.asarray(wavenumber(mat, omega)).imag)


def dispersion_table(mat: EquivalentFluid, omegas) -> list[DispersionSample]:
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    k = np.atleast_1d(wavenumber(mat, w))
    vp = np.atleast_1d(phase_velocity(mat, w))
    vg = np.atleast_1d(group_velocity(mat, w))
    return [
        DispersionSample(float(wi), complex(ki), float(p), float(g), float(-ki.imag))
        for wi, ki, p, g in zip(w, k, vp, vg)
    ]
