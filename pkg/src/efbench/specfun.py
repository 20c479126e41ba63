"""Complex-argument Bessel and Hankel functions of orders 0 and 1.

Three evaluation routes are used:

* ascending power series for J and Y, ``|z| <= SWITCH_RADIUS``;
* the Hankel large-argument expansion, truncated at its smallest term,
  for ``|z| > SWITCH_RADIUS``;
* the Laplace integral behind that expansion,

      H_nu^(2)(z) e^{iz} = (2/pi) i^(nu+1) sqrt(pi/(2x)) / Gamma(nu+1/2)
                           * int_0^inf e^{-u} u^(nu-1/2) (1 + u/(2x))^(nu-1/2) du,

  with ``x = iz``, integrated by the trapezoidal rule after ``u = s^2``.

The quadrature is what keeps H^(2) accurate in the lower half-plane for
moderate ``|z|``: there H^(2) is exponentially smaller than J and Y, so
forming ``J - iY`` from the series cancels almost every digit.

The operational domain is the closed lower half-plane. Upper half-plane
values come from ``H^(1)(conj z) = conj(H^(2)(z))``; the left half-plane is
best effort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError, SingularityError

EULER_GAMMA = 0.57721566490153286061

#: Series below this radius, asymptotic expansion above it.
SWITCH_RADIUS = 12.0
#: The Laplace quadrature takes over from the series for H^(2) above this radius.
QUADRATURE_MIN_RADIUS = 1.0
#: |Im z| beyond which unscaled J, Y (and H^(1) in the lower half-plane) overflow.
OVERFLOW_GUARD = 700.0

_SERIES_TERMS = 64
_ASYMPTOTIC_TERMS = 48

_QUAD_STEP = 0.125
_QUAD_NODES = np.arange(0.0, 6.5 + _QUAD_STEP / 2, _QUAD_STEP)
_QUAD_WEIGHTS = np.full(_QUAD_NODES.shape, 2.0 * _QUAD_STEP)
_QUAD_WEIGHTS[0] = _QUAD_STEP


@dataclass(frozen=True)
class HankelValue:
    """``value = H0^(2)(z)`` and ``scaled = H0^(2)(z) * exp(iz)``."""

    value: complex
    scaled: complex


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _out(a):
    return a[()] if a.ndim == 0 else a


def _check_nonzero(z):
    if np.any(z == 0):
        raise SingularityError("Y0 and the Hankel functions are singular at z = 0")


# ---------------------------------------------------------------------------
# route 1: ascending series


def _series_jy(z):
    """J0, J1, Y0, Y1 from their ascending series (harmonic-number form)."""
    q = -0.25 * z * z
    term0 = np.ones_like(z)  # q^k / (k!)^2
    term1 = np.ones_like(z)  # q^k / (k! (k+1)!)
    j0 = term0.copy()
    s1 = term1.copy()
    y0_sum = np.zeros_like(z)  # sum_{k>=1} H_k q^k/(k!)^2
    y1_sum = (1.0 + 0.0 - 2 * EULER_GAMMA) * term1  # k=0: H_0 + H_1 - 2 gamma
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        harmonic_next = harmonic + 1.0 / k
        j0 = j0 + term0
        s1 = s1 + term1
        y0_sum = y0_sum + harmonic_next * term0
        y1_sum = y1_sum + (harmonic_next + harmonic_next + 1.0 / (k + 1) - 2 * EULER_GAMMA) * term1
        harmonic = harmonic_next
    j1 = 0.5 * z * s1
    # Y is singular at z = 0; callers that need it reject z = 0 beforehand
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.log(0.5 * z)
        y0 = (2 / np.pi) * ((log_term + EULER_GAMMA) * j0 - y0_sum)
        y1 = -2 / (np.pi * z) + (2 / np.pi) * log_term * j1 - (0.5 / np.pi) * z * y1_sum
    return j0, j1, y0, y1


def _series_hankel_scaled(kind, nu, z):
    j0, j1, y0, y1 = _series_jy(z)
    j, y = (j0, y0) if nu == 0 else (j1, y1)
    if kind == 1:
        return (j + 1j * y) * np.exp(-1j * z)
    return (j - 1j * y) * np.exp(1j * z)


# ---------------------------------------------------------------------------
# route 2: large-argument expansion


def _asymptotic_hankel_scaled(kind, nu, z):
    """``H_nu^(kind)(z) exp(-/+ iz)`` from the Hankel expansion.

    Summation stops at the smallest term, per element.
    """
    mu = 4.0 * nu * nu
    rot = -1j if kind == 2 else 1j
    inv = 1.0 / z
    term = np.ones_like(z)
    total = term.copy()
    active = np.ones(z.shape, dtype=bool)
    last = np.abs(term)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k) * rot * inv
        size = np.abs(term)
        active &= size < last
        total = np.where(active, total + term, total)
        active &= size > 1e-18 * np.abs(total)
        last = size
        if not active.any():
            break
    phase = nu * np.pi / 2 + np.pi / 4
    pre = np.sqrt(2.0 / (np.pi * z))
    if kind == 2:
        return pre * np.exp(1j * phase) * total
    return pre * np.exp(-1j * phase) * total


# ---------------------------------------------------------------------------
# route 3: Laplace integral (H^(2) only)


def _quadrature_hankel2_scaled(nu, z):
    x = 1j * z
    s2 = _QUAD_NODES**2
    ratio = s2[None, :] / (2.0 * x.reshape(-1, 1))
    gauss = np.exp(-s2) * _QUAD_WEIGHTS
    if nu == 0:
        integral = (gauss * (1.0 + ratio) ** -0.5).sum(axis=1)
        pref = (2j / np.pi) * np.sqrt(np.pi / (2.0 * x.ravel())) / np.sqrt(np.pi)
        return (pref * integral).reshape(z.shape)
    integral = (gauss * s2 * (1.0 + ratio) ** 0.5).sum(axis=1)
    pref = (-2.0 / np.pi) * np.sqrt(np.pi / (2.0 * x.ravel())) / (0.5 * np.sqrt(np.pi))
    return (pref * integral).reshape(z.shape)


# ---------------------------------------------------------------------------
# dispatch


def _hankel2_scaled_lower(nu, z, method):
    """Scaled H^(2) for ``Im z <= 0`` (any real part)."""
    r = np.abs(z)
    if method == "series":
        return _series_hankel_scaled(2, nu, z)
    if method == "asymptotic":
        return _asymptotic_hankel_scaled(2, nu, z)
    if method == "quadrature":
        return _quadrature_hankel2_scaled(nu, z)
    out = np.empty_like(z)
    big = r > SWITCH_RADIUS
    quad = ~big & (r >= QUADRATURE_MIN_RADIUS) & (z.real >= 0)
    small = ~big & ~quad
    if big.any():
        out[big] = _asymptotic_hankel_scaled(2, nu, z[big])
    if quad.any():
        out[quad] = _quadrature_hankel2_scaled(nu, z[quad])
    if small.any():
        out[small] = _series_hankel_scaled(2, nu, z[small])
    return out


def _hankel1_scaled_lower(nu, z, method):
    """Scaled H^(1) for ``Im z <= 0``; H^(1) is the dominant solution there."""
    if method == "series":
        return _series_hankel_scaled(1, nu, z)
    if method == "asymptotic":
        return _asymptotic_hankel_scaled(1, nu, z)
    out = np.empty_like(z)
    big = np.abs(z) > SWITCH_RADIUS
    if big.any():
        out[big] = _asymptotic_hankel_scaled(1, nu, z[big])
    if (~big).any():
        out[~big] = _series_hankel_scaled(1, nu, z[~big])
    return out


_METHODS = ("auto", "series", "asymptotic", "quadrature")


def hankel_scaled(kind: int, nu: int, z, method: str = "auto"):
    """Scaled Hankel function ``H_nu^(kind)(z) * exp(-/+ iz)``.

    ``kind`` is 1 or 2, ``nu`` is 0 or 1. The scale factor is ``exp(+iz)``
    for kind 2 and ``exp(-iz)`` for kind 1, which removes the exponential
    behaviour at large ``|z|``. ``method`` forces one evaluation route
    (used to cross-check them); ``"quadrature"`` applies to kind 2 with
    ``Re z > 0`` only.
    """
    if kind not in (1, 2) or nu not in (0, 1):
        raise ValueError("only kinds 1, 2 and orders 0, 1 are implemented")
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}")
    z = _as_complex(z)
    _check_nonzero(z)
    out = np.empty_like(z)
    lower = z.imag <= 0
    if kind == 2:
        if lower.any():
            out[lower] = _hankel2_scaled_lower(nu, z[lower], method)
        if (~lower).any():
            w = np.conj(z[~lower])
            out[~lower] = np.conj(_hankel1_scaled_lower(nu, w, method))
    else:
        if lower.any():
            out[lower] = _hankel1_scaled_lower(nu, z[lower], method)
        if (~lower).any():
            w = np.conj(z[~lower])
            out[~lower] = np.conj(_hankel2_scaled_lower(nu, w, method))
    return _out(out)


def _unscale(kind, z, scaled):
    phase = np.exp(-1j * z) if kind == 2 else np.exp(1j * z)
    return scaled * phase


def hankel1(nu: int, z, method: str = "auto"):
    z = _as_complex(z)
    if np.any(z.imag < -OVERFLOW_GUARD):
        raise RangeError(f"|Im z| exceeds the overflow guard {OVERFLOW_GUARD}")
    return _out(_unscale(1, z, np.asarray(hankel_scaled(1, nu, z, method))))


def hankel2(nu: int, z, method: str = "auto"):
    z = _as_complex(z)
    if np.any(z.imag > OVERFLOW_GUARD):
        raise RangeError(f"Im z exceeds the overflow guard {OVERFLOW_GUARD}")
    return _out(_unscale(2, z, np.asarray(hankel_scaled(2, nu, z, method))))


def _bessel(nu, which, z, method="auto"):
    z = _as_complex(z)
    if np.any(np.abs(z.imag) > OVERFLOW_GUARD):
        raise RangeError(f"|Im z| exceeds the overflow guard {OVERFLOW_GUARD}")
    out = np.empty_like(z)
    if method == "auto":
        small = np.abs(z) <= SWITCH_RADIUS
    else:
        small = np.full(z.shape, method == "series")
    if small.any():
        jy = _series_jy(z[small])
        out[small] = jy[nu] if which == "j" else jy[2 + nu]
    if (~small).any():
        zz = z[~small]
        h1 = _unscale(1, zz, _asymptotic_hankel_scaled(1, nu, zz))
        h2 = _unscale(2, zz, _asymptotic_hankel_scaled(2, nu, zz))
        out[~small] = 0.5 * (h1 + h2) if which == "j" else (h1 - h2) / 2j
    return _out(out)


def j0(z, method: str = "auto"):
    """Bessel function of the first kind, order zero."""
    return _bessel(0, "j", z, method)


def j1(z, method: str = "auto"):
    return _bessel(1, "j", z, method)


def y0(z, method: str = "auto"):
    """Bessel function of the second kind, order zero (principal branch)."""
    _check_nonzero(_as_complex(z))
    return _bessel(0, "y", z, method)


def y1(z, method: str = "auto"):
    _check_nonzero(_as_complex(z))
    return _bessel(1, "y", z, method)


def hankel0_2(z) -> HankelValue:
    """``H0^(2)(z) = J0(z) - i Y0(z)`` together with its scaled form."""
    z = _as_complex(z)
    scaled = np.asarray(hankel_scaled(2, 0, z))
    if np.any(z.imag > OVERFLOW_GUARD):
        raise RangeError(f"Im z exceeds the overflow guard {OVERFLOW_GUARD}")
    with np.errstate(under="ignore"):
        value = _unscale(2, z, scaled)
    return HankelValue(value=_out(value), scaled=_out(scaled))


def hankel_ratio(z_num, z_den):
    """``H0^(2)(z_num) / H0^(2)(z_den)`` without forming either value.

    Computed as ``exp(-i (z_num - z_den)) * scaled(z_num) / scaled(z_den)``,
    so strongly attenuated arguments do not underflow.
    """
    zn = _as_complex(z_num)
    zd = _as_complex(z_den)
    _check_nonzero(zn)
    _check_nonzero(zd)
    sn = np.asarray(hankel_scaled(2, 0, zn))
    sd = np.asarray(hankel_scaled(2, 0, zd))
    with np.errstate(under="ignore"):
        out = np.exp(-1j * (zn - zd)) * (sn / sd)
    out = np.where(zn == zd, 1.0 + 0.0j, out)
    return _out(out)


def wronskian_jy(z):
    """``J0 Y0' - J0' Y0`` evaluated through the Hankel pair.

    Algebraically ``(H1' H2 - H1 H2') / (2i)`` with ``H' = -H_1``. The
    products stay of order ``1/|z|`` even where J0 and Y0 are exponentially
    large, so the identity ``W = 2/(pi z)`` can be checked to full precision.
    """
    z = _as_complex(z)
    s10 = np.asarray(hankel_scaled(1, 0, z))
    s11 = np.asarray(hankel_scaled(1, 1, z))
    s20 = np.asarray(hankel_scaled(2, 0, z))
    s21 = np.asarray(hankel_scaled(2, 1, z))
    # exp(iz) exp(-iz) cancels between the kind-1 and kind-2 factors.
    w = (-s11 * s20 + s10 * s21) / 2j
    return _out(w)
