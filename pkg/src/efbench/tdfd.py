"""1D time-domain solver of the convolution wave equation.

The second-order convolution equation is split into a first-order system

    d/dt (C * p) = -du/dx,        du/dt = -(v * dp/dx),

with ``C(t) = C_inf delta(t) + sum Re[rho_j exp(-s_j t)] H(t)`` and ``v(t)``
of the same form. Each exponential kernel contributes a memory variable
``zeta = exp(-s t) * f`` obeying ``d zeta/dt = -s zeta + f``, integrated
exactly over a step with the forcing interpolated linearly in time.

Grid: pressure ``p`` on nodes ``x_i = i dx`` (``i = 0..nx``) at integer
time levels, ``u`` on faces ``x_{i+1/2}`` at half levels (staggered
leapfrog). Space derivatives use the fourth-order staggered stencil
``(27 (f_{i+1} - f_i) - (f_{i+2} - f_{i-1})) / 24`` (second order at the
face and node next to each end); ``order=2`` selects the compact stencil
everywhere. Memory variables follow their forcing: integer levels for the
compressibility, face values for the specific volume. Node 0 carries the
Dirichlet excitation, node ``nx`` is held at zero and never reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .analytic import FieldResult, Geometry
from .dispersion import phase_velocity
from .errors import CFLError, DomainTooShortError, InstabilityError, ValidationError
from .excitation import SampledSignal
from .material import EquivalentFluid, RationalFRF

#: Largest accepted Courant number per spatial order. The fourth-order
#: staggered stencil is stable up to 6/7; 0.85 keeps a margin for the
#: second-order closures at the ends.
CFL_MAX = {2: 0.9, 4: 0.85}
#: Cells kept beyond the farthest reach ``c_inf * t_end`` of the wave.
MARGIN_CELLS = 40
#: Cells at the far end monitored for truncation safety.
FAR_END_CELLS = 10


@dataclass(frozen=True)
class ExpKernel:
    """Causal kernel ``Re[weight * exp(-rate t)]`` for ``t >= 0``.

    Real poles have real ``weight = A`` and ``rate = alpha``; a complex pair
    has ``weight = B + iC`` and ``rate = beta + i gamma``, which expands to
    ``exp(-beta t) (B cos(gamma t) + C sin(gamma t))``.
    """

    weight: complex
    rate: complex
    oscillatory: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, (self.weight * np.exp(-self.rate * t)).real, 0.0)

    def transform(self, omega):
        """Continuous transform with kernel ``exp(+i w t)`` (material convention)."""
        w = np.asarray(omega, dtype=float)
        if not self.oscillatory:
            return self.weight.real / (self.rate.real - 1j * w)
        return 0.5 * (self.weight / (self.rate - 1j * w)
                      + np.conj(self.weight) / (np.conj(self.rate) - 1j * w))


def derive_kernels(model: RationalFRF) -> tuple[float, list[ExpKernel]]:
    """Instantaneous term and exponential kernels of a rational FRF."""
    kernels = [ExpKernel(complex(a), complex(alpha)) for a, alpha in model.real_poles]
    kernels += [
        ExpKernel(complex(b, c), complex(beta, gamma), oscillatory=True)
        for b, c, beta, gamma in model.complex_pairs
    ]
    return model.constant, kernels


class _MemoryBank:
    """Exponential recursion for a set of kernels over ``n`` grid points.

    Over one step the forcing is taken linear between its values at the two
    ends, which integrates ``d zeta/dt = -s zeta + f`` as

        zeta_new = E zeta + c0 f_old + c1 f_new,   E = exp(-s dt).

    This is exact for constant and linear forcing and stays accurate for
    stiff poles (``s dt >> 1``), where it reduces to ``zeta = f / s``.

    State layout: one row per real kernel, then the real parts of all
    oscillatory kernels, then their imaginary parts.
    """

    def __init__(self, kernels, dt):
        real = [k for k in kernels if not k.oscillatory]
        osc = [k for k in kernels if k.oscillatory]
        self.n_real = len(real)
        self.n_osc = len(osc)
        self.rows = self.n_real + 2 * self.n_osc
        rates = np.array([k.rate.real for k in real] + [k.rate for k in osc], dtype=complex)
        weights = np.array([k.weight.real for k in real] + [k.weight for k in osc],
                           dtype=complex)
        e, c0, c1 = _step_coefficients(rates, dt)
        nr = self.n_real
        self.e_real, self.e_re, self.e_im = e[:nr].real[:, None], e[nr:].real[:, None], e[nr:].imag[:, None]
        self.c0 = self._pack(c0)
        self.c1 = self._pack(c1)
        self.rho_real = weights[:nr].real[:, None]
        self.rho_re, self.rho_im = weights[nr:].real[:, None], weights[nr:].imag[:, None]
        #: coefficient of f_new in sum Re[rho zeta_new]
        self.k_new = float(np.sum((weights * c1).real))

    def _pack(self, coeff):
        nr = self.n_real
        return np.concatenate([coeff[:nr].real, coeff[nr:].real, coeff[nr:].imag])[:, None]

    def zeros(self, n):
        return np.zeros((self.rows, n))

    def _split(self, mem):
        nr, no = self.n_real, self.n_osc
        return mem[:nr], mem[nr:nr + no], mem[nr + no:]

    def decay(self, mem):
        """``E zeta`` (a rotation-scaling for oscillatory kernels)."""
        if self.rows == 0:
            return mem
        real, re, im = self._split(mem)
        nr, no = self.n_real, self.n_osc
        out = np.empty_like(mem)
        out[:nr] = self.e_real * real
        out[nr:nr + no] = self.e_re * re - self.e_im * im
        out[nr + no:] = self.e_im * re + self.e_re * im
        return out

    def advance(self, mem, f_old, f_new):
        return self.decay(mem) + self.c0 * f_old + self.c1 * f_new

    def value(self, mem):
        """Convolution ``sum Re[rho zeta]``."""
        if self.rows == 0:
            return 0.0
        real, re, im = self._split(mem)
        return ((self.rho_real * real).sum(axis=0)
                + (self.rho_re * re - self.rho_im * im).sum(axis=0))


def _step_coefficients(s, dt):
    """``E``, ``c0``, ``c1`` of the linear-forcing exponential step."""
    e = np.exp(-s * dt)
    x = s * dt
    # phi1 = (1 - e^-x)/x, phi2 = (x - 1 + e^-x)/x^2, with series for small x
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    phi1 = np.where(small, 1 - x / 2 + x * x / 6, -np.expm1(-xs) / xs)
    phi2 = np.where(small, 0.5 - x / 6 + x * x / 24, (xs + np.expm1(-xs)) / (xs * xs))
    c1 = dt * phi2
    c0 = dt * phi1 - c1
    return e, c0, c1


@lru_cache(maxsize=64)
def numerical_speed_ratio(order: int, cfl: float) -> float:
    """Largest discrete group velocity of the lossless scheme over ``c_inf``.

    From the leapfrog relation ``sin(w dt/2) = cfl * S(theta)`` with
    ``theta = k dx`` and ``S`` the stencil symbol. It is 1 for the compact
    stencil; the fourth-order stencil carries slightly superluminal
    short waves, which the domain sizing has to outrun.
    """
    theta = np.linspace(1e-6, math.pi, 20001)
    if order == 2:
        s, ds = np.sin(theta / 2), 0.5 * np.cos(theta / 2)
    else:
        s = 9 / 8 * np.sin(theta / 2) - 1 / 24 * np.sin(1.5 * theta)
        ds = 9 / 16 * np.cos(theta / 2) - 1 / 16 * np.cos(1.5 * theta)
    vg = 2 * ds / np.sqrt(1 - (cfl * s) ** 2)
    return max(1.0, float(vg.max()))


@dataclass(frozen=True)
class SimConfig:
    mat: EquivalentFluid
    L: float
    nx: int
    dt: float
    nt: int
    receivers: tuple = ()
    check_dispersion: bool = True
    order: int = 4
    cfl: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(float(r) for r in self.receivers))
        if self.nx < 4 or self.nt < 1 or not self.dt > 0 or not self.L > 0:
            raise ValidationError("need nx >= 4, nt >= 1, dt > 0 and L > 0")
        if self.order not in CFL_MAX:
            raise ValidationError(f"spatial order must be 2 or 4, got {self.order}")
        c = self.mat.c_inf
        dx = self.L / self.nx
        cfl = self.dt * c / dx
        object.__setattr__(self, "cfl", cfl)
        _check_cfl(self.dt, dx, c, self.order)
        reach = _reach(c, self.nt * self.dt, dx, self.order, cfl)
        if not self.L > reach:
            raise DomainTooShortError(
                f"domain length {self.L:.6g} m must exceed c_inf * nt * dt + margin "
                f"= {reach:.6g} m"
            )
        for r in self.receivers:
            if not 0 <= r <= self.L:
                raise ValidationError(f"receiver {r:g} m lies outside [0, L]")
        if self.check_dispersion:
            self._check_speeds()

    def _check_speeds(self):
        w = np.geomspace(1.0, math.pi / self.dt, 512)
        # magnitude: a negative phase speed on the decaying branch marks an
        # active medium, which the c_inf bound does not cover either
        vp = np.abs(np.asarray(phase_velocity(self.mat, w)))
        c = self.mat.c_inf
        if np.max(vp) > c * (1 + 1e-9):
            i = int(np.argmax(vp))
            raise CFLError(
                f"phase speed {vp[i]:.6g} m/s at w = {w[i]:.6g} rad/s exceeds "
                f"c_inf = {c:.6g} m/s; the CFL bound based on c_inf is not safe"
            )

    @classmethod
    def for_duration(cls, mat, dx, duration, receivers=(), cfl=0.5, dt=None, **kw):
        """Size ``dt``, ``nt`` and ``L`` for a run of ``duration`` seconds."""
        c = mat.c_inf
        dt = cfl * dx / c if dt is None else dt
        order = kw.get("order", 4)
        if order not in CFL_MAX:
            raise ValidationError(f"spatial order must be 2 or 4, got {order}")
        _check_cfl(dt, dx, c, order)
        nt = math.ceil(duration / dt - 1e-9)
        reach = _reach(c, nt * dt, dx, order, dt * c / dx)
        nx = math.floor(reach / dx) + 2
        far = max(receivers, default=0.0)
        nx = max(nx, math.ceil(far / dx) + MARGIN_CELLS + 2)
        return cls(mat, nx * dx, nx, dt, nt, tuple(receivers), **kw)

    @property
    def dx(self) -> float:
        return self.L / self.nx

    @cached_property
    def _banks(self):
        c_inf, c_k = derive_kernels(self.mat.compressibility)
        v_inf, v_k = derive_kernels(self.mat.specific_volume)
        return c_inf, _MemoryBank(c_k, self.dt), v_inf, _MemoryBank(v_k, self.dt)


def _check_cfl(dt, dx, c, order):
    cfl_max = CFL_MAX[order]
    bound = cfl_max * dx / c
    if dt > bound * (1 + 1e-12):
        raise CFLError(
            f"dt = {dt:.6g} s violates the CFL bound dt <= {cfl_max} dx / c_inf "
            f"= {bound:.6g} s (Courant number {dt * c / dx:.3g})"
        )


def _reach(c, t_end, dx, order, cfl):
    """Farthest point the discrete wave can touch by ``t_end``, plus the margin."""
    return c * t_end * numerical_speed_ratio(order, round(cfl, 12)) + MARGIN_CELLS * dx


@dataclass(frozen=True)
class SimState:
    """Solver state after ``step_index`` steps.

    ``mem_C`` holds the compressibility memories at the current level;
    ``mem_v`` holds the specific-volume memories already decayed to the
    next level (``E xi + c0 grad``), awaiting the new gradient.
    """

    p: np.ndarray
    u: np.ndarray
    mem_C: np.ndarray
    mem_v: np.ndarray
    step_index: int = 0

    @classmethod
    def zeros(cls, config: SimConfig) -> "SimState":
        _, bank_c, _, bank_v = config._banks
        n = config.nx
        return cls(np.zeros(n + 1), np.zeros(n), bank_c.zeros(n + 1), bank_v.zeros(n))


def _gradient(p, dx, order):
    """Face gradient; fourth order away from the two end faces."""
    d = p[1:] - p[:-1]
    if order == 4 and d.size > 2:
        d = d.copy()
        d[1:-1] = (27.0 * d[1:-1] - (p[3:] - p[:-3])) / 24.0
    return d / dx


def _divergence(u, dx, order):
    """Divergence at interior nodes ``1..nx-1``; fourth order away from the ends."""
    d = u[1:] - u[:-1]
    if order == 4 and d.size > 2:
        d = d.copy()
        d[1:-1] = (27.0 * d[1:-1] - (u[3:] - u[:-3])) / 24.0
    return d / dx


def step(state: SimState, config: SimConfig, boundary_value: float) -> SimState:
    """Advance ``p`` from level n to n+1 and ``u`` from n-1/2 to n+1/2.

    The pressure update is the conservative form
    ``q^{n+1} - q^n = -dt du/dx`` with ``q = C_inf p + sum Re[rho zeta]``;
    ``zeta^{n+1}`` depends linearly on ``p^{n+1}``, so each node solves a
    scalar equation.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        p_new, u, mem_c, mem_v = _advance(state, config, boundary_value)
    if not np.isfinite(p_new).all():
        raise InstabilityError(
            f"non-finite pressure after step {state.step_index + 1}",
            step_index=state.step_index + 1,
        )
    return SimState(p_new, u, mem_c, mem_v, state.step_index + 1)


def _advance(state, config, boundary_value):
    c_inf, bank_c, v_inf, bank_v = config._banks
    dt, dx = config.dt, config.dx
    p = state.p
    grad = _gradient(p, dx, config.order)
    xi = state.mem_v + bank_v.c1 * grad
    u = state.u - dt * (v_inf * grad + bank_v.value(xi))
    mem_v = bank_v.decay(xi) + bank_v.c0 * grad
    div = _divergence(u, dx, config.order)
    zeta_pre = bank_c.decay(state.mem_C) + bank_c.c0 * p
    history = bank_c.value(zeta_pre - state.mem_C)
    history = history[1:-1] if np.ndim(history) else history
    p_new = np.empty_like(p)
    p_new[1:-1] = (c_inf * p[1:-1] - history - dt * div) / (c_inf + bank_c.k_new)
    p_new[0] = boundary_value
    p_new[-1] = 0.0
    mem_c = zeta_pre + bank_c.c1 * p_new
    return p_new, u, mem_c, mem_v


def _boundary_series(config: SimConfig, excitation: SampledSignal) -> np.ndarray:
    t = np.arange(config.nt + 1) * config.dt
    if abs(excitation.fs * config.dt - 1.0) <= 1e-12 and excitation.t0 == 0.0:
        out = np.zeros(config.nt + 1)
        m = min(len(excitation), out.size)
        out[:m] = excitation.samples[:m]
        return out
    # linear interpolation onto the solver clock, zero outside the record
    return np.interp(t, excitation.times, excitation.samples, left=0.0, right=0.0)


def _interp_stencils(config: SimConfig):
    """Node indices and cubic Lagrange weights for every receiver.

    A receiver on a node reads it exactly; otherwise the four nearest nodes
    (shifted inward at the domain ends) are used.
    """
    nodes = np.arange(4)
    idx, wts = [], []
    for r in config.receivers:
        pos = r / config.dx
        near = round(pos)
        if abs(pos - near) < 1e-9:
            idx.append(np.full(4, near))
            wts.append(np.array([1.0, 0.0, 0.0, 0.0]))
            continue
        first = min(max(int(math.floor(pos)) - 1, 0), config.nx - 3)
        x = pos - first
        w = np.array([np.prod([(x - m) / (j - m) for m in nodes if m != j]) for j in nodes])
        idx.append(first + nodes)
        wts.append(w)
    return np.array(idx, dtype=int), np.array(wts)


def run(config: SimConfig, excitation: SampledSignal) -> FieldResult:
    """March ``nt`` steps and record every receiver at every level.

    Receivers between nodes are read by cubic interpolation of the four
    nearest nodes; a receiver on a node (such as ``x = 0``) reads that node
    exactly.
    """
    if not config.receivers:
        raise ValidationError("at least one receiver is required")
    boundary = _boundary_series(config, excitation)
    idx, wts = _interp_stencils(config)
    state = SimState.zeros(config)
    p = state.p.copy()
    p[0] = boundary[0]
    state = SimState(p, state.u, state.mem_C, state.mem_v, 0)
    records = np.zeros((config.nt + 1, len(config.receivers)))

    def sample(pp):
        return np.sum(pp[idx] * wts, axis=1)

    records[0] = sample(state.p)
    peak = float(np.max(np.abs(state.p)))
    far_peak = float(np.max(np.abs(state.p[-FAR_END_CELLS - 1:-1])))
    for n in range(config.nt):
        state = step(state, config, boundary[n + 1])
        records[n + 1] = sample(state.p)
        peak = max(peak, float(np.max(np.abs(state.p))))
        far_peak = max(far_peak, float(np.max(np.abs(state.p[-FAR_END_CELLS - 1:-1]))))
    c_inf, _, v_inf, _ = config._banks
    energy = 0.5 * config.dx * (c_inf * np.sum(state.p**2) + np.sum(state.u**2) / v_inf)
    fs = 1.0 / config.dt
    geom = Geometry(1, config.receivers)
    signals = [SampledSignal(fs, records[:, j].copy(), 0.0) for j in range(records.shape[1])]
    diagnostics = {
        "cfl": config.cfl,
        "dx": config.dx,
        "dt": config.dt,
        "nt": config.nt,
        "L": config.L,
        "nx": config.nx,
        "peak_pressure": peak,
        "far_end_ratio": far_peak / peak if peak > 0 else 0.0,
        "final_energy": float(energy),
    }
    return FieldResult(geom, config.mat.name, signals, diagnostics)
