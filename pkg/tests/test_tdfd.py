import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from efbench import analytic as an
from efbench import compare
from efbench import material as m
from efbench import tdfd
from efbench.dispersion import phase_velocity
from efbench.errors import CFLError, DomainTooShortError, InstabilityError, ValidationError
from efbench.excitation import ExcitationSpec, p0, sample

MAT1 = m.builtin_mat1()
LOSSLESS = m.lossless_limit(MAT1)
SPEC = ExcitationSpec(700.0)
C_INF = MAT1.c_inf
DX = C_INF / (40 * 700.0)

# mat1 with one extra complex pair in each model; phase speed stays below c_inf
PAIRED = m.EquivalentFluid(
    "paired",
    m.RationalFRF(MAT1.compressibility.constant, MAT1.compressibility.real_poles,
                  (m.ComplexPair(0.05, 0.02, 20000.0, 30000.0),)),
    m.RationalFRF(MAT1.specific_volume.constant, MAT1.specific_volume.real_poles,
                  (m.ComplexPair(-3000.0, 1000.0, 15000.0, 40000.0),)),
)


def _run(mat, receivers, duration, dx=DX, cfl=0.5, order=4):
    cfg = tdfd.SimConfig.for_duration(mat, dx, duration, receivers, cfl=cfl, order=order)
    sig = sample(SPEC, 1.0 / cfg.dt, max(duration, SPEC.support))
    return cfg, sig, tdfd.run(cfg, sig)


def _vs_analytic(mat, receivers, duration, **kw):
    _, sig, res = _run(mat, receivers, duration, **kw)
    ref = an.solve(mat, an.Geometry(1, receivers), sig)
    return compare.compare(ref, res)


def _lossless_error(x, dx, cfl=0.5, order=4):
    _, _, res = _run(LOSSLESS, [x], x / C_INF + SPEC.support + 2e-4, dx=dx, cfl=cfl,
                     order=order)
    want = p0(SPEC, res.times - x / C_INF)
    return np.linalg.norm(res.signals[0].samples - want) / np.linalg.norm(want)


# ---------------------------------------------------------------------------
# kernels and the memory recursion


def test_mat1_kernels():
    c_inf, kernels = tdfd.derive_kernels(MAT1.compressibility)
    assert c_inf == 6.5866e-6
    assert [(k.weight, k.rate) for k in kernels] == [(0.332994, 591390.0), (0.137113, 37500.0)]
    assert not any(k.oscillatory for k in kernels)
    assert kernels[0](1e-5) == pytest.approx(0.332994 * math.exp(-5.9139))
    assert kernels[0](-1e-9) == 0.0


def test_empty_model_has_no_kernels():
    assert tdfd.derive_kernels(m.RationalFRF(2.5)) == (2.5, [])


def test_kernel_transforms_rebuild_the_model():
    for model in (MAT1.compressibility, PAIRED.compressibility, PAIRED.specific_volume):
        const, kernels = tdfd.derive_kernels(model)
        w = np.array([0.0, 10.0, 3e3, -7e4, 2e6])
        total = const + sum(k.transform(w) for k in kernels)
        np.testing.assert_allclose(total, m.evaluate_frf(model, w), rtol=1e-14)
    _, kernels = tdfd.derive_kernels(MAT1.compressibility)
    assert kernels[1].transform(0.0) == pytest.approx(0.137113 / 37500.0, rel=1e-15)


@pytest.mark.parametrize("w", [0.0, 2e4, 5e4])
def test_kernel_transform_matches_quadrature(w):
    kernel = tdfd.derive_kernels(PAIRED.compressibility)[1][-1]
    assert kernel.oscillatory
    re = quad(lambda t: kernel(t) * math.cos(w * t), 0, 2e-3, limit=400)[0]
    im = quad(lambda t: kernel(t) * math.sin(w * t), 0, 2e-3, limit=400)[0]
    assert complex(re, im) == pytest.approx(complex(kernel.transform(w)), rel=1e-9)


def _bank(mat):
    _, kernels = tdfd.derive_kernels(mat)
    return kernels


@pytest.mark.parametrize("dt", [1e-7, 1.8e-5, 1e-3])
def test_memory_exact_for_constant_forcing(dt):
    kernels = _bank(PAIRED.compressibility)
    bank = tdfd._MemoryBank(kernels, dt)
    f = np.array([1.0, -2.5])
    mem = bank.zeros(2)
    for n in range(1, 201):
        mem = bank.advance(mem, f, f)
        t = n * dt
        exact = sum((k.weight * (1 - np.exp(-k.rate * t)) / k.rate).real for k in kernels) * f
        np.testing.assert_allclose(bank.value(mem), exact, rtol=1e-12)


def test_memory_exact_for_linear_forcing():
    kernels = _bank(PAIRED.specific_volume)
    dt = 2e-5
    bank = tdfd._MemoryBank(kernels, dt)
    mem = bank.zeros(1)
    for n in range(1, 101):
        mem = bank.advance(mem, (n - 1) * dt, n * dt)
    t = 100 * dt
    exact = sum((k.weight * (t / k.rate - (1 - np.exp(-k.rate * t)) / k.rate**2)).real
                for k in kernels)
    assert bank.value(mem)[0] == pytest.approx(exact, rel=1e-12)


def test_decay_factors_are_recomputed_per_step_size():
    _, kernels = tdfd.derive_kernels(MAT1.compressibility)
    alphas = np.array([[k.rate.real] for k in kernels])
    for dt in (1e-6, 2e-6, 1e-6):
        bank = tdfd._MemoryBank(kernels, dt)
        np.testing.assert_array_equal(bank.e_real, np.exp(-alphas * dt))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e3))
def test_step_coefficients_series_and_closed_form_agree(x):
    # c0 + c1 = (1 - e^-x)/s: the integral of the kernel over one step
    s, dt = x, 1.0
    e, c0, c1 = tdfd._step_coefficients(np.array([s]), dt)
    assert (c0 + c1)[0] == pytest.approx(-math.expm1(-x) / s, rel=1e-10)
    assert e[0] == pytest.approx(math.exp(-x), rel=1e-15)
    assert c0[0] >= 0 and c1[0] >= 0


# ---------------------------------------------------------------------------
# configuration


def test_cfl_bound_enforced():
    dt = 0.86 * DX / C_INF
    with pytest.raises(CFLError, match="0.85"):
        tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [0.1], dt=dt)
    with pytest.raises(CFLError, match="0.9"):
        tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [0.1], dt=0.91 * DX / C_INF, order=2)
    cfg = tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [0.1], dt=dt, order=2)
    assert cfg.cfl == pytest.approx(0.86)


def test_domain_too_short():
    with pytest.raises(DomainTooShortError, match="must exceed"):
        tdfd.SimConfig(MAT1, 1.0, 100, 0.5 * 0.01 / C_INF, 1000, (0.1,))


def test_invalid_configs():
    dt = 0.5 * DX / C_INF
    with pytest.raises(ValidationError):
        tdfd.SimConfig(MAT1, 10.0, 2, dt, 10)
    with pytest.raises(ValidationError, match="order"):
        tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [0.1], order=3)
    with pytest.raises(ValidationError, match="outside"):
        tdfd.SimConfig(MAT1, 10.0, 1000, 1e-6, 10, (11.0,))
    cfg = tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [])
    with pytest.raises(ValidationError, match="receiver"):
        tdfd.run(cfg, sample(SPEC, 1 / cfg.dt, SPEC.support))


def test_supersonic_material_rejected():
    fast = m.EquivalentFluid("fast", m.RationalFRF(1e-5),
                             m.RationalFRF(1.0, (m.RealPole(1000.0, 100.0),)))
    with pytest.raises(CFLError, match="phase speed"):
        tdfd.SimConfig.for_duration(fast, 0.01, 0.001, [0.1])
    assert np.max(phase_velocity(MAT1, np.geomspace(1, 1e7, 200))) < C_INF


def test_for_duration_sizing():
    cfg = tdfd.SimConfig.for_duration(MAT1, DX, 0.01, [0.5])
    assert cfg.dx == pytest.approx(DX)
    assert cfg.nt * cfg.dt >= 0.01 - 1e-15
    assert cfg.L > C_INF * cfg.nt * cfg.dt
    far = tdfd.SimConfig.for_duration(MAT1, DX, 1e-3, [20.0])
    assert far.L >= 20.0 + tdfd.MARGIN_CELLS * DX


def test_numerical_speed_ratio():
    assert tdfd.numerical_speed_ratio(2, 0.5) == 1.0
    assert tdfd.numerical_speed_ratio(2, 0.9) == 1.0
    assert tdfd.numerical_speed_ratio(4, 0.5) == pytest.approx(1.0115, abs=1e-3)
    assert tdfd.numerical_speed_ratio(4, 0.85) > tdfd.numerical_speed_ratio(4, 0.5)


# ---------------------------------------------------------------------------
# time stepping


@pytest.mark.slow
def test_zero_state_stays_zero():
    cfg = tdfd.SimConfig.for_duration(PAIRED, 0.2, 1e4 * 0.5 * 0.2 / PAIRED.c_inf, [1.0])
    assert cfg.nt == 10000
    state = tdfd.SimState.zeros(cfg)
    for _ in range(cfg.nt):
        state = tdfd.step(state, cfg, 0.0)
    assert state.step_index == 10000
    for arr in (state.p, state.u, state.mem_C, state.mem_v):
        assert arr.tobytes() == np.zeros_like(arr).tobytes()


def test_state_shapes():
    cfg = tdfd.SimConfig.for_duration(PAIRED, DX, 0.001, [0.1])
    s = tdfd.SimState.zeros(cfg)
    assert s.p.shape == (cfg.nx + 1,) and s.u.shape == (cfg.nx,)
    assert s.mem_C.shape == (2 + 2, cfg.nx + 1)
    assert s.mem_v.shape == (2 + 2, cfg.nx)


def test_instability_reports_step_index():
    cfg = tdfd.SimConfig.for_duration(MAT1, DX, 0.001, [0.1])
    s = tdfd.SimState.zeros(cfg)
    p = s.p.copy()
    p[5] = np.inf
    bad = tdfd.SimState(p, s.u, s.mem_C, s.mem_v, 41)
    with pytest.raises(InstabilityError) as info:
        tdfd.step(bad, cfg, 0.0)
    assert info.value.step_index == 42


def test_receiver_at_boundary_is_exact():
    cfg, sig, res = _run(MAT1, [0.0, 0.1], 0.003)
    np.testing.assert_array_equal(res.signals[0].samples[: len(sig)], sig.samples[: cfg.nt + 1])


def test_receiver_on_node_reads_the_node():
    cfg = tdfd.SimConfig.for_duration(MAT1, 0.01, 0.002, [0.05, 0.055])
    idx, wts = tdfd._interp_stencils(cfg)
    assert list(idx[0]) == [5, 5, 5, 5] and list(wts[0]) == [1, 0, 0, 0]
    assert wts[1].sum() == pytest.approx(1.0, rel=1e-15)


def test_resampled_excitation():
    cfg = tdfd.SimConfig.for_duration(MAT1, DX, 0.002, [0.0])
    coarse = sample(SPEC, 0.5 / cfg.dt, SPEC.support)
    res = tdfd.run(cfg, coarse)
    t = res.times
    want = np.interp(t, coarse.times, coarse.samples, left=0.0, right=0.0)
    np.testing.assert_allclose(res.signals[0].samples, want, rtol=0, atol=1e-15)


@pytest.mark.parametrize("mat", [MAT1, LOSSLESS], ids=["mat1", "lossless"])
@pytest.mark.parametrize("order, cfl", [(4, 0.5), (4, 0.85), (2, 0.9)])
def test_far_end_stays_quiet(mat, order, cfl):
    _, _, res = _run(mat, [0.5], 0.01, cfl=cfl, order=order)
    assert res.diagnostics["far_end_ratio"] < 1e-12
    assert res.diagnostics["peak_pressure"] > 1.0


@pytest.mark.parametrize("order", [2, 4])
def test_lossless_convergence_is_second_order(order):
    levels = (2, 4, 8)
    errs = [_lossless_error(0.5, DX / lev, order=order) for lev in levels]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.5 <= r <= 4.5 for r in ratios), (errs, ratios)


def test_lossless_translation_at_one_metre():
    # the leapfrog time error dominates the fourth-order space error, so the
    # Courant number matters: below 1% at 0.25, about 1.7% at 0.5
    assert _lossless_error(1.0, DX, cfl=0.25) < 0.01
    assert _lossless_error(1.0, DX, cfl=0.5) == pytest.approx(0.0173, abs=5e-4)


def test_mat1_quarter_metre_matches_analytic():
    report = _vs_analytic(MAT1, [0.25], 0.02)
    assert report.max_rel_l2 < 0.02


def test_complex_pair_material_matches_analytic():
    report = _vs_analytic(PAIRED, [0.1, 0.25], 0.008)
    assert report.max_rel_l2 < 0.01, report.to_text()


def test_run_diagnostics():
    cfg, _, res = _run(LOSSLESS, [0.3], 0.004)
    d = res.diagnostics
    assert d["cfl"] == pytest.approx(0.5) and d["nt"] == cfg.nt and d["nx"] == cfg.nx
    assert d["final_energy"] > 0
    assert res.geometry.dim == 1 and res.fs == pytest.approx(1 / cfg.dt)
