"""Primitive-equations solver tests."""

import numpy as np
import pytest
import scipy.fft as sfft

from hylm.initial import DataSpec, build_initial_data, project_admissible
from hylm.pe import (
    PeParams,
    PeState,
    diagnose_w,
    hydrostatic_boundary_residual,
    lm_monitor,
    pe_rhs,
    run_pe,
    step_pe,
)
from hylm.spectral import (
    Field,
    Parity,
    VectorField,
    field_from_function,
    make_grid,
    norm_l2_sq,
    phys_real,
    zero_field,
)
from hylm.timestep import Hooks

from support import ShearColumnMMS, fd_pe_rhs, observed_orders


def _vf(grid, c1, c2):
    return VectorField((Field(grid, c1, Parity.EVEN), Field(grid, c2, Parity.EVEN)))


def _pe_state(grid, c1, c2, t=0.0):
    return PeState.from_arrays(grid, c1, c2, t=t)


class TestDiagnoseW:
    def test_z_independent_gives_zero(self):
        g = make_grid(16, 16, 8)
        v1 = field_from_function(g, lambda x, y, z: np.cos(y), Parity.EVEN)
        v2 = field_from_function(g, lambda x, y, z: np.sin(x), Parity.EVEN)
        w = diagnose_w(VectorField((v1, v2)))
        assert np.max(np.abs(w.coeffs)) < 1e-14

    def test_baroclinic_antiderivative(self):
        # acceptance oracle: v=(cos x cos(pi z), 0) -> w = sin x sin(pi z)/pi
        g = make_grid(32, 32, 32)
        v1 = field_from_function(g, lambda x, y, z: np.cos(x) * np.cos(np.pi * z),
                                 Parity.EVEN)
        v2 = zero_field(g, Parity.EVEN)
        w = diagnose_w(VectorField((v1, v2)))
        expected = field_from_function(
            g, lambda x, y, z: np.sin(x) * np.sin(np.pi * z) / np.pi, Parity.ODD)
        assert w.parity is Parity.ODD
        assert np.max(np.abs(w.coeffs - expected.coeffs)) <= 1e-10

    def test_boundary_value_vanishes_under_constraint(self):
        g = make_grid(16, 16, 8)
        spec = DataSpec(kind="random", smoothness_class="H1", seed=8,
                        max_mode=2, h1_target=1.0)
        v0, _ = build_initial_data(spec, g)
        assert hydrostatic_boundary_residual(v0) <= 1e-10
        # and the violation is reported when the constraint is broken
        v_bad = _vf(g, v0[0].coeffs + field_from_function(
            g, lambda x, y, z: np.cos(x), Parity.EVEN).coeffs, v0[1].coeffs)
        assert hydrostatic_boundary_residual(v_bad) > 1e-3


class TestPeRhs:
    def test_taylor_green_tendency(self):
        # nonlinear term is a pure gradient, absorbed by the surface
        # pressure; what remains is the horizontal diffusion -2v
        g = make_grid(16, 16, 8)
        spec = DataSpec(kind="taylor_green", amplitude=1.0)
        v0, _ = build_initial_data(spec, g)
        st = PeState(v0, 0.0)
        tend, _ = pe_rhs(st)
        for c, v in zip(tend.components, v0.components):
            assert np.max(np.abs(c.coeffs + 2.0 * v.coeffs)) < 1e-12

    def test_zero(self):
        g = make_grid(8, 8, 8)
        z = np.zeros(g.shape, complex)
        tend, ps = pe_rhs(_pe_state(g, z, z))
        assert np.max(np.abs(tend[0].coeffs)) == 0.0
        assert np.max(np.abs(ps.coeffs)) == 0.0

    def test_random_state_fd_refinement(self):
        coarse = make_grid(16, 16, 16)
        spec = DataSpec(kind="random", smoothness_class="H2", seed=12,
                        max_mode=2, h2_target=0.5)
        v0, _ = build_initial_data(spec, coarse)

        def lift(c, shape):
            out = np.zeros(shape, dtype=np.complex128)
            idx = [np.fft.fftfreq(m, 1.0 / m).astype(int) for m in c.shape]
            out[np.ix_(*idx)] = c
            return out

        errs = {}
        for n in (16, 32):
            g = make_grid(n, n, n)
            c1 = lift(v0[0].coeffs, g.shape)
            c2 = lift(v0[1].coeffs, g.shape)
            tend, _ = pe_rhs(_pe_state(g, c1, c2))
            f1, f2, _ = fd_pe_rhs(g, phys_real(c1), phys_real(c2))
            err = max(np.max(np.abs(phys_real(tend[0].coeffs) - f1)),
                      np.max(np.abs(phys_real(tend[1].coeffs) - f2)))
            errs[n] = err
        assert errs[32] < errs[16] / 3.0

    def test_barotropic_tendency_divergence_free(self):
        g = make_grid(16, 16, 8)
        spec = DataSpec(kind="random", smoothness_class="H2", seed=13,
                        max_mode=2, h2_target=1.0)
        v0, _ = build_initial_data(spec, g)
        tend, _ = pe_rhs(PeState(v0, 0.0))
        d0 = 1j * (g.kx[:, None] * tend[0].coeffs[:, :, 0]
                   + g.ky[None, :] * tend[1].coeffs[:, :, 0])
        assert np.max(np.abs(d0)) < 1e-12


class TestStepPe:
    def test_taylor_green_decay(self):
        # the L2 norm decays exactly like exp(-2t) on [0, 1]
        g = make_grid(16, 16, 8)
        spec = DataSpec(kind="taylor_green", amplitude=1.0)
        v0, _ = build_initial_data(spec, g)
        res = run_pe(v0, PeParams(t_end=1.0, dt=None, dt_max=5e-3), n_outputs=11)
        norms = np.sqrt(res.ledger_E)
        expected = norms[0] * np.exp(-2.0 * res.times)
        assert np.max(np.abs(norms - expected) / expected) <= 1e-4

    def test_zero_state(self):
        g = make_grid(8, 8, 8)
        z = np.zeros(g.shape, complex)
        st = step_pe(_pe_state(g, z, z), dt=1e-3)
        assert np.max(np.abs(st.v[0].coeffs)) == 0.0

    def test_manufactured_order_at_least_two(self):
        g = make_grid(16, 16, 16)
        mms = ShearColumnMMS(g, nu_z=0.0, vertical_component=False)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            v0 = mms.initial_fields()
            res = run_pe(v0, PeParams(t_end=0.2, dt=dt), n_outputs=2,
                         hooks=Hooks(forcing=mms.forcing))
            exact = mms.exact(0.2)
            errs.append(max(np.max(np.abs(a - b))
                            for a, b in zip(res.frames[-1], exact)))
        assert np.min(observed_orders(errs)) >= 2.0 - 0.1


class TestLmMonitor:
    def test_z_independent_is_zero(self):
        g = make_grid(16, 16, 8)
        v1 = field_from_function(g, lambda x, y, z: np.cos(y), Parity.EVEN)
        v2 = zero_field(g, Parity.EVEN)
        assert lm_monitor(PeState(VectorField((v1, v2)), 0.0), m=4.0) == 0.0

    def test_cos_pi_z_fourth_power(self):
        # ||d_z v||_4 with v=(cos(pi z), 0):
        # (int pi^4 sin^4 over Omega)^{1/4} = pi (L1 L2 3/4)^{1/4}
        g = make_grid(8, 8, 16)
        v1 = field_from_function(g, lambda x, y, z: np.cos(np.pi * z), Parity.EVEN)
        v2 = zero_field(g, Parity.EVEN)
        got = lm_monitor(PeState(VectorField((v1, v2)), 0.0), m=4.0)
        expected = np.pi * (g.l1 * g.l2 * 0.75) ** 0.25
        assert got == pytest.approx(expected, rel=1e-12)

    def test_rejects_small_exponent(self):
        g = make_grid(8, 8, 8)
        z = np.zeros(g.shape, complex)
        with pytest.raises(ValueError, match="m > 2"):
            lm_monitor(_pe_state(g, z, z), m=2.0)


@pytest.fixture(scope="module")
def random_pe_run():
    g = make_grid(16, 16, 8)
    spec = DataSpec(kind="random", smoothness_class="H2", seed=21,
                    max_mode=2, h2_target=1.0)
    v0, _ = build_initial_data(spec, g)
    params = PeParams(t_end=0.25, dt=None, dt_max=2.5e-3)
    return run_pe(v0, params, n_outputs=11)


class TestRunInvariants:
    def test_barotropic_preserved(self, random_pe_run):
        assert random_pe_run.max_barotropic <= 1e-8
        assert random_pe_run.max_parity_error <= 1e-10
        # drift before the per-step re-projection is also tracked
        assert random_pe_run.max_drift_before_projection < 1e-8

    def test_diagnosed_w_vanishes_at_lid(self, random_pe_run):
        for i in range(len(random_pe_run.times)):
            st = random_pe_run.state(i)
            assert hydrostatic_boundary_residual(st.v) <= 1e-10

    def test_energy_identity(self, random_pe_run):
        assert np.max(np.abs(random_pe_run.identity_residuals())) <= 1e-4

    def test_monitor_series_finite(self, random_pe_run):
        mon = random_pe_run.monitor
        assert np.all(np.isfinite(mon.v_h1))
        assert np.all(np.isfinite(mon.grad_h_v_h1))
        assert np.all(np.isfinite(mon.dz_v_lm))
        assert np.all(np.isfinite(mon.dz_v_lm_ratio))

    def test_z_independent_matches_2d_reference(self):
        # independent plain-RK4 2D Navier-Stokes oracle
        g = make_grid(16, 16, 8)
        v1 = field_from_function(g, lambda x, y, z: np.cos(y) + 0.5 * np.sin(2 * y),
                                 Parity.EVEN)
        v2 = field_from_function(g, lambda x, y, z: np.sin(x), Parity.EVEN)
        v0 = project_admissible(VectorField((v1, v2)))
        T, dt = 0.2, 1e-3
        res = run_pe(v0, PeParams(t_end=T, dt=dt), n_outputs=2)

        ref1, ref2 = _reference_2d_ns(g, v0[0].coeffs[:, :, 0],
                                      v0[1].coeffs[:, :, 0], T, dt)
        assert np.max(np.abs(res.frames[-1][0][:, :, 0] - ref1)) <= 1e-8
        assert np.max(np.abs(res.frames[-1][1][:, :, 0] - ref2)) <= 1e-8
        assert np.max(np.abs(res.frames[-1][0][:, :, 1:])) <= 1e-10


def _reference_2d_ns(g, c1, c2, T, dt):
    """Plain (non integrating-factor) RK4 2D Navier-Stokes, convective form."""
    kx = g.kx[:, None]
    ky = g.ky[None, :]
    kh2 = kx ** 2 + ky ** 2
    inv = kh2.copy()
    inv[0, 0] = 1.0
    inv = 1.0 / inv
    inv[0, 0] = 0.0
    keep = ((np.abs(np.fft.fftfreq(g.nx, 1.0 / g.nx))[:, None] <= g.nx / 3)
            & (np.abs(np.fft.fftfreq(g.ny, 1.0 / g.ny))[None, :] <= g.ny / 3))

    def rhs(u):
        a, b = u
        pa = sfft.ifftn(a * keep, norm="forward").real
        pb = sfft.ifftn(b * keep, norm="forward").real
        ax = sfft.ifftn(1j * kx * a * keep, norm="forward").real
        ay = sfft.ifftn(1j * ky * a * keep, norm="forward").real
        bx = sfft.ifftn(1j * kx * b * keep, norm="forward").real
        by = sfft.ifftn(1j * ky * b * keep, norm="forward").real
        na = -sfft.fftn(pa * ax + pb * ay, norm="forward") * keep - kh2 * a
        nb = -sfft.fftn(pa * bx + pb * by, norm="forward") * keep - kh2 * b
        div = 1j * (kx * na + ky * nb)
        p = -div * inv
        return (na - 1j * kx * p, nb - 1j * ky * p)

    u = (c1.copy(), c2.copy())
    steps = int(round(T / dt))
    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(tuple(x + 0.5 * dt * k for x, k in zip(u, k1)))
        k3 = rhs(tuple(x + 0.5 * dt * k for x, k in zip(u, k2)))
        k4 = rhs(tuple(x + dt * k for x, k in zip(u, k3)))
        u = tuple(x + dt / 6.0 * (a + 2 * b + 2 * c + d)
                  for x, a, b, c, d in zip(u, k1, k2, k3, k4))
    return u
