import numpy as np
import pytest

from specmhd import constitutive as cst
from specmhd import diagnostics as diag
from specmhd import galerkin as gal
from specmhd import integrator as itg
from specmhd import spectral as sp

from helpers import make_state

L = 2.0 * np.pi


@pytest.fixture(scope="module")
def basis():
    return sp.build_basis(L, 16, 24)


@pytest.fixture()
def params():
    return cst.ConstitutiveParams()


def plain_state(basis, theta0=1.0):
    g = basis.grid_points
    rho_spec = np.zeros((g, g, g), dtype=complex)
    rho_spec[0, 0, 0] = 1.0
    b = np.zeros(min(basis.k_modes + 1, basis.n_scalar_modes))
    b[0] = theta0 * np.sqrt(basis.volume)
    return gal.SimState(
        t=0.0,
        rho=sp.Field("scalar", "spectral", rho_spec, L),
        a=np.zeros(basis.k_modes),
        b=b,
        c=np.zeros(basis.k_modes),
        basis=basis,
    )


def run(params, basis, state, dt, t_end, eps=0.0):
    cfg = itg.StepConfig(dt=dt, t_end=t_end)
    rec = diag.TrajectoryRecorder(params, basis, eps_density=eps)
    itg.integrate(params, basis, state, cfg, observers=[rec], eps_density=eps)
    return rec


class TestVectorIdentities:
    def test_single_mode_magnetic(self, basis):
        c = np.zeros(basis.k_modes)
        c[0] = 1.0
        h = sp.Field.from_spectral(basis.synth_vector(c), L)
        u = sp.Field.from_spectral(np.zeros_like(h.data), L)
        rep = diag.vector_identity_check(basis, u, h, nu=1.3)
        assert rep["max_defect"] < 1e-12

    def test_random_band_limited(self, basis):
        rng = np.random.default_rng(1)
        u = sp.Field.from_spectral(basis.synth_vector(rng.normal(size=basis.k_modes)), L)
        h = sp.Field.from_spectral(basis.synth_vector(rng.normal(size=basis.k_modes)), L)
        rep = diag.vector_identity_check(basis, u, h, nu=0.7)
        assert rep["max_defect"] < 1e-10

    def test_zero_magnetic_field(self, basis):
        rng = np.random.default_rng(2)
        u = sp.Field.from_spectral(basis.synth_vector(rng.normal(size=basis.k_modes)), L)
        h = sp.Field.from_spectral(np.zeros_like(u.data), L)
        rep = diag.vector_identity_check(basis, u, h)
        assert rep["max_defect"] == 0.0


class TestFunctionalInequalities:
    def test_poincare_equality_lowest_mode(self, basis):
        rep = diag.functional_inequality_check(basis, n_fields=5, seed=0)
        assert abs(rep["poincare_lowest_mode_ratio"] - L / (2.0 * np.pi)) < 1e-12

    def test_korn_bound(self, basis):
        rep = diag.functional_inequality_check(basis, n_fields=100, seed=1)
        assert rep["korn_worst_ratio"] <= 1.0 + 1e-10
        # sharp value for solenoidal zero-mean fields
        assert rep["korn_worst_ratio"] == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-10)

    def test_poincare_bound(self, basis):
        rep = diag.functional_inequality_check(basis, n_fields=50, seed=2)
        assert rep["poincare_worst_ratio"] <= L / (2.0 * np.pi) + 1e-12

    def test_gradient_field_rejected(self, basis):
        rng = np.random.default_rng(3)
        phi = basis.synth_scalar(rng.normal(size=9))
        grad = sp.differentiate(basis, sp.Field.from_spectral(phi, L), "grad")
        with pytest.raises(ValueError, match="not solenoidal"):
            diag.korn_ratio_of_field(basis, grad)


class TestEnergyBalance:
    def test_zero_state(self, basis, params):
        rec = run(params, basis, plain_state(basis), dt=1e-3, t_end=0.004)
        assert diag.energy_balance(rec)["max_abs_residual"] < 1e-14

    def test_needs_two_samples(self, basis, params):
        rec = run(params, basis, plain_state(basis), dt=1e-3, t_end=0.0)
        with pytest.raises(ValueError, match="2 diagnostics samples"):
            diag.energy_balance(rec)

    def test_decaying_mode_residual(self, basis, params):
        st = plain_state(basis)
        st.c[0] = 0.5
        rec = run(params, basis, st, dt=1e-4, t_end=0.01)
        assert diag.energy_balance(rec)["max_abs_residual"] < 1e-8


class TestKineticIdentity:
    def test_zero_state(self, basis, params):
        rec = run(params, basis, plain_state(basis), dt=1e-3, t_end=0.004)
        rep = diag.kinetic_identity_check(rec)
        assert abs(rep["residual"]) < 1e-14

    def test_single_mode_viscous_decay(self, basis, params):
        st = plain_state(basis)
        st.a[0] = 0.5
        rec = run(params, basis, st, dt=1e-4, t_end=0.01)
        rep = diag.kinetic_identity_check(rec)
        assert abs(rep["residual"]) < 1e-8

    def test_second_order_convergence(self, basis, params):
        st = plain_state(basis)
        st.a[0] = 0.6
        st.a[14] = 0.4  # second shell excites genuine convection
        st.c[12] = 0.5
        r = []
        for dt in (2e-3, 1e-3):
            rec = run(params, basis, st, dt=dt, t_end=0.02)
            r.append(abs(diag.kinetic_identity_check(rec)["residual"]))
        assert 3.5 <= r[0] / r[1] <= 4.5

    def test_with_density_transport(self, basis, params):
        rng = np.random.default_rng(4)
        st = make_state(basis, rng, amp=0.4, rho_amp=0.2)
        eps = 1e-3
        rec = run(params, basis, st, dt=5e-4, t_end=0.01, eps=eps)
        rep = diag.kinetic_identity_check(rec, eps_density=eps)
        assert abs(rep["residual"]) < 1e-7 * max(rep["scale"], 1e-9) + 1e-9


class TestMonitors:
    def test_decay_bound_and_heat_flags(self, basis, params):
        st = plain_state(basis)
        st.c[0] = 0.5
        rec = run(params, basis, st, dt=1e-3, t_end=0.05)
        assert diag.decay_bound_report(rec)["ok"]
        assert all(r.heat_monotone_ok for r in rec.records)
        assert all(r.density_bounds_ok for r in rec.records)

    def test_apriori_zero_state(self, basis, params):
        rec = run(params, basis, plain_state(basis), dt=1e-3, t_end=0.003)
        rep = diag.apriori_monitor(params, rec)
        assert rep["sup_energy"] == 0.0
        assert rep["strain_lr_time_integral"] == 0.0
        assert rep["all_finite"]

    def test_apriori_decay_sup_at_start(self, basis, params):
        st = plain_state(basis)
        st.c[0] = 0.5
        rec = run(params, basis, st, dt=1e-3, t_end=0.02)
        energies = [r.E_kin + r.E_mag for r in rec.records]
        assert np.argmax(energies) == 0
        rep = diag.apriori_monitor(params, rec)
        assert rep["sup_energy"] == pytest.approx(energies[0])

    def test_csv_row_roundtrip_format(self, basis, params):
        rec = run(params, basis, plain_state(basis), dt=1e-3, t_end=0.002)
        row = diag.record_to_csv_row(rec.records[0])
        assert len(row.split(",")) == len(diag.CSV_COLUMNS)
