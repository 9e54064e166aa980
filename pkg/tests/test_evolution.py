import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genschro.banded import BandedComplexMatrix
from genschro.core import MuProfile, PhysicalConstants, PotentialProfile, integrate, make_grid
from genschro.errors import DegenerateNormalizationError, EvolutionError, UsageError
from genschro.evolution import (
    EvolutionRecord,
    EvolutionReport,
    Propagator,
    continuity_residual,
    flux_continuity_residual,
    probability_drift,
    run,
    step,
)
from genschro.fields import FieldState, init_gaussian
from genschro.operators import assemble_hamiltonian
from genschro.spectral import lowest_eigenpairs

C = PhysicalConstants()
HARMONIC = PotentialProfile.harmonic(1.0)


def record(t, p=1.0):
    return EvolutionRecord(0, t, p, 0j, 0.0, 0.0, 0.0, 0.0, 0.0)


class TestStep:
    def test_zero_hamiltonian_is_identity(self, rng):
        n = 21
        H = BandedComplexMatrix.from_row_diagonals({0: np.zeros(n)}, n)
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi[0] = psi[-1] = 0
        s = FieldState(0.0, psi, psi.conj())
        out = step(s, Propagator(H, 0.1))
        assert np.array_equal(out.psi, s.psi) and np.array_equal(out.phi, s.phi)
        assert out.t == 0.1

    def test_conjugate_recurrence(self):
        g = make_grid(10, 201)
        prop = Propagator.assemble(g, MuProfile.zero(), HARMONIC, C, 0.01)
        s = init_gaussian(g, 1.0, 1.0, 1.0, "conjugate")
        for _ in range(50):
            s = step(s, prop)
            assert np.abs(s.phi - np.conj(s.psi)).max() <= 1e-12

    def test_boundary_stays_zero(self):
        g = make_grid(5, 101)
        prop = Propagator.assemble(g, MuProfile.linear_imag(0.1), PotentialProfile.zero(), C, 0.01)
        s = step(init_gaussian(g, 0, 1, 0.5), prop)
        assert s.has_dirichlet_boundary()

    def test_time_reversal(self):
        g = make_grid(10, 201)
        mu, V = MuProfile.quadratic_real(0.05), HARMONIC
        fwd = Propagator.assemble(g, mu, V, C, 0.01)
        back = Propagator.assemble(g, mu, V, C, -0.01)
        s0 = init_gaussian(g, 1.0, 1.0, 1.0)
        s = s0
        for _ in range(100):
            s = step(s, fwd)
        for _ in range(100):
            s = step(s, back)
        assert np.abs(s.psi - s0.psi).max() <= 1e-9
        assert abs(s.t) <= 1e-12

    def test_grid_mismatch(self):
        prop = Propagator.assemble(make_grid(5, 51), MuProfile.zero(), HARMONIC, C, 0.01)
        with pytest.raises(UsageError):
            step(init_gaussian(make_grid(5, 53), sigma=0.5), prop)

    @pytest.mark.parametrize("dt", [0.0, float("nan"), float("inf")])
    def test_bad_dt(self, dt):
        H = assemble_hamiltonian(make_grid(5, 11), MuProfile.zero(), None, C)
        with pytest.raises(UsageError):
            Propagator(H, dt)

    def test_solve_residual(self, rng):
        g = make_grid(5, 101)
        prop = Propagator.assemble(g, MuProfile.linear_imag(0.2), PotentialProfile.cubic_imag(0.3), C, 0.05)
        b = rng.standard_normal(101) + 1j * rng.standard_normal(101)
        for lu in (prop.plus_lu, prop.minus_lu):
            assert lu.residual(lu.solve(b), b) <= 1e-12

    @settings(max_examples=20, deadline=None)
    @given(dt=st.floats(1e-3, 50.0), seed=st.integers(0, 1000))
    def test_hermitian_norm_conserved_any_dt(self, dt, seed):
        g = make_grid(5, 101)
        rng = np.random.default_rng(seed)
        psi = rng.standard_normal(101) + 1j * rng.standard_normal(101)
        psi[0] = psi[-1] = 0
        prop = Propagator.assemble(g, MuProfile.zero(), HARMONIC, C, dt)
        s = step(FieldState(0, psi, psi.conj()), prop)
        assert abs(np.linalg.norm(s.psi) - np.linalg.norm(psi)) <= 1e-12 * np.linalg.norm(psi)

    def test_free_gaussian_oracle(self):
        g = make_grid(10, 2001)
        sigma, k0, T = 1.0, 1.0, 1.0
        prop = Propagator.assemble(g, MuProfile.zero(), PotentialProfile.zero(), C, 0.001)
        s = init_gaussian(g, 0.0, k0, sigma, "conjugate")
        for _ in range(1000):
            s = step(s, prop)
        x = g.nodes
        z = 1 + 1j * T / (2 * sigma**2)
        exact = (2 * np.pi * sigma**2) ** -0.25 / np.sqrt(z) * np.exp(
            -((x - k0 * T) ** 2) / (4 * sigma**2 * z) + 1j * k0 * (x - k0 * T / 2)
        )
        err = np.sqrt(integrate(np.abs(s.psi - exact) ** 2, g))
        assert err <= 1e-4


class TestRun:
    def test_zero_steps(self):
        g = make_grid(10, 201)
        res = run(init_gaussian(g), g, MuProfile.zero(), HARMONIC, C, 0.01, 0)
        assert len(res.report.records) == 1 and len(res.snapshots) == 1

    def test_records_include_final(self):
        g = make_grid(10, 201)
        res = run(init_gaussian(g), g, MuProfile.zero(), HARMONIC, C, 0.01, 25, snapshot_every=10)
        assert [r.step for r in res.report.records] == [0, 10, 20, 25]

    def test_harmonic_conservation(self):
        g = make_grid(10, 201)
        mu = MuProfile.quadratic_real(0.1)
        res = run(init_gaussian(g, 1, 1, 1), g, mu, HARMONIC, C, 0.01, 1000, snapshot_every=100, collect=False)
        summary = res.report.summary()
        assert summary["probability_drift"] <= 1e-10
        assert summary["max_pt_defect"] <= 1e-10
        assert summary["energy_drift"] <= 1e-6
        assert summary["max_flux_residual"] <= 1e-11

    def test_expanded_drift_refines(self):
        drifts = []
        for n, dt in ((101, 0.02), (201, 0.01)):
            g = make_grid(10, n)
            res = run(
                init_gaussian(g, 1, 1, 1), g, MuProfile.quadratic_real(0.1), HARMONIC, C, dt,
                int(round(2 / dt)), snapshot_every=10, form="expanded", collect=False,
            )
            drifts.append(probability_drift(res.report))
        assert drifts[0] > 1e-8
        assert 3.0 <= drifts[0] / drifts[1] <= 5.0

    def test_enforce_pt(self):
        g = make_grid(10, 201)
        res = run(init_gaussian(g, 1, 1, 1), g, MuProfile.zero(), HARMONIC, C, 0.01, 20, enforce_pt=True)
        assert res.report.max_pt_defect() == 0.0

    def test_snapshot_callback(self):
        g = make_grid(10, 201)
        seen = []
        run(init_gaussian(g), g, MuProfile.zero(), HARMONIC, C, 0.01, 4, snapshot_every=2,
            on_snapshot=lambda n, s, snap: seen.append((n, snap.rho.shape)), collect=False)
        assert seen == [(0, (201,)), (2, (201,)), (4, (201,))]

    def test_nan_detection(self):
        g = make_grid(5, 51)
        s = init_gaussian(g, 0, 0, 0.5)
        s = s.evolved(0.0, s.psi.copy(), s.phi)
        s.psi[25] = np.nan
        with pytest.raises(EvolutionError) as err:
            run(s, g, MuProfile.zero(), HARMONIC, C, 0.01, 3)
        assert err.value.step == 1

    @pytest.mark.parametrize("kw", [{"steps": -1}, {"steps": 2, "snapshot_every": 0}])
    def test_usage(self, kw):
        g = make_grid(5, 51)
        args = {"snapshot_every": 1, **kw}
        with pytest.raises(UsageError):
            run(init_gaussian(g, sigma=0.5), g, MuProfile.zero(), HARMONIC, C, 0.01, args["steps"],
                snapshot_every=args["snapshot_every"])


class TestReport:
    def test_monotonic(self):
        r = EvolutionReport()
        r.append(record(0.0))
        r.append(record(0.1))
        with pytest.raises(UsageError):
            r.append(record(0.05))
        with pytest.raises(UsageError):
            r.append(record(0.1))

    def test_backward_runs_allowed(self):
        r = EvolutionReport()
        for t in (0.0, -0.1, -0.2):
            r.append(record(t))
        assert len(r.records) == 3

    def test_drift_value(self):
        r = EvolutionReport()
        for t, p in ((0, 2.0), (1, 2.2), (2, 1.9)):
            r.append(record(t, p))
        assert probability_drift(r) == pytest.approx(0.1)

    def test_drift_errors(self):
        with pytest.raises(UsageError):
            probability_drift(EvolutionReport())
        r = EvolutionReport()
        r.append(record(0, 0.0))
        with pytest.raises(DegenerateNormalizationError):
            probability_drift(r)


class TestContinuity:
    def test_stationary_eigenstate(self):
        g = make_grid(10, 401)
        H = assemble_hamiltonian(g, MuProfile.zero(), HARMONIC, C)
        v = lowest_eigenpairs(H, 1, shift=0.4, grid=g).eigenvectors[:, 0]
        v = (v * np.exp(-1j * np.angle(v[200]))).real + 0j
        prop = Propagator(H, 0.01)
        before = FieldState(0, v, v)
        after = step(before, prop)
        r = continuity_residual(before, after, MuProfile.zero(), g)
        scale = np.abs(v).max() ** 2 / 0.01
        assert np.abs(r).max() <= 1e-10 * scale

    @pytest.mark.parametrize("mu", [MuProfile.zero(), MuProfile.quadratic_real(0.1), MuProfile.linear_imag(0.05)])
    def test_compatible_flux_exact(self, mu):
        g = make_grid(5, 101)
        prop = Propagator.assemble(g, mu, PotentialProfile.zero(), C, 0.02)
        s0 = init_gaussian(g, 0, 1, 0.5)
        s1 = step(s0, prop)
        r, scale = flux_continuity_residual(s0, s1, mu, g)
        assert np.abs(r).max() <= 1e-11 * scale

    def test_residual_shape_and_errors(self):
        g = make_grid(5, 101)
        s0 = init_gaussian(g, 0, 1, 0.5)
        s1 = step(s0, Propagator.assemble(g, MuProfile.zero(), HARMONIC, C, 0.01))
        assert continuity_residual(s0, s1, MuProfile.zero(), g).shape == (99,)
        with pytest.raises(UsageError):
            continuity_residual(s0, s0, MuProfile.zero(), g)
        with pytest.raises(UsageError):
            continuity_residual(s0, s1, MuProfile.zero(), make_grid(5, 103))
