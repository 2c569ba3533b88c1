import math

import numpy as np
import pytest

from conftest import (LAMBDA_C, coherent_state, make_params, packed_jacobian,
                      random_params, subset_close)
from vdicke.dynamics import (AttractorControls, IntegrationControls,
                             MeanFieldODEState, Trajectory, dark_state,
                             detect_attractor, energy_of_state, eom_rhs,
                             fidelity, integrate, os_probe, rhs_norm,
                             run_fidelity, run_to_attractor)
from vdicke.errors import (BothCouplingsZero, ConstraintDriftExceeded,
                           NotConverged, ValidationError)
from vdicke.opensteady import solve_sp_steady, state_rapidities


class TestState:
    def test_hermiticity_enforced(self):
        lam = np.zeros((3, 3), dtype=complex)
        lam[0, 1] = 0.3
        with pytest.raises(ValidationError):
            MeanFieldODEState(alpha=0j, lambda_exp=lam)

    def test_vector_roundtrip(self, rng):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        c /= np.linalg.norm(c)
        s = MeanFieldODEState.from_level_amplitudes(*c, alpha=0.2 - 0.1j)
        s2 = MeanFieldODEState.from_vector(s.to_vector())
        assert np.allclose(s2.lambda_exp, s.lambda_exp)
        assert s2.alpha == pytest.approx(s.alpha)

    def test_inverted_constructor(self):
        s = MeanFieldODEState.inverted_state(0.3, 1.2)
        assert s.lambda_exp[0, 0] == 0
        assert s.lambda_exp[1, 1].real == pytest.approx(0.3)
        assert np.angle(s.lambda_exp[1, 2]) == pytest.approx(1.2)


class TestFixedPoints:
    def test_dark_state_is_fixed_point_over_grid(self):
        for phi in np.linspace(0.05, 3.0, 10):
            for kappa in np.linspace(0.0, 1.0, 10):
                p = make_params(0.9, 0.5, phi=float(phi), kappa=float(kappa))
                t = dark_state(p)
                s = MeanFieldODEState.inverted_state(t.n1_frac, t.theta)
                assert rhs_norm(s, p) < 1e-13

    def test_normal_state_is_fixed_point(self):
        p = make_params(1.2, 0.8, phi=0.7, kappa=0.3)
        assert rhs_norm(MeanFieldODEState.normal_state(0.0), p) < 1e-15

    def test_every_inverted_state_is_fixed_point(self, rng):
        p = make_params(1.0, 0.7, phi=0.4, kappa=0.2)
        for _ in range(20):
            s = MeanFieldODEState.inverted_state(rng.uniform(0, 1),
                                                 rng.uniform(0, 2 * np.pi))
            assert rhs_norm(s, p) < 1e-13

    def test_solver_outputs_are_fixed_points(self):
        p = make_params(1.2, 0.6, phi=math.pi / 4, kappa=0.1)
        for s in solve_sp_steady(p):
            state = MeanFieldODEState(alpha=s.cavity_alpha, lambda_exp=s.lambda_exp)
            assert rhs_norm(state, p) < 1e-8

    def test_linearization_matches_rapidities(self):
        p = make_params(1.2, 0.6, phi=math.pi / 4, kappa=0.1)
        sp = [s for s in solve_sp_steady(p) if not s.is_np][0]
        state = MeanFieldODEState(alpha=sp.cavity_alpha, lambda_exp=sp.lambda_exp)
        zetas = sp.rapidities(p).zetas
        eig_j = np.linalg.eigvals(packed_jacobian(state, p))
        assert subset_close(-2.0 * zetas, eig_j, atol=1e-6)


class TestIntegration:
    def test_zero_time(self):
        p = make_params()
        s = MeanFieldODEState.normal_state(0.01)
        traj = integrate(s, p, 0.0)
        assert len(traj.t) == 1
        assert np.allclose(traj.y[:, 0], s.to_vector())

    def test_conjugate_pair_consistency(self):
        # the packed representation keeps lambda_exp exactly Hermitian
        p = make_params(1.0, 0.5, phi=0.6, kappa=0.1)
        traj = integrate(MeanFieldODEState.normal_state(0.05), p, 50.0)
        for i in (0, len(traj.t) // 2, -1):
            lam = traj.state(i).lambda_exp
            assert np.abs(lam - lam.conj().T).max() == 0.0

    def test_closed_energy_conserved(self):
        p = make_params(0.75, 0.45, phi=0.3 * math.pi, kappa=0.0)
        traj = integrate(MeanFieldODEState.normal_state(0.05), p, 200.0,
                         IntegrationControls(n_samples=201))
        e = traj.energy()
        assert np.abs(e - e[0]).max() / abs(e[0]) < 1e-6

    def test_constraints_conserved(self):
        p = make_params(1.0, 0.41, phi=0.2 * math.pi, kappa=0.1)
        traj = integrate(MeanFieldODEState.normal_state(0.01), p, 500.0,
                         IntegrationControls(n_samples=251))
        res = traj.constraint_residuals()
        assert np.abs(res - res[:, :1]).max() < 1e-7

    def test_drift_limit_enforced(self):
        p = make_params(1.0, 0.41, phi=0.2 * math.pi, kappa=0.1)
        with pytest.raises(ConstraintDriftExceeded):
            integrate(MeanFieldODEState.normal_state(0.01), p, 500.0,
                      IntegrationControls(n_samples=11, drift_limit=1e-300))

    def test_negative_time_rejected(self):
        with pytest.raises(ValidationError):
            integrate(MeanFieldODEState.normal_state(), make_params(), -1.0)


def _synthetic_traj(p, t_end=2200.0, n=4401, period=None, amplitude=0.0,
                    decay=0.0):
    t = np.linspace(0, t_end, n)
    y = np.zeros((11, n))
    y[2] = 0.6
    y[3] = 0.25
    y[4] = 0.15
    base = 0.2
    sig = base * np.ones(n)
    if period:
        envelope = np.exp(-decay * t)
        sig = base + amplitude * envelope * np.sin(2 * np.pi * t / period)
    y[0] = sig
    return Trajectory(t=t, y=y, params=p)


class TestAttractorDetection:
    def test_constant_is_fixed_point(self):
        p = make_params(kappa=0.1)
        rep = detect_attractor(_synthetic_traj(p))
        assert rep.kind == "FixedPoint"
        assert rep.fixed_state.lambda_exp[0, 0].real == pytest.approx(0.6)

    def test_synthetic_sinusoid_period_within_one_percent(self):
        p = make_params(kappa=0.1)
        rep = detect_attractor(_synthetic_traj(p, period=17.3, amplitude=0.05))
        assert rep.kind == "LimitCycle"
        assert rep.period == pytest.approx(17.3, rel=0.01)

    def test_decaying_spiral_not_a_limit_cycle(self):
        p = make_params(kappa=0.1)
        rep = detect_attractor(_synthetic_traj(p, period=17.3, amplitude=0.05,
                                               decay=2e-3))
        assert rep.kind != "LimitCycle"

    def test_short_trajectory_rejected(self):
        p = make_params(kappa=0.1)
        with pytest.raises(ValidationError):
            detect_attractor(_synthetic_traj(p, t_end=900.0, n=1801))

    def test_oscillatory_regime_detected(self):
        ratio = 0.41
        lr = 1.0
        p = make_params(lr / math.hypot(1, ratio), lr * ratio / math.hypot(1, ratio),
                        phi=0.20 * math.pi, kappa=0.1)
        report, traj = run_to_attractor(p, max_time=6000)
        assert report.kind == "LimitCycle"
        assert report.amplitude > 1e-3
        # sampling invariance: denser output, same classification and period
        dense = integrate(traj.state(0), p, float(traj.t[-1]),
                          IntegrationControls(n_samples=2 * (len(traj.t) - 1) + 1))
        rep2 = detect_attractor(dense, AttractorControls(
            transient=report.transient_time))
        assert rep2.kind == "LimitCycle"
        assert rep2.period == pytest.approx(report.period, rel=0.01)

    def test_fixed_point_regime_detected(self):
        ratio = 0.41
        lr = 1.5
        p = make_params(lr / math.hypot(1, ratio), lr * ratio / math.hypot(1, ratio),
                        phi=0.20 * math.pi, kappa=0.1)
        report, _ = run_to_attractor(p, max_time=6000)
        assert report.kind == "FixedPoint"
        assert abs(report.fixed_state.alpha) > 0.1
        assert os_probe(p, max_time=6000) == "FixedPoint"


class TestDarkStateAndFidelity:
    def test_nu_values(self):
        t = dark_state(make_params(0.8, 0.0))
        assert t.nu == 0.0 and t.n1_frac == 0.0
        assert t.single_atom_density[2, 2].real == pytest.approx(1.0)
        t2 = dark_state(make_params(0.7, 0.7))
        assert t2.nu == pytest.approx(math.pi / 4)
        assert t2.single_atom_density[1, 1].real == pytest.approx(0.5)

    def test_requires_a_coupling(self):
        with pytest.raises(BothCouplingsZero):
            dark_state(make_params(0.0, 0.0))

    def test_dark_state_fidelity_is_one(self):
        p = make_params(0.9, 0.5, phi=0.7)
        t = dark_state(p)
        s = MeanFieldODEState.inverted_state(t.n1_frac, t.theta)
        assert fidelity(s, t) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_supports_give_zero(self):
        p = make_params(0.9, 0.5)
        t = dark_state(p)
        assert fidelity(MeanFieldODEState.normal_state(0.0), t) == 0.0

    def test_many_body_option(self):
        p = make_params(0.9, 0.5)
        t = dark_state(p)
        s = MeanFieldODEState.inverted_state(0.4, t.theta)
        f1 = fidelity(s, t)
        assert 0 < f1 < 1
        assert fidelity(s, t, many_body=True, n_atoms=3) == pytest.approx(f1 ** 3)

    def test_run_fidelity_np_window_is_zero(self):
        nu = math.pi / 8
        p = make_params(0.8 * math.cos(nu), 0.8 * math.sin(nu),
                        phi=0.22 * math.pi, kappa=1.0)
        f, rep = run_fidelity(p, max_time=4000)
        assert rep.kind == "FixedPoint"
        assert f == pytest.approx(0.0, abs=1e-6)
