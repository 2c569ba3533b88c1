import math

import numpy as np
import pytest

from conftest import (LAMBDA_C, make_params, multiset_close, random_params,
                      random_physical_point)
from vdicke.closedphase import (Phase, classify_closed, closed_row, hb_matrix,
                                hb_spectrum, soft_mode_norm, sweep_closed)
from vdicke.datasets import GridAxis, GridSpec
from vdicke.fluctuations import build_ns_form
from vdicke.landscape import (OrderParams, mean_field_energy,
                              np_boundary_residual, order_params_branches,
                              sp_candidate_alphas)


def _np_form(p):
    return build_ns_form(p, OrderParams(0j, 0j, 0j))


class TestSpectrum:
    def test_decoupled_np_frequencies(self):
        p = make_params(0.0, 0.0, kappa=0.0)
        spec = hb_spectrum(_np_form(p))
        assert spec.is_real
        expect = sorted([p.omega, p.omega0, p.omega0,
                         -p.omega, -p.omega0, -p.omega0])
        assert np.allclose(np.sort(spec.frequencies.real), expect, atol=1e-12)

    def test_two_level_limit_matches_independent_model(self, rng):
        # oracle: the interpolating two-level model built from scratch.
        # with co-rotating coupling g = l1 sin(phi) and counter-rotating
        # gp = l1 cos(phi), the linearized flow in (c, d, cdag, ddag) is
        # i d/dt v = D2 v with D2 assembled below
        for _ in range(10):
            p = make_params(rng.uniform(0.1, 1.2), 0.0, phi=rng.uniform(0, math.pi))
            g = p.lambda1 * math.sin(p.phi)
            gp = p.lambda1 * math.cos(p.phi)
            d2 = np.array([[p.omega, g, 0, gp],
                           [g, p.omega0, gp, 0],
                           [0, -gp, -p.omega, -g],
                           [-gp, 0, -g, -p.omega0]], dtype=complex)
            ref = list(np.linalg.eigvals(d2)) + [p.omega0, -p.omega0]
            got = hb_spectrum(_np_form(p)).frequencies
            assert multiset_close(got, ref, atol=1e-9)

    def test_balanced_two_level_dispersion_closed_form(self):
        # standard polariton branches at phi = pi/4, lambda2 = 0
        p = make_params(0.6, 0.0, phi=math.pi / 4)
        g2 = p.lambda1 ** 2 / 2
        disc = math.sqrt((p.omega ** 2 - p.omega0 ** 2) ** 2
                         + 16 * g2 * p.omega * p.omega0)
        e_plus = math.sqrt((p.omega ** 2 + p.omega0 ** 2 + disc) / 2)
        e_minus = math.sqrt((p.omega ** 2 + p.omega0 ** 2 - disc) / 2)
        spec = hb_spectrum(_np_form(p))
        expect = sorted([e_plus, e_minus, p.omega0, -e_plus, -e_minus, -p.omega0])
        assert spec.is_real
        assert np.allclose(np.sort(spec.frequencies.real), expect, atol=1e-10)

    def test_pairing_and_opposite_norms(self, rng):
        for _ in range(30):
            p = random_params(rng, kappa_max=0.0)
            a, b1, b2 = random_physical_point(rng)
            spec = hb_spectrum(build_ns_form(p, OrderParams(a, b1, b2)))
            f = spec.frequencies
            # frequencies come in (w, -conj(w)) pairs
            assert sorted(np.round(f.real, 8).tolist()) == \
                sorted(np.round(-f.real, 8).tolist())
            if spec.is_real:
                order = np.argsort(f.real)
                for i in range(3):
                    lo, hi = order[i], order[5 - i]
                    assert f[lo].real == pytest.approx(-f[hi].real, abs=1e-8)
                    if abs(spec.symplectic_norms[lo]) > 0:
                        assert spec.symplectic_norms[lo] == \
                            -spec.symplectic_norms[hi]

    def test_boundary_softening_monotone(self):
        # lowest NP excitation decreases to zero approaching the boundary
        p0 = make_params(0.0, 0.3, phi=math.pi / 4)
        lam_star = math.sqrt(p0.omega * p0.omega0 - p0.lambda2 ** 2 * (
            1 + math.sin(2 * p0.phi)) ) if False else None
        # walk lambda1 toward the boundary located by bisection
        lo, hi = 0.0, 1.2
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if np_boundary_residual(p0.replace(lambda1=mid)) < 0:
                lo = mid
            else:
                hi = mid
        lam_b = 0.5 * (lo + hi)
        gaps = []
        for frac in (0.5, 0.8, 0.95, 0.99, 0.999):
            spec = hb_spectrum(_np_form(p0.replace(lambda1=frac * lam_b)))
            assert spec.is_real
            gaps.append(abs(spec.frequencies.real).min())
        assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.03


class TestClassification:
    def test_np_point(self):
        pt = classify_closed(make_params(0.5 * LAMBDA_C, 0.3 * LAMBDA_C, phi=math.pi / 4))
        assert pt.stable_phases == frozenset({Phase.NP})

    def test_sp1_point(self):
        pt = classify_closed(make_params(1.5 * LAMBDA_C, 0.5 * LAMBDA_C, phi=math.pi / 4))
        assert pt.stable_phases == frozenset({Phase.SP1})
        op = pt.order_params[Phase.SP1]
        assert abs(op.alpha.imag) < 1e-12 and abs(op.alpha.real) > 0

    def test_sp2_point(self):
        pt = classify_closed(make_params(0.5 * LAMBDA_C, 1.5 * LAMBDA_C, phi=math.pi / 4))
        assert pt.stable_phases == frozenset({Phase.SP2})
        op = pt.order_params[Phase.SP2]
        assert abs(op.alpha.real) < 1e-12 and abs(op.alpha.imag) > 0

    def test_z2_partners_degenerate(self):
        p = make_params(1.4 * LAMBDA_C, 0.3 * LAMBDA_C, phi=math.pi / 4)
        alphas = sp_candidate_alphas(p)
        assert alphas[0] == -alphas[1]
        specs = []
        energies = []
        for a in alphas:
            op, _ = order_params_branches(a, p)[0]
            energies.append(mean_field_energy(op.alpha, op.beta1, op.beta2, p))
            specs.append(np.sort(hb_spectrum(build_ns_form(p, op)).frequencies.real))
        assert energies[0] == pytest.approx(energies[1], abs=1e-13)
        assert np.allclose(specs[0], specs[1], atol=1e-9)

    def test_enp_coexistence_exists_strong_corotating(self):
        # phi = 7 pi / 16: stable empty-cavity states beyond the boundary
        phi = 7 * math.pi / 16
        found = 0
        for l1 in np.linspace(0.2, 1.4, 9):
            for l2 in np.linspace(0.2, 1.4, 9):
                pt = classify_closed(make_params(l1, l2, phi=phi))
                if Phase.ENP in pt.stable_phases and \
                        (Phase.SP1 in pt.stable_phases or Phase.SP2 in pt.stable_phases):
                    found += 1
        assert found > 0

    def test_norm_swap_crossing_to_enp(self):
        # soft-mode symplectic norm flips sign from NP to e-NP along a
        # radial cut at fixed coupling ratio
        phi = 7 * math.pi / 16
        ratio = 0.41
        def point(lr):
            l1 = lr / math.sqrt(1 + ratio ** 2)
            return make_params(l1, ratio * l1, phi=phi)
        inside = hb_spectrum(_np_form(point(0.7)))
        outside = hb_spectrum(_np_form(point(1.3)))
        assert np_boundary_residual(point(0.7)) < 0 < np_boundary_residual(point(1.3))
        assert inside.is_real and outside.is_real
        assert soft_mode_norm(inside) == 1.0
        assert soft_mode_norm(outside) == -1.0


class TestSweep:
    def test_two_point_grid_straddles_threshold(self):
        grid = GridSpec(axes=(GridAxis("lambda1", 0.5, 1.2, 2),))
        ds = sweep_closed(grid, make_params(0.0, 0.0, phi=math.pi / 4))
        assert [r["phases"] for r in ds.rows] == ["NP", "SP1"]
        assert ds.n_failed == 0

    def test_u1_line_carries_both_sp_labels(self):
        p = make_params(1.2, 1.2, phi=math.pi / 4)
        pt = classify_closed(p)
        assert {Phase.SP1, Phase.SP2} <= pt.stable_phases

    def test_empty_grid(self):
        grid = GridSpec(axes=(GridAxis("lambda1", 0.0, 1.0, 0),))
        ds = sweep_closed(grid, make_params())
        assert ds.rows == [] and ds.n_failed == 0

    def test_row_fields(self):
        row = closed_row(make_params(1.5 * LAMBDA_C, 0.5 * LAMBDA_C, phi=math.pi / 4))
        assert row["phases"] == "SP1"
        assert row["np_stable"] == 0 and row["enp_stable"] == 0
        assert row["alpha_re"] != 0.0
