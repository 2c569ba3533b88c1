import math

import numpy as np
import pytest

from conftest import LAMBDA_C, make_params
from vdicke.errors import (InconsistentRaman, ValidationError, ZeroDetuning)
from vdicke.params import (ModelParams, RamanInputs, SymmetryClass,
                           classify_symmetry, derived_scalars,
                           omega_scaled_literal, raman_map)


class TestModelParams:
    def test_validation(self):
        with pytest.raises(ValidationError):
            make_params(omega=-1.0)
        with pytest.raises(ValidationError):
            make_params(omega0=0.0)
        with pytest.raises(ValidationError):
            make_params(kappa=-0.1)
        with pytest.raises(ValidationError):
            make_params(lambda1=-0.2)
        with pytest.raises(ValidationError):
            make_params(n_atoms=0.0)

    def test_phi_normalized_to_half_open_pi(self):
        assert make_params(phi=1.5 * math.pi).phi == pytest.approx(0.5 * math.pi)
        assert make_params(phi=math.pi).phi == 0.0
        assert make_params(phi=-0.25 * math.pi).phi == pytest.approx(0.75 * math.pi)

    def test_reference_frequency_and_normalized(self):
        p = ModelParams(omega=8.0, omega0=2.0, lambda1=2.0, lambda2=1.0,
                        phi=0.3, kappa=0.4)
        assert p.reference_frequency == pytest.approx(4.0)
        q = p.normalized()
        assert q.reference_frequency == pytest.approx(1.0)
        assert q.omega == pytest.approx(2.0)
        assert q.lambda1 == pytest.approx(0.5)

    def test_kv_roundtrip(self):
        p = make_params(lambda1=0.123456789012345, kappa=0.1)
        q = ModelParams.from_kv(p.to_kv())
        assert q == p

    def test_kv_diagnostics(self):
        with pytest.raises(ValidationError, match="line 1"):
            ModelParams.from_kv("nonsense\n")
        with pytest.raises(ValidationError, match="unknown field"):
            ModelParams.from_kv("omega = 1\nbogus = 2\n")
        with pytest.raises(ValidationError, match="missing required"):
            ModelParams.from_kv("omega = 1\n")


class TestDerivedScalars:
    def test_b_vanishes_for_balanced_couplings(self):
        for phi in (0.1, 0.4, 1.2, 2.9):
            assert derived_scalars(make_params(1.0, 1.0, phi=phi)).b_param == 0.0

    def test_lambda_c_value(self):
        # omega = 4 omega0 = 2 in reference units
        d = derived_scalars(make_params())
        assert d.lambda_c == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_omega_scaled_magnitude_one_at_phi_zero(self):
        d = derived_scalars(make_params(phi=0.0, kappa=0.1))
        assert abs(d.omega_scaled) == pytest.approx(1.0, abs=1e-14)
        assert d.omega_scaled == pytest.approx(-1.0)

    def test_omega_scaled_endpoints_pair_with_region_areas(self):
        # +1 on the pure co-rotating side (area 0), -1 on the pure
        # counter-rotating side (area 2 pi); fixed by the resolved convention
        assert derived_scalars(make_params(phi=math.pi / 2, kappa=0.3)).omega_scaled \
            == pytest.approx(1.0)
        assert derived_scalars(make_params(phi=0.0, kappa=0.3)).omega_scaled \
            == pytest.approx(-1.0)

    def test_omega_scaled_balanced_point(self):
        p = make_params(phi=math.pi / 4, kappa=0.1)
        x = p.kappa ** 2 + p.omega ** 2 + p.omega0 ** 2
        assert omega_scaled_literal(p) == pytest.approx(-2 * p.omega0 * p.omega / x)
        assert derived_scalars(p).omega_scaled == pytest.approx(2 * p.omega0 * p.omega / x)

    def test_omega_scaled_bounded(self, rng):
        for _ in range(300):
            p = ModelParams(omega=rng.uniform(0.2, 5), omega0=rng.uniform(0.2, 5),
                            lambda1=rng.uniform(0, 2), lambda2=rng.uniform(0, 2),
                            phi=rng.uniform(0, math.pi), kappa=rng.uniform(0, 2))
            assert abs(derived_scalars(p).omega_scaled) <= 1.0 + 1e-12

    def test_swap_symmetry(self, rng):
        for _ in range(50):
            l1, l2 = rng.uniform(0, 2, 2)
            phi = rng.uniform(0, math.pi / 2)
            d1 = derived_scalars(make_params(l1, l2, phi=phi))
            d2 = derived_scalars(make_params(l2, l1, phi=math.pi / 2 - phi))
            assert d2.b_param == pytest.approx(-d1.b_param, abs=1e-12)
            assert d2.l_param == pytest.approx(d1.l_param)
            assert d2.lambda_r == pytest.approx(d1.lambda_r)

    def test_l_bounds_two_b(self, rng):
        for _ in range(100):
            d = derived_scalars(make_params(rng.uniform(0, 2), rng.uniform(0, 2),
                                            phi=rng.uniform(0, math.pi)))
            assert d.l_param >= 2 * abs(d.b_param) - 1e-12


class TestSymmetry:
    def test_tavis_cummings_case(self):
        p = make_params(1.0, 0.3, phi=math.pi / 2)
        assert classify_symmetry(p) is SymmetryClass.U1_TAVIS_CUMMINGS

    def test_balanced_case(self):
        p = make_params(0.7, 0.7, phi=math.pi / 3)
        assert classify_symmetry(p) is SymmetryClass.U1_BALANCED

    def test_generic_case(self):
        p = make_params(1.0, 0.41, phi=math.pi / 3)
        assert classify_symmetry(p) is SymmetryClass.Z2xZ2_GENERIC

    def test_tc_takes_precedence(self):
        p = make_params(0.5, 0.5, phi=math.pi / 2)
        assert classify_symmetry(p) is SymmetryClass.U1_TAVIS_CUMMINGS

    def test_tolerance_is_configurable(self):
        p = make_params(0.5, 0.5 + 1e-6, phi=1.0)
        assert classify_symmetry(p) is SymmetryClass.Z2xZ2_GENERIC
        assert classify_symmetry(p, tol=1e-4) is SymmetryClass.U1_BALANCED
        with pytest.raises(ValidationError):
            classify_symmetry(p, tol=0.0)


def _consistent_raman(omega_s1=1.0, omega_s2=1.0, omega_r1=1.0, omega_r2=1.0,
                      **kw):
    """Raman inputs satisfying the Stark flattening and level matching."""
    base = dict(
        rabi_s1=omega_s1, rabi_s2=omega_s2, rabi_r1=omega_r1, rabi_r2=omega_r2,
        delta_s1=200.0, delta_s2=200.0, delta_r1=100.0, delta_r2=100.0,
        g_r=1.0, g_s=1.0, n_atoms=100.0, omega_cavity_bare=2.0,
        zeeman_1=0.5 - omega_s1 ** 2 / 800.0, zeeman_2=0.5 - omega_s2 ** 2 / 800.0,
    )
    base.update(kw)
    return RamanInputs(**base)


class TestRamanMap:
    def test_equal_weights_gives_pi_over_4(self):
        # per channel: lambda_s = lambda_r requires rabi_s g_s / delta_s =
        # rabi_r g_r / delta_r, i.e. rabi_s = 2 rabi_r here
        r = _consistent_raman(omega_s1=2.0, omega_s2=2.0,
                              zeeman_1=0.5 - 4.0 / 800.0, zeeman_2=0.5 - 4.0 / 800.0)
        p = raman_map(r)
        assert p.phi == pytest.approx(math.pi / 4, abs=1e-12)
        assert p.lambda1 == pytest.approx(p.lambda2)

    def test_pure_counter_rotating_channel(self):
        r = _consistent_raman(omega_s1=0.0, omega_s2=0.0,
                              zeeman_1=0.5, zeeman_2=0.5)
        p = raman_map(r)
        assert p.phi == 0.0

    def test_zero_detuning(self):
        with pytest.raises(ZeroDetuning):
            raman_map(_consistent_raman(delta_s1=0.0))

    def test_inconsistent_channels(self):
        # different mixing per channel: rabi_s2 != rabi_s1 while r-legs equal
        r = _consistent_raman(omega_s1=2.0, omega_s2=0.5,
                              zeeman_1=0.5 - 4.0 / 800.0,
                              zeeman_2=0.5 - 0.25 / 800.0)
        with pytest.raises(InconsistentRaman):
            raman_map(r)

    def test_stark_condition_enforced(self):
        with pytest.raises(InconsistentRaman):
            raman_map(_consistent_raman(delta_r2=90.0))

    def test_level_matching_enforced(self):
        with pytest.raises(InconsistentRaman):
            raman_map(_consistent_raman(zeeman_2=0.6))

    def test_experimental_scale_couplings(self):
        # MHz-scale drives, GHz detunings, 1e6 atoms: collective couplings
        # land at MHz scale and reach the superradiant threshold
        mhz = 2 * math.pi * 1e6
        ghz = 1e3 * mhz
        g_r, g_s = 0.25 * mhz, 0.14 * mhz
        d_r = 1.0 * ghz
        d_s = 2 * g_s / (g_r / d_r)        # Stark flattening
        rabi = 10.0 * mhz
        n = 1e6
        shift = 3 * n * g_r / d_r
        r = RamanInputs(rabi_s1=rabi, rabi_s2=rabi, rabi_r1=rabi, rabi_r2=rabi,
                        delta_s1=d_s, delta_s2=d_s, delta_r1=d_r, delta_r2=d_r,
                        g_r=g_r, g_s=g_s, n_atoms=n,
                        omega_cavity_bare=2.0 * mhz - shift,
                        zeeman_1=1.0 * mhz - rabi ** 2 / (4 * d_s),
                        zeeman_2=1.0 * mhz - rabi ** 2 / (4 * d_s),
                        kappa=1.0 * mhz)
        assert r.adiabaticity_ratio() > 50
        p = raman_map(r)
        assert 0.1 * mhz < p.lambda1 < 100 * mhz
        lam_c = derived_scalars(p).lambda_c
        assert math.hypot(p.lambda1, p.lambda2) > lam_c
