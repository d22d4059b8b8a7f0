import numpy as np
import pytest
from scipy.integrate import quad

from mdfc.bath import (
    BathSpec,
    complex_kernel,
    dissipation_kernel,
    dissipation_kernel_quadrature,
    noise_kernel,
    noise_kernel_quadrature,
    spectral_density,
)

BATH = BathSpec(alpha=0.05, omega_c=1.0)


def quad_noise_oracle(tau, bath):
    """Adaptive-quadrature oracle for the T=0 noise kernel (Fourier weight)."""
    f = lambda w: bath.alpha * w * np.exp(-w / bath.omega_c)
    val, _ = quad(f, 0, np.inf, weight="cos", wvar=tau, limit=200)
    return val


def quad_dissipation_oracle(tau, bath):
    f = lambda w: bath.alpha * w * np.exp(-w / bath.omega_c)
    val, _ = quad(f, 0, np.inf, weight="sin", wvar=tau, limit=200)
    return val


class TestSpectralDensity:
    def test_zero_at_origin(self):
        assert spectral_density(0.0, BATH) == 0.0

    def test_maximum_at_cutoff(self):
        bath = BathSpec(0.3, omega_c=2.0)
        w = np.linspace(0.01, 10, 2000)
        j = spectral_density(w, bath)
        assert abs(w[np.argmax(j)] - bath.omega_c) < 0.01

    def test_reference_value(self):
        assert abs(spectral_density(1.0, BATH) - 0.05 * np.exp(-1.0)) < 1e-15
        assert abs(spectral_density(1.0, BATH) - 0.0183939721) < 1e-9

    def test_rejects_negative_frequency(self):
        with pytest.raises(ValueError):
            spectral_density(-0.5, BATH)


class TestNoiseKernel:
    def test_zero_lag_value(self):
        # oracle: integral of alpha w e^{-w/wc} over [0, inf) = alpha wc^2
        assert abs(quad_noise_oracle(0.0, BATH) - BATH.alpha) < 1e-10
        assert abs(noise_kernel(0.0, BATH) - BATH.alpha * BATH.omega_c**2) < 1e-15

    @pytest.mark.parametrize("tau", np.linspace(0.0, 10.0, 20))
    def test_closed_form_against_quadrature_oracle(self, tau):
        scale = BATH.alpha * BATH.omega_c**2
        closed = noise_kernel(tau, BATH)
        assert abs(closed - quad_noise_oracle(tau, BATH)) <= 1e-8 * scale

    def test_even_in_tau(self):
        rng = np.random.default_rng(5)
        for tau in rng.uniform(-5, 5, size=10):
            assert noise_kernel(tau, BATH) == noise_kernel(-tau, BATH)

    @pytest.mark.parametrize("tau", [0.0, 0.3, 1.0, 2.5, 10.0])
    def test_laguerre_path_matches_closed_form(self, tau):
        scale = BATH.alpha * BATH.omega_c**2
        assert abs(
            noise_kernel_quadrature(tau, BATH) - noise_kernel(tau, BATH)
        ) <= 1e-8 * scale


class TestDissipationKernel:
    def test_zero_at_origin(self):
        assert dissipation_kernel(0.0, BATH) == 0.0

    @pytest.mark.parametrize("tau", np.linspace(0.05, 10.0, 20))
    def test_closed_form_against_quadrature_oracle(self, tau):
        scale = BATH.alpha * BATH.omega_c**2
        closed = dissipation_kernel(tau, BATH)
        assert abs(closed - quad_dissipation_oracle(tau, BATH)) <= 1e-8 * scale

    def test_odd_in_tau(self):
        rng = np.random.default_rng(6)
        for tau in rng.uniform(0, 5, size=10):
            assert dissipation_kernel(-tau, BATH) == -dissipation_kernel(tau, BATH)

    @pytest.mark.parametrize("tau", [0.2, 1.0, 4.0])
    def test_laguerre_path_matches_closed_form(self, tau):
        scale = BATH.alpha * BATH.omega_c**2
        assert abs(
            dissipation_kernel_quadrature(tau, BATH) - dissipation_kernel(tau, BATH)
        ) <= 1e-8 * scale


class TestComplexKernel:
    def test_zero_lag(self):
        c = complex_kernel(0.0, BATH)
        assert abs(c - BATH.alpha * BATH.omega_c**2) < 1e-15

    def test_conjugate_flag_flips_imaginary_part(self):
        c = complex_kernel(0.7, BATH)
        cc = complex_kernel(0.7, BATH, conjugate=True)
        assert c.real == cc.real and c.imag == -cc.imag

    def test_unit_lag_value(self):
        # nu(1) = 0 and eta(1) = alpha / 2 for omega_c = 1
        c = complex_kernel(1.0, BATH)
        assert abs(c - 0.025j) < 1e-15


class TestFiniteTemperature:
    def test_integrand_regular_at_small_frequency(self):
        # J(w) coth(beta w / 2) -> 2 alpha / beta as w -> 0
        bath = BathSpec(0.05, 1.0, beta=2.0)
        for w in (1e-6, 1e-10, 1e-14):
            val = spectral_density(w, bath) * (
                1.0 / np.tanh(0.5 * bath.beta * w)
                if 0.5 * bath.beta * w > 1e-4
                else 1.0 / (0.5 * bath.beta * w) + bath.beta * w / 6.0
            )
            assert np.isfinite(val)
            assert abs(val - 2 * bath.alpha / bath.beta) < 1e-5

    def test_hotter_bath_has_bigger_noise(self):
        betas = [0.5, 1.0, 2.0, 5.0, 20.0]
        values = [noise_kernel(0.0, BathSpec(0.05, 1.0, beta=b)) for b in betas]
        assert all(a >= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("tau", [0.0, 0.5, 1.0, 2.0])
    def test_zero_temperature_limit(self, tau):
        cold = BathSpec(0.05, 1.0, beta=1e3)
        assert abs(noise_kernel(tau, cold) - noise_kernel(tau, BATH)) <= 1e-6

    @pytest.mark.parametrize("tau,beta", [(0.0, 1.0), (0.8, 2.0), (2.0, 0.7)])
    def test_thermal_kernel_against_adaptive_quadrature(self, tau, beta):
        bath = BathSpec(0.05, 1.0, beta=beta)

        def integrand(w):
            arg = 0.5 * beta * w
            coth = 1.0 / np.tanh(arg) if arg > 1e-4 else 1.0 / arg + arg / 3.0
            return bath.alpha * w * np.exp(-w) * coth

        ref, _ = quad(integrand, 0, np.inf, weight="cos", wvar=tau, limit=400)
        assert abs(noise_kernel(tau, bath) - ref) <= 1e-8 * bath.alpha


class TestBathSpecValidation:
    def test_rejects_negative_coupling(self):
        with pytest.raises(ValueError):
            BathSpec(-0.1)

    def test_rejects_bad_cutoff(self):
        with pytest.raises(ValueError):
            BathSpec(0.1, omega_c=0.0)

    def test_rejects_bad_beta(self):
        with pytest.raises(ValueError):
            BathSpec(0.1, beta=-1.0)

    def test_zero_temperature_flag(self):
        assert BathSpec(0.1).zero_temperature
        assert not BathSpec(0.1, beta=3.0).zero_temperature
