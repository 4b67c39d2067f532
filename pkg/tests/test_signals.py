"""Tests for the analytic test densities."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import ndtr

from wavedens.signals import (
    Bumps,
    Gauss,
    Uniform01,
    mixture_gd,
    mixture_hk,
    signal_by_name,
    true_coefficient,
    true_level_values,
    true_sigma_sq,
)

ALL_SIGNALS = [
    Uniform01(),
    Gauss(0.5, 0.25),
    mixture_gd(10),
    mixture_gd(70),
    mixture_hk(2),
    mixture_hk(16),
    Bumps(),
]


@pytest.mark.parametrize("signal", ALL_SIGNALS, ids=lambda s: s.name)
def test_unit_mass(signal):
    # trapezoid over a finite window plus the analytic mass outside it;
    # signals with kinks on a narrow support get the finer grid
    lo, hi = signal.effective_support
    lo, hi = max(lo, -60.0), min(hi, 130.0)
    step = 2.0 ** -16 if hi - lo < 3 else 2.0 ** -12
    x = np.arange(lo, hi, step)
    inside = np.trapezoid(signal.pdf(x), x)
    assert abs(inside + signal.mass_outside(float(x[0]), float(x[-1])) - 1.0) < 1e-6


@pytest.mark.parametrize("signal", ALL_SIGNALS, ids=lambda s: s.name)
def test_effective_support_mass(signal):
    lo, hi = signal.effective_support
    assert signal.mass_outside(lo, hi) <= 1e-9


@pytest.mark.parametrize("signal", ALL_SIGNALS, ids=lambda s: s.name)
def test_sampler_deterministic(signal):
    a = signal.sample(12345, 200).observations
    b = signal.sample(12345, 200).observations
    assert np.array_equal(a, b)
    c = signal.sample(12346, 200).observations
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("signal", ALL_SIGNALS, ids=lambda s: s.name)
def test_cdf_matches_pdf_quadrature(signal):
    lo, hi = signal.effective_support
    lo, hi = max(lo, -30.0), min(hi, 100.0)
    x = np.arange(lo, hi, 2.0 ** -11)
    mass = np.cumsum(signal.pdf(x)) * (x[1] - x[0])
    got = signal.cdf(x) - signal.cdf(x[0])
    assert np.max(np.abs(mass - got)) < 5e-3


class TestUniform:
    def test_pdf_values(self):
        u = Uniform01()
        assert u.pdf(np.array([0.5]))[0] == 1.0
        assert u.pdf(np.array([-0.1]))[0] == 0.0
        assert u.pdf(np.array([1.1]))[0] == 0.0

    def test_samples_in_unit_interval(self):
        s = Uniform01().sample(7, 1000).observations
        assert np.all((s >= 0.0) & (s < 1.0))


class TestGaussAndMixtures:
    def test_gd_pdf_midpoint_value(self):
        # halfway between the modes of gd(10): 0.5 phi(5) + 0.5 phi(-5)
        phi5 = math.exp(-12.5) / math.sqrt(2 * math.pi)
        assert_allclose(mixture_gd(10).pdf(np.array([5.0]))[0], phi5, rtol=1e-12)
        assert_allclose(phi5, 1.4867195147342979e-06)

    def test_gd_component_proportions(self):
        # classify by the midpoint: binomial fluctuation within 3 s.e.
        n = 10 ** 4
        s = mixture_gd(70).sample(99, n).observations
        upper = int(np.sum(s > 35.0))
        assert abs(upper - n / 2) <= 3 * math.sqrt(n * 0.25)

    def test_hk_heavy_tail_range(self):
        # a heavy-tailed draw of this size is expected to leave [-50, 50]
        s = mixture_hk(2).sample(4, 10 ** 4).observations
        assert np.max(np.abs(s)) > 50.0

    def test_hk_weights_sum_validated(self):
        sig = mixture_hk(4)
        assert_allclose(np.sum(sig.weights), 1.0)

    def test_student_sampler_matches_cdf(self):
        sig = mixture_hk(8)
        s = sig.sample(5, 20000).observations
        for q in (-2.0, -0.5, 0.5, 1.5):
            emp = np.mean(s <= q)
            assert abs(emp - sig.cdf(np.array([q]))[0]) < 0.02

    def test_sample_too_small(self):
        with pytest.raises(ValueError):
            Gauss(0.0, 1.0).sample(1, 1)


class TestBumps:
    def test_zero_outside_unit_interval(self):
        b = Bumps()
        assert b.pdf(np.array([1.2]))[0] == 0.0
        assert b.pdf(np.array([-0.2]))[0] == 0.0

    def test_normalizer_close_to_conventional_value(self):
        b = Bumps()
        assert abs(b.normalizer - 0.284) / 0.284 < 0.02

    def test_cdf_closed_form_vs_quadrature(self):
        b = Bumps()
        x = np.arange(0.0, 1.0, 2.0 ** -16)
        mass = np.cumsum(b.pdf(x)) * (x[1] - x[0])
        assert abs(mass[-1] - b.cdf(np.array([1.0]))[0]) < 1e-3

    def test_samples_in_unit_interval(self):
        s = Bumps().sample(3, 4000).observations
        assert np.all((s >= 0.0) & (s <= 1.0))

    def test_sample_histogram_tracks_pdf(self):
        b = Bumps()
        s = b.sample(17, 40000).observations
        # mass in a window around the widest bump
        window = (0.35, 0.45)
        want = b.cdf(np.array([window[1]]))[0] - b.cdf(np.array([window[0]]))[0]
        got = np.mean((s >= window[0]) & (s <= window[1]))
        assert abs(got - want) < 0.01

    def test_rejection_cap_trips_on_broken_envelope(self):
        b = Bumps()
        b._envelope = 1e9  # acceptance probability collapses
        with pytest.raises(RuntimeError, match="proposals"):
            b.sample(0, 100)


class TestTrueCoefficients:
    def test_uniform_detail_coefficients_vanish(self, haar):
        assert true_coefficient(Uniform01(), haar, (3, 2)) == 0.0

    def test_uniform_father_coefficient(self, haar):
        assert true_coefficient(Uniform01(), haar, (-1, 0)) == 1.0

    def test_gauss_symmetry_and_plug_in(self, haar):
        sig = Gauss(0.5, 0.25)
        got = true_coefficient(sig, haar, (0, 0))
        want = (ndtr(0.0) - ndtr(-2.0)) - (ndtr(2.0) - ndtr(0.0))
        assert_allclose(got, want, atol=1e-15)
        assert abs(got) < 1e-12

    def test_uniform_sigma_values(self, haar):
        assert true_sigma_sq(Uniform01(), haar, (0, 0)) == 1.0
        assert true_sigma_sq(Uniform01(), haar, (-1, 0)) == 0.0

    @pytest.mark.parametrize("signal", ALL_SIGNALS, ids=lambda s: s.name)
    def test_sigma_nonnegative(self, signal, spline, rng):
        for _ in range(20):
            j = int(rng.integers(-1, 8))
            k = int(rng.integers(-8, 80))
            assert true_sigma_sq(signal, spline, (j, k)) >= 0.0

    def test_level_values_match_scalar_ops(self, spline):
        sig = Gauss(0.5, 0.25)
        ks = np.arange(-4, 9)
        beta, sig_sq = true_level_values(sig, spline, 2, ks)
        for i, k in enumerate(ks):
            assert beta[i] == true_coefficient(sig, spline, (2, int(k)))
            assert sig_sq[i] == true_sigma_sq(sig, spline, (2, int(k)))

    def test_empirical_tracks_true_at_large_n(self, haar, rng):
        # law-of-large-numbers sanity on 50 random cells
        sig = Uniform01()
        n = 10 ** 5
        x = sig.sample(8, n).observations
        for _ in range(50):
            j = int(rng.integers(0, 9))
            k = int(rng.integers(0, 2 ** j))
            vals = (2.0 ** (j / 2.0)) * np.where(
                (2.0 ** j * x - k) < 0.5, 1.0, -1.0) * (
                ((2.0 ** j * x - k) >= 0) & ((2.0 ** j * x - k) <= 1.0))
            beta_hat = float(np.sum(vals)) / n
            beta = true_coefficient(sig, haar, (j, k))
            sigma = math.sqrt(true_sigma_sq(sig, haar, (j, k)))
            assert abs(beta_hat - beta) <= 5.0 * sigma / math.sqrt(n)


class TestSignalRegistry:
    def test_names(self):
        assert signal_by_name("uniform").name == "uniform"
        assert signal_by_name("gauss", mu=0.0, sigma=1.0).name == "gauss(0,1)"
        assert signal_by_name("gd", d=30).name == "gd(30)"
        assert signal_by_name("hk", df=4).name == "hk(4)"
        assert signal_by_name("bumps").name == "bumps"

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown signal"):
            signal_by_name("cauchy")
