"""
Unit tests for transforms module.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from ddlab.transforms import (
    LOG,
    SUB,
    SUPER,
    CutoffParams,
    Regime,
    cutoff_A,
    heaviside_kernel,
    in_domain,
    phi,
    psi,
    psi_prime_abs,
    smoothed_heaviside,
)


class TestRegime:
    """Tests for Regime classification."""

    @pytest.mark.parametrize("m,kind,increasing", [(0.5, SUB, True), (1.0, LOG, True), (2.0, SUPER, False)])
    def test_kind(self, m, kind, increasing):
        """Test the regime follows m."""
        r = Regime(m)
        assert r.kind == kind
        assert r.increasing is increasing

    @pytest.mark.parametrize("m", [0.0, -1.0, math.inf, math.nan])
    def test_invalid_m(self, m):
        """Test that non-positive or non-finite m is rejected."""
        with pytest.raises(ValueError):
            Regime(m)


class TestCutoffParams:
    """Tests for CutoffParams."""

    def test_band(self):
        """Test the band is [eps^m, (K + eps)^m]."""
        c = CutoffParams(0.25, 0.75)
        assert c.band(Regime(2.0)) == pytest.approx((0.0625, 1.0))

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_invalid_epsilon(self, eps):
        """Test eps must lie in (0, 1]."""
        with pytest.raises(ValueError, match="epsilon"):
            CutoffParams(eps, 1.0)

    def test_invalid_K(self):
        """Test K must be finite and non-negative."""
        with pytest.raises(ValueError):
            CutoffParams(0.1, -1.0)


class TestPhiPsi:
    """Tests for the substitution and its inverse."""

    def test_known_values(self):
        """Test closed forms in each regime."""
        assert phi(4.0, Regime(0.5)) == pytest.approx(4.0)
        assert phi(math.e, Regime(1.0)) == pytest.approx(1.0)
        assert phi(0.5, Regime(2.0)) == pytest.approx(2.0)

    def test_scalar_in_float_out(self):
        """Test scalar inputs give Python floats."""
        assert isinstance(phi(2.0, Regime(0.5)), float)
        assert isinstance(psi(2.0, Regime(0.5)), float)
        assert isinstance(phi(np.array([2.0]), Regime(0.5)), np.ndarray)

    @settings(max_examples=200, deadline=None)
    @given(
        st.sampled_from([0.2, 0.5, 0.9, 1.0, 1.5, 3.0]),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_psi_inverts_phi(self, m, u):
        """Test Psi(Phi(u)) == u."""
        r = Regime(m)
        assert psi(phi(u, r), r) == pytest.approx(u, rel=1e-9)

    def test_monotonicity(self):
        """Test Phi is increasing for m <= 1 and decreasing for m > 1."""
        u = np.linspace(0.1, 5.0, 50)
        for m in (0.5, 1.0, 2.0):
            r = Regime(m)
            d = np.diff(phi(u, r))
            assert np.all(d > 0) if r.increasing else np.all(d < 0)

    def test_phi_rejects_zero(self):
        """Test Phi is singular at u = 0."""
        with pytest.raises(ValueError, match="u > 0"):
            phi(np.array([1.0, 0.0]), Regime(0.5))

    def test_psi_domain(self):
        """Test Psi rejects v <= 0 except in the log regime."""
        assert not in_domain(-1.0, Regime(0.5))
        assert in_domain(-1.0, Regime(1.0))
        with pytest.raises(ValueError, match="domain"):
            psi(-1.0, Regime(2.0))
        assert psi(-1.0, Regime(1.0)) == pytest.approx(math.exp(-1.0))

    @pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
    def test_psi_prime_is_u_to_m(self, m):
        """Test |Psi'(v)| = u^m against a finite difference."""
        r = Regime(m)
        v = phi(1.7, r)
        step = 1e-6
        numeric = abs(psi(v + step, r) - psi(v - step, r)) / (2 * step)
        assert psi_prime_abs(v, r) == pytest.approx(1.7**m)
        assert numeric == pytest.approx(1.7**m, rel=1e-6)


class TestCutoff:
    """Tests for the cutoff coefficient A."""

    @pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
    def test_stays_in_band(self, m):
        """Test A lies in [eps^m, (K + eps)^m] for every v."""
        r = Regime(m)
        c = CutoffParams(0.1, 2.0)
        low, high = c.band(r)
        v = np.linspace(-50.0, 50.0, 1001)
        a = cutoff_A(v, r, c)

        assert np.all(np.isfinite(a))
        assert np.all(a >= low) and np.all(a <= high)

    def test_identity_inside_band(self):
        """Test A = |Psi'| where u lies in [eps, K + eps]."""
        r = Regime(0.5)
        c = CutoffParams(0.1, 1.0)
        v = phi(0.5, r)
        assert cutoff_A(v, r, c) == pytest.approx(0.5**0.5)

    def test_out_of_domain_edges(self):
        """Test out-of-domain v goes to the lower bound for m < 1, upper for m > 1."""
        c = CutoffParams(0.1, 1.0)
        assert cutoff_A(-1.0, Regime(0.5), c) == pytest.approx(0.1**0.5)
        assert cutoff_A(-1.0, Regime(2.0), c) == pytest.approx(1.1**2)


class TestHeaviside:
    """Tests for the smoothed Heaviside function."""

    def test_kernel_has_unit_mass_on_half_line(self):
        """Test h_eps integrates to 1 over [0, eps]."""
        eps = 0.2
        s = np.linspace(0.0, eps, 20001)
        assert trapezoid(heaviside_kernel(s, eps), s) == pytest.approx(1.0, rel=1e-6)

    def test_values(self):
        """Test H_eps at the breakpoints."""
        eps = 0.5
        assert smoothed_heaviside(-1.0, eps) == 0.0
        assert smoothed_heaviside(0.0, eps) == 0.0
        assert smoothed_heaviside(0.25, eps) == pytest.approx(0.75)
        assert smoothed_heaviside(eps, eps) == pytest.approx(1.0)
        assert smoothed_heaviside(3.0, eps) == 1.0

    def test_monotone(self):
        """Test H_eps is nondecreasing."""
        t = np.linspace(-1.0, 1.0, 401)
        assert np.all(np.diff(smoothed_heaviside(t, 0.3)) >= 0.0)

    def test_rejects_nonpositive_eps(self):
        """Test eps must be positive."""
        with pytest.raises(ValueError):
            smoothed_heaviside(0.1, 0.0)
        with pytest.raises(ValueError):
            heaviside_kernel(0.1, -1.0)
