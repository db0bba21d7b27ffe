"""
Unit tests for grid module.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddlab.grid import (
    FACE,
    ExponentField,
    Grid,
    ScalarField,
    divergence,
    face_exponent,
    gradient,
    integrate,
    log_holder_estimate,
    quadrature_weights,
)


class TestGrid:
    """Tests for Grid dataclass."""

    def test_spacing_and_nodes(self):
        """Test node spacing and coordinates."""
        grid = Grid(0.0, 1.0, 11)

        assert grid.h == pytest.approx(0.1)
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == pytest.approx(1.0)
        assert grid.faces.size == 10
        assert grid.faces[0] == pytest.approx(0.05)

    def test_refine_halves_spacing(self):
        """Test refine keeps the interval and halves h."""
        grid = Grid(-1.0, 1.0, 21)
        fine = grid.refine()

        assert fine.n == 41
        assert fine.h == pytest.approx(grid.h / 2)
        assert np.allclose(fine.nodes[::2], grid.nodes)

    @pytest.mark.parametrize("a,b,n", [(0.0, 1.0, 2), (1.0, 1.0, 5), (1.0, 0.0, 5), (0.0, math.inf, 5)])
    def test_invalid_grids(self, a, b, n):
        """Test that degenerate grids are rejected."""
        with pytest.raises(ValueError):
            Grid(a, b, n)

    def test_dict_round_trip(self):
        """Test to_dict/from_dict."""
        grid = Grid(-2.0, 3.0, 17)
        assert Grid.from_dict(grid.to_dict()) == grid


class TestScalarField:
    """Tests for ScalarField."""

    def test_wrong_length(self):
        """Test that the value count must match the centering."""
        grid = Grid(0.0, 1.0, 5)
        with pytest.raises(ValueError, match="needs 5 values"):
            ScalarField(grid, [0.0, 1.0])
        with pytest.raises(ValueError):
            ScalarField(grid, np.zeros(5), FACE)

    def test_non_finite_rejected(self):
        """Test that NaN values are rejected."""
        grid = Grid(0.0, 1.0, 3)
        with pytest.raises(ValueError, match="finite"):
            ScalarField(grid, [0.0, math.nan, 0.0])

    def test_values_are_read_only(self):
        """Test that a field does not share or expose writable storage."""
        grid = Grid(0.0, 1.0, 3)
        source = np.array([1.0, 2.0, 3.0])
        f = ScalarField(grid, source)
        source[0] = 99.0

        assert f.values[0] == 1.0
        with pytest.raises(ValueError):
            f.values[0] = 5.0

    def test_arithmetic(self):
        """Test field arithmetic and scalar broadcasting."""
        grid = Grid(0.0, 1.0, 3)
        f = ScalarField(grid, [1.0, 2.0, 3.0])
        g = ScalarField.constant(grid, 2.0)

        assert np.allclose((f + g).values, [3.0, 4.0, 5.0])
        assert np.allclose((f - 1).values, [0.0, 1.0, 2.0])
        assert np.allclose((2 * f).values, [2.0, 4.0, 6.0])
        assert np.allclose((-f).abs().values, f.values)

    def test_incompatible_grids(self):
        """Test that fields on different grids do not combine."""
        f = ScalarField.constant(Grid(0.0, 1.0, 3), 1.0)
        g = ScalarField.constant(Grid(0.0, 1.0, 4), 1.0)
        with pytest.raises(ValueError, match="different grids"):
            f + g


class TestExponentField:
    """Tests for ExponentField."""

    def test_derived_extremes(self):
        """Test p_minus, p_plus and is_constant."""
        grid = Grid(0.0, 1.0, 11)
        p = ExponentField.linear(grid, 1.5, 3.0)

        assert p.p_minus == pytest.approx(1.5)
        assert p.p_plus == pytest.approx(3.0)
        assert not p.is_constant
        assert ExponentField.constant(grid, 2.0).is_constant

    def test_rejects_p_at_most_one(self):
        """Test that p <= 1 is rejected."""
        with pytest.raises(ValueError, match="1 < p"):
            ExponentField.constant(Grid(0.0, 1.0, 5), 1.0)

    def test_log_holder_constant_is_zero(self):
        """Test that a constant exponent has zero modulus."""
        p = ExponentField.constant(Grid(0.0, 1.0, 21), 2.5)
        assert log_holder_estimate(p) == 0.0
        assert p.log_holder_modulus == 0.0

    def test_log_holder_linear_is_bounded(self):
        """Test that a Lipschitz exponent has a modest modulus."""
        p = ExponentField.linear(Grid(0.0, 1.0, 101), 1.5, 2.5)
        # |p(x) - p(y)| log(1/|x-y|) = r log(1/r) <= 1/e for slope 1
        assert 0.0 < log_holder_estimate(p) <= 1.0 / math.e + 1e-12

    def test_face_exponent_is_mean(self):
        """Test face exponents average the adjacent nodes."""
        grid = Grid(0.0, 1.0, 3)
        pf = face_exponent(ExponentField(grid, [2.0, 3.0, 5.0]))

        assert pf.centering == FACE
        assert np.allclose(pf.p, [2.5, 4.0])
        assert face_exponent(pf) is pf


class TestCalculus:
    """Tests for gradient, divergence and quadrature."""

    def test_gradient_of_linear(self):
        """Test gradient of a linear function is its slope."""
        grid = Grid(0.0, 2.0, 9)
        g = gradient(ScalarField.from_function(grid, lambda x: 3.0 * x + 1.0))

        assert g.centering == FACE
        assert np.allclose(g.values, 3.0)

    def test_gradient_needs_nodal(self):
        """Test gradient refuses a face field."""
        grid = Grid(0.0, 1.0, 4)
        with pytest.raises(ValueError):
            gradient(ScalarField.constant(grid, 1.0, FACE))

    def test_divergence_of_gradient_of_quadratic(self):
        """Test the second difference of x^2 is 2 at interior nodes."""
        grid = Grid(-1.0, 1.0, 21)
        lap = divergence(gradient(ScalarField.from_function(grid, lambda x: x**2)))

        assert np.allclose(lap.values[1:-1], 2.0)
        assert lap.values[0] == 0.0 and lap.values[-1] == 0.0

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-10.0, 10.0), min_size=6, max_size=6),
        st.lists(st.floats(-10.0, 10.0), min_size=5, max_size=5),
    )
    def test_summation_by_parts(self, g_values, phi_inner):
        """Test divergence is minus the adjoint of gradient on zero-boundary fields."""
        grid = Grid(0.0, 1.0, 7)
        g = ScalarField(grid, g_values, FACE)
        phi = ScalarField(grid, [0.0] + phi_inner + [0.0])

        lhs = np.sum(grid.h * g.values * gradient(phi).values)
        rhs = -np.sum(grid.h * divergence(g).values * phi.values)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_trapezoid_weights(self):
        """Test nodal weights are trapezoid and integrate linear functions exactly."""
        grid = Grid(0.0, 1.0, 5)
        w = quadrature_weights(grid)

        assert w[0] == pytest.approx(grid.h / 2)
        assert w.sum() == pytest.approx(1.0)
        assert integrate(ScalarField.from_function(grid, lambda x: x)) == pytest.approx(0.5)

    def test_midpoint_rule(self):
        """Test face fields integrate with the midpoint rule."""
        grid = Grid(0.0, 2.0, 5)
        assert integrate(ScalarField.constant(grid, 3.0, FACE)) == pytest.approx(6.0)
