"""Geometry of the phase/beam product manifold."""

import numpy as np
import pytest

from rispower.manifold import (
    ProductPoint,
    RetractionError,
    TangentVector,
    inner_product,
    norm,
    point_difference_sq,
    project_tangent,
    random_point,
    random_tangent,
    retract,
    riemannian_gradient,
    zero_tangent,
)


def make_point(phases, beams):
    return ProductPoint(np.asarray(phases, dtype=complex), np.asarray(beams, dtype=complex))


W1 = np.array([[1.0 + 0j]])  # trivial 1x1 beam block for circle-only cases


class TestInnerProduct:
    def test_unit_tangent(self):
        x = make_point([1.0], W1)
        a = TangentVector(np.array([1j]), np.zeros((1, 1), complex), x)
        assert inner_product(a, a) == pytest.approx(1.0)

    def test_zero_vector(self):
        x = make_point([1.0], W1)
        z = zero_tangent(x)
        rng = np.random.default_rng(1)
        b = random_tangent(x, rng)
        assert inner_product(z, b) == 0.0

    def test_two_unit_entries(self):
        x = make_point([1.0, 1.0], [[1.0], [0.0]])
        a = TangentVector(np.array([1j, -1j]), np.zeros((2, 1), complex), x)
        assert inner_product(a, a) == pytest.approx(2.0)

    def test_shape_mismatch_raises(self):
        x = make_point([1.0], W1)
        y = make_point([1.0, 1.0], [[1.0], [0.0]])
        a = zero_tangent(x)
        b = zero_tangent(y)
        with pytest.raises(ValueError):
            inner_product(a, b)

    def test_symmetric_bilinear(self):
        rng = np.random.default_rng(2)
        x = random_point(5, 3, 2, rng)
        a, b = random_tangent(x, rng), random_tangent(x, rng)
        assert inner_product(a, b) == pytest.approx(inner_product(b, a))
        two_a = TangentVector(2 * a.d_phases, 2 * a.d_beams, x)
        assert inner_product(two_a, b) == pytest.approx(2 * inner_product(a, b))


class TestProjection:
    def test_circle_removes_radial_part(self):
        x = make_point([1.0], W1)
        v = project_tangent(x, np.array([2.0 + 3.0j]), np.zeros((1, 1), complex))
        np.testing.assert_allclose(v.d_phases, [3.0j])

    def test_already_tangent_unchanged(self):
        rng = np.random.default_rng(3)
        x = random_point(6, 4, 2, rng)
        v = random_tangent(x, rng)
        w = project_tangent(x, v.d_phases, v.d_beams)
        np.testing.assert_allclose(w.d_phases, v.d_phases, atol=1e-14)
        np.testing.assert_allclose(w.d_beams, v.d_beams, atol=1e-14)

    def test_oblique_removes_real_diagonal(self):
        x = make_point([1.0], [[1.0], [0.0]])
        v = project_tangent(x, np.zeros(1, complex), np.array([[1.0 + 1.0j], [1.0]]))
        np.testing.assert_allclose(v.d_beams, [[1.0j], [1.0]])

    def test_riemannian_gradient_zero_and_radial(self):
        x = make_point([1.0], W1)
        g = riemannian_gradient(x, np.zeros(1, complex), np.zeros((1, 1), complex))
        assert norm(g) == 0.0
        g = riemannian_gradient(x, np.array([5.0 + 0j]), np.zeros((1, 1), complex))
        np.testing.assert_allclose(g.d_phases, [0.0], atol=1e-15)
        g = riemannian_gradient(x, np.array([1.0 + 2.0j]), np.zeros((1, 1), complex))
        np.testing.assert_allclose(g.d_phases, [2.0j])


class TestRetraction:
    def test_circle_formula(self):
        x = make_point([1.0], W1)
        v = TangentVector(np.array([1.0j]), np.zeros((1, 1), complex), x)
        y = retract(x, v, 1.0)
        np.testing.assert_allclose(y.phases, [(1 + 1j) / np.sqrt(2)])

    def test_zero_step_is_identity(self):
        rng = np.random.default_rng(4)
        x = random_point(5, 3, 2, rng)
        v = random_tangent(x, rng)
        y = retract(x, v, 0.0)
        assert y is x

    def test_beam_column_renormalized(self):
        x = make_point([1.0], [[1.0], [0.0]])
        v = TangentVector(np.zeros(1, complex), np.array([[0.0], [1.0 + 0j]]), x)
        y = retract(x, v, 1.0)
        np.testing.assert_allclose(y.beams[:, 0], [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_degenerate_retraction_raises(self):
        x = make_point([1.0], W1)
        v = TangentVector(np.array([-1.0 + 0j]), np.zeros((1, 1), complex), x)
        with pytest.raises(RetractionError):
            retract(x, v, 1.0)


class TestManifoldProperties:
    """Randomized property suite over many points."""

    N_POINTS = 1000

    def test_geometry_suite(self):
        rng = np.random.default_rng(0)
        worst_idem = worst_orth = worst_invariant = worst_tangency = 0.0
        for _ in range(self.N_POINTS):
            x = random_point(6, 4, 2, rng)
            amb_p = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            amb_b = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
            v = project_tangent(x, amb_p, amb_b)

            # tangency residuals
            worst_tangency = max(
                worst_tangency,
                np.max(np.abs(np.real(np.conj(v.d_phases) * x.phases))),
                np.max(np.abs(np.real(np.sum(np.conj(x.beams) * v.d_beams, axis=0)))),
            )
            # idempotence
            w = project_tangent(x, v.d_phases, v.d_beams)
            worst_idem = max(
                worst_idem,
                np.max(np.abs(w.d_phases - v.d_phases)),
                np.max(np.abs(w.d_beams - v.d_beams)),
            )
            # residual orthogonal to the projection
            resid = TangentVector(amb_p - v.d_phases, amb_b - v.d_beams, x)
            worst_orth = max(worst_orth, abs(inner_product(v, resid)))
            # retraction stays on the manifold
            y = retract(x, v, rng.uniform(0.1, 2.0))
            worst_invariant = max(
                worst_invariant,
                np.max(np.abs(np.abs(y.phases) - 1.0)),
                np.max(np.abs(np.linalg.norm(y.beams, axis=0) - 1.0)),
            )
        assert worst_tangency < 1e-10
        assert worst_idem < 1e-12
        assert worst_orth < 1e-10
        assert worst_invariant < 1e-12

    def test_retraction_first_order(self):
        rng = np.random.default_rng(7)
        for h in (1e-4, 1e-5):
            worst = 0.0
            for _ in range(200):
                x = random_point(5, 3, 2, rng)
                v = random_tangent(x, rng)
                y = retract(x, v, h)
                fd_p = (y.phases - x.phases) / h
                fd_b = (y.beams - x.beams) / h
                err = np.sqrt(
                    np.linalg.norm(fd_p - v.d_phases) ** 2
                    + np.linalg.norm(fd_b - v.d_beams) ** 2
                )
                worst = max(worst, err / norm(v))
            assert worst < 1e-3

    def test_point_difference(self):
        rng = np.random.default_rng(8)
        x = random_point(4, 3, 2, rng)
        assert point_difference_sq(x, x) == 0.0
        y = random_point(4, 3, 2, rng)
        expect = np.linalg.norm(x.phases - y.phases) ** 2 + np.linalg.norm(x.beams - y.beams) ** 2
        assert point_difference_sq(x, y) == pytest.approx(expect)

    def test_validate_rejects_off_manifold(self):
        bad = ProductPoint(np.array([2.0 + 0j]), W1.copy())
        with pytest.raises(ValueError):
            bad.validate()
        bad = ProductPoint(np.array([1.0 + 0j]), np.array([[2.0 + 0j]]))
        with pytest.raises(ValueError):
            bad.validate()
