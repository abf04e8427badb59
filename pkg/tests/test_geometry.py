import numpy as np
import pytest

from casoratiq import jets
from casoratiq.errors import DependencyError, DimensionError, DegenerateMetricError, DomainError
from casoratiq.geometry import (
    MetricChart,
    OrthoFrame,
    chart,
    christoffel,
    complete_frame,
    gram_schmidt,
    mixed_scalar,
    normalized_scalar_curvature,
    riemann,
    scalar_curvature_of_frame,
)
from casoratiq.quaternionic import QSFOracle, quat_units

from conftest import orthonormal_rows


def conformal_chart():
    def g(c):
        f = jets.exp(2.0 * c[0])
        return [[f, 0.0], [0.0, f]]

    return MetricChart(2, ((-2.0, 2.0), (-2.0, 2.0)), g, name="conformal")


class TestChristoffel:
    def test_flat_is_zero(self):
        gam = christoffel(chart("flat:4"), np.array([0.3, -0.2, 1.0, 0.5]))
        assert np.abs(gam).max() == 0.0

    def test_polar(self):
        gam = christoffel(chart("polar"), np.array([2.0, 0.7]))
        # Gamma^r_tt = -r, Gamma^t_rt = 1/r
        assert gam[0, 1, 1] == pytest.approx(-2.0, abs=1e-12)
        assert gam[1, 0, 1] == pytest.approx(0.5, abs=1e-12)
        assert gam[1, 1, 0] == pytest.approx(0.5, abs=1e-12)

    def test_conformal(self):
        gam = christoffel(conformal_chart(), np.array([0.0, 0.4]))
        assert gam[0, 0, 0] == pytest.approx(1.0, abs=1e-12)
        assert gam[0, 1, 1] == pytest.approx(-1.0, abs=1e-12)
        assert gam[1, 0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_in_lower_indices(self):
        gam = christoffel(chart("sphere:2"), np.array([1.2, 0.5]))
        assert np.abs(gam - gam.transpose(0, 2, 1)).max() == 0.0

    @pytest.mark.parametrize("name", ["sphere:1", "half-plane", "polar", "sphere3:1.5"])
    def test_metric_compatibility(self, name):
        # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il at 100 random points
        ch = chart(name)
        rng = np.random.default_rng(101)
        lo = np.array([b[0] for b in ch.domain])
        hi = np.array([b[1] for b in ch.domain])
        for _ in range(100):
            x = lo + (hi - lo) * rng.random(ch.dim)
            G0, G1, _ = ch.metric_jets(x)
            gam = christoffel(ch, x)
            dg = np.transpose(G1, (2, 0, 1))  # dg[k, i, j]
            recon = np.einsum("lki,lj->kij", gam, G0) + np.einsum("lkj,il->kij", gam, G0)
            assert np.abs(dg - recon).max() < 1e-9

    def test_degenerate_metric_raises(self):
        bad = MetricChart(2, ((-1.0, 1.0), (-1.0, 1.0)),
                          lambda c: [[c[0], 0.0], [0.0, 1.0]], name="degenerate")
        with pytest.raises(DegenerateMetricError):
            christoffel(bad, np.array([0.0, 0.0]))


class TestRiemann:
    def test_flat_zero(self):
        cp = riemann(chart("flat:4"), np.full(4, 0.2))
        assert np.abs(cp.riemann).max() == 0.0

    @pytest.mark.parametrize("r", [1.0, 2.0])
    def test_sphere_sectional(self, r):
        ch = chart(f"sphere:{r:g}")
        rng = np.random.default_rng(7)
        for _ in range(5):
            x = np.array([0.3 + 2.4 * rng.random(), -2.0 + 4.0 * rng.random()])
            cp = riemann(ch, x)
            fr = gram_schmidt(list(np.eye(2)), cp.metric)
            assert cp.sectional(fr.vectors[0], fr.vectors[1]) == pytest.approx(
                1.0 / r**2, abs=1e-9
            )

    def test_half_plane_sectional(self):
        cp = riemann(chart("half-plane"), np.array([1.3, 0.8]))
        fr = gram_schmidt(list(np.eye(2)), cp.metric)
        assert cp.sectional(fr.vectors[0], fr.vectors[1]) == pytest.approx(-1.0, abs=1e-9)

    @pytest.mark.parametrize("name", ["sphere:1", "half-plane", "polar", "sphere3:2"])
    def test_symmetries_and_bianchi(self, name):
        ch = chart(name)
        rng = np.random.default_rng(13)
        lo = np.array([b[0] for b in ch.domain])
        hi = np.array([b[1] for b in ch.domain])
        for _ in range(20):
            x = lo + (hi - lo) * rng.random(ch.dim)
            residuals = riemann(ch, x).symmetry_residuals()
            assert max(residuals.values()) < 1e-9

    def test_domain_error(self):
        with pytest.raises(DomainError):
            riemann(chart("sphere:1"), np.array([0.0, 0.0]))


class TestFrames:
    def test_gram_schmidt_identity(self):
        fr = gram_schmidt(list(np.eye(3)), np.eye(3))
        assert np.allclose(fr.vectors, np.eye(3))

    def test_gram_schmidt_orthogonalizes(self):
        fr = gram_schmidt([np.array([1.0, 0.0]), np.array([1.0, 1.0])], np.eye(2))
        assert np.allclose(fr.vectors, [[1.0, 0.0], [0.0, 1.0]])

    def test_gram_schmidt_metric_normalization(self):
        fr = gram_schmidt([np.array([1.0, 0.0])], np.diag([4.0, 1.0]))
        assert np.allclose(fr.vectors, [[0.5, 0.0]])

    def test_rank_deficiency(self):
        with pytest.raises(DependencyError):
            gram_schmidt([np.array([1.0, 1.0]), np.array([2.0, 2.0])], np.eye(2))

    def test_orthonormality_invariant(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(3, 3))
        g = A @ A.T + 3.0 * np.eye(3)
        fr = gram_schmidt(list(rng.normal(size=(3, 3))), g)
        assert fr.orthonormality_residual() < 1e-10

    def test_complete_frame(self):
        g = np.diag([2.0, 1.0, 0.5, 1.0])
        fr = gram_schmidt([np.array([1.0, 1.0, 0.0, 0.0])], g)
        full = complete_frame(fr)
        assert full.k == 4
        assert full.orthonormality_residual() < 1e-10


class TestScalarCurvature:
    def test_flat_zero(self):
        cp = riemann(chart("flat:4"), np.full(4, 0.1))
        fr = gram_schmidt(list(np.eye(4)), cp.metric)
        assert scalar_curvature_of_frame(cp.quad, fr) == 0.0

    def test_sphere_full_frame(self):
        cp = riemann(chart("sphere:1"), np.array([1.0, 0.2]))
        fr = gram_schmidt(list(np.eye(2)), cp.metric)
        assert scalar_curvature_of_frame(cp.quad, fr) == pytest.approx(2.0, abs=1e-9)

    def test_ambient_flat_sphere_frame(self):
        # tangent frame of the unit 3-sphere inside flat R^4: ambient curvature is zero
        cp = riemann(chart("flat:4"), np.array([0.5, 0.5, 0.5, 0.5]))
        x = np.array([0.5, 0.5, 0.5, 0.5])
        x = x / np.linalg.norm(x)
        basis = [v - (v @ x) * x for v in np.eye(4)[:3]]
        fr = gram_schmidt(basis, cp.metric)
        assert fr.k == 3
        assert scalar_curvature_of_frame(cp.quad, fr) == 0.0

    def test_rotation_invariance(self):
        cp = riemann(chart("sphere3:2"), np.array([1.0, 0.9, 0.3]))
        fr = gram_schmidt(list(np.eye(3)), cp.metric)
        val = scalar_curvature_of_frame(cp.quad, fr)
        rng = np.random.default_rng(11)
        for _ in range(5):
            Q = orthonormal_rows(rng, 3)
            rot = OrthoFrame(Q @ fr.vectors, cp.metric)
            val2 = scalar_curvature_of_frame(cp.quad, rot)
            assert abs(val - val2) < 1e-9 * max(1.0, abs(val))

    def test_degenerate_frames(self):
        cp = riemann(chart("flat:4"), np.full(4, 0.1))
        empty = OrthoFrame(np.zeros((0, 4)), cp.metric)
        single = OrthoFrame(np.eye(4)[:1], cp.metric)
        assert scalar_curvature_of_frame(cp.quad, empty) == 0.0
        assert scalar_curvature_of_frame(cp.quad, single) == 0.0
        with pytest.raises(DimensionError):
            normalized_scalar_curvature(cp.quad, single)
        with pytest.raises(DimensionError):
            normalized_scalar_curvature(cp.quad, empty)


class TestMixedScalar:
    def test_flat_zero(self):
        cp = riemann(chart("flat:4"), np.full(4, 0.1))
        fr = gram_schmidt(list(np.eye(4)), cp.metric)
        hor = OrthoFrame(fr.vectors[:2], cp.metric)
        vert = OrthoFrame(fr.vectors[2:], cp.metric)
        assert mixed_scalar(cp.quad, hor, vert) == 0.0

    def test_empty_frame(self):
        cp = riemann(chart("flat:4"), np.full(4, 0.1))
        hor = OrthoFrame(np.eye(4)[:2], cp.metric)
        empty = OrthoFrame(np.zeros((0, 4)), cp.metric)
        assert mixed_scalar(cp.quad, hor, empty) == 0.0
        assert mixed_scalar(cp.quad, empty, hor) == 0.0

    def test_matches_space_form_identity(self):
        # sum_ij R(h_i, v_j, v_j, h_i) = (c/4) s ell + (3c/4) sum_a |P_a^V|^2
        from casoratiq.quaternionic import decompose_J

        J = quat_units(2)
        g = np.eye(8)
        oracle = QSFOracle(4.0, J, g)
        rng = np.random.default_rng(23)
        for _ in range(5):
            rows = orthonormal_rows(rng, 8)
            hor = OrthoFrame(rows[:3], g)
            vert = OrthoFrame(rows[3:7], g)
            value = mixed_scalar(oracle.quad, hor, vert)
            dec = decompose_J(J, g, hor.vectors, vert.vectors)
            expected = (4.0 / 4.0) * 3 * 4 + (3 * 4.0 / 4.0) * dec.norms_PV.sum()
            assert value == pytest.approx(expected, abs=1e-10)
