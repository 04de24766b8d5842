import numpy as np
import pytest

from holosphere import Domain, build_alpha_chain, f_chain_at, surface_at
from holosphere.errors import (
    DegenerateSurfaceError,
    DomainError,
    NotPseudoholomorphicError,
)
from holosphere.geometry import SurfaceEvaluator, chain_fundamental_form
from holosphere.products import hermitian_product, principal_angles
from holosphere.reconstruct import (
    GChainSample,
    XiField,
    extract_xi,
    g_chain_at,
    integrate_to_f,
    roundtrip,
    sample_xi,
)


class TestGChain:
    def test_first_vector_matches_tangent_formula(self, chain_n1, surface_n1):
        z = 0.3 + 0.2j
        sample = g_chain_at(surface_n1, z)
        ref = chain_fundamental_form(f_chain_at(chain_n1, z), None, 0)
        dev = np.linalg.norm(sample.G[1] - ref) / np.linalg.norm(ref)
        assert dev <= 1e-5

    def test_termination_residual_small(self, surface_n1):
        sample = g_chain_at(surface_n1, 0.3 + 0.2j)
        assert sample.residual <= 1e-3

    def test_vectors_hermitian_orthogonal(self, surface_n2):
        sample = g_chain_at(surface_n2, 0.25 - 0.35j)
        norms = np.sqrt(sample.norms_sq)
        for j in range(1, 3):
            for k in range(j + 1, 3):
                val = abs(hermitian_product(sample.G[j], sample.G[k]))
                assert val <= 1e-4 * norms[j] * norms[k]

    @pytest.mark.parametrize("s", [1, 2])
    def test_conjugate_descent_identity(self, surface_n2, s):
        from holosphere.reconstruct import conjugate_descent_residual

        assert conjugate_descent_residual(surface_n2, 0.2 + 0.3j, s) <= 1e-4

    def test_constant_surface_degenerates(self):
        v = np.zeros(3)
        v[2] = 1.0

        def func(zs):
            return np.tile(v, (zs.size, 1))

        g = SurfaceEvaluator(
            func=func, domain=Domain.rectangle(-1 - 1j, 1 + 1j), dim=3, n=1
        )
        with pytest.raises(DegenerateSurfaceError):
            g_chain_at(g, 0.1 + 0.1j)

    def test_stencil_margin_enforced(self, surface_n1):
        with pytest.raises(DomainError):
            g_chain_at(surface_n1, 1 + 1j)


class TestExtractXi:
    def test_recovers_generator_up_to_gauge(self, chain_n1, surface_n1):
        # componentwise ratio against the forward chain bottom must be a
        # single (holomorphic, nowhere-zero) factor
        for z in (0.3 + 0.2j, -0.4 + 0.1j):
            xi = extract_xi(g_chain_at(surface_n1, z))
            F1 = f_chain_at(chain_n1, z).F[0]
            ratios = xi / F1
            assert np.max(np.abs(ratios - ratios[0])) <= 1e-6 * abs(ratios[0])

    def test_holomorphy_of_sampled_field(self, surface_n1):
        xi, _ = sample_xi(surface_n1, rows=25, cols=25)
        for z in (0.2 + 0.3j, -0.5 - 0.1j, 0.6 + 0j):
            assert xi.holomorphy_residual(z) <= 1e-4

    def test_degenerate_sample_rejected(self):
        bad = GChainSample(
            z=0j,
            G=np.zeros((2, 3), dtype=complex),
            norms_sq=np.array([1.0, 0.0]),
            residual=0.0,
        )
        with pytest.raises(DegenerateSurfaceError):
            extract_xi(bad)


class TestXiField:
    def test_too_sparse_for_cubic(self):
        with pytest.raises(ValueError):
            XiField(np.linspace(0, 1, 2), np.linspace(0, 1, 2),
                    np.zeros((2, 2, 3), dtype=complex))

    def test_interpolates_polynomials_exactly(self):
        # cubic splines reproduce quadratics
        xs = np.linspace(-1, 1, 9)
        ys = np.linspace(-1, 1, 9)
        zs = xs[:, None] + 1j * ys[None, :]
        vals = np.stack([zs**2, 1j * zs, np.ones_like(zs)], axis=2)
        field = XiField(xs, ys, vals)
        probe = np.array([0.123 + 0.456j, -0.7 + 0.2j])
        out = field(probe)
        assert np.allclose(out[:, 0], probe**2, atol=1e-12)
        assert np.allclose(out[:, 1], 1j * probe, atol=1e-13)

    def test_jet_derivatives(self):
        xs = np.linspace(-1, 1, 17)
        ys = np.linspace(-1, 1, 17)
        zs = xs[:, None] + 1j * ys[None, :]
        vals = (zs**3)[:, :, None]
        field = XiField(xs, ys, vals)
        probe = np.array([0.3 + 0.1j])
        jets = field.jet(probe, 2)
        assert abs(jets[0, 1, 0] - 3 * probe[0] ** 2) < 1e-8
        assert abs(jets[0, 2, 0] - 6 * probe[0]) < 1e-5


class TestIntegrateToF:
    def test_constant_field(self):
        xs = np.linspace(-1, 1, 9)
        ys = np.linspace(-1, 1, 9)
        vals = np.zeros((9, 9, 3), dtype=complex)
        vals[:, :, 0] = 1.0
        vals[:, :, 1] = 1j
        field = XiField(xs, ys, vals)
        f = integrate_to_f(field, Domain.rectangle(-1 - 1j, 1 + 1j, base_point=0j))
        z = 0.5 + 0.25j
        assert np.allclose(f(z), [0.5, -0.25, 0.0], atol=1e-9)

    def test_gradient_recovers_field(self, surface_n1):
        # the isotropic map satisfies 2 df/dz = xi
        xi, _ = sample_xi(surface_n1, rows=25, cols=25)
        f = integrate_to_f(xi, surface_n1.domain)
        z, h = 0.2 + 0.3j, 1e-5
        fx = (f(z + h) - f(z - h)) / (2 * h)
        fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        df = 0.5 * (fx - 1j * fy)
        assert np.linalg.norm(2 * df - xi(np.array([z]))[0]) <= 1e-5


class TestRoundtrip:
    def test_n1(self, surface_n1):
        result = roundtrip(surface_n1, grid=(8, 8), sample_grid=(33, 33))
        assert result.sup_distance <= 1e-3
        assert result.termination_residual <= 1e-3

    def test_n1_gauge_invariance(self, surface_n1):
        for gauge in (lambda zs: 2.0 * np.ones_like(zs), np.exp):
            result = roundtrip(
                surface_n1, grid=(8, 8), sample_grid=(33, 33), gauge=gauge
            )
            assert result.sup_distance <= 1e-3

    def test_n2(self, surface_n2):
        result = roundtrip(surface_n2, grid=(8, 8), sample_grid=(41, 41))
        assert result.sup_distance <= 1e-2

    def test_span_agreement(self, chain_n2, surface_n2):
        # the reconstructed jet spans the same maximal isotropic flag as
        # the descending chain of the surface
        xi, _ = sample_xi(surface_n2, rows=41, cols=41)
        z = 0.21 + 0.13j
        jets = xi.jet(np.array([z]), 1)[0]  # xi, d xi
        gs = g_chain_at(surface_n2, z)
        basis_f = np.concatenate([jets, np.conj(jets)], axis=0).T
        basis_g = np.concatenate([gs.G[1:], np.conj(gs.G[1:])], axis=0).T
        assert principal_angles(basis_f, basis_g).max() <= 1e-3

    def test_refuses_non_pseudoholomorphic(self, small_sphere_surface):
        with pytest.raises(NotPseudoholomorphicError) as err:
            roundtrip(small_sphere_surface, grid=(6, 6), sample_grid=(33, 33))
        assert err.value.residual > 1e-2

    def test_unsupported_depth(self, surface_n1):
        with pytest.raises(ValueError):
            roundtrip(surface_n1, n=4)
