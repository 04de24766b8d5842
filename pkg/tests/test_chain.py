import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosphere import (
    Domain,
    build_alpha_chain,
    eval_expr,
    f_chain_at,
    hermitian_product,
    recursion_crosscheck,
    scan_grid,
    surface_at,
    symmetric_product,
)
from holosphere.chain import f_chain_eval
from holosphere.errors import DomainError, SingularPointError
from holosphere.expr import poly_coeffs

from conftest import oracle_surface_n1


class TestBuild:
    def test_level_one_components(self, chain_n1):
        # beta = 1 gives phi = z, so the top map is
        # (1 - z^2, i(1 + z^2), 2z)
        comps = [poly_coeffs(e) for e in chain_n1.alpha_exprs[1]]
        assert np.array_equal(comps[0], np.array([1, 0, -1], dtype=complex))
        assert np.array_equal(comps[1], np.array([1j, 0, 1j]))
        assert np.array_equal(comps[2], np.array([0, 2], dtype=complex))

    def test_integration_constant_shifts_phi(self):
        c = 0.3 + 0.1j
        shifted = build_alpha_chain(["1"], constants=[[c]])
        z = 0.4 - 0.2j
        p = z + c
        expected = np.array([1 - p * p, 1j * (1 + p * p), 2 * p])
        got = np.array([eval_expr(e, z) for e in shifted.alpha_exprs[1]])
        assert np.allclose(got, expected, atol=1e-14)

    def test_dimensions(self, chain_n3):
        for r, comps in enumerate(chain_n3.alpha_exprs):
            assert len(comps) == 2 * r + 1
        assert chain_n3.dim == 7

    def test_bad_constant_shapes(self):
        with pytest.raises(ValueError):
            build_alpha_chain(["1", "1"], constants=[[0j]])
        with pytest.raises(ValueError):
            build_alpha_chain(["1", "1"], constants=[[0j], [0j, 0j]])

    def test_empty_betas(self):
        with pytest.raises(ValueError):
            build_alpha_chain([])

    def test_string_and_tree_inputs_agree(self):
        from holosphere.expr import parse_expr

        a = build_alpha_chain(["z"])
        b = build_alpha_chain([parse_expr("z")])
        assert a.alpha_exprs == b.alpha_exprs


@st.composite
def _small_poly(draw):
    coeffs = draw(
        st.lists(
            st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
            min_size=1,
            max_size=3,
        )
    )
    parts = []
    for k, (re, im) in enumerate(coeffs):
        if re == im == 0:
            continue
        parts.append(f"({re}+{im}*i)" + ("" if k == 0 else f"*z^{k}"))
    return "+".join(parts) if parts else "1"


@given(_small_poly(), _small_poly())
@settings(max_examples=25, deadline=None)
def test_alpha_isotropy_identity(b0, b1):
    # every level of the chain is isotropic by construction
    chain = build_alpha_chain([b0, b1])
    for z in (0.3 + 0.4j, -0.6 - 0.1j):
        for comps in chain.alpha_exprs[1:]:
            vec = np.array([eval_expr(e, z) for e in comps])
            scale = float(np.real(np.dot(vec, np.conj(vec))))
            if scale == 0:
                continue
            assert abs(np.dot(vec, vec)) <= 1e-10 * scale


class TestFChain:
    def test_values_at_origin(self, chain_n1):
        # hand-expanded: F_1 = (1, i, 0), dF_1 = (0, 0, 2), and the
        # projection coefficient vanishes, so F_2 = (0, 0, 2)
        s = f_chain_at(chain_n1, 0j)
        assert np.allclose(s.F[0], [1, 1j, 0], atol=1e-15)
        assert np.allclose(s.jets[1], [0, 0, 2], atol=1e-15)
        assert np.allclose(s.F[1], [0, 0, 2], atol=1e-15)
        assert np.allclose(s.norms_sq, [2, 4], atol=1e-15)

    def test_norm_formula(self, chain_n1):
        # |F_1|^2 expands to 2 (1 + |z|^2)^2
        for z in (1.0 + 0j, 0.3 - 0.8j, -1 + 1j):
            s = f_chain_at(chain_n1, z)
            assert s.norms_sq[0] == pytest.approx(2 * (1 + abs(z) ** 2) ** 2,
                                                  rel=1e-13)

    def test_value_at_one(self, chain_n1):
        s = f_chain_at(chain_n1, 1.0 + 0j)
        assert np.allclose(s.F[1], [-2, 0, 0], atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_hermitian_orthogonality(self, n, chain_n1, chain_n2, chain_n3):
        chain = {1: chain_n1, 2: chain_n2, 3: chain_n3}[n]
        for z in (0.37 + 0.21j, -0.55 + 0.8j):
            s = f_chain_at(chain, z)
            assert not s.singular
            norms = np.sqrt(s.norms_sq)
            for j in range(n + 1):
                for k in range(j + 1, n + 1):
                    val = abs(hermitian_product(s.F[j], s.F[k]))
                    assert val <= 1e-10 * norms[j] * norms[k]

    def test_batch_matches_pointwise(self, chain_n2):
        zs = np.array([0.1 + 0.2j, -0.4 + 0.6j, 0.9 - 0.9j])
        batch = f_chain_eval(chain_n2, zs)
        for i, z in enumerate(zs):
            single = f_chain_at(chain_n2, complex(z))
            assert np.allclose(batch.F[i], single.F, atol=1e-14)

    def test_point_outside_domain(self, chain_n1):
        with pytest.raises(DomainError):
            f_chain_at(chain_n1, 3 + 0j)

    def test_degenerate_point_flagged(self):
        # beta = z kills the jet at the origin
        chain = build_alpha_chain(["z"])
        assert f_chain_at(chain, 0j).singular
        assert not f_chain_at(chain, 0.5 + 0j).singular

    def test_nonpolynomial_chain(self):
        # beta = exp(z): phi = exp(z) - 1 via quadrature, top map still
        # isotropic and orthogonal
        chain = build_alpha_chain(["exp(z)"])
        assert not chain.is_polynomial
        z = 0.3 - 0.2j
        p = cmath.exp(z) - 1
        expected = np.array([1 - p * p, 1j * (1 + p * p), 2 * p])
        s = f_chain_at(chain, z)
        assert np.allclose(s.F[0], expected, atol=1e-9)
        assert abs(symmetric_product(s.F[0], s.F[0])) <= 1e-9 * s.norms_sq[0]
        assert abs(hermitian_product(s.F[0], s.F[1])) <= 1e-8 * np.sqrt(
            s.norms_sq[0] * s.norms_sq[1]
        )


class TestRecursionCrosscheck:
    def test_n1_interior_point(self, chain_n1):
        assert recursion_crosscheck(chain_n1, 0.3 + 0.2j) <= 1e-5

    def test_n2_interior_point(self, chain_n2):
        assert recursion_crosscheck(chain_n2, 0.5 + 0j) <= 1e-5

    def test_first_step_is_exact(self, chain_n1):
        # F_1 is holomorphic and differentiated symbolically, so the two
        # constructions coincide to roundoff for n = 1
        assert recursion_crosscheck(chain_n1, 0.3 + 0.2j) <= 1e-12

    def test_stencil_must_fit(self, chain_n1):
        with pytest.raises(DomainError):
            recursion_crosscheck(chain_n1, 1 + 1j)


class TestSurface:
    def test_unit_norm(self, chain_n2):
        for z in (0j, 0.25 - 0.75j, -1 + 1j):
            g = surface_at(f_chain_at(chain_n2, z))
            assert abs(np.linalg.norm(g) - 1) <= 1e-14

    def test_matches_closed_form_oracle(self, chain_n1):
        zs, _ = chain_n1.domain.grid(10, 10)
        worst = 0.0
        for z in zs.ravel():
            g = surface_at(f_chain_at(chain_n1, complex(z)))
            worst = max(worst, np.linalg.norm(g - oracle_surface_n1(complex(z), 1 + 0j)))
        assert worst <= 1e-10

    def test_degenerate_chain_point_raises(self):
        chain = build_alpha_chain(["z"])
        with pytest.raises(SingularPointError):
            surface_at(f_chain_at(chain, 0j))

    def test_normalization_collapse_raises(self):
        # for beta = z the chain is fine at z = 0.2i but the real part of
        # the top vector vanishes on the whole imaginary axis
        chain = build_alpha_chain(["z"])
        s = f_chain_at(chain, 0.2j)
        assert not s.singular
        with pytest.raises(SingularPointError):
            surface_at(s)


class TestScanGrid:
    def test_clean_grid(self, chain_n1):
        scan = scan_grid(chain_n1, 10, 10)
        assert scan.singular.sum() == 0
        assert scan.valid.all()
        assert len(scan.samples) == 100

    def test_row_major_order(self, chain_n1):
        scan = scan_grid(chain_n1, 3, 4)
        xs = np.linspace(-1, 1, 4)
        ys = np.linspace(-1, 1, 3)
        for r in range(3):
            for c in range(4):
                assert scan.zs[r, c] == xs[c] + 1j * ys[r]

    def test_degenerate_cells_masked(self):
        chain = build_alpha_chain(["z"])
        scan = scan_grid(chain, 11, 11)
        assert scan.singular[5, 5]          # chain degenerates at the origin
        assert not scan.valid[:, 5].any()   # normalization dies on Re z = 0
        assert scan.valid[:, 0].all()
        assert np.isnan(scan.surface[5, 5]).all()

    def test_grid_too_small(self, chain_n1):
        with pytest.raises(DomainError):
            scan_grid(chain_n1, 1, 1)

    def test_disk_domain_masks_outside(self):
        chain = build_alpha_chain(["1"], domain=Domain.disk(0j, 1.0))
        scan = scan_grid(chain, 9, 9)
        assert not scan.inside[0, 0]
        assert not scan.valid[0, 0]
        assert scan.valid[4, 4]

    def test_reproducible(self, chain_n2):
        a = scan_grid(chain_n2, 6, 6)
        b = scan_grid(chain_n2, 6, 6)
        assert np.array_equal(a.surface, b.surface, equal_nan=True)
