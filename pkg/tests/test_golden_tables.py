"""Regression of the printed multiplication tables and norm identities."""
import math

import numpy as np
import pytest

from homogeodesy.algebra import bracket
from homogeodesy.catalog import build_space, sp_algebra, su_algebra
from homogeodesy.homogeneous import project, sectional_curvature

from oracles import (
    bracabc_bracket_residual,
    bracabc_matrix_residual,
    berger_table_residual,
    sp_table_residual,
)

TOL = 1e-10


def test_su5_table_from_raw_matrices():
    assert bracabc_matrix_residual(5) < TOL


def test_su5_table_through_bracket():
    assert bracabc_bracket_residual(su_algebra(5)) < TOL


@pytest.mark.parametrize("m", [1, 2])
def test_sp_tables(m):
    assert sp_table_residual(sp_algebra(m), m) < TOL


@pytest.mark.parametrize("m,s", [(1, 0.5), (2, 0.5), (2, 0.9), (2, 1.0)])
def test_berger_bracket_table(m, s):
    space = build_space(f"berger:m={m},s={s:g},kappa=1")
    assert berger_table_residual(space) < TOL


def test_b13_bracket_norms():
    space = build_space("b13")
    alg = space.algebra
    for r in range(1, 5):
        b = bracket(alg.basis_element(f"e_{r}"), alg.basis_element(f"f_{r}")).coeffs
        bh = project(space, b, "K")
        bm = project(space, b, "M")
        assert abs(alg.inner(bh, bh) - 7.0) < TOL
        assert abs(alg.inner(bm, bm) - 1.0) < TOL
        # the m-part sits entirely in m0
        assert abs(alg.inner(bm, bm) - alg.inner(project(space, b, "M0"), bm)) < TOL


def test_b13_vertical_bracket_norm_is_four():
    # orthonormal pairs in m0 have |[u,v]|^2 = |[u,v]_h|^2 = 4 (fiber RP^5(4))
    space = build_space("b13")
    alg = space.algebra
    labels = ("u_0", "u_1", "u_2", "v_1", "v_2")
    for i, li in enumerate(labels):
        for lj in labels[i + 1 :]:
            b = bracket(alg.basis_element(li), alg.basis_element(lj)).coeffs
            assert abs(alg.inner(b, b) - 4.0) < TOL
            bm = project(space, b, "M")
            assert alg.inner(bm, bm) < TOL


@pytest.mark.parametrize("s", [0.25, 0.5, 0.9, 1.0])
def test_w7_bracket_norms(s):
    space = build_space(f"w7:s={s:g}")
    alg = space.algebra
    want_m = 4 * (1 - s) ** 2 / (s * (1 + s))
    want_k = 4 / (1 + s)
    labels = ("u_0s", "u_1s", "v_1s")
    for i, li in enumerate(labels):
        for lj in labels[i + 1 :]:
            b = bracket(alg.basis_element(li), alg.basis_element(lj)).coeffs
            bm = project(space, b, "M")
            bk = project(space, b, "K")
            assert abs(alg.inner(bm, bm) - want_m) < TOL
            assert abs(alg.inner(bk, bk) - want_k) < TOL
    u, v = space.basis_vector("u_0s"), space.basis_vector("u_1s")
    assert abs(sectional_curvature(space, u, v) - (1 + s) / s) < TOL


def test_w7_k4_is_unit():
    alg = build_space("w7:s=0.5").algebra
    k4 = alg.basis_element("K_4")
    assert abs(alg.inner(k4.coeffs, k4.coeffs) - 1.0) < TOL


def test_cp_x2_norm_is_half_unscaled():
    alg = build_space("cpodd:m=1,kappa=1").algebra
    x2 = alg.basis_element("X_2").coeffs
    assert abs(alg.inner(x2, x2) - 0.5) < TOL


def test_b13_basis_orthonormal_under_quarter_trace():
    alg = build_space("b13").algebra
    np.testing.assert_allclose(alg.gram, np.eye(24), atol=TOL)


def test_berger_hopf_frequency():
    # [d_s, e_r] = sqrt(s) (m+1)/alpha_m f_r drives the Hopf rotation
    space = build_space("berger:m=2,s=0.5,kappa=1")
    alg = space.algebra
    got = bracket(alg.basis_element("d_s"), alg.basis_element("e_2")).coeffs
    coef = math.sqrt(0.5) * 3 / math.sqrt(3.0)
    want = coef * space.basis_vector("f_2")
    np.testing.assert_allclose(got, want, atol=TOL)
