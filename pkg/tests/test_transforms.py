import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from colorcacti.errors import DimensionError
from colorcacti.forward import MaskStack, build_mask_stack, forward_measure, gen_mask, horizontal_schedule, vec
from colorcacti.transforms import (
    Basis1D, PsiOperator, apply_Psi, apply_Psi_adjoint, daubechies_filter, dct_forward, dct_inverse,
    dwt_forward, dwt_inverse, make_transform, psi_column_sq_norms, transform3d_forward, transform3d_inverse,
)

from oracles import DB4_LOWPASS, dct_matrix


def test_dct_constant():
    np.testing.assert_allclose(dct_forward(np.ones(4)), [2.0, 0.0, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 17])
def test_dct_matches_cosine_formula(n):
    v = np.random.default_rng(n).normal(size=n)
    np.testing.assert_allclose(dct_forward(v), dct_matrix(n) @ v, atol=1e-12)
    np.testing.assert_allclose(dct_inverse(dct_forward(v)), v, atol=1e-12)
    assert abs(np.linalg.norm(dct_forward(v)) - np.linalg.norm(v)) < 1e-12


def test_dct_empty():
    with pytest.raises(DimensionError):
        dct_forward(np.zeros(0))


def test_db4_filter_values():
    # our orientation may be the time reverse of the tabulated filter
    h = daubechies_filter(8)
    assert np.allclose(h, DB4_LOWPASS, atol=1e-12) or np.allclose(h[::-1], DB4_LOWPASS, atol=1e-12)


@pytest.mark.parametrize("taps", [4, 8, 16])
def test_filter_orthonormality(taps):
    h = daubechies_filter(taps)
    assert len(h) == taps
    assert abs(h.sum() - np.sqrt(2)) < 1e-12
    for shift in range(0, taps, 2):
        assert abs(h[shift:] @ h[: taps - shift] - (shift == 0)) < 1e-12


@pytest.mark.parametrize("taps", [8, 16])
@pytest.mark.parametrize("n,levels", [(8, 1), (16, 2), (32, 3), (64, 3)])
def test_dwt_round_trip_and_energy(taps, n, levels):
    v = np.random.default_rng(n).normal(size=n)
    c = dwt_forward(v, levels, taps)
    np.testing.assert_allclose(dwt_inverse(c, levels, taps), v, atol=1e-10)
    assert abs(np.linalg.norm(c) - np.linalg.norm(v)) < 1e-10


def test_dwt_constant_has_no_detail():
    c = dwt_forward(np.full(32, 3.0), 3)
    np.testing.assert_allclose(c[4:], 0.0, atol=1e-10)


def test_dwt_ramp_detail_vanishes_away_from_wrap():
    # four vanishing moments: cubic signals produce zero detail where the filter does not wrap
    x = np.arange(64.0)
    c = dwt_forward(0.01 * x**3 - x, 1)
    detail = c[32:]
    assert np.max(np.abs(detail[:25])) < 1e-8


def test_dwt_indivisible():
    with pytest.raises(DimensionError):
        dwt_forward(np.zeros(12), 3)
    with pytest.raises(DimensionError):
        Basis1D("db8", 12, levels=3)


@pytest.mark.parametrize("basis", [
    Basis1D("db8", 64, levels=3), Basis1D("db8", 32, levels=2, taps=16), Basis1D("dct", 64),
    Basis1D("dct", 16, block=8), Basis1D("dct", 7),
])
def test_dense_orthonormality(basis):
    F = basis.inverse(np.eye(basis.n), axis=0)
    assert np.max(np.abs(F.T @ F - np.eye(basis.n))) <= 1e-10


def test_basis_fast_paths_agree():
    b = Basis1D("db8", 32, levels=3)
    v = np.random.default_rng(0).normal(size=32)
    np.testing.assert_allclose(b.forward(v), dwt_forward(v, 3), atol=1e-12)
    d = Basis1D("dct", 16, block=4)
    np.testing.assert_allclose(d.forward(v[:16]), np.concatenate([dct_forward(v[k:k + 4]) for k in range(0, 16, 4)]),
                               atol=1e-12)


def test_sparse_atoms_reassemble_synthesis():
    b = Basis1D("db8", 32, levels=3)
    ptr, idx, val = b.sparse_atoms()
    F = np.zeros((32, 32))
    for c in range(32):
        F[idx[ptr[c]:ptr[c + 1]], c] = val[ptr[c]:ptr[c + 1]]
    np.testing.assert_array_equal(F, b.synthesis)


@pytest.mark.parametrize("basis", [("db8", "db8", "dct"), ("dct", "dct", "dct"), ("db8", "dct", "db8")])
def test_kronecker_oracle(basis):
    shape = (8, 8, 8) if basis[0] == "db8" else (4, 4, 4)
    t = make_transform(shape, basis, levels=1)
    z = np.random.default_rng(1).normal(size=shape)
    Fx, Fy, Ft = (b.synthesis for b in (t.bx, t.by, t.bt))
    K = np.kron(Ft.T, np.kron(Fy.T, Fx.T))
    np.testing.assert_allclose(vec(transform3d_forward(z, t)), K @ vec(z), atol=1e-10)
    np.testing.assert_allclose(transform3d_inverse(transform3d_forward(z, t), t), z, atol=1e-10)


def test_transform_parseval_and_zero():
    t = make_transform((16, 16, 8))
    z = np.random.default_rng(2).random((16, 16, 8))
    assert abs(np.linalg.norm(t.forward_cube(z)) - np.linalg.norm(z)) <= 1e-10 * np.linalg.norm(z)
    assert not np.any(t.forward_cube(np.zeros((16, 16, 8))))
    with pytest.raises(DimensionError):
        t.forward_cube(np.zeros((16, 16, 4)))


def _psi_setup(shape=(16, 16, 4), seed=0):
    ms = build_mask_stack(gen_mask(shape[0], shape[1] + shape[2], 0.5, seed), horizontal_schedule(shape[2]),
                          shape[0], shape[1])
    return ms, make_transform(shape, levels=2)


def test_psi_composes_with_forward_measure():
    ms, t = _psi_setup()
    z = np.random.default_rng(3).random(ms.shape)
    theta = vec(t.forward_cube(z))
    np.testing.assert_allclose(apply_Psi(theta, ms, t), vec(forward_measure(z, ms).data), atol=1e-10)
    assert not np.any(apply_Psi(np.zeros(t.size), ms, t))


def test_psi_adjoint():
    ms, t = _psi_setup()
    rng = np.random.default_rng(4)
    for _ in range(10):
        th = rng.normal(size=t.size)
        y = rng.normal(size=ms.n_pixels)
        gap = abs(apply_Psi(th, ms, t) @ y - th @ apply_Psi_adjoint(y, ms, t))
        assert gap <= 1e-10 * np.linalg.norm(th) * np.linalg.norm(y)


def test_column_norms_match_explicit_columns():
    ms, t = _psi_setup((4, 4, 2))
    t = make_transform((4, 4, 2), ("dct", "dct", "dct"))
    op = PsiOperator(ms, t)
    explicit = np.array([np.sum(op.apply(e) ** 2) for e in np.eye(t.size)])
    cn = psi_column_sq_norms(ms, t)
    assert np.all(cn >= 0)
    np.testing.assert_allclose(cn, explicit, rtol=1e-10, atol=1e-14)
    ms8, t8 = _psi_setup((8, 8, 4))
    op8 = PsiOperator(ms8, t8)
    explicit = np.array([np.sum(op8.apply(e) ** 2) for e in np.eye(t8.size)])
    np.testing.assert_allclose(op8.column_sq_norms(), explicit, rtol=1e-10, atol=1e-14)


def test_column_norms_isometry():
    t = make_transform((8, 8, 1), ("db8", "db8", "dct"), levels=2)
    np.testing.assert_allclose(psi_column_sq_norms(MaskStack.ones(8, 8, 1), t), 1.0, atol=1e-12)


def test_psi_shape_mismatch():
    ms, _ = _psi_setup()
    with pytest.raises(DimensionError):
        PsiOperator(ms, make_transform((16, 16, 8)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_psi_of_forward_equals_H(seed):
    ms, t = _psi_setup((8, 8, 4), seed % 1000)
    z = np.random.default_rng(seed).normal(size=ms.shape)
    a = apply_Psi(vec(t.forward_cube(z)), ms, t)
    b = vec(forward_measure(z, ms).data)
    assert np.linalg.norm(a - b) <= 1e-10 * max(np.linalg.norm(b), 1.0)
