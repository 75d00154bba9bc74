from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ubbcert.exact_linalg import (
    LinearDependenceError,
    RationalMatrix,
    RationalVector,
    char_poly,
    format_rmat,
    is_psd,
    kernel_basis,
    min_eig_bound,
    orthogonalize,
    parse_rmat,
    rank,
    tensor_product,
)

# --- oracles ----------------------------------------------------------------------


def rank_oracle(rows):
    """Plain Fraction row reduction."""
    a = [[Fraction(x) for x in r] for r in rows]
    r = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
    return r


def faddeev_leverrier(rows):
    """det(xI - M) coefficients, highest degree first."""
    n = len(rows)
    m = [[Fraction(x) for x in r] for r in rows]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # M_k = M (M_{k-1} + c_{k-1} I)
        prev = [[mk[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
        mk = [[sum(m[i][t] * prev[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


small_ints = st.integers(-6, 6)


def int_matrix(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@st.composite
def rational_matrices(draw, max_n=6, square=False):
    r = draw(st.integers(1, max_n))
    c = r if square else draw(st.integers(1, max_n))
    nums = draw(int_matrix(r, c))
    den = draw(st.integers(1, 12))
    return [[Fraction(x, den) for x in row] for row in nums]


# --- basics -----------------------------------------------------------------------


def test_tensor_product_examples():
    e0, e1 = RationalVector.basis(2, 0), RationalVector.basis(2, 1)
    assert list(tensor_product(e0, e1)) == [0, 1, 0, 0]
    u = RationalVector.of([1, 2])
    v = RationalVector.of([3, Fraction(1, 2), -1])
    assert list(tensor_product(u, v)) == [3, Fraction(1, 2), -1, 6, 1, -2]


def test_normalized_storage():
    v = RationalVector.of([Fraction(2, 4), Fraction(1, 3)])
    assert v.den == 6 and list(v.num) == [3, 2]
    assert RationalVector.of([2, 4]) == RationalVector.of([Fraction(4, 2), 4])


def test_matmul_and_transpose():
    a = RationalMatrix.from_rows([[1, Fraction(1, 2)], [0, 3]])
    b = RationalMatrix.from_rows([[2, 0], [Fraction(-1, 3), 1]])
    assert (a @ b) == RationalMatrix.from_rows([[Fraction(2) - Fraction(1, 6), Fraction(1, 2)], [-1, 3]])
    assert a.T[0, 1] == 0 and a.T[1, 0] == Fraction(1, 2)
    assert a.trace() == 4


def test_symmetric_flag_checked():
    with pytest.raises(ValueError):
        RationalMatrix.from_rows([[1, 2], [3, 4]], symmetric=True)


# --- rank and kernel --------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(rational_matrices())
def test_rank_matches_fraction_elimination(rows):
    assert rank(RationalMatrix.from_rows(rows)) == rank_oracle(rows)


def test_rank_examples():
    assert rank(RationalMatrix.identity(5)) == 5
    assert rank(RationalMatrix.zeros(3, 4)) == 0
    assert rank(RationalMatrix.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]])) == 2


@settings(max_examples=100, deadline=None)
@given(rational_matrices())
def test_kernel_is_null_space(rows):
    m = RationalMatrix.from_rows(rows)
    ker = kernel_basis(m)
    assert len(ker) == m.cols - rank(m)
    for v in ker:
        assert (m @ v).is_zero()
    if ker:
        assert rank(RationalMatrix.stack(ker)) == len(ker)


# --- Gram-Schmidt -----------------------------------------------------------------


def test_orthogonalize_example():
    out = orthogonalize([RationalVector.of([1, 1, 1]), RationalVector.basis(3, 0), RationalVector.basis(3, 1)])
    assert [list(v) for v in out] == [[1, 1, 1], [2, -1, -1], [0, 1, -1]]


def test_orthogonalize_rejects_dependence():
    with pytest.raises(LinearDependenceError):
        orthogonalize([RationalVector.of([1, 2]), RationalVector.of([2, 4])])


@settings(max_examples=100, deadline=None)
@given(rational_matrices(max_n=5))
def test_orthogonalize_properties(rows):
    vs = [RationalVector.of(r) for r in rows]
    if rank(RationalMatrix.stack(vs)) < len(vs):
        with pytest.raises(LinearDependenceError):
            orthogonalize(vs)
        return
    out = orthogonalize(vs)
    for i in range(len(out)):
        for j in range(i):
            assert out[i].dot(out[j]) == 0
    # same span
    assert rank(RationalMatrix.stack(vs + out)) == len(vs)


# --- characteristic polynomial ----------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(rational_matrices(max_n=7, square=True))
def test_char_poly_matches_faddeev_leverrier(rows):
    assert char_poly(RationalMatrix.from_rows(rows)) == faddeev_leverrier(rows)


def test_char_poly_examples():
    assert char_poly(RationalMatrix.from_rows([[0, 1], [1, 0]])) == [1, 0, -1]
    assert char_poly(RationalMatrix.identity(3)) == [1, -3, 3, -1]
    assert char_poly(RationalMatrix.from_rows([[Fraction(1, 2)]])) == [1, Fraction(-1, 2)]


def test_char_poly_large_entries():
    rng = np.random.default_rng(3)
    rows = [[int(x) for x in r] for r in rng.integers(-10**6, 10**6, size=(9, 9))]
    assert char_poly(RationalMatrix.from_rows(rows)) == faddeev_leverrier(rows)


# --- PSD --------------------------------------------------------------------------


@st.composite
def congruent_spectra(draw):
    """B diag(lam) B^T with B invertible: inertia equals that of lam."""
    n = draw(st.integers(1, 6))
    lam = draw(st.lists(st.integers(-3, 5), min_size=n, max_size=n))
    b = draw(int_matrix(n, n))
    if rank_oracle(b) < n:
        b = [[int(i == j) + x * (j > i) for j, x in enumerate(r)] for i, r in enumerate(b)]
    bm = RationalMatrix.from_rows(b)
    m = bm @ RationalMatrix.from_rows([[lam[i] if i == j else 0 for j in range(n)] for i in range(n)]) @ bm.T
    return m, lam


@settings(max_examples=150, deadline=None)
@given(congruent_spectra())
def test_is_psd_against_constructed_inertia(case):
    m, lam = case
    assert is_psd(m) == (min(lam) >= 0)


def test_is_psd_examples():
    assert is_psd(RationalMatrix.identity(4))
    assert is_psd(RationalMatrix.zeros(3, 3))
    assert not is_psd(RationalMatrix.from_rows([[0, 1], [1, 0]]))
    assert is_psd(RationalMatrix.from_rows([[1, 1], [1, 1]]))
    assert not is_psd(RationalMatrix.from_rows([[1, 0], [0, Fraction(-1, 10**12)]]))


def test_is_psd_requires_symmetry():
    with pytest.raises(ValueError):
        is_psd(RationalMatrix.from_rows([[1, 2], [0, 1]]))


@settings(max_examples=60, deadline=None)
@given(rational_matrices(max_n=6, square=True))
def test_min_eig_bound_encloses(rows):
    m = RationalMatrix.from_rows(rows)
    m = (m + m.T) / 2
    lo, hi = min_eig_bound(m, 1e-9)
    true = np.linalg.eigvalsh(m.to_float())[0]
    assert lo <= hi and hi - lo <= 1e-8
    assert lo - 1e-9 <= true <= hi + 1e-9


def test_min_eig_bound_exact_root():
    assert min_eig_bound(RationalMatrix.identity(3)) == (1.0, 1.0)
    lo, hi = min_eig_bound(RationalMatrix.from_rows([[0, 1], [1, 0]]))
    assert lo <= -1 <= hi


# --- text format ------------------------------------------------------------------


def test_rmat_format_example():
    m = RationalMatrix.from_rows([[Fraction(82, 360), 0], [Fraction(-1, 3), 2]])
    assert format_rmat(m) == "rmat 2 2\n41/180 0/1\n-1/3 2/1\n"


@settings(max_examples=100, deadline=None)
@given(rational_matrices())
def test_rmat_round_trip(rows):
    m = RationalMatrix.from_rows(rows)
    text = format_rmat(m)
    back = parse_rmat(text)
    assert back == m and format_rmat(back) == text


@pytest.mark.parametrize("text", ["", "rmat 2 2\n1/1 0/1\n", "matrix 1 1\n1/1\n", "rmat 1 2\n1/1\n"])
def test_rmat_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_rmat(text)
