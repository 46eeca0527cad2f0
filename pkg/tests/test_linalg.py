import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvfuse.linalg import SpectrumError, retained_count, spectral_pseudo_inverse, sym_eigen


def gauss_jordan_inverse(a):
    """Brute-force inverse by Gauss-Jordan elimination with partial pivoting."""
    a = [list(map(float, row)) for row in a]
    m = len(a)
    inv = [[float(i == j) for j in range(m)] for i in range(m)]
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(a[r][col]))
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = a[col][col]
        a[col] = [x / d for x in a[col]]
        inv[col] = [x / d for x in inv[col]]
        for r in range(m):
            if r != col:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return np.array(inv)


def random_spd(rng, m):
    q = rng.normal(size=(m, m))
    return q @ q.T + m * np.eye(m)


def test_identity_eigen():
    dec = sym_eigen(np.eye(3))
    assert np.allclose(dec.eigenvalues, 1.0)


def test_diagonal_eigen():
    dec = sym_eigen(np.diag([1.0, 4.0]))
    assert np.allclose(dec.eigenvalues, [4.0, 1.0])
    assert np.allclose(np.abs(dec.eigenvectors), [[0, 1], [1, 0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
def test_reconstruction_and_orthonormality(m, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, m)) * rng.uniform(0.1, 100)
    a = a + a.T
    dec = sym_eigen(a)
    scale = max(1.0, np.abs(a).max())
    assert np.abs(dec.reconstruct() - a).max() <= 1e-8 * scale
    assert np.abs(dec.eigenvectors.T @ dec.eigenvectors - np.eye(m)).max() <= 1e-8
    assert np.all(np.diff(dec.eigenvalues) <= 0)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        sym_eigen([[1.0, np.nan], [np.nan, 1.0]])


def test_pinv_identity():
    assert np.allclose(spectral_pseudo_inverse(np.eye(4), 1.0), np.eye(4), atol=1e-14)


def test_pinv_cutoff_drops_small_direction():
    out = spectral_pseudo_inverse(np.diag([4.0, 1.0]), 0.8)
    assert np.allclose(out, np.diag([0.25, 0.0]), atol=1e-15)


def test_pinv_matches_gauss_jordan_3x3(rng):
    a = random_spd(rng, 3)
    assert np.abs(spectral_pseudo_inverse(a, 1.0) - gauss_jordan_inverse(a)).max() <= 1e-8


def test_no_positive_spectrum():
    with pytest.raises(SpectrumError, match="no positive spectrum"):
        spectral_pseudo_inverse(-np.eye(2))
    with pytest.raises(SpectrumError):
        spectral_pseudo_inverse(np.zeros((2, 2)))


def test_negative_eigenvalues_are_clamped():
    # eigenvalues 3 and -1
    a = np.array([[1.0, 2.0], [2.0, 1.0]])
    out = spectral_pseudo_inverse(a, 1.0)
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    assert np.allclose(out, np.outer(v, v) / 3.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**32 - 1))
def test_pinv_properties(m, seed):
    rng = np.random.default_rng(seed)
    a = random_spd(rng, m)
    inv = spectral_pseudo_inverse(a, 1.0)
    assert np.abs(inv @ a - np.eye(m)).max() <= 1e-8
    assert np.array_equal(inv, inv.T)
    assert np.linalg.eigvalsh(inv).min() >= -1e-12
    c = float(rng.uniform(0.01, 100))
    assert np.allclose(spectral_pseudo_inverse(c * a, 1.0), inv / c, rtol=1e-9, atol=0)


@given(st.lists(st.floats(min_value=-1, max_value=100), min_size=1, max_size=8),
       st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.01, max_value=1.0))
def test_retained_count_monotone(eigs, c1, c2):
    eigs = np.sort(np.asarray(eigs))[::-1]
    lo, hi = sorted((c1, c2))
    assert retained_count(eigs, lo) <= retained_count(eigs, hi) <= len(eigs)
