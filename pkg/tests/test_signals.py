"""Basis and signal-model tests."""

import numpy as np
import pytest

from cscollect.errors import SignalDataError
from cscollect.signals import (
    BasisKind,
    Signal,
    SparseCoefficients,
    SparsifyingBasis,
    analyze,
    load_signal_csv,
    synthesize,
    synthesize_sparse_signal,
    temperature_trace,
)

ALL_KINDS = [BasisKind.CANONICAL, BasisKind.DCT, BasisKind.FOURIER]


def dct2_analysis_oracle(n):
    """Explicitly tabulated orthonormal DCT-II analysis matrix."""
    d = np.zeros((n, n))
    for k in range(n):
        scale = np.sqrt(1.0 / n) if k == 0 else np.sqrt(2.0 / n)
        for i in range(n):
            d[k, i] = scale * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    return d


class TestBases:
    def test_dct_matrix_matches_tabulated_oracle(self):
        """Fast-transform basis matrix equals the closed-form DCT-II table."""
        for n in (4, 16, 64):
            basis = SparsifyingBasis(BasisKind.DCT, n)
            np.testing.assert_allclose(
                basis.analysis_matrix(), dct2_analysis_oracle(n), atol=1e-12
            )

    def test_fourier_matrix_small_case(self):
        """N=4 real Fourier rows match hand-computed values."""
        basis = SparsifyingBasis(BasisKind.FOURIER, 4)
        r = np.sqrt(2.0) / 2.0
        expected = np.array(
            [
                [0.5, 0.5, 0.5, 0.5],
                [r, 0.0, -r, 0.0],
                [0.0, r, 0.0, -r],
                [0.5, -0.5, 0.5, -0.5],
            ]
        )
        np.testing.assert_allclose(basis.analysis_matrix(), expected, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("n", [8, 64, 256])
    def test_orthonormality(self, kind, n):
        """B^T B = I within 1e-9 for every kind and dimension."""
        b = SparsifyingBasis(kind, n).matrix()
        np.testing.assert_allclose(b.T @ b, np.eye(n), atol=1e-9)
        np.testing.assert_allclose(b @ b.T, np.eye(n), atol=1e-9)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("n", [8, 64, 256])
    def test_round_trip(self, kind, n):
        """synthesize(analyze(x)) returns x within 1e-9 relative error."""
        basis = SparsifyingBasis(kind, n)
        rng = np.random.default_rng(172)
        for _ in range(100):
            x = Signal(rng.normal(size=n))
            back = synthesize(basis, analyze(basis, x))
            err = np.linalg.norm(back.samples - x.samples) / np.linalg.norm(x.samples)
            assert err <= 1e-9

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_analyze_linearity(self, kind):
        basis = SparsifyingBasis(kind, 32)
        rng = np.random.default_rng(7)
        x = rng.normal(size=32)
        z = rng.normal(size=32)
        lhs = analyze(basis, Signal(2.5 * x - 0.7 * z)).values
        rhs = 2.5 * analyze(basis, Signal(x)).values - 0.7 * analyze(basis, Signal(z)).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_fast_path_matches_dense_product(self, kind):
        """Transform shortcut agrees with the explicit matrix product."""
        basis = SparsifyingBasis(kind, 48)
        rng = np.random.default_rng(99)
        x = rng.normal(size=48)
        np.testing.assert_allclose(
            analyze(basis, Signal(x)).values, basis.analysis_matrix() @ x, atol=1e-12
        )
        s = rng.normal(size=48)
        np.testing.assert_allclose(
            synthesize(basis, SparseCoefficients(s)).samples,
            basis.matrix() @ s,
            atol=1e-12,
        )


class TestSparseSynthesis:
    def test_exact_support_exhaustive(self):
        """Every 1 <= K <= N on small N yields exactly K nonzeros."""
        for n in (1, 2, 3, 5, 8, 16, 33, 64):
            basis = SparsifyingBasis(BasisKind.CANONICAL, n)
            for k in range(1, n + 1):
                _, coeffs = synthesize_sparse_signal(n, k, basis, (-1, 1), seed=n * 100 + k)
                assert np.count_nonzero(coeffs.values) == k
                assert coeffs.sparsity_hint == k

    def test_values_within_range(self):
        basis = SparsifyingBasis(BasisKind.DCT, 64)
        _, coeffs = synthesize_sparse_signal(64, 10, basis, (-1, 1), seed=5)
        nz = coeffs.values[coeffs.values != 0]
        assert np.all(nz >= -1) and np.all(nz <= 1)

    def test_signal_consistent_with_coeffs(self):
        basis = SparsifyingBasis(BasisKind.FOURIER, 32)
        sig, coeffs = synthesize_sparse_signal(32, 4, basis, (-2, 2), seed=11)
        np.testing.assert_allclose(
            sig.samples, synthesize(basis, coeffs).samples, atol=1e-12
        )

    def test_deterministic_in_seed(self):
        basis = SparsifyingBasis(BasisKind.DCT, 40)
        a = synthesize_sparse_signal(40, 6, basis, (-1, 1), seed=42)
        b = synthesize_sparse_signal(40, 6, basis, (-1, 1), seed=42)
        np.testing.assert_array_equal(a[1].values, b[1].values)
        c = synthesize_sparse_signal(40, 6, basis, (-1, 1), seed=43)
        assert not np.array_equal(a[1].values, c[1].values)

    def test_bad_k_rejected(self):
        basis = SparsifyingBasis(BasisKind.CANONICAL, 8)
        with pytest.raises(ValueError):
            synthesize_sparse_signal(8, 0, basis)
        with pytest.raises(ValueError):
            synthesize_sparse_signal(8, 9, basis)

    def test_sparsity_hint_enforced(self):
        with pytest.raises(ValueError):
            SparseCoefficients(values=np.ones(4), sparsity_hint=2)


class TestCsvLoading:
    def _write(self, tmp_path, text, name="trace.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_basic_column_read(self, tmp_path):
        p = self._write(tmp_path, "1.0,10.0\n2.0,20.0\n3.0,30.0\n")
        sig = load_signal_csv(p, column=1)
        np.testing.assert_array_equal(sig.samples, [10.0, 20.0, 30.0])

    def test_offset_length_skiprows(self, tmp_path):
        p = self._write(tmp_path, "time,val\n0,1.5\n1,2.5\n2,3.5\n3,4.5\n")
        sig = load_signal_csv(p, column=1, offset=1, length=2, skip_rows=1)
        np.testing.assert_array_equal(sig.samples, [2.5, 3.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_signal_csv(tmp_path / "absent.csv")

    def test_short_file(self, tmp_path):
        p = self._write(tmp_path, "1.0\n2.0\n")
        with pytest.raises(SignalDataError, match="need 5"):
            load_signal_csv(p, length=5)

    def test_non_numeric_cell_named(self, tmp_path):
        p = self._write(tmp_path, "1.0\nbogus\n3.0\n")
        with pytest.raises(SignalDataError, match="row 2"):
            load_signal_csv(p)

    def test_zero_length_rejected(self, tmp_path):
        p = self._write(tmp_path, "1.0\n")
        with pytest.raises(SignalDataError, match="empty"):
            load_signal_csv(p, length=0)

    def test_non_finite_rejected(self, tmp_path):
        p = self._write(tmp_path, "1.0\nnan\n")
        with pytest.raises(SignalDataError, match="non-finite"):
            load_signal_csv(p)


class TestTemperatureTrace:
    def test_deterministic(self):
        a = temperature_trace(512, seed=3)
        b = temperature_trace(512, seed=3)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_dct_compressible(self):
        """Bulk of the energy sits in a small fraction of DCT coefficients."""
        sig = temperature_trace(1024, seed=0)
        basis = SparsifyingBasis(BasisKind.DCT, 1024)
        s = analyze(basis, sig).values
        energy = np.sort(s**2)[::-1]
        assert energy[:64].sum() / energy.sum() >= 0.99
