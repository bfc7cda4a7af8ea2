import itertools

import numpy as np
import pytest

from framelift.nonsingular import (MINOR_BUDGET, TNSReport, all_minors_nonzero,
                                   bareiss_det, minor_count, tns_complement)


def brute_minors(A):
    """Independent oracle: every minor determinant via numpy.linalg.det."""
    A = np.asarray(A, dtype=float)
    p, q = A.shape
    out = []
    for s in range(1, min(p, q) + 1):
        for rows in itertools.combinations(range(p), s):
            for cols in itertools.combinations(range(q), s):
                out.append(float(np.linalg.det(A[np.ix_(rows, cols)])))
    return out


def vandermonde(nodes, q):
    nodes = np.asarray(nodes, dtype=float)
    return nodes[:, None] ** np.arange(q)


class TestBareissDet:
    def test_matches_numpy(self):
        rng = np.random.default_rng(0)
        for s in range(1, 7):
            for _ in range(20):
                M = rng.normal(size=(s, s))
                assert bareiss_det(M) == pytest.approx(float(np.linalg.det(M)),
                                                       rel=1e-9, abs=1e-12)

    def test_exactly_singular(self):
        assert bareiss_det(np.array([[1.0, 1.0], [1.0, 1.0]])) == 0.0

    def test_needs_pivoting(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert bareiss_det(M) == pytest.approx(-1.0)


class TestAllMinorsNonzero:
    def test_singular_2x2_witnessed(self):
        report = all_minors_nonzero(np.ones((2, 2)))
        assert not report.is_tns
        assert report.witness == ((0, 1), (0, 1))

    def test_column_vector(self):
        report = all_minors_nonzero(np.array([1.0, 2.0, 4.0]))
        assert report.is_tns
        assert report.minors_checked == 3

    def test_vandermonde_columns(self):
        A = vandermonde([0.5, 1.0], 2)
        # oracle: enumerate the 1x1 and 2x2 minors directly
        assert min(abs(m) for m in brute_minors(A)) > 1e-12
        report = all_minors_nonzero(vandermonde([0.5, 1.0, 1.5, 2.0], 2))
        assert report.is_tns

    def test_zero_entry_witnessed(self):
        A = np.array([[1.0, 2.0], [0.0, 1.0], [3.0, 4.0]])
        report = all_minors_nonzero(A)
        assert not report.is_tns
        assert report.witness == ((1,), (0,))

    def test_min_abs_minor_matches_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            A = rng.normal(size=(4, 3))
            report = all_minors_nonzero(A)
            oracle = brute_minors(A)
            assert report.minors_checked == len(oracle) == minor_count(4, 3)
            assert report.min_abs_minor == pytest.approx(min(abs(m) for m in oracle),
                                                         rel=1e-9)

    def test_permutation_covariance(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(4, 3))
        A[2, 1] = 0.0
        base = all_minors_nonzero(A)
        assert not base.is_tns and base.witness == ((2,), (1,))
        perm_rows = [3, 2, 1, 0]
        perm_cols = [1, 0, 2]
        report = all_minors_nonzero(A[np.ix_(perm_rows, perm_cols)])
        assert not report.is_tns
        assert report.witness == ((perm_rows.index(2),), (perm_cols.index(1),))

    def test_permutation_preserves_property(self):
        rng = np.random.default_rng(3)
        A = vandermonde(np.sort(rng.uniform(0.1, 2.0, size=5)), 3)
        assert all_minors_nonzero(A).is_tns
        perm = rng.permutation(5)
        assert all_minors_nonzero(A[perm]).is_tns

    def test_budget_guard(self):
        big = np.ones((40, 20))
        assert minor_count(40, 20) > MINOR_BUDGET
        with pytest.raises(ValueError, match="budget"):
            all_minors_nonzero(big)


class TestTnsComplement:
    def test_two_vector(self):
        B = tns_complement(np.array([[1.0], [1.0]]), seed=0)
        assert B.shape == (2, 1)
        assert B[0, 0] == pytest.approx(-B[1, 0], rel=1e-12)

    def test_ones_column(self):
        A = np.ones((3, 1))
        B = tns_complement(A, seed=1)
        assert B.shape == (3, 2)
        assert np.abs(A.T @ B).max() <= 1e-10
        assert all_minors_nonzero(B).is_tns

    def test_vandermonde_input(self):
        A = vandermonde([0.5, 1.0, 1.5, 2.0], 2)
        B = tns_complement(A, seed=2)
        assert B.shape == (4, 2)
        assert np.abs(A.T @ B).max() <= 1e-10
        assert all_minors_nonzero(B).is_tns

    def test_codimension_one_unique_up_to_scale(self):
        A = vandermonde([0.3, 0.8, 1.4, 2.1], 3)
        B1 = tns_complement(A, seed=10).ravel()
        B2 = tns_complement(A, seed=99).ravel()
        cross = B1 / np.linalg.norm(B1) - np.sign(B1[0] * B2[0]) * B2 / np.linalg.norm(B2)
        assert np.linalg.norm(cross) <= 1e-9

    def test_rejects_non_tns_input(self):
        with pytest.raises(ValueError, match="not totally non-singular"):
            tns_complement(np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 2.0]]), seed=0)

    def test_rejects_wide_input(self):
        with pytest.raises(ValueError):
            tns_complement(np.ones((2, 2)), seed=0)

    def test_never_returns_unverified(self):
        # well-separated nodes keep every input minor clear of the tolerance
        rng = np.random.default_rng(4)
        for _ in range(20):
            p = int(rng.integers(3, 8))
            q = int(rng.integers(1, p))
            nodes = 0.3 + 0.25 * np.arange(p) + rng.uniform(-0.05, 0.05, size=p)
            A = vandermonde(nodes, q)
            B = tns_complement(A, seed=rng)
            assert np.abs(A.T @ B).max() <= 1e-10
            assert all_minors_nonzero(B).is_tns

    def test_report_truthiness(self):
        assert TNSReport(True, 1.0, 3)
        assert not TNSReport(False, 0.0, 1, ((0,), (0,)))
