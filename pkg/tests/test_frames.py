import numpy as np
import pytest

from framelift.frames import (MeasurementEnsemble, antidiag_pair, banded_basis,
                              build_ensemble, check_nodes, coefficient_blocks,
                              cos_sin_coefficients, cos_sin_matrices,
                              default_nodes_rank_one, ensemble_from_dict,
                              ensemble_to_dict, example_n4, expected_count,
                              general_ensemble, max_rank, phase_vector,
                              rank_one_frame, vandermonde_ensemble)
from framelift.hermitian import antidiag_len, hs_inner, hvec
from framelift.measurement import orthonormal_rows

I = 1j

# The 14 golden 4x4 operators, entry for entry.
GOLDEN_N4 = [np.array(M, dtype=complex) for M in [
    [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]],
    [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[0, I, 0, 0], [-I, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 0, I, 0], [0, 0, 0, 0], [-I, 0, 0, 0], [0, 0, 0, 0]],
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    [[0, 0, 0, I], [0, 0, I, 0], [0, -I, 0, 0], [-I, 0, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0], [0, 1, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 0, I], [0, 0, 0, 0], [0, -I, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, I], [0, 0, -I, 0]],
]]


def spans_match(rows_a, rows_b, tol=1e-9):
    Qa, Qb = orthonormal_rows(rows_a), orthonormal_rows(rows_b)
    if Qa.shape[0] != Qb.shape[0]:
        return False
    resid = Qb - (Qb @ Qa.T) @ Qa
    return float(np.linalg.norm(resid, 2)) <= tol if resid.size else True


class TestPhaseVector:
    def test_n2(self):
        v = phase_vector(2, 1.0)
        assert np.allclose(v, [1.0, np.exp(1j * np.pi / 4)], atol=1e-15)

    def test_n4(self):
        v = phase_vector(4, 1.0)
        expected = [1.0, np.exp(1j * np.pi / 8), np.exp(1j * np.pi / 4),
                    np.exp(3j * np.pi / 8)]
        assert np.allclose(v, expected, atol=1e-15)

    def test_squared_norm(self):
        for n in (3, 5, 8):
            for x in (-1.3, 0.4, 1.1):
                v = phase_vector(n, x)
                expected = sum(x ** (2 * j) for j in range(n))
                assert np.vdot(v, v).real == pytest.approx(expected, rel=1e-12)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            phase_vector(4, 0.0)

    def test_rejects_degenerate_phase(self):
        with pytest.raises(ValueError, match="phase"):
            phase_vector(4, 1.0, phi=np.pi / 2)
        # valid alternative phase is accepted
        phase_vector(4, 1.0, phi=np.pi / 5)


class TestRankOneFrame:
    @pytest.mark.parametrize("n", range(3, 41))
    def test_count(self, n):
        assert rank_one_frame(n).m == 5 * n - 6

    def test_n3_structure(self):
        ens = rank_one_frame(3)
        assert ens.m == 9
        for i in range(3):
            expected = np.zeros((3, 3))
            expected[i, i] = 1
            assert np.allclose(ens.matrices[i], expected)
        # conjugate pairs: operator 2k+4 is the entrywise conjugate of 2k+3
        for k in range(3):
            A = ens.matrices[3 + 2 * k]
            B = ens.matrices[4 + 2 * k]
            assert np.allclose(B, A.conj(), atol=1e-14)

    def test_unit_frobenius_projectors(self):
        ens = rank_one_frame(5)
        for G in ens.matrices[5:]:
            assert np.linalg.norm(G) == pytest.approx(1.0, abs=1e-12)
            vals = np.linalg.eigvalsh(G)
            assert np.sum(vals > 1e-10) == 1  # rank one

    def test_node_validation(self):
        with pytest.raises(ValueError):
            rank_one_frame(4, nodes=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])  # wrong count
        with pytest.raises(ValueError):
            rank_one_frame(4, nodes=[0.3, 0.2, 0.4, 0.5, 0.6])  # not increasing
        with pytest.raises(ValueError):
            rank_one_frame(4, nodes=[-0.2, 0.0, 0.2, 0.4, 0.6])  # zero node
        with pytest.raises(ValueError):
            rank_one_frame(2)

    def test_default_nodes(self):
        for n in (3, 7, 12):
            nodes = default_nodes_rank_one(n)
            check_nodes(nodes, count=2 * n - 3)


class TestBandedBasis:
    def test_rank_one_is_diagonal_units(self):
        basis = banded_basis(5, 1)
        assert len(basis) == 5
        for i, B in enumerate(basis):
            expected = np.zeros((5, 5))
            expected[i, i] = 1
            assert np.allclose(B, expected)

    def test_golden_mask_n7_r3(self):
        # support pattern: zeros exactly at off-diagonal positions with
        # 5 <= i+j <= 7
        mask = np.array([
            [1, 1, 1, 1, 1, 0, 0],
            [1, 1, 1, 1, 0, 0, 0],
            [1, 1, 1, 0, 0, 0, 1],
            [1, 1, 0, 1, 0, 1, 1],
            [1, 0, 0, 0, 1, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
            [0, 0, 1, 1, 1, 1, 1],
        ], dtype=bool)
        support = np.zeros((7, 7), dtype=bool)
        for B in banded_basis(7, 3):
            support |= np.abs(B) > 0
        assert np.array_equal(support, mask)

    def test_dimension(self):
        assert len(banded_basis(5, 2)) == 13  # n + 4r(r-1) = 5 + 8
        for n in range(3, 11):
            for r in range(1, max_rank(n) + 1):
                assert len(banded_basis(n, r)) == n + 4 * r * (r - 1)

    def test_orthonormal(self):
        rows = np.stack([hvec(B) for B in banded_basis(6, 2)])
        assert np.allclose(rows @ rows.T, np.eye(rows.shape[0]), atol=1e-12)

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            banded_basis(5, 3)


class TestAntidiagPair:
    def test_golden_n5_k3(self):
        x = 2.0
        R, Im = antidiag_pair(5, 3, x)
        Rg = np.zeros((5, 5), dtype=complex)
        Rg[0, 3] = Rg[3, 0] = 1
        Rg[1, 2] = Rg[2, 1] = x
        Ig = np.zeros((5, 5), dtype=complex)
        Ig[0, 3] = I
        Ig[1, 2] = I * x
        Ig[2, 1] = -I * x
        Ig[3, 0] = -I
        assert np.allclose(R, Rg, atol=1e-14)
        assert np.allclose(Im, Ig, atol=1e-14)

    def test_golden_n5_k4(self):
        x = 2.0
        R, Im = antidiag_pair(5, 4, x)
        Rg = np.zeros((5, 5), dtype=complex)
        Rg[0, 4] = Rg[4, 0] = 1
        Rg[1, 3] = Rg[3, 1] = x
        assert np.allclose(R, Rg, atol=1e-14)
        assert R[2, 2] == 0  # zero center
        Ig = np.zeros((5, 5), dtype=complex)
        Ig[0, 4] = I
        Ig[1, 3] = I * x
        Ig[3, 1] = -I * x
        Ig[4, 0] = -I
        assert np.allclose(Im, Ig, atol=1e-14)

    def test_golden_n5_k5(self):
        x = 2.0
        R, Im = antidiag_pair(5, 5, x)
        Rg = np.zeros((5, 5), dtype=complex)
        Rg[1, 4] = Rg[4, 1] = 1
        Rg[2, 3] = Rg[3, 2] = x
        assert np.allclose(R, Rg, atol=1e-14)
        Ig = np.zeros((5, 5), dtype=complex)
        Ig[1, 4] = I
        Ig[2, 3] = I * x
        Ig[3, 2] = -I * x
        Ig[4, 1] = -I
        assert np.allclose(Im, Ig, atol=1e-14)

    def test_real_imag_orthogonal(self):
        for k in (2, 5, 6):
            R, Im = antidiag_pair(5, k, 0.7)
            assert hs_inner(R, Im) == 0.0

    def test_rejects_zero_node(self):
        with pytest.raises(ValueError):
            antidiag_pair(5, 3, 0.0)


class TestVandermondeEnsemble:
    def test_count_5_2(self):
        assert vandermonde_ensemble(5, 2).m == 25

    def test_rank_one_count_matches_frame(self):
        assert vandermonde_ensemble(4, 1, [1.0]).m == 14 == 5 * 4 - 6

    @pytest.mark.parametrize("n", range(3, 17))
    def test_counts_all_ranks(self, n):
        for r in range(1, max_rank(n) + 1):
            assert vandermonde_ensemble(n, r).m == expected_count(n, r)

    def test_coefficient_columns_are_vandermonde(self):
        nodes = [0.5, 1.0]
        ens = vandermonde_ensemble(6, 2, nodes)
        for k, (A, Ai) in coefficient_blocks(ens).items():
            g = antidiag_len(6, k)
            expected = np.array(nodes)[None, :] ** np.arange(g)[:, None]
            assert np.allclose(A, expected)
            assert np.allclose(Ai, expected)

    def test_requires_positive_nodes(self):
        with pytest.raises(ValueError, match="positive"):
            vandermonde_ensemble(6, 2, [-1.0, 1.0])

    def test_operator_order_imag_then_real(self):
        ens = vandermonde_ensemble(5, 1, [0.5])
        G = ens.matrices[5]  # first antidiagonal operator after the banded block
        assert np.allclose(G, antidiag_pair(5, 1, 0.5)[1])
        assert np.allclose(ens.matrices[6], antidiag_pair(5, 1, 0.5)[0])


class TestGeneralEnsemble:
    def test_all_ones_matches_fixed_example(self):
        blocks = {k: np.sqrt(2.0) * np.ones((antidiag_len(4, k), 1))
                  for k in range(1, 6)}
        ens = general_ensemble(4, 1, blocks)
        fixed = example_n4()
        assert ens.m == fixed.m
        for A, B in zip(ens.matrices, fixed.matrices):
            assert np.allclose(A, B, atol=1e-14)

    def test_vandermonde_blocks_span_matches_thm2(self):
        n, r = 6, 2
        nodes = [0.5, 1.0]
        blocks = {k: np.array(nodes)[None, :] ** np.arange(antidiag_len(n, k))[:, None]
                  for k in range(2 * r - 1, 2 * (n - r))}
        ens = general_ensemble(n, r, blocks)
        ens2 = vandermonde_ensemble(n, r, nodes)
        assert spans_match(ens.coord_rows(), ens2.coord_rows())

    def test_rejects_zero_entry(self):
        blocks = {k: np.ones((antidiag_len(4, k), 1)) for k in range(1, 6)}
        blocks[3] = np.array([[1.0], [0.0]])
        with pytest.raises(ValueError, match="totally non-singular"):
            general_ensemble(4, 1, blocks)

    def test_rejects_missing_block(self):
        with pytest.raises(ValueError, match="missing"):
            general_ensemble(4, 1, {1: np.ones((1, 1))})


class TestExampleN4:
    def test_count(self):
        assert example_n4().m == 14

    def test_entry_for_entry(self):
        ens = example_n4()
        for got, expected in zip(ens.matrices, GOLDEN_N4):
            assert np.array_equal(got, expected)

    def test_ninth_operator_full_antidiagonal(self):
        assert np.array_equal(example_n4().matrices[8], GOLDEN_N4[8])


class TestCosSin:
    def test_offdiagonal_entries_nonzero(self):
        for n in (4, 6):
            for k in range(1, 2 * n - 2):
                X, Y = cos_sin_matrices(n, k)
                js = np.arange(max(0, k - n + 1), (k + 1) // 2)
                assert np.all(np.abs(X[js, k - js]) > 0)
                assert np.all(np.abs(Y[js, k - js]) > 0)
                u, w = cos_sin_coefficients(n, k)
                assert np.all(np.abs(u) > 0) and np.all(np.abs(w) > 0)

    def test_hs_orthogonal(self):
        for k in (1, 3, 4):
            X, Y = cos_sin_matrices(4, k)
            assert abs(hs_inner(X, Y)) <= 1e-14

    def test_even_k_diagonal_entry(self):
        X, Y = cos_sin_matrices(5, 4)
        assert X[2, 2] == 1.0
        assert Y[2, 2] == 0.0

    def test_span_equals_rank_one_frame(self):
        for n in (4, 6):
            ens = rank_one_frame(n)
            alt = [hvec(ens.matrices[i]) for i in range(n)]
            for k in range(1, 2 * n - 2):
                X, Y = cos_sin_matrices(n, k)
                alt.append(hvec(X))
                alt.append(hvec(Y))
            assert spans_match(ens.coord_rows(), np.stack(alt))


class TestSerialization:
    def test_roundtrip(self):
        ens = vandermonde_ensemble(5, 2)
        back = ensemble_from_dict(ensemble_to_dict(ens))
        assert back.n == ens.n and back.r == ens.r and back.recipe == ens.recipe
        assert np.array_equal(back.matrices, ens.matrices)

    def test_json_schema_fields(self):
        d = ensemble_to_dict(example_n4())
        assert set(d) == {"n", "r", "recipe", "params", "matrices"}
        assert len(d["matrices"]) == 14
        assert d["matrices"][0][0][0] == [1.0, 0.0]

    def test_build_dispatch(self):
        assert build_ensemble("thm1", 4).recipe == "thm1"
        assert build_ensemble("thm2", 6, 2).recipe == "thm2"
        assert build_ensemble("example_n4", 4).m == 14
        with pytest.raises(ValueError):
            build_ensemble("thm3", 4)
        with pytest.raises(ValueError):
            build_ensemble("nope", 4)

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError):
            MeasurementEnsemble(3, 1, np.zeros((2, 2, 2)), "custom")
        with pytest.raises(ValueError):
            ensemble_from_dict({"n": 2, "r": 1, "recipe": "custom",
                                "matrices": [[[1.0, 0.0], [0.0, 1.0]]]})
