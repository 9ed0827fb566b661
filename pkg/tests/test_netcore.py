"""Structural primitives: conversions, topology predicates, file formats."""

import numpy as np
import pytest

from opiniondyn import fixtures as fx
from opiniondyn.errors import ValidationError
from opiniondyn.netcore import (
    AppraisalMatrix,
    ConversionParams,
    InteractingLaplacian,
    StochasticMatrix,
    SusceptibilityMatrix,
    SystemSpec,
    abs_matrix,
    appraisal_kind,
    has_spanning_tree,
    laplacian_to_stochastic,
    load_matrix_csv,
    parse_vector_arg,
    same_topology,
    save_matrix_csv,
    spanning_tree_root,
    stochastic_to_laplacian,
)

from conftest import random_laplacian, random_spanning_tree_laplacian, random_stochastic


class TestConversions:
    def test_measured_influence_matrix(self):
        L = stochastic_to_laplacian(fx.INFLUENCE_P, ConversionParams(1.0))
        np.testing.assert_allclose(L.entries[0], [0.78, -0.12, -0.36, -0.3], atol=1e-15)
        np.testing.assert_allclose(L.entries, fx.INFLUENCE_LAPLACIAN, atol=1e-15)

    def test_identity_maps_to_zero(self):
        L = stochastic_to_laplacian(np.eye(3), 0.7)
        np.testing.assert_array_equal(L.entries, np.zeros((3, 3)))

    def test_swap_matrix(self):
        L = stochastic_to_laplacian(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0)
        np.testing.assert_allclose(L.entries, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-15)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            stochastic_to_laplacian(np.array([[0.5, 0.6], [0.5, 0.5]]), 1.0)
        with pytest.raises(ValidationError):
            stochastic_to_laplacian(np.eye(2), 0.0)
        with pytest.raises(ValidationError):
            stochastic_to_laplacian(np.eye(2), -1.0)

    def test_inverse_zero_laplacian(self):
        P = laplacian_to_stochastic(np.zeros((3, 3)), 1.0)
        np.testing.assert_array_equal(P.entries, np.eye(3))

    def test_inverse_half_step(self):
        P = laplacian_to_stochastic(np.array([[1.0, -1.0], [-1.0, 1.0]]), 0.5)
        np.testing.assert_allclose(P.entries, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_round_trip_measured_matrix(self):
        L = stochastic_to_laplacian(fx.INFLUENCE_P, 1.0)
        P = laplacian_to_stochastic(L, 1.0)
        np.testing.assert_allclose(P.entries, fx.INFLUENCE_P, atol=1e-14)

    def test_inverse_rejects_large_eps(self):
        with pytest.raises(ValidationError):
            laplacian_to_stochastic(np.array([[2.0, -2.0], [-2.0, 2.0]]), 1.0)

    def test_round_trip_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            P = random_stochastic(rng, n)
            eps = float(rng.uniform(0.05, 1.0))
            L = stochastic_to_laplacian(P, eps)
            assert np.abs(L.entries.sum(axis=1)).max() <= 1e-12
            back = laplacian_to_stochastic(L, eps)
            np.testing.assert_allclose(back.entries, P, atol=1e-12)


class TestAbsMatrix:
    def test_identity(self):
        np.testing.assert_array_equal(abs_matrix(np.eye(3)).entries, np.eye(3))

    def test_antagonistic_row(self):
        got = abs_matrix(fx.ANTAG_APPRAISAL)
        np.testing.assert_allclose(got.entries[0], [0.2, 0.2, 0.3, 0.3], atol=1e-15)

    def test_negated_identity(self):
        np.testing.assert_array_equal(abs_matrix(-np.eye(3)).entries, np.eye(3))

    def test_rejects_non_unit_rows(self):
        with pytest.raises(ValidationError):
            abs_matrix(0.5 * np.eye(2))

    def test_idempotent_and_sign_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            D = random_stochastic(rng, n) * np.sign(rng.uniform(-1, 1, (n, n)))
            A = abs_matrix(D).entries
            np.testing.assert_array_equal(abs_matrix(A).entries, A)
            np.testing.assert_array_equal(abs_matrix(-D).entries, A)


class TestSameTopology:
    def test_matches_unsigned_companion(self):
        D = fx.ANTAG_APPRAISAL
        assert same_topology(D, abs_matrix(D).entries)

    def test_identity_vs_zero(self):
        assert not same_topology(np.eye(3), np.zeros((3, 3)))

    def test_bundled_appraisals_share_pattern(self):
        # Entrywise pattern oracle: the cooperative and antagonistic bundles
        # differ only in signs, never in which entries vanish.
        oracle = np.array_equal(
            np.abs(fx.COOP_APPRAISAL) > 1e-12, np.abs(fx.ANTAG_APPRAISAL) > 1e-12
        )
        assert oracle is True
        assert same_topology(fx.COOP_APPRAISAL, fx.ANTAG_APPRAISAL) == oracle

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            same_topology(np.eye(2), np.eye(3))

    def test_equivalence_relation(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            n = int(rng.integers(2, 5))
            mats = [
                np.where(rng.random((n, n)) < 0.5, rng.uniform(-1, 1, (n, n)), 0.0)
                for _ in range(3)
            ]
            a, b, c = mats
            assert same_topology(a, a)
            assert same_topology(a, b) == same_topology(b, a)
            if same_topology(a, b) and same_topology(b, c):
                assert same_topology(a, c)


class TestSpanningTree:
    def test_complete_ring(self):
        assert has_spanning_tree(fx.EXAMPLE1_LAPLACIAN)

    def test_zero_laplacian(self):
        assert not has_spanning_tree(np.zeros((3, 3)))

    def test_leader_network_rooted_at_absorbing_agent(self):
        # Row 3 of the influence Laplacian is zero: only that agent (index 2)
        # reaches everyone.
        assert spanning_tree_root(fx.INFLUENCE_LAPLACIAN) == 2

    def test_agrees_with_rank(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            n = int(rng.integers(2, 9))
            L = random_laplacian(rng, n, edge_prob=float(rng.uniform(0.1, 0.9)))
            by_rank = np.linalg.matrix_rank(L, tol=1e-9) == n - 1
            assert has_spanning_tree(L) == by_rank


class TestAppraisalKind:
    def test_cooperative_fixture(self):
        assert appraisal_kind(fx.COOP_APPRAISAL) == "cooperative"

    def test_antagonistic_fixture(self):
        assert appraisal_kind(fx.ANTAG_APPRAISAL) == "antagonistic"

    def test_identity(self):
        assert appraisal_kind(np.eye(4)) == "cooperative"

    def test_rejects_bad_rows(self):
        with pytest.raises(ValidationError):
            appraisal_kind(np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            appraisal_kind(np.array([[0.9, 0.3], [0.5, 0.5]]))


class TestValidators:
    def test_laplacian_invariants(self):
        with pytest.raises(ValidationError):
            InteractingLaplacian(np.array([[1.0, -0.5], [-1.0, 1.0]]))  # rows
        with pytest.raises(ValidationError):
            InteractingLaplacian(np.array([[-1.0, 1.0], [1.0, -1.0]]))  # signs

    def test_stochastic_invariants(self):
        with pytest.raises(ValidationError):
            StochasticMatrix(np.array([[1.2, -0.2], [0.5, 0.5]]))

    def test_antagonistic_rows_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            AppraisalMatrix(np.array([[0.4, -0.4], [0.3, 0.3]]))
        # cooperative rows may stay below one
        AppraisalMatrix(np.array([[0.4, 0.4], [0.3, 0.3]]))

    def test_kind_cross_check(self):
        with pytest.raises(ValidationError):
            AppraisalMatrix(np.eye(2), kind="antagonistic")

    def test_susceptibility_nonzero(self):
        with pytest.raises(ValidationError):
            SusceptibilityMatrix(np.array([1.0, 0.0]))
        SusceptibilityMatrix(np.array([-1.5, 2.0, 1.0, -0.5]))


class TestSystemSpecAndFiles:
    def test_json_round_trip(self, tmp_path, sec5_coop):
        path = tmp_path / "sys.json"
        spec = sec5_coop.with_mids()
        spec.save_json(path)
        back = SystemSpec.from_json(path)
        np.testing.assert_array_equal(back.laplacian, spec.laplacian)
        np.testing.assert_array_equal(back.appraisal, spec.appraisal)
        np.testing.assert_array_equal(back.mids, spec.mids)

    def test_json_validation(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"lambda": [1, 1], "laplacian": [[1, -1], [-1, 1]]}')
        with pytest.raises(ValidationError, match="appraisal"):
            SystemSpec.from_json(path)
        path.write_text("{broken")
        with pytest.raises(ValidationError, match="line 1"):
            SystemSpec.from_json(path)

    def test_n_issues_consistency(self):
        doc = {
            "lambda": [1.0, 1.0],
            "laplacian": [[1.0, -1.0], [-1.0, 1.0]],
            "appraisal": [[0.5, 0.5], [0.5, 0.5]],
            "mids": [[1.0, 0.0], [0.0, 1.0]],
            "n_issues": 3,
        }
        with pytest.raises(ValidationError, match="n_issues"):
            SystemSpec.from_json_dict(doc)

    def test_iteration_matrix(self, example1):
        M = example1.system.iteration_matrix()
        expected = np.eye(3) - np.diag(fx.EXAMPLE1_LAM) @ fx.EXAMPLE1_LAPLACIAN @ fx.EXAMPLE1_APPRAISAL
        np.testing.assert_allclose(M, expected, atol=1e-15)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        M = np.array([[0.5, -0.25], [1e-17, 3.0]])
        save_matrix_csv(path, M, header="test matrix")
        np.testing.assert_array_equal(load_matrix_csv(path), M)

    def test_csv_comments_and_errors(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# comment\n1.0,2.0\n\n3.0,4.0 # trailing\n")
        np.testing.assert_array_equal(load_matrix_csv(path), [[1.0, 2.0], [3.0, 4.0]])
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ValidationError, match=":2"):
            load_matrix_csv(path)
        path.write_text("1.0,oops\n")
        with pytest.raises(ValidationError, match=":1"):
            load_matrix_csv(path)

    def test_parse_vector_arg(self, tmp_path):
        np.testing.assert_array_equal(parse_vector_arg("25,75,85"), [25.0, 75.0, 85.0])
        path = tmp_path / "v.csv"
        save_matrix_csv(path, np.array([[1.0, 2.0, 3.0]]))
        np.testing.assert_array_equal(parse_vector_arg(str(path)), [1.0, 2.0, 3.0])
        with pytest.raises(ValidationError):
            parse_vector_arg("not-a-vector")


def test_spanning_tree_generator_is_rooted():
    rng = np.random.default_rng(23)
    for _ in range(100):
        n = int(rng.integers(2, 8))
        L = random_spanning_tree_laplacian(rng, n)
        InteractingLaplacian(L)
        assert has_spanning_tree(L)
