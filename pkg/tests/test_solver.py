"""Exact linear algebra and degree-bounded basis solving."""

import json
import random
from fractions import Fraction

import pytest

from ktk import (
    Signature,
    full_rank_check,
    nullspace,
    saturation_check,
    solve_basis,
    verify_basis,
)
from ktk.solver import (
    AnsatzSpec,
    fields_to_vectors,
    field_vector,
    in_rational_span,
    independent_subset,
    matrix_rank,
    monomials_upto,
    same_span,
    span_dim,
    system_rank,
    unknown_labels,
)
from ktk.equations import prolong

from conftest import EUCLID, SIGS_BY_M


def gauss_rank(matrix):
    """Plain fraction Gaussian elimination, used as an independent oracle."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    rank = 0
    n_cols = len(rows[0]) if rows else 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [x / pv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


class TestNullspace:
    def test_identity_has_trivial_kernel(self):
        eye = [[1 if i == c else 0 for c in range(3)] for i in range(3)]
        assert nullspace(eye) == []

    def test_zero_matrix_has_full_kernel(self):
        vecs = nullspace([[0] * 4, [0] * 4])
        assert len(vecs) == 4
        assert vecs == [[1 if i == c else 0 for c in range(4)] for i in range(4)]

    def test_rank_one_line(self):
        vecs = nullspace([[1, 1], [2, 2]])
        assert len(vecs) == 1
        assert vecs[0] == [1, -1]

    def test_rational_entries(self):
        vecs = nullspace([[Fraction(1, 2), Fraction(1, 3)]])
        assert len(vecs) == 1
        v = vecs[0]
        assert Fraction(1, 2) * v[0] + Fraction(1, 3) * v[1] == 0

    def test_random_matrices_against_oracle(self):
        rng = random.Random(42)
        for _ in range(40):
            n_r, n_c = rng.randint(1, 6), rng.randint(1, 6)
            mat = [[rng.randint(-4, 4) for _ in range(n_c)] for _ in range(n_r)]
            vecs = nullspace(mat)
            r = matrix_rank(mat)
            assert r == gauss_rank(mat)
            assert len(vecs) == n_c - r
            for vec in vecs:
                for row in mat:
                    assert sum(a * b for a, b in zip(row, vec)) == 0
            assert span_dim([{i: x for i, x in enumerate(vec) if x} for vec in vecs]) == len(vecs)

    def test_deterministic(self):
        mat = [[3, 1, -2, 0], [0, 2, 2, 2]]
        assert nullspace(mat) == nullspace(mat)


class TestSpanHelpers:
    def test_span_dim_and_same_span(self):
        a = {0: Fraction(1), 1: Fraction(2)}
        b = {1: Fraction(1)}
        c = {0: Fraction(2), 1: Fraction(4)}
        assert span_dim([a, b]) == 2
        assert same_span([a, c], [a])
        assert not same_span([a, b], [a])

    def test_independent_subset(self):
        a = {0: Fraction(1)}
        c = {0: Fraction(3)}
        b = {1: Fraction(1)}
        picked = independent_subset([a, c, b])
        assert len(picked) == 2

    def test_in_rational_span(self):
        a = {0: Fraction(1), 1: Fraction(1)}
        b = {1: Fraction(1)}
        coeffs = in_rational_span([a, b], {0: Fraction(2), 1: Fraction(5)})
        assert coeffs == [Fraction(2), Fraction(3)]
        assert in_rational_span([a, b], {2: Fraction(1)}) is None


class TestAnsatz:
    def test_monomials_graded(self):
        mons = monomials_upto(2, 2)
        assert mons[0] == (0, 0)
        assert len(mons) == 6
        degs = [sum(e) for e in mons]
        assert degs == sorted(degs)

    def test_unknown_labels_cover_ansatz(self):
        labels = unknown_labels(1, 2, 1)
        assert len(labels) == 2 * 3
        assert labels[0][1] == (0, 0)

    def test_field_vector_degree_guard(self):
        from ktk import Poly, SymTensorField

        F = SymTensorField(1, EUCLID[2], {(1,): Poly.monomial((2, 0))})
        with pytest.raises(ValueError, match="degree bound"):
            field_vector(F, unknown_labels(1, 2, 1))

    def test_conformal_low_dimension_needs_degree(self):
        spec = AnsatzSpec("conformal", 1, 1, EUCLID[2])
        with pytest.raises(ValueError, match="max_degree"):
            spec.resolved_degree()
        assert AnsatzSpec("conformal", 1, 1, EUCLID[2], max_degree=4).resolved_degree() == 4

    def test_ordinary_degree_bound(self):
        assert AnsatzSpec("ordinary", 2, 1, EUCLID[3]).resolved_degree() == 2
        assert AnsatzSpec("conformal", 1, 1, EUCLID[3]).resolved_degree() == 2


class TestSolveBasis:
    def test_plane_isometries(self):
        basis = solve_basis(AnsatzSpec("ordinary", 1, 1, EUCLID[2]))
        assert len(basis) == 3

    def test_spacetime_isometries(self):
        basis = solve_basis(AnsatzSpec("ordinary", 1, 1, Signature(1, 3)))
        assert len(basis) == 10

    def test_spacetime_conformal_algebra(self):
        basis = solve_basis(AnsatzSpec("conformal", 1, 1, Signature(1, 3)))
        assert len(basis) == 15

    def test_every_element_verifies(self):
        for kind, j, s, sig in [
            ("ordinary", 2, 1, EUCLID[2]),
            ("ordinary", 1, 2, Signature(1, 1)),
            ("conformal", 1, 1, EUCLID[3]),
            ("conformal", 0, 2, Signature(2, 1)),
        ]:
            basis = solve_basis(AnsatzSpec(kind, j, s, sig))
            assert verify_basis(basis) == []

    def test_deterministic_output(self):
        spec = AnsatzSpec("ordinary", 2, 1, Signature(1, 2))
        a = json.dumps(solve_basis(spec).to_json(), sort_keys=True)
        b = json.dumps(solve_basis(spec).to_json(), sort_keys=True)
        assert a == b

    def test_degenerate_rank_zero(self):
        basis = solve_basis(AnsatzSpec("ordinary", 0, 1, EUCLID[3]))
        assert len(basis) == 1
        assert basis.elements[0].component(()).degree() == 0

    def test_signature_independence_of_dimension(self):
        for sig in SIGS_BY_M[3]:
            assert len(solve_basis(AnsatzSpec("ordinary", 1, 1, sig))) == 6
        for sig in SIGS_BY_M[4]:
            assert len(solve_basis(AnsatzSpec("conformal", 1, 1, sig))) == 15

    def test_conformal_higher_order_dimensions(self):
        expect = {
            (3, 0, 1): 1, (3, 0, 2): 5, (3, 1, 1): 10, (3, 1, 2): 35,
            (3, 2, 1): 35, (3, 2, 2): 105,
            (4, 0, 1): 1, (4, 0, 2): 6, (4, 1, 1): 15, (4, 1, 2): 64,
            (4, 2, 1): 84, (4, 2, 2): 300,
        }
        for (m, j, s), dim in expect.items():
            basis = solve_basis(AnsatzSpec("conformal", j, s, EUCLID[m]))
            assert len(basis) == dim, (m, j, s)


class TestSaturation:
    def test_ordinary_bound_is_sharp(self):
        assert saturation_check(AnsatzSpec("ordinary", 2, 1, EUCLID[3]))

    def test_conformal_bound_is_sharp(self):
        assert saturation_check(AnsatzSpec("conformal", 1, 1, EUCLID[3]))

    def test_plane_conformal_family_keeps_growing(self):
        assert not saturation_check(
            AnsatzSpec("conformal", 1, 1, EUCLID[2], max_degree=4)
        )


class TestRankChecks:
    def test_small_balanced_system(self):
        report = full_rank_check(1, 1, 1, EUCLID[2])
        assert (report.n_e, report.n_u) == (6, 6)
        assert report.rank == 6 and report.full_row_rank

    def test_mid_size_system(self):
        report = full_rank_check(2, 2, 1, Signature(2, 2))
        assert report.full_row_rank

    def test_scalar_system(self):
        report = full_rank_check(0, 0, 1, EUCLID[3])
        assert report.rank == 3 and report.full_row_rank

    def test_overdetermined_direction_cannot_have_full_rows(self):
        report = full_rank_check(1, 2, 1, EUCLID[2])
        assert report.n_e > report.n_u
        assert not report.full_row_rank
        assert report.rank == report.n_u

    def test_block_rank_agrees_with_dense_oracle(self):
        for (j, k, s, m) in [(1, 0, 1, 2), (1, 1, 1, 2), (2, 1, 1, 2), (1, 1, 2, 2), (1, 1, 1, 3)]:
            sys_ = prolong(j, k, s, EUCLID[m])
            assert system_rank(sys_) == gauss_rank(sys_.dense())

    def test_report_json_keys(self):
        data = full_rank_check(1, 1, 1, Signature(1, 1)).to_json()
        assert set(data) == {"j", "k", "s", "signature", "N_e", "N_u", "rank", "full_row_rank"}
        assert data["signature"] == [1, 1]


class TestVerifyBasis:
    def test_accepts_solver_output(self):
        basis = solve_basis(AnsatzSpec("ordinary", 1, 1, EUCLID[3]))
        assert verify_basis(basis) == []

    def test_flags_perturbed_element(self):
        from ktk import Poly, SymTensorField

        basis = solve_basis(AnsatzSpec("ordinary", 1, 1, EUCLID[2]))
        el = basis.elements[0]
        bad = el + SymTensorField(1, EUCLID[2], {(1,): Poly.monomial((1, 0))})
        basis.elements[0] = bad
        problems = verify_basis(basis)
        assert problems and "residual" in problems[0]

    def test_flags_dependent_elements(self):
        basis = solve_basis(AnsatzSpec("ordinary", 1, 1, EUCLID[2]))
        basis.elements[1] = basis.elements[0].scale(2)
        problems = verify_basis(basis)
        assert any("dependent" in p for p in problems)
