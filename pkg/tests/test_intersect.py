import numpy as np
import pytest

from app.utils.cycle_model import CycleModel, checkerboard, shift_conjugate
from app.utils.errors import InvalidArgumentError
from app.utils.intersect import (
    FamilyKind,
    census_family_counts,
    count_check,
    deduplicate,
    enumerate_points,
    formula_table,
    ml_degree_formula,
    variety_degree_formula,
)


# ============================================
# Formules fermées
# ============================================

@pytest.mark.parametrize("n,expected", [(3, 1), (4, 5), (5, 17), (6, 49), (7, 129), (8, 321), (12, 9217)])
def test_ml_degree_formula(n, expected):
    assert ml_degree_formula(n) == expected


@pytest.mark.parametrize("n,expected", [(3, 1), (4, 9), (5, 57)])
def test_variety_degree_formula(n, expected):
    assert variety_degree_formula(n) == expected


def test_formulas_reject_small_n():
    with pytest.raises(InvalidArgumentError):
        ml_degree_formula(2)
    with pytest.raises(InvalidArgumentError):
        variety_degree_formula(2)


def test_variety_degree_is_exact_for_large_n():
    # au-delà de la précision d'un float
    assert variety_degree_formula(40) > 2 ** 53
    assert isinstance(variety_degree_formula(40), int)


def test_formula_table_rows():
    rows = formula_table(range(4, 7))
    assert [r.n for r in rows] == [4, 5, 6]
    assert rows[1].ml_degree == 17 and rows[1].variety_degree == 57


# ============================================
# Recensement
# ============================================

@pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 9, 10])
def test_census_matches_formula(n):
    report = enumerate_points(n)
    assert report.distinct_count == ml_degree_formula(n)
    assert report.count_matches
    assert report.cross_family_merges == 0
    assert report.min_pairwise_distance > 1e-4


@pytest.mark.slow
@pytest.mark.parametrize("n", [11, 12])
def test_census_matches_formula_large(n):
    assert enumerate_points(n).distinct_count == ml_degree_formula(n)


def test_family_counts_n6():
    counts = census_family_counts(enumerate_points(6))
    assert counts == {"Identity": 1, "MPlus": 32, "MMinus": 0, "Checkerboard": 16}


def test_family_counts_n4_and_n8():
    assert census_family_counts(enumerate_points(4)) == {
        "Identity": 1, "MPlus": 0, "MMinus": 0, "Checkerboard": 4,
    }
    counts = census_family_counts(enumerate_points(8))
    assert counts["MPlus"] == 128 and counts["MMinus"] == 128 and counts["Checkerboard"] == 64


def test_census_points_lie_in_slice():
    report = enumerate_points(5)
    model = CycleModel(5)
    for point in report.points:
        values = point.matrix.entries
        assert np.allclose(np.diag(values), 1.0)
        edges = values[model.support_rows[5:], model.support_cols[5:]]
        assert np.abs(edges).max() <= 1e-8


def test_census_contains_identity_and_checkerboard():
    report = enumerate_points(6)
    uppers = [p.matrix.upper() for p in report.points]
    assert any(np.allclose(u, np.eye(6)[np.triu_indices(6)]) for u in uppers)
    board = checkerboard(6).upper()
    assert any(np.allclose(u, board) for u in uppers)


def test_census_is_deterministic():
    first = [p.matrix.upper() for p in enumerate_points(6).points]
    second = [p.matrix.upper() for p in enumerate_points(6).points]
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


def test_census_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        enumerate_points(3)
    with pytest.raises(InvalidArgumentError):
        enumerate_points(5, tol=0.0)


def test_point_response_fields():
    report = enumerate_points(5)
    response = report.to_response()
    assert response.distinct_count == 17
    assert response.family_counts[FamilyKind.MPLUS.value] == 16
    mplus = next(p for p in response.points if p.family == "MPlus")
    assert mplus.x == pytest.approx([-1.0, 0.0])
    assert len(mplus.sign_pattern) == 5


# ============================================
# Déduplication
# ============================================

def test_deduplicate_merges_rounding_twins():
    uppers = np.array([
        [1.0, 0.5, 2.0],
        [1.0, 0.5 + 1e-12, 2.0],
        [1.0, -0.5, 2.0],
    ], dtype=complex)
    kept, representative, minimum = deduplicate(uppers, 2, 6)
    assert len(kept) == 2
    assert representative[1] == representative[0]
    assert minimum == pytest.approx(np.sqrt(2.0) * 1.0)


def test_deduplicate_merges_across_rounding_boundary():
    uppers = np.array([
        [1.0, 0.12345649999999, 2.0],
        [1.0, 0.12345650000001, 2.0],
    ], dtype=complex)
    kept, representative, minimum = deduplicate(uppers, 2, 6)
    assert len(kept) == 1
    assert representative[0] == representative[1]
    assert minimum is None


# ============================================
# Comptage par lot
# ============================================

def test_count_check_isolates_errors():
    results = count_check([3, 4, 5])
    assert [r.n for r in results] == [3, 4, 5]
    assert not results[0].passed and results[0].error
    assert results[1].passed and results[2].passed
    row = results[0].to_row()
    assert row.distinct_count is None and row.formula_count == 1


@pytest.mark.parametrize("n", [5, 6])
def test_census_is_shift_invariant(n):
    points = [p.matrix for p in enumerate_points(n).points]
    for point in points:
        moved = shift_conjugate(point, "plus")
        assert min(moved.distance(other) for other in points) <= 1e-8
