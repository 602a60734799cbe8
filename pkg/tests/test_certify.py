import numpy as np
import pytest

from app.utils.certify import (
    MinorSpec,
    base_locus_witness,
    certify_census,
    harvest_minors,
    jacobian_at,
    minor_gradient,
    minor_gradients,
    minor_value,
    rank_certificate,
    rk_identity_check,
    rk_minor_form,
    rk_prime_terms,
)
from app.utils.cycle_model import CycleModel, checkerboard, minor_values
from app.utils.errors import InvalidArgumentError
from app.utils.intersect import enumerate_points


def unit(model, *pairs, weights=None):
    """Vecteur de coordonnées à partir de paires 1-based"""
    vector = np.zeros(model.dim, dtype=complex)
    for pair, weight in zip(pairs, weights or [1] * len(pairs)):
        i, j = pair
        vector[model.coordinate_index[i - 1, j - 1]] += weight
    return vector


# ============================================
# Récolte
# ============================================

def test_minor_spec_labels():
    minor = MinorSpec.from_labels((3, 1, 2), (1, 4, 5))
    assert minor == MinorSpec((0, 1, 2), (0, 3, 4))
    assert minor.label() == "δ(1,2,3)(1,4,5)"
    assert MinorSpec.from_labels((1, 4, 5), (1, 2, 3)) == minor
    assert minor.to_payload().rows == [1, 2, 3]


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_harvest_is_canonical_and_nonempty(n, minors_by_n):
    minors = minors_by_n(n)
    assert minors
    assert all(m.rows <= m.cols for m in minors)
    assert len(set(minors)) == len(minors)


def test_harvest_recalls_known_minors(minors_by_n):
    assert MinorSpec.from_labels((1, 2, 3), (1, 3, 4)) in minors_by_n(4)
    six = minors_by_n(6)
    assert MinorSpec.from_labels((1, 2, 3), (1, 4, 5)) in six
    assert MinorSpec.from_labels((1, 2, 3), (1, 3, 4)) in six
    assert MinorSpec.from_labels((1, 2, 4), (1, 4, 6)) in six
    assert MinorSpec.from_labels((1, 5, 6), (2, 3, 4)) in six
    assert MinorSpec.from_labels((1, 2, 3), (4, 5, 6)) in six
    assert MinorSpec.from_labels((1, 2, 3), (1, 3, 4)) in minors_by_n(5)


def test_principal_minor_not_harvested(minors_by_n):
    assert MinorSpec.from_labels((1, 2, 3), (1, 2, 3)) not in minors_by_n(4)


def test_harvest_is_rotation_invariant(minors_by_n):
    n = 6
    harvested = set(minors_by_n(n))
    for minor in harvested:
        rows = tuple(sorted((i + 1) % n for i in minor.rows))
        cols = tuple(sorted((j + 1) % n for j in minor.cols))
        assert MinorSpec(*sorted((rows, cols))) in harvested


def test_harvested_minors_vanish_on_inverses(minors_by_n, rng):
    model = CycleModel(5)
    theta = rng.standard_normal(10)
    k = model.from_support(theta)
    k += (abs(np.linalg.eigvalsh(k).min()) + 1.0) * np.eye(5)
    sigma = np.linalg.inv(k)
    for minor in minors_by_n(5):
        assert abs(minor_value(sigma, minor)) <= 1e-8


def test_harvest_preconditions():
    with pytest.raises(InvalidArgumentError):
        harvest_minors(3)
    with pytest.raises(InvalidArgumentError):
        harvest_minors(5, samples=5)


# ============================================
# Gradients
# ============================================

def test_gradient_at_identity():
    model = CycleModel(4)
    gradient = minor_gradient(np.eye(4), MinorSpec.from_labels((1, 2, 3), (1, 3, 4)), model)
    assert np.array_equal(gradient, -unit(model, (2, 4)))


def test_gradient_at_checkerboard():
    model = CycleModel(6)
    board = checkerboard(6)
    gradient = minor_gradient(board, MinorSpec.from_labels((1, 2, 3), (1, 4, 5)), model)
    expected = unit(model, (1, 1), (1, 5), (1, 3), (3, 5), weights=[1, -1, -1, 1])
    assert np.allclose(gradient, expected)

    # colonnes triées (1, 3, 4) : signe opposé à δ(1,2,3)(1,4,3)
    gradient = minor_gradient(board, MinorSpec.from_labels((1, 2, 3), (1, 3, 4)), model)
    expected = unit(model, (1, 1), (1, 3), (3, 3), weights=[1, -2, 1])
    assert np.allclose(gradient, -expected)


def test_gradient_matches_finite_differences(rng):
    model = CycleModel(5)
    g = rng.standard_normal((5, 5))
    a = g + g.T
    minor = MinorSpec.from_labels((1, 2, 4), (2, 3, 5))
    gradient = minor_gradient(a, minor, model)
    h = 1e-6
    rows, cols = np.triu_indices(5)
    for t, (i, j) in enumerate(zip(rows, cols)):
        delta = np.zeros((5, 5))
        delta[i, j] = delta[j, i] = h
        numeric = (minor_value(a + delta, minor) - minor_value(a - delta, minor)) / (2 * h)
        assert gradient[t] == pytest.approx(numeric, abs=1e-6)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_all_harvested_gradients_match_finite_differences(n, minors_by_n, rng):
    model = CycleModel(n)
    minors = minors_by_n(n)
    rows = np.array([m.rows for m in minors])
    cols = np.array([m.cols for m in minors])
    h = 1e-6
    for _ in range(3):
        g = rng.standard_normal((n, n))
        a = g + g.T
        gradients = minor_gradients(a, minors, model)
        for t, (i, j) in enumerate(zip(*np.triu_indices(n))):
            delta = np.zeros((n, n))
            delta[i, j] = delta[j, i] = h
            upper, _ = minor_values(a + delta, rows, cols)
            lower, _ = minor_values(a - delta, rows, cols)
            assert np.allclose(gradients[:, t], (upper - lower) / (2 * h), rtol=1e-6, atol=1e-6)


def test_constraint_rows(minors_by_n):
    model = CycleModel(5)
    minors = minors_by_n(5)
    jacobian = jacobian_at(np.eye(5), minors, model)
    assert jacobian.shape == (len(minors) + 10, model.dim)
    constraints = jacobian[len(minors):]
    assert np.array_equal(constraints.sum(axis=1), np.ones(10))
    columns = constraints.real.argmax(axis=1)
    assert set(columns) == {int(model.coordinate_index[i, j]) for i, j in model.support}


# ============================================
# Certificats
# ============================================

def test_certificate_at_identity(minors_by_n):
    certificate = rank_certificate(np.eye(4), minors_by_n(4), CycleModel(4))
    assert certificate.passed
    assert certificate.achieved_rank == 10
    assert certificate.to_response().passed


def test_certificate_at_checkerboard(minors_by_n):
    assert rank_certificate(checkerboard(4), minors_by_n(4), CycleModel(4)).passed


def test_certificate_at_odd_cycle_point(minors_by_n):
    report = enumerate_points(5, minors=minors_by_n(5))
    point = next(p for p in report.points if p.family.value == "MPlus")
    certificate = rank_certificate(point, minors_by_n(5), CycleModel(5), point_index=3)
    assert certificate.passed
    assert certificate.achieved_rank == 15
    assert certificate.point_index == 3


def test_certificate_fails_without_minors():
    certificate = rank_certificate(np.eye(5), [], CycleModel(5))
    assert not certificate.passed
    assert certificate.achieved_rank == 10


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_whole_census_is_transversal(n, minors_by_n):
    minors = minors_by_n(n)
    report = enumerate_points(n, minors=minors)
    certificates = certify_census(report.points, minors, CycleModel(n), threads=2)
    assert len(certificates) == report.distinct_count
    assert all(c.passed for c in certificates)
    assert [c.point_index for c in certificates] == list(range(report.distinct_count))
    certified = report.with_certificates(certificates)
    assert all(p.certificate is not None for p in certified.points)


# ============================================
# Identités quartiques
# ============================================

@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_rk_identities(n):
    for k in range(3, n):
        assert rk_identity_check(n, k, samples=50)


def test_restoring_cancelled_terms_breaks_identity():
    assert not rk_identity_check(6, 4, samples=10, restore_cancelled=True)


def test_rk_terms_3_and_6_cancel(rng):
    g = rng.standard_normal((6, 6))
    g = g + g.T
    terms = rk_prime_terms(lambda i, j: g[i - 1, j - 1], 4)
    assert terms[2] + terms[5] == pytest.approx(0.0)
    assert sum(terms) == pytest.approx(rk_minor_form(g, 4).real)


def test_rk_index_bounds():
    with pytest.raises(InvalidArgumentError):
        rk_identity_check(6, 2)
    with pytest.raises(InvalidArgumentError):
        rk_identity_check(6, 6)


def test_base_locus_witness_examples():
    a = np.zeros((5, 5))
    a[0, 2] = a[2, 0] = 1.0
    assert base_locus_witness(a) == (1, 3, 1)

    b = np.zeros((6, 6))
    b[1, 4] = b[4, 1] = 1.0
    assert base_locus_witness(b) == (2, 5, 1)


def test_base_locus_witness_rejects_other_shapes():
    with pytest.raises(InvalidArgumentError):
        base_locus_witness(np.zeros((5, 5)))
    with pytest.raises(InvalidArgumentError):
        base_locus_witness(np.eye(5))
