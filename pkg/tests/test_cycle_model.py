import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from app.utils.cycle_model import (
    CycleModel,
    SignDiag,
    SymMatrix,
    checkerboard,
    conjugate_sign,
    in_affine_slice,
    in_L_inverse,
    is_shift_invariant,
    m_matrix,
    orbit,
    project_L,
    project_Lperp,
    shift_conjugate,
    sign_group,
    stabilizer,
)
from app.utils.errors import InvalidArgumentError, NeedsMinorsError
from app.utils.poly import p_poly


# ============================================
# Structure du modèle
# ============================================

@pytest.mark.parametrize("n", range(3, 11))
def test_support_sizes(n):
    model = CycleModel(n)
    assert len(model.diag_positions) == n
    assert len(model.edge_positions) == n
    assert len(model.support) == 2 * n
    assert len(model.off_support) == n * (n + 1) // 2 - 2 * n


def test_model_rejects_small_cycles():
    with pytest.raises(InvalidArgumentError):
        CycleModel(2)


def test_symmetry_is_structural():
    raw = np.array([[1.0, 2.0], [5.0, 3.0]])
    matrix = SymMatrix(raw)
    assert matrix.entries[1, 0] == 2.0
    assert not matrix.entries.flags.writeable


def test_payload_accepts_plain_reals():
    from app.models.schemas import MatrixPayload
    payload = MatrixPayload(n=2, entries=[[1.0, 0.5], [0.5, [2.0, 1.0]]])
    matrix = SymMatrix.from_payload(payload)
    assert matrix.entries[1, 1] == 2.0 + 1.0j
    assert matrix.entries[0, 1] == 0.5


# ============================================
# Matrices structurées
# ============================================

def test_m_matrix_path_small():
    x = 0.7
    assert np.allclose(m_matrix(2, x, "path").entries, [[1, x], [x, 1]])


def test_m_matrix_plus_at_zero_is_identity():
    assert np.allclose(m_matrix(4, 0, "plus").entries, np.eye(4))


def test_m_matrix_corners():
    assert m_matrix(5, 0.3, "plus").entries[0, 4] == 0.3
    assert m_matrix(5, 0.3, "minus").entries[4, 0] == -0.3
    assert m_matrix(5, 0.3, "path").entries[0, 4] == 0


def test_m_matrix_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        m_matrix(4, 0.1, "twisted")
    with pytest.raises(InvalidArgumentError):
        m_matrix(2, 0.1, "plus")


def test_checkerboard_n4():
    expected = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    assert np.array_equal(checkerboard(4).entries.real, expected)


def test_checkerboard_rank_two():
    assert np.linalg.matrix_rank(checkerboard(6).entries) == 2


def test_checkerboard_odd_rejected():
    with pytest.raises(InvalidArgumentError):
        checkerboard(5)


@pytest.mark.parametrize("n", range(3, 11))
def test_circulant_spectrum(n):
    x = 0.37
    k = np.arange(n)
    plus = np.sort(np.linalg.eigvalsh(m_matrix(n, x, "plus").entries.real))
    minus = np.sort(np.linalg.eigvalsh(m_matrix(n, x, "minus").entries.real))
    assert np.allclose(plus, np.sort(1 + 2 * x * np.cos(2 * np.pi * k / n)))
    assert np.allclose(minus, np.sort(1 + 2 * x * np.cos(np.pi * (2 * k + 1) / n)))


@pytest.mark.parametrize("n", range(1, 11))
def test_determinant_matches_p_poly(n, rng):
    poly = p_poly(n)
    for _ in range(50):
        x = complex(rng.standard_normal(), rng.standard_normal())
        assert np.linalg.det(m_matrix(n, x, "path").entries) == pytest.approx(poly(x), rel=1e-9, abs=1e-9)


# ============================================
# Conjugaisons
# ============================================

def test_sign_conjugation_examples():
    d = SignDiag((1, -1, 1, -1))
    assert np.array_equal(conjugate_sign(checkerboard(4), d).entries, checkerboard(4).entries)

    base = m_matrix(4, 1.0, "plus").entries
    moved = conjugate_sign(base, SignDiag((-1, 1, 1, 1))).entries
    expected = base.copy()
    expected[0, 1] = expected[1, 0] = -1
    expected[0, 3] = expected[3, 0] = -1
    assert np.array_equal(moved, expected)


@given(st.lists(st.sampled_from([1, -1]), min_size=5, max_size=5),
       st.lists(st.sampled_from([1, -1]), min_size=5, max_size=5))
def test_sign_group_laws(first, second):
    a, b = SignDiag(tuple(first)), SignDiag(tuple(second))
    matrix = m_matrix(5, 0.4 + 0.1j, "plus")
    assert np.array_equal(conjugate_sign(conjugate_sign(matrix, a), a).entries, matrix.entries)
    composed = conjugate_sign(conjugate_sign(matrix, a), b).entries
    assert np.allclose(composed, conjugate_sign(matrix, a * b).entries)
    assert a * a == SignDiag.identity(5)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_alternating_signs_flip_x(n):
    x = 0.3 - 0.2j
    flipped = conjugate_sign(m_matrix(n, x, "plus"), SignDiag.alternating(n)).entries
    assert np.array_equal(flipped, m_matrix(n, -x, "plus").entries)


def test_shift_invariance():
    assert np.allclose(shift_conjugate(np.eye(5), "plus").entries, np.eye(5))
    assert is_shift_invariant(m_matrix(5, 0.3, "plus"), "plus")
    assert is_shift_invariant(m_matrix(6, 0.3, "minus"), "minus")
    assert not is_shift_invariant(m_matrix(6, 0.3, "minus"), "plus")


@pytest.mark.parametrize("n", range(4, 11))
def test_stabilizers(n):
    assert len(stabilizer(m_matrix(n, 0.3, "plus"))) == 2
    if n % 2 == 0:
        assert len(stabilizer(checkerboard(n))) == 4


def test_orbit_enumerates_all_signs():
    assert len(orbit(np.eye(4))) == 16
    assert len(sign_group(3)) == 8
    assert sign_group(3)[1] == SignDiag((-1, 1, 1))


# ============================================
# Projections et appartenance
# ============================================

def test_projection_examples():
    model = CycleModel(4)
    assert np.array_equal(project_L(np.eye(4), model).entries, np.eye(4))
    board = checkerboard(4).entries
    assert np.array_equal(project_Lperp(board, model).entries, board - np.eye(4))
    ones = project_L(np.ones((4, 4)), model).entries
    assert ones[0, 2] == 0 and ones[1, 3] == 0 and ones[0, 3] == 1


@given(st.integers(0, 2 ** 32 - 1))
def test_projection_split(seed):
    model = CycleModel(6)
    g = np.random.default_rng(seed).standard_normal((6, 6))
    a = SymMatrix(g + g.T)
    total = project_L(a, model).entries + project_Lperp(a, model).entries
    assert np.array_equal(total, a.entries)


def test_affine_slice():
    model = CycleModel(4)
    assert in_affine_slice(np.eye(4), model)
    assert in_affine_slice(checkerboard(4), model)
    assert not in_affine_slice(m_matrix(4, 0.5, "plus"), model)


def test_in_L_inverse_invertible(rng):
    model = CycleModel(5)
    assert in_L_inverse(np.eye(5), model)
    assert in_L_inverse(np.linalg.inv(m_matrix(5, 0.3, "plus").entries), model)
    g = rng.standard_normal((5, 5))
    assert not in_L_inverse(g @ g.T + np.eye(5), model)


def test_in_L_inverse_singular(minors_by_n, rng):
    model = CycleModel(5)
    with pytest.raises(NeedsMinorsError):
        in_L_inverse(np.ones((5, 5)), model)
    minors = minors_by_n(5)
    assert in_L_inverse(np.ones((5, 5)), model, minors=minors)

    g = rng.standard_normal((5, 5))
    g = g + g.T
    generic_singular = g - np.linalg.eigvalsh(g)[2] * np.eye(5)
    assert not in_L_inverse(generic_singular, model, minors=minors)


def test_in_L_inverse_rejects_empty_minors():
    with pytest.raises(InvalidArgumentError):
        in_L_inverse(np.ones((5, 5)), CycleModel(5), minors=[])
    # liste vide ignorée tant que la matrice est inversible
    assert in_L_inverse(np.eye(5), CycleModel(5), minors=[])


def test_checkerboard_on_inverse_variety(minors_by_n):
    assert in_L_inverse(checkerboard(4), CycleModel(4), minors=minors_by_n(4))
