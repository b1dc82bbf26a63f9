"""Word calculus: reduction, exponent sums, commutator rewriting, evaluation."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from obstructkit.errors import (
    InvalidSize,
    NotInCommutatorSubgroup,
    NotUnitary,
    ParseError,
)
from obstructkit.matcore import op_norm
from obstructkit.seeding import derive_rng, haar_unitary
from obstructkit.words import (
    IDENTITY_WORD,
    GroupWord,
    Presentation,
    baumslag_solitar_presentation,
    canonical_form,
    commutator_decompose,
    exponent_sums,
    free_abelian_presentation,
    free_presentation,
    generator,
    is_free_abelian,
    presentation_from_json,
    presentation_to_json,
    reduce,
    surface_presentation,
    word,
    word_from_text,
    word_matrix,
    word_to_text,
)

A, B = generator(0), generator(1)


def commutator_word(a, b):
    return a * b * a.inverse() * b.inverse()


letters_strategy = st.lists(
    st.tuples(st.integers(0, 3), st.sampled_from((1, -1))), max_size=30
).map(tuple)


def random_zero_sum_word(gen, max_len=40, n_gens=4):
    """Arbitrary element of [F, F]: random letters plus per-generator balancing."""
    length = int(gen.integers(0, max_len - n_gens * (max_len // (2 * n_gens))))
    letters = [
        (int(gen.integers(0, n_gens)), int(gen.choice((1, -1))))
        for _ in range(length)
    ]
    sums = [0] * n_gens
    for g, e in letters:
        sums[g] += e
    for g, s in enumerate(sums):
        letters.extend([(g, -1 if s > 0 else 1)] * abs(s))
    w = GroupWord(tuple(letters))
    assert not any(exponent_sums(w, n_gens))
    return w


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------


def test_reduce_cancels_inverse_pair():
    assert reduce(A * A.inverse()) == IDENTITY_WORD
    assert (A * A.inverse()).is_identity()


def test_reduce_inner_cancellation():
    w = A * B * B.inverse() * A
    assert reduce(w) == A * A


def test_surface_relator_already_reduced():
    p = surface_presentation(2)
    rel = p.relators[0]
    assert reduce(rel) == rel
    assert len(rel) == 8


@given(letters_strategy)
def test_reduce_idempotent(letters):
    w = GroupWord(letters)
    assert reduce(reduce(w)) == reduce(w)


@given(letters_strategy)
def test_reduce_has_no_adjacent_cancellation(letters):
    r = reduce(GroupWord(letters))
    for (g0, e0), (g1, e1) in zip(r.letters, r.letters[1:]):
        assert not (g0 == g1 and e0 == -e1)


@given(letters_strategy)
def test_word_times_inverse_reduces_to_identity(letters):
    w = GroupWord(letters)
    assert reduce(w * w.inverse()) == IDENTITY_WORD


# ---------------------------------------------------------------------------
# exponent sums
# ---------------------------------------------------------------------------


def test_exponent_sums_torus_relator():
    assert exponent_sums(commutator_word(A, B), 2) == (0, 0)


def test_exponent_sums_klein_relator():
    klein = A * B * A.inverse() * B
    assert exponent_sums(klein, 2) == (0, 2)


@pytest.mark.parametrize("n,m", [(2, 3), (1, 1), (3, -3), (-2, 5)])
def test_exponent_sums_bs_relator(n, m):
    p = baumslag_solitar_presentation(n, m)
    assert exponent_sums(p.relators[0], 2) == (0, n - m)


def test_exponent_sums_out_of_range_generator():
    with pytest.raises(ParseError):
        exponent_sums(word((5, 1)), 2)


# ---------------------------------------------------------------------------
# commutator decomposition
# ---------------------------------------------------------------------------


def test_decompose_single_commutator():
    dec = commutator_decompose(commutator_word(A, B))
    assert dec.pairs == ((A, B),)


def test_decompose_identity():
    dec = commutator_decompose(IDENTITY_WORD)
    assert dec.pairs == ()
    assert dec.witness_product == IDENTITY_WORD


def test_decompose_product_of_two_commutators():
    w = commutator_word(A, B) * commutator_word(A, B)
    dec = commutator_decompose(w)
    assert len(dec.pairs) == 2
    reassembled = IDENTITY_WORD
    for a, b in dec.pairs:
        reassembled = reassembled * commutator_word(a, b)
    assert reduce(reassembled) == reduce(w)


def test_decompose_rejects_nonzero_sums():
    with pytest.raises(NotInCommutatorSubgroup):
        commutator_decompose(A * B)


def test_decompose_round_trip_bulk():
    gen = derive_rng(99, 40)
    for _ in range(1000):
        w = random_zero_sum_word(gen)
        dec = commutator_decompose(w)
        reassembled = IDENTITY_WORD
        for a, b in dec.pairs:
            reassembled = reassembled * commutator_word(a, b)
        assert reduce(reassembled) == reduce(w)
        assert dec.witness_product == reduce(reassembled)


# ---------------------------------------------------------------------------
# word_matrix
# ---------------------------------------------------------------------------


def test_word_matrix_identity_word(rng):
    u = haar_unitary(3, rng)
    assert np.allclose(word_matrix(IDENTITY_WORD, [u]), np.eye(3))


def test_word_matrix_commuting_unitaries(rng):
    q = haar_unitary(4, rng)
    d1 = q @ np.diag(np.exp(2j * np.pi * rng.uniform(size=4))) @ q.conj().T
    d2 = q @ np.diag(np.exp(2j * np.pi * rng.uniform(size=4))) @ q.conj().T
    out = word_matrix(commutator_word(A, B), [d1, d2])
    assert op_norm(out - np.eye(4)) <= 1e-12


def test_word_matrix_clock_shift_relation():
    n = 5
    omega = np.exp(2j * np.pi / n)
    u = np.diag(omega ** np.arange(n))
    v = np.zeros((n, n), dtype=complex)
    for j in range(n):
        v[(j + 1) % n, j] = 1.0
    out = word_matrix(commutator_word(A, B), [u, v], inverse_mode="adjoint")
    assert op_norm(out - omega * np.eye(n)) <= 1e-12


def test_word_matrix_respects_concatenation(rng):
    u, v = haar_unitary(3, rng), haar_unitary(3, rng)
    w1 = A * B.inverse() * A
    w2 = B * A.inverse()
    # appending one letter reuses the identical left fold: bitwise equal
    lhs_single = word_matrix(w1 * B, [u, v])
    rhs_single = word_matrix(w1, [u, v]) @ v
    assert np.array_equal(lhs_single, rhs_single)
    # longer tails regroup the fold; only float associativity error remains
    lhs = word_matrix(w1 * w2, [u, v])
    rhs = word_matrix(w1, [u, v]) @ word_matrix(w2, [u, v])
    assert op_norm(lhs - rhs) <= 1e-14


def test_word_matrix_det_multiplicativity(rng):
    u, v = haar_unitary(4, rng), haar_unitary(4, rng)
    for _ in range(25):
        length = int(rng.integers(0, 12))
        letters = tuple(
            (int(rng.integers(0, 2)), int(rng.choice((1, -1)))) for _ in range(length)
        )
        w = GroupWord(letters)
        sums = exponent_sums(w, 2)
        expected = np.linalg.det(u) ** sums[0] * np.linalg.det(v) ** sums[1]
        got = np.linalg.det(word_matrix(w, [u, v]))
        assert abs(got - expected) <= 1e-10 * 4


def test_word_matrix_commutator_word_has_unit_det(rng):
    u, v = haar_unitary(5, rng), haar_unitary(5, rng)
    w = commutator_word(A, B)
    det = np.linalg.det(word_matrix(w, [u, v]))
    assert abs(det - 1.0) <= 1e-10 * 5


def test_word_matrix_adjoint_mode_requires_unitary():
    with pytest.raises(NotUnitary):
        word_matrix(A.inverse(), [np.diag([0.5, 0.5])], inverse_mode="adjoint")


def test_word_matrix_true_inverse_mode():
    m = np.diag([2.0, 4.0])
    out = word_matrix(A.inverse(), [m], inverse_mode="true-inverse")
    assert np.allclose(out, np.diag([0.5, 0.25]))


def test_word_matrix_dimension_mismatch():
    with pytest.raises(InvalidSize):
        word_matrix(A, [np.eye(2), np.eye(3)])


# ---------------------------------------------------------------------------
# presentations, canonical forms, text formats
# ---------------------------------------------------------------------------


def test_free_abelian_presentation_shape():
    p = free_abelian_presentation(3)
    assert p.num_generators == 3
    assert len(p.relators) == 3  # one commutator per generator pair


def test_surface_presentations():
    orient = surface_presentation(2)
    assert orient.num_generators == 4
    klein_like = surface_presentation(2, orientable=False)
    assert klein_like.num_generators == 2
    assert exponent_sums(klein_like.relators[0], 2) == (2, 2)
    with pytest.raises(InvalidSize):
        surface_presentation(0)


def test_bs_presentation_rejects_zero():
    with pytest.raises(InvalidSize):
        baumslag_solitar_presentation(0, 3)


def test_is_free_abelian_recognition():
    assert is_free_abelian(free_abelian_presentation(2))
    assert is_free_abelian(free_abelian_presentation(4))
    # genus-1 orientable surface group is Z^2
    assert is_free_abelian(surface_presentation(1))
    assert not is_free_abelian(surface_presentation(2))
    assert not is_free_abelian(baumslag_solitar_presentation(2, 3))
    assert not is_free_abelian(free_presentation(2))


def test_canonical_form_sorts_abelian_words():
    p = free_abelian_presentation(2)
    w1 = B * A * B * A.inverse()
    w2 = B * B
    assert canonical_form(w1, p) == canonical_form(w2, p)
    assert canonical_form(w1, p) == word((1, 1), (1, 1))


def test_canonical_form_nonabelian_is_reduction():
    p = free_presentation(2)
    w = A * B * B.inverse()
    assert canonical_form(w, p) == A


def test_word_text_round_trip():
    p = free_presentation(2)
    w = word_from_text("abAB", p)
    assert w == commutator_word(A, B)
    assert word_to_text(w, p) == "abAB"
    with pytest.raises(ParseError):
        word_from_text("xyz", p)


def test_presentation_json_round_trip():
    p = surface_presentation(2)
    obj = presentation_to_json(p)
    assert obj["generators"] == ["a", "b", "c", "d"]
    assert obj["relators"] == ["abABcdCD"]
    back = presentation_from_json(json.loads(json.dumps(obj)))
    assert back == p


def test_presentation_validation():
    with pytest.raises(ParseError):
        Presentation(2, ("a", "a"))
    with pytest.raises(ParseError):
        Presentation(1, ("A",))
    with pytest.raises(InvalidSize):
        Presentation(0, ())
    with pytest.raises(ParseError):
        Presentation(1, ("a",), (word((3, 1)),))


def test_group_word_validation():
    with pytest.raises(ParseError):
        GroupWord(((0, 2),))
    with pytest.raises(ParseError):
        GroupWord(((-1, 1),))
