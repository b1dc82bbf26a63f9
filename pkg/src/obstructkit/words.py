"""Free-group word calculus over a finite presentation.

Words are sequences of letters ``(generator_index, exponent)`` with exponent
``+1`` or ``-1``.  The text format is one character per letter: a lowercase
letter is a generator, the matching uppercase letter is its inverse, so
``"abAB"`` is the commutator ``a b a^-1 b^-1``.

Alongside free reduction this module knows one nontrivial normal form:
when a presentation is recognizably free-abelian (every pair of generators
commutes and nothing else is imposed), ``canonical_form`` sorts a word into
``g_0^{e_0} g_1^{e_1} ...``.  That is what lets evaluation of a
quasi-representation depend on the group element rather than on the
spelling of the word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidSize, NotInCommutatorSubgroup, ParseError
from .matcore import as_matrix, identity, require_unitary

Letter = tuple[int, int]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GroupWord:
    """A word in the free group: an ordered tuple of (generator, ±1) letters."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        for g, e in self.letters:
            if e not in (1, -1):
                raise ParseError(f"letter exponent must be +1 or -1, got {e}")
            if g < 0:
                raise ParseError(f"generator index must be nonnegative, got {g}")

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not reduce(self).letters


IDENTITY_WORD = GroupWord()


def word(*letters: Letter) -> GroupWord:
    return GroupWord(tuple(letters))


def generator(index: int) -> GroupWord:
    return GroupWord(((index, 1),))


def reduce(w: GroupWord) -> GroupWord:
    """Free reduction: cancel adjacent inverse pairs until none remain."""
    stack: list[Letter] = []
    for g, e in w.letters:
        if stack and stack[-1][0] == g and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((g, e))
    return GroupWord(tuple(stack))


def exponent_sums(w: GroupWord, n_generators: int) -> tuple[int, ...]:
    """Signed letter count per generator; all-zero iff w is in [F, F]."""
    sums = [0] * n_generators
    for g, e in w.letters:
        if g >= n_generators:
            raise ParseError(
                f"word uses generator {g} but only {n_generators} are declared"
            )
        sums[g] += e
    return tuple(sums)


@dataclass(frozen=True)
class CommutatorDecomposition:
    """A witnessed product-of-commutators expression for a word in [F, F].

    ``prod [a_i, b_i]`` freely reduces to the decomposed word; the number of
    pairs is whatever the rewriting produced, with no minimality claim.
    """

    pairs: tuple[tuple[GroupWord, GroupWord], ...]
    witness_product: GroupWord


def _commutator_word(a: GroupWord, b: GroupWord) -> GroupWord:
    return a * b * a.inverse() * b.inverse()


def commutator_decompose(w: GroupWord) -> CommutatorDecomposition:
    """Rewrite a word with vanishing exponent sums as a commutator product.

    Peels letters front-to-back: if the word starts with ``g^e``, some later
    ``g^-e`` exists, and ``g^e x g^-e y = [g^e, x] (x y)`` strictly shortens
    the remainder.  Raises :class:`NotInCommutatorSubgroup` when any
    exponent sum is nonzero.
    """
    n = 1 + max((g for g, _ in w.letters), default=0)
    if any(exponent_sums(w, n)):
        raise NotInCommutatorSubgroup(
            f"exponent sums {exponent_sums(w, n)} are not all zero"
        )
    pairs: list[tuple[GroupWord, GroupWord]] = []
    rest = reduce(w)
    while rest.letters:
        g, e = rest.letters[0]
        tail = rest.letters[1:]
        pos = next(i for i, (h, f) in enumerate(tail) if h == g and f == -e)
        x = GroupWord(tail[:pos])
        y = GroupWord(tail[pos + 1:])
        if x.letters:
            pairs.append((GroupWord(((g, e),)), x))
        rest = reduce(x * y)
    witness = IDENTITY_WORD
    for a, b in pairs:
        witness = witness * _commutator_word(a, b)
    return CommutatorDecomposition(tuple(pairs), reduce(witness))


def word_matrix(w: GroupWord, images, inverse_mode: str = "adjoint") -> np.ndarray:
    """Evaluate a word on matrices, left to right.

    ``inverse_mode`` fixes what a negative letter means: ``"adjoint"``
    substitutes the conjugate transpose (images must be unitary within the
    default tolerance), ``"true-inverse"`` substitutes the matrix inverse
    (images must be invertible).  Evaluation order is a strict left fold, so
    concatenation is respected exactly, not just up to rounding.
    """
    if inverse_mode not in ("adjoint", "true-inverse"):
        raise ParseError(f"unknown inverse_mode {inverse_mode!r}")
    mats = [as_matrix(m) for m in images]
    if not mats:
        raise InvalidSize("word_matrix needs at least one generator image")
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != dim:
            raise InvalidSize("generator images must share one dimension")
    factors: list[np.ndarray] = []
    inverses: dict[int, np.ndarray] = {}
    for g, e in w.letters:
        if g >= len(mats):
            raise ParseError(
                f"word uses generator {g} but only {len(mats)} images given"
            )
        if e == 1:
            factors.append(mats[g])
        elif inverse_mode == "adjoint":
            require_unitary(mats[g], what=f"image of generator {g}")
            factors.append(mats[g].conj().T)
        else:
            if g not in inverses:
                try:
                    inverses[g] = np.linalg.inv(mats[g])
                except np.linalg.LinAlgError as exc:
                    from .errors import NotInvertible

                    raise NotInvertible(
                        f"image of generator {g} is singular"
                    ) from exc
            factors.append(inverses[g])
    if not factors:
        return identity(dim)
    out = factors[0]
    for f in factors[1:]:
        out = out @ f
    return out


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    """A finite presentation: named generators plus relator words."""

    num_generators: int
    generator_names: tuple[str, ...]
    relators: tuple[GroupWord, ...] = ()

    def __post_init__(self):
        if self.num_generators < 1:
            raise InvalidSize("a presentation needs at least one generator")
        if len(self.generator_names) != self.num_generators:
            raise ParseError("one name per generator required")
        if len(set(self.generator_names)) != self.num_generators:
            raise ParseError("generator names must be distinct")
        for name in self.generator_names:
            if len(name) != 1 or not name.islower() or not name.isalpha():
                raise ParseError(
                    f"generator names must be single lowercase letters, got {name!r}"
                )
        for r in self.relators:
            exponent_sums(r, self.num_generators)  # raises on out-of-range letters


def _default_names(n: int) -> tuple[str, ...]:
    if n > len(_ALPHABET):
        raise InvalidSize(f"at most {len(_ALPHABET)} named generators supported")
    return tuple(_ALPHABET[:n])


def free_presentation(n: int) -> Presentation:
    return Presentation(n, _default_names(n), ())


def free_abelian_presentation(n: int) -> Presentation:
    """Z^n: all pairwise commutators as relators (none needed for n = 1)."""
    rels = tuple(
        _commutator_word(generator(i), generator(j))
        for i, j in combinations(range(n), 2)
    )
    return Presentation(n, _default_names(n), rels)


def surface_presentation(genus: int, orientable: bool = True) -> Presentation:
    """Orientable: ``prod [a_i, b_i]``; non-orientable: ``a_1^2 ... a_g^2``."""
    if genus < 1:
        raise InvalidSize("genus must be at least 1")
    if orientable:
        rel = IDENTITY_WORD
        for i in range(genus):
            rel = rel * _commutator_word(generator(2 * i), generator(2 * i + 1))
        return Presentation(2 * genus, _default_names(2 * genus), (reduce(rel),))
    rel = IDENTITY_WORD
    for i in range(genus):
        rel = rel * generator(i) * generator(i)
    return Presentation(genus, _default_names(genus), (reduce(rel),))


def baumslag_solitar_presentation(n: int, m: int) -> Presentation:
    """BS(n, m) = <a, b | a b^n a^-1 b^-m>."""
    if n == 0 or m == 0:
        raise InvalidSize("Baumslag-Solitar parameters must be nonzero")
    a, b = generator(0), generator(1)
    bn = GroupWord(((1, 1 if n > 0 else -1),) * abs(n))
    bm = GroupWord(((1, 1 if m > 0 else -1),) * abs(m))
    rel = a * bn * a.inverse() * bm.inverse()
    return Presentation(2, _default_names(2), (reduce(rel),))


def _commutator_generator_pair(r: GroupWord) -> frozenset | None:
    """The (unordered) generator pair when r is a commutator of two generators."""
    w = reduce(r)
    if len(w.letters) != 4:
        return None
    for cand in (w, w.inverse()):
        for shift in range(4):
            rot = cand.letters[shift:] + cand.letters[:shift]
            (g0, e0), (g1, e1), (g2, e2), (g3, e3) = rot
            if (
                g0 == g2 and g1 == g3 and g0 != g1
                and e0 == 1 and e1 == 1 and e2 == -1 and e3 == -1
            ):
                return frozenset((g0, g1))
    return None


def is_free_abelian(p: Presentation) -> bool:
    """Recognize Z^n given as: all pairwise generator commutators, nothing else.

    Cyclic rotations and inverses of commutator relators are accepted (so the
    genus-1 orientable surface presentation counts as Z^2).  Any relator that
    is not such a commutator, or any uncovered generator pair, disqualifies.
    """
    n = p.num_generators
    needed = {frozenset(pair) for pair in combinations(range(n), 2)}
    seen = set()
    for r in p.relators:
        if reduce(r).is_identity():
            continue
        pair = _commutator_generator_pair(r)
        if pair is None:
            return False
        seen.add(pair)
    return seen == needed


def canonical_form(w: GroupWord, p: Presentation) -> GroupWord:
    """Normal form of w as an element of the presented group, where known.

    Free-abelian presentations get the sorted power form
    ``g_0^{e_0} g_1^{e_1} ...``; everything else gets free reduction.  Two
    words equal in a free-abelian group therefore share one canonical form,
    which is what makes group-element-level evaluation well defined there.
    """
    if is_free_abelian(p):
        sums = exponent_sums(w, p.num_generators)
        letters: list[Letter] = []
        for g, e in enumerate(sums):
            sign = 1 if e > 0 else -1
            letters.extend([(g, sign)] * abs(e))
        return GroupWord(tuple(letters))
    return reduce(w)


# ---------------------------------------------------------------------------
# Text and JSON formats
# ---------------------------------------------------------------------------

def word_from_text(text: str, p: Presentation) -> GroupWord:
    """Parse ``"abAB"``-style text against a presentation's generator names."""
    index = {name: i for i, name in enumerate(p.generator_names)}
    letters: list[Letter] = []
    for ch in text:
        low = ch.lower()
        if low not in index:
            raise ParseError(f"unknown generator letter {ch!r}")
        letters.append((index[low], 1 if ch.islower() else -1))
    return GroupWord(tuple(letters))


def word_to_text(w: GroupWord, p: Presentation) -> str:
    chars = []
    for g, e in w.letters:
        if g >= p.num_generators:
            raise ParseError(f"word uses generator {g} outside the presentation")
        name = p.generator_names[g]
        chars.append(name if e == 1 else name.upper())
    return "".join(chars)


def presentation_to_json(p: Presentation) -> dict:
    return {
        "generators": list(p.generator_names),
        "relators": [word_to_text(r, p) for r in p.relators],
    }


def presentation_from_json(obj) -> Presentation:
    try:
        names = tuple(str(g) for g in obj["generators"])
        relator_texts = [str(r) for r in obj.get("relators", [])]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed presentation JSON: {exc}") from exc
    skeleton = Presentation(len(names), names, ())
    relators = tuple(word_from_text(t, skeleton) for t in relator_texts)
    return Presentation(len(names), names, relators)
