"""Exact integer homology computations behind the winding obstruction counts.

Everything here runs over Python's arbitrary-precision integers, so the
exact-arithmetic mandate is discharged structurally: no intermediate value
can overflow or wrap.  The pieces:

* Smith normal form with tracked unimodular row/column transforms
  (smallest-magnitude pivoting to temper coefficient growth), self-verified
  against an exact fraction-free determinant;
* second homology of free-by-cyclic groups (rank = multiplicity of the
  eigenvalue one of the inducing automorphism's abelianization);
* second homology of surface mapping tori from the orientation sign and the
  induced map on first homology;
* symplectic congruence checks and the obstruction-count table for the
  supported group families.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BoundViolation,
    InvalidFamily,
    InvalidMatrix,
    InvalidSize,
    NotAnAutomorphism,
    NumericalInconsistency,
)

# ---------------------------------------------------------------------------
# Exact integer matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntMatrix:
    """Immutable rectangular matrix of exact integers."""

    entries: tuple

    def __post_init__(self):
        if not isinstance(self.entries, tuple) or not self.entries:
            raise InvalidMatrix("integer matrix needs at least one row")
        width = None
        for row in self.entries:
            if not isinstance(row, tuple) or not row:
                raise InvalidMatrix("integer matrix rows must be nonempty tuples")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InvalidMatrix("integer matrix rows must share one length")
            for x in row:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise InvalidMatrix(
                        f"integer matrix entries must be exact ints; got {x!r}"
                    )

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def is_square(self) -> bool:
        return self.rows == self.cols

    def diagonal(self):
        return tuple(self.entries[i][i] for i in range(min(self.rows, self.cols)))


def int_matrix(rows) -> IntMatrix:
    """Build an IntMatrix from any nested iterable of exact integers."""
    try:
        data = tuple(tuple(int(x) if _is_exact_int(x) else _reject(x) for x in row)
                     for row in rows)
    except InvalidMatrix:
        raise
    except TypeError as exc:
        raise InvalidMatrix(f"cannot build an integer matrix from {rows!r}") from exc
    return IntMatrix(data)


def _is_exact_int(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, int):
        return True
    # numpy integer scalars quack like ints and convert exactly
    return hasattr(x, "dtype") and getattr(x.dtype, "kind", "") in ("i", "u")


def _reject(x):
    raise InvalidMatrix(f"integer matrix entries must be exact ints; got {x!r}")


def int_identity(n: int) -> IntMatrix:
    if n < 1:
        raise InvalidSize(f"identity needs positive size, got {n}")
    return IntMatrix(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.cols != b.rows:
        raise InvalidSize(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    bt = list(zip(*b.entries))
    return IntMatrix(
        tuple(
            tuple(sum(x * y for x, y in zip(row, col)) for col in bt)
            for row in a.entries
        )
    )


def int_transpose(a: IntMatrix) -> IntMatrix:
    return IntMatrix(tuple(zip(*a.entries)))


def int_sub(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.rows != b.rows or a.cols != b.cols:
        raise InvalidSize("matrix subtraction needs matching shapes")
    return IntMatrix(
        tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a.entries, b.entries))
    )


def exact_determinant(a: IntMatrix) -> int:
    """Fraction-free (Bareiss) determinant; every division is exact."""
    if not a.is_square():
        raise InvalidSize("determinant needs a square matrix")
    n = a.rows
    m = [list(row) for row in a.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot_row = next((i for i in range(k + 1, n) if m[i][k]), None)
            if pivot_row is None:
                return 0
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_matrix_to_json(a: IntMatrix) -> dict:
    return {"rows": a.rows, "cols": a.cols, "entries": [list(row) for row in a.entries]}


def int_matrix_from_json(obj) -> IntMatrix:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise InvalidMatrix("integer matrix JSON needs an 'entries' field")
    a = int_matrix(obj["entries"])
    for field, got in (("rows", a.rows), ("cols", a.cols)):
        if field in obj and obj[field] != got:
            raise InvalidMatrix(
                f"integer matrix JSON declares {field}={obj[field]} but entries give {got}"
            )
    return a


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def smith_normal_form(a: IntMatrix):
    """Exact Smith normal form: returns (U, D, V) with U*A*V = D.

    D is diagonal with nonnegative entries forming a divisibility chain
    d1 | d2 | ...; U and V are unimodular.  Pivots are chosen with smallest
    absolute value to temper coefficient growth.  The factorization and the
    unimodularity of U, V are re-verified exactly before returning.
    """
    r, c = a.rows, a.cols
    m = [list(row) for row in a.entries]
    u = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    v = [[1 if i == j else 0 for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        if i != j:
            m[i], m[j] = m[j], m[i]
            u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        if i != j:
            for row in m:
                row[i], row[j] = row[j], row[i]
            for row in v:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row[dst] += k * row[src]
        if k:
            ms, md = m[src], m[dst]
            for idx in range(c):
                md[idx] += k * ms[idx]
            us, ud = u[src], u[dst]
            for idx in range(r):
                ud[idx] += k * us[idx]

    def add_col(src, dst, k):  # col[dst] += k * col[src]
        if k:
            for row in m:
                row[dst] += k * row[src]
            for row in v:
                row[dst] += k * row[src]

    limit = min(r, c)
    t = 0
    while t < limit:
        pivot_pos = None
        best = None
        for i in range(t, r):
            for j in range(t, c):
                val = abs(m[i][j])
                if val and (best is None or val < best):
                    pivot_pos, best = (i, j), val
        if pivot_pos is None:
            break
        swap_rows(t, pivot_pos[0])
        swap_cols(t, pivot_pos[1])
        while True:
            # Clear column t with row operations; a nonzero remainder is a
            # strictly smaller candidate pivot, so swap it up and retry.
            for i in range(t + 1, r):
                if m[i][t]:
                    add_row(t, i, -(m[i][t] // m[t][t]))
            leftover = next((i for i in range(t + 1, r) if m[i][t]), None)
            if leftover is not None:
                swap_rows(t, leftover)
                continue
            for j in range(t + 1, c):
                if m[t][j]:
                    add_col(t, j, -(m[t][j] // m[t][t]))
            leftover = next((j for j in range(t + 1, c) if m[t][j]), None)
            if leftover is not None:
                swap_cols(t, leftover)
                continue
            # Pivot must divide the whole remaining block for the chain
            # d_t | d_{t+1}; if not, fold the offending row into row t and
            # let the clearing loop shrink the pivot.
            pivot = m[t][t]
            offender = next(
                (
                    i
                    for i in range(t + 1, r)
                    if any(m[i][j] % pivot for j in range(t + 1, c))
                ),
                None,
            )
            if offender is None:
                break
            add_row(offender, t, 1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    uu = IntMatrix(tuple(tuple(row) for row in u))
    dd = IntMatrix(tuple(tuple(row) for row in m))
    vv = IntMatrix(tuple(tuple(row) for row in v))
    _verify_snf(a, uu, dd, vv)
    return uu, dd, vv


def _verify_snf(a, u, d, v):
    if int_matmul(int_matmul(u, a), v).entries != d.entries:
        raise NumericalInconsistency("normal form factorization failed to verify")
    if abs(exact_determinant(u)) != 1 or abs(exact_determinant(v)) != 1:
        raise NumericalInconsistency("normal form transforms are not unimodular")
    diag = d.diagonal()
    for i in range(d.rows):
        for j in range(d.cols):
            if i != j and d.entries[i][j]:
                raise NumericalInconsistency("normal form is not diagonal")
    for x, y in zip(diag, diag[1:]):
        if x == 0 and y != 0:
            raise NumericalInconsistency("zero diagonal entry precedes a nonzero one")
        if x and y % x:
            raise NumericalInconsistency("diagonal divisibility chain broken")


def snf_diagonal(a: IntMatrix):
    """Diagonal of the Smith normal form (nonnegative, divisibility chain)."""
    _, d, _ = smith_normal_form(a)
    return d.diagonal()


# ---------------------------------------------------------------------------
# Abelian groups and the homology computations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group: Z^free_rank plus cyclic torsion.

    Torsion entries are the invariant factors d1 | d2 | ..., each at least 2.
    """

    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        if not isinstance(self.free_rank, int) or self.free_rank < 0:
            raise BoundViolation(f"free rank must be a nonnegative int; got {self.free_rank!r}")
        tor = tuple(self.torsion)
        object.__setattr__(self, "torsion", tor)
        for d in tor:
            if not isinstance(d, int) or d < 2:
                raise BoundViolation(f"torsion coefficients must be ints >= 2; got {d!r}")
        for x, y in zip(tor, tor[1:]):
            if y % x:
                raise BoundViolation(f"torsion coefficients must form a divisibility chain; got {tor}")

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion


def abelian_group_to_text(g: AbelianGroup) -> str:
    parts = []
    if g.free_rank == 1:
        parts.append("Z")
    elif g.free_rank > 1:
        parts.append(f"Z^{g.free_rank}")
    parts.extend(f"Z/{d}" for d in g.torsion)
    return " ⊕ ".join(parts) if parts else "0"


def abelian_group_to_json(g: AbelianGroup) -> dict:
    return {
        "free_rank": g.free_rank,
        "torsion": list(g.torsion),
        "text": abelian_group_to_text(g),
    }


def _corank_of_one_minus(m: IntMatrix) -> int:
    diag = snf_diagonal(int_sub(int_identity(m.rows), m))
    return m.rows - sum(1 for d in diag if d)


def free_by_cyclic_h2(phi_star: IntMatrix) -> AbelianGroup:
    """Second homology of F semidirect Z for the automorphism inducing phi_star.

    The group is free abelian of rank equal to the multiplicity of the
    eigenvalue one of phi_star, i.e. the corank of I - phi_star over the
    rationals.  phi_star must be unimodular, being induced by an automorphism
    of the free group.
    """
    if not phi_star.is_square():
        raise InvalidSize("induced map must be square")
    if abs(exact_determinant(phi_star)) != 1:
        raise NotAnAutomorphism(
            f"determinant {exact_determinant(phi_star)} is not ±1; "
            "the matrix is not induced by a free-group automorphism"
        )
    return AbelianGroup(free_rank=_corank_of_one_minus(phi_star))


def mapping_torus_surface_h2(orientation_sign: int, m: IntMatrix) -> AbelianGroup:
    """Second homology of the mapping torus of a surface diffeomorphism.

    Inputs: the ±1 action of the gluing map on top homology and its matrix
    on first homology (2g x 2g, unimodular).  The homology long exact
    sequence splits as coker(1 - sign) plus the fixed lattice of m, the
    latter being free:

    * sign +1: Z plus Z^corank(I - m);
    * sign -1: Z/2 plus Z^corank(I - m).
    """
    if orientation_sign not in (1, -1):
        raise BoundViolation(f"orientation sign must be +1 or -1; got {orientation_sign!r}")
    if not m.is_square():
        raise InvalidSize("surface homology action must be square")
    if m.rows % 2:
        raise InvalidSize(f"surface homology action must be even-dimensional; got {m.rows}")
    if abs(exact_determinant(m)) != 1:
        raise NotAnAutomorphism(
            f"determinant {exact_determinant(m)} is not ±1; "
            "the matrix does not act on the homology of a closed surface"
        )
    corank = _corank_of_one_minus(m)
    if orientation_sign == 1:
        return AbelianGroup(free_rank=corank + 1)
    return AbelianGroup(free_rank=corank, torsion=(2,))


def symplectic_check(a: IntMatrix, j: IntMatrix) -> bool:
    """Exact test of the symplectic congruence: transpose(A) J A == J."""
    if not a.is_square() or not j.is_square() or a.rows != j.rows:
        raise InvalidSize("symplectic check needs square matrices of one size")
    return int_matmul(int_matmul(int_transpose(a), j), a).entries == j.entries


# ---------------------------------------------------------------------------
# Obstruction counts by family
# ---------------------------------------------------------------------------

FAMILIES = ("fbc", "surface", "bs")


def obstruction_count(
    family: str,
    *,
    phi_star: IntMatrix | None = None,
    genus: int | None = None,
    orientable: bool | None = None,
    n: int | None = None,
    m: int | None = None,
) -> int:
    """Number of independent winding-number obstructions for a group family.

    This is the free rank of the group's second integral homology:

    * ``fbc`` (free-by-cyclic, keyword phi_star): rank of free_by_cyclic_h2;
    * ``surface`` (keywords genus, orientable): 1 when orientable —
      the single defining relator is a product of commutators — else 0;
    * ``bs`` (one-relator ascending family, keywords n, m): 1 when n == m,
      else 0.  For n != m with |n| == |m| the count is still well-defined
      even though approximation theorems need residual finiteness.
    """
    if family == "fbc" or family == "free-by-cyclic":
        if phi_star is None:
            raise InvalidFamily("free-by-cyclic family needs phi_star")
        try:
            return free_by_cyclic_h2(phi_star).free_rank
        except NotAnAutomorphism as exc:
            raise InvalidFamily(str(exc)) from exc
    if family == "surface":
        if genus is None or orientable is None:
            raise InvalidFamily("surface family needs genus and orientable")
        if not isinstance(genus, int) or genus < 1:
            raise InvalidFamily(f"surface genus must be a positive int; got {genus!r}")
        return 1 if orientable else 0
    if family == "bs":
        if n is None or m is None:
            raise InvalidFamily("bs family needs the two torsion-free exponents n, m")
        if not isinstance(n, int) or not isinstance(m, int) or n == 0 or m == 0:
            raise InvalidFamily(f"bs exponents must be nonzero ints; got n={n!r}, m={m!r}")
        return 1 if n == m else 0
    raise InvalidFamily(f"unknown family {family!r}; expected one of {FAMILIES}")
