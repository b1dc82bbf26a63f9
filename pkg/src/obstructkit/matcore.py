"""Dense complex linear algebra with operator-norm semantics.

Every matrix in this library is a square, finite ``numpy`` array of
``complex128``.  All norms are operator norms (largest singular value).
Functions here are pure: inputs are never mutated and returned arrays are
marked read-only, so values can be shared freely between threads.

Tolerances
----------
``spectral_tol(dim)``
    backward-error scale ``1e-10 * dim`` used for hermiticity checks,
    projection checks and reconstruction bounds.
``SINGULARITY_TOL``
    smallest singular value accepted before a matrix counts as singular.
``UNITARITY_TOL``
    default tolerance for "unitary within tolerance" gates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidMatrix,
    NotHermitian,
    NotInvertible,
    NotProjection,
    NotUnitary,
    SpectralGapViolation,
)

SPECTRAL_TOL_SCALE = 1e-10
SINGULARITY_TOL = 1e-12
UNITARITY_TOL = 1e-8


def spectral_tol(dim: int) -> float:
    """Per-dimension backward-error tolerance."""
    return SPECTRAL_TOL_SCALE * dim


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.complex128)
    if out is a and out.flags.writeable:
        # ascontiguousarray returned the caller's own array; freezing it in
        # place would mutate the input, which this module promises never to do
        out = out.copy()
    out.setflags(write=False)
    return out


def as_matrix(a) -> np.ndarray:
    """Validate and normalize a square complex matrix.

    Accepts anything ``np.asarray`` accepts.  Raises :class:`InvalidMatrix`
    for non-square shapes, empty matrices, or non-finite entries.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InvalidMatrix("matrix dimension must be positive")
    if not np.isfinite(arr).all():
        raise InvalidMatrix("matrix has non-finite entries")
    return _freeze(arr)


def identity(dim: int) -> np.ndarray:
    return _freeze(np.eye(dim, dtype=np.complex128))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def op_norm(a) -> float:
    """Operator norm: the largest singular value.

    Computed from the SVD (never power iteration) so repeated runs report
    identical values.  Sub-multiplicative and invariant under multiplication
    by unitaries on either side.
    """
    arr = as_matrix(a)
    return float(np.linalg.svd(arr, compute_uv=False)[0])


def matrices_close(a, b, tol: float) -> bool:
    """Tolerance-parameterized equality in operator norm (never bitwise)."""
    return op_norm(np.asarray(a) - np.asarray(b)) <= tol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_unitary(a, tol: float = UNITARITY_TOL) -> bool:
    arr = as_matrix(a)
    delta = arr.conj().T @ arr - np.eye(arr.shape[0])
    return op_norm(delta) <= tol


def require_unitary(a, tol: float = UNITARITY_TOL, what: str = "matrix") -> np.ndarray:
    arr = as_matrix(a)
    delta = op_norm(arr.conj().T @ arr - np.eye(arr.shape[0]))
    if delta > tol:
        raise NotUnitary(f"{what} is not unitary: ||a*a - 1|| = {delta:.3e} > {tol:.1e}")
    return arr


def require_projection(a, tol: float | None = None, what: str = "matrix") -> np.ndarray:
    """Check ``a = a* = a^2`` within ``tol`` (default ``spectral_tol(dim)``)."""
    arr = as_matrix(a)
    if tol is None:
        tol = spectral_tol(arr.shape[0])
    herm = op_norm(arr - arr.conj().T)
    idem = op_norm(arr @ arr - arr)
    if herm > tol or idem > tol:
        raise NotProjection(
            f"{what} is not a projection: ||a-a*|| = {herm:.3e}, ||a^2-a|| = {idem:.3e}"
        )
    return arr


def polar_unitary(a) -> np.ndarray:
    """Unitary factor of the polar decomposition ``a = u (a*a)^(1/2)``.

    Requires the smallest singular value to exceed ``SINGULARITY_TOL``.
    When ``||a|| <= 1`` and the smallest singular value is at least
    ``1 - eps``, the factor satisfies ``||a - u|| < eps``: the positive part
    has spectrum inside ``(1 - eps, 1]``, so it sits within ``eps`` of the
    identity.
    """
    arr = as_matrix(a)
    w, s, vh = np.linalg.svd(arr)
    if s[-1] <= SINGULARITY_TOL:
        raise NotInvertible(
            f"smallest singular value {s[-1]:.3e} <= {SINGULARITY_TOL:.1e}"
        )
    return _freeze(w @ vh)


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigendecomposition of a hermitian matrix.

    ``eigenvalues`` ascend; ``vectors`` has the matching eigenvectors as
    columns and is unitary within ``spectral_tol(dim)``.  Reconstruction
    ``V diag(lam) V*`` reproduces the input to the same tolerance.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return _freeze((v * self.eigenvalues) @ v.conj().T)


def hermitian_eigensystem(a) -> HermitianSpectrum:
    """Eigendecomposition after the hermiticity gate.

    Inputs with ``||a - a*|| <= spectral_tol(dim)`` are symmetrized to
    ``(a + a*)/2`` before the eigensolve; larger asymmetry raises
    :class:`NotHermitian` rather than silently discarding the skew part.
    """
    arr = as_matrix(a)
    dim = arr.shape[0]
    asym = op_norm(arr - arr.conj().T)
    if asym > spectral_tol(dim):
        raise NotHermitian(
            f"||a - a*|| = {asym:.3e} exceeds {spectral_tol(dim):.3e}; refusing to symmetrize"
        )
    herm = (arr + arr.conj().T) / 2.0
    lam, vec = np.linalg.eigh(herm)
    return HermitianSpectrum(_freeze_real(lam), _freeze(vec))


def _freeze_real(x: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(x, dtype=np.float64)
    out.setflags(write=False)
    return out


def spectral_projection(a, cut: float, gap_tol: float) -> np.ndarray:
    """Spectral projection onto eigenvalues above ``cut``.

    Applies the characteristic function of ``(cut, oo)`` to a hermitian
    matrix through its eigendecomposition.  Every eigenvalue must keep
    distance at least ``gap_tol`` from the cut; an eigenvalue inside the
    window raises :class:`SpectralGapViolation` carrying the offender.

    The output commutes with ``a`` and satisfies ``||P^2 - P||`` and
    ``||P - P*||`` below ``spectral_tol(dim)``.
    """
    spec = hermitian_eigensystem(a)
    lam = spec.eigenvalues
    dist = np.abs(lam - cut)
    if dist.size and float(dist.min()) < gap_tol:
        offender = float(lam[int(dist.argmin())])
        raise SpectralGapViolation(
            f"eigenvalue {offender:.6f} within gap_tol {gap_tol} of cut {cut}",
            eigenvalue=offender,
            cut=cut,
        )
    cols = spec.vectors[:, lam > cut]
    proj = cols @ cols.conj().T
    proj = (proj + proj.conj().T) / 2.0
    return _freeze(proj)


def block_sum(a, b) -> np.ndarray:
    """Block-diagonal sum ``diag(a, b)``."""
    x = as_matrix(a)
    y = as_matrix(b)
    n, m = x.shape[0], y.shape[0]
    out = np.zeros((n + m, n + m), dtype=np.complex128)
    out[:n, :n] = x
    out[n:, n:] = y
    return _freeze(out)


def block_sum_many(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        raise InvalidMatrix("block_sum_many needs at least one matrix")
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = block_sum(out, m)
    return out


# ---------------------------------------------------------------------------
# JSON encoding
# ---------------------------------------------------------------------------

def matrix_to_json(a) -> dict:
    """Encode as ``{"dim": n, "entries": [[[re, im], ...], ...]}`` row-major."""
    arr = as_matrix(a)
    entries = [
        [[float(z.real), float(z.imag)] for z in row]
        for row in arr
    ]
    return {"dim": int(arr.shape[0]), "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
        data = np.empty((dim, dim), dtype=np.complex128)
        for i in range(dim):
            row = entries[i]
            for j in range(dim):
                re, im = row[j]
                data[i, j] = complex(re, im)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InvalidMatrix(f"malformed matrix JSON: {exc}") from exc
    return as_matrix(data)
