"""Almost-commuting projection toolkit and the finite-dimensional index pairing.

Two circles of ideas live here.  First, projections that are close in norm
are unitarily conjugate, and when both nearly commute with a family of test
operators the conjugating unitary can be chosen to nearly commute with them
too — with the explicit constant 28 against the measured commutator scale.
Chaining such steps along a path of projections multiplies the bound by the
number of steps.  Second, an almost-commuting pair of projections (one of
block form ``diag(1, 0) + b``, one living on a tensor factor) pairs to an
integer: the rank shift of a spectral projection with a protected gap at
one half.  Finite dimensions collapse the K-class difference to that rank
difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    HypothesisViolation,
    InvalidSize,
    NumericalInconsistency,
    SubdivisionTooCoarse,
)
from .matcore import (
    as_matrix,
    commutator,
    dagger,
    hermitian_eigensystem,
    identity,
    matrix_from_json,
    matrix_to_json,
    op_norm,
    polar_unitary,
    require_projection,
    spectral_projection,
    spectral_tol,
)

CONJUGATION_EXACTNESS = 1e-9
COMMUTATOR_CONSTANT = 28.0
CHAIN_EXACTNESS = 1e-8
DEFAULT_GAP_TOL = 0.05


@dataclass(frozen=True)
class ProjectionPairContext:
    """Two nearby projections plus the test operators they almost commute with.

    ``eps`` is the measured scale ``max_x max(||[p,x]||, ||[q,x]||)``; the
    guarantees of :func:`connecting_unitary` are stated against it.
    """

    p: np.ndarray
    q: np.ndarray
    test_ops: tuple
    eps: float


def projection_pair_context(p, q, test_ops) -> ProjectionPairContext:
    p = require_projection(p, what="first projection")
    q = require_projection(q, what="second projection")
    if p.shape != q.shape:
        raise InvalidSize("projections must share one dimension")
    ops = tuple(as_matrix(x) for x in test_ops)
    eps = 0.0
    for x in ops:
        if x.shape != p.shape:
            raise InvalidSize("test operators must match the projections' dimension")
        norm = op_norm(x)
        if norm > 1.0 + 1e-8:
            raise HypothesisViolation(
                f"test operator leaves the unit ball: norm {norm:.6f}", measured=norm
            )
        eps = max(eps, op_norm(commutator(p, x)), op_norm(commutator(q, x)))
    return ProjectionPairContext(p, q, ops, eps)


@dataclass(frozen=True)
class ConjugationAudit:
    """Measured guarantees of a connecting unitary.

    ``conjugation_error`` is ``||u p u* - q||`` (at most 1e-9);
    ``commutator_norms`` lists ``||[u, x]||`` per test operator, each at most
    ``28 * eps + 1e-9``; ``worst_ratio`` is the largest measured/bound ratio.
    """

    conjugation_error: float
    commutator_norms: tuple
    eps: float
    commutator_bound: float
    worst_ratio: float


def connecting_unitary(ctx: ProjectionPairContext):
    """Unitary with ``u p u* = q`` that almost commutes with the test family.

    Requires ``||p - q|| < 1/4``.  The unitary is the polar factor of
    ``v = q p + (1 - q)(1 - p)``; since ``v p = q v`` and ``v* v`` commutes
    with ``p``, the conjugation identity holds exactly, and
    ``||[u, x]|| <= 28 eps`` for every test operator.  Both facts are
    asserted, with 1e-9 slack for floating point, before returning.
    """
    p, q = ctx.p, ctx.q
    gap = op_norm(p - q)
    if gap >= 0.25:
        raise HypothesisViolation(
            f"||p - q|| = {gap:.6f} >= 1/4; no controlled conjugation", measured=gap
        )
    dim = p.shape[0]
    eye = identity(dim)
    v = q @ p + (eye - q) @ (eye - p)
    u = polar_unitary(v)

    conj_err = op_norm(u @ p @ dagger(u) - q)
    if conj_err > CONJUGATION_EXACTNESS:
        raise NumericalInconsistency(
            f"conjugation identity failed: ||u p u* - q|| = {conj_err:.3e}"
        )
    bound = COMMUTATOR_CONSTANT * ctx.eps + 1e-9
    norms = []
    worst = 0.0
    for x in ctx.test_ops:
        n = op_norm(commutator(u, x))
        norms.append(n)
        worst = max(worst, n / bound)
        if n > bound:
            raise NumericalInconsistency(
                f"commutator bound failed: ||[u,x]|| = {n:.3e} > 28*eps + 1e-9 = {bound:.3e}"
            )
    audit = ConjugationAudit(conj_err, tuple(norms), ctx.eps, bound, worst)
    return u, audit


@dataclass(frozen=True)
class ChainReport:
    """Guarantees for a chained conjugation along a projection path."""

    steps: int
    eps_path: float
    conjugation_error: float
    conjugation_bound: float
    commutator_norms: tuple
    commutator_bound: float
    worst_ratio: float


def chain_conjugation(path, test_ops):
    """Conjugate the first projection of a path to the last, step by step.

    Each consecutive gap must be below 1/4 (otherwise
    :class:`SubdivisionTooCoarse` reports the offending index).  With
    ``eps_path = max_i max_x ||[p_i, x]||`` and ``m`` steps, the product of
    the per-step connecting unitaries satisfies ``||u p_0 u* - p_m|| <=
    1e-8 m`` and ``||[u, x]|| <= 28 eps_path m + 1e-8`` — the telescoping
    sum of the per-step guarantees.
    """
    path = [require_projection(pt, what=f"path projection {i}") for i, pt in enumerate(path)]
    if not path:
        raise InvalidSize("chain_conjugation needs a nonempty path")
    dim = path[0].shape[0]
    ops = tuple(as_matrix(x) for x in test_ops)
    for pt in path:
        if pt.shape[0] != dim:
            raise InvalidSize("all path projections must share one dimension")
    m = len(path) - 1
    for i in range(m):
        gap = op_norm(path[i] - path[i + 1])
        if gap >= 0.25:
            raise SubdivisionTooCoarse(
                f"gap {gap:.6f} >= 1/4 between path positions {i} and {i + 1}",
                index=i,
            )
    eps_path = 0.0
    for pt in path:
        for x in ops:
            eps_path = max(eps_path, op_norm(commutator(pt, x)))

    u = identity(dim)
    for i in range(m):
        ctx = projection_pair_context(path[i], path[i + 1], ops)
        step_u, _ = connecting_unitary(ctx)
        u = step_u @ u

    conj_err = op_norm(u @ path[0] @ dagger(u) - path[-1])
    conj_bound = CHAIN_EXACTNESS * max(m, 1)
    if conj_err > conj_bound:
        raise NumericalInconsistency(
            f"chained conjugation drift {conj_err:.3e} exceeds {conj_bound:.3e}"
        )
    comm_bound = COMMUTATOR_CONSTANT * eps_path * m + CHAIN_EXACTNESS
    norms = []
    worst = 0.0
    for x in ops:
        n = op_norm(commutator(u, x))
        norms.append(n)
        if comm_bound > 0:
            worst = max(worst, n / comm_bound)
        if n > comm_bound:
            raise NumericalInconsistency(
                f"chained commutator {n:.3e} exceeds 28*eps*m + 1e-8 = {comm_bound:.3e}"
            )
    report = ChainReport(
        m, eps_path, conj_err, conj_bound, tuple(norms), comm_bound, worst
    )
    return u, report


# ---------------------------------------------------------------------------
# Index pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairingInput:
    """Data of the index pairing.

    ``b`` is a 2N x 2N hermitian block such that ``e + b`` is a projection,
    where ``e = diag(1_N, 0_N)``; ``q`` is a projection on the N*k-dimensional
    tensor space (N factor first, k factor second); ``gap_tol`` protects the
    spectral cut at one half.
    """

    b: np.ndarray
    q: np.ndarray
    n_dim: int
    k_dim: int
    gap_tol: float = DEFAULT_GAP_TOL


def pairing_input(b, q, n_dim: int, k_dim: int, gap_tol: float = DEFAULT_GAP_TOL) -> PairingInput:
    b = as_matrix(b)
    q = as_matrix(q)
    if n_dim < 1 or k_dim < 1:
        raise InvalidSize("tensor factors must have positive dimension")
    if b.shape[0] != 2 * n_dim:
        raise InvalidSize(f"b must be {2 * n_dim} x {2 * n_dim}, got {b.shape[0]}")
    if q.shape[0] != n_dim * k_dim:
        raise InvalidSize(f"q must be {n_dim * k_dim} x {n_dim * k_dim}, got {q.shape[0]}")
    e = _corner_projection(n_dim)
    require_projection(e + b, what="e + b")
    require_projection(q, what="pairing projection q")
    if not 0.0 < gap_tol < 0.5:
        raise HypothesisViolation(f"gap_tol must lie in (0, 1/2), got {gap_tol}")
    return PairingInput(b, q, n_dim, k_dim, gap_tol)


def _corner_projection(n: int) -> np.ndarray:
    e = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    e[:n, :n] = np.eye(n)
    return e


@dataclass(frozen=True)
class PairingResult:
    """Spectral projection of the pairing operand and its integer index.

    ``index = rank - N*k`` is the finite-dimensional stand-in for the
    K-class difference against ``diag(1, 0)``; ``margin`` is the distance
    from the operand's spectrum to the cut at one half.
    """

    projection: np.ndarray
    index: int
    rank: int
    margin: float


def pairing_operand(inp: PairingInput) -> np.ndarray:
    """The hermitian operand ``e (x) 1 + (1 (x) q)(b (x) 1)(1 (x) q)``."""
    e_big = np.kron(_corner_projection(inp.n_dim), np.eye(inp.k_dim))
    q_big = np.kron(np.eye(2), inp.q)
    b_big = np.kron(inp.b, np.eye(inp.k_dim))
    operand = e_big + q_big @ b_big @ q_big
    return (operand + operand.conj().T) / 2.0


def pairing(inp: PairingInput) -> PairingResult:
    """Pair an almost-commuting projection against block data of index type.

    The operand's spectrum must keep ``gap_tol`` clear of one half; the
    resulting spectral projection is checked idempotent to 1e-10 and its
    rank, minus ``N*k``, is the integer index.
    """
    operand = pairing_operand(inp)
    proj = spectral_projection(operand, 0.5, inp.gap_tol)
    idem = op_norm(proj @ proj - proj)
    if idem > 1e-10:
        raise NumericalInconsistency(
            f"pairing projection fails idempotency: ||P^2 - P|| = {idem:.3e}"
        )
    trace = float(np.real(np.trace(proj)))
    rank = int(round(trace))
    if abs(trace - rank) > 1e-8:
        raise NumericalInconsistency(
            f"pairing projection trace {trace!r} is not close to an integer"
        )
    eigs = hermitian_eigensystem(operand).eigenvalues
    margin = float(np.min(np.abs(eigs - 0.5)))
    return PairingResult(proj, rank - inp.n_dim * inp.k_dim, rank, margin)


def pairing_block_sum(a: PairingInput, b: PairingInput) -> PairingInput:
    """Direct sum of two pairing inputs sharing the same k factor.

    The N factors concatenate; the 2x2 block structure of ``b`` and the
    (N, k) tensor structure of ``q`` are interleaved accordingly, so the
    index of the sum is the sum of the indices.
    """
    if a.k_dim != b.k_dim:
        raise InvalidSize("block sum needs matching k factors")
    n1, n2, k = a.n_dim, b.n_dim, a.k_dim
    n = n1 + n2
    bb = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            bb[i * n:i * n + n1, j * n:j * n + n1] = a.b[
                i * n1:(i + 1) * n1, j * n1:(j + 1) * n1
            ]
            bb[i * n + n1:(i + 1) * n, j * n + n1:(j + 1) * n] = b.b[
                i * n2:(i + 1) * n2, j * n2:(j + 1) * n2
            ]
    qq = np.zeros((n * k, n * k), dtype=np.complex128)
    qa = a.q.reshape(n1, k, n1, k)
    qb = b.q.reshape(n2, k, n2, k)
    view = qq.reshape(n, k, n, k)
    view[:n1, :, :n1, :] = qa
    view[n1:, :, n1:, :] = qb
    gap = min(a.gap_tol, b.gap_tol)
    return pairing_input(bb, qq, n, k, gap)


def pairing_input_to_json(inp: PairingInput) -> dict:
    return {
        "N": inp.n_dim,
        "k": inp.k_dim,
        "b": matrix_to_json(inp.b),
        "q": matrix_to_json(inp.q),
        "gap_tol": inp.gap_tol,
    }


def pairing_input_from_json(obj) -> PairingInput:
    return pairing_input(
        matrix_from_json(obj["b"]),
        matrix_from_json(obj["q"]),
        int(obj["N"]),
        int(obj["k"]),
        float(obj.get("gap_tol", DEFAULT_GAP_TOL)),
    )


# ---------------------------------------------------------------------------
# Compatibility probing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeEntry:
    eigenvalues: tuple
    passed: bool
    worst_violation: float


@dataclass(frozen=True)
class CompatibilityReport:
    """Per-probe spectra of the compressed projection against the gap window.

    Passing means every eigenvalue lies in ``[0, 1/4) U (3/4, 1]`` (with
    ``eps`` slack at the outer edges).  This samples a necessary condition:
    it can refute compatibility, never certify it over all ucp maps.
    """

    entries: tuple
    passed: bool


def compatibility_probe(q, probes, eps: float) -> CompatibilityReport:
    """Check the spectral window of ``(probe (x) id)(q)`` for each probe.

    Probes are compression quasi-representations; only their compression
    isometry is used, as the ucp map ``a -> V* a V`` applied to the first
    tensor factor of ``q``.  The k factor is inferred from the dimensions.
    """
    q = require_projection(q, what="probed projection")
    entries = []
    all_pass = True
    for probe in probes:
        if probe.compression is None:
            raise HypothesisViolation(
                "compatibility probes must be compression quasi-representations"
            )
        v = probe.compression.isometry
        n = v.shape[0]
        if q.shape[0] % n != 0:
            raise InvalidSize(
                f"projection dimension {q.shape[0]} is not a multiple of probe dimension {n}"
            )
        k = q.shape[0] // n
        v_big = np.kron(v, np.eye(k))
        compressed = dagger(v_big) @ q @ v_big
        eigs = np.linalg.eigvalsh((compressed + compressed.conj().T) / 2.0)
        worst = 0.0
        ok = True
        for lam in eigs:
            lam = float(lam)
            if lam < -eps or lam > 1.0 + eps:
                ok = False
                worst = max(worst, min(abs(lam), abs(lam - 1.0)))
            elif 0.25 <= lam <= 0.75:
                ok = False
                worst = max(worst, min(lam - 0.25, 0.75 - lam) + 0.0)
        all_pass = all_pass and ok
        entries.append(ProbeEntry(tuple(float(x) for x in eigs), ok, worst))
    return CompatibilityReport(tuple(entries), all_pass)
