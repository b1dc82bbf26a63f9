"""Deterministic randomness: every randomized routine takes an explicit seed.

All generators derive from a counter-based bit stream (Philox) through
``numpy``'s ``SeedSequence`` so that (master seed, suite index, trial index)
fully determines a trial, independent of execution order or thread count.
No code in this package touches the global numpy RNG.
"""

from __future__ import annotations

import numpy as np


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """A generator keyed by (master_seed, *path), order-independent across trials."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix.

    The R-factor's diagonal phases are divided out, which is what makes the
    distribution exactly Haar rather than merely orthogonal-column.
    """
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d)).conj()
    out = np.ascontiguousarray(q, dtype=np.complex128)
    out.setflags(write=False)
    return out


def random_hermitian(dim: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Random hermitian matrix rescaled to operator norm exactly ``norm``."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (z + z.conj().T) / 2.0
    top = float(np.linalg.norm(h, 2))
    if top == 0.0:
        return np.zeros((dim, dim), dtype=np.complex128)
    out = np.ascontiguousarray(h * (norm / top), dtype=np.complex128)
    out.setflags(write=False)
    return out


def random_projection(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Rank-``rank`` orthogonal projection with Haar-random range."""
    if not 0 <= rank <= dim:
        raise ValueError(f"rank {rank} out of range for dimension {dim}")
    u = haar_unitary(dim, rng)
    cols = u[:, :rank]
    p = cols @ cols.conj().T
    out = np.ascontiguousarray((p + p.conj().T) / 2.0, dtype=np.complex128)
    out.setflags(write=False)
    return out
