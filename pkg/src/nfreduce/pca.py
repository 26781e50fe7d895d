"""Principal component analysis over the normalized firing-strength matrix.

Population-form statistics (1/n covariance), a self-contained cyclic
Jacobi eigensolver for the symmetric covariance, component selection by
cumulative explained variance, and centered projection. A fitted basis is
immutable and safe for concurrent projection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiConvergenceError",
    "PcaBasis",
    "mean_vector",
    "covariance_matrix",
    "eig_sym",
    "select_components",
    "project",
    "fit_pca",
]

JACOBI_MAX_SWEEPS = 100
# Stop once the strictly off-diagonal Frobenius norm drops below this
# fraction of the input's Frobenius norm.
JACOBI_RTOL = 1e-12


class JacobiConvergenceError(RuntimeError):
    """The Jacobi sweep limit was exceeded before reaching tolerance."""


def mean_vector(A) -> np.ndarray:
    """Column means of an (n, d) matrix; n >= 1."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    return A.mean(axis=0)


def covariance_matrix(A) -> np.ndarray:
    """Population covariance (divisor n, not n-1); symmetric by construction."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 2:
        raise ValueError("covariance needs at least 2 rows")
    centered = A - A.mean(axis=0)
    cov = centered.T @ centered / A.shape[0]
    return 0.5 * (cov + cov.T)


def _round_robin_rounds(d: int):
    """Tournament ordering: (d or d+1)-1 rounds of disjoint index pairs.

    Every unordered pair appears exactly once per sweep. Pairs within a
    round are disjoint, so their rotations commute and one round can be
    applied in a single vectorized step with results identical to
    processing the same pairs sequentially.
    """
    players = list(range(d))
    if d % 2:
        players.append(-1)  # bye
    e = len(players)
    rounds = []
    for _ in range(e - 1):
        pairs = [
            (players[i], players[e - 1 - i])
            for i in range(e // 2)
            if players[i] != -1 and players[e - 1 - i] != -1
        ]
        rounds.append(np.array(pairs, dtype=np.int64))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eig_sym(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of symmetric S.

    Cyclic Jacobi rotations in round-robin order, at most JACOBI_MAX_SWEEPS
    sweeps. The returned eigenvectors are columns, each flipped so its
    largest-magnitude entry (lowest index on ties) is positive, which makes
    the decomposition deterministic across runs.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    d = S.shape[0]
    asym = np.max(np.abs(S - S.T)) if d else 0.0
    scale = max(1.0, np.max(np.abs(S))) if d else 1.0
    if asym > 1e-8 * scale:
        raise ValueError(f"matrix is not symmetric: max |S - S'| = {asym:.3e}")
    a = 0.5 * (S + S.T)
    v = np.eye(d)
    norm = np.linalg.norm(a)
    if d < 2 or norm == 0.0:
        return _sorted_system(np.diag(a).copy(), v)
    tol = JACOBI_RTOL * norm
    rounds = _round_robin_rounds(d)
    for _ in range(JACOBI_MAX_SWEEPS):
        if _offdiag_norm(a) <= tol:
            return _sorted_system(np.diag(a).copy(), v)
        for pairs in rounds:
            ps, qs = pairs[:, 0], pairs[:, 1]
            apq = a[ps, qs]
            active = apq != 0.0
            if not np.any(active):
                continue
            ps, qs, apq = ps[active], qs[active], apq[active]
            app, aqq = a[ps, ps], a[qs, qs]
            tau = (aqq - app) / (2.0 * apq)
            t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau**2))
            t[tau == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = t * c
            rp, rq = a[ps, :].copy(), a[qs, :].copy()
            a[ps, :] = c[:, None] * rp - s[:, None] * rq
            a[qs, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, ps].copy(), a[:, qs].copy()
            a[:, ps] = cp * c - cq * s
            a[:, qs] = cp * s + cq * c
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            vp, vq = v[:, ps].copy(), v[:, qs].copy()
            v[:, ps] = vp * c - vq * s
            v[:, qs] = vp * s + vq * c
    off = _offdiag_norm(a)
    if off <= tol:
        return _sorted_system(np.diag(a).copy(), v)
    raise JacobiConvergenceError(
        f"off-diagonal norm {off:.3e} above tolerance {tol:.3e} "
        f"after {JACOBI_MAX_SWEEPS} sweeps"
    )


def _offdiag_norm(a: np.ndarray) -> float:
    # summing the strictly off-diagonal squares directly avoids the
    # cancellation of ||A||_F^2 - ||diag||^2 near convergence
    b = a.copy()
    np.fill_diagonal(b, 0.0)
    return float(np.linalg.norm(b))


def _sorted_system(eigenvalues, eigenvectors):
    order = np.argsort(-eigenvalues, kind="stable")
    vals = eigenvalues[order]
    vecs = eigenvectors[:, order]
    # sign convention: largest-magnitude entry positive, lowest index on ties
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            vecs[:, k] = -col
    return vals, vecs


def select_components(eigenvalues, threshold: float = 0.95) -> int:
    """Smallest K whose cumulative eigenvalue share reaches ``threshold``.

    Eigenvalues must be sorted descending; tiny negatives (covariance
    round-off) are clamped to zero. An all-zero spectrum degenerates to
    K = 1 with a warning.
    """
    vals = np.asarray(eigenvalues, dtype=float).copy()
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("eigenvalues must be a non-empty 1-D array")
    if np.any(np.diff(vals) > 1e-12):
        raise ValueError("eigenvalues must be sorted in descending order")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    vals[vals < 0.0] = 0.0
    total = vals.sum()
    if total == 0.0:
        warnings.warn("all-zero eigenvalue spectrum; keeping one component")
        return 1
    share = np.cumsum(vals) / total
    return int(np.searchsorted(share, threshold - 1e-12) + 1)


@dataclass(frozen=True)
class PcaBasis:
    """Frozen component transform fitted on one data matrix.

    mean            : (d,) column means of the fitted data
    components      : (d, K) orthonormal eigenvector columns
    eigenvalues     : (K,) descending, nonnegative
    explained_ratio : (K,) per-component share of the total variance
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[1]

    @property
    def n_features(self) -> int:
        return self.components.shape[0]


def project(A, basis: PcaBasis) -> np.ndarray:
    """Centered projection: (A - mean) @ components, an (n, K) score matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != basis.n_features:
        raise ValueError(
            f"expected {basis.n_features} columns, got shape {A.shape}"
        )
    return (A - basis.mean) @ basis.components


def fit_pca(A, threshold: float = 0.95) -> PcaBasis:
    """Fit mean/covariance/eigenbasis on A and keep the top components.

    K is the smallest count whose cumulative explained-variance share
    reaches ``threshold``. The basis is fitted once and then frozen.
    """
    A = np.asarray(A, dtype=float)
    mu = mean_vector(A)
    cov = covariance_matrix(A)
    vals, vecs = eig_sym(cov)
    vals = np.where(vals < 0.0, 0.0, vals)
    k = select_components(vals, threshold)
    total = vals.sum()
    if total > 0.0:
        ratio = vals[:k] / total
    else:
        ratio = np.ones(k)
    return PcaBasis(
        mean=mu,
        components=vecs[:, :k].copy(),
        eigenvalues=vals[:k].copy(),
        explained_ratio=ratio,
    )
