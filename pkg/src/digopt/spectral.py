"""Equilibrium vectors, weighted norms, spectral-gap and skewness metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonPositiveEntry
from .graph import MixingMatrix

_TINY = 1e-300


@dataclass(frozen=True)
class EquilibriumProfile:
    """Equilibrium vector of a mixing matrix together with its derived metrics.

    ``beta_pi`` is the weighted operator norm of W minus its rank-one limit
    (strictly below one for primitive matrices), ``kappa_pi`` the max/min
    ratio of the equilibrium vector, and ``two_norm_dev`` the same deviation
    measured in the plain 2-norm, which can exceed one on skewed digraphs.
    """

    pi: np.ndarray
    beta_pi: float
    kappa_pi: float
    two_norm_dev: float

    @property
    def ln_kappa_pi(self) -> float:
        """log(kappa_pi) computed from the entries; safe when the ratio overflows."""
        return float(np.log(np.max(self.pi)) - np.log(np.min(self.pi)))


def equilibrium_vector(W: MixingMatrix, tol: float = 1e-12, max_iters: int = 10**6) -> np.ndarray:
    """Power iteration for the positive right eigenvector at eigenvalue one.

    Starts from the uniform vector and renormalizes the sum each step.  The
    iteration is refined until the entrywise relative change also settles,
    so small equilibrium entries keep near-machine relative accuracy (the
    max/min ratio of the result is used in reported metrics).  Raises
    NoConvergence when the residual stays above ``tol``, which typically
    signals a non-primitive matrix.
    """
    if tol <= 0.0:
        raise NonPositiveEntry(f"tol must be positive, got {tol}")
    n = W.n
    if n == 1:
        return np.ones(1)
    rel_floor = min(tol, 64.0 * np.finfo(float).eps)
    z = np.full(n, 1.0 / n)
    resid = np.inf
    best_rel = np.inf
    stalled = 0
    for _ in range(max_iters):
        y = W.w @ z
        y /= y.sum()
        resid = float(np.linalg.norm(y - z))
        rel = float(np.max(np.abs(y - z) / np.maximum(y, _TINY)))
        z = y
        if resid <= tol:
            if rel <= rel_floor:
                break
            # keep polishing entrywise, but stop once roundoff flattens out
            if rel < best_rel * (1.0 - 1e-3):
                best_rel = rel
                stalled = 0
            else:
                stalled += 1
                if stalled >= 200:
                    break
    if resid > tol:
        raise NoConvergence(f"no equilibrium vector after {max_iters} iterations (residual {resid:.3e})")
    if np.any(z <= 0.0):
        raise NoConvergence("equilibrium vector has non-positive entries")
    return z


def pi_vector_norm(v, pi) -> float:
    """Weighted norm sqrt(sum(v_i^2 / pi_i)); equals sqrt(n)*||v||_2 at pi = 1/n."""
    v = np.asarray(v, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if v.shape != pi.shape:
        raise DimensionMismatch(f"shapes {v.shape} and {pi.shape} differ")
    if np.any(pi <= 0.0):
        raise NonPositiveEntry("pi must be strictly positive")
    return float(np.sqrt(np.sum(v * v / pi)))


def pi_matrix_norm(A, pi, rel_tol: float = 1e-10) -> float:
    """Operator norm of A under the pi-weighted vector norm."""
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0.0):
        raise NonPositiveEntry("pi must be strictly positive")
    root = np.sqrt(pi)
    scaled = (np.asarray(A, dtype=float) * root[None, :]) / root[:, None]
    return sigma_max(scaled, rel_tol=rel_tol)


def skewness_kappa(pi) -> float:
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0.0):
        raise NonPositiveEntry("pi must be strictly positive")
    return float(np.max(pi) / np.min(pi))


def spectral_gap_beta(W: MixingMatrix, pi=None, rel_tol: float = 1e-10) -> float:
    """Largest singular value of W - pi*1^T in the pi-weighted norm."""
    if pi is None:
        pi = equilibrium_vector(W)
    pi = np.asarray(pi, dtype=float)
    dev = W.w - np.outer(pi, np.ones(W.n))
    return pi_matrix_norm(dev, pi, rel_tol=rel_tol)


def two_norm_deviation(W: MixingMatrix, pi=None, rel_tol: float = 1e-10) -> float:
    """Largest singular value of W - pi*1^T in the plain 2-norm."""
    if pi is None:
        pi = equilibrium_vector(W)
    pi = np.asarray(pi, dtype=float)
    dev = W.w - np.outer(pi, np.ones(W.n))
    return sigma_max(dev, rel_tol=rel_tol)


def equilibrium_profile(W: MixingMatrix, tol: float = 1e-12) -> EquilibriumProfile:
    pi = equilibrium_vector(W, tol=tol)
    return EquilibriumProfile(
        pi=pi,
        beta_pi=spectral_gap_beta(W, pi),
        kappa_pi=skewness_kappa(pi),
        two_norm_dev=two_norm_deviation(W, pi),
    )


def sigma_max(A, rel_tol: float = 1e-10, max_iters: int = 500_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on A^T A.

    Deterministic seeded start; restarts with fresh seeded vectors if the
    iterate falls into the kernel.  Convergence requires several consecutive
    near-stationary estimates, which keeps the final error well below the
    requested relative tolerance even for clustered singular values.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0 or not np.any(A):
        return 0.0
    n = A.shape[1]
    restarts = 0
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    change_tol = min(rel_tol, 1e-12)
    sigma = 0.0
    hits = 0
    for _ in range(max_iters):
        y = A @ u
        new_sigma = float(np.linalg.norm(y))
        z = A.T @ y
        nz = float(np.linalg.norm(z))
        if nz < _TINY:
            restarts += 1
            if restarts > 5:
                return 0.0
            u = np.random.default_rng(seed + restarts).standard_normal(n)
            u /= np.linalg.norm(u)
            sigma, hits = 0.0, 0
            continue
        u = z / nz
        if abs(new_sigma - sigma) <= change_tol * max(new_sigma, _TINY):
            hits += 1
            if hits >= 4:
                return new_sigma
        else:
            hits = 0
        sigma = new_sigma
    raise NoConvergence(f"singular-value iteration stalled after {max_iters} iterations")
