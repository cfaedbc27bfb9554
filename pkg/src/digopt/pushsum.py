"""Push-sum averaging: value/weight sequences with ratio debiasing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidWeightSum, ZeroWeight
from .graph import MixingMatrix
from .spectral import equilibrium_vector
from .traces import PushSumRow

WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class PushSumState:
    """Raw values z, weights v, and debiased ratios w = z / v at step k.

    The column sums of z and the sum of v are conserved by every step
    because the mixing matrix is column-stochastic; rows of w whose weight
    has not yet received mass are NaN until the weight turns positive.
    """

    z: np.ndarray
    v: np.ndarray
    w: np.ndarray
    k: int


def _as_block(z0) -> np.ndarray:
    z0 = np.asarray(z0, dtype=float)
    if z0.ndim == 1:
        z0 = z0[:, None]
    return z0


def _debias(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    w = np.full_like(z, np.nan)
    ok = v >= WEIGHT_FLOOR
    w[ok] = z[ok] / v[ok, None]
    return w


def push_sum_init(z0, v0=None) -> PushSumState:
    """Initial state; v0 defaults to the all-ones vector.

    The weights must be non-negative and sum to the node count, the
    normalization under which the ratios v_i / pi_i start straddling one.
    """
    z0 = _as_block(z0)
    n = z0.shape[0]
    if v0 is None:
        v0 = np.ones(n)
    v0 = np.asarray(v0, dtype=float)
    if abs(float(v0.sum()) - n) > 1e-9:
        raise InvalidWeightSum(f"weights must sum to n={n}, got {v0.sum()!r}")
    if np.any(v0 < 0.0):
        raise InvalidWeightSum("weights must be non-negative")
    return PushSumState(z=z0, v=v0, w=_debias(z0, v0), k=0)


def push_sum_step(s: PushSumState, W: MixingMatrix, require_w: bool = True) -> PushSumState:
    """One synchronous round: z <- Wz, v <- Wv, w <- z / v.

    With ``require_w`` (the default) a weight below 1e-300 raises ZeroWeight
    instead of emitting inf; pass False to defer the division and carry NaN
    rows until the weight becomes positive, as happens before full
    propagation from a sparse v0.
    """
    z = W.w @ s.z
    v = W.w @ s.v
    if require_w and float(v.min()) < WEIGHT_FLOOR:
        raise ZeroWeight(f"weight {v.min()!r} below floor at step {s.k + 1}")
    return PushSumState(z=z, v=v, w=_debias(z, v), k=s.k + 1)


def run_push_sum(W: MixingMatrix, z0, v0=None, K: int = 0, pi=None) -> list[PushSumRow]:
    """Run K rounds and record the consensus diagnostics at every step.

    Each row holds the Frobenius distance of the debiased estimates from
    the true initial average, the extreme ratios v_i / pi_i (monotone under
    exact arithmetic), and the norm of the inverse weight matrix.
    """
    state = push_sum_init(z0, v0)
    if pi is None:
        pi = equilibrium_vector(W)
    target = np.mean(state.z, axis=0)

    def row(s: PushSumState) -> PushSumRow:
        ratios = s.v / pi
        return PushSumRow(
            k=s.k,
            consensus_error=float(np.linalg.norm(s.w - target[None, :])),
            min_ratio=float(ratios.min()),
            max_ratio=float(ratios.max()),
            vinv_norm=float(1.0 / s.v.min()) if s.v.min() >= WEIGHT_FLOOR else float("inf"),
        )

    rows = [row(state)]
    for _ in range(K):
        state = push_sum_step(state, W)
        rows.append(row(state))
    return rows
