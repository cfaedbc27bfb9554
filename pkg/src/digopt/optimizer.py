"""Gradient tracking over column-stochastic matrices, with multi-round gossip."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Diverged, InvalidParameter, ZeroWeight
from .graph import MixingMatrix
from .problems import StochasticProblem, sampled_grad_stack
from .traces import OptimizerRow, RunTrace

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class DigingState:
    """Stacked per-node solver state at iteration k.

    ``y`` tracks the network-average gradient: its column sums equal those
    of the last sampled gradients ``g_prev`` at every iteration, which is
    what removes the heterogeneity bias.
    """

    x: np.ndarray  # n x d iterates
    y: np.ndarray  # n x d gradient trackers
    v: np.ndarray  # n push-sum weights
    w: np.ndarray  # n x d debiased iterates x / v
    g_prev: np.ndarray  # n x d last sampled gradients
    k: int


@dataclass(frozen=True)
class StepSizeParams:
    """Inputs of the worst-case step-size schedule."""

    L: float
    Delta: float
    sigma2: float
    n: int
    K: int
    beta_pi: float
    kappa_pi: float
    y0_norm2: float


def push_diging_init(problem: StochasticProblem, x0, seed: int, rounds: int = 1) -> DigingState:
    """State at k=0: w = x, v = 1, and y = g holding the first gradient draws."""
    x0 = np.asarray(x0, dtype=float)
    g0 = sampled_grad_stack(problem, x0, seed, 0, rounds)
    return DigingState(x=x0, y=g0.copy(), v=np.ones(problem.n), w=x0.copy(), g_prev=g0, k=0)


def _general_step(
    s: DigingState,
    W: MixingMatrix,
    gamma: float,
    problem: StochasticProblem,
    seed: int,
    gossip_rounds: int,
    oracle_rounds: int,
) -> DigingState:
    if gamma < 0.0:
        raise InvalidParameter(f"gamma must be non-negative, got {gamma}")
    phi = s.x - gamma * s.y
    v1 = s.v
    for _ in range(gossip_rounds):
        phi = W.w @ phi
        v1 = W.w @ v1
    x1 = phi
    if not np.isfinite(x1).all() or np.linalg.norm(x1) > DIVERGENCE_LIMIT:
        raise Diverged(f"iterate norm passed {DIVERGENCE_LIMIT:g} at iteration {s.k + 1}")
    if float(v1.min()) < 1e-300:
        raise ZeroWeight(f"push-sum weight vanished at iteration {s.k + 1}")
    w1 = x1 / v1[:, None]
    g1 = sampled_grad_stack(problem, w1, seed, s.k + 1, oracle_rounds)
    psi = s.y + g1 - s.g_prev
    for _ in range(gossip_rounds):
        psi = W.w @ psi
    return DigingState(x=x1, y=psi, v=v1, w=w1, g_prev=g1, k=s.k + 1)


def push_diging_step(
    s: DigingState,
    W: MixingMatrix,
    gamma: float,
    problem: StochasticProblem,
    seed: int,
    rounds: int = 1,
) -> DigingState:
    """One iteration: descend, mix, debias, then update the tracker.

    The tracker update mixes y + (new - old) sampled gradients, so the
    column sums of y and of the sampled gradients stay equal.  ``rounds``
    sets the oracle batch only; gossip is a single application of W.
    """
    return _general_step(s, W, gamma, problem, seed, gossip_rounds=1, oracle_rounds=rounds)


def mg_push_diging_step(
    s: DigingState,
    W: MixingMatrix,
    R: int,
    gamma: float,
    problem: StochasticProblem,
    seed: int,
) -> DigingState:
    """One outer iteration with R gossip rounds per block and R-fold batches."""
    if R < 1:
        raise InvalidParameter(f"R must be >= 1, got {R}")
    return _general_step(s, W, gamma, problem, seed, gossip_rounds=R, oracle_rounds=R)


def _trace_row(problem: StochasticProblem, s: DigingState, rounds_per_iter: int) -> OptimizerRow:
    xbar = s.x.mean(axis=0)
    grad = problem.full_grad(xbar)
    jy = np.outer(s.v / len(s.v), s.y.sum(axis=0))
    return OptimizerRow(
        k=s.k,
        rounds=s.k * rounds_per_iter,
        grad_norm=float(np.linalg.norm(grad)),
        fval=problem.full_value(xbar),
        cons_x=float(np.linalg.norm(s.w - xbar[None, :])),
        cons_y=float(np.linalg.norm(s.y - jy)),
    )


def _run_loop(problem, W, gamma, K, seed, x0, gossip_rounds, oracle_rounds, meta_R) -> RunTrace:
    if x0 is None:
        x0 = np.zeros((problem.n, problem.d))
    state = push_diging_init(problem, x0, seed, rounds=oracle_rounds)
    trace = RunTrace(
        meta={
            "n": problem.n,
            "d": problem.d,
            "gamma": float(gamma),
            "K": K,
            "seed": seed,
            "R": meta_R,
            "total_rounds": (K + 1) * meta_R,
        }
    )
    trace.rows.append(_trace_row(problem, state, meta_R))
    for _ in range(K):
        try:
            state = _general_step(state, W, gamma, problem, seed, gossip_rounds, oracle_rounds)
        except Diverged:
            trace.diverged = True
            break
        trace.rows.append(_trace_row(problem, state, meta_R))
    return trace


def run_push_diging(
    problem: StochasticProblem,
    W: MixingMatrix,
    gamma: float,
    K: int,
    seed: int,
    x0=None,
    oracle_rounds: int = 1,
) -> RunTrace:
    """Run K iterations, recording gradient norm and consensus errors at x-bar.

    The gradient-norm column always uses exact gradients even when the
    oracle is noisy.  A run whose iterate passes the divergence guard stops
    early with the trace flagged rather than raising.
    """
    return _run_loop(problem, W, gamma, K, seed, x0, gossip_rounds=1, oracle_rounds=oracle_rounds, meta_R=1)


def mg_push_diging_run(
    problem: StochasticProblem,
    W: MixingMatrix,
    R: int,
    gamma: float,
    K: int,
    seed: int,
    x0=None,
) -> RunTrace:
    """Multi-round variant: R gossip rounds per block, R-fold gradient batches.

    With a shared noise-stream seed the trajectory coincides with a vanilla
    run that uses the R-th matrix power and an oracle averaging R draws per
    query; with R=1 it reduces to ``run_push_diging`` exactly.
    """
    if R < 1:
        raise InvalidParameter(f"R must be >= 1, got {R}")
    return _run_loop(problem, W, gamma, K, seed, x0, gossip_rounds=R, oracle_rounds=R, meta_R=R)


def _positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise InvalidParameter(f"{name} must be positive, got {value}")


def theoretical_gamma(p: StepSizeParams) -> float:
    """Harmonic combination of the six worst-case step-size ceilings.

    Terms whose denominators vanish (no noise, or zero gap deviation) drop
    out as infinite ceilings, so the result is always at most the smallest
    finite ceiling.
    """
    _positive("L", p.L)
    _positive("Delta", p.Delta)
    if p.sigma2 < 0.0 or p.y0_norm2 < 0.0:
        raise InvalidParameter("sigma2 and y0_norm2 must be non-negative")
    if p.n < 1 or p.K < 1 or p.kappa_pi < 1.0:
        raise InvalidParameter("need n >= 1, K >= 1, kappa_pi >= 1")
    if not 0.0 <= p.beta_pi < 1.0:
        raise InvalidParameter(f"beta_pi must lie in [0, 1), got {p.beta_pi}")
    L, D, s2, n, K1 = p.L, p.Delta, p.sigma2, p.n, p.K + 1
    beta, kappa, y0 = p.beta_pi, p.kappa_pi, p.y0_norm2
    gap = 1.0 - beta
    inf = math.inf
    g1 = math.sqrt(2.0 * n * D / (K1 * L * s2)) if s2 > 0.0 else inf
    g2 = (D * gap**3 / (2.0 * K1 * L**2 * kappa**6 * beta**4)) ** (1.0 / 3.0) if beta > 0.0 else inf
    g3 = (
        (n**2 * D * gap**4 / (1200.0 * K1 * L**4 * kappa**8 * beta**4 * s2)) ** 0.2
        if s2 > 0.0 and beta > 0.0
        else inf
    )
    g4 = (gap**2 * D / (4.0 * L**2 * kappa**4 * beta**2 * y0)) ** (1.0 / 3.0) if beta > 0.0 and y0 > 0.0 else inf
    g5 = gap**2 / (40.0 * L * kappa**7 * beta) if beta > 0.0 else inf
    g6 = 1.0 / (2.0 * L)
    total = sum(1.0 / g for g in (g1, g2, g3, g4, g5, g6) if math.isfinite(g))
    return 1.0 / total


def mg_theoretical_gamma(p: StepSizeParams, R: int) -> float:
    """Schedule for the multi-round variant: mixing and variance are those
    of (W**R, sigma**2 / R)."""
    if R < 1:
        raise InvalidParameter(f"R must be >= 1, got {R}")
    adapted = StepSizeParams(
        L=p.L,
        Delta=p.Delta,
        sigma2=p.sigma2 / R,
        n=p.n,
        K=p.K,
        beta_pi=p.beta_pi**R,
        kappa_pi=p.kappa_pi,
        y0_norm2=p.y0_norm2,
    )
    return theoretical_gamma(adapted)


def mg_r_schedule(kappa_pi: float, n: int, beta_pi: float) -> int:
    """Gossip-round count that flattens the skewness and gap penalties."""
    if not 0.0 <= beta_pi < 1.0:
        raise InvalidParameter(f"beta_pi must lie in [0, 1), got {beta_pi}")
    if kappa_pi < 1.0 or n < 1:
        raise InvalidParameter("need kappa_pi >= 1 and n >= 1")
    p = (1.0 + math.sqrt(7.0 * math.log(kappa_pi))) ** 2 + (1.0 + math.sqrt(2.0 * math.log(n))) ** 2
    return math.ceil(p / (1.0 - beta_pi))
