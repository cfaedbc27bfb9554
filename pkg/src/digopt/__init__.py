"""Decentralized stochastic optimization over directed graphs.

Simulation library for column-stochastic gossip: push-sum averaging,
gradient tracking with and without multi-round gossip, the equilibrium
metrics that govern their rates, and the zero-chain hard instances that
certify how fast any gossip method can possibly be.
"""

from .graph import (
    Digraph,
    MixingMatrix,
    build_grid,
    build_hub_cycle_matrix,
    build_out_degree_matrix,
    build_ring,
    build_skewed_family,
    perturb_weights,
)
from .optimizer import (
    DigingState,
    StepSizeParams,
    mg_push_diging_run,
    mg_push_diging_step,
    mg_r_schedule,
    mg_theoretical_gamma,
    push_diging_init,
    push_diging_step,
    run_push_diging,
    theoretical_gamma,
)
from .problems import gen_logreg, gen_quadratic, noisy_oracle
from .pushsum import PushSumState, push_sum_init, push_sum_step, run_push_sum
from .spectral import (
    EquilibriumProfile,
    equilibrium_profile,
    equilibrium_vector,
    pi_matrix_norm,
    pi_vector_norm,
    skewness_kappa,
    spectral_gap_beta,
    two_norm_deviation,
)
from .traces import RunTrace

__all__ = [
    "Digraph",
    "MixingMatrix",
    "build_grid",
    "build_hub_cycle_matrix",
    "build_out_degree_matrix",
    "build_ring",
    "build_skewed_family",
    "perturb_weights",
    "DigingState",
    "StepSizeParams",
    "mg_push_diging_run",
    "mg_push_diging_step",
    "mg_r_schedule",
    "mg_theoretical_gamma",
    "push_diging_init",
    "push_diging_step",
    "run_push_diging",
    "theoretical_gamma",
    "gen_logreg",
    "gen_quadratic",
    "noisy_oracle",
    "PushSumState",
    "push_sum_init",
    "push_sum_step",
    "run_push_sum",
    "EquilibriumProfile",
    "equilibrium_profile",
    "equilibrium_vector",
    "pi_matrix_norm",
    "pi_vector_norm",
    "skewness_kappa",
    "spectral_gap_beta",
    "two_norm_deviation",
    "RunTrace",
]
