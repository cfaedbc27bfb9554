"""Zero-chain functions and the two-cluster hard instance they induce.

The building blocks are a smooth bump that is exactly zero up to 1/2 and a
scaled Gaussian integral; chained products of the two let a gradient
activate at most one new coordinate per evaluation.  Splitting the chain
into even and odd links and planting the halves on two far-apart node
clusters forces any gossip algorithm to ferry information back and forth
across the network once per coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .problems import FunctionProblem

DELTA0 = 12.0
SMOOTHNESS = 152.0
GRAD_INF_BOUND = 23.0

_PHI_SCALE = math.sqrt(2.0 * math.pi * math.e)
_ERFC = np.frompyfunc(math.erfc, 1, 1)


def prog(x) -> int:
    """Highest 1-based index of a nonzero coordinate; 0 for the zero vector.

    Comparison is against exact zero: the chain construction keeps inactive
    coordinates identically zero, so no thresholding is involved.
    """
    x = np.asarray(x)
    nz = np.flatnonzero(x)
    return int(nz[-1]) + 1 if nz.size else 0


def psi(z):
    """Smooth bump: zero up to 1/2, exp(1 - 1/(2z-1)^2) beyond."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    m = z > 0.5
    t = 2.0 * z[m] - 1.0
    out[m] = np.exp(1.0 - 1.0 / (t * t))
    return out if out.ndim else float(out)


def psi_prime(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    m = z > 0.5
    t = 2.0 * z[m] - 1.0
    out[m] = np.exp(1.0 - 1.0 / (t * t)) * 4.0 / (t * t * t)
    return out if out.ndim else float(out)


def phi(z):
    """sqrt(e) times the Gaussian integral up to z, via the complementary
    error function (absolute accuracy well below 1e-12)."""
    z = np.asarray(z, dtype=float)
    out = _PHI_SCALE * 0.5 * np.asarray(_ERFC(-z / math.sqrt(2.0)), dtype=float)
    return out if out.ndim else float(out)


def phi_prime(z):
    z = np.asarray(z, dtype=float)
    out = math.sqrt(math.e) * np.exp(-0.5 * z * z)
    return out if out.ndim else float(out)


def _chain_value(x: np.ndarray, js: np.ndarray, mult: float, head: float) -> float:
    total = -head * phi(x[0])
    if js.size:
        a, b = x[js - 1], x[js]
        total += mult * float(np.sum(psi(-a) * phi(-b) - psi(a) * phi(b)))
    return float(total)


def _chain_grad(x: np.ndarray, js: np.ndarray, mult: float, head: float) -> np.ndarray:
    g = np.zeros_like(x)
    g[0] -= head * phi_prime(x[0])
    if js.size:
        a, b = x[js - 1], x[js]
        np.add.at(g, js - 1, -mult * (psi_prime(-a) * phi(-b) + psi_prime(a) * phi(b)))
        np.add.at(g, js, -mult * (psi(-a) + psi(a)) * phi_prime(b))
    return g


def _all_links(d: int) -> np.ndarray:
    return np.arange(1, d)


def _even_links(d: int) -> np.ndarray:
    return np.arange(2, d, 2)


def _odd_links(d: int) -> np.ndarray:
    return np.arange(1, d, 2)


def h_value(x) -> float:
    x = np.asarray(x, dtype=float)
    return _chain_value(x, _all_links(x.size), 1.0, 1.0)


def h_grad(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _chain_grad(x, _all_links(x.size), 1.0, 1.0)


def h1_value(x) -> float:
    """Even-link half of the chain (doubled), plus the doubled head term.

    Its gradient cannot push past an odd active coordinate, so progress
    through odd indices requires the complementary half.
    """
    x = np.asarray(x, dtype=float)
    return _chain_value(x, _even_links(x.size), 2.0, 2.0)


def h1_grad(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _chain_grad(x, _even_links(x.size), 2.0, 2.0)


def h2_value(x) -> float:
    """Odd-link half of the chain (doubled); blocked at even coordinates."""
    x = np.asarray(x, dtype=float)
    return _chain_value(x, _odd_links(x.size), 2.0, 0.0)


def h2_grad(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _chain_grad(x, _odd_links(x.size), 2.0, 0.0)


@dataclass(frozen=True)
class ZeroChainInstance:
    """Scaled two-cluster instance parameters.

    The first third of the nodes hold the even-link half, the last third
    the odd-link half, and the middle third the zero function; ``lam``
    rescales the chain so the initial gap fits the budget.
    """

    n: int
    d: int
    lam: float
    L: float
    Delta: float
    e1_nodes: tuple[int, ...]
    e2_nodes: tuple[int, ...]

    @property
    def gradient_norm_floor(self) -> float:
        """Lower bound on the exact gradient norm while the last coordinate
        is still zero."""
        return self.L * self.lam / (3.0 * SMOOTHNESS)


def lambda_cap(L: float, Delta: float, d: int) -> float:
    return math.sqrt(SMOOTHNESS * Delta / (L * DELTA0 * d))


def build_hard_instance(
    n: int,
    L: float,
    Delta: float,
    K: int | None = None,
    d: int | None = None,
    lam: float | None = None,
) -> tuple[ZeroChainInstance, FunctionProblem]:
    """Assemble the hard problem, auto-sizing the dimension and scale from K.

    With the ``K``-based sizing the dimension stays one ahead of the best
    possible progress after K iterations and the scale respects the initial
    gap budget automatically.
    """
    if n % 3 != 0 or n < 3:
        raise InvalidParameter(f"n must be a positive multiple of 3, got {n}")
    if L <= 0.0 or Delta <= 0.0:
        raise InvalidParameter("L and Delta must be positive")
    if d is None:
        if K is None:
            raise InvalidParameter("provide K to auto-size d")
        d = 2 * ((3 * K) // (2 * n)) + 2
    if lam is None:
        if K is None:
            raise InvalidParameter("provide K to auto-size lam")
        lam = math.sqrt(n * SMOOTHNESS * Delta / (5.0 * L * DELTA0 * K))
    cap = lambda_cap(L, Delta, d)
    if lam > cap * (1.0 + 1e-12):
        raise InvalidParameter(f"lam={lam} exceeds the gap budget cap {cap}")

    third = n // 3
    e1 = tuple(range(third))
    e2 = tuple(range(n - third, n))
    scale = L * lam * lam / SMOOTHNESS
    gscale = L * lam / SMOOTHNESS

    def make_pair(value_fn, grad_fn):
        return (
            lambda x: scale * value_fn(x / lam),
            lambda x: gscale * grad_fn(x / lam),
        )

    zero_pair = (lambda x: 0.0, lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    values, grads = [], []
    for i in range(n):
        if i in e1:
            pair = make_pair(h1_value, h1_grad)
        elif i in e2:
            pair = make_pair(h2_value, h2_grad)
        else:
            pair = zero_pair
        values.append(pair[0])
        grads.append(pair[1])

    inst = ZeroChainInstance(n=n, d=d, lam=lam, L=L, Delta=Delta, e1_nodes=e1, e2_nodes=e2)
    problem = FunctionProblem(n, d, values, grads, sigma_n=0.0, L=L)
    return inst, problem


def progress_trace(problem, W, gamma: float, K: int, seed: int, R: int = 1):
    """Run the tracking optimizer on a hard instance, recording the progress
    of the averaged iterate and the exact gradient norm at every iteration.

    Returns rows (k, rounds, prog_xbar, grad_norm).  Coordinates stay
    exactly zero until information reaches them, so ``prog_xbar`` counts
    real information propagation through the network.
    """
    from .errors import Diverged
    from .optimizer import mg_push_diging_step, push_diging_init, push_diging_step

    state = push_diging_init(problem, np.zeros((problem.n, problem.d)), seed, rounds=R)
    rows = []

    def record(s):
        xbar = s.x.mean(axis=0)
        rows.append((s.k, s.k * R, prog(xbar), float(np.linalg.norm(problem.full_grad(xbar)))))

    record(state)
    for _ in range(K):
        try:
            if R == 1:
                state = push_diging_step(state, W, gamma, problem, seed)
            else:
                state = mg_push_diging_step(state, W, R, gamma, problem, seed)
        except Diverged:
            break
        record(state)
    return rows
