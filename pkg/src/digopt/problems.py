"""Local-loss suites: regularized logistic regression, quadratics, oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, OracleFailure


def noise_rng(seed: int, k: int, r: int) -> np.random.Generator:
    """Counter-based stream for iteration k, gossip round r.

    Streams are pure functions of (seed, k, r), so replaying an iteration,
    reordering batch draws, or transforming a multi-round run into an
    averaged-oracle run all see identical noise.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, k, r]))


def data_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed]))


class StochasticProblem:
    """A collection of n local losses with exact and noisy gradient oracles.

    Subclasses fill in per-node ``value``/``grad``; the noisy oracle adds
    i.i.d. Gaussian coordinates at level ``sigma_n`` on top of the exact
    local gradient.
    """

    n: int
    d: int
    sigma_n: float
    L: float | None = None
    minimizer: np.ndarray | None = None

    def value(self, i: int, x) -> float:
        raise NotImplementedError

    def grad(self, i: int, x) -> np.ndarray:
        raise NotImplementedError

    def grad_stack(self, X: np.ndarray) -> np.ndarray:
        """Exact local gradients at per-node points, stacked n x d."""
        return np.stack([self.grad(i, X[i]) for i in range(self.n)])

    def full_value(self, x) -> float:
        return float(np.mean([self.value(i, x) for i in range(self.n)]))

    def full_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.grad_stack(np.broadcast_to(x, (self.n, self.d))).mean(axis=0)


def noisy_oracle(problem: StochasticProblem, i: int, x, rng: np.random.Generator) -> np.ndarray:
    """Exact local gradient plus Gaussian noise drawn from ``rng``.

    When ``rng`` comes from ``noise_rng(seed, k, r)`` the draw for node i is
    row i of the block, matching the stacked sampling used by the solvers.
    """
    g = problem.grad(i, x)
    if problem.sigma_n == 0.0:
        return g
    block = rng.standard_normal((problem.n, problem.d)) * problem.sigma_n
    return g + block[i]


def sampled_grad_stack(problem: StochasticProblem, X: np.ndarray, seed: int, k: int, rounds: int = 1) -> np.ndarray:
    """Average of ``rounds`` stochastic gradient draws at the stacked points.

    Draw r of iteration k uses the (seed, k, r) stream; multi-round solvers
    and their averaged-oracle reformulations therefore agree bit for bit.
    """
    g = problem.grad_stack(np.asarray(X, dtype=float))
    if not np.all(np.isfinite(g)):
        raise OracleFailure(f"non-finite gradient at iteration {k}")
    if problem.sigma_n == 0.0:
        return g
    acc = np.zeros_like(g)
    for r in range(rounds):
        eps = noise_rng(seed, k, r).standard_normal(g.shape) * problem.sigma_n
        acc += g + eps
    return acc / rounds


def sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def softplus(t: np.ndarray) -> np.ndarray:
    """log(1 + exp(t)) without overflow."""
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = t[pos] + np.log1p(np.exp(-t[pos]))
    out[~pos] = np.log1p(np.exp(t[~pos]))
    return out


def regularizer_value(x: np.ndarray) -> float:
    x2 = x * x
    return float(np.sum(x2 / (1.0 + x2)))


def regularizer_grad(x: np.ndarray) -> np.ndarray:
    den = 1.0 + x * x
    return 2.0 * x / (den * den)


@dataclass(frozen=True)
class LogRegData:
    """Synthetic heterogeneous logistic-regression data.

    Node i holds M feature/label pairs generated from its planted solution
    x_star[i], so ``sigma_h`` controls how far the local optima spread.
    """

    features: np.ndarray  # (n, M, d)
    labels: np.ndarray  # (n, M) in {-1, +1}
    rho: float
    sigma_h: float
    x_star: np.ndarray  # (n, d)


def value_logreg(data: LogRegData, i: int, x) -> float:
    x = np.asarray(x, dtype=float)
    margins = data.labels[i] * (data.features[i] @ x)
    return float(np.mean(softplus(-margins)) + data.rho * regularizer_value(x))


def grad_logreg(data: LogRegData, i: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    margins = data.labels[i] * (data.features[i] @ x)
    s = sigmoid(-margins)
    m = data.labels.shape[1]
    g = -(data.labels[i] * s) @ data.features[i] / m
    return g + data.rho * regularizer_grad(x)


class LogisticProblem(StochasticProblem):
    def __init__(self, data: LogRegData, sigma_n: float = 0.0):
        self.data = data
        self.n, m, self.d = data.features.shape
        self.sigma_n = float(sigma_n)
        # mean squared feature norm bounds the logistic curvature; the
        # regularizer's second derivative is at most 2
        self.L = float(np.mean(np.sum(data.features**2, axis=2)) / 4.0 + 2.0 * data.rho)
        self.minimizer = None

    def value(self, i, x):
        return value_logreg(self.data, i, x)

    def grad(self, i, x):
        return grad_logreg(self.data, i, x)

    def grad_stack(self, X):
        X = np.asarray(X, dtype=float)
        margins = self.data.labels * np.einsum("nmd,nd->nm", self.data.features, X)
        s = sigmoid(-margins)
        m = margins.shape[1]
        g = -np.einsum("nm,nmd->nd", self.data.labels * s, self.data.features) / m
        den = 1.0 + X * X
        return g + self.data.rho * 2.0 * X / (den * den)


def gen_logreg(
    n: int,
    d: int = 10,
    M: int = 2000,
    rho: float = 0.001,
    sigma_h: float = 1.0,
    seed: int = 0,
    sigma_n: float = 0.001,
) -> tuple[LogisticProblem, LogRegData]:
    """Heterogeneous logistic regression with a non-convex regularizer.

    Labels follow the planted per-node solutions: y = +1 exactly when a
    uniform draw falls below sigmoid(h^T x_star_i).  Defaults reproduce the
    reference configuration (d=10, M=2000, rho=0.001).
    """
    if min(n, d, M) < 1:
        raise InvalidParameter("n, d, M must be positive")
    rng = data_rng(seed)
    x_shared = rng.standard_normal(d)
    x_star = x_shared[None, :] + sigma_h * rng.standard_normal((n, d))
    features = rng.standard_normal((n, M, d))
    p = sigmoid(np.einsum("nmd,nd->nm", features, x_star))
    labels = np.where(rng.uniform(size=(n, M)) < p, 1.0, -1.0)
    data = LogRegData(features=features, labels=labels, rho=rho, sigma_h=sigma_h, x_star=x_star)
    return LogisticProblem(data, sigma_n=sigma_n), data


class QuadraticProblem(StochasticProblem):
    def __init__(self, A: np.ndarray, b: np.ndarray, sigma_n: float = 0.0, L: float | None = None):
        self.A = A
        self.b = b
        self.n, self.d = b.shape
        self.sigma_n = float(sigma_n)
        self.L = float(L) if L is not None else float(max(np.linalg.eigvalsh(Ai)[-1] for Ai in A))
        self.minimizer = np.linalg.solve(A.sum(axis=0), np.einsum("nij,nj->i", A, b))

    def value(self, i, x):
        r = np.asarray(x, dtype=float) - self.b[i]
        return float(0.5 * r @ self.A[i] @ r)

    def grad(self, i, x):
        return self.A[i] @ (np.asarray(x, dtype=float) - self.b[i])

    def grad_stack(self, X):
        return np.einsum("nij,nj->ni", self.A, np.asarray(X, dtype=float) - self.b)


def gen_quadratic(n: int, d: int, cond: float, hetero: float, seed: int = 0, sigma_n: float = 0.0) -> QuadraticProblem:
    """Strongly convex testbed with a closed-form global minimizer.

    Each node gets a random positive-definite curvature with eigenvalues
    pinned to span [1, cond] and a center b_i displaced by ``hetero``.
    """
    if cond < 1.0:
        raise InvalidParameter(f"cond must be >= 1, got {cond}")
    rng = data_rng(seed)
    A = np.empty((n, d, d))
    for i in range(n):
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        eigs = 1.0 + (cond - 1.0) * rng.uniform(size=d)
        if d >= 2:
            eigs[0], eigs[-1] = 1.0, cond
        A[i] = (Q * eigs) @ Q.T
    center = rng.standard_normal(d)
    b = center[None, :] + hetero * rng.standard_normal((n, d))
    if hetero == 0.0:
        b = np.tile(center, (n, 1))
    return QuadraticProblem(A, b, sigma_n=sigma_n, L=cond)


class FunctionProblem(StochasticProblem):
    """Problem defined by explicit per-node (value, grad) callables."""

    def __init__(self, n: int, d: int, values, grads, sigma_n: float = 0.0, L: float | None = None):
        self.n, self.d = n, d
        self._values = values
        self._grads = grads
        self.sigma_n = float(sigma_n)
        self.L = L
        self.minimizer = None

    def value(self, i, x):
        return float(self._values[i](np.asarray(x, dtype=float)))

    def grad(self, i, x):
        return self._grads[i](np.asarray(x, dtype=float))
