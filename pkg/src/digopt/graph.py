"""Directed topologies and column-stochastic mixing matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NotStronglyConnected

COLUMN_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Digraph:
    """Directed graph on nodes 0..n-1.

    An edge (j, i) means node j sends to node i.  Self-loops are implicit
    (every mixing-matrix builder adds them) and are not stored.
    """

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter(f"node count must be >= 1, got {self.n}")
        edges = frozenset((j, i) for (j, i) in self.edges if j != i)
        for j, i in edges:
            if not (0 <= j < self.n and 0 <= i < self.n):
                raise InvalidParameter(f"edge ({j}, {i}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    def out_neighbors(self, j: int) -> list[int]:
        return sorted(i for (jj, i) in self.edges if jj == j)

    def out_degree(self, j: int) -> int:
        """Out-degree of node j, excluding the implicit self-loop."""
        return sum(1 for (jj, _) in self.edges if jj == j)

    def is_strongly_connected(self) -> bool:
        cached = getattr(self, "_strong", None)
        if cached is None:
            cached = _strongly_connected(self.n, self.edges)
            object.__setattr__(self, "_strong", cached)
        return cached


def _strongly_connected(n: int, edges) -> bool:
    if n == 1:
        return True
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for j, i in edges:
        fwd[j].append(i)
        bwd[i].append(j)
    return _reaches_all(fwd, n) and _reaches_all(bwd, n)


def _reaches_all(adj, n: int) -> bool:
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n


@dataclass(frozen=True)
class MixingMatrix:
    """Dense column-stochastic mixing matrix.

    ``w[i, j]`` is the weight node i applies to the value received from
    node j, so each column describes how one node splits its outgoing
    mass.  Columns sum to one and all entries are non-negative.
    """

    n: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.n, self.n):
            raise InvalidParameter(f"expected shape ({self.n}, {self.n}), got {w.shape}")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise InvalidParameter("mixing weights must lie in [0, 1]")
        colsums = w.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > COLUMN_SUM_TOL:
            worst = float(np.max(np.abs(colsums - 1.0)))
            raise InvalidParameter(f"columns must sum to 1 (worst deviation {worst:.3e})")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @classmethod
    def from_array(cls, w) -> "MixingMatrix":
        w = np.asarray(w, dtype=float)
        return cls(n=w.shape[0], w=w)

    def pattern_digraph(self) -> Digraph:
        """Digraph induced by the off-diagonal positive entries."""
        idx = np.argwhere(self.w > 0.0)
        edges = frozenset((int(j), int(i)) for i, j in idx if i != j)
        return Digraph(self.n, edges)

    def is_primitive(self) -> bool:
        """Sufficient primitivity check: strong connectivity plus positive trace."""
        return self.pattern_digraph().is_strongly_connected() and float(np.trace(self.w)) > 0.0


def complete_digraph(n: int) -> Digraph:
    return Digraph(n, frozenset((j, i) for j in range(n) for i in range(n) if i != j))


def directed_cycle(n: int) -> Digraph:
    """Each node sends to its successor modulo n."""
    return Digraph(n, frozenset((j, (j + 1) % n) for j in range(n)))


def hub_cycle_digraph(n: int) -> Digraph:
    """Directed cycle plus an edge from every node back to node 0.

    This is the topology underlying the highly skewed mixing family: moving
    information from node 0 to node n-1 takes n-1 hops while every node can
    reach node 0 in one hop.
    """
    edges = set((j, (j + 1) % n) for j in range(n))
    edges.update((j, 0) for j in range(1, n))
    return Digraph(n, frozenset(edges))


def build_out_degree_matrix(g: Digraph) -> MixingMatrix:
    """Column-stochastic matrix from the out-degree rule.

    Node j assigns weight 1/(1 + outdeg(j)) to itself and to each of its
    out-neighbors, which makes every column sum to one using only local
    information.
    """
    if not g.is_strongly_connected():
        raise NotStronglyConnected(f"digraph on {g.n} nodes is not strongly connected")
    w = np.zeros((g.n, g.n))
    for j in range(g.n):
        share = 1.0 / (1.0 + g.out_degree(j))
        w[j, j] = share
        for i in g.out_neighbors(j):
            w[i, j] = share
    return MixingMatrix(g.n, w)


def build_skewed_family(n: int, eps: float) -> MixingMatrix:
    """One-parameter family with constant spectral gap but exponential skewness.

    The matrix is ((1+eps)/2) * C + ((1-eps)/2) * e_1 1^T where C is the
    cyclic shift sending node j to node j+1.  Its equilibrium vector decays
    geometrically by a factor (1+eps)/2 along the cycle, so the skewness is
    (2/(1+eps))**(n-1) while the gap metric stays at sqrt((1+eps)/2).
    """
    if not -1.0 < eps < 1.0:
        raise InvalidParameter(f"eps must lie in (-1, 1), got {eps}")
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    a = (1.0 + eps) / 2.0
    w = np.zeros((n, n))
    w[0, :] = 1.0 - a
    w[0, n - 1] += a
    for j in range(n - 1):
        w[j + 1, j] = a
    if n == 1:
        w[0, 0] = 1.0
    return MixingMatrix(n, w)


def build_hub_cycle_matrix(n: int, subdiag) -> MixingMatrix:
    """Weighted matrix on the hub-cycle topology with chosen forward weights.

    ``subdiag[j]`` is the weight on the cycle edge j -> j+1 (the remaining
    1 - subdiag[j] goes to the hub node 0); the last node sends everything
    to the hub.  The equilibrium vector satisfies pi[j+1] = subdiag[j]*pi[j],
    so the skewness equals 1/prod(subdiag) exactly whenever all forward
    weights are below one.
    """
    a = np.asarray(subdiag, dtype=float)
    if a.shape != (n - 1,):
        raise InvalidParameter(f"need {n - 1} forward weights, got shape {a.shape}")
    if np.any(a <= 0.0) or np.any(a >= 1.0):
        raise InvalidParameter("forward weights must lie strictly inside (0, 1)")
    w = np.zeros((n, n))
    w[0, : n - 1] = 1.0 - a
    w[0, n - 1] = 1.0
    for j in range(n - 1):
        w[j + 1, j] = a[j]
    return MixingMatrix(n, w)


def build_ring(n: int) -> MixingMatrix:
    """Directed ring with the out-degree rule: every column holds two halves."""
    if n < 2:
        raise InvalidParameter(f"ring needs n >= 2, got {n}")
    return build_out_degree_matrix(directed_cycle(n))


def build_grid(rows: int, cols: int) -> MixingMatrix:
    """Bidirectional rows x cols grid with the out-degree rule."""
    if rows * cols < 2 or rows < 1 or cols < 1:
        raise InvalidParameter(f"grid needs at least 2 nodes, got {rows}x{cols}")
    n = rows * cols
    edges = set()
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                v = u + 1
                edges.add((u, v))
                edges.add((v, u))
            if r + 1 < rows:
                v = u + cols
                edges.add((u, v))
                edges.add((v, u))
    return build_out_degree_matrix(Digraph(n, frozenset(edges)))


def perturb_weights(W: MixingMatrix, seed: int, strength: float) -> MixingMatrix:
    """Jitter the nonzero weights multiplicatively, then renormalize columns.

    Keeps the sparsity pattern and column-stochasticity while moving the
    equilibrium vector; strength 0 returns the input unchanged.
    """
    if not 0.0 <= strength < 1.0:
        raise InvalidParameter(f"strength must lie in [0, 1), got {strength}")
    if strength == 0.0:
        return W
    rng = np.random.default_rng(seed)
    w = np.array(W.w)
    mask = w > 0.0
    u = rng.uniform(-1.0, 1.0, size=int(mask.sum()))
    w[mask] *= np.exp(u * strength)
    w /= w.sum(axis=0, keepdims=True)
    return MixingMatrix(W.n, w)


def load_edge_list(path, n: int | None = None) -> Digraph:
    """Read a digraph from text lines of the form ``j i`` (j sends to i)."""
    edges = set()
    max_id = -1
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidParameter(f"bad edge line: {line!r}")
            j, i = int(parts[0]), int(parts[1])
            max_id = max(max_id, j, i)
            edges.add((j, i))
    if n is None:
        n = max_id + 1
    return Digraph(n, frozenset(edges))


def save_edge_list(g: Digraph, path) -> None:
    with open(path, "w") as fh:
        for j, i in sorted(g.edges):
            fh.write(f"{j} {i}\n")


def load_matrix_csv(path) -> MixingMatrix:
    """Read a mixing matrix from CSV; row i lists the weights node i receives."""
    w = np.loadtxt(path, delimiter=",", ndmin=2)
    return MixingMatrix.from_array(w)


def save_matrix_csv(W: MixingMatrix, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for row in W.w:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
