"""Tree-structured Gaussian graphical models fitted by greedy edge selection.

With tree (forest) sparsity the Gaussian maximum-likelihood problem is
decomposable: the optimum matches the sample moments on every vertex and
edge, and the log-likelihood splits into per-vertex and per-edge terms.
Edge ``(i, j)`` contributes ``w_ij = -(N/2) log(1 - r_ij**2)`` where ``r``
is the sample correlation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .greedy import greedy_maximize
from .matroids import GraphicMatroid
from .seeding import child_rng
from .sets import SetFunction, mask_to_tuple

LOG_2PI = math.log(2.0 * math.pi)


def _norm_edge(e):
    i, j = int(e[0]), int(e[1])
    if i == j:
        raise DomainError(f"self-loop ({i}, {j})")
    return (i, j) if i < j else (j, i)


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


@dataclass(frozen=True)
class TreeStructure:
    """An acyclic edge set on vertices ``0 .. n_vertices-1``."""

    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(_norm_edge(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        dsu = _DSU(self.n_vertices)
        for i, j in sorted(edges):
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise DomainError(f"edge ({i}, {j}) outside 0..{self.n_vertices - 1}")
            if not dsu.union(i, j):
                raise DomainError(f"edge ({i}, {j}) closes a cycle")

    @classmethod
    def chain(cls, n: int) -> "TreeStructure":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "v"])
        w.writerows(self.sorted_edges())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n_vertices: int) -> "TreeStructure":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(n_vertices, frozenset((int(r["u"]), int(r["v"])) for r in rows))


def random_tree(n: int, seed: int) -> TreeStructure:
    """Join two uniformly chosen components by a uniform endpoint pair until one remains."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rng = child_rng(seed, "random_tree")
    comps = [[v] for v in range(n)]
    edges = []
    while len(comps) > 1:
        a, b = sorted(rng.choice(len(comps), size=2, replace=False))
        u = comps[a][rng.integers(len(comps[a]))]
        v = comps[b][rng.integers(len(comps[b]))]
        edges.append((u, v))
        comps[a] = comps[a] + comps[b]
        del comps[b]
    return TreeStructure(n, frozenset(edges))


def make_tree_model(tree: TreeStructure, seed: int):
    """``(precision, covariance)`` with support on ``tree``.

    Off-diagonal entries are ``+-U[0.2, 0.6]`` on tree edges; the diagonal is
    ``1 + sum |off-diagonal|``, so the precision is diagonally dominant and
    therefore positive definite.
    """
    rng = child_rng(seed, "tree_model")
    n = tree.n_vertices
    prec = np.zeros((n, n))
    for i, j in tree.sorted_edges():
        w = rng.uniform(0.2, 0.6) * rng.choice((-1.0, 1.0))
        prec[i, j] = prec[j, i] = w
    prec[np.diag_indices(n)] = 1.0 + np.abs(prec).sum(axis=1)
    return prec, np.linalg.inv(prec)


def chain_covariance(n: int, rho: float) -> np.ndarray:
    """Unit-variance chain ``0 - 1 - ... - n-1`` with correlation ``rho`` per link."""
    if not -1 < rho < 1:
        raise DomainError("need |rho| < 1")
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :])


class SampleSet:
    """``N`` samples of an ``n``-dimensional vector and their second moments.

    The covariance is ``X^T X / N`` (zero mean assumed) unless ``center`` is set.
    :meth:`exact` builds a set that carries a known covariance and no rows.
    """

    def __init__(self, X, center: bool = False):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DomainError("samples must be a nonempty 2-d array")
        self.X = X
        self.centered = center
        Xc = X - X.mean(axis=0) if center else X
        self._set_cov(Xc.T @ Xc / X.shape[0], X.shape[0])

    def _set_cov(self, cov, N):
        self.cov = np.asarray(cov, dtype=float)
        self.N = int(N)
        d = np.sqrt(np.diag(self.cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            self.corr = self.cov / np.outer(d, d)
        np.fill_diagonal(self.corr, 1.0)

    @classmethod
    def exact(cls, cov, N: int = 1) -> "SampleSet":
        obj = cls.__new__(cls)
        obj.X, obj.centered = None, False
        obj._set_cov(cov, N)
        return obj

    @property
    def n(self) -> int:
        return self.cov.shape[0]

    def to_csv(self) -> str:
        if self.X is None:
            raise DomainError("sample set has no rows")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(self.n)])
        w.writerows([[repr(float(v)) for v in row] for row in self.X])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, center: bool = False) -> "SampleSet":
        rows = list(csv.reader(io.StringIO(text)))
        return cls(np.array(rows[1:], dtype=float), center=center)


def sample_gaussian(cov, N: int, seed: int, center: bool = False) -> SampleSet:
    """``N`` zero-mean draws using the Cholesky factor of ``cov``."""
    cov = np.asarray(cov, dtype=float)
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DomainError("covariance is not positive definite") from None
    z = child_rng(seed, "gaussian").standard_normal((int(N), cov.shape[0]))
    return SampleSet(z @ L.T, center=center)


def complete_edges(n: int) -> list:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _edge_weight(samples: SampleSet, i: int, j: int) -> float:
    r = samples.corr[i, j]
    if not abs(r) < 1:
        raise DomainError(f"degenerate samples: |corr({i}, {j})| = 1")
    return -0.5 * samples.N * math.log1p(-r * r)


def edge_weights(samples: SampleSet, edges=None) -> np.ndarray:
    """``-(N/2) log(1 - r_ij**2)`` for each edge (complete graph by default)."""
    edges = complete_edges(samples.n) if edges is None else edges
    return np.array([_edge_weight(samples, i, j) for i, j in edges])


def forest_loglik(forest, samples: SampleSet) -> float:
    """Maximised Gaussian log-likelihood over precisions with ``forest`` sparsity."""
    edges = forest.edges if isinstance(forest, TreeStructure) else [_norm_edge(e) for e in forest]
    TreeStructure(samples.n, frozenset(edges))  # acyclicity check
    diag = np.diag(samples.cov)
    if np.any(diag <= 0):
        raise DomainError("a sample variance is zero")
    N, n = samples.N, samples.n
    base = -0.5 * N * (n * LOG_2PI + np.log(diag).sum() + n)
    return float(base + sum(_edge_weight(samples, i, j) for i, j in edges))


def fit_precision(tree: TreeStructure, samples: SampleSet) -> np.ndarray:
    """Closed-form MLE precision for the given forest (moment matching on edges)."""
    S = samples.cov
    n = samples.n
    K = np.zeros((n, n))
    deg = np.zeros(n, dtype=int)
    for i, j in tree.sorted_edges():
        idx = [i, j]
        K[np.ix_(idx, idx)] += np.linalg.inv(S[np.ix_(idx, idx)])
        deg[i] += 1
        deg[j] += 1
    K[np.diag_indices(n)] -= (deg - 1) / np.diag(S)
    return K


def gaussian_loglik(precision, samples: SampleSet) -> float:
    """Zero-mean Gaussian log-likelihood of the samples' second moments."""
    sign, logdet = np.linalg.slogdet(precision)
    if sign <= 0:
        raise DomainError("precision is not positive definite")
    N, n = samples.N, samples.n
    return float(0.5 * N * (logdet - np.trace(precision @ samples.cov) - n * LOG_2PI))


def nll(tree: TreeStructure, samples: SampleSet) -> float:
    """Per-sample negative log-likelihood of the fitted forest model."""
    return -forest_loglik(tree, samples) / samples.N


def forest_objective(samples: SampleSet):
    """``(F, M)`` over the edges of the complete graph.

    ``F(S)`` is the log-likelihood gain of the best forest inside ``S``; on
    forests it is the sum of edge weights.  ``M`` is the graphic matroid.
    """
    n = samples.n
    edges = complete_edges(n)
    w = edge_weights(samples, edges)
    order = sorted(range(len(edges)), key=lambda e: (-w[e], e))

    def value(mask):
        dsu = _DSU(n)
        total = 0.0
        for e in order:
            if mask >> e & 1 and dsu.union(*edges[e]):
                total += w[e]
        return total

    return (SetFunction(len(edges), value, name="forest_loglik", takes_mask=True),
            GraphicMatroid(n, edges))


def greedy_tree_fit(samples: SampleSet) -> TreeStructure:
    f, m = forest_objective(samples)
    trace = greedy_maximize(f, m)
    return TreeStructure(samples.n, frozenset(m.edges[e] for e in trace.selected))


def mst_baseline(samples: SampleSet) -> TreeStructure:
    """Maximum spanning tree (Kruskal) on ``-(1/2) log(1 - r**2)``; ties by edge id."""
    n = samples.n
    edges = complete_edges(n)
    w = edge_weights(samples, edges) / samples.N
    dsu = _DSU(n)
    chosen = [edges[e] for e in sorted(range(len(edges)), key=lambda e: (-w[e], e))
              if dsu.union(*edges[e])]
    return TreeStructure(n, frozenset(chosen))


def edge_error(estimated: TreeStructure, truth: TreeStructure) -> int:
    """Number of estimated edges missing from the true tree."""
    if estimated.n_vertices != truth.n_vertices:
        raise DomainError("trees live on different vertex sets")
    return len(estimated.edges - truth.edges)


def ggm_gamma_bound(L: float, U: float) -> float:
    """Submodularity-ratio lower bound ``(L/U)**2`` under eigenvalue bounds ``[L, U]``."""
    if not 0 < L <= U:
        raise DomainError("need 0 < L <= U")
    return (L / U) ** 2


def tree_from_mask(m: GraphicMatroid, mask: int) -> TreeStructure:
    return TreeStructure(m.n_vertices, frozenset(m.edges[e] for e in mask_to_tuple(mask)))
