"""Weighted undirected social graphs with a stubborn/regular node partition.

A graph is stored as a dense symmetric weight matrix plus the set of stubborn
node indices. Normalization derives the row-stochastic interaction matrix P
and its regular/stubborn blocks A and B used by the equilibrium computations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import GraphError, ReachabilityError


@dataclass(frozen=True)
class SocialGraph:
    """Symmetric nonnegative weight matrix with a stubborn-node subset.

    Node ids are dense 0-based integers; ``labels`` keeps the original ids
    from the input file (identity for generated graphs).
    """

    weights: np.ndarray
    stubborn: tuple[int, ...]
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise GraphError("weight matrix must be square")
        if not np.array_equal(W, W.T):
            raise GraphError("weight matrix must be symmetric")
        if np.any(W < 0):
            raise GraphError("edge weights must be nonnegative")
        if np.any(np.diag(W) != 0):
            raise GraphError("self-loops are not allowed")
        stub = tuple(sorted(set(int(i) for i in self.stubborn)))
        if any(i < 0 or i >= W.shape[0] for i in stub):
            raise GraphError("stubborn id out of node range")
        labels = self.labels or tuple(range(W.shape[0]))
        if len(labels) != W.shape[0]:
            raise GraphError("label table length must equal node count")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "stubborn", stub)
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def regular(self) -> tuple[int, ...]:
        stub = set(self.stubborn)
        return tuple(i for i in range(self.n_nodes) if i not in stub)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.weights) // 2)


@dataclass(frozen=True)
class NetworkOperators:
    """Row-stochastic P and its regular/stubborn blocks A = P_RR, B = P_RS."""

    P: np.ndarray
    A: np.ndarray
    B: np.ndarray
    w: np.ndarray
    regular: tuple[int, ...]
    stubborn: tuple[int, ...]
    rho: float

    def __post_init__(self):
        for name in ("P", "A", "B", "w"):
            getattr(self, name).setflags(write=False)

    @property
    def n_regular(self) -> int:
        return len(self.regular)


@dataclass(frozen=True)
class ReachabilityReport:
    ok: bool
    orphan_components: tuple[tuple[int, ...], ...]
    message: str


def validate_reachability(g: SocialGraph) -> ReachabilityReport:
    """Check that every component containing a regular node has a stubborn node."""
    if not g.regular:
        return ReachabilityReport(True, (), "no regular agents (vacuously reachable)")
    adj = (g.weights > 0).astype(np.int8)
    n_comp, comp = connected_components(adj, directed=False)
    stub = set(g.stubborn)
    orphans = []
    for c in range(n_comp):
        members = np.flatnonzero(comp == c)
        if stub.isdisjoint(members) and len(members) > 0:
            orphans.append(tuple(int(i) for i in members))
    if orphans:
        msg = f"{len(orphans)} component(s) contain regular nodes but no stubborn node"
        return ReachabilityReport(False, tuple(orphans), msg)
    return ReachabilityReport(True, (), "every regular node can reach a stubborn node")


def normalize(g: SocialGraph, rho_margin: float = 1e-10) -> NetworkOperators:
    """Derive P = diag(w)^-1 W and the blocks A, B; asserts Schur stability of A."""
    # Spectral radius is imported lazily to avoid a module cycle.
    from .equilibrium import spectral_radius

    report = validate_reachability(g)
    if not report.ok:
        raise ReachabilityError(report.message)
    w = g.weights.sum(axis=1)
    regular = g.regular
    if any(w[i] == 0 for i in regular):
        isolated = [i for i in regular if w[i] == 0]
        raise GraphError(f"isolated regular node(s): {isolated}")
    P = np.zeros_like(g.weights)
    for i in range(g.n_nodes):
        if w[i] > 0:
            P[i] = g.weights[i] / w[i]
        else:
            P[i, i] = 1.0  # isolated stubborn node: absorbing row
    R = list(regular)
    S = list(g.stubborn)
    A = P[np.ix_(R, R)] if R else np.zeros((0, 0))
    B = P[np.ix_(R, S)] if R else np.zeros((0, len(S)))
    rho = spectral_radius(A) if R else 0.0
    if rho >= 1.0 - rho_margin:
        raise ReachabilityError(f"spectral radius of A is {rho:.12f}, expected < 1")
    return NetworkOperators(P=P, A=A, B=B, w=w, regular=tuple(R),
                            stubborn=tuple(S), rho=rho)


def two_hop_graph(g: SocialGraph) -> SocialGraph:
    """Unit-weight graph linking node pairs joined by a length-2 path."""
    adj = (g.weights > 0).astype(np.int8)
    two = (adj @ adj > 0).astype(float)
    np.fill_diagonal(two, 0.0)
    return SocialGraph(weights=two, stubborn=g.stubborn, labels=g.labels)


def _parse_edge_records(stream: TextIO):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i j weight', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            wgt = float(parts[2])
        except ValueError as exc:
            raise GraphError(f"line {lineno}: malformed record {line!r}") from exc
        if i < 0 or j < 0:
            raise GraphError(f"line {lineno}: node ids must be nonnegative")
        if wgt <= 0:
            raise GraphError(f"line {lineno}: weight must be positive")
        yield lineno, i, j, wgt


def load_graph(source: str | Path | TextIO,
               stubborn: Iterable[int]) -> SocialGraph:
    """Read a whitespace/comma separated edge list and build a SocialGraph.

    Records appearing once are mirrored; a pair appearing with two different
    weights is a hard error. Stubborn ids refer to the original node labels.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_graph(fh, stubborn)
    edges: dict[tuple[int, int], float] = {}
    nodes: set[int] = set()
    for lineno, i, j, wgt in _parse_edge_records(source):
        if i == j:
            raise GraphError(f"line {lineno}: self-loop on node {i}")
        key = (min(i, j), max(i, j))
        if key in edges and edges[key] != wgt:
            raise GraphError(
                f"line {lineno}: conflicting duplicate edge {key}: "
                f"{edges[key]} vs {wgt}")
        edges[key] = wgt
        nodes.update(key)
    if not edges:
        raise GraphError("edge list is empty")
    stub_labels = sorted(set(int(s) for s in stubborn))
    if not stub_labels:
        raise GraphError("stubborn set empty")
    missing = [s for s in stub_labels if s not in nodes]
    if missing:
        raise GraphError(f"stubborn id(s) not in node range: {missing}")
    labels = tuple(sorted(nodes))
    index = {lab: k for k, lab in enumerate(labels)}
    W = np.zeros((len(labels), len(labels)))
    for (i, j), wgt in edges.items():
        W[index[i], index[j]] = wgt
        W[index[j], index[i]] = wgt
    g = SocialGraph(weights=W, stubborn=tuple(index[s] for s in stub_labels),
                    labels=labels)
    report = validate_reachability(g)
    if not report.ok:
        raise ReachabilityError(report.message)
    return g


def save_graph(g: SocialGraph, edges_path: str | Path,
               stubborn_path: str | Path | None = None) -> None:
    """Write the canonical edge-list (original labels) and stubborn file."""
    lines = ["# i j w"]
    for i in range(g.n_nodes):
        for j in range(i + 1, g.n_nodes):
            if g.weights[i, j] > 0:
                lines.append(f"{g.labels[i]} {g.labels[j]} {g.weights[i, j]:.12g}")
    Path(edges_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if stubborn_path is not None:
        stub = "\n".join(str(g.labels[i]) for i in g.stubborn)
        Path(stubborn_path).write_text(stub + "\n", encoding="utf-8")


def graph_to_text(g: SocialGraph) -> str:
    buf = io.StringIO()
    for i in range(g.n_nodes):
        for j in range(i + 1, g.n_nodes):
            if g.weights[i, j] > 0:
                buf.write(f"{g.labels[i]} {g.labels[j]} {g.weights[i, j]:.12g}\n")
    return buf.getvalue()


def generate_watts_strogatz(n: int, k: int, beta: float, seed: int,
                            n_stubborn: int) -> SocialGraph:
    """Connected Watts-Strogatz small world with unit weights.

    Stubborn nodes are drawn uniformly without replacement from a generator
    seeded with the same seed, so the instance is fully reproducible.
    """
    if not (n > k >= 2):
        raise GraphError(f"require n > k >= 2, got n={n}, k={k}")
    if k % 2 != 0:
        raise GraphError("k must be even (ring-lattice half-degree)")
    if not (0.0 <= beta <= 1.0):
        raise GraphError("beta must lie in [0, 1]")
    if not (0 <= n_stubborn < n):
        raise GraphError("require 0 <= n_stubborn < n")
    gnx = nx.connected_watts_strogatz_graph(n, k, beta, tries=1000, seed=int(seed))
    W = np.zeros((n, n))
    for i, j in gnx.edges:
        W[i, j] = W[j, i] = 1.0
    rng = np.random.default_rng(seed)
    stub = tuple(sorted(int(i) for i in rng.choice(n, size=n_stubborn, replace=False)))
    return SocialGraph(weights=W, stubborn=stub)


def generate_cycle(n: int, n_stubborn: int) -> SocialGraph:
    """Ring of n nodes with unit weights; the first n_stubborn ids are stubborn."""
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    if n_stubborn >= n:
        raise GraphError("require n_stubborn < n")
    W = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        W[i, j] = W[j, i] = 1.0
    return SocialGraph(weights=W, stubborn=tuple(range(n_stubborn)))


def generate_random_reachable(n: int, n_stubborn: int, seed: int,
                              extra_edges: int | None = None,
                              weight_low: float = 0.5,
                              weight_high: float = 2.0) -> SocialGraph:
    """Random connected weighted graph (spanning tree plus extra edges).

    Test/validation instance provisioning; connectivity plus a nonempty
    stubborn set guarantees global reachability.
    """
    if n < 2 or not (1 <= n_stubborn < n):
        raise GraphError("need n >= 2 and 1 <= n_stubborn < n")
    rng = np.random.default_rng(seed)
    W = np.zeros((n, n))
    for i in range(1, n):
        j = int(rng.integers(0, i))
        W[i, j] = W[j, i] = rng.uniform(weight_low, weight_high)
    m_extra = n // 2 if extra_edges is None else extra_edges
    for _ in range(m_extra):
        i, j = rng.integers(0, n, size=2)
        if i != j and W[i, j] == 0:
            W[i, j] = W[j, i] = rng.uniform(weight_low, weight_high)
    stub = tuple(sorted(int(i) for i in rng.choice(n, size=n_stubborn, replace=False)))
    return SocialGraph(weights=W, stubborn=stub)


def generate_random_regular(n: int, degree: int, seed: int,
                            n_stubborn: int) -> SocialGraph:
    """Random connected degree-regular graph with unit weights.

    On these instances A = W_RR / degree is symmetric, which is the regime
    where the closed-form covariance is exact (with uniform noise).
    """
    if n_stubborn >= n:
        raise GraphError("require n_stubborn < n")
    for attempt in range(100):
        gnx = nx.random_regular_graph(degree, n, seed=int(seed) + attempt * 7919)
        if nx.is_connected(gnx):
            break
    else:
        raise GraphError("failed to draw a connected regular graph")
    W = np.zeros((n, n))
    for i, j in gnx.edges:
        W[i, j] = W[j, i] = 1.0
    rng = np.random.default_rng(seed)
    stub = tuple(sorted(int(i) for i in rng.choice(n, size=n_stubborn, replace=False)))
    return SocialGraph(weights=W, stubborn=stub)
