"""Node scoring: single-node variance reduction, eta, Bonacich, intercentrality.

The eta score of the regular-block operator coincides with the Ballester-style
intercentrality computed on the weighted 2-hop operator A^2 with attenuation 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import kendalltau

from .errors import NumericalError
from .equilibrium import spectral_radius

MEASURES = ("var_reduction", "eta", "bonacich", "intercentrality")


@dataclass(frozen=True)
class NodeScores:
    scores: np.ndarray
    measure: str

    @property
    def normalized(self) -> np.ndarray:
        m = float(np.max(self.scores))
        return self.scores / m if m > 0 else np.zeros_like(self.scores)

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.scores))


def var_reduction_scores(C: np.ndarray) -> NodeScores:
    """Per-node F({k}) = (C1)_k^2 / C_kk."""
    v = C @ np.ones(C.shape[0])
    return NodeScores(scores=v * v / np.diag(C), measure="var_reduction")


def eta_scores(A: np.ndarray) -> NodeScores:
    """eta_k = ((I - A^2)^{-1} 1)_k^2 / ((I - A^2)^{-1})_kk."""
    n = A.shape[0]
    try:
        M = np.linalg.solve(np.eye(n) - A @ A, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular (I - A^2)") from exc
    b = M @ np.ones(n)
    return NodeScores(scores=b * b / np.diag(M), measure="eta")


def bonacich(G: np.ndarray, a: float) -> NodeScores:
    """Walk-counting centrality b = (I - aG)^{-1} 1."""
    n = G.shape[0]
    if a != 0 and spectral_radius(np.abs(a) * np.asarray(G, float)) >= 1.0:
        raise NumericalError("attenuation too large: rho(aG) >= 1")
    b = np.linalg.solve(np.eye(n) - a * G, np.ones(n))
    return NodeScores(scores=b, measure="bonacich")


def intercentrality(G: np.ndarray, a: float) -> NodeScores:
    """Key-player score c_k = b_k^2 / M_kk with M = (I - aG)^{-1}."""
    n = G.shape[0]
    if a != 0 and spectral_radius(np.abs(a) * np.asarray(G, float)) >= 1.0:
        raise NumericalError("attenuation too large: rho(aG) >= 1")
    M = np.linalg.solve(np.eye(n) - a * G, np.eye(n))
    b = M @ np.ones(n)
    return NodeScores(scores=b * b / np.diag(M), measure="intercentrality")


@dataclass(frozen=True)
class RankingReport:
    measures: tuple[str, ...]
    normalized: np.ndarray              # measures x nodes
    argmax: dict[str, int]
    kendall_tau: dict[tuple[str, str], float]


def ranking_report(scores: list[NodeScores]) -> RankingReport:
    """Side-by-side normalized scores, per-measure argmax, pairwise Kendall tau."""
    sizes = {len(s.scores) for s in scores}
    if len(sizes) != 1:
        raise ValueError("score vectors cover different node sets")
    table = np.vstack([s.normalized for s in scores])
    taus = {}
    for s1, s2 in combinations(scores, 2):
        tau, _ = kendalltau(s1.scores, s2.scores)
        taus[(s1.measure, s2.measure)] = float(tau)
    return RankingReport(measures=tuple(s.measure for s in scores),
                         normalized=table,
                         argmax={s.measure: s.argmax for s in scores},
                         kendall_tau=taus)
