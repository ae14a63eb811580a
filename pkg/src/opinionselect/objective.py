"""Variance-reduction objective F, residual variance G and the linear estimator.

All quantities are carried at the unnormalized scale F(K) = (C1)_K' (C_KK)^-1
(C1)_K; dividing by |R|^2 recovers the probabilistic variances but changes no
argmax. F and G always satisfy F(K) + G(K) = 1'C1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError


def _check_set(K: Sequence[int], n: int) -> list[int]:
    members = [int(i) for i in K]
    if len(set(members)) != len(members):
        raise ValueError("observation set contains duplicates")
    if any(i < 0 or i >= n for i in members):
        raise ValueError("observation set member out of range")
    return members


def _spd_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return cho_solve(cho_factor(M), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("principal submatrix not positive definite") from exc


@dataclass(frozen=True)
class ObjectiveReport:
    f_raw: float
    g_raw: float
    var_y_raw: float
    residual_fraction: float


def var_y(C: np.ndarray) -> float:
    """Total (unnormalized) variance of the mean opinion: 1'C1."""
    ones = np.ones(C.shape[0])
    return float(ones @ C @ ones)


def var_y_normalized(C: np.ndarray) -> float:
    n = C.shape[0]
    return var_y(C) / (n * n)


def f_score(C: np.ndarray, K: Sequence[int]) -> float:
    """Variance reduction from observing K: (C1)_K' (C_KK)^-1 (C1)_K."""
    K = _check_set(K, C.shape[0])
    if not K:
        return 0.0
    v = (C @ np.ones(C.shape[0]))[K]
    CKK = C[np.ix_(K, K)]
    return float(v @ _spd_solve(CKK, v))


def g_score(H: np.ndarray, K: Sequence[int]) -> float:
    """Residual variance 1'_{-K} (H_{-K,-K})^-1 1_{-K}."""
    n = H.shape[0]
    K = set(_check_set(K, n))
    comp = [i for i in range(n) if i not in K]
    if not comp:
        return 0.0
    Hcc = H[np.ix_(comp, comp)]
    ones = np.ones(len(comp))
    return float(ones @ _spd_solve(Hcc, ones))


def report(C: np.ndarray, H: np.ndarray, K: Sequence[int]) -> ObjectiveReport:
    vy = var_y(C)
    f = f_score(C, K)
    g = g_score(H, K)
    return ObjectiveReport(f_raw=f, g_raw=g, var_y_raw=vy,
                           residual_fraction=g / vy if vy > 0 else 0.0)


def estimator_coefficients(C: np.ndarray, K: Sequence[int],
                           mu: np.ndarray | None = None
                           ) -> tuple[np.ndarray, float]:
    """Optimal linear predictor of the mean opinion from the observations X_K.

    Returns (alpha_K, intercept) with alpha solving C_KK a = (C1/n)_K and the
    intercept chosen so the predictor is unbiased when the mean mu is nonzero.
    """
    n = C.shape[0]
    K = _check_set(K, n)
    if mu is None:
        mu = np.zeros(n)
    ybar = float(np.sum(mu)) / n
    if not K:
        return np.zeros(0), ybar
    rhs = (C @ np.ones(n) / n)[K]
    alpha = _spd_solve(C[np.ix_(K, K)], rhs)
    intercept = ybar - float(alpha @ np.asarray(mu)[K])
    return alpha, intercept


def residual_curve(C: np.ndarray, H: np.ndarray,
                   sets: Sequence[Sequence[int]]) -> list[tuple[int, float]]:
    """Per-set (|K|, residual fraction) pairs for plot emission."""
    vy = var_y(C)
    out = []
    for K in sets:
        g = g_score(H, K)
        out.append((len(list(K)), g / vy if vy > 0 else 0.0))
    return out
