"""Equilibrium mean and covariance of the noisy averaging dynamics.

The covariance is defined by the discrete-time Lyapunov equation
C = A C A' + Sigma, solved here with a doubling fixed-point iteration.
The textbook shortcut C = Sigma (I - A^2)^{-1} is kept as a fast path but is
only trusted when it is both symmetric and an actual solution of the Lyapunov
equation; on graphs with heterogeneous degrees it generally is not, even when
it happens to be symmetric (see README notes on the closed-form regime).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError
from .graph import NetworkOperators

DEFAULT_LYAPUNOV_TOL = 1e-12
DEFAULT_SYMMETRY_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class NoiseModel:
    """Per-regular-agent noise variances (diagonal of Sigma)."""

    sigma2: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=float)
        if s.ndim != 1:
            raise ValueError("sigma2 must be a vector")
        if np.any(s <= 0):
            raise ValueError("all noise variances must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "sigma2", s)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "NoiseModel":
        return cls(np.full(n, float(value)))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.sigma2)


@dataclass(frozen=True)
class ClosedFormResult:
    """Outcome of the fast-path covariance, with its acceptance diagnostics."""

    covariance: np.ndarray      # symmetrized candidate
    candidate: np.ndarray       # raw Sigma (I - A^2)^{-1}, possibly asymmetric
    asymmetry: float            # ||cand - cand'||_F / ||cand||_F
    lyapunov_residual: float    # residual of the symmetrized candidate
    symmetric: bool
    accepted: bool


@dataclass(frozen=True)
class EquilibriumMoments:
    mu: np.ndarray
    C: np.ndarray
    H: np.ndarray
    rho: float
    method_tag: str  # "lyapunov" or "closed-form"


def spectral_radius(A: np.ndarray, tol: float = 1e-10,
                    max_iter: int = 5000) -> float:
    """Dominant eigenvalue modulus via power iteration, eigensolve fallback."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return 0.0
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        y = A @ x
        lam_new = float(np.linalg.norm(y))
        if lam_new < 1e-300:
            return 0.0
        x = y / lam_new
        if abs(lam_new - lam) <= tol * max(1.0, lam_new):
            return lam_new
        lam = lam_new
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def mean(ops: NetworkOperators, u: np.ndarray) -> np.ndarray:
    """Equilibrium mean of the regular agents: solve (I - A) mu = B u."""
    u = np.asarray(u, dtype=float)
    if u.shape != (len(ops.stubborn),):
        raise ValueError("u must have one entry per stubborn node")
    n = ops.A.shape[0]
    try:
        return np.linalg.solve(np.eye(n) - ops.A, ops.B @ u)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular (I - A): reachability violated") from exc


def covariance_lyapunov(A: np.ndarray, noise: NoiseModel,
                        tol: float = DEFAULT_LYAPUNOV_TOL,
                        max_iter: int = 200) -> np.ndarray:
    """Solve C = A C A' + Sigma by squaring-doubling; output is symmetrized."""
    A = np.asarray(A, dtype=float)
    C = np.diag(noise.sigma2).astype(float)
    Ak = A.copy()
    for _ in range(max_iter):
        inc = Ak @ C @ Ak.T
        C = C + inc
        if np.linalg.norm(inc) <= tol * np.linalg.norm(C):
            return (C + C.T) / 2.0
        Ak = Ak @ Ak
    raise NumericalError(
        "Lyapunov doubling did not converge; spectral radius of A is likely ~1")


def covariance_closed_form(A: np.ndarray, noise: NoiseModel,
                           sym_tol: float = DEFAULT_SYMMETRY_TOL,
                           residual_tol: float = DEFAULT_RESIDUAL_TOL,
                           ) -> ClosedFormResult:
    """Fast path Sigma (I - A^2)^{-1}, accepted only when provably consistent.

    Acceptance requires the candidate to be symmetric (relative asymmetry
    below ``sym_tol``) and, after symmetrization, to satisfy the Lyapunov
    equation (relative residual below ``residual_tol``). Symmetry alone is
    not sufficient: with sigma_i^2 proportional to the degree w_i the
    candidate is exactly symmetric yet differs from the true covariance
    whenever A is not symmetric.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    Sigma = np.diag(noise.sigma2)
    M = np.eye(n) - A @ A
    try:
        candidate = np.linalg.solve(M.T, Sigma).T  # Sigma (I - A^2)^{-1}
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular (I - A^2)") from exc
    norm = np.linalg.norm(candidate)
    asym = float(np.linalg.norm(candidate - candidate.T) / norm) if norm else 0.0
    sym = asym <= sym_tol
    C = (candidate + candidate.T) / 2.0
    residual = float(np.linalg.norm(C - A @ C @ A.T - Sigma)
                     / max(np.linalg.norm(C), 1e-300))
    return ClosedFormResult(covariance=C, candidate=candidate, asymmetry=asym,
                            lyapunov_residual=residual, symmetric=sym,
                            accepted=sym and residual <= residual_tol)


def precision(C: np.ndarray) -> np.ndarray:
    """H = C^{-1} via Cholesky; raises if C is not numerically PD."""
    C = np.asarray(C, dtype=float)
    try:
        factor = cho_factor(C)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("covariance is not positive definite") from exc
    H = cho_solve(factor, np.eye(C.shape[0]))
    return (H + H.T) / 2.0


def precision_direct(A: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Direct form (I - A^2) Sigma^{-1}; valid when the closed form is accepted."""
    A = np.asarray(A, dtype=float)
    return (np.eye(A.shape[0]) - A @ A) @ np.diag(1.0 / noise.sigma2)


def moments(ops: NetworkOperators, noise: NoiseModel, u: np.ndarray,
            lyapunov_tol: float = DEFAULT_LYAPUNOV_TOL,
            sym_tol: float = DEFAULT_SYMMETRY_TOL,
            prefer_closed_form: bool = True) -> EquilibriumMoments:
    """Full equilibrium moments; uses the closed form only when accepted."""
    if len(noise.sigma2) != ops.n_regular:
        raise ValueError("noise model size must equal the number of regular nodes")
    mu = mean(ops, u)
    method = "lyapunov"
    C = None
    if prefer_closed_form:
        cf = covariance_closed_form(ops.A, noise, sym_tol=sym_tol)
        if cf.accepted:
            C = cf.covariance
            method = "closed-form"
    if C is None:
        C = covariance_lyapunov(ops.A, noise, tol=lyapunov_tol)
    H = precision(C)
    return EquilibriumMoments(mu=mu, C=C, H=H, rho=ops.rho, method_tag=method)
