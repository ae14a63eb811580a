"""Exact and greedy observation-subset selection.

The greedy path never re-inverts: it maintains M = (C_KK)^-1 and extends it
one row/column at a time through the Schur complement, so each marginal-gain
evaluation costs O(|K|^2). Exact selection enumerates all subsets and doubles
as the oracle for the greedy guarantee and for the incremental algebra.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, NumericalError
from .objective import f_score, g_score, var_y

SCHUR_GUARD = 1e-12


@dataclass
class GreedyState:
    """Incrementally maintained state of one greedy run."""

    chosen: list[int] = field(default_factory=list)
    M: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    v: np.ndarray = field(default_factory=lambda: np.zeros(0))  # (C1)_K
    f_current: float = 0.0
    eval_count: int = 0


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple[int, ...]
    gains: tuple[float, ...]
    f_values: tuple[float, ...]   # per prefix, f_values[0] = F(empty) = 0
    g_values: tuple[float, ...]
    var_y: float
    eval_count: int
    wall_time: float
    method: str


def _gain_parts(state: GreedyState, C: np.ndarray, i: int, c1: np.ndarray):
    b = C[state.chosen, i]
    schur = float(C[i, i] - b @ (state.M @ b))
    z = float(c1[i])
    num = z - float(b @ (state.M @ state.v))
    return b, schur, num


def marginal_gain(state: GreedyState, C: np.ndarray, i: int,
                  c1: np.ndarray | None = None) -> float:
    """F(K + i) - F(K) without touching the state. Raises on degenerate Schur."""
    if i in state.chosen:
        raise ValueError(f"candidate {i} already chosen")
    if c1 is None:
        c1 = C @ np.ones(C.shape[0])
    _, schur, num = _gain_parts(state, C, i, c1)
    if schur <= SCHUR_GUARD * C[i, i]:
        raise NumericalError(
            f"degenerate Schur complement {schur:.3e} for candidate {i}")
    return num * num / schur


def extend_inverse(state: GreedyState, C: np.ndarray, i: int,
                   c1: np.ndarray | None = None) -> GreedyState:
    """Return the state with node i inserted; M grows by the block formula."""
    if c1 is None:
        c1 = C @ np.ones(C.shape[0])
    b, schur, num = _gain_parts(state, C, i, c1)
    if schur <= SCHUR_GUARD * C[i, i]:
        raise NumericalError(
            f"degenerate Schur complement {schur:.3e} for node {i}")
    k = len(state.chosen)
    Mb = state.M @ b
    M_new = np.empty((k + 1, k + 1))
    M_new[:k, :k] = state.M + np.outer(Mb, Mb) / schur
    M_new[:k, k] = -Mb / schur
    M_new[k, :k] = -Mb / schur
    M_new[k, k] = 1.0 / schur
    return GreedyState(chosen=state.chosen + [int(i)],
                       M=M_new,
                       v=np.append(state.v, c1[i]),
                       f_current=state.f_current + num * num / schur,
                       eval_count=state.eval_count)


def greedy_select(C: np.ndarray, s: int) -> SelectionResult:
    """s rounds of best-marginal-gain insertion with deterministic tie-breaks."""
    n = C.shape[0]
    if not (0 <= s <= n):
        raise ValueError(f"cardinality s={s} out of range for {n} regular nodes")
    t0 = time.perf_counter()
    c1 = C @ np.ones(n)
    vy = var_y(C)
    state = GreedyState()
    gains: list[float] = []
    f_values = [0.0]
    for _ in range(s):
        best_i, best_gain = -1, -np.inf
        for i in range(n):
            if i in state.chosen:
                continue
            state.eval_count += 1
            try:
                gain = marginal_gain(state, C, i, c1)
            except NumericalError as exc:
                warnings.warn(f"skipping candidate {i}: {exc}")
                continue
            if gain > best_gain:
                best_gain, best_i = gain, i
        if best_i < 0:
            raise NumericalError("all candidates degenerate in this round")
        state = extend_inverse(state, C, best_i, c1)
        gains.append(best_gain)
        f_values.append(state.f_current)
    wall = time.perf_counter() - t0
    return SelectionResult(chosen=tuple(state.chosen), gains=tuple(gains),
                           f_values=tuple(f_values),
                           g_values=tuple(vy - f for f in f_values),
                           var_y=vy, eval_count=state.eval_count,
                           wall_time=wall, method="greedy")


def exact_select(C: np.ndarray, s: int, max_subsets: int = 10 ** 7,
                 max_nodes: int = 25) -> SelectionResult:
    """Enumerate all size-s subsets; ties go to the lexicographically smallest."""
    n = C.shape[0]
    if not (0 <= s <= n):
        raise ValueError(f"cardinality s={s} out of range for {n} regular nodes")
    n_subsets = math.comb(n, s)
    if n > max_nodes and n_subsets > max_subsets:
        raise BudgetExceededError(
            f"C({n},{s}) = {n_subsets} subsets exceeds the budget of {max_subsets}")
    t0 = time.perf_counter()
    vy = var_y(C)
    best_K: tuple[int, ...] = ()
    best_f = 0.0 if s == 0 else -np.inf
    count = 0
    for K in itertools.combinations(range(n), s):
        count += 1
        f = f_score(C, K)
        if f > best_f:
            best_f, best_K = f, K
    f_values = [f_score(C, best_K[:t]) for t in range(s + 1)]
    wall = time.perf_counter() - t0
    return SelectionResult(chosen=best_K,
                           gains=tuple(np.diff(f_values)),
                           f_values=tuple(f_values),
                           g_values=tuple(vy - f for f in f_values),
                           var_y=vy, eval_count=count,
                           wall_time=wall, method="exact")


@dataclass(frozen=True)
class AuditReport:
    n_checks: int
    min_slack_f: float
    min_slack_g: float
    violations_f: int
    violations_g: int
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return self.violations_f == 0 and self.violations_g == 0


def _all_subset_values(C: np.ndarray, H: np.ndarray):
    n = C.shape[0]
    F = np.empty(1 << n)
    G = np.empty(1 << n)
    for mask in range(1 << n):
        K = [i for i in range(n) if mask >> i & 1]
        F[mask] = f_score(C, K)
        G[mask] = g_score(H, K)
    return F, G


def submodularity_audit(C: np.ndarray, H: np.ndarray | None = None,
                        budget: int = 8, n_samples: int = 2000,
                        seed: int = 0, tol: float = 1e-9) -> AuditReport:
    """Check diminishing returns of F (and increasing returns of G).

    Exhaustive over all triples A <= B, k not in B when the instance fits the
    budget; otherwise a seeded random sample of triples. Slack below
    -tol*(1 + |F|) counts as a violation.
    """
    from .equilibrium import precision

    n = C.shape[0]
    if H is None:
        H = precision(C)
    if n <= budget:
        F, G = _all_subset_values(C, H)
        bits = 1 << np.arange(n)
        min_f, min_g = np.inf, np.inf
        viol_f = viol_g = checks = 0
        for maskB in range(1 << n):
            outside = np.array([k for k in range(n) if not maskB >> k & 1],
                               dtype=int)
            if outside.size == 0:
                continue
            kbits = bits[outside]
            # enumerate submasks A of B (including A == B)
            maskA = maskB
            while True:
                dF = (F[maskA | kbits] - F[maskA]) - (F[maskB | kbits] - F[maskB])
                dG = (G[maskB | kbits] - G[maskB]) - (G[maskA | kbits] - G[maskA])
                scale_f = tol * (1.0 + np.abs(F[maskB | kbits]))
                scale_g = tol * (1.0 + np.abs(G[maskB | kbits]))
                viol_f += int(np.sum(dF < -scale_f))
                viol_g += int(np.sum(dG < -scale_g))
                min_f = min(min_f, float(dF.min()))
                min_g = min(min_g, float(dG.min()))
                checks += outside.size
                if maskA == 0:
                    break
                maskA = (maskA - 1) & maskB
        return AuditReport(n_checks=checks, min_slack_f=min_f, min_slack_g=min_g,
                           violations_f=viol_f, violations_g=viol_g,
                           exhaustive=True)
    rng = np.random.default_rng(seed)
    min_f, min_g = np.inf, np.inf
    viol_f = viol_g = 0
    for _ in range(n_samples):
        picks = rng.random(n)
        B = [i for i in range(n) if picks[i] < 0.5]
        if len(B) == n:
            continue
        A = [i for i in B if rng.random() < 0.5]
        k = int(rng.choice([i for i in range(n) if i not in B]))
        dF = (f_score(C, A + [k]) - f_score(C, A)) \
            - (f_score(C, B + [k]) - f_score(C, B))
        dG = (g_score(H, B + [k]) - g_score(H, B)) \
            - (g_score(H, A + [k]) - g_score(H, A))
        if dF < -tol * (1.0 + abs(f_score(C, B + [k]))):
            viol_f += 1
        if dG < -tol * (1.0 + abs(g_score(H, B + [k]))):
            viol_g += 1
        min_f = min(min_f, dF)
        min_g = min(min_g, dG)
    return AuditReport(n_checks=n_samples, min_slack_f=min_f, min_slack_g=min_g,
                       violations_f=viol_f, violations_g=viol_g, exhaustive=False)


@dataclass(frozen=True)
class GuaranteeReport:
    ratio: float
    f_greedy: float
    f_exact: float
    greedy: SelectionResult
    exact: SelectionResult

    @property
    def ok(self) -> bool:
        return self.ratio >= 1.0 - 1.0 / math.e - 1e-9


def guarantee_check(C: np.ndarray, s: int, **exact_kwargs) -> GuaranteeReport:
    """Compare greedy against brute force and check the (1 - 1/e) bound."""
    greedy = greedy_select(C, s)
    exact = exact_select(C, s, **exact_kwargs)
    f_g, f_e = greedy.f_values[-1], exact.f_values[-1]
    ratio = 1.0 if f_e == 0 else f_g / f_e
    return GuaranteeReport(ratio=ratio, f_greedy=f_g, f_exact=f_e,
                           greedy=greedy, exact=exact)
