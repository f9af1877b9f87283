"""Constant-factor approximation pipeline for XOS and submodular rewards.

The pieces, bottom-up:

* :func:`scale_set` shrinks a set to roughly a target value while keeping
  every remaining agent's marginal at least ``delta`` times its marginal in
  the original set.
* :func:`contract_from_estimate` turns a guess ``y_tilde`` of the value the
  cheap agents contribute at the optimum into a candidate set, by pricing
  agents at ``(beta/2) sqrt(c_i * y_tilde)``, taking a (approximate) demand
  set and scaling it down.
* :func:`approx_contract_xos` / :func:`approx_contract_submodular` sweep a
  geometric grid of guesses and keep the best candidate, singletons and the
  empty set included.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .contract import Instance, SolveReport, make_report, principal_utility
from .setfn import (
    INF,
    Number,
    QueryCounter,
    RewardFunction,
    approx_demand_submodular,
    div,
    exact_demand,
    is_exact_number,
    value,
)

DEFAULT_XI = 1.01
SUBMODULAR_BETA = 1.0 - 1.0 / math.e
_G_SLACK = 1e-12


@dataclass(frozen=True)
class ScalingParams:
    psi: Number
    delta: Number

    def __post_init__(self):
        if not (0 < self.delta <= 1):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.psi < 0:
            raise ValueError(f"psi must be nonnegative, got {self.psi}")


@dataclass(frozen=True)
class EstimateParams:
    y_tilde: Number
    A_prime: frozenset
    prices: tuple


@dataclass(frozen=True)
class MainParams:
    xi: float = DEFAULT_XI
    beta: float = 1.0

    def __post_init__(self):
        if not self.xi > 1:
            raise ValueError(f"xi must exceed 1, got {self.xi}")
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")


@dataclass
class ScalingTrace:
    """Intermediate quantities of one :func:`scale_set` run (for tests/diagnostics)."""

    T0: frozenset
    removed: list
    values: list
    deltas: list
    j_star: int
    k_star: int
    t_star: int


def minimal_equal_subset(f: RewardFunction, T: frozenset,
                         counter: QueryCounter | None = None) -> frozenset:
    """Inclusion-minimal ``T0 <= T`` with ``f(T0) == f(T)``.

    Scans agents in ascending index and drops any whose removal keeps the
    value; restarts after each drop until a full pass drops nothing.
    """
    T0 = frozenset(T)
    fT = value(f, T0, counter)
    changed = True
    while changed:
        changed = False
        for i in sorted(T0):
            if value(f, T0 - {i}, counter) >= fT:
                T0 = T0 - {i}
                changed = True
                break
    return T0


def scale_set(f: RewardFunction, T: Iterable[int], params: ScalingParams,
              counter: QueryCounter | None = None, trace: list | None = None) -> frozenset:
    """Find ``U <= T`` with ``(1-delta) psi <= f(U) <= psi + max_{i in T} f({i})``
    and ``f(i | U - i) >= delta * f(i | T - i)`` for all ``i`` in ``U``.

    Requires ``0 <= psi < f(T)`` and ``f`` XOS (or submodular).
    """
    T = frozenset(T)
    psi, delta = params.psi, params.delta
    fT = value(f, T, counter)
    if not psi < fT:
        raise ValueError(f"psi={psi} must be below f(T)={fT}")

    T0 = minimal_equal_subset(f, T, counter)
    f0 = value(f, T0, counter)
    base = {}
    for i in T0:
        base[i] = f0 - value(f, T0 - {i}, counter)
        assert base[i] > 0, "minimal subset has a zero marginal"

    # sets[t] = T_t, vals[t] = f(T_t), deltas[t] = delta_t (t >= 1)
    sets = [T0]
    vals = [f0]
    deltas: list[Number] = [None]
    removed = []
    cur, fcur = T0, f0
    for _ in range(len(T0)):
        best_i, best_r = None, None
        for i in sorted(cur):
            r = div(fcur - value(f, cur - {i}, counter), base[i])
            if best_r is None or r < best_r:
                best_i, best_r = i, r
        nxt = cur - {best_i}
        fnxt = value(f, nxt, counter)
        deltas.append(div(fcur - fnxt, base[best_i]))
        removed.append(best_i)
        sets.append(nxt)
        vals.append(fnxt)
        cur, fcur = nxt, fnxt

    last = len(T0)
    j_star = next(j for j in range(last + 1) if vals[j] <= psi)
    cutoff = (1 - delta) * vals[j_star - 1]
    k_star = next(k for k in range(j_star, last + 1) if vals[k] <= cutoff)
    t_star = j_star
    for t in range(j_star, k_star + 1):
        if deltas[t] > deltas[t_star]:
            t_star = t
    if trace is not None:
        trace.append(ScalingTrace(T0, removed, vals, deltas, j_star, k_star, t_star))
    return sets[t_star - 1]


def cheap_agents(inst: Instance, counter: QueryCounter | None = None) -> frozenset:
    """Agents whose cost is at most half their stand-alone value (0/0 counts as 0)."""
    out = []
    for i in range(inst.n):
        c, v = inst.costs[i], value(inst.f, {i}, counter)
        if v == 0:
            if c == 0:
                out.append(i)
        elif 2 * c <= v:
            out.append(i)
    return frozenset(out)


def _sqrt(x: Number) -> Number:
    if is_exact_number(x) and x >= 0:
        x = Fraction(x)
        rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if rn * rn == x.numerator and rd * rd == x.denominator:
            return Fraction(rn, rd)
    return math.sqrt(x)


def estimate_params(inst: Instance, y_tilde: Number, beta: Number = 1,
                    A_prime: frozenset | None = None,
                    counter: QueryCounter | None = None) -> EstimateParams:
    if A_prime is None:
        A_prime = cheap_agents(inst, counter)
    prices = tuple(div(beta * _sqrt(inst.costs[i] * y_tilde), 2) if i in A_prime else INF
                   for i in range(inst.n))
    return EstimateParams(y_tilde, frozenset(A_prime), prices)


def contract_from_estimate(inst: Instance, params: EstimateParams, beta: Number = 1,
                           counter: QueryCounter | None = None,
                           log: dict | None = None) -> frozenset:
    """Candidate set for an estimate of the cheap agents' optimal value.

    ``beta == 1`` uses an exact demand query; ``beta < 1`` uses the
    value-query approximate demand and then prunes agents whose marginal
    falls below their price.  Returns the empty set when the scaling
    target is not strictly between 0 and ``f(T)``.
    """
    f = inst.f
    A_prime = params.A_prime
    if not A_prime:
        return frozenset()
    top = max(value(f, {i}, counter) for i in A_prime)
    psi = div(beta * beta * params.y_tilde, 32) - top
    prices = params.prices
    if beta == 1:
        T = exact_demand(f, prices, counter)
    else:
        T = approx_demand_submodular(f, prices, counter)
        pruned = True
        while pruned:
            pruned = False
            for i in sorted(T):
                if value(f, T, counter) - value(f, T - {i}, counter) < prices[i]:
                    T = T - {i}
                    pruned = True
                    break
    fT = value(f, T, counter)
    U: frozenset = frozenset()
    if 0 < psi < fT:
        U = scale_set(f, T, ScalingParams(psi, Fraction(1, 2)), counter)
    if log is not None:
        log.update(psi=psi, T_size=len(T), U_size=len(U))
    return U


def grid_size(n: int, xi: float) -> int:
    """Largest grid index ``ceil(log_xi(2n))``."""
    return math.ceil(math.log(2 * n) / math.log(xi))


def _better(g_new: Number, g_best: Number) -> bool:
    if is_exact_number(g_new) and is_exact_number(g_best):
        return g_new > g_best
    return g_new > g_best + _G_SLACK


def _grid_search(inst: Instance, params: MainParams, algorithm: str) -> SolveReport:
    start = time.perf_counter()
    counter = QueryCounter()
    f = inst.f
    pool: list[tuple[str, frozenset]] = [("empty", frozenset())]
    pool += [(f"single:{i}", frozenset({i})) for i in range(inst.n)]
    log = []
    A_prime = cheap_agents(inst, counter)
    top = max((value(f, {i}, counter) for i in A_prime), default=0)
    if A_prime and top > 0:
        x = div(top, 2)
        for j in range(grid_size(inst.n, params.xi) + 1):
            x_j = x * params.xi ** j
            est = estimate_params(inst, x_j, params.beta, A_prime, counter)
            entry = {"j": j, "x_j": x_j}
            U = contract_from_estimate(inst, est, params.beta, counter, entry)
            pool.append((f"grid:{j}", U))
            entry["g_U"] = principal_utility(inst, U, counter)
            log.append(entry)

    best_S, best_g = pool[0][1], principal_utility(inst, pool[0][1], counter)
    for _, S in pool[1:]:
        g = principal_utility(inst, S, counter)
        if _better(g, best_g):
            best_S, best_g = S, g
    report = make_report(inst, algorithm, best_S, counter, log)
    report.wall_time = time.perf_counter() - start
    return report


def approx_contract_xos(inst: Instance, params: MainParams | None = None) -> SolveReport:
    """Grid over estimates with exact demand queries (XOS rewards)."""
    params = params or MainParams()
    if params.beta != 1:
        raise ValueError("the XOS pipeline uses exact demand; beta must be 1")
    return _grid_search(inst, params, "xos")


def approx_contract_submodular(inst: Instance, params: MainParams | None = None) -> SolveReport:
    """Grid over estimates with value queries only (submodular rewards)."""
    params = params or MainParams(beta=SUBMODULAR_BETA)
    if params.beta == 1:
        raise ValueError("the value-query pipeline needs beta < 1")
    return _grid_search(inst, params, "submod")


def xos_bound(xi: float = DEFAULT_XI) -> float:
    return 1.0 / (256 * xi + 2)


def submodular_bound(xi: float = DEFAULT_XI, beta: float = SUBMODULAR_BETA) -> float:
    return beta ** 2 / (256 * xi + 2 * beta ** 2)
