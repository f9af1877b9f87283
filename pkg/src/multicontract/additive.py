"""Additive rewards: an FPTAS and the PARTITION reduction.

For additive ``f`` every marginal equals the agent's own value, so
``g(S) = (1 - sum_{i in S} c_i / v_i) * v(S)``.  The FPTAS guesses the
largest value ``b`` in the optimal set, rounds values down to multiples of
``(eps / n) * b`` and, for every rounded target ``x``, finds the cheapest
(in cost-to-value ratio) set reaching ``x`` by dynamic programming.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .contract import Instance, SolveReport, make_report, principal_utility
from .setfn import Additive, QueryCounter


@dataclass(frozen=True)
class FptasGrid:
    """Rounding grid for one guess ``b``; all quantities exact."""

    epsilon: Fraction
    b: Fraction
    n: int

    @property
    def delta(self) -> Fraction:
        return self.epsilon / self.n

    @property
    def unit(self) -> Fraction:
        return self.delta * self.b

    @property
    def top(self) -> int:
        # ceil(n / delta)
        return math.ceil(self.n / self.delta)

    def units(self, v) -> int:
        """Rounded-down value of ``v`` in grid units."""
        return math.floor(Fraction(v) / self.unit)


@dataclass
class DpTable:
    """``cost[j, k]``: least ratio sum over subsets of the first ``j`` agents
    whose rounded value reaches ``k`` units; ``take`` holds back-pointers."""

    cost: np.ndarray
    take: np.ndarray
    weights: list

    def recover(self, k: int) -> list[int]:
        """Positions (into ``weights``) of the set achieving ``cost[-1, k]``."""
        out = []
        for j in range(len(self.weights), 0, -1):
            if self.take[j - 1, k]:
                out.append(j - 1)
                k = max(0, k - self.weights[j - 1])
        return sorted(out)


def build_dp(weights: Sequence[int], ratios: Sequence[float], top: int) -> DpTable:
    n = len(weights)
    idx = np.arange(top + 1)
    prev = np.full(top + 1, np.inf)
    prev[0] = 0.0
    rows = [prev]
    take = np.zeros((n, top + 1), dtype=bool)
    for j in range(n):
        with_j = prev[np.maximum(0, idx - weights[j])] + ratios[j]
        take[j] = with_j < prev
        prev = np.where(take[j], with_j, prev)
        rows.append(prev)
    return DpTable(np.vstack(rows), take, list(weights))


def fptas_additive(inst: Instance, epsilon: float) -> SolveReport:
    """(1 - epsilon)-approximate optimal contract for additive rewards."""
    if not isinstance(inst.f, Additive):
        raise TypeError("fptas requires additive reward")
    if not (0 < epsilon < 1):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    start = time.perf_counter()
    counter = QueryCounter()
    v = inst.f.values
    counter.value_queries += inst.n
    # zero-value agents either cannot be incentivized or add nothing
    agents = [i for i in range(inst.n) if v[i] > 0]
    eps = Fraction(epsilon)
    ratios = [float(inst.costs[i] / v[i]) for i in agents]

    best_S: frozenset = frozenset()
    best_g = principal_utility(inst, best_S)
    log = []
    for b in sorted({Fraction(v[i]) for i in agents}):
        grid = FptasGrid(eps, b, inst.n)
        weights = [grid.units(v[i]) for i in agents]
        dp = build_dp(weights, ratios, grid.top)
        final = dp.cost[-1]
        k_range = np.arange(grid.top + 1)
        objective = (1.0 - final) * k_range * float(grid.unit)
        objective[~np.isfinite(final)] = -np.inf
        k = int(np.argmax(objective))
        S = frozenset(agents[p] for p in dp.recover(k))
        g = principal_utility(inst, S, counter)
        log.append({"b": b, "k": k, "x": k * grid.unit, "size": len(S), "g": g})
        if g > best_g:
            best_S, best_g = S, g
    report = make_report(inst, "fptas", best_S, counter, log)
    report.wall_time = time.perf_counter() - start
    return report


def partition_instance(weights: Sequence[int]) -> Instance:
    """Additive instance with ``v_i = w_i`` and ``c_i = w_i**2 / W``.

    The weights split into two equal halves iff the optimal utility is ``W/4``.
    """
    ws = list(weights)
    if not ws:
        raise ValueError("need at least one weight")
    if any(not isinstance(w, int) or isinstance(w, bool) or w <= 0 for w in ws):
        raise ValueError("weights must be positive integers")
    W = sum(ws)
    return Instance(Additive(tuple(ws)), tuple(Fraction(w * w, W) for w in ws),
                    {"family": "partition", "weights": ws})
