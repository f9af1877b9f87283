"""Principal-agent layer: utility ``g``, incentive shares and equilibrium checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .setfn import (
    div,
    Number,
    QueryCounter,
    RewardFunction,
    is_exact_number,
    marginal,
    value,
)

NEG_INF = -math.inf
EQ_RTOL = 1e-9


@dataclass(frozen=True)
class Instance:
    """Agent costs plus a reward function; ``meta`` is free-form provenance."""

    f: RewardFunction
    costs: tuple
    meta: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if len(self.costs) != self.f.n:
            raise ValueError(f"{len(self.costs)} costs for {self.f.n} agents")
        if any(not (c >= 0) for c in self.costs):
            raise ValueError("costs must be nonnegative")

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def exact(self) -> bool:
        return self.f.exact and all(is_exact_number(c) for c in self.costs)


@dataclass(frozen=True)
class Contract:
    alpha: tuple
    S: frozenset
    feasible: bool = True


def _ratio(c: Number, m: Number) -> Number:
    # 0/0 -> 0, c/0 -> +inf for c > 0
    if m == 0:
        return 0 if c == 0 else math.inf
    return div(c, m)


def principal_utility(inst: Instance, S: Iterable[int],
                      counter: QueryCounter | None = None) -> Number:
    """``g(S) = (1 - sum_i c_i / f(i | S - i)) * f(S)``.

    A positive-cost agent with zero marginal makes ``S`` unincentivizable;
    ``g`` is then ``-inf`` regardless of ``f(S)``.
    """
    S = frozenset(S)
    if not S:
        return value(inst.f, S, counter) * 0
    fS = value(inst.f, S, counter)
    share: Number = 0
    for i in sorted(S):
        r = _ratio(inst.costs[i], fS - value(inst.f, S - {i}, counter))
        if r == math.inf:
            return NEG_INF
        share = share + r
    return (1 - share) * fS


def incentive_alphas(inst: Instance, S: Iterable[int],
                     counter: QueryCounter | None = None) -> Contract:
    S = frozenset(S)
    alpha: list[Number] = [0] * inst.n
    feasible = True
    for i in sorted(S):
        alpha[i] = _ratio(inst.costs[i], marginal(inst.f, i, S, counter))
        if alpha[i] == math.inf:
            feasible = False
    return Contract(tuple(alpha), S, feasible)


def _geq(lhs: Number, rhs: Number, exact: bool) -> bool:
    if exact:
        return lhs >= rhs
    return lhs >= rhs - EQ_RTOL * max(1.0, abs(lhs), abs(rhs))


def is_equilibrium(inst: Instance, con: Contract) -> bool:
    """Check that ``con.alpha`` makes ``con.S`` a pure Nash equilibrium."""
    f, S, alpha = inst.f, con.S, con.alpha
    if any(a == math.inf for a in alpha):
        return False
    exact = inst.exact and all(is_exact_number(a) for a in alpha)
    fS = value(f, S)
    for i in range(inst.n):
        a, c = alpha[i], inst.costs[i]
        if i in S:
            ok = _geq(a * fS - c, a * value(f, S - {i}), exact)
        else:
            ok = _geq(a * fS, a * value(f, S | {i}) - c, exact)
        if not ok:
            return False
    return True


def best_single_agent(inst: Instance, counter: QueryCounter | None = None) -> tuple[frozenset, Number]:
    """Best of the empty set and all singletons under ``g``; earliest wins ties."""
    best_S: frozenset = frozenset()
    best_g = principal_utility(inst, best_S, counter)
    for i in range(inst.n):
        g = principal_utility(inst, {i}, counter)
        if g > best_g:
            best_S, best_g = frozenset({i}), g
    return best_S, best_g


@dataclass
class SolveReport:
    algorithm: str
    S: frozenset
    alpha: tuple
    g: Number
    candidates: list = field(default_factory=list)
    queries: QueryCounter = field(default_factory=QueryCounter)
    g_star: Optional[Number] = None
    ratio: Optional[float] = None
    wall_time: float = 0.0

    def attach_optimum(self, g_star: Number) -> None:
        self.g_star = g_star
        self.ratio = float(self.g / g_star) if g_star > 0 else None


def make_report(inst: Instance, algorithm: str, S: Iterable[int], counter: QueryCounter,
                candidates: list | None = None) -> SolveReport:
    S = frozenset(S)
    con = incentive_alphas(inst, S)
    return SolveReport(algorithm, S, con.alpha, principal_utility(inst, S),
                       candidates or [], counter)
