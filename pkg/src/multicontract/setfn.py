"""Set-function representations and oracle primitives.

Every reward function maps a set of agents (a ``frozenset`` of indices in
``range(n)``) to a nonnegative number.  Rational representations keep their
values as ``int``/``Fraction`` so downstream checks can run exactly; the
randomly generated families use floats.

Three oracle primitives are exposed as module functions: :func:`value`,
:func:`exact_demand` and :func:`approx_demand_submodular`.  Each accepts an
optional :class:`QueryCounter` that is incremented per call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]
AgentSet = frozenset
PriceVector = tuple

INF = math.inf

# exhaustive demand / enumeration caps
MAX_EXHAUSTIVE_N = 24
_EXACT_LOOP_N = 16
_FULL_TABLE_N = 20
_CACHE_LIMIT = 1 << 20


class MalformedInput(ValueError):
    """A set or price vector does not fit the function's ground set."""


class UnsupportedQuery(Exception):
    """The representation cannot answer the requested query."""


class CorruptRepresentation(Exception):
    """An explicit representation is internally inconsistent."""


def agent_set(members: Iterable[int]) -> frozenset:
    return frozenset(int(i) for i in members)


def to_mask(S: Iterable[int]) -> int:
    mask = 0
    for i in S:
        mask |= 1 << i
    return mask


def from_mask(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def tie_key(S: Iterable[int]) -> tuple:
    """Total order used for every tie: smaller cardinality, then lexicographic."""
    members = tuple(sorted(S))
    return (len(members), members)


def is_exact_number(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def div(a: Number, b: Number) -> Number:
    """``a / b`` that stays rational when both operands are."""
    if is_exact_number(a) and is_exact_number(b):
        return Fraction(a) / b
    return a / b


def popcount(masks: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(masks).astype(np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        out += (m & 1).astype(np.int64)
        m >>= 1
    return out


def bit_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    """(len(masks), n) 0/1 float matrix of membership."""
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


@dataclass
class QueryCounter:
    value_queries: int = 0
    demand_queries: int = 0
    approx_demand_queries: int = 0

    def reset(self) -> None:
        self.value_queries = 0
        self.demand_queries = 0
        self.approx_demand_queries = 0

    def as_dict(self) -> dict:
        return {
            "value_queries": self.value_queries,
            "demand_queries": self.demand_queries,
            "approx_demand_queries": self.approx_demand_queries,
        }


class RewardFunction:
    """Base class.  Subclasses implement ``_value`` and ``n``."""

    kind: str = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        raise NotImplementedError

    def _value(self, S: frozenset) -> Number:
        raise NotImplementedError

    def __call__(self, S: Iterable[int]) -> Number:
        return self.cached_value(frozenset(S))

    def cached_value(self, S: frozenset) -> Number:
        cache = self._cache
        v = cache.get(S)
        if v is None:
            if len(cache) > _CACHE_LIMIT:
                cache.clear()
            v = self._value(S)
            cache[S] = v
        return v

    def values_at(self, masks: np.ndarray) -> np.ndarray:
        """Float64 values for an array of bitmasks."""
        return np.array([float(self._value(from_mask(int(m)))) for m in masks])

    def full_table(self) -> np.ndarray:
        """Float64 values over all ``2**n`` masks (cached, n <= 20)."""
        if self.n > _FULL_TABLE_N:
            return self.values_at(np.arange(1 << self.n, dtype=np.int64))
        tab = self._cache.get("__table__")
        if tab is None:
            tab = self.values_at(np.arange(1 << self.n, dtype=np.int64))
            self._cache["__table__"] = tab
        return tab


def _numbers_exact(xs: Iterable) -> bool:
    return all(is_exact_number(x) for x in xs)


def _exact_sum(xs: Iterable[Number]) -> Number:
    total: Number = 0
    for x in xs:
        total += x
    return total


@dataclass(frozen=True)
class Additive(RewardFunction):
    values: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "additive"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if any(v < 0 for v in self.values):
            raise MalformedInput("additive values must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        return _numbers_exact(self.values)

    def _value(self, S):
        return _exact_sum(self.values[i] for i in sorted(S))

    def values_at(self, masks):
        return bit_matrix(masks, self.n) @ np.array([float(v) for v in self.values])


@dataclass(frozen=True)
class XosClauses(RewardFunction):
    """Pointwise maximum of nonnegative additive clauses."""

    clauses: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "xos_clauses"

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        if not clauses:
            raise MalformedInput("need at least one clause")
        width = len(clauses[0])
        if any(len(c) != width for c in clauses):
            raise MalformedInput("clauses must all have length n")
        if any(a < 0 for c in clauses for a in c):
            raise MalformedInput("clause weights must be nonnegative")
        object.__setattr__(self, "clauses", clauses)

    @property
    def n(self) -> int:
        return len(self.clauses[0])

    @property
    def exact(self) -> bool:
        return all(_numbers_exact(c) for c in self.clauses)

    def clause_value(self, j: int, S) -> Number:
        a = self.clauses[j]
        return _exact_sum(a[i] for i in sorted(S))

    def _value(self, S):
        return max(self.clause_value(j, S) for j in range(len(self.clauses)))

    def values_at(self, masks):
        A = np.array([[float(a) for a in c] for c in self.clauses])
        return (bit_matrix(masks, self.n) @ A.T).max(axis=1)


@dataclass(frozen=True)
class Coverage(RewardFunction):
    """Weighted coverage: agent ``i`` covers ``sets[i]`` of ``range(len(weights))``."""

    sets: tuple
    weights: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "coverage"

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        object.__setattr__(self, "weights", tuple(self.weights))
        m = len(self.weights)
        if any(w < 0 for w in self.weights):
            raise MalformedInput("coverage weights must be nonnegative")
        for s in self.sets:
            if any(e < 0 or e >= m for e in s):
                raise MalformedInput("coverage element out of range")

    @property
    def n(self) -> int:
        return len(self.sets)

    @property
    def exact(self) -> bool:
        return _numbers_exact(self.weights)

    def _value(self, S):
        covered = set()
        for i in S:
            covered |= self.sets[i]
        return _exact_sum(self.weights[e] for e in sorted(covered))

    def values_at(self, masks):
        out = np.zeros(masks.shape, dtype=np.float64)
        for e, w in enumerate(self.weights):
            cov = to_mask(i for i, s in enumerate(self.sets) if e in s)
            if cov:
                out += float(w) * ((masks & cov) != 0)
        return out


@dataclass(frozen=True)
class SymmetricTable(RewardFunction):
    """Value depends only on cardinality: ``table[|S|]``."""

    table: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "symmetric"

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if len(self.table) < 1:
            raise MalformedInput("table needs an entry for the empty set")

    @property
    def n(self) -> int:
        return len(self.table) - 1

    @property
    def exact(self) -> bool:
        return _numbers_exact(self.table)

    def _value(self, S):
        return self.table[len(S)]

    def cached_value(self, S):
        return self.table[len(S)]

    def values_at(self, masks):
        return np.array([float(v) for v in self.table])[popcount(masks)]


@dataclass(frozen=True)
class BumpedSymmetric(RewardFunction):
    """Symmetric table plus ``bump`` added on exactly one hidden set."""

    table: tuple
    bump_set: frozenset
    bump: Number
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "bumped_symmetric"

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        object.__setattr__(self, "bump_set", frozenset(self.bump_set))
        n = len(self.table) - 1
        if any(i < 0 or i >= n for i in self.bump_set):
            raise MalformedInput("bump set out of range")
        if self.bump < 0:
            raise MalformedInput("bump must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.table) - 1

    @property
    def exact(self) -> bool:
        return _numbers_exact(self.table) and is_exact_number(self.bump)

    def _value(self, S):
        v = self.table[len(S)]
        if len(S) == len(self.bump_set) and S == self.bump_set:
            v = v + self.bump
        return v

    def cached_value(self, S):
        return self._value(S)

    def values_at(self, masks):
        out = np.array([float(v) for v in self.table])[popcount(masks)]
        out[masks == to_mask(self.bump_set)] += float(self.bump)
        return out


@dataclass(frozen=True)
class Table(RewardFunction):
    """Explicit value per bitmask (``values[mask]``), n <= 24."""

    values: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    kind = "table"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        size = len(self.values)
        if size < 1 or size & (size - 1):
            raise MalformedInput("table length must be a power of two")
        if size > 1 << MAX_EXHAUSTIVE_N:
            raise MalformedInput("table representation capped at n=24")

    @property
    def n(self) -> int:
        return len(self.values).bit_length() - 1

    @property
    def exact(self) -> bool:
        return _numbers_exact(self.values)

    def _value(self, S):
        return self.values[to_mask(S)]

    def cached_value(self, S):
        return self.values[to_mask(S)]

    def values_at(self, masks):
        return np.array([float(v) for v in self.values])[masks]


# --------------------------------------------------------------------------
# oracle primitives


def _check_set(f: RewardFunction, S) -> frozenset:
    S = frozenset(S)
    n = f.n
    for i in S:
        if not isinstance(i, (int, np.integer)) or i < 0 or i >= n:
            raise MalformedInput(f"agent index {i!r} out of range for n={n}")
    return S


def value(f: RewardFunction, S: Iterable[int], counter: QueryCounter | None = None) -> Number:
    """Value oracle: returns ``f(S)``."""
    S = _check_set(f, S)
    if counter is not None:
        counter.value_queries += 1
    return f.cached_value(S)


def marginal(f: RewardFunction, i: int, S: Iterable[int],
             counter: QueryCounter | None = None) -> Number:
    """``f(i | S \\ {i})``: the gain of adding ``i`` to ``S`` without ``i``."""
    S = _check_set(f, S)
    _check_set(f, (i,))
    return value(f, S | {i}, counter) - value(f, S - {i}, counter)


def _check_prices(f: RewardFunction, prices: Sequence) -> tuple:
    prices = tuple(prices)
    if len(prices) != f.n:
        raise MalformedInput(f"price vector has length {len(prices)}, expected {f.n}")
    for p in prices:
        if p != INF and not (p >= 0):
            raise MalformedInput(f"price {p!r} must be nonnegative or +inf")
    return prices


def _support(prices: tuple) -> list[int]:
    return [i for i, p in enumerate(prices) if p != INF]


def _net(f: RewardFunction, S: frozenset, prices: tuple) -> Number:
    return f.cached_value(S) - _exact_sum(prices[i] for i in sorted(S))


def _pick(cands: Iterable[tuple[Number, frozenset]]) -> frozenset:
    """Argmax of net value; ties by :func:`tie_key`."""
    best_val = None
    best_set = frozenset()
    for val, S in cands:
        if best_val is None or val > best_val or (val == best_val and tie_key(S) < tie_key(best_set)):
            best_val, best_set = val, S
    return best_set


def exact_demand(f: RewardFunction, prices: Sequence,
                 counter: QueryCounter | None = None) -> frozenset:
    """Demand oracle: a set maximizing ``f(S) - sum(prices[S])``.

    Agents priced at ``+inf`` are excluded.  Ties are broken by
    :func:`tie_key`, the same order for every representation.
    """
    prices = _check_prices(f, prices)
    if counter is not None:
        counter.demand_queries += 1
    support = _support(prices)
    if not support:
        return frozenset()
    if isinstance(f, Additive):
        return frozenset(i for i in support if f.values[i] > prices[i])
    if isinstance(f, XosClauses):
        return _xos_demand(f, prices, support)
    if isinstance(f, (SymmetricTable, BumpedSymmetric)):
        return _symmetric_demand(f, prices, support)
    return _exhaustive_demand(f, prices, support)


def _xos_demand(f: XosClauses, prices: tuple, support: list[int]) -> frozenset:
    # The min-cardinality optimum is the strict-positive part of some best clause.
    cands = []
    for a in f.clauses:
        P = frozenset(i for i in support if a[i] > prices[i])
        cands.append((_exact_sum(a[i] - prices[i] for i in sorted(P)), P))
    return _pick(cands)


def _symmetric_demand(f, prices: tuple, support: list[int]) -> frozenset:
    order = sorted(support, key=lambda i: (prices[i], i))
    cands = []
    paid: Number = 0
    for k in range(len(order) + 1):
        if k:
            paid = paid + prices[order[k - 1]]
        S = frozenset(order[:k])
        cands.append((f.cached_value(S) - paid, S))
    if isinstance(f, BumpedSymmetric) and f.bump_set <= set(support):
        cands.append((_net(f, f.bump_set, prices), f.bump_set))
    return _pick(cands)


def _exhaustive_demand(f: RewardFunction, prices: tuple, support: list[int]) -> frozenset:
    m = len(support)
    if m > MAX_EXHAUSTIVE_N:
        raise UnsupportedQuery(
            f"exhaustive demand over {m} agents exceeds the cap of {MAX_EXHAUSTIVE_N}")
    if f.exact and all(is_exact_number(prices[i]) for i in support) and m <= _EXACT_LOOP_N:
        best_val, best = None, frozenset()
        for k in range(m + 1):
            for combo in combinations(support, k):
                S = frozenset(combo)
                val = _net(f, S, prices)
                if best_val is None or val > best_val:
                    best_val, best = val, S
        return best
    local = np.arange(1 << m, dtype=np.int64)
    glob = np.zeros_like(local)
    net = np.zeros(local.shape, dtype=np.float64)
    for k, i in enumerate(support):
        bit = (local >> k) & 1
        glob |= bit << i
        net -= float(prices[i]) * bit
    if f.n <= _FULL_TABLE_N:
        net += f.full_table()[glob]
    else:
        net += f.values_at(glob)
    best = net.max()
    hits = glob[net == best]
    return min((from_mask(int(g)) for g in hits), key=tie_key)


def approx_demand_submodular(f: RewardFunction, prices: Sequence,
                             counter: QueryCounter | None = None) -> frozenset:
    """(1-1/e)-approximate demand for monotone submodular ``f`` via value queries.

    Distorted greedy: in round ``r`` of ``m`` the marginal gain is damped by
    ``(1 - 1/m)**(m - r - 1)`` before subtracting the price; the best element
    is added only when this score is positive.  The output satisfies
    ``f(S) - p(S) >= (1 - 1/e) f(T) - p(T)`` for every ``T``.
    """
    prices = _check_prices(f, prices)
    if counter is not None:
        counter.approx_demand_queries += 1
    support = _support(prices)
    m = len(support)
    S: frozenset = frozenset()
    if m == 0:
        return S
    fS = value(f, S, counter)
    for r in range(m):
        damp = (1.0 - 1.0 / m) ** (m - r - 1)
        best_score, best_e, best_val = 0.0, None, None
        for e in support:
            if e in S:
                continue
            fe = value(f, S | {e}, counter)
            score = damp * (fe - fS) - prices[e]
            if score > best_score:
                best_score, best_e, best_val = score, e, fe
        if best_e is not None:
            S = S | {best_e}
            fS = best_val
    return S


def xos_clause_list(f: RewardFunction) -> tuple:
    """Explicit additive clauses whose pointwise max is ``f``.

    Additive functions are their own single clause; the bumped XOS
    lower-bound family is recognized and its clause list materialized.
    """
    if isinstance(f, XosClauses):
        return f.clauses
    if isinstance(f, Additive):
        return (f.values,)
    if isinstance(f, BumpedSymmetric):
        from .instances import xos_lb_clauses, xos_lb_reward

        n = f.n
        if n % 2 == 0 and len(f.bump_set) == n // 2 + 1 and f == xos_lb_reward(n, f.bump_set):
            return xos_lb_clauses(n, f.bump_set).clauses
    raise UnsupportedQuery(f"no explicit clause list for {f.kind} representation")


def xos_supporting_additive(f: RewardFunction, S: Iterable[int],
                            counter: QueryCounter | None = None) -> tuple:
    """Return the first clause ``a`` with ``a(S) == f(S)``."""
    S = _check_set(f, S)
    target = value(f, S, counter)
    for a in xos_clause_list(f):
        if _exact_sum(a[i] for i in sorted(S)) == target:
            return tuple(a)
    raise CorruptRepresentation(f"no clause attains f(S)={target} on S={sorted(S)}")
