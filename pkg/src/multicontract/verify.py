"""Ground truth and property checks.

Brute force enumerates every subset (``n <= 24``) or, for cardinality-based
rewards with uniform costs, one representative per symmetry class.  The
checkers return small report objects carrying a concrete witness whenever a
property fails, so a failure can be replayed with :func:`setfn.value`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .approx import ScalingParams, cheap_agents
from .contract import Instance, principal_utility
from .setfn import (
    MAX_EXHAUSTIVE_N,
    BumpedSymmetric,
    Number,
    RewardFunction,
    SymmetricTable,
    UnsupportedQuery,
    div,
    from_mask,
    is_exact_number,
    tie_key,
    to_mask,
    value,
    xos_clause_list,
)

CLASSES = ("monotone", "subadditive", "submodular", "xos-supported")
MAX_CLASS_N = 16
MAX_LEMMA_N = 12
RTOL = 1e-9


@dataclass
class OptResult:
    S_star: frozenset
    g_star: Number
    evaluations: int


@dataclass
class ClassReport:
    cls: str
    passed: bool
    witness: Optional[tuple] = None
    checked: int = 0


@dataclass
class CheckReport:
    """Outcome of a lemma-level check."""

    name: str
    passed: bool
    checked: int = 0
    witness: Optional[tuple] = None
    details: dict = field(default_factory=dict)


def _tol(x) -> float:
    return RTOL * max(1.0, abs(float(x)))


def _le(a, b, exact: bool) -> bool:
    return a <= b if exact else a <= b + _tol(max(abs(float(a)), abs(float(b))))


# --------------------------------------------------------------------------
# value / utility tables


def exact_table(f: RewardFunction) -> list:
    """Exact values over all masks (small n only)."""
    if f.n > MAX_CLASS_N:
        raise UnsupportedQuery(f"exact tables capped at n={MAX_CLASS_N}")
    return [f._value(from_mask(m)) for m in range(1 << f.n)]


def _lcm_denominator(xs: Iterable) -> int:
    d = 1
    for x in xs:
        d = math.lcm(d, Fraction(x).denominator)
    return d


def scaled_table(f: RewardFunction) -> tuple[np.ndarray, bool]:
    """Values over all masks as an array plus an exactness flag.

    Exact functions come back as int64 scaled by a common denominator so
    that comparisons stay exact; others as float64.
    """
    if f.exact and f.n <= MAX_CLASS_N:
        vals = exact_table(f)
        L = _lcm_denominator(vals)
        ints = [int(Fraction(v) * L) for v in vals]
        if max(abs(x) for x in ints) < 1 << 62:
            return np.array(ints, dtype=np.int64), True
    return f.full_table(), False


def _float_g_table(inst: Instance) -> np.ndarray:
    n = inst.n
    F = inst.f.full_table()
    masks = np.arange(1 << n, dtype=np.int64)
    share = np.zeros(1 << n)
    blocked = np.zeros(1 << n, dtype=bool)
    for i in range(n):
        has = ((masks >> i) & 1).astype(bool)
        m = F - F[masks ^ (1 << i)]
        c = float(inst.costs[i])
        zero = has & (m == 0)
        if c > 0:
            blocked |= zero
        ok = has & ~zero
        share[ok] += c / m[ok]
    g = (1.0 - share) * F
    g[blocked] = -np.inf
    g[0] = 0.0
    return g


def _exact_g_list(inst: Instance) -> list:
    n = inst.n
    F = exact_table(inst.f)
    out = [0] * (1 << n)
    for mask in range(1, 1 << n):
        out[mask] = principal_utility_from_table(F, inst.costs, mask)
    return out


def principal_utility_from_table(F: list, costs: tuple, mask: int) -> Number:
    fS = F[mask]
    share: Number = 0
    i, rest = 0, mask
    while rest:
        if rest & 1:
            m = fS - F[mask ^ (1 << i)]
            c = costs[i]
            if m == 0:
                if c != 0:
                    return -math.inf
            else:
                share += div(c, m)
        rest >>= 1
        i += 1
    return (1 - share) * fS


def g_table(inst: Instance):
    """``g`` for every mask: an exact list when possible, else a float array."""
    if inst.n > MAX_EXHAUSTIVE_N:
        raise UnsupportedQuery(f"enumeration capped at n={MAX_EXHAUSTIVE_N}")
    if inst.exact and inst.n <= MAX_CLASS_N:
        return _exact_g_list(inst)
    return _float_g_table(inst)


# --------------------------------------------------------------------------
# brute force


def _uniform_costs(inst: Instance) -> bool:
    return all(c == inst.costs[0] for c in inst.costs)


def symmetry_classes(f: RewardFunction):
    """Yield ``(label, S)`` with ``S`` the lexicographically first member of
    each class on which ``g`` is constant for cardinality-based ``f`` and
    uniform costs."""
    n = f.n
    if isinstance(f, SymmetricTable):
        for k in range(n + 1):
            yield ("card", frozenset(range(k)))
        return
    T = f.bump_set
    t = len(T)
    for k in range(n + 1):
        for combo in combinations(range(n), k):
            S = frozenset(combo)
            if S == T or (k == t + 1 and T <= S):
                continue
            yield ("generic", S)
            break
        if k == t:
            yield ("bump", T)
        if k == t + 1 and t < n:
            yield ("bump+1", T | {min(set(range(n)) - T)})


def brute_force_opt(inst: Instance) -> OptResult:
    """Exact maximizer of ``g``; ties go to the smaller, then lexicographically
    first set."""
    f = inst.f
    if isinstance(f, (SymmetricTable, BumpedSymmetric)) and _uniform_costs(inst):
        best_S, best_g, evals = frozenset(), None, 0
        for _, S in symmetry_classes(f):
            g = principal_utility(inst, S)
            evals += 1
            if best_g is None or g > best_g or (g == best_g and tie_key(S) < tie_key(best_S)):
                best_S, best_g = S, g
        return OptResult(best_S, best_g, evals)
    if inst.n > MAX_EXHAUSTIVE_N:
        raise UnsupportedQuery(
            f"brute force over n={inst.n} exceeds the cap of {MAX_EXHAUSTIVE_N}")
    g = g_table(inst)
    if isinstance(g, list):
        top = max(g)
        hits = [m for m, v in enumerate(g) if v == top]
    else:
        top = g.max()
        hits = [int(m) for m in np.flatnonzero(g == top)]
    S = min((from_mask(m) for m in hits), key=tie_key)
    return OptResult(S, principal_utility(inst, S), 1 << inst.n)


# --------------------------------------------------------------------------
# class membership


def _disjoint_pairs(bits: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """All (a, b) with a & b == 0 over the given bit positions."""
    a = np.zeros(1, dtype=np.int64)
    b = np.zeros(1, dtype=np.int64)
    for i in bits:
        bit = np.int64(1 << i)
        a = np.concatenate([a, a | bit, a])
        b = np.concatenate([b, b, b | bit])
    return a, b


def check_class(f: RewardFunction, cls: str) -> ClassReport:
    """Exhaustive class check (``n <= 16``) with a witness on failure."""
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}; choose from {CLASSES}")
    n = f.n
    if n > MAX_CLASS_N:
        raise UnsupportedQuery(f"exhaustive class checks are capped at n={MAX_CLASS_N}")
    if cls == "xos-supported":
        return _check_xos_supported(f)
    F, exact = scaled_table(f)
    tol = 0 if exact else RTOL * max(1.0, float(np.abs(F).max()))
    masks = np.arange(1 << n, dtype=np.int64)
    checked = 0
    if cls == "monotone":
        for i in range(n):
            lo = masks[((masks >> i) & 1) == 0]
            bad = lo[F[lo | (1 << i)] < F[lo] - tol]
            checked += lo.size
            if bad.size:
                S = from_mask(int(bad[0]))
                return ClassReport(cls, False, (S, S | {i}), checked)
        return ClassReport(cls, True, None, checked)
    if cls == "submodular":
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                lo = masks[(((masks >> i) | (masks >> j)) & 1) == 0]
                small = F[lo | (1 << i)] - F[lo]
                big = F[lo | (1 << i) | (1 << j)] - F[lo | (1 << j)]
                bad = lo[small < big - tol]
                checked += lo.size
                if bad.size:
                    S = from_mask(int(bad[0]))
                    return ClassReport(cls, False, (i, S, S | {j}), checked)
        return ClassReport(cls, True, None, checked)
    # subadditive: every disjoint pair, split into high/low halves
    lo_bits = list(range(n // 2))
    hi_bits = list(range(n // 2, n))
    a_lo, b_lo = _disjoint_pairs(lo_bits)
    a_hi, b_hi = _disjoint_pairs(hi_bits)
    for ah, bh in zip(a_hi, b_hi):
        a = a_lo | ah
        b = b_lo | bh
        bad = np.flatnonzero(F[a] + F[b] < F[a | b] - tol)
        checked += a.size
        if bad.size:
            k = int(bad[0])
            return ClassReport(cls, False, (from_mask(int(a[k])), from_mask(int(b[k]))), checked)
    return ClassReport(cls, True, None, checked)


def _check_xos_supported(f: RewardFunction) -> ClassReport:
    clauses = xos_clause_list(f)
    n = f.n
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    flat = [a for c in clauses for a in c]
    if f.exact and all(is_exact_number(a) for a in flat):
        vals = exact_table(f)
        L = _lcm_denominator(flat + vals)
        F = np.array([int(Fraction(v) * L) for v in vals], dtype=np.int64)
        A = np.array([[int(Fraction(a) * L) for a in c] for c in clauses], dtype=np.int64)
        tol = 0
    else:
        F = f.full_table()
        A = np.array([[float(a) for a in c] for c in clauses])
        bits = bits.astype(np.float64)
        tol = RTOL * max(1.0, float(np.abs(F).max()))
    CV = bits @ A.T
    over = np.argwhere(CV > F[:, None] + tol)
    if over.size:
        m, j = (int(x) for x in over[0])
        return ClassReport("xos-supported", False, (from_mask(m), j), masks.size)
    under = np.flatnonzero(CV.max(axis=1) < F - tol)
    if under.size:
        return ClassReport("xos-supported", False, (from_mask(int(under[0])), None), masks.size)
    return ClassReport("xos-supported", True, None, masks.size)


# --------------------------------------------------------------------------
# lemma-level properties


def _sample_pairs(n: int, trials: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        T = rng.random(n) < rng.random()
        S = T & (rng.random(n) < rng.random())
        yield frozenset(np.flatnonzero(S).tolist()), frozenset(np.flatnonzero(T).tolist())


def check_lemma_marginals(inst_or_f, trials: int = 2000, seed: int = 0) -> CheckReport:
    """For ``S <= T``: ``sum_{i in S} f(i | T - i) <= f(S)``.

    Exhaustive for ``n <= 12``, otherwise ``trials`` random pairs.
    """
    f = inst_or_f.f if isinstance(inst_or_f, Instance) else inst_or_f
    n = f.n
    name = "lemma21"
    if n > MAX_LEMMA_N:
        checked = 0
        for S, T in _sample_pairs(n, trials, seed):
            fT = value(f, T)
            lhs = sum((fT - value(f, T - {i}) for i in sorted(S)), 0)
            checked += 1
            if not _le(lhs, value(f, S), f.exact):
                return CheckReport(name, False, checked, (S, T))
        return CheckReport(name, True, checked)
    F, exact = scaled_table(f)
    tol = 0 if exact else RTOL * max(1.0, float(np.abs(F).max()))
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(F.dtype)
    checked = 0
    for T in range(1 << n):
        marg = np.zeros(n, dtype=F.dtype)
        for i in range(n):
            if T >> i & 1:
                marg[i] = F[T] - F[T ^ (1 << i)]
        sub = masks[(masks & ~T) == 0]
        lhs = bits[sub] @ marg
        bad = sub[lhs > F[sub] + tol]
        checked += sub.size
        if bad.size:
            return CheckReport(name, False, checked, (from_mask(int(bad[0])), from_mask(T)))
    return CheckReport(name, True, checked)


def check_lemma_sqrt_costs(inst: Instance, opt: OptResult | None = None) -> CheckReport:
    """At the optimum ``S*``: ``sum_{i in S} sqrt(c_i) <= sqrt(f(S))`` for all ``S <= S*``."""
    opt = opt or brute_force_opt(inst)
    star = sorted(opt.S_star)
    checked = 0
    for k in range(len(star) + 1):
        for combo in combinations(star, k):
            lhs = sum(math.sqrt(inst.costs[i]) for i in combo)
            rhs = math.sqrt(value(inst.f, combo))
            checked += 1
            if lhs > rhs + _tol(rhs):
                return CheckReport("lemma32", False, checked, (frozenset(combo),))
    return CheckReport("lemma32", True, checked, details={"S_star": opt.S_star})


def check_lemma_half_value(inst: Instance) -> CheckReport:
    """If ``f(S) > 0`` and every ``f(i | S - i) >= sqrt(2 c_i f(S))`` then
    ``g(S) >= f(S) / 2``.  ``details['hypothesis_met']`` counts sets that
    passed the filter so vacuous runs can be spotted."""
    n = inst.n
    if n > MAX_LEMMA_N:
        raise UnsupportedQuery(f"exhaustive lemma checks capped at n={MAX_LEMMA_N}")
    exact = inst.exact
    F = exact_table(inst.f) if exact else inst.f.full_table().tolist()
    met = 0
    for mask in range(1, 1 << n):
        fS = F[mask]
        if not fS > 0:
            continue
        ok = True
        for i in range(n):
            if mask >> i & 1:
                m = fS - F[mask ^ (1 << i)]
                # m >= sqrt(2 c f)  <=>  m^2 >= 2 c f  (m >= 0)
                if m < 0 or m * m < 2 * inst.costs[i] * fS:
                    ok = False
                    break
        if not ok:
            continue
        met += 1
        g = principal_utility_from_table(F, inst.costs, mask)
        if not _le(div(fS, 2), g, exact):
            return CheckReport("lemma33", False, 1 << n, (from_mask(mask),))
    return CheckReport("lemma33", True, 1 << n, details={"hypothesis_met": met})


def check_lemma_decomposition(inst: Instance, opt: OptResult | None = None) -> CheckReport:
    """``g(S*) <= f(S* & A') + max(0, max_i g({i}))`` for subadditive ``f``."""
    opt = opt or brute_force_opt(inst)
    A_prime = cheap_agents(inst)
    single = max(principal_utility(inst, {i}) for i in range(inst.n))
    rhs = value(inst.f, opt.S_star & A_prime) + max(0, single)
    passed = _le(opt.g_star, rhs, inst.exact)
    return CheckReport("lemma31", passed, 1, None if passed else (opt.S_star,),
                       {"g_star": opt.g_star, "bound": rhs})


def check_scaling_output(f: RewardFunction, T: Iterable[int], params: ScalingParams,
                         U: Iterable[int]) -> CheckReport:
    """Value window and marginal retention for a scaled-down set ``U <= T``."""
    T, U = frozenset(T), frozenset(U)
    psi, delta = params.psi, params.delta
    exact = f.exact and is_exact_number(psi) and is_exact_number(delta)
    failed = []
    if not U <= T:
        failed.append("subset")
    fU = value(f, U)
    top = max((value(f, {i}) for i in T), default=0)
    if not _le((1 - delta) * psi, fU, exact):
        failed.append("lower")
    if not _le(fU, psi + top, exact):
        failed.append("upper")
    fT = value(f, T)
    for i in sorted(U):
        if not _le(delta * (fT - value(f, T - {i})), fU - value(f, U - {i}), exact):
            failed.append("marginal")
            break
    return CheckReport("scaling", not failed, 1, tuple(failed) or None)


# --------------------------------------------------------------------------
# lower-bound families


def _family(inst: Instance) -> str:
    fam = inst.meta.get("family")
    if fam in ("subadditive-lb", "xos-lb"):
        return fam
    raise ValueError("instance is not a lower-bound family member (metadata.family)")


def lb_family_report(inst: Instance) -> CheckReport:
    """Utility landscape of a bumped lower-bound instance, computed per symmetry class.

    Reports ``g_T(T)``, the best other set, per-cardinality maxima over
    ``S != T`` and whether ``T`` is the unique optimum, then checks the
    family's stated bounds (``sqrt(n)/4`` and 5, resp. 5/4 and 11/10).
    """
    fam = _family(inst)
    f = inst.f
    if not isinstance(f, BumpedSymmetric) or not _uniform_costs(inst):
        raise ValueError("lower-bound families are bumped symmetric with uniform costs")
    n, T = f.n, f.bump_set
    g_T = principal_utility(inst, T)
    per_card: dict[int, Number] = {}
    best_other, best_other_S = None, None
    for label, S in symmetry_classes(f):
        if label == "bump":
            continue
        g = principal_utility(inst, S)
        k = len(S)
        if k not in per_card or g > per_card[k]:
            per_card[k] = g
        if best_other is None or g > best_other or (g == best_other and tie_key(S) < tie_key(best_other_S)):
            best_other, best_other_S = g, S
    if fam == "subadditive-lb":
        lower = Fraction(math.isqrt(n), 4)
        upper = Fraction(5)
    else:
        lower = Fraction(5, 4)
        upper = Fraction(11, 10)
    details = {
        "family": fam,
        "n": n,
        "g_T": g_T,
        "max_other": best_other,
        "max_other_set": best_other_S,
        "per_cardinality": dict(sorted(per_card.items())),
        "unique_optimum": g_T > best_other,
        "lower_bound_on_g_T": lower,
        "upper_bound_on_others": upper,
    }
    witness = []
    if not g_T >= lower:
        witness.append("g_T below bound")
    if not best_other <= upper:
        witness.append("other set above bound")
    return CheckReport("lb-family", not witness, len(per_card) + 1, tuple(witness) or None, details)


def enumerate_other_max(inst: Instance) -> tuple[Number, Number, int]:
    """Full enumeration: ``(g_T(T), max_{S != T} g_T(S), #optima)`` (n <= 16)."""
    g = g_table(inst)
    T = to_mask(inst.f.bump_set)
    g_T = g[T]
    others = [v for m, v in enumerate(g) if m != T] if isinstance(g, list) else np.delete(g, T)
    top = max(others)
    n_opt = sum(1 for v in g if v == max(g_T, top))
    return g_T, top, n_opt


def check_sandwich(inst: Instance) -> CheckReport:
    """``f'(S) <= f_T(S) <= (1 + 3/(3 + sqrt n)) f'(S)`` for the symmetric
    submodular ``f'(S) = min(3 + 2|S|/sqrt n, 3 + sqrt n)`` (``f'(empty) = 0``),
    checked per cardinality and bump pattern."""
    if _family(inst) != "subadditive-lb":
        raise ValueError("sandwich applies to the subadditive family")
    f = inst.f
    n, r = f.n, math.isqrt(f.n)
    factor = 1 + Fraction(3, 3 + r)
    checked = 0
    for k in range(n + 1):
        fp = 0 if k == 0 else min(3 + Fraction(2 * k, r), Fraction(3 + r))
        vals = [f.table[k]]
        if k == len(f.bump_set):
            vals.append(f.table[k] + f.bump)
        for v in vals:
            checked += 1
            if not (fp <= v <= factor * fp):
                return CheckReport("sandwich", False, checked, (k, v, fp))
    return CheckReport("sandwich", True, checked, details={"factor": factor})


def check_xos_lb_clauses(n: int, T: Iterable[int]) -> CheckReport:
    """Clause support for the XOS family by overlap pattern.

    A clause value depends only on ``k = |S|``, ``t = |S & T|`` and whether
    the clause's own agent lies in ``S``; so does ``f_T``.  Checks that the
    best clause equals ``f_T`` and no clause exceeds it, for every feasible
    ``(k, t)``.
    """
    from .instances import xos_lb_reward

    T = frozenset(T)
    f = xos_lb_reward(n, T)
    size = len(T)
    checked = 0
    for k in range(n + 1):
        for t in range(max(0, k - (n - size)), min(k, size) + 1):
            fS = f.table[k] + (f.bump if (k == size and t == size) else 0)
            cands = [Fraction(5 * t, n)]
            if k >= 1:
                cands += [1 + Fraction(3 * k, n), Fraction(1, 2) + Fraction(4 * k, n)]
            if k < n:
                cands += [Fraction(3 * k, n), Fraction(4 * k, n)]
            checked += 1
            if max(cands) != fS:
                return CheckReport("xos-clauses", False, checked, (k, t, max(cands), fS))
    return CheckReport("xos-clauses", True, checked)


def check_approx_demand(f: RewardFunction, prices, S: Iterable[int],
                        beta: float = 1 - 1 / math.e) -> CheckReport:
    """``f(S) - p(S) >= beta f(T) - p(T)`` against every ``T`` (``n <= 12``)."""
    n = f.n
    if n > MAX_LEMMA_N:
        raise UnsupportedQuery(f"exhaustive demand checks capped at n={MAX_LEMMA_N}")
    F = f.full_table()
    masks = np.arange(1 << n, dtype=np.int64)
    p = np.array([float(x) for x in prices])
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    # infinite prices only ever appear with a 0 bit
    cost = np.where(bits, p, 0.0).sum(axis=1)
    S = frozenset(S)
    lhs = float(value(f, S)) - sum(float(prices[i]) for i in S)
    rhs = beta * F - cost
    bad = np.flatnonzero(lhs < rhs - RTOL * np.maximum(1.0, np.abs(rhs)))
    if bad.size:
        return CheckReport("approx-demand", False, masks.size, (from_mask(int(bad[0])),))
    return CheckReport("approx-demand", True, masks.size)
