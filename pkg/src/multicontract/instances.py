"""Instance generators and the on-disk instance format.

The two lower-bound families take a cardinality-only reward and add a bump
on one hidden set ``T`` of size ``n/2 + 1``.  Both are built from exact
rationals so their structural properties can be checked without tolerance.

Instance files are JSON documents.  Exact numbers (``int``/``Fraction``) are
written as strings ``"p/q"`` (or ``"p"``), floats as JSON numbers using the
shortest round-tripping repr, so ``parse(serialize(x)) == x``.
"""
from __future__ import annotations

import json
import math
import random
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from .contract import Instance
from .setfn import (
    Additive,
    BumpedSymmetric,
    Coverage,
    RewardFunction,
    SymmetricTable,
    Table,
    XosClauses,
)

FORMAT_VERSION = 1


class InstanceFormatError(ValueError):
    """Schema or invariant violation in an instance document."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


# --------------------------------------------------------------------------
# lower-bound families


def _draw_bump_set(n: int, T_star, seed) -> frozenset:
    size = n // 2 + 1
    if T_star is None:
        T_star = random.Random(seed).sample(range(n), size)
    T = frozenset(T_star)
    if len(T) != size or any(i < 0 or i >= n for i in T):
        raise ValueError(f"bump set must be {size} distinct agents in range({n})")
    return T


def subadditive_lb_table(n: int) -> tuple:
    r = math.isqrt(n)
    half = n // 2
    table = []
    for k in range(n + 1):
        if k == 0:
            table.append(Fraction(0))
        elif k <= half:
            table.append(3 + Fraction(2 * k, r))
        elif k == half + 1:
            table.append(Fraction(4 + r))
        elif k == half + 2:
            table.append(Fraction(5 + r))
        else:
            table.append(Fraction(6 + r))
    return tuple(table)


def gen_subadditive_lb(n: int, T_star: Iterable[int] | None = None, seed: int | None = 0) -> Instance:
    """Subadditive family with uniform costs ``2/n`` and bump 1 on ``T_star``.

    ``n`` must be an even perfect square.  The empty set is pinned to 0.
    """
    r = math.isqrt(n) if n > 0 else 0
    if n <= 0 or n % 2 or r * r != n:
        raise ValueError(f"n must be an even perfect square, got {n}")
    T = _draw_bump_set(n, T_star, seed)
    f = BumpedSymmetric(subadditive_lb_table(n), T, Fraction(1))
    meta = {"family": "subadditive-lb", "T_star": sorted(T)}
    if T_star is None:
        meta["seed"] = seed
    if n <= 4096:
        meta["warning"] = "demand-indistinguishability counting assumes n > 4096"
    return Instance(f, (Fraction(2, n),) * n, meta)


def xos_lb_table(n: int) -> tuple:
    half = n // 2
    return tuple(Fraction(0) if k == 0
                 else 1 + Fraction(3 * k, n) if k <= half
                 else Fraction(1, 2) + Fraction(4 * k, n)
                 for k in range(n + 1))


def xos_lb_reward(n: int, T: Iterable[int]) -> BumpedSymmetric:
    return BumpedSymmetric(xos_lb_table(n), frozenset(T), Fraction(1, n))


def xos_lb_clauses(n: int, T: Iterable[int]) -> XosClauses:
    """Clause list ``a_0, a'_0, a_1, a'_1, ..., a_T`` whose max is the bumped function."""
    T = frozenset(T)
    clauses = []
    for i in range(n):
        clauses.append(tuple(1 + Fraction(3, n) if j == i else Fraction(3, n) for j in range(n)))
        clauses.append(tuple(Fraction(1, 2) + Fraction(4, n) if j == i else Fraction(4, n)
                             for j in range(n)))
    clauses.append(tuple(Fraction(5, n) if j in T else Fraction(0) for j in range(n)))
    return XosClauses(tuple(clauses))


def gen_xos_lb(n: int, T_star: Iterable[int] | None = None, seed: int | None = 0) -> Instance:
    """XOS family with uniform costs ``5/(n(n+2))`` and bump ``1/n`` on ``T_star``."""
    if n <= 0 or n % 2:
        raise ValueError(f"n must be a positive even integer, got {n}")
    T = _draw_bump_set(n, T_star, seed)
    meta = {"family": "xos-lb", "T_star": sorted(T),
            "warning": "the 11/10 bound on other sets is asymptotic in n"}
    if T_star is None:
        meta["seed"] = seed
    return Instance(xos_lb_reward(n, T), (Fraction(5, n * (n + 2)),) * n, meta)


# --------------------------------------------------------------------------
# random corpora

RANDOM_KINDS = ("additive", "coverage", "xos_clauses")


def gen_random(kind: str, n: int, seed: int, m: int = 30, k: int = 5,
               density: float = 0.2) -> Instance:
    """Seeded random instance; costs are uniform on ``(0, f({i})]``."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    if kind == "additive":
        f: RewardFunction = Additive(tuple(float(x) for x in 1.0 - rng.random(n)))
    elif kind == "coverage":
        if m < 1:
            raise ValueError("coverage needs m >= 1 elements")
        weights = tuple(float(x) for x in 1.0 - rng.random(m))
        hits = rng.random((n, m)) < density
        f = Coverage(tuple(frozenset(int(e) for e in np.flatnonzero(row)) for row in hits), weights)
    elif kind == "xos_clauses":
        if k < 1:
            raise ValueError("xos_clauses needs k >= 1 clauses")
        A = rng.random((k, n))
        f = XosClauses(tuple(tuple(float(x) for x in row) for row in A))
    else:
        raise ValueError(f"unknown random kind {kind!r}")
    single = [float(f({i})) for i in range(n)]
    costs = tuple(s * float(u) for s, u in zip(single, 1.0 - rng.random(n)))
    meta = {"family": f"random-{kind}", "seed": seed}
    return Instance(f, costs, meta)


# --------------------------------------------------------------------------
# serialization


def _enc(x) -> Any:
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite number {x}")
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _dec(x, where: str):
    if isinstance(x, bool):
        raise InstanceFormatError(where, "expected a number")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        try:
            fr = Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise InstanceFormatError(where, f"bad exact number {x!r}") from None
        return int(fr) if fr.denominator == 1 else fr
    raise InstanceFormatError(where, "expected a number")


def _dec_list(xs, where: str) -> list:
    if not isinstance(xs, list):
        raise InstanceFormatError(where, "expected a list")
    return [_dec(x, f"{where}[{i}]") for i, x in enumerate(xs)]


def _enc_meta(meta: dict) -> dict:
    out = {}
    for key, val in meta.items():
        if isinstance(val, Fraction):
            val = str(val)
        out[key] = val
    return out


def reward_to_doc(f: RewardFunction) -> dict:
    if isinstance(f, Additive):
        return {"kind": f.kind, "values": [_enc(v) for v in f.values]}
    if isinstance(f, XosClauses):
        return {"kind": f.kind, "clauses": [[_enc(a) for a in c] for c in f.clauses]}
    if isinstance(f, Coverage):
        return {"kind": f.kind, "sets": [sorted(s) for s in f.sets],
                "weights": [_enc(w) for w in f.weights]}
    if isinstance(f, SymmetricTable):
        return {"kind": f.kind, "table": [_enc(v) for v in f.table]}
    if isinstance(f, BumpedSymmetric):
        return {"kind": f.kind, "table": [_enc(v) for v in f.table],
                "bump": {"set": sorted(f.bump_set), "amount": _enc(f.bump)}}
    if isinstance(f, Table):
        return {"kind": f.kind, "values": [_enc(v) for v in f.values]}
    raise TypeError(f"cannot serialize reward kind {f.kind}")


def to_document(inst: Instance) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "n": inst.n,
        "costs": [_enc(c) for c in inst.costs],
        "reward": reward_to_doc(inst.f),
    }
    if inst.meta:
        doc["metadata"] = _enc_meta(inst.meta)
    return doc


def serialize(inst: Instance) -> str:
    return json.dumps(to_document(inst), indent=1, sort_keys=True) + "\n"


def _keys(doc: dict, where: str, required: set, optional: set = frozenset()) -> None:
    if not isinstance(doc, dict):
        raise InstanceFormatError(where, "expected an object")
    missing = required - doc.keys()
    if missing:
        raise InstanceFormatError(where, f"missing keys {sorted(missing)}")
    extra = doc.keys() - required - optional
    if extra:
        raise InstanceFormatError(where, f"unknown keys {sorted(extra)}")


def _agent_list(xs, n: int, where: str) -> list[int]:
    if not isinstance(xs, list) or any(not isinstance(i, int) or isinstance(i, bool) for i in xs):
        raise InstanceFormatError(where, "expected a list of agent indices")
    if any(i < 0 or i >= n for i in xs) or len(set(xs)) != len(xs):
        raise InstanceFormatError(where, f"agents must be distinct indices in range({n})")
    return xs


def _check_cardinality_table(table: list, n: int, where: str) -> None:
    if len(table) != n + 1:
        raise InstanceFormatError(where, f"table needs {n + 1} entries, got {len(table)}")
    if table[0] != 0:
        raise InstanceFormatError(f"{where}[0]", "not normalized: f(empty) must be 0")
    for k in range(n):
        if table[k + 1] < table[k]:
            raise InstanceFormatError(f"{where}[{k + 1}]", "table is not monotone")


def reward_from_doc(doc: dict, n: int, where: str = "reward") -> RewardFunction:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InstanceFormatError(where, "expected an object with a 'kind'")
    kind = doc["kind"]
    if kind == "additive":
        _keys(doc, where, {"kind", "values"})
        vals = _dec_list(doc["values"], f"{where}.values")
        if len(vals) != n:
            raise InstanceFormatError(f"{where}.values", f"expected {n} values")
        if any(v < 0 for v in vals):
            raise InstanceFormatError(f"{where}.values", "values must be nonnegative")
        return Additive(tuple(vals))
    if kind == "xos_clauses":
        _keys(doc, where, {"kind", "clauses"})
        raw = doc["clauses"]
        if not isinstance(raw, list) or not raw:
            raise InstanceFormatError(f"{where}.clauses", "expected a nonempty list")
        clauses = [_dec_list(c, f"{where}.clauses[{j}]") for j, c in enumerate(raw)]
        for j, c in enumerate(clauses):
            if len(c) != n:
                raise InstanceFormatError(f"{where}.clauses[{j}]", f"expected {n} weights")
            if any(a < 0 for a in c):
                raise InstanceFormatError(f"{where}.clauses[{j}]", "weights must be nonnegative")
        return XosClauses(tuple(tuple(c) for c in clauses))
    if kind == "coverage":
        _keys(doc, where, {"kind", "sets", "weights"})
        weights = _dec_list(doc["weights"], f"{where}.weights")
        if any(w < 0 for w in weights):
            raise InstanceFormatError(f"{where}.weights", "weights must be nonnegative")
        sets = doc["sets"]
        if not isinstance(sets, list) or len(sets) != n:
            raise InstanceFormatError(f"{where}.sets", f"expected {n} element lists")
        parsed = [_agent_list(s, len(weights), f"{where}.sets[{i}]") for i, s in enumerate(sets)]
        return Coverage(tuple(frozenset(s) for s in parsed), tuple(weights))
    if kind == "symmetric":
        _keys(doc, where, {"kind", "table"})
        table = _dec_list(doc["table"], f"{where}.table")
        _check_cardinality_table(table, n, f"{where}.table")
        return SymmetricTable(tuple(table))
    if kind == "bumped_symmetric":
        _keys(doc, where, {"kind", "table", "bump"})
        table = _dec_list(doc["table"], f"{where}.table")
        _check_cardinality_table(table, n, f"{where}.table")
        _keys(doc["bump"], f"{where}.bump", {"set", "amount"})
        T = _agent_list(doc["bump"]["set"], n, f"{where}.bump.set")
        amount = _dec(doc["bump"]["amount"], f"{where}.bump.amount")
        if amount < 0:
            raise InstanceFormatError(f"{where}.bump.amount", "bump must be nonnegative")
        if not T:
            raise InstanceFormatError(f"{where}.bump.set", "not normalized: bump on the empty set")
        k = len(T)
        if k < n and table[k + 1] < table[k] + amount:
            raise InstanceFormatError(f"{where}.bump", "bump breaks monotonicity")
        return BumpedSymmetric(tuple(table), frozenset(T), amount)
    if kind == "table":
        _keys(doc, where, {"kind", "values"})
        vals = _dec_list(doc["values"], f"{where}.values")
        if len(vals) != 1 << n:
            raise InstanceFormatError(f"{where}.values", f"expected {1 << n} values")
        if vals[0] != 0:
            raise InstanceFormatError(f"{where}.values[0]", "not normalized: f(empty) must be 0")
        arr = np.array([float(v) for v in vals])
        masks = np.arange(1 << n, dtype=np.int64)
        for i in range(n):
            lo = masks[(masks >> i) & 1 == 0]
            bad = lo[arr[lo | (1 << i)] < arr[lo]]
            if bad.size:
                raise InstanceFormatError(f"{where}.values[{int(bad[0]) | (1 << i)}]",
                                          "table is not monotone")
        return Table(tuple(vals))
    raise InstanceFormatError(f"{where}.kind", f"unknown reward kind {kind!r}")


def from_document(doc: dict) -> Instance:
    _keys(doc, "document", {"format_version", "n", "costs", "reward"}, {"metadata"})
    if doc["format_version"] != FORMAT_VERSION:
        raise InstanceFormatError("format_version", f"unsupported version {doc['format_version']!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceFormatError("n", "expected a positive integer")
    costs = _dec_list(doc["costs"], "costs")
    if len(costs) != n:
        raise InstanceFormatError("costs", f"expected {n} costs, got {len(costs)}")
    for i, c in enumerate(costs):
        if c < 0:
            raise InstanceFormatError(f"costs[{i}]", "costs must be nonnegative")
    f = reward_from_doc(doc["reward"], n)
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise InstanceFormatError("metadata", "expected an object")
    return Instance(f, tuple(costs), dict(meta))


def parse(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}", exc.msg) from None
    return from_document(doc)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(inst))
