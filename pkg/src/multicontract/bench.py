"""Benchmark harness: run solvers over seeded families and compare with brute force.

Rows are keyed by ``(family, n, seed, alg)`` and emitted in that order no
matter how many workers ran them, so two runs with the same configuration
produce identical structured output.  Wall time is only recorded on request.
"""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .additive import fptas_additive
from .approx import (
    DEFAULT_XI,
    SUBMODULAR_BETA,
    MainParams,
    approx_contract_submodular,
    approx_contract_xos,
    submodular_bound,
    xos_bound,
)
from .contract import Instance, SolveReport, best_single_agent, make_report
from .instances import RANDOM_KINDS, gen_random, gen_subadditive_lb, gen_xos_lb
from .setfn import QueryCounter, is_exact_number
from .verify import brute_force_opt

ALGORITHMS = ("brute", "fptas", "xos", "submod", "single")
FAMILIES = ("subadditive-lb", "xos-lb") + tuple(f"random-{k}" for k in RANDOM_KINDS)
WORKERS_ENV = "MULTICONTRACT_WORKERS"
REPORT_VERSION = 1


class BenchError(Exception):
    """A bench row failed; ``row`` names it."""

    def __init__(self, row: tuple, msg: str):
        super().__init__(f"row {row}: {msg}")
        self.row = row


@dataclass(frozen=True)
class BenchConfig:
    families: tuple
    sizes: tuple
    seeds: tuple
    algorithms: tuple
    epsilon: float = 0.1
    xi: float = DEFAULT_XI
    beta: float = SUBMODULAR_BETA
    timing: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("empty algorithm list")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown family {fam!r}")
        if not self.families or not self.sizes or not self.seeds:
            raise ValueError("families, sizes and seeds must be nonempty")
        for fam in self.families:
            for alg in self.algorithms:
                if not supports(fam, alg):
                    raise ValueError(f"{alg} does not apply to {fam}")


def build_instance(family: str, n: int, seed: int) -> Instance:
    if family == "subadditive-lb":
        return gen_subadditive_lb(n, seed=seed)
    if family == "xos-lb":
        return gen_xos_lb(n, seed=seed)
    if family.startswith("random-"):
        return gen_random(family[len("random-"):], n, seed)
    raise ValueError(f"unknown family {family!r}")


def solve(inst: Instance, alg: str, epsilon: float = 0.1, xi: float = DEFAULT_XI,
          beta: float = SUBMODULAR_BETA) -> SolveReport:
    """Run one algorithm; raises ``TypeError`` on an unsupported pairing."""
    if alg == "brute":
        opt = brute_force_opt(inst)
        counter = QueryCounter(value_queries=opt.evaluations)
        report = make_report(inst, "brute", opt.S_star, counter)
        report.attach_optimum(opt.g_star)
        return report
    if alg == "fptas":
        return fptas_additive(inst, epsilon)
    if alg == "xos":
        return approx_contract_xos(inst, MainParams(xi=xi, beta=1))
    if alg == "submod":
        return approx_contract_submodular(inst, MainParams(xi=xi, beta=beta))
    if alg == "single":
        counter = QueryCounter()
        S, _ = best_single_agent(inst, counter)
        return make_report(inst, "single", S, counter)
    raise ValueError(f"unknown algorithm {alg!r}")


def guarantee(alg: str, config: BenchConfig) -> float | None:
    """Proven worst-case ratio for ``alg`` (on its intended class)."""
    if alg == "brute":
        return 1.0
    if alg == "fptas":
        return 1.0 - config.epsilon
    if alg == "xos":
        return xos_bound(config.xi)
    if alg == "submod":
        return submodular_bound(config.xi, config.beta)
    return None


def supports(family: str, alg: str) -> bool:
    return alg != "fptas" or family == "random-additive"


def encode(x):
    """JSON-ready value; non-integer rationals become ``"p/q"`` strings."""
    if x is None or isinstance(x, (bool, str, int)):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    raise TypeError(f"cannot encode {type(x).__name__}")


def _ratio(g, g_star):
    if not g_star > 0:
        return None
    if is_exact_number(g) and is_exact_number(g_star):
        return Fraction(g) / Fraction(g_star)
    return float(g) / float(g_star)


def run_row(task: tuple) -> dict:
    family, n, seed, alg, config = task
    key = (family, n, seed, alg)
    try:
        inst = build_instance(family, n, seed)
        start = time.perf_counter()
        report = solve(inst, alg, config.epsilon, config.xi, config.beta)
        elapsed = time.perf_counter() - start
        g_star = report.g_star if alg == "brute" else brute_force_opt(inst).g_star
    except Exception as exc:  # surfaced with the row key by run_bench
        return {"error": f"{type(exc).__name__}: {exc}", "key": key}
    row = {
        "family": family, "n": n, "seed": seed, "alg": alg,
        "S": sorted(report.S), "g": report.g, "g_star": g_star,
        "ratio": _ratio(report.g, g_star), "queries": report.queries.as_dict(),
    }
    if config.timing:
        row["time"] = round(elapsed, 6)
    return row


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run_bench(config: BenchConfig) -> dict:
    """Rows plus a per-(family, alg) worst-ratio summary."""
    tasks = []
    for family in config.families:
        for n in config.sizes:
            for seed in config.seeds:
                for alg in config.algorithms:
                    tasks.append((family, n, seed, alg, config))
    workers = _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_row, tasks))
    else:
        rows = [run_row(t) for t in tasks]
    for row in rows:
        if "error" in row:
            raise BenchError(row["key"], row["error"])
    rows.sort(key=lambda r: (r["family"], r["n"], r["seed"], r["alg"]))

    summary = []
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row["family"], row["alg"]), []).append(row)
    for (family, alg), members in sorted(groups.items()):
        ratios = [r["ratio"] for r in members if r["ratio"] is not None]
        worst = min(ratios) if ratios else None
        bound = guarantee(alg, config)
        summary.append({
            "family": family, "alg": alg, "runs": len(members), "rated_runs": len(ratios),
            "worst_ratio": worst, "bound": bound,
            "meets_bound": None if worst is None or bound is None else bool(worst >= bound),
        })
    return {"config": config, "rows": rows, "summary": summary}


def _encode_tree(obj):
    if isinstance(obj, dict):
        return {k: _encode_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode_tree(v) for v in obj]
    return encode(obj)


def to_structured(result: dict) -> str:
    cfg = result["config"]
    doc = {
        "report_version": REPORT_VERSION,
        "config": {
            "families": list(cfg.families), "sizes": list(cfg.sizes), "seeds": list(cfg.seeds),
            "algorithms": list(cfg.algorithms), "epsilon": cfg.epsilon, "xi": cfg.xi,
            "beta": cfg.beta, "timing": cfg.timing,
        },
        "rows": result["rows"],
        "summary": result["summary"],
    }
    return json.dumps(_encode_tree(doc), indent=1, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, Fraction):
        return f"{x} (~{float(x):.6g})" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def to_text(result: dict) -> str:
    lines = ["family n seed alg g g* ratio value_queries"]
    for r in result["rows"]:
        lines.append(" ".join([r["family"], str(r["n"]), str(r["seed"]), r["alg"], _fmt(r["g"]),
                               _fmt(r["g_star"]), _fmt(r["ratio"]),
                               str(r["queries"]["value_queries"])]))
    lines.append("")
    lines.append("family alg runs worst_ratio bound meets_bound")
    for s in result["summary"]:
        lines.append(" ".join([s["family"], s["alg"], str(s["runs"]), _fmt(s["worst_ratio"]),
                               _fmt(s["bound"]), _fmt(s["meets_bound"])]))
    return "\n".join(lines) + "\n"
