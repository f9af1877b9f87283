"""End-to-end acceptance checks, one test per criterion."""
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from multicontract.additive import fptas_additive, partition_instance
from multicontract.approx import (
    ScalingParams,
    approx_contract_submodular,
    approx_contract_xos,
    scale_set,
    submodular_bound,
    xos_bound,
)
from multicontract.bench import BenchConfig, run_bench, to_structured
from multicontract.contract import Instance, principal_utility
from multicontract.instances import gen_random, gen_subadditive_lb, gen_xos_lb, xos_lb_clauses
from multicontract.setfn import INF, XosClauses, approx_demand_submodular, from_mask
from multicontract.verify import (
    brute_force_opt,
    check_approx_demand,
    check_class,
    check_lemma_decomposition,
    check_lemma_half_value,
    check_lemma_marginals,
    check_lemma_sqrt_costs,
    check_sandwich,
    check_scaling_output,
    check_xos_lb_clauses,
    enumerate_other_max,
    lb_family_report,
)

F = Fraction
SLACK = 1e-12


def test_fptas_guarantee(record):
    start = time.perf_counter()
    failures, runs, worst = [], 0, 1.0
    for eps in (0.3, 0.1, 0.03):
        for seed in range(70):
            n = 6 + seed % 11
            inst = gen_random("additive", n, 1000 + seed)
            g_star = brute_force_opt(inst).g_star
            g = fptas_additive(inst, eps).g
            runs += 1
            if g_star > 0:
                worst = min(worst, g / g_star / (1 - eps))
            if g < (1 - eps) * g_star - SLACK:
                failures.append((eps, seed, g, g_star))
    elapsed = time.perf_counter() - start
    record(1, not failures and elapsed < 60,
           f"{runs} runs, {len(failures)} failures, min g/((1-eps)g*)={worst:.4f}, {elapsed:.1f}s")
    assert not failures
    assert elapsed < 60


def test_partition_reduction(record):
    yes = brute_force_opt(partition_instance([1, 1, 2])).g_star
    no3 = brute_force_opt(partition_instance([1, 1, 1])).g_star
    no1 = brute_force_opt(partition_instance([2])).g_star
    ok = yes == F(4, 4) and no3 < F(3, 4) and no1 < F(2, 4)
    assert all(isinstance(x, (int, F)) for x in (yes, no3, no1))
    record(2, ok, f"g*({{1,1,2}})={yes}, g*({{1,1,1}})={no3}, g*({{2}})={no1}")
    assert ok


def test_scaling_lemma(record):
    rng = np.random.default_rng(2024)
    trials, failures = 0, []
    while trials < 1200:
        n = int(rng.integers(1, 15))
        k = int(rng.integers(1, 6))
        if rng.random() < 0.5:
            clauses = rng.integers(0, 10, size=(k, n)).tolist()
            f = XosClauses(tuple(tuple(int(x) for x in row) for row in clauses))
        else:
            f = XosClauses(tuple(tuple(float(x) for x in row) for row in rng.random((k, n))))
        T = from_mask(int(rng.integers(1, 1 << n)))
        fT = f(T)
        if not fT > 0:
            continue
        if isinstance(fT, float):
            psi = float(rng.random()) * fT
            delta = float(rng.uniform(0.05, 1.0))
        else:
            psi = F(int(rng.integers(0, 100 * fT)), 100)
            delta = F(int(rng.integers(1, 21)), 20)
        params = ScalingParams(psi, delta)
        U = scale_set(f, T, params)
        rep = check_scaling_output(f, T, params, U)
        trials += 1
        if not rep.passed:
            failures.append((f, T, psi, delta, rep.witness))
    record(3, not failures, f"{trials} trials, {len(failures)} failures")
    assert not failures, failures[:3]


def _xos_corpus():
    for seed in range(100):
        yield gen_random("xos_clauses", 6 + seed % 9, 2000 + seed)
    for seed in range(100):
        yield gen_random("coverage", 6 + seed % 9, 3000 + seed)


def test_xos_main_guarantee(record):
    start = time.perf_counter()
    bound = xos_bound(1.01)
    runs, rated, worst, failures = 0, 0, float("inf"), []
    for inst in _xos_corpus():
        g_star = brute_force_opt(inst).g_star
        g = approx_contract_xos(inst).g
        runs += 1
        assert g <= g_star + SLACK
        if g_star > 0:
            rated += 1
            worst = min(worst, g / g_star)
            if g / g_star < bound:
                failures.append((inst.meta, g, g_star))
    elapsed = time.perf_counter() - start
    record(4, not failures and elapsed < 300,
           f"{runs} runs ({rated} with g*>0), worst ratio {worst:.4f} vs bound {bound:.6f}, {elapsed:.1f}s")
    assert not failures
    assert elapsed < 300


def test_value_query_guarantee(record):
    bound = submodular_bound(1.01)
    worst, failures = float("inf"), []
    corpus = [gen_random("coverage", 6 + s % 9, 3000 + s) for s in range(100)]
    corpus += [gen_random("additive", 6 + s % 9, 4000 + s) for s in range(50)]
    for inst in corpus:
        g_star = brute_force_opt(inst).g_star
        g = approx_contract_submodular(inst).g
        assert g <= g_star + SLACK
        if g_star > 0:
            worst = min(worst, g / g_star)
            if g / g_star < bound:
                failures.append((inst.meta, g, g_star))

    rng = np.random.default_rng(77)
    demand_checks, demand_failures = 0, []
    for trial in range(150):
        n = 4 + trial % 9
        f = gen_random("coverage", n, 5000 + trial).f
        scale = float(rng.uniform(0.1, 3.0))
        prices = tuple(INF if rng.random() < 0.15 else float(rng.random()) * scale for _ in range(n))
        S = approx_demand_submodular(f, prices)
        rep = check_approx_demand(f, prices, S)
        demand_checks += rep.checked
        if not rep.passed:
            demand_failures.append((trial, rep.witness))
    ok = not failures and not demand_failures
    record(5, ok, f"{len(corpus)} pipeline runs, worst ratio {worst:.4f} vs bound {bound:.6f}; "
                  f"demand guarantee checked against {demand_checks} sets, "
                  f"{len(demand_failures)} failures")
    assert not failures
    assert not demand_failures


def _cheap(inst):
    # same reward with costs shrunk so the half-value hypothesis can trigger
    return Instance(inst.f, tuple(c * 1e-3 for c in inst.costs), inst.meta)


def test_supporting_lemmas(record):
    xos_kinds = [gen_random("xos_clauses", 6 + s % 7, 6000 + s) for s in range(30)]
    xos_kinds += [gen_random("coverage", 6 + s % 7, 7000 + s) for s in range(30)]
    xos_kinds += [gen_xos_lb(10, seed=s) for s in range(3)]
    additive = [gen_random("additive", 6 + s % 7, 8000 + s) for s in range(20)]
    sub_family = [gen_subadditive_lb(4, seed=s) for s in range(3)]
    bad = []
    counts = {"lemma21": 0, "lemma32": 0, "lemma33": 0, "lemma31": 0, "hypothesis_met": 0}
    for inst in xos_kinds:
        rep = check_lemma_marginals(inst)
        counts["lemma21"] += rep.checked
        if not rep.passed:
            bad.append(("lemma21", inst.meta, rep.witness))
    for inst in xos_kinds + additive + sub_family:
        for variant in (inst, _cheap(inst)):
            opt = brute_force_opt(variant)
            r32 = check_lemma_sqrt_costs(variant, opt)
            r31 = check_lemma_decomposition(variant, opt)
            r33 = check_lemma_half_value(variant)
            counts["lemma32"] += r32.checked
            counts["lemma31"] += r31.checked
            counts["lemma33"] += r33.checked
            counts["hypothesis_met"] += r33.details.get("hypothesis_met", 0)
            for rep in (r32, r31, r33):
                if not rep.passed:
                    bad.append((rep.name, variant.meta, rep.witness))
    ok = not bad and counts["hypothesis_met"] > 0
    record(6, ok, ", ".join(f"{k}={v}" for k, v in counts.items()) + f", violations={len(bad)}")
    assert not bad, bad[:3]
    assert counts["hypothesis_met"] > 0


def test_subadditive_family(record):
    inst = gen_subadditive_lb(16, seed=0)
    sub = check_class(inst.f, "subadditive")
    g_T, other, n_opt = enumerate_other_max(inst)
    sandwich = check_sandwich(inst)
    opt = brute_force_opt(inst)
    fam = lb_family_report(inst)
    ok = (sub.passed and g_T == F(63, 16) and other == F(27, 8) and other <= 5 and n_opt == 1
          and sandwich.passed and sandwich.details["factor"] == 1 + F(3, 7)
          and opt.S_star == inst.f.bump_set and opt.g_star == g_T
          and fam.details["max_other"] == other)
    record(7, ok, f"subadditive over {sub.checked} disjoint pairs, g_T(T)={g_T}, "
                  f"max other={other}, optima={n_opt}, sandwich factor {sandwich.details.get('factor')}")
    assert ok


def test_xos_family(record):
    small = gen_xos_lb(10, seed=0)
    support10 = check_class(small.f, "xos-supported")
    clauses = xos_lb_clauses(10, small.f.bump_set)
    agree = all(small.f(from_mask(m)) == clauses(from_mask(m)) for m in range(1 << 10))
    rep10 = lb_family_report(small)
    g10, other10, _ = enumerate_other_max(small)
    consistent10 = g10 == rep10.details["g_T"] and other10 == rep10.details["max_other"]

    n = 100
    big = gen_xos_lb(n, seed=0)
    support100 = check_xos_lb_clauses(n, big.f.bump_set)
    rep100 = lb_family_report(big)
    g_T = principal_utility(big, big.f.bump_set)
    per_card = rep100.details["per_cardinality"]
    worst = max(per_card.values())
    ok = (support10.passed and agree and consistent10 and support100.passed
          and g_T == (F(5, 2) + F(5, n)) / 2 and g_T >= F(5, 4) and worst <= F(11, 10))
    record(8, ok, f"n=10 support over {support10.checked} sets, n=10 max other={float(other10):.4f}; "
                  f"n=100 g_T(T)={g_T}, max per-cardinality other={float(worst):.4f} "
                  f"at |S|={max(per_card, key=per_card.get)}")
    assert ok


def test_bench_determinism(record, tmp_path):
    config = BenchConfig(families=("random-additive", "random-coverage", "xos-lb"), sizes=(8,),
                         seeds=(0, 1, 2), algorithms=("brute", "xos", "submod", "single"))
    fam_fptas = BenchConfig(families=("random-additive",), sizes=(7,), seeds=(5, 6),
                            algorithms=("fptas",), epsilon=0.03)
    first = to_structured(run_bench(config)) + to_structured(run_bench(fam_fptas))
    second = to_structured(run_bench(config)) + to_structured(run_bench(fam_fptas))

    outs = []
    for workers in ("1", "3"):
        path = tmp_path / f"bench{workers}.json"
        env = dict(os.environ, MULTICONTRACT_WORKERS=workers)
        proc = subprocess.run([sys.executable, "-m", "multicontract.cli", "bench",
                               "--family", "random-coverage,random-xos_clauses", "--n", "7",
                               "--seeds", "0:4", "--alg", "xos,submod", "--format", "structured",
                               "--out", str(path)], env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    ok = first == second and outs[0] == outs[1]
    record(9, ok, f"in-process reports {len(first)} bytes identical={first == second}; "
                  f"CLI reports with 1 and 3 workers identical={outs[0] == outs[1]}")
    assert ok
