from fractions import Fraction

import pytest

from multicontract.approx import ScalingParams
from multicontract.contract import Instance, principal_utility
from multicontract.instances import gen_random, gen_subadditive_lb, gen_xos_lb
from multicontract.setfn import (
    Additive,
    SymmetricTable,
    Table,
    UnsupportedQuery,
    approx_demand_submodular,
)
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
    symmetry_classes,
)

F = Fraction


def test_brute_force_additive():
    inst = Instance(Additive((2, 1, 1)), (1, F(1, 5), F(1, 5)))
    opt = brute_force_opt(inst)
    assert opt.S_star == frozenset({1, 2})
    assert opt.g_star == F(6, 5)
    assert opt.evaluations == 8


def test_brute_force_zero_costs_takes_everyone():
    inst = Instance(Additive((1, 2, 3)), (0, 0, 0))
    opt = brute_force_opt(inst)
    assert opt.S_star == frozenset({0, 1, 2}) and opt.g_star == 6


def test_brute_force_float_path_matches_exact():
    inst = gen_random("coverage", 9, 4)
    opt = brute_force_opt(inst)
    assert opt.g_star == principal_utility(inst, opt.S_star)


def test_brute_force_cap():
    inst = gen_random("additive", 25, 0)
    with pytest.raises(UnsupportedQuery):
        brute_force_opt(inst)


def test_bumped_brute_force_matches_full_enumeration():
    inst = gen_subadditive_lb(16, seed=3)
    opt = brute_force_opt(inst)
    assert opt.S_star == inst.f.bump_set
    assert opt.g_star == F(63, 16)
    g_T, other, n_opt = enumerate_other_max(inst)
    assert (g_T, other, n_opt) == (F(63, 16), F(27, 8), 1)


def test_symmetric_brute_force_any_n():
    inst = gen_subadditive_lb(400, seed=0)
    opt = brute_force_opt(inst)
    assert opt.S_star == inst.f.bump_set
    assert opt.evaluations < 1000


def test_symmetry_class_representatives_cover_patterns():
    f = gen_xos_lb(6, T_star=[1, 2, 4, 5]).f
    labels = [(label, len(S)) for label, S in symmetry_classes(f)]
    assert ("bump", 4) in labels and ("bump+1", 5) in labels
    assert all(("generic", k) in labels for k in range(7))
    small = gen_xos_lb(4, T_star=[0, 1, 3]).f
    labels = [(label, len(S)) for label, S in symmetry_classes(small)]
    # every 4-set contains T plus one agent
    assert ("generic", 4) not in labels and ("bump+1", 4) in labels


def test_class_subadditive_family():
    f = gen_subadditive_lb(16, seed=0).f
    assert check_class(f, "subadditive").passed
    rep = check_class(f, "submodular")
    assert not rep.passed
    i, S, S2 = rep.witness
    assert f(S | {i}) - f(S) < f(S2 | {i}) - f(S2)


def test_class_additive_passes_everything():
    f = Additive((F(1, 2), 2, 0, 3))
    for cls in ("monotone", "subadditive", "submodular", "xos-supported"):
        assert check_class(f, cls).passed


def test_class_xos_family_clause_support():
    assert check_class(gen_xos_lb(10, seed=1).f, "xos-supported").passed


def test_class_coverage_submodular():
    assert check_class(gen_random("coverage", 10, 7).f, "submodular").passed


def test_class_negative_controls():
    table = Table((0, 1, 1, 3))
    rep = check_class(table, "subadditive")
    assert not rep.passed
    a, b = rep.witness
    assert table(a) + table(b) < table(a | b)
    dip = SymmetricTable((0, 2, 1))
    mono = check_class(dip, "monotone")
    assert not mono.passed


def test_class_unknown_and_capped():
    with pytest.raises(ValueError):
        check_class(Additive((1,)), "fractionally-subadditive")
    with pytest.raises(UnsupportedQuery):
        check_class(gen_random("additive", 17, 0).f, "monotone")


def test_lemma_marginals_additive_and_coverage():
    assert check_lemma_marginals(Additive((1, 2, 3))).passed
    assert check_lemma_marginals(gen_random("coverage", 10, 7)).passed


def test_lemma_marginals_supermodular_control():
    rep = check_lemma_marginals(Table((0, 1, 1, 3)))
    assert not rep.passed
    S, T = rep.witness
    assert S <= T


def test_lemma_marginals_sampled_path():
    rep = check_lemma_marginals(gen_random("xos_clauses", 14, 2), trials=300, seed=1)
    assert rep.passed and rep.checked == 300


def test_scaling_checker():
    f = Additive((4, 3, 2, 1))
    params = ScalingParams(5, F(1, 2))
    assert check_scaling_output(f, range(4), params, {1, 2, 3}).passed
    low = check_scaling_output(f, range(4), params, ())
    assert not low.passed and "lower" in low.witness
    high = check_scaling_output(f, range(4), ScalingParams(1, F(1, 2)), range(4))
    assert not high.passed and "upper" in high.witness


def test_lemma_sqrt_costs_and_decomposition():
    inst = gen_random("xos_clauses", 10, 5)
    opt = brute_force_opt(inst)
    assert check_lemma_sqrt_costs(inst, opt).passed
    assert check_lemma_decomposition(inst, opt).passed


def test_lemma_half_value_non_vacuous():
    inst = Instance(Additive((1, 1, 2)), (F(1, 100),) * 3)
    rep = check_lemma_half_value(inst)
    assert rep.passed and rep.details["hypothesis_met"] == 7


def test_approx_demand_checker():
    f = Additive((4, 3, 2))
    p = (1, 1, 3)
    assert check_approx_demand(f, p, approx_demand_submodular(f, p)).passed
    assert not check_approx_demand(f, p, {2}).passed


def test_subadditive_family_report():
    rep = lb_family_report(gen_subadditive_lb(16, seed=0))
    assert rep.passed
    d = rep.details
    assert d["g_T"] == F(63, 16) and d["max_other"] == F(27, 8) and d["unique_optimum"]
    assert check_sandwich(gen_subadditive_lb(16)).details["factor"] == F(10, 7)


def test_xos_family_report_at_100():
    inst = gen_xos_lb(100, seed=0)
    rep = lb_family_report(inst)
    assert rep.passed
    assert rep.details["g_T"] == F(51, 40)
    assert check_xos_lb_clauses(100, inst.f.bump_set).passed


def test_xos_family_half_size_value():
    # |S| = 50 away from the bump set
    inst = gen_xos_lb(100, T_star=range(51))
    S = set(range(50, 100))
    assert principal_utility(inst, S) == F(70, 153)
