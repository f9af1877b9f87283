from fractions import Fraction

import pytest

from multicontract.additive import FptasGrid, build_dp, fptas_additive, partition_instance
from multicontract.contract import Instance
from multicontract.instances import gen_random
from multicontract.setfn import Additive, Coverage
from multicontract.verify import brute_force_opt

F = Fraction


def test_small_instance():
    inst = Instance(Additive((2, 1, 1)), (1, F(1, 5), F(1, 5)))
    rep = fptas_additive(inst, 0.1)
    assert rep.g >= F(9, 10) * F(6, 5)


def test_single_agent():
    inst = Instance(Additive((5,)), (1,))
    rep = fptas_additive(inst, 0.3)
    assert rep.S == frozenset({0}) and rep.g == 4


def test_partition_yes_instance_near_quarter():
    rep = fptas_additive(partition_instance([1, 1, 2]), 0.01)
    assert rep.g >= F(99, 100)


@pytest.mark.parametrize("weights,g_star", [([1, 1, 2], F(1)), ([1, 1, 1], F(2, 3)), ([2], F(0))])
def test_partition_optimum(weights, g_star):
    inst = partition_instance(weights)
    assert brute_force_opt(inst).g_star == g_star


def test_partition_costs():
    inst = partition_instance([1, 1, 2])
    assert inst.costs == (F(1, 4), F(1, 4), F(1))


def test_partition_rejects_bad_weights():
    with pytest.raises(ValueError):
        partition_instance([1, 0])
    with pytest.raises(ValueError):
        partition_instance([])


def test_non_additive_rejected():
    f = Coverage((frozenset({0}),), (1.0,))
    with pytest.raises(TypeError, match="fptas requires additive reward"):
        fptas_additive(Instance(f, (0.1,)), 0.1)


def test_epsilon_range():
    inst = Instance(Additive((1,)), (0,))
    for bad in (0, 1, -0.5):
        with pytest.raises(ValueError):
            fptas_additive(inst, bad)


def test_grid_is_exact():
    g = FptasGrid(F(1, 10), F(3), 4)
    assert g.unit == F(3, 40)
    assert g.top == 160
    assert g.units(F(1)) == 13


def test_dp_finds_cheapest_reaching_set():
    dp = build_dp([2, 3, 4], [0.5, 0.2, 0.4], 9)
    # reach 5 units: {0,1} costs 0.7, {1,2} costs 0.6
    assert dp.cost[-1, 5] == pytest.approx(0.6)
    assert dp.recover(5) == [1, 2]


def test_zero_value_agents_are_skipped():
    inst = Instance(Additive((0, 2)), (0, F(1, 2)))
    rep = fptas_additive(inst, 0.1)
    assert rep.S == frozenset({1})


@pytest.mark.parametrize("seed", range(10))
def test_guarantee_random(seed):
    inst = gen_random("additive", 8, seed)
    opt = brute_force_opt(inst)
    for eps in (0.3, 0.05):
        assert fptas_additive(inst, eps).g >= (1 - eps) * opt.g_star - 1e-12
