import math
from fractions import Fraction

import pytest

from multicontract.contract import (
    Contract,
    Instance,
    best_single_agent,
    incentive_alphas,
    is_equilibrium,
    principal_utility,
)
from multicontract.instances import gen_subadditive_lb
from multicontract.setfn import Additive, Coverage, SymmetricTable

F = Fraction


def add3():
    return Instance(Additive((2, 1, 1)), (1, F(1, 5), F(1, 5)))


def test_utility_of_empty_set():
    assert principal_utility(add3(), ()) == 0


def test_utility_additive():
    assert principal_utility(add3(), {1, 2}) == F(6, 5)


def test_utility_subadditive_family_on_bump_set():
    inst = gen_subadditive_lb(16, T_star=range(9))
    assert principal_utility(inst, range(9)) == F(63, 16)


def test_zero_marginal_with_positive_cost_is_unincentivizable():
    # agent 1 adds nothing on top of agent 0
    f = Coverage((frozenset({0}), frozenset({0})), (1.0,))
    inst = Instance(f, (0.1, 0.1))
    assert principal_utility(inst, {0, 1}) == -math.inf
    assert not incentive_alphas(inst, {0, 1}).feasible


def test_zero_marginal_with_zero_cost_is_free():
    f = Coverage((frozenset({0, 1}), frozenset({0})), (1.0, 1.0))
    inst = Instance(f, (0.1, 0.0))
    assert principal_utility(inst, {0, 1}) == pytest.approx(1.8)


def test_alphas():
    inst = Instance(Additive((2, 1)), (1, F(1, 5)))
    assert incentive_alphas(inst, {0, 1}).alpha == (F(1, 2), F(1, 5))
    free = Instance(Additive((2, 1)), (0, 0))
    assert incentive_alphas(free, {0, 1}).alpha == (0, 0)
    sub = gen_subadditive_lb(16, T_star=range(9))
    alpha = incentive_alphas(sub, range(9)).alpha
    assert all(alpha[i] == F(1, 16) for i in range(9))


def test_equilibrium_tight_contract():
    inst = Instance(Additive((2, 1)), (1, F(1, 5)))
    assert is_equilibrium(inst, Contract((F(1, 2), F(1, 5)), frozenset({0, 1})))


def test_equilibrium_violated():
    inst = Instance(Additive((2, 1)), (1, F(1, 5)))
    assert not is_equilibrium(inst, Contract((F(2, 5), F(1, 5)), frozenset({0, 1})))


def test_equilibrium_nobody_works():
    inst = Instance(Additive((2, 1)), (1, F(1, 5)))
    assert is_equilibrium(inst, Contract((0, 0), frozenset()))


def test_best_single_agent():
    assert best_single_agent(add3()) == (frozenset({0}), 1)
    sub = gen_subadditive_lb(16)
    assert best_single_agent(sub) == (frozenset({0}), F(27, 8))


def test_best_single_agent_all_too_expensive():
    inst = Instance(Additive((1, 1)), (2, 3))
    assert best_single_agent(inst) == (frozenset(), 0)


def test_float_equilibrium_uses_tolerance():
    f = SymmetricTable((0, 0.3, 0.5))
    inst = Instance(f, (0.01, 0.02))
    con = incentive_alphas(inst, {0, 1})
    assert is_equilibrium(inst, con)


def test_integer_inputs_stay_exact():
    inst = Instance(Additive((2, 1)), (1, 1))
    g = principal_utility(inst, {0})
    assert g == 1 and not isinstance(g, float)
    assert incentive_alphas(inst, {0}).alpha[0] == F(1, 2)
