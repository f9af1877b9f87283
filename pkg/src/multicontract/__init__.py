"""Linear contracts for teams of agents with complement-free rewards."""
from .additive import fptas_additive, partition_instance
from .approx import (
    MainParams,
    ScalingParams,
    approx_contract_submodular,
    approx_contract_xos,
    contract_from_estimate,
    estimate_params,
    scale_set,
)
from .contract import (
    Contract,
    Instance,
    SolveReport,
    best_single_agent,
    incentive_alphas,
    is_equilibrium,
    principal_utility,
)
from .setfn import (
    Additive,
    BumpedSymmetric,
    Coverage,
    QueryCounter,
    SymmetricTable,
    Table,
    XosClauses,
    approx_demand_submodular,
    exact_demand,
    marginal,
    value,
)
from .verify import brute_force_opt, check_class

__all__ = [
    "Additive", "BumpedSymmetric", "Contract", "Coverage", "Instance", "MainParams",
    "QueryCounter", "ScalingParams", "SolveReport", "SymmetricTable", "Table", "XosClauses",
    "approx_contract_submodular", "approx_contract_xos", "approx_demand_submodular",
    "best_single_agent", "brute_force_opt", "check_class", "contract_from_estimate",
    "estimate_params", "exact_demand", "fptas_additive", "incentive_alphas", "is_equilibrium",
    "marginal", "partition_instance", "principal_utility", "scale_set", "value",
]
