"""Quadratic term-structure pricing toolkit.

Closed-form zero-coupon bond, futures, and forward prices in multifactor
Gaussian models with quadratic short rates, computed by solving the
associated matrix Riccati systems through a Hamiltonian linearization.
Independent verification comes from Monte Carlo simulation (with a direct
check of the associated forward-backward SDE) and from one-dimensional
closed-form stochastic-flow formulas.
"""

from .errors import (
    DimensionError,
    ExponentOverflowError,
    IllConditionedError,
    InvariantError,
    NumericalError,
    QtsmError,
)
from .flows1d import (
    FlowParams,
    bond_price_1d,
    coeff_A,
    coeff_B,
    coeff_C,
    flow_g,
    pde_residual,
    to_factor_model,
)
from .model import (
    FactorModel,
    QuadraticPayoff,
    QuadraticRate,
    TimeGrid,
    ValidationReport,
    eval_payoff,
    eval_short_rate,
    unit_payoff,
    validate_model,
)
from .montecarlo import (
    FbsdeReport,
    McEstimate,
    PathEnsemble,
    brownian_increments,
    coarsen_increments,
    fbsde_check,
    mc_bond,
    mc_discounted_payoff,
    mc_forward,
    mc_terminal_expectation,
    simulate_paths,
)
from .pricing import (
    PricedSystem,
    bond_system,
    default_grid,
    forward_system,
    futures_system,
    price,
    quadratic_exponent,
    yield_curve,
)
from .riccati import (
    CoefficientPath,
    HamiltonianState,
    RiccatiProblem,
    mat_exp,
    rk4_oracle,
    solve,
    solve_hamiltonian,
)

__version__ = "0.1.0"

__all__ = [
    "QtsmError", "DimensionError", "InvariantError", "NumericalError",
    "IllConditionedError", "ExponentOverflowError",
    "FactorModel", "QuadraticRate", "QuadraticPayoff", "TimeGrid",
    "ValidationReport", "validate_model", "eval_short_rate", "eval_payoff",
    "unit_payoff",
    "RiccatiProblem", "HamiltonianState", "CoefficientPath",
    "mat_exp", "solve", "solve_hamiltonian", "rk4_oracle",
    "PricedSystem", "default_grid", "bond_system", "futures_system",
    "forward_system", "price", "quadratic_exponent", "yield_curve",
    "FlowParams", "coeff_A", "coeff_B", "coeff_C", "bond_price_1d",
    "flow_g", "pde_residual", "to_factor_model",
    "PathEnsemble", "McEstimate", "FbsdeReport", "simulate_paths",
    "brownian_increments", "coarsen_increments", "mc_bond",
    "mc_terminal_expectation", "mc_discounted_payoff", "mc_forward",
    "fbsde_check",
]
