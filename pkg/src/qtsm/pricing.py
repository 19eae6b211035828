"""Closed-form bond, futures, and forward prices.

Each product is one instantiation of the generic Riccati system; prices are
exponential-quadratic in the factor state,

    bond     P(t,T) = exp(x' R2(t) x + R1(t) x + R0(t))
    futures  G(t,T) = exp(x' R2g(t) x + R1g(t) x + R0g(t))
    forward  F(t,T) = numerator(t, x) / P(t, x)

where the forward numerator solves the combined system (Upsilon=Gamma,
Theta=aT, Psi=R, theta=bT, k=k, cT=cT).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import riccati
from .errors import DimensionError, ExponentOverflowError, InvariantError
from .model import EXP_GUARD, TimeGrid, validate_model

# Default grid keeps h <= 5e-3 so quadrature and interpolation errors sit
# well below the 1e-6 cross-check tolerances.
DEFAULT_H_MAX = 5e-3
DEFAULT_MIN_STEPS = 200


def default_grid(T, h_max=DEFAULT_H_MAX):
    """Even step count N = max(200, ceil(T / h_max)), rounded up to even."""
    N = max(DEFAULT_MIN_STEPS, math.ceil(T / h_max))
    if N % 2:
        N += 1
    return TimeGrid(T=T, N=N)


@dataclass(frozen=True, eq=False)
class PricedSystem:
    """A solved coefficient path together with the inputs that produced it."""

    product: str
    path: riccati.CoefficientPath
    model: object
    rate: object = None
    payoff: object = None


def _require(report):
    if not report.ok:
        raise InvariantError(report.failures())


def bond_system(model, rate, grid):
    """Solve the bond system: Upsilon=Gamma, Theta=0, Psi=R, theta=0, cT=0."""
    _require(validate_model(model, rate))
    n = model.n
    problem = riccati.RiccatiProblem(
        model=model,
        Upsilon=rate.Gamma,
        Theta=np.zeros((n, n)),
        Psi=rate.Rvec,
        theta=np.zeros(n),
        k=rate.k,
        cT=0.0,
        grid=grid,
    )
    return PricedSystem("bond", riccati.solve(problem, "bond"), model, rate=rate)


def futures_system(model, payoff, grid):
    """Solve the futures system: Upsilon=0, Theta=aT, Psi=0, theta=bT, k=0."""
    if payoff.n != model.n:
        raise DimensionError(f"payoff dimension {payoff.n} != model dimension {model.n}")
    a_sym = 0.5 * (payoff.aT + payoff.aT.T)
    eigs = np.linalg.eigvalsh(a_sym)
    if eigs.max() > 1e-10 * (1.0 + np.linalg.norm(a_sym, 2)):
        raise InvariantError(["payoff.aT is not negative semidefinite"])
    n = model.n
    problem = riccati.RiccatiProblem(
        model=model,
        Upsilon=np.zeros((n, n)),
        Theta=payoff.aT,
        Psi=np.zeros(n),
        theta=payoff.bT,
        k=0.0,
        cT=payoff.cT,
        grid=grid,
    )
    return PricedSystem("futures", riccati.solve(problem, "futures"), model, payoff=payoff)


def forward_system(model, rate, payoff, grid):
    """Solve the forward-numerator system: Upsilon=Gamma, Theta=aT, Psi=R, theta=bT."""
    _require(validate_model(model, rate, payoff))
    problem = riccati.RiccatiProblem(
        model=model,
        Upsilon=rate.Gamma,
        Theta=payoff.aT,
        Psi=rate.Rvec,
        theta=payoff.bT,
        k=rate.k,
        cT=payoff.cT,
        grid=grid,
    )
    return PricedSystem("forward", riccati.solve(problem, "forward"), model, rate=rate, payoff=payoff)


def quadratic_exponent(system, t, x):
    """x' R2(t) x + R1(t) x + R0(t), interpolated between grid nodes."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (system.model.n,):
        raise DimensionError(f"state must have length {system.model.n}, got {x.shape}")
    R2, R1, R0 = system.path.interpolate(t)
    return float(x @ R2 @ x + R1 @ x + R0)


def price(system, t, x, bond=None):
    """Price of the system's product at time t in state x.

    Forward prices are a ratio of two solved systems, so the forward case
    requires the matching ``bond`` system on the same maturity.
    """
    expo = quadratic_exponent(system, t, x)
    if system.product == "forward":
        if bond is None or bond.product != "bond":
            raise ValueError("forward price requires the matching bond system")
        expo -= quadratic_exponent(bond, t, x)
    if abs(expo) > EXP_GUARD:
        raise ExponentOverflowError(expo, EXP_GUARD)
    return float(np.exp(expo))


def yield_curve(model, rate, x, maturities, h_max=DEFAULT_H_MAX):
    """Zero-coupon yields y(T) = -log P(0, T) / T at state x.

    ``maturities`` must be positive and sorted ascending.  One bond system is
    solved per maturity (results keyed by maturity, so per-maturity solves
    could run concurrently without changing the output).
    """
    maturities = [float(T) for T in maturities]
    if any(T <= 0 for T in maturities):
        raise ValueError("maturities must be positive")
    if maturities != sorted(maturities):
        raise ValueError("maturities must be sorted ascending")
    out = []
    for T in maturities:
        system = bond_system(model, rate, default_grid(T, h_max))
        p = price(system, 0.0, x)
        out.append((T, -math.log(p) / T))
    return out
