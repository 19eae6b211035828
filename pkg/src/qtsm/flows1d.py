"""Closed-form one-dimensional bond price from the stochastic-flow derivation.

For the scalar factor dX = beta (alpha - X) dt + sigma dW with short rate
r(x) = c x^2 + b x + a, the bond price is

    P(t, T, x) = exp( (1/2) A(tau) x^2 + B(tau) x + C(tau) ),   tau = T - t,

with eta = sqrt(beta^2 + 2 c sigma^2) and explicit A, B, C below.  This is
an independent analytic oracle for the matrix Riccati pipeline under the
mapping A_matrix = -beta, B_vec = beta*alpha, Gamma = c, R = b, k = a
(note R2 = A/2).

The derivative of the flow with respect to the initial state is the
deterministic exponential D_ts = exp(-beta (s - t)); the conditional
expectation g(t, s, x) = E_T[X_s D_ts | X_t = x] solves a linear
second-order ODE whose closed form is evaluated by :func:`flow_g`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExponentOverflowError, InvariantError

# Graceful failure instead of silent infinity.
EXP_GUARD = 300.0


def _guarded_exp(e):
    if abs(e) > EXP_GUARD:
        raise ExponentOverflowError(e, EXP_GUARD)
    return math.exp(e)


@dataclass(frozen=True)
class FlowParams:
    """Scalar model parameters: dX = beta (alpha - X) dt + sigma dW, r = c x^2 + b x + a."""

    alpha: float
    beta: float
    sigma: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.beta > 0:
            raise InvariantError([f"beta must be positive, got {self.beta}"])
        if self.c < 0:
            raise InvariantError([f"c must be nonnegative, got {self.c}"])

    @property
    def eta(self):
        return math.sqrt(self.beta**2 + 2.0 * self.c * self.sigma**2)


def coeff_A(tau, p):
    """A(tau) = 2c (e^{2 eta tau} - 1) / (beta - eta + (-beta - eta) e^{2 eta tau})."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if p.c == 0.0:
        return 0.0
    beta, eta = p.beta, p.eta
    e2 = _guarded_exp(2.0 * eta * tau)
    return 2.0 * p.c * (e2 - 1.0) / (beta - eta + (-beta - eta) * e2)


def coeff_B(tau, p):
    """The linear coefficient B(tau) of the flows bond price.

    For sigma = 0 the printed expression is 0/0; the exact limit (the linear
    ODE dB/dtau = -beta B + beta alpha A(tau) - b integrated in closed form)
    is used instead.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    alpha, beta, sigma, b, c = p.alpha, p.beta, p.sigma, p.b, p.c
    if sigma == 0.0:
        eb = _guarded_exp(-beta * tau)
        return ((-c * alpha - b) * (1.0 - eb) + c * alpha * (eb - eb * eb)) / beta
    eta = p.eta
    e2 = _guarded_exp(2.0 * eta * tau)
    e1 = _guarded_exp(eta * tau)
    P = b * sigma**2 - alpha * beta**2
    num = (
        (alpha * beta + P * beta / eta**2) * ((-beta - eta) * (e2 - 1.0) - 2.0 * eta)
        + (P * (beta**2 - eta**2) / eta**2) * (e2 - 1.0)
        + 2.0 * eta * e1 * (b * sigma**2 * eta**2 - 2.0 * c * sigma**2 * P) / (beta * eta**2)
    )
    den = sigma**2 * ((beta + eta) * (e2 - 1.0) + 2.0 * eta)
    return num / den


def coeff_C(tau, p):
    """The constant term C(tau) of the flows bond price (C(0) = 0)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    alpha, beta, sigma, a, b, c = p.alpha, p.beta, p.sigma, p.a, p.b, p.c
    eta = p.eta
    e2 = _guarded_exp(2.0 * eta * tau)
    e1 = _guarded_exp(eta * tau)
    P = b * sigma**2 - alpha * beta**2
    K = b + 2.0 * c * alpha
    den2 = (beta + eta) * e2 + eta - beta

    term_lin = (b**2 * sigma**2 - 2.0 * alpha * beta**2 * b - 2.0 * alpha**2 * beta**2 * c) / (
        2.0 * eta**2
    ) * tau
    # log argument = 2 eta e^{(eta+beta) tau} / den2; evaluate via exponent
    # subtraction so large eta*tau does not overflow.
    term_log = 0.5 * (
        math.log(2.0 * eta) + (eta + beta) * tau - math.log(den2)
    )
    term_frac = (
        2.0 * c * P**2 + 2.0 * beta * K * P * (beta + eta) * e1 - beta**2 * sigma**2 * K**2
    ) / (eta**3 * (beta + eta) * den2)
    term_const = (
        beta**2 * sigma**2 * K**2 - 2.0 * c * P**2 - 2.0 * beta * K * P * (beta + eta)
    ) / (2.0 * eta**4 * (beta + eta))
    return term_lin + term_log + term_frac + term_const - a * tau


def bond_price_1d(t, T, x, p):
    """P(t, T, x) = exp((1/2) A(tau) x^2 + B(tau) x + C(tau)), tau = T - t."""
    if not 0.0 <= t <= T:
        raise ValueError(f"need 0 <= t <= T, got t={t}, T={T}")
    tau = T - t
    expo = 0.5 * coeff_A(tau, p) * x**2 + coeff_B(tau, p) * x + coeff_C(tau, p)
    return _guarded_exp(expo)


def _g_particular(p):
    return (p.b * p.sigma**2 - p.alpha * p.beta**2) / (-p.beta**2 - 2.0 * p.c * p.sigma**2)


def flow_g(t, s, x, p, T):
    """g(t, s, x) = E_T[X_s^{t,x} D_ts]: closed form of the flow-expectation ODE.

    g solves g'' = -alpha beta^2 e^{-beta(s-t)} - 2 beta g' + b sigma^2
    e^{-beta(s-t)} + 2 c sigma^2 g with g(t,t,x) = x and an integral
    first-derivative boundary condition at s = t.
    """
    if not t <= s <= T:
        raise ValueError(f"need t <= s <= T, got t={t}, s={s}, T={T}")
    alpha, beta, sigma, b, c = p.alpha, p.beta, p.sigma, p.b, p.c
    eta = p.eta
    P = b * sigma**2 - alpha * beta**2
    part = _g_particular(p)

    # Common numerator pieces of c1(x), c2(x).
    if beta * (T - t) > EXP_GUARD:
        raise ExponentOverflowError(beta * (T - t), EXP_GUARD)
    ebt = math.exp(-beta * (T - t))
    head = alpha * beta + (sigma**2 * b * eta**2 - 2.0 * c * sigma**2 * P) / (
        beta * eta**2
    ) * (ebt - 1.0) + P * beta / eta**2

    # c1(x) e^{(-beta+eta)s} and c2(x) e^{(-beta-eta)s} with the e^{...T}
    # denominators folded into the exponents to avoid overflow.
    em = _guarded_exp((-beta - eta) * (T - t))
    ep = _guarded_exp((-beta + eta) * (T - t))
    num1 = head + x * (-beta + eta) * em + (P * (-beta + eta) / eta**2) * em
    den1 = beta + eta + (-beta + eta) * _guarded_exp(-2.0 * eta * (T - t))
    num2 = head + x * (-beta - eta) * ep + (P * (-beta - eta) / eta**2) * ep
    den2 = beta - eta + (-beta - eta) * _guarded_exp(2.0 * eta * (T - t))

    g1 = (num1 / den1) * _guarded_exp((-beta + eta) * (s - T))
    g2 = (num2 / den2) * _guarded_exp((-beta - eta) * (s - T))
    g3 = part * _guarded_exp(-beta * (s - t))
    return g1 + g2 + g3


def pde_residual(p, t, x, h, T):
    """Centered-difference residual of the pricing PDE at (t, x).

    Evaluates dP/dt + beta (alpha - x) dP/dx + (1/2) sigma^2 d2P/dx2
    - (c x^2 + b x + a) P on :func:`bond_price_1d`; zero up to O(h^2) plus
    the closed form's own error.
    """
    if not (h > 0 and t - h >= 0.0 and t + h <= T):
        raise ValueError("need h > 0 with t +/- h inside [0, T]")
    price = lambda tt, xx: bond_price_1d(tt, T, xx, p)
    p0 = price(t, x)
    dt = (price(t + h, x) - price(t - h, x)) / (2.0 * h)
    dx = (price(t, x + h) - price(t, x - h)) / (2.0 * h)
    dxx = (price(t, x + h) - 2.0 * p0 + price(t, x - h)) / h**2
    r = p.c * x**2 + p.b * x + p.a
    return dt + p.beta * (p.alpha - x) * dx + 0.5 * p.sigma**2 * dxx - r * p0


def to_factor_model(p, x0):
    """Map FlowParams to the matrix pipeline: A=-beta, B=beta*alpha, Gamma=c, R=b, k=a."""
    from .model import FactorModel, QuadraticRate

    model = FactorModel(
        A=[[-p.beta]], B=[p.beta * p.alpha], sigma=[[p.sigma]], x0=[x0]
    )
    rate = QuadraticRate(Gamma=[[p.c]], Rvec=[p.b], k=p.a)
    return model, rate
