"""Domain types: construction, validation invariants, rate/payoff evaluation."""

import numpy as np
import pytest

from qtsm.errors import DimensionError, ExponentOverflowError
from qtsm.model import (
    FactorModel,
    QuadraticPayoff,
    QuadraticRate,
    TimeGrid,
    eval_payoff,
    eval_short_rate,
    unit_payoff,
    validate_model,
)


def simple_model(n=1):
    return FactorModel(
        A=-0.5 * np.eye(n), B=0.02 * np.ones(n),
        sigma=0.1 * np.eye(n), x0=0.1 * np.ones(n),
    )


def test_factor_model_shapes_and_n():
    m = FactorModel(A=[[-1.0, 0.2], [0.0, -0.5]], B=[0.1, 0.0],
                    sigma=[[0.1, 0.0], [0.05, 0.2]], x0=[0.0, 0.0])
    assert m.n == 2
    assert m.A.shape == (2, 2)
    assert np.allclose(m.sigma_sq, m.sigma @ m.sigma.T)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        FactorModel(A=[[-1.0]], B=[0.1, 0.2], sigma=[[0.1]], x0=[0.0])
    with pytest.raises(DimensionError):
        validate_model(simple_model(1), QuadraticRate(Gamma=np.eye(2), Rvec=[0, 0], k=0.0))


def test_non_finite_entries_rejected():
    with pytest.raises(DimensionError):
        FactorModel(A=[[np.nan]], B=[0.0], sigma=[[0.1]], x0=[0.0])


def test_gamma_psd_check():
    good = QuadraticRate(Gamma=[[1.0]], Rvec=[0.0], k=0.0)
    bad = QuadraticRate(Gamma=[[-1.0]], Rvec=[0.0], k=0.0)
    assert validate_model(simple_model(), good).ok
    report = validate_model(simple_model(), bad)
    assert not report.ok
    assert any("Gamma" in f for f in report.failures())


def test_strict_rate_boundary():
    # r(x) = x^2 + x + k >= 0 for all x iff k >= 1/4.
    at_bound = QuadraticRate(Gamma=[[1.0]], Rvec=[1.0], k=0.25, strict=True)
    below = QuadraticRate(Gamma=[[1.0]], Rvec=[1.0], k=0.20, strict=True)
    assert validate_model(simple_model(), at_bound).ok
    assert not validate_model(simple_model(), below).ok


def test_strict_rate_range_condition():
    # Gamma = 0 but R != 0: R is outside the range of Gamma, so r is unbounded below.
    out_of_range = QuadraticRate(Gamma=[[0.0]], Rvec=[1.0], k=5.0, strict=True)
    report = validate_model(simple_model(), out_of_range)
    assert not report.ok


def test_strict_rate_is_nonnegative_property():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(2, 2))
    rate = QuadraticRate(Gamma=M @ M.T + 0.1 * np.eye(2),
                         Rvec=rng.normal(size=2), k=5.0, strict=True)
    model = FactorModel(A=-np.eye(2), B=np.zeros(2), sigma=0.1 * np.eye(2),
                        x0=np.zeros(2))
    assert validate_model(model, rate).ok
    xs = rng.normal(scale=10.0, size=(10_000, 2))
    values = [eval_short_rate(rate, x) for x in xs]
    assert min(values) >= 0.0


def test_payoff_nsd_check():
    good = QuadraticPayoff(aT=[[-1.0]], bT=[0.0], cT=0.0)
    bad = QuadraticPayoff(aT=[[1.0]], bT=[0.0], cT=0.0)
    rate = QuadraticRate(Gamma=[[1.0]], Rvec=[0.0], k=0.0)
    assert validate_model(simple_model(), rate, good).ok
    assert not validate_model(simple_model(), rate, bad).ok


def test_eval_short_rate_and_payoff_values():
    rate = QuadraticRate(Gamma=[[2.0]], Rvec=[3.0], k=0.5)
    assert eval_short_rate(rate, [2.0]) == pytest.approx(2 * 4 + 3 * 2 + 0.5)
    payoff = QuadraticPayoff(aT=[[-1.0]], bT=[1.0], cT=0.25)
    assert eval_payoff(payoff, [0.5]) == pytest.approx(np.exp(-0.25 + 0.5 + 0.25))


def test_unit_payoff_is_identically_one():
    payoff = unit_payoff(3)
    rng = np.random.default_rng(1)
    for x in rng.normal(size=(20, 3)):
        assert eval_payoff(payoff, x) == 1.0


def test_payoff_exponent_guard():
    payoff = QuadraticPayoff(aT=[[0.0]], bT=[1.0], cT=0.0)
    with pytest.raises(ExponentOverflowError):
        eval_payoff(payoff, [400.0])


def test_time_grid():
    g = TimeGrid(T=2.0, N=4)
    assert g.h == pytest.approx(0.5)
    assert np.allclose(g.times(), [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(DimensionError):
        TimeGrid(T=1.0, N=3)
    with pytest.raises(DimensionError):
        TimeGrid(T=0.0, N=4)
