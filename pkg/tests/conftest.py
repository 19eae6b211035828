"""Shared helpers for the test suite."""

import numpy as np

from qtsm.model import FactorModel, TimeGrid
from qtsm.riccati import RiccatiProblem


def random_problem(rng, n=None, T=None, N=None, sigma_scale=0.2):
    """A well-posed random Riccati instance: sym(Upsilon) psd, sym(Theta) nsd.

    Drift matrices are shifted to be comfortably stable so random instances
    stay far from the X(t) conditioning gate.
    """
    if n is None:
        n = int(rng.integers(1, 5))
    if T is None:
        T = float(rng.uniform(0.5, 2.0))
    A = rng.normal(scale=0.5, size=(n, n)) - (0.8 + n * 0.2) * np.eye(n)
    model = FactorModel(
        A=A,
        B=rng.normal(scale=0.05, size=n),
        sigma=sigma_scale * rng.normal(size=(n, n)),
        x0=rng.normal(scale=0.2, size=n),
    )
    M = rng.normal(scale=0.6, size=(n, n))
    K = rng.normal(scale=0.3, size=(n, n))
    Upsilon = M @ M.T + (K - K.T)  # psd symmetric part + skew part
    M2 = rng.normal(scale=0.4, size=(n, n))
    K2 = rng.normal(scale=0.2, size=(n, n))
    Theta = -(M2 @ M2.T) + (K2 - K2.T)
    if N is None:
        N = max(200, 2 * int(np.ceil(T / 0.01)))  # h <= 5e-3
    return RiccatiProblem(
        model=model,
        Upsilon=Upsilon,
        Theta=Theta,
        Psi=rng.normal(scale=0.3, size=n),
        theta=rng.normal(scale=0.3, size=n),
        k=float(rng.uniform(0.0, 0.1)),
        cT=float(rng.normal(scale=0.2)),
        grid=TimeGrid(T=T, N=N),
    )
