"""Domain types for the Gaussian factor model, quadratic short rate, and payoff.

The factor process is the n-dimensional Gaussian SDE

    dX_t = (A X_t + B) dt + sigma dW_t,    X_0 = x0,

the short rate is the quadratic form

    r(x) = x' Gamma x + R x + k,

and the terminal payoff of the risky asset is exponential-quadratic,

    S(T, x) = exp(x' aT x + bT x + cT).

With Gamma positive semidefinite and k >= (1/4) R Gamma^+ R' (and R in the
range of the symmetric part of Gamma) the short rate is nonnegative for all
states; that stricter condition is optional and checked only when
``strict=True``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ExponentOverflowError

# Scale-invariant tolerance for eigenvalue sign checks and range tests.
TOL_PSD_BASE = 1e-10

# Exponents beyond this raise instead of silently producing inf.
EXP_GUARD = 300.0


def _as_matrix(value, n, name):
    m = np.asarray(value, dtype=float)
    if m.shape != (n, n):
        raise DimensionError(f"{name} must be {n}x{n}, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} contains non-finite entries")
    return m


def _as_vector(value, n, name):
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise DimensionError(f"{name} must have length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DimensionError(f"{name} contains non-finite entries")
    return v


def tol_psd(matrix):
    """Tolerance used for semidefiniteness checks: scales with the 2-norm."""
    return TOL_PSD_BASE * (1.0 + np.linalg.norm(matrix, 2))


def sym(matrix):
    """Symmetric part (M + M') / 2."""
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True)
class FactorModel:
    """Parameters of the Gaussian factor SDE dX = (A X + B) dt + sigma dW."""

    A: np.ndarray
    B: np.ndarray
    sigma: np.ndarray
    x0: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "A", _as_matrix(A, n, "A"))
        object.__setattr__(self, "B", _as_vector(self.B, n, "B"))
        object.__setattr__(self, "sigma", _as_matrix(np.atleast_2d(np.asarray(self.sigma, dtype=float)), n, "sigma"))
        object.__setattr__(self, "x0", _as_vector(self.x0, n, "x0"))

    @property
    def sigma_sq(self):
        """Diffusion outer product sigma sigma'."""
        return self.sigma @ self.sigma.T


@dataclass(frozen=True)
class QuadraticRate:
    """Short-rate coefficients r(x) = x' Gamma x + R x + k."""

    Gamma: np.ndarray
    Rvec: np.ndarray
    k: float
    strict: bool = False

    def __post_init__(self):
        Gamma = np.atleast_2d(np.asarray(self.Gamma, dtype=float))
        n = Gamma.shape[0]
        object.__setattr__(self, "Gamma", _as_matrix(Gamma, n, "Gamma"))
        object.__setattr__(self, "Rvec", _as_vector(self.Rvec, n, "Rvec"))
        object.__setattr__(self, "k", float(self.k))

    @property
    def n(self):
        return self.Gamma.shape[0]


@dataclass(frozen=True)
class QuadraticPayoff:
    """Terminal payoff coefficients S(T, x) = exp(x' aT x + bT x + cT)."""

    aT: np.ndarray
    bT: np.ndarray
    cT: float

    def __post_init__(self):
        aT = np.atleast_2d(np.asarray(self.aT, dtype=float))
        n = aT.shape[0]
        object.__setattr__(self, "aT", _as_matrix(aT, n, "aT"))
        object.__setattr__(self, "bT", _as_vector(self.bT, n, "bT"))
        object.__setattr__(self, "cT", float(self.cT))

    @property
    def n(self):
        return self.aT.shape[0]


UNIT_PAYOFF_CT = 0.0


def unit_payoff(n):
    """Payoff identically 1 (aT = 0, bT = 0, cT = 0)."""
    return QuadraticPayoff(np.zeros((n, n)), np.zeros(n), UNIT_PAYOFF_CT)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i*h on [0, T] with an even number of steps N."""

    T: float
    N: int

    def __post_init__(self):
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "N", int(self.N))
        if self.N < 2 or self.N % 2 != 0:
            raise DimensionError(f"N must be even and >= 2, got {self.N}")
        if not (self.T > 0 and np.isfinite(self.T)):
            raise DimensionError(f"T must be positive and finite, got {self.T}")

    @property
    def h(self):
        return self.T / self.N

    def times(self):
        return np.linspace(0.0, self.T, self.N + 1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [f"{c.name}: {c.detail}" for c in self.checks if not c.passed]


def validate_model(model, rate, payoff=None):
    """Check every invariant the pricing formulas require.

    Dimension mismatches raise :class:`DimensionError`; invariant violations
    are reported item by item so the caller can decide what to do.
    """
    if rate.n != model.n:
        raise DimensionError(f"rate dimension {rate.n} != model dimension {model.n}")
    if payoff is not None and payoff.n != model.n:
        raise DimensionError(f"payoff dimension {payoff.n} != model dimension {model.n}")

    checks = []
    gamma_sym = sym(rate.Gamma)
    tol = tol_psd(gamma_sym)
    eigs = np.linalg.eigvalsh(gamma_sym)
    checks.append(
        CheckResult(
            "rate.Gamma_psd",
            bool(eigs.min(initial=0.0) >= -tol),
            f"min eigenvalue of sym(Gamma) = {eigs.min(initial=0.0):.3e}",
        )
    )

    if rate.strict:
        pinv = np.linalg.pinv(gamma_sym, rcond=1e-12)
        r_col = rate.Rvec.reshape(-1, 1)
        # Range membership: R' must be reproduced by the projector sym(Gamma) pinv.
        residual = np.linalg.norm(gamma_sym @ (pinv @ r_col) - r_col)
        in_range = bool(residual <= tol * (1.0 + np.linalg.norm(r_col)))
        checks.append(
            CheckResult(
                "rate.R_in_range_of_Gamma",
                in_range,
                f"projection residual = {residual:.3e}",
            )
        )
        bound = 0.25 * float(rate.Rvec @ pinv @ rate.Rvec)
        checks.append(
            CheckResult(
                "rate.k_lower_bound",
                bool(in_range and rate.k >= bound - tol),
                f"k = {rate.k:.6g}, (1/4) R Gamma^+ R' = {bound:.6g}",
            )
        )

    if payoff is not None:
        a_sym = sym(payoff.aT)
        tol_a = tol_psd(a_sym)
        eigs_a = np.linalg.eigvalsh(a_sym)
        checks.append(
            CheckResult(
                "payoff.aT_nsd",
                bool(eigs_a.max(initial=0.0) <= tol_a),
                f"max eigenvalue of sym(aT) = {eigs_a.max(initial=0.0):.3e}",
            )
        )

    return ValidationReport(tuple(checks))


def eval_short_rate(rate, x):
    """r(x) = x' Gamma x + R x + k."""
    x = _as_vector(x, rate.n, "x")
    return float(x @ rate.Gamma @ x + rate.Rvec @ x + rate.k)


def eval_payoff(payoff, x):
    """S(T, x) = exp(x' aT x + bT x + cT); raises if the exponent overflows."""
    x = _as_vector(x, payoff.n, "x")
    exponent = float(x @ payoff.aT @ x + payoff.bT @ x + payoff.cT)
    if exponent > EXP_GUARD:
        raise ExponentOverflowError(exponent, EXP_GUARD)
    return float(np.exp(exponent))
