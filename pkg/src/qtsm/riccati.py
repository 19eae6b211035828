"""Non-symmetric matrix Riccati solver via the Hamiltonian-exponential route.

The generic terminal-value problem solved here is

    dR2/dt + (R2' + R2) A + (1/2)(R2' + R2) ss' (R2' + R2) - Upsilon = 0,
        R2(T) = Theta,
    dR1/dt + R1 [A + ss'(R2' + R2)] + B'(R2' + R2) - Psi = 0,
        R1(T) = theta,
    dR0/dt = k - R1 B - (1/2) R1 ss' R1' - tr(s' R2 s),
        R0(T) = cT,

with ss' = sigma sigma'.  Writing R2 = -(U + V) with U symmetric and V
skew-symmetric, U solves the classical LQC Riccati equation

    dU/dt + U A + A' U - 2 U ss' U + Q = 0,   U(T) = C1,

with Q = sym(Upsilon) and C1 = -sym(Theta), which linearizes through the
2n x 2n Hamiltonian

    H = [[A, -2 ss'], [-Q, -A']],   [X; Y](t) = exp(H (t - T)) [I; C1],

and U = Y X^{-1}.  The skew part is the plain integral

    V(t) = skew(-Theta) + int_t^T (U A - A' U + skew(Upsilon)) ds,

and R1 comes from the same fundamental matrices,

    R1(t) = (theta - int_t^T [2 B' Y(s) + Psi X(s)] ds) X(t)^{-1}.

All quadratures are composite Simpson on the uniform grid.  A classical
RK4 direct integration of the three ODEs is provided as an independent
oracle and is used only by the tests.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import IllConditionedError, InvariantError, NumericalError
from .model import TimeGrid, sym, tol_psd, _as_matrix, _as_vector

COND_GATE = 1e12


def skew(matrix):
    """Skew-symmetric part (M - M') / 2."""
    return 0.5 * (matrix - matrix.T)


@dataclass(frozen=True)
class RiccatiProblem:
    """One instance of the generic Riccati system.

    Bond, futures, and forward prices are the instantiations

        bond:    Upsilon=Gamma, Theta=0,  Psi=R, theta=0,  k=k, cT=0
        futures: Upsilon=0,     Theta=aT, Psi=0, theta=bT, k=0, cT=cT
        forward: Upsilon=Gamma, Theta=aT, Psi=R, theta=bT, k=k, cT=cT
    """

    model: object
    Upsilon: np.ndarray
    Theta: np.ndarray
    Psi: np.ndarray
    theta: np.ndarray
    k: float
    cT: float
    grid: TimeGrid

    def __post_init__(self):
        n = self.model.n
        object.__setattr__(self, "Upsilon", _as_matrix(np.atleast_2d(np.asarray(self.Upsilon, float)), n, "Upsilon"))
        object.__setattr__(self, "Theta", _as_matrix(np.atleast_2d(np.asarray(self.Theta, float)), n, "Theta"))
        object.__setattr__(self, "Psi", _as_vector(self.Psi, n, "Psi"))
        object.__setattr__(self, "theta", _as_vector(self.theta, n, "theta"))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "cT", float(self.cT))
        failures = []
        ups = sym(self.Upsilon)
        if np.linalg.eigvalsh(ups).min() < -tol_psd(ups):
            failures.append("sym(Upsilon) is not positive semidefinite")
        th = sym(self.Theta)
        if np.linalg.eigvalsh(th).max() > tol_psd(th):
            failures.append("sym(Theta) is not negative semidefinite")
        if failures:
            raise InvariantError(failures)

    @property
    def n(self):
        return self.model.n


@dataclass(frozen=True)
class HamiltonianState:
    """Gridded fundamental matrices of the linearized Riccati flow."""

    grid: TimeGrid
    Xmat: np.ndarray  # (N+1, n, n)
    Ymat: np.ndarray  # (N+1, n, n)
    U: np.ndarray     # (N+1, n, n), symmetric
    V: np.ndarray     # (N+1, n, n), skew-symmetric
    condX: np.ndarray  # (N+1,)


@dataclass(frozen=True)
class CoefficientPath:
    """Time-gridded solution (R2, R1, R0) for one priced product."""

    grid: TimeGrid
    R2: np.ndarray  # (N+1, n, n)
    R1: np.ndarray  # (N+1, n)
    R0: np.ndarray  # (N+1,)
    product: str = "custom"

    @property
    def n(self):
        return self.R2.shape[1]

    def interpolate(self, t):
        """Linear interpolation of (R2, R1, R0) at time t in [0, T]."""
        T, N = self.grid.T, self.grid.N
        if not (0.0 <= t <= T):
            raise ValueError(f"t={t} outside [0, {T}]")
        pos = t / self.grid.h
        i = min(int(pos), N - 1)
        w = pos - i
        return (
            (1 - w) * self.R2[i] + w * self.R2[i + 1],
            (1 - w) * self.R1[i] + w * self.R1[i + 1],
            (1 - w) * self.R0[i] + w * self.R0[i + 1],
        )

    def to_dict(self):
        """JSON-ready representation (matrices row-major)."""
        return {
            "product": self.product,
            "grid": {"T": self.grid.T, "N": self.grid.N, "h": self.grid.h},
            "R2": self.R2.reshape(self.grid.N + 1, -1).tolist(),
            "R1": self.R1.tolist(),
            "R0": self.R0.tolist(),
        }


def mat_exp(M, s=1.0):
    """exp(s*M) by scaling-and-squaring with a Pade approximation.

    Relative accuracy ~1e-12 for ||s*M|| <= 100 (scipy's expm).
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)) or not np.isfinite(s):
        raise NumericalError("mat_exp: non-finite input")
    return expm(s * M)


def _integrate_from_end(values, h):
    """Cumulative integral I[i] = int_{t_i}^{T} f using composite Simpson.

    ``values`` has shape (N+1, ...) sampled on the uniform grid.  Even-offset
    panels use Simpson's rule; the single odd panel next to T uses the
    right-half quadratic rule, keeping the result O(h^4) at every node.
    """
    N = values.shape[0] - 1
    out = np.zeros_like(values)
    out[N - 1] = (h / 12.0) * (-values[N - 2] + 8.0 * values[N - 1] + 5.0 * values[N])
    for i in range(N - 2, -1, -1):
        out[i] = out[i + 2] + (h / 3.0) * (
            values[i] + 4.0 * values[i + 1] + values[i + 2]
        )
    return out


def solve_hamiltonian(problem):
    """Propagate [X; Y] through exp(H (t - T)) and recover U and V."""
    model, grid = problem.model, problem.grid
    n, N, h = problem.n, grid.N, grid.h
    Q = sym(problem.Upsilon)
    C1 = -sym(problem.Theta)

    H = np.block([[model.A, -2.0 * model.sigma_sq], [-Q, -model.A.T]])
    # exp(H (t_i - T)) = exp(-h H)^(N - i): step backward one node at a time.
    E = mat_exp(H, -h)

    Xmat = np.empty((N + 1, n, n))
    Ymat = np.empty((N + 1, n, n))
    U = np.empty((N + 1, n, n))
    condX = np.empty(N + 1)

    Z = np.vstack([np.eye(n), C1])
    for i in range(N, -1, -1):
        Xmat[i] = Z[:n]
        Ymat[i] = Z[n:]
        condX[i] = np.linalg.cond(Xmat[i])
        if not np.isfinite(condX[i]) or condX[i] > COND_GATE:
            raise IllConditionedError(i * h, condX[i])
        # U X = Y solved as X' U' = Y' (no explicit inverse).
        U[i] = np.linalg.solve(Xmat[i].T, Ymat[i].T).T
        if i > 0:
            Z = E @ Z
    U[N] = C1

    V = solve_skew(U, problem)
    return HamiltonianState(grid=grid, Xmat=Xmat, Ymat=Ymat, U=U, V=V, condX=condX)


def solve_skew(U, problem):
    """V(t) = skew(-Theta) + int_t^T (U A - A' U + skew(Upsilon)) ds."""
    A = problem.model.A
    Qt = skew(problem.Upsilon)
    Ct1 = -skew(problem.Theta)
    integrand = U @ A - np.transpose(U @ A, (0, 2, 1)) + Qt
    V = Ct1 + _integrate_from_end(integrand, problem.grid.h)
    V[-1] = Ct1
    return V


def solve_R2(problem, state=None):
    """R2 = -(U + V); terminal value assigned exactly to Theta."""
    if state is None:
        state = solve_hamiltonian(problem)
    R2 = -(state.U + state.V)
    R2[-1] = problem.Theta
    return R2


def solve_R1(problem, state):
    """R1(t) = (theta - int_t^T [2 B' Y + Psi X] ds) X(t)^{-1}."""
    B = problem.model.B
    integrand = 2.0 * np.einsum("j,ijk->ik", B, state.Ymat) + np.einsum(
        "j,ijk->ik", problem.Psi, state.Xmat
    )
    J = _integrate_from_end(integrand, problem.grid.h)
    rhs = problem.theta - J  # (N+1, n)
    R1 = np.empty_like(rhs)
    for i in range(rhs.shape[0]):
        # Row-vector solve: R1 X = rhs, i.e. X' R1' = rhs'.
        R1[i] = np.linalg.solve(state.Xmat[i].T, rhs[i])
    R1[-1] = problem.theta
    return R1


def solve_R0(problem, R2, R1):
    """R0(t) = cT + int_t^T (R1 B + (1/2) R1 ss' R1' + tr(s' R2 s) - k) ds."""
    model = problem.model
    ssq = model.sigma_sq
    lin = R1 @ model.B
    quad = 0.5 * np.einsum("ij,jk,ik->i", R1, ssq, R1)
    tr = np.einsum("jk,ikl,lj->i", model.sigma.T, R2, model.sigma)
    integrand = lin + quad + tr - problem.k
    R0 = problem.cT + _integrate_from_end(integrand, problem.grid.h)
    R0[-1] = problem.cT
    return R0


def solve(problem, product="custom"):
    """Full (R2, R1, R0) path via the Hamiltonian-exponential construction."""
    state = solve_hamiltonian(problem)
    R2 = solve_R2(problem, state)
    R1 = solve_R1(problem, state)
    R0 = solve_R0(problem, R2, R1)
    return CoefficientPath(grid=problem.grid, R2=R2, R1=R1, R0=R0, product=product)


def _riccati_rhs(problem, R2, R1, R0):
    """Time derivatives of (R2, R1, R0) from the defining ODEs."""
    model = problem.model
    S = R2 + R2.T
    ssq = model.sigma_sq
    dR2 = -S @ model.A - 0.5 * S @ ssq @ S + problem.Upsilon
    dR1 = -R1 @ (model.A + ssq @ S) - model.B @ S + problem.Psi
    dR0 = problem.k - R1 @ model.B - 0.5 * R1 @ ssq @ R1 - np.trace(
        model.sigma.T @ R2 @ model.sigma
    )
    return dR2, dR1, dR0


def rk4_oracle(problem, refinement=1):
    """Direct backward RK4 integration of the coupled (R2, R1, R0) system.

    Independent of the Hamiltonian-exponential route; used by tests as the
    cross-method oracle.  Takes ``refinement`` substeps per grid interval.
    """
    grid = problem.grid
    n, N = problem.n, grid.N
    dt = -grid.h / refinement

    R2 = np.empty((N + 1, n, n))
    R1 = np.empty((N + 1, n))
    R0 = np.empty(N + 1)
    R2[N] = problem.Theta
    R1[N] = problem.theta
    R0[N] = problem.cT

    r2, r1, r0 = problem.Theta.copy(), problem.theta.copy(), problem.cT
    for i in range(N, 0, -1):
        for _ in range(refinement):
            k1 = _riccati_rhs(problem, r2, r1, r0)
            k2 = _riccati_rhs(problem, r2 + 0.5 * dt * k1[0], r1 + 0.5 * dt * k1[1], r0 + 0.5 * dt * k1[2])
            k3 = _riccati_rhs(problem, r2 + 0.5 * dt * k2[0], r1 + 0.5 * dt * k2[1], r0 + 0.5 * dt * k2[2])
            k4 = _riccati_rhs(problem, r2 + dt * k3[0], r1 + dt * k3[1], r0 + dt * k3[2])
            r2 = r2 + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            r1 = r1 + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            r0 = r0 + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (np.all(np.isfinite(r2)) and np.all(np.isfinite(r1)) and np.isfinite(r0)):
            raise NumericalError(f"rk4_oracle: solution blew up near t={(i - 1) * grid.h:.6g}")
        R2[i - 1], R1[i - 1], R0[i - 1] = r2, r1, r0

    return CoefficientPath(grid=grid, R2=R2, R1=R1, R0=R0, product="custom")
