"""Simulation-based oracles: path pricing and direct FBSDE verification.

All randomness comes from the counter-based generator in :mod:`qtsm.rng`,
addressed per (seed, path-index), so every estimator is deterministic for a
fixed seed regardless of chunking or thread count.  Estimators process paths
in fixed-size chunks (optionally on a thread pool capped by the
QTSM_THREADS environment variable) and reduce per-path statistics in path
order.

The factor SDE is discretized by Euler-Maruyama,

    X_{i+1} = X_i + drift(t_i, X_i) h + sigma sqrt(h) xi_i,

under either the risk-neutral drift A x + B or the forward-measure drift
(A + ss'(R2 + R2')) x + B + ss' R1' taken from a solved bond coefficient
path.  Time integrals of the short rate along paths use the trapezoid rule
on the simulation grid.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import NumericalError
from .model import TimeGrid

CHUNK_PATHS = 16384

RISK_NEUTRAL = "risk_neutral"
FORWARD = "forward"


def _max_workers():
    try:
        return max(1, int(os.environ.get("QTSM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Simulated factor paths: states[p, i, :] is path p at node t_i."""

    n_paths: int
    grid: TimeGrid
    states: np.ndarray  # (n_paths, N+1, n)
    seed: int
    measure: str


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int

    def interval(self, n_sigmas=3.0):
        return (self.mean - n_sigmas * self.stderr, self.mean + n_sigmas * self.stderr)


@dataclass(frozen=True)
class FbsdeReport:
    mean_abs_terminal_error: float
    max_terminal_error: float
    mean_bsde_increment_residual: float
    n_paths: int
    N: int


def _forward_coeffs(model, bond_path):
    """Per-node drift matrices/vectors of the forward-measure SDE."""
    ssq = model.sigma_sq
    S = bond_path.R2 + np.transpose(bond_path.R2, (0, 2, 1))
    mats = model.A[None, :, :] + ssq[None, :, :] @ S
    vecs = model.B[None, :] + bond_path.R1 @ ssq.T
    return mats, vecs


def _euler_block(model, grid, dW_block, drift_mode, fw_coeffs):
    """Integrate one block of paths; returns states (P, N+1, n)."""
    P = dW_block.shape[0]
    n, N, h = model.n, grid.N, grid.h
    states = np.empty((P, N + 1, n))
    states[:, 0, :] = model.x0
    x = np.broadcast_to(model.x0, (P, n)).copy()
    for i in range(N):
        if drift_mode == RISK_NEUTRAL:
            drift = x @ model.A.T + model.B
        else:
            mats, vecs = fw_coeffs
            drift = x @ mats[i].T + vecs[i]
        x = x + drift * h + dW_block[:, i, :] @ model.sigma.T
        states[:, i + 1, :] = x
    if not np.all(np.isfinite(states)):
        bad = np.argwhere(~np.isfinite(states))[0]
        raise NumericalError(
            f"non-finite state at path offset {bad[0]}, step {bad[1]}"
        )
    return states


def _increments(seed, path_start, n_paths, grid, n):
    """Brownian increments sqrt(h) * xi, shape (n_paths, N, n)."""
    xi = rng.normals(seed, path_start, n_paths, grid.N * n)
    return np.sqrt(grid.h) * xi.reshape(n_paths, grid.N, n)


def brownian_increments(seed, n_paths, grid, n):
    """Public helper: the same increments simulate_paths(seed, ...) consumes."""
    return _increments(seed, 0, n_paths, grid, n)


def coarsen_increments(dW, factor):
    """Sum fine increments in groups of ``factor``: a Brownian refinement family."""
    P, N, n = dW.shape
    if N % factor:
        raise ValueError(f"step count {N} not divisible by {factor}")
    return dW.reshape(P, N // factor, factor, n).sum(axis=2)


def simulate_paths(model, grid, n_paths, seed, drift_mode=RISK_NEUTRAL,
                   bond_path=None, dW=None):
    """Euler-Maruyama ensemble under the risk-neutral or forward measure.

    Deterministic given (seed, n_paths, grid); in forward mode a solved bond
    :class:`~qtsm.riccati.CoefficientPath` on the same grid is required.
    Optional ``dW`` overrides the generated Brownian increments (used for
    refinement studies).
    """
    if drift_mode not in (RISK_NEUTRAL, FORWARD):
        raise ValueError(f"unknown drift mode {drift_mode!r}")
    fw = None
    if drift_mode == FORWARD:
        if bond_path is None:
            raise ValueError("forward mode requires a solved bond coefficient path")
        if bond_path.grid.N != grid.N or bond_path.grid.T != grid.T:
            raise ValueError("bond path grid does not match simulation grid")
        fw = _forward_coeffs(model, bond_path)
    if dW is None:
        dW = _increments(seed, 0, n_paths, grid, model.n)
    states = _euler_block(model, grid, dW, drift_mode, fw)
    return PathEnsemble(n_paths=n_paths, grid=grid, states=states, seed=seed,
                        measure=drift_mode)


def _short_rate_nodes(rate, states):
    """r(X_i) for every path and node: (P, N+1)."""
    quad = np.einsum("pti,ij,ptj->pt", states, rate.Gamma, states)
    return quad + states @ rate.Rvec + rate.k


def _trapezoid(values, h):
    return h * (values.sum(axis=1) - 0.5 * (values[:, 0] + values[:, -1]))


def _payoff_terminal(payoff, states):
    xT = states[:, -1, :]
    expo = np.einsum("pi,ij,pj->p", xT, payoff.aT, xT) + xT @ payoff.bT + payoff.cT
    return np.exp(expo)


def _chunked_per_path(n_paths, worker):
    """Run ``worker(path_start, count)`` over fixed chunks, concatenated in order."""
    starts = list(range(0, n_paths, CHUNK_PATHS))
    jobs = [(s, min(CHUNK_PATHS, n_paths - s)) for s in starts]
    workers = _max_workers()
    if workers == 1 or len(jobs) == 1:
        parts = [worker(s, c) for s, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: worker(*job), jobs))
    return [np.concatenate(cols) for cols in zip(*parts)]


def _estimate(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    stderr = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean=float(values.mean()), stderr=stderr, n_paths=n)


def _discount_and_payoff(model, rate, payoff, n_paths, grid, seed):
    """Per-path (discount factor, terminal payoff) under risk-neutral paths."""

    def worker(path_start, count):
        dW = _increments(seed, path_start, count, grid, model.n)
        states = _euler_block(model, grid, dW, RISK_NEUTRAL, None)
        disc = np.exp(-_trapezoid(_short_rate_nodes(rate, states), grid.h)) \
            if rate is not None else np.ones(count)
        pay = _payoff_terminal(payoff, states) if payoff is not None else np.ones(count)
        return disc, pay

    return _chunked_per_path(n_paths, worker)


def mc_bond(model, rate, n_paths, grid, seed):
    """Monte Carlo zero-coupon bond price E[exp(-int r)] with standard error."""
    disc, _ = _discount_and_payoff(model, rate, None, n_paths, grid, seed)
    return _estimate(disc)


def mc_terminal_expectation(model, payoff, n_paths, grid, seed):
    """Monte Carlo futures price E[S(T, X_T)] with standard error."""
    _, pay = _discount_and_payoff(model, None, payoff, n_paths, grid, seed)
    return _estimate(pay)


def mc_discounted_payoff(model, rate, payoff, n_paths, grid, seed):
    """Monte Carlo forward-numerator E[exp(-int r) S(T, X_T)]."""
    disc, pay = _discount_and_payoff(model, rate, payoff, n_paths, grid, seed)
    return _estimate(disc * pay)


def mc_forward(model, rate, payoff, n_paths, grid, seed):
    """Forward-price ratio estimator with covariance-aware (delta method) stderr.

    F_hat = mean(D*S) / mean(D) on common paths; the standard error accounts
    for the correlation between numerator and denominator.
    """
    disc, pay = _discount_and_payoff(model, rate, payoff, n_paths, grid, seed)
    num = disc * pay
    nbar, dbar = num.mean(), disc.mean()
    ratio = nbar / dbar
    n = num.size
    cov = np.cov(num, disc, ddof=1)
    var = (
        cov[0, 0] / dbar**2
        - 2.0 * nbar * cov[0, 1] / dbar**3
        + nbar**2 * cov[1, 1] / dbar**4
    ) / n
    return McEstimate(mean=float(ratio), stderr=float(np.sqrt(max(var, 0.0))), n_paths=n)


def fbsde_check(model, rate, bond_path, n_paths, grid, seed, dW=None):
    """Verify the explicit FBSDE solution along simulated forward-measure paths.

    Two complementary checks run along each forward-mode path, using the
    closed form Y_i = exp(X_i' R2 X_i + R1 X_i + R0) and its control
    Z/Y = (x'(R2 + R2') + R1) sigma:

    * terminal check — the log-BSDE is integrated forward from the
      closed-form initial value log Y_0, stepping

          log Y_{i+1} = log Y_i + [0.5 |Z/Y|^2 + r(X_i)] h + (Z/Y) . dW_i,

      and |Y_N - 1| measures the accumulated discretization error (it
      vanishes as the grid is refined on a common Brownian family);
    * increment residual — each closed-form log-increment is compared with
      the same driver,

          resid_i = dlogY_i - [0.5 |Z/Y|^2 + r(X_i)] h - (Z/Y) . dW_i,

      reported as the mean absolute residual per step.
    """
    if bond_path.grid.N != grid.N or bond_path.grid.T != grid.T:
        raise ValueError("bond path grid does not match simulation grid")
    fw = _forward_coeffs(model, bond_path)
    h = grid.h
    n = model.n

    def worker(path_start, count):
        if dW is None:
            dW_block = _increments(seed, path_start, count, grid, n)
        else:
            dW_block = dW[path_start:path_start + count]
        states = _euler_block(model, grid, dW_block, FORWARD, fw)
        # log Y_i along the path, from the closed form.
        logY = (
            np.einsum("pti,tij,ptj->pt", states, bond_path.R2, states)
            + np.einsum("ti,pti->pt", bond_path.R1, states)
            + bond_path.R0[None, :]
        )
        # Z/Y = (x'(R2 + R2') + R1) sigma at the left node of each step.
        S = bond_path.R2 + np.transpose(bond_path.R2, (0, 2, 1))
        z = (
            np.einsum("pti,tij->ptj", states[:, :-1, :], S[:-1])
            + bond_path.R1[None, :-1, :]
        ) @ model.sigma
        r_nodes = _short_rate_nodes(rate, states)[:, :-1]
        drift_term = (0.5 * np.einsum("pti,pti->pt", z, z) + r_nodes) * h
        noise_term = np.einsum("pti,pti->pt", z, dW_block)
        resid = np.diff(logY, axis=1) - drift_term - noise_term
        # Euler integration of the log-BSDE from the closed-form start.
        logY_end = logY[:, 0] + (drift_term + noise_term).sum(axis=1)
        terminal = np.abs(np.exp(logY_end) - 1.0)
        return terminal, np.abs(resid).mean(axis=1)

    terminal, resid = _chunked_per_path(n_paths, worker)
    return FbsdeReport(
        mean_abs_terminal_error=float(terminal.mean()),
        max_terminal_error=float(terminal.max()),
        mean_bsde_increment_residual=float(resid.mean()),
        n_paths=n_paths,
        N=grid.N,
    )
