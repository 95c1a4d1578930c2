"""Semi-implicit Euler stepping of the stochastic membrane equation.

State u lives on the interior grid nodes; the nonlocal diffusion is treated
implicitly through a single Cholesky factorization of (I + dt*A) reused by
every step and realization, while the singular source lambda / (1-u)^2
- gamma * (1-u) and the multiplicative noise kick are explicit.  A
realization quenches when max_j u_j exceeds 1 - epsilon; the quench time is
reported as the last compliant step time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError
from .noise import CoefficientLike, bm_increments, fgn_circulant
from .operator import GridSpec, OperatorMatrix, assemble_matrix
from .seeding import derive_seed

MACHINE_EPSILON = 2.2204e-16


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of one model configuration.

    a_fn, b_fn, k_fn describe the time coefficients of the mixed noise and
    the diffusion clock used by the analytic bounds; the solver's noise
    injection itself is kappa1 * dB + kappa2 * dB^H with raw increments
    (dB ~ Normal(0, dt), dB^H fractional Gaussian noise of variance dt^2H),
    which makes the update a consistent Euler-Maruyama/Young step.
    """

    lam: float = 0.4
    gamma: float = 0.0
    alpha: float = 0.6
    H: float = 0.7
    kappa1: float = 0.1
    kappa2: float = 0.1
    c: float = 0.1
    T: float = 1.0
    N: int = 10_000
    M: int = 41
    a_fn: CoefficientLike = 1.0
    b_fn: CoefficientLike = 1.0
    k_fn: CoefficientLike = 2.0
    epsilon: float = MACHINE_EPSILON

    def __post_init__(self) -> None:
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"initial amplitude must satisfy 0 <= c < 1, got {self.c}")
        if self.T <= 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if self.N < 1:
            raise ValueError(f"step count N must be >= 1, got {self.N}")
        for name in ("lam", "gamma", "kappa1", "kappa2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.5 <= self.H < 1.0:
            raise ValueError(f"Hurst index must lie in [1/2, 1), got {self.H}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.M)


@dataclass(frozen=True)
class RealizationResult:
    """Outcome of one realization."""

    quenched: bool
    T_q: float | None
    sup_norm_series: np.ndarray | None
    steps_taken: int
    embedding_warning: bool = False
    failed: bool = False


@dataclass(frozen=True)
class Factorization:
    """Cholesky factorization of the stepping matrix I + dt*A."""

    dt: float
    _factor: tuple = field(repr=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, rhs)


def initial_condition(grid: GridSpec, c: float) -> np.ndarray:
    """u0(x) = c (1 - x^2) sampled at interior nodes."""
    if not 0.0 <= c < 1.0:
        raise ValueError(f"initial amplitude must satisfy 0 <= c < 1, got {c}")
    x = grid.interior_points
    return c * (1.0 - x * x)


def source_term(u: np.ndarray, lam: float, gamma: float) -> np.ndarray:
    """g(u) = lambda / (1-u)^2 - gamma (1-u); singular as u -> 1."""
    one_minus = 1.0 - np.asarray(u, dtype=float)
    if np.any(one_minus <= 0.0):
        raise ValueError("source evaluated at u >= 1; quench detection must run first")
    return lam / one_minus**2 - gamma * one_minus


def factorize(op: OperatorMatrix, dt: float) -> Factorization:
    """Factor I + dt*A once; the matrix is SPD so Cholesky always succeeds."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    stepping = np.eye(op.n) + dt * op.entries
    try:
        factor = cho_factor(stepping)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise NumericalError(f"stepping matrix is not positive definite: {exc}") from exc
    return Factorization(dt=dt, _factor=factor)


def step(
    u: np.ndarray,
    factor: Factorization,
    g: np.ndarray,
    noise_kick: np.ndarray,
) -> np.ndarray:
    """One semi-implicit update: solve (I + dt*A) u_next = u + dt*g + kick."""
    return factor.solve(u + factor.dt * g + noise_kick)


def _sample_increments(params: ModelParams, seed: int):
    """Component streams of one realization (indices 1: Brownian, 2: fGN)."""
    db = bm_increments(params.N, params.dt, derive_seed(seed, 1))
    fgn = fgn_circulant(params.N, params.dt, params.H, derive_seed(seed, 2))
    return db, fgn.increments, fgn.eigenvalue_clipped


def simulate_batch(
    op: OperatorMatrix,
    factor: Factorization,
    params: ModelParams,
    seeds: Sequence[int],
    record_series: bool = False,
) -> list[RealizationResult]:
    """Advance a batch of realizations in lock step sharing one factorization.

    Each column evolves independently from its own seed-derived increments,
    so results are identical whether realizations run alone or batched.
    Quench detection runs before the source evaluation each step; quenched
    and failed columns are frozen immediately.
    """
    n_batch = len(seeds)
    dt, n_steps = params.dt, params.N
    threshold = 1.0 - params.epsilon

    db = np.empty((n_steps, n_batch))
    dbh = np.empty((n_steps, n_batch))
    warn = np.zeros(n_batch, dtype=bool)
    for j, seed in enumerate(seeds):
        db[:, j], dbh[:, j], warn[j] = _sample_increments(params, seed)

    u = np.tile(initial_condition(params.grid, params.c)[:, None], (1, n_batch))
    active = np.ones(n_batch, dtype=bool)
    quench_time = np.full(n_batch, np.nan)
    failed = np.zeros(n_batch, dtype=bool)
    steps_taken = np.zeros(n_batch, dtype=int)
    series: list[list[float]] | None = None
    if record_series:
        series = [[] for _ in range(n_batch)]

    for n in range(n_steps + 1):
        if record_series:
            sup = np.max(np.abs(u), axis=0)
            for j in np.where(active)[0]:
                series[j].append(float(sup[j]))
        col_max = np.max(u, axis=0)
        bad = active & ~np.isfinite(col_max)
        if np.any(bad):
            failed[bad] = True
            active[bad] = False
        newly = active & (col_max > threshold)
        if np.any(newly):
            quench_time[newly] = max(n - 1, 0) * dt
            active[newly] = False
        if n == n_steps or not np.any(active):
            break
        idx = np.where(active)[0]
        ua = u[:, idx]
        g = params.lam / (1.0 - ua) ** 2 - params.gamma * (1.0 - ua)
        kick = np.maximum(1.0 - ua, 0.0) * (
            params.kappa1 * db[n, idx] + params.kappa2 * dbh[n, idx]
        )
        u[:, idx] = factor.solve(ua + dt * g + kick)
        steps_taken[idx] += 1

    results = []
    for j in range(n_batch):
        quenched = not np.isnan(quench_time[j])
        results.append(
            RealizationResult(
                quenched=quenched,
                T_q=float(quench_time[j]) if quenched else None,
                sup_norm_series=np.asarray(series[j]) if record_series else None,
                steps_taken=int(steps_taken[j]),
                embedding_warning=bool(warn[j]),
                failed=bool(failed[j]),
            )
        )
    return results


def run_realization(
    params: ModelParams,
    seed: int,
    record_series: bool = True,
    op: OperatorMatrix | None = None,
    factor: Factorization | None = None,
) -> RealizationResult:
    """Run a single realization to quenching or the horizon.

    Deterministic: identical (params, seed) reproduce the result bitwise.
    A prebuilt operator/factorization pair may be passed to amortize setup.
    """
    if op is None:
        op = assemble_matrix(params.grid, params.alpha)
    if factor is None:
        factor = factorize(op, params.dt)
    return simulate_batch(op, factor, params, [seed], record_series=record_series)[0]
