"""Brownian and fractional-Brownian sampling plus the mixed driving process.

All samplers are pure functions of (parameters, seed).  The fractional
Gaussian noise sampler uses exact circulant embedding, so the increments
carry the exact target autocovariance up to floating rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as _beta

from .seeding import derive_seed

CoefficientLike = float | int | Callable[[np.ndarray], np.ndarray] | tuple


def as_coefficient(c: CoefficientLike) -> "Coefficient":
    if isinstance(c, Coefficient):
        return c
    return Coefficient(c)


class Coefficient:
    """Time coefficient: a constant, a callable of t, or a (t, value) table."""

    def __init__(self, spec: CoefficientLike) -> None:
        if isinstance(spec, (int, float)):
            self.constant: float | None = float(spec)
            self._fn = None
        elif callable(spec):
            self.constant = None
            self._fn = spec
        elif isinstance(spec, tuple) and len(spec) == 2:
            ts, vals = np.asarray(spec[0], float), np.asarray(spec[1], float)
            if ts.shape != vals.shape or ts.ndim != 1:
                raise ValueError("tabulated coefficient needs matching 1-D (t, value) arrays")
            self.constant = None
            self._fn = lambda t: np.interp(t, ts, vals)
        else:
            raise ValueError(f"cannot interpret coefficient spec {spec!r}")

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def __call__(self, t):
        if self.constant is not None:
            return self.constant * np.ones_like(np.asarray(t, dtype=float))
        return np.asarray(self._fn(t), dtype=float)


@dataclass(frozen=True)
class HurstParams:
    """Hurst index and the associated Volterra kernel constant."""

    H: float

    def __post_init__(self) -> None:
        if not 0.5 < self.H < 1.0:
            raise ValueError(f"Hurst index must lie in (1/2, 1), got {self.H}")

    @property
    def C_H(self) -> float:
        H = self.H
        return float(np.sqrt(H * (2.0 * H - 1.0) / _beta(2.0 - 2.0 * H, H - 0.5)))


@dataclass(frozen=True)
class NoisePath:
    """One realization of the driving increments and the mixed process N_t."""

    dt: float
    n_steps: int
    bm_increments: np.ndarray
    fbm_increments: np.ndarray
    N: np.ndarray  # accumulated mixed process at t_0..t_n; N[0] = 0
    embedding_warning: bool = False

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


class FgnSample(NamedTuple):
    increments: np.ndarray
    eigenvalue_clipped: bool


def bm_increments(n_steps: int, dt: float, seed: int) -> np.ndarray:
    """i.i.d. Normal(0, dt) increments, deterministic per seed."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n_steps) * np.sqrt(dt)


def fgn_autocovariance(k, H: float, dt: float = 1.0) -> np.ndarray:
    """gamma(k) = dt^(2H)/2 * (|k+1|^(2H) - 2|k|^(2H) + |k-1|^(2H))."""
    k = np.abs(np.asarray(k, dtype=float))
    return 0.5 * dt ** (2.0 * H) * (
        (k + 1.0) ** (2.0 * H) - 2.0 * k ** (2.0 * H) + np.abs(k - 1.0) ** (2.0 * H)
    )


def fgn_circulant(n_steps: int, dt: float, H: float, seed: int) -> FgnSample:
    """Stationary fractional Gaussian noise via exact circulant embedding.

    Returns increments with per-step variance dt^(2H) and autocovariance
    `fgn_autocovariance`.  The covariance is embedded in a circulant of size
    2 * n_steps diagonalized by FFT (Davies-Harte); the embedding is
    nonnegative definite for fGN, but if rounding produces negative
    eigenvalues they are clipped to zero and the sample is flagged.

    Draw order is pinned for reproducibility: one standard-normal block of
    length 2 * n_steps consumed as (real DC term, real Nyquist term,
    n_steps - 1 real parts, n_steps - 1 imaginary parts).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not 0.5 <= H < 1.0:
        raise ValueError(f"Hurst index must lie in [1/2, 1), got {H}")
    rng = np.random.default_rng(seed)
    if H == 0.5:
        return FgnSample(rng.standard_normal(n_steps) * np.sqrt(dt), False)
    if n_steps == 1:
        return FgnSample(rng.standard_normal(1) * dt**H, False)

    g = fgn_autocovariance(np.arange(n_steps + 1), H, dt)
    c = np.concatenate([g[:n_steps], g[n_steps : n_steps + 1], g[n_steps - 1 : 0 : -1]])
    lam = np.fft.fft(c).real
    clipped = bool(np.any(lam < 0.0))
    if clipped:
        lam = np.maximum(lam, 0.0)

    m = 2 * n_steps
    draws = rng.standard_normal(m)
    y = np.zeros(m, dtype=complex)
    y[0] = np.sqrt(lam[0] / m) * draws[0]
    y[n_steps] = np.sqrt(lam[n_steps] / m) * draws[1]
    y[1:n_steps] = np.sqrt(lam[1:n_steps] / (2.0 * m)) * (
        draws[2 : n_steps + 1] + 1j * draws[n_steps + 1 : m]
    )
    y[n_steps + 1 :] = np.conj(y[1:n_steps][::-1])
    return FgnSample(np.fft.fft(y).real[:n_steps], clipped)


def covariance_RH(t: float, s: float, H: float) -> float:
    """Fractional Brownian covariance R_H(t, s) = (t^2H + s^2H - |t-s|^2H)/2."""
    if t < 0 or s < 0:
        raise ValueError("times must be non-negative")
    return 0.5 * (t ** (2 * H) + s ** (2 * H) - abs(t - s) ** (2 * H))


def volterra_kernel(t: float, s: float, H: float) -> float:
    """Volterra kernel G(t, s) representing fBM against a Brownian motion.

    G(t, s) = C_H s^(1/2-H) Int_s^t (sigma-s)^(H-3/2) sigma^(H-1/2) dsigma
    for t > s, zero otherwise.  The (sigma-s)^(H-3/2) endpoint singularity is
    integrable and handled by weighted adaptive quadrature.  At s = 0 the
    kernel itself diverges like s^(1/2-H); the singularity is square
    integrable, and this function returns +inf there.
    """
    if t < 0 or s < 0:
        raise ValueError("times must be non-negative")
    if t <= s:
        return 0.0
    hp = HurstParams(H)
    if s == 0.0:
        return float("inf")
    integral = quad(
        lambda tau: (s + tau) ** (H - 0.5),
        0.0,
        t - s,
        weight="alg",
        wvar=(H - 1.5, 0.0),
        limit=200,
    )[0]
    return hp.C_H * s ** (0.5 - H) * integral


def _regularized_kernel(t: float, s: float, H: float, c_h: float) -> float:
    # G(t,s) * s^(H-1/2); finite down to s = 0.
    if t <= s:
        return 0.0
    if s == 0.0:
        return c_h * t ** (2.0 * H - 1.0) / (2.0 * H - 1.0)
    return c_h * quad(
        lambda tau: (s + tau) ** (H - 0.5),
        0.0,
        t - s,
        weight="alg",
        wvar=(H - 1.5, 0.0),
        limit=200,
    )[0]


def volterra_covariance(t: float, s: float, H: float) -> float:
    """Reconstruct R_H(t, s) from the kernel: Int_0^min G(t,r) G(s,r) dr.

    The integrand's r^(1-2H) singularity at zero is folded into the
    quadrature weight, keeping the evaluation accurate near r = 0.
    """
    hp = HurstParams(H)
    lo = min(t, s)
    if lo <= 0.0:
        return 0.0
    val = quad(
        lambda r: _regularized_kernel(max(t, s), r, H, hp.C_H)
        * _regularized_kernel(lo, r, H, hp.C_H),
        0.0,
        lo,
        weight="alg",
        wvar=(1.0 - 2.0 * H, 0.0),
        limit=200,
    )[0]
    return float(val)


def mixed_path(params, seed: int) -> NoisePath:
    """Sample the mixed process N_t = Int a dB + Int b dB^H on the step grid.

    The Brownian and fractional components are drawn from independent
    derived streams (indices 1 and 2 of `seed`), and N is accumulated by
    left-endpoint sums: N_{t_{k+1}} = N_{t_k} + a(t_k) dB_k + b(t_k) dB^H_k.
    """
    n, dt = params.N, params.T / params.N
    db = bm_increments(n, dt, derive_seed(seed, 1))
    fgn = fgn_circulant(n, dt, params.H, derive_seed(seed, 2))
    tk = dt * np.arange(n)
    a = as_coefficient(params.a_fn)(tk)
    b = as_coefficient(params.b_fn)(tk)
    N = np.concatenate([[0.0], np.cumsum(a * db + b * fgn.increments)])
    return NoisePath(
        dt=dt,
        n_steps=n,
        bm_increments=db,
        fbm_increments=fgn.increments,
        N=N,
        embedding_warning=fgn.eigenvalue_clipped,
    )


def path_to_csv(path: NoisePath, file) -> None:
    """Dump a path as CSV columns (t, dB, dB_H, N); increments lead by one row."""
    rows = np.column_stack(
        [
            path.times,
            np.concatenate([path.bm_increments, [np.nan]]),
            np.concatenate([path.fbm_increments, [np.nan]]),
            path.N,
        ]
    )
    np.savetxt(file, rows, delimiter=",", header="t,dB,dB_H,N", comments="")
