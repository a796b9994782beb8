"""Truncated Fock-space primitives.

States are plain complex numpy arrays: a single mode is a length-``dim``
vector indexed by photon number, two polarization modes are a ``(dim, dim)``
grid indexed ``[n_H, n_V]``. Operators are ``(dim, dim)`` complex matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "TruncationConfig",
    "TruncationError",
    "DEFAULT_CONFIG",
    "displaced_fock_amplitude",
    "displacement_elements",
    "displacement_operator",
    "fock_state",
    "coherent_state",
    "inner_product",
    "apply_operator",
    "tail_mass",
    "check_truncation",
    "max_displacement",
]

# Laguerre values beyond this magnitude get rescaled during the recurrence.
_RESCALE_AT = 1e150


class TruncationError(ValueError):
    """A state or displacement does not fit into the truncated Fock space."""


@dataclass(frozen=True)
class TruncationConfig:
    dim: int = 40
    tail_tolerance: float = 1e-9

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not 0.0 <= self.tail_tolerance < 1.0:
            raise ValueError(f"tail_tolerance must lie in [0, 1), got {self.tail_tolerance!r}")


DEFAULT_CONFIG = TruncationConfig()


def max_displacement(cfg: TruncationConfig) -> float:
    """Largest |alpha| accepted by the displacement builders for ``cfg``."""
    return 2.0 * math.sqrt(cfg.dim)


def _laguerre_log(n, k, x):
    """Generalized Laguerre ``L_n^{(k)}(x)`` as ``(mantissa, log_scale)``.

    Broadcasts over ``n``, ``k`` and ``x``. The value is
    ``mantissa * exp(log_scale)``; the three-term recurrence in ``n`` is
    rescaled whenever it grows large so that degrees in the hundreds do
    not overflow.
    """
    n, k, x = np.broadcast_arrays(np.asarray(n, dtype=np.int64),
                                  np.asarray(k, dtype=float),
                                  np.asarray(x, dtype=float))
    shape = n.shape
    mant = np.ones(shape)
    logs = np.zeros(shape)
    if n.size == 0:
        return mant, logs
    nmax = int(n.max())

    prev = np.zeros(shape)
    cur = np.ones(shape)
    log_scale = np.zeros(shape)
    for j in range(nmax):
        nxt = ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur = cur / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
        done = n == j + 1
        if np.any(done):
            mant = np.where(done, cur, mant)
            logs = np.where(done, log_scale, logs)
    return mant, logs


def displacement_elements(alpha, m, n) -> np.ndarray:
    """Vectorized ``<m|D(alpha)|n>``; broadcasts over all three arguments."""
    alpha = np.asarray(alpha, dtype=complex)
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    if np.any(m < 0) or np.any(n < 0):
        raise ValueError("photon numbers must be non-negative")
    if not np.all(np.isfinite(alpha)):
        raise ValueError("displacement amplitude must be finite")
    alpha, m, n = np.broadcast_arrays(alpha, m, n)

    lower = np.minimum(m, n)
    k = np.abs(m - n)
    # For m < n use <m|D(a)|n> = <n|D(-a*)|m>.
    a = np.where(m >= n, alpha, -np.conj(alpha))
    x = np.abs(alpha) ** 2

    mant, log_lag = _laguerre_log(lower, k, x)
    log_fact = 0.5 * (gammaln(lower + 1.0) - gammaln(lower + k + 1.0))
    # 0 ** 0 == 1; for k > 0 and a == 0 the element vanishes.
    with np.errstate(divide="ignore", invalid="ignore"):
        log_abs_a = np.log(np.abs(a))
        log_pow = np.where(k == 0, 0.0, k * log_abs_a)
    phase = np.where(k == 0, 1.0 + 0j, np.exp(1j * k * np.angle(a)))
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.exp(log_fact + log_pow - 0.5 * x + log_lag)
    return phase * mag * mant


def displaced_fock_amplitude(alpha: complex, m: int, n: int) -> complex:
    """Matrix element ``<m|D(alpha)|n>`` of the displacement operator."""
    if m < 0 or n < 0:
        raise ValueError(f"photon numbers must be non-negative, got m={m}, n={n}")
    if not (math.isfinite(complex(alpha).real) and math.isfinite(complex(alpha).imag)):
        raise ValueError("displacement amplitude must be finite")
    return complex(displacement_elements(alpha, m, n))


def displacement_operator(alpha, cfg: TruncationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Truncated displacement matrix ``D(alpha)`` of shape ``(dim, dim)``.

    ``alpha`` may also be an array of amplitudes, in which case a stack of
    matrices with a leading batch axis is returned.
    """
    alpha = np.asarray(alpha, dtype=complex)
    bound = max_displacement(cfg)
    if np.any(np.abs(alpha) > bound):
        raise TruncationError(
            f"|alpha| = {np.abs(alpha).max():.4g} exceeds 2*sqrt(dim) = {bound:.4g} "
            f"for dim={cfg.dim}; the displaced state leaves the truncated space")
    idx = np.arange(cfg.dim)
    return displacement_elements(alpha[..., None, None], idx[:, None], idx[None, :])


def fock_state(n: int, cfg: TruncationConfig = DEFAULT_CONFIG) -> np.ndarray:
    if not 0 <= n < cfg.dim:
        raise ValueError(f"Fock level {n} outside 0..{cfg.dim - 1}")
    v = np.zeros(cfg.dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent_state(alpha: complex, cfg: TruncationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Closed-form coherent state expansion ``exp(-|a|^2/2) a^n / sqrt(n!)``."""
    n = np.arange(cfg.dim)
    alpha = complex(alpha)
    if alpha == 0:
        return fock_state(0, cfg)
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0) - 0.5 * abs(alpha) ** 2
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains NaN or Inf entries")


def inner_product(a, b) -> complex:
    """``<a|b>``, conjugate-linear in ``a``; works for one- and two-mode states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    _check_finite(a, "first state")
    _check_finite(b, "second state")
    return complex(np.vdot(a, b))


def apply_operator(op, v) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    if v.shape != (op.shape[1],):
        raise ValueError(f"dimension mismatch: operator {op.shape} vs vector {v.shape}")
    _check_finite(op, "operator")
    _check_finite(v, "vector")
    return op @ v


def tail_mass(state) -> float:
    """Fraction of the squared norm on the highest Fock level of any mode."""
    state = np.asarray(state)
    norm2 = float(np.sum(np.abs(state) ** 2))
    if norm2 == 0.0:
        return 0.0
    edge = 0.0
    for axis in range(state.ndim):
        edge += float(np.sum(np.abs(np.take(state, -1, axis=axis)) ** 2))
    return edge / norm2


def check_truncation(state, cfg: TruncationConfig, context: str = "state") -> np.ndarray:
    """Return ``state`` unchanged, or raise if too much weight sits at level dim-1."""
    mass = tail_mass(state)
    if mass > cfg.tail_tolerance:
        raise TruncationError(
            f"{context}: probability fraction {mass:.3e} on Fock level {cfg.dim - 1} "
            f"exceeds tail_tolerance {cfg.tail_tolerance:.1e}; increase dim")
    return state
