"""Transfer operators of continuous-variable teleportation.

A single mode is teleported by

    T_q(beta) = sqrt((1 - q^2) / pi) * sum_n q^n D(beta)|n><n|D(-beta)

so that integrating ``||T_q(beta)|psi>||^2`` over ``d^2 beta = d(Re beta) d(Im beta)``
gives one. The two polarization modes are teleported independently and the
two-mode transfer operator is the tensor product ``T_q(beta_H) (x) T_q(beta_V)``,
whose prefactor is ``(1 - q^2) / pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    DEFAULT_CONFIG,
    TruncationConfig,
    TruncationError,
    check_truncation,
    displacement_elements,
    displacement_operator,
    max_displacement,
)

__all__ = [
    "PolarizationQubit",
    "MeasurementOutcome",
    "check_squeezing",
    "transfer_prefactor",
    "single_mode_transfer",
    "transfer_amplitudes",
    "transfer_action",
    "conditional_output",
    "measurement_density",
    "single_mode_density",
]


def check_squeezing(q: float) -> float:
    q = float(q)
    if not (0.0 <= q < 1.0):
        raise ValueError(f"squeezing parameter must satisfy 0 <= q < 1 for numeric work, got {q}")
    return q


@dataclass(frozen=True)
class PolarizationQubit:
    """Single photon ``c_H|1;0> + c_V|0;1>``."""

    c_H: complex = 1.0
    c_V: complex = 0.0

    def __post_init__(self):
        c_H, c_V = complex(self.c_H), complex(self.c_V)
        if not all(map(math.isfinite, (c_H.real, c_H.imag, c_V.real, c_V.imag))):
            raise ValueError("qubit amplitudes must be finite")
        norm = abs(c_H) ** 2 + abs(c_V) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit is not normalized: |c_H|^2 + |c_V|^2 = {norm!r}")
        object.__setattr__(self, "c_H", c_H)
        object.__setattr__(self, "c_V", c_V)

    @classmethod
    def normalized(cls, c_H: complex, c_V: complex) -> "PolarizationQubit":
        norm = math.sqrt(abs(complex(c_H)) ** 2 + abs(complex(c_V)) ** 2)
        if norm == 0.0:
            raise ValueError("qubit amplitudes are both zero")
        return cls(complex(c_H) / norm, complex(c_V) / norm)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.c_H, self.c_V], dtype=complex)


@dataclass(frozen=True)
class MeasurementOutcome:
    beta_H: complex = 0.0
    beta_V: complex = 0.0

    def __post_init__(self):
        for name in ("beta_H", "beta_V"):
            b = complex(getattr(self, name))
            if not (math.isfinite(b.real) and math.isfinite(b.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, b)


def transfer_prefactor(q: float) -> float:
    """Single-mode prefactor ``sqrt((1 - q^2) / pi)``."""
    return math.sqrt((1.0 - q * q) / math.pi)


def single_mode_transfer(q: float, beta: complex, cfg: TruncationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Sum form of ``T_q(beta)`` restricted to Fock levels ``0..dim-1``.

    Only accurate for inputs well inside the truncated space: the sum over
    intermediate levels is cut at ``dim``. For quadrature over large
    ``|beta|`` use :func:`transfer_amplitudes`.
    """
    q = check_squeezing(q)
    beta = complex(beta)
    if not (math.isfinite(beta.real) and math.isfinite(beta.imag)):
        raise ValueError("beta must be finite")
    disp = displacement_operator(beta, cfg)
    back = displacement_operator(-beta, cfg)
    weights = q ** np.arange(cfg.dim)
    return transfer_prefactor(q) * (disp * weights[None, :]) @ back


def transfer_amplitudes(q: float, betas, photons: int, levels: int) -> np.ndarray:
    """``<n|T_q(beta)|photons>`` for ``n < levels``, vectorized over ``betas``.

    Uses the displaced-Fock form with ``gamma = (1 - q) beta``::

        T_q(beta)|0> = s e^{-(1-q^2)|beta|^2/2} D(gamma)|0>
        T_q(beta)|1> = s e^{-(1-q^2)|beta|^2/2} D(gamma)((1-q^2) beta*|0> + q|1>)

    with ``s = sqrt((1 - q^2)/pi)``. Matrix elements are analytic, so the
    amplitudes do not depend on any truncation. Returns shape
    ``betas.shape + (levels,)``.
    """
    q = check_squeezing(q)
    betas = np.asarray(betas, dtype=complex)
    gamma = (1.0 - q) * betas
    n = np.arange(levels)
    envelope = transfer_prefactor(q) * np.exp(-0.5 * (1.0 - q * q) * np.abs(betas) ** 2)
    col0 = displacement_elements(gamma[..., None], n, 0)
    if photons == 0:
        return envelope[..., None] * col0
    if photons == 1:
        col1 = displacement_elements(gamma[..., None], n, 1)
        vac = ((1.0 - q * q) * np.conj(betas))[..., None]
        return envelope[..., None] * (vac * col0 + q * col1)
    raise ValueError(f"only 0 or 1 input photons are supported, got {photons}")


def transfer_action(q: float, beta: complex, photons: int,
                    cfg: TruncationConfig = DEFAULT_CONFIG, check: bool = True) -> np.ndarray:
    """Unnormalized single-mode output ``T_q(beta)|photons>`` as a Fock vector."""
    q = check_squeezing(q)
    if abs((1.0 - q) * complex(beta)) > max_displacement(cfg):
        raise TruncationError(f"|(1-q) beta| exceeds the displacement bound for dim={cfg.dim}")
    out = transfer_amplitudes(q, complex(beta), photons, cfg.dim)
    if check:
        check_truncation(out, cfg, context=f"T_q(beta)|{photons}> at q={q}, beta={complex(beta)}")
    return out


def conditional_output(q: float, outcome: MeasurementOutcome, qubit: PolarizationQubit,
                       cfg: TruncationConfig = DEFAULT_CONFIG, check: bool = True) -> np.ndarray:
    """Unnormalized two-mode output ``T(beta_H) (x) T(beta_V)`` applied to the qubit.

    The result is a ``(dim, dim)`` grid indexed ``[n_H, n_V]``.
    """
    h1 = transfer_action(q, outcome.beta_H, 1, cfg, check=False)
    h0 = transfer_action(q, outcome.beta_H, 0, cfg, check=False)
    v1 = transfer_action(q, outcome.beta_V, 1, cfg, check=False)
    v0 = transfer_action(q, outcome.beta_V, 0, cfg, check=False)
    out = qubit.c_H * np.outer(h1, v0) + qubit.c_V * np.outer(h0, v1)
    if check:
        check_truncation(out, cfg, context=f"conditional output at q={q}")
    return out


def measurement_density(q: float, outcome: MeasurementOutcome, qubit: PolarizationQubit,
                        cfg: TruncationConfig = DEFAULT_CONFIG) -> float:
    """Joint density of ``(beta_H, beta_V)`` w.r.t. ``d^2 beta_H d^2 beta_V``."""
    out = conditional_output(q, outcome, qubit, cfg, check=False)
    return float(np.sum(np.abs(out) ** 2))


def single_mode_density(q: float, beta: complex, photons: int,
                        cfg: TruncationConfig = DEFAULT_CONFIG) -> float:
    """Density of ``beta`` for a single teleported Fock input."""
    out = transfer_action(q, beta, photons, cfg, check=False)
    return float(np.sum(np.abs(out) ** 2))
