"""Analytic photon statistics and fidelities of single-photon polarization teleportation.

All functions take the squeezing parameter ``q`` in ``[0, 1]``. The point
``q = 1`` (maximal entanglement) is evaluated through explicit limits, since
the ratio ``r = (1 + q) / (1 - q)`` diverges there.
"""

from __future__ import annotations

from dataclasses import dataclass


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return q


def _check_n(n: int, name: str = "n") -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {n!r}")
    return int(n)


def ratio_squared(q: float) -> float:
    """``((1 + q) / (1 - q))^2`` for ``q < 1``."""
    return ((1.0 + q) / (1.0 - q)) ** 2


@dataclass(frozen=True)
class FidelityCurvePoint:
    q: float
    value: float

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1.0 + 1e-12:
            raise ValueError(f"fidelity {self.value} outside [0, 1]")

    def __float__(self) -> float:
        return self.value


def p1(q: float, n: int) -> float:
    """Output photon-number distribution of a teleported single photon."""
    q, n = _check_q(q), _check_n(n)
    if q == 1.0:
        return 1.0 if n == 1 else 0.0
    return (1 + q) / 2 * ((1 - q) / 2) ** (n + 1) * (1 + n * ratio_squared(q))


def p0(q: float, n: int) -> float:
    """Thermal output distribution of a teleported vacuum."""
    q, n = _check_q(q), _check_n(n)
    if q == 1.0:
        return 1.0 if n == 0 else 0.0
    return (1 + q) / 2 * ((1 - q) / 2) ** n


def joint_p(q: float, n_H: int, n_V: int) -> float:
    """Joint probability of ``n_H`` and ``n_V`` output photons for an H-polarized input."""
    q = _check_q(q)
    n_H, n_V = _check_n(n_H, "n_H"), _check_n(n_V, "n_V")
    if q == 1.0:
        return 1.0 if (n_H, n_V) == (1, 0) else 0.0
    N = n_H + n_V
    return ((1 + q) / 2) ** 2 * ((1 - q) / 2) ** (N + 1) * (1 + n_H * ratio_squared(q))


def total_P(q: float, N: int) -> float:
    """Probability of ``N`` photons in the two-mode output."""
    q, N = _check_q(q), _check_n(N, "N")
    if q == 1.0:
        return 1.0 if N == 1 else 0.0
    return (N + 1) * ((1 + q) / 2) ** 2 * ((1 - q) / 2) ** (N + 1) * (1 + N / 2 * ratio_squared(q))


def f_average(q: float) -> FidelityCurvePoint:
    """Polarization fidelity averaged over all output photons."""
    q = _check_q(q)
    return FidelityCurvePoint(q, 2.0 / (3.0 - q))


def f_one(q: float) -> FidelityCurvePoint:
    """Fidelity post-selected on a single output photon."""
    q = _check_q(q)
    a = 2.0 * (1.0 + q * q)
    return FidelityCurvePoint(q, a / (a + (1.0 - q) ** 2))


def clone_excess(q: float, N: int) -> float:
    """``f_clone(q, N) - 2/3``, evaluated without the cancellation of the subtraction."""
    q, N = _check_q(q), _check_n(N, "N")
    if N < 1:
        raise ValueError("cloning fidelity needs N >= 1")
    if q == 1.0:
        return 1.0 / (3 * N)
    r2 = ratio_squared(q)
    return (r2 - 1.0) / (3 * N * r2 + 6.0)


def f_clone(q: float, N: int) -> FidelityCurvePoint:
    """Cloning fidelity: chance that one of ``N`` output photons has the input polarization."""
    q, N = _check_q(q), _check_n(N, "N")
    if N < 1:
        raise ValueError("cloning fidelity needs N >= 1")
    if q == 1.0:
        return FidelityCurvePoint(q, (2 * N + 1) / (3 * N))
    return FidelityCurvePoint(q, 2.0 / 3.0 + clone_excess(q, N))


def f_clone_bounds(N: int) -> tuple[float, float]:
    """Lower and upper limits on ``f_clone(q, N)`` over ``q`` in ``[0, 1]``."""
    N = _check_n(N, "N")
    if N < 1:
        raise ValueError("cloning bounds need N >= 1")
    return 2.0 / 3.0, (2 * N + 1) / (3 * N)


def mean_photon_numbers(q: float) -> tuple[float, float]:
    """Mean H and V output photon numbers for an H-polarized input."""
    q = _check_q(q)
    return 2.0 / (1.0 + q), (1.0 - q) / (1.0 + q)
