"""Numerical photon statistics by quadrature over measurement outcomes.

Every probability here is an integral ``int d^2 beta |<n|T_q(beta)|m>|^2``
evaluated on a polar product grid: Gauss-Legendre in the radius, uniform
trapezoid in the angle. Nothing in this module calls into
:mod:`cvteleport.closed_forms`; the two are compared in the tests and by the
``verify`` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import comb, gammaln, roots_legendre

from .fock import DEFAULT_CONFIG, TruncationConfig, TruncationError
from .transfer import PolarizationQubit, check_squeezing, transfer_amplitudes

DEFAULT_RADIAL = 64
DEFAULT_ANGULAR = 32
DEFAULT_RADIUS_MULT = 6.0
# Largest q the default grid is validated for.
DEFAULT_GRID_QMAX = 0.9


class ConvergenceError(RuntimeError):
    """Grid refinement moved a probability by more than the allowed amount."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


@dataclass(frozen=True)
class QuadratureGrid:
    """Polar product grid for integrals over one complex plane.

    ``radial_weights`` already include the ``r`` Jacobian, so
    ``sum_i sum_j radial_weights[i] * (2 pi / angular_count) * f(r_i, theta_j)``
    approximates ``int d(Re b) d(Im b) f``.
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    angular_count: int
    radius_cut: float

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        w = np.asarray(self.radial_weights, dtype=float)
        if r.shape != w.shape or r.ndim != 1 or r.size == 0:
            raise ValueError("radii and radial_weights must be matching non-empty 1-d arrays")
        if np.any(w <= 0):
            raise ValueError("radial weights must be positive")
        if np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] > self.radius_cut:
            raise ValueError("radii must increase strictly within [0, radius_cut]")
        if self.angular_count < 4 or self.angular_count % 2:
            raise ValueError("angular_count must be even and >= 4")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "radial_weights", w)

    @property
    def radial_nodes(self) -> list[tuple[float, float]]:
        return list(zip(self.radii.tolist(), self.radial_weights.tolist()))

    @property
    def radial_count(self) -> int:
        return self.radii.size

    def points(self, use_symmetry: bool = False):
        """Complex nodes and weights, flattened radius-major.

        With ``use_symmetry`` only the ray ``theta = 0`` is kept and carries
        the full ``2 pi`` of angular weight.
        """
        if use_symmetry:
            return self.radii.astype(complex), 2 * math.pi * self.radial_weights
        theta = 2 * math.pi * np.arange(self.angular_count) / self.angular_count
        betas = self.radii[:, None] * np.exp(1j * theta)[None, :]
        w = np.repeat(self.radial_weights * (2 * math.pi / self.angular_count),
                      self.angular_count).reshape(betas.shape)
        return betas.ravel(), w.ravel()

    def refined(self) -> "QuadratureGrid":
        """Same cut and angular rule, twice the radial nodes."""
        return gauss_legendre_polar(2 * self.radial_count, self.angular_count, self.radius_cut)


def gauss_legendre_polar(radial: int, angular: int, radius_cut: float) -> QuadratureGrid:
    x, w = roots_legendre(radial)
    r = 0.5 * radius_cut * (x + 1.0)
    return QuadratureGrid(r, 0.5 * radius_cut * w * r, angular, radius_cut)


def default_grid(q: float, radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR,
                 radius_mult: float = DEFAULT_RADIUS_MULT) -> QuadratureGrid:
    """Grid whose cut ``radius_mult / sqrt(1 - q^2)`` covers the Gaussian envelope."""
    q = check_squeezing(q)
    return gauss_legendre_polar(radial, angular, radius_mult / math.sqrt(1.0 - q * q))


@dataclass
class DistributionResult:
    """Numerical photon-number distribution.

    ``probabilities`` is 1-d for a single mode and 2-d (``[n_a, n_b]``) for
    the two polarization modes. ``frame`` names the mode pair of a 2-d table:
    ``"hv"`` for horizontal/vertical, ``"qubit"`` for parallel/perpendicular
    to the input polarization.
    """

    probabilities: np.ndarray
    residual_mass: float
    grid_estimate_error: float
    q: float
    edge_mass: float = 0.0
    frame: str = "single"
    history: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(self.probabilities.sum()) + self.residual_mass


def _amplitudes(q, photons, grid, cfg, use_symmetry):
    betas, w = grid.points(use_symmetry)
    return transfer_amplitudes(q, betas, photons, cfg.dim), w


def _integrate_single(q, photons, grid, cfg, use_symmetry):
    amps, w = _amplitudes(q, photons, grid, cfg, use_symmetry)
    return w @ (np.abs(amps) ** 2)


def _check_preconditions(q, n_max, grid, cfg):
    q = check_squeezing(q)
    if n_max < 0 or n_max >= cfg.dim - 5:
        raise ValueError(f"n_max={n_max} must satisfy 0 <= n_max < dim - 5 = {cfg.dim - 5}")
    if grid is None:
        if q > DEFAULT_GRID_QMAX:
            raise ValueError(f"default grid is validated only for q <= {DEFAULT_GRID_QMAX}; "
                             f"pass an explicit denser grid for q={q}")
        grid = default_grid(q)
    return q, grid


def _check_edge(edge, cfg, what):
    if edge > cfg.tail_tolerance:
        raise TruncationError(
            f"{what}: integrated probability {edge:.3e} on Fock level {cfg.dim - 1} "
            f"exceeds tail_tolerance {cfg.tail_tolerance:.1e}; increase dim")


def _refine(compute, grid, tol, what):
    """Run ``compute`` on ``grid`` and on its radial refinement.

    Returns the coarse result and a conservative error estimate, twice the
    largest change seen.
    """
    coarse = compute(grid)
    fine = compute(grid.refined())
    shift = float(np.max(np.abs(fine - coarse)))
    history = [(grid.radial_count, 0.0), (2 * grid.radial_count, shift)]
    if shift > tol:
        raise ConvergenceError(
            f"{what}: doubling radial nodes {grid.radial_count} -> {2 * grid.radial_count} "
            f"shifted a probability by {shift:.3e} > {tol:.1e}", history)
    return coarse, 2.0 * shift + 1e-15, history


def numeric_single_mode_distribution(q: float, input_photons: int, n_max: int,
                                     grid: QuadratureGrid | None = None,
                                     cfg: TruncationConfig = DEFAULT_CONFIG,
                                     tol: float = 1e-6,
                                     use_symmetry: bool = False) -> DistributionResult:
    """Output photon-number distribution of one teleported mode with a Fock input."""
    if input_photons not in (0, 1):
        raise ValueError("input_photons must be 0 or 1")
    q, grid = _check_preconditions(q, n_max, grid, cfg)
    what = f"single-mode distribution (q={q}, input={input_photons})"
    full, err, history = _refine(
        lambda g: _integrate_single(q, input_photons, g, cfg, use_symmetry), grid, tol, what)
    edge = float(full[-1])
    _check_edge(edge, cfg, what)
    probs = full[: n_max + 1].copy()
    return DistributionResult(probs, max(0.0, 1.0 - float(probs.sum())), err, q,
                              edge_mass=edge, history=history)


def _frame_states(qubit: PolarizationQubit, N: int) -> np.ndarray:
    """Rows ``k``: H/V Fock coefficients (index ``n_H``) of ``|k, N-k>`` in the qubit frame.

    The frame modes are ``a_par^+ = c_H a_H^+ + c_V a_V^+`` and
    ``a_perp^+ = -c_V^* a_H^+ + c_H^* a_V^+``.
    """
    c_H, c_V = qubit.c_H, qubit.c_V
    j = np.arange(N + 1)
    out = np.zeros((N + 1, N + 1), dtype=complex)
    for k in range(N + 1):
        # polynomial coefficients in powers of a_H^+
        i = np.arange(k + 1)
        par = comb(k, i) * c_H ** i * c_V ** (k - i)
        i = np.arange(N - k + 1)
        perp = comb(N - k, i) * (-np.conj(c_V)) ** i * np.conj(c_H) ** (N - k - i)
        poly = np.convolve(par, perp)
        norm = 0.5 * (gammaln(j + 1.0) + gammaln(N - j + 1.0)
                      - gammaln(k + 1.0) - gammaln(N - k + 1.0))
        out[k] = poly * np.exp(norm)
    return out


def outcome_averaged_moments(q: float, levels: int, grid: QuadratureGrid,
                             use_symmetry: bool = False) -> np.ndarray:
    """``G[n, m, n', m'] = int d^2 beta <n|T(beta)|m> <n'|T(beta)|m'>^*`` for ``m, m' in {0, 1}``.

    Entries with ``n - m != n' - m'`` vanish only through the angular
    integral, so ``use_symmetry`` is rejected here.
    """
    if use_symmetry:
        raise ValueError("the angular shortcut is invalid for off-diagonal moments")
    q = check_squeezing(q)
    betas, w = grid.points()
    amps = np.stack([transfer_amplitudes(q, betas, m, levels) for m in (0, 1)], axis=-1)
    return np.einsum("b,bnm,bpk->nmpk", w, amps, np.conj(amps))


def _shell_block(moments, qubit, N):
    """Outcome-averaged two-mode output restricted to total photon number ``N``.

    Indexed by ``n_H`` in ``0..N``.
    """
    c = qubit.amplitudes
    # input |1;0> has (m_H, m_V) = (1, 0); |0;1> has (0, 1)
    modes = ((1, 0), (0, 1))
    nH = np.arange(N + 1)
    nV = N - nH
    block = np.zeros((N + 1, N + 1), dtype=complex)
    for s, (sH, sV) in enumerate(modes):
        for t, (tH, tV) in enumerate(modes):
            gh = moments[nH[:, None], sH, nH[None, :], tH]
            gv = moments[nV[:, None], sV, nV[None, :], tV]
            block += c[s] * np.conj(c[t]) * gh * gv
    return block


def _joint_by_moments(q, qubit, n_max, grid, frame):
    levels = 2 * n_max + 1
    moments = outcome_averaged_moments(q, levels, grid)
    table = np.zeros((n_max + 1, n_max + 1))
    for N in range(2 * n_max + 1):
        block = _shell_block(moments, qubit, N)
        if frame == "hv":
            diag = np.real(np.diag(block))
        else:
            states = _frame_states(qubit, N)
            diag = np.real(np.einsum("kj,jl,kl->k", np.conj(states), block, states))
        for a in range(max(0, N - n_max), min(N, n_max) + 1):
            table[a, N - a] = diag[a]
    return table


def numeric_joint_distribution(q: float, qubit: PolarizationQubit, n_max: int,
                               grid: QuadratureGrid | None = None,
                               cfg: TruncationConfig = DEFAULT_CONFIG,
                               tol: float = 1e-6,
                               method: str = "rotate",
                               frame: str = "qubit",
                               use_symmetry: bool = False) -> DistributionResult:
    """Joint two-mode photon-number distribution of the teleported qubit.

    ``method="rotate"`` exploits polarization invariance: in the frame of the
    input polarization the input is ``|1;0>``, and the joint distribution is
    the product of a one-photon and a vacuum single-mode distribution.

    ``method="moments"`` does not assume invariance. It integrates the
    outcome-averaged output in the H/V basis, including cross terms between
    the ``c_H`` and ``c_V`` components, and projects each photon-number shell
    onto the requested frame.
    """
    if frame not in ("qubit", "hv"):
        raise ValueError(f"unknown frame {frame!r}")
    if method == "rotate":
        if frame == "hv" and abs(qubit.c_V) > 0 and abs(qubit.c_H) > 0:
            raise ValueError("the rotate method gives H/V tables only for basis qubits")
        par = numeric_single_mode_distribution(q, 1, n_max, grid, cfg, tol, use_symmetry)
        perp = numeric_single_mode_distribution(q, 0, n_max, grid, cfg, tol, use_symmetry)
        table = np.outer(par.probabilities, perp.probabilities)
        if frame == "hv" and abs(qubit.c_H) == 0:
            table = table.T.copy()
        err = par.grid_estimate_error + perp.grid_estimate_error
        edge = max(par.edge_mass, perp.edge_mass)
        history = par.history + perp.history
    elif method == "moments":
        q, grid = _check_preconditions(q, n_max, grid, cfg)
        what = f"joint distribution by moments (q={q})"
        table, err, history = _refine(
            lambda g: _joint_by_moments(q, qubit, n_max, g, frame), grid, tol, what)
        edge_par = _integrate_single(q, 1, grid, cfg, False)[-1]
        edge = float(edge_par)
        _check_edge(edge, cfg, what)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DistributionResult(table, max(0.0, 1.0 - float(table.sum())), err, q,
                              edge_mass=edge, frame=frame, history=history)


def direct_joint_distribution(q: float, qubit: PolarizationQubit, n_max: int,
                              radial: int = 16, angular: int = 8,
                              radius_mult: float = DEFAULT_RADIUS_MULT) -> np.ndarray:
    """Joint table in the qubit frame by brute-force quadrature over both planes.

    Each conditional two-mode output is built for every pair of grid nodes and
    projected onto the parallel/perpendicular Fock states. Meant as a coarse
    cross-check of the cheaper routes, so only shells ``N <= n_max`` are filled.
    """
    q = check_squeezing(q)
    grid = default_grid(q, radial, angular, radius_mult)
    betas, w = grid.points()
    levels = n_max + 1
    amp0 = transfer_amplitudes(q, betas, 0, levels)
    amp1 = transfer_amplitudes(q, betas, 1, levels)
    frames = [_frame_states(qubit, N) for N in range(levels)]
    table = np.zeros((levels, levels))
    for i in range(betas.size):
        psi = (qubit.c_H * amp1[i][None, :, None] * amp0[:, None, :]
               + qubit.c_V * amp0[i][None, :, None] * amp1[:, None, :])
        for N in range(levels):
            nH = np.arange(N + 1)
            shell = psi[:, nH, N - nH]
            proj = shell @ frames[N].conj().T
            table[np.arange(N + 1), N - np.arange(N + 1)] += w[i] * (w @ np.abs(proj) ** 2)
    return table


@dataclass
class FidelityRecord:
    F_av: float
    F_1: float
    F_N: dict[int, float]
    P: dict[int, float]
    mean_nH: float
    mean_nV: float


def numeric_fidelities(joint: DistributionResult, n_max: int) -> FidelityRecord:
    """Fidelities and photon-number statistics from a joint table.

    Rows of the table count photons with the input polarization, columns
    the orthogonal one. Means are taken over the whole table; ``P`` and
    ``F_N`` are reported for ``N <= n_max``.
    """
    p = np.asarray(joint.probabilities)
    if p.ndim != 2:
        raise ValueError("numeric_fidelities needs a two-mode table")
    size = p.shape[0]
    if n_max >= size:
        raise ValueError(f"n_max={n_max} exceeds the table size {size}")
    n = np.arange(size)
    mean_a = float(np.sum(n[:, None] * p))
    mean_b = float(np.sum(n[None, :] * p))
    P = {}
    F = {}
    for N in range(n_max + 1):
        shell = np.array([p[a, N - a] for a in range(N + 1)])
        P[N] = float(shell.sum())
        if N == 0:
            continue
        if P[N] < 1e-14:
            raise ValueError(f"F_{N} undefined: P({N}) = {P[N]:.3e} < 1e-14")
        F[N] = float(np.sum(np.arange(N + 1) * shell) / (N * P[N]))
    F_1 = F.get(1, float("nan"))
    return FidelityRecord(mean_a / (mean_a + mean_b), F_1, F, P, mean_a, mean_b)


def with_dim(cfg: TruncationConfig, dim: int) -> TruncationConfig:
    return replace(cfg, dim=dim)
