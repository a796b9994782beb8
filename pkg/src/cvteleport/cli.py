"""Command-line front end: figure data, analytic-vs-numeric verification, joint tables.

Numbers are written with 9 significant digits (``%.9g``) in both CSV and
JSON output, so re-parsing a file gives back exactly the rounded values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import closed_forms as cf
from .fock import TruncationConfig, TruncationError
from .quadrature import (
    DEFAULT_ANGULAR,
    DEFAULT_GRID_QMAX,
    DEFAULT_RADIAL,
    DEFAULT_RADIUS_MULT,
    ConvergenceError,
    default_grid,
    numeric_fidelities,
    numeric_joint_distribution,
    numeric_single_mode_distribution,
)
from .transfer import PolarizationQubit

log = logging.getLogger("cvteleport")

FIGURE_COLUMNS = {
    "fig2": ["q", "F_av", "F_1"],
    "fig3": ["q", "P_1", "P_2", "P_3", "P_4"],
    "fig4": ["q", "F_1", "F_2", "F_3", "F_4", "F_100"],
}
VERIFY_QS = (0.0, 0.3, 0.5, 0.7, 0.9)
VERIFY_COLUMNS = ["quantity", "max_abs_error", "tolerance", "worst_q", "status", "detail"]
DISTRIBUTION_COLUMNS = ["n_a", "n_b", "numeric_hv", "numeric_frame", "closed_form", "difference"]


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    q_start: float | None = None
    q_end: float | None = None
    q_steps: int | None = None
    n_max: int = 10
    dim: int = 40
    radial: int | None = None
    angular: int | None = None
    radius_mult: float | None = None
    tolerance: float = 1e-6
    fidelity_tolerance: float = 1e-5
    output: str | None = None
    format: str = "csv"

    @property
    def grid_overridden(self) -> bool:
        return any(v is not None for v in (self.radial, self.angular, self.radius_mult))

    def grid(self, q):
        return default_grid(q, self.radial or DEFAULT_RADIAL, self.angular or DEFAULT_ANGULAR,
                            self.radius_mult or DEFAULT_RADIUS_MULT)

    def q_values(self, default, allow_one):
        if self.q_start is None and self.q_end is None and self.q_steps is None:
            qs = list(default)
        else:
            start = 0.0 if self.q_start is None else self.q_start
            end = (1.0 if allow_one else DEFAULT_GRID_QMAX) if self.q_end is None else self.q_end
            steps = self.q_steps or 11
            if steps < 1:
                raise ConfigError("--q-steps must be positive")
            if not 0.0 <= start <= end <= 1.0:
                raise ConfigError(f"need 0 <= q-start <= q-end <= 1, got [{start}, {end}]")
            if end >= 1.0 and not allow_one:
                raise ConfigError("numeric commands need q-end < 1")
            qs = [start] if steps == 1 else np.linspace(start, end, steps).tolist()
        return [float(q) for q in qs]


def fmt(x) -> str:
    return format(float(x), ".9g")


def rounded(x) -> float:
    return float(fmt(x))


def render(columns, rows, fmt_name, extra=None) -> str:
    """Serialize rows (lists aligned with ``columns``) as CSV or JSON text."""
    def cell(v):
        return fmt(v) if isinstance(v, (float, np.floating)) else v

    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([cell(v) for v in row])
        return buf.getvalue()
    if fmt_name == "json":
        def num(v):
            if isinstance(v, (float, np.floating)):
                return None if math.isnan(v) else rounded(v)
            return v

        data = {c: [num(r[i]) for r in rows] for i, c in enumerate(columns)}
        doc = {"columns": list(columns), "data": data}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2) + "\n"
    raise ConfigError(f"unknown format {fmt_name!r}")


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


# -- figure ------------------------------------------------------------------

def figure_rows(which: str, qs) -> list[list[float]]:
    rows = []
    for q in qs:
        if which == "fig2":
            rows.append([q, cf.f_average(q).value, cf.f_one(q).value])
        elif which == "fig3":
            rows.append([q] + [cf.total_P(q, N) for N in (1, 2, 3, 4)])
        elif which == "fig4":
            rows.append([q] + [cf.f_clone(q, N).value for N in (1, 2, 3, 4, 100)])
        else:
            raise ConfigError(f"unknown figure {which!r}")
    return rows


def cmd_figure(which: str, cfg: SweepConfig) -> int:
    if which not in FIGURE_COLUMNS:
        raise ConfigError(f"unknown figure {which!r}")
    default = np.linspace(0.0, 0.99, 101).tolist() + [1.0]
    qs = cfg.q_values(default, allow_one=True)
    rows = figure_rows(which, sorted(qs))
    emit(render(FIGURE_COLUMNS[which], rows, cfg.format, {"figure": which}), cfg.output)
    return 0


# -- verify ------------------------------------------------------------------

def _compare_at(q, cfg: SweepConfig):
    """Yield (quantity, numeric, closed, tolerance) tuples for one q."""
    tc = TruncationConfig(dim=cfg.dim)
    n_max = cfg.n_max
    if n_max >= cfg.dim - 5:
        raise TruncationError(
            f"dim={cfg.dim} cannot hold n_max={n_max} (need n_max < dim - 5)")
    grid = cfg.grid(q)
    # means need the long tail, so integrate as far as the truncation allows
    wide = cfg.dim - 6
    one = numeric_single_mode_distribution(q, 1, wide, grid, tc, cfg.tolerance)
    vac = numeric_single_mode_distribution(q, 0, wide, grid, tc, cfg.tolerance)
    for n in range(n_max + 1):
        yield f"p1[{n}]", one.probabilities[n], cf.p1(q, n), cfg.tolerance
        yield f"p0[{n}]", vac.probabilities[n], cf.p0(q, n), cfg.tolerance
    joint = numeric_joint_distribution(q, PolarizationQubit(), wide, grid, tc, cfg.tolerance)
    fid = numeric_fidelities(joint, 4)
    for N in range(5):
        yield f"P[{N}]", fid.P[N], cf.total_P(q, N), cfg.tolerance
    mean_h, mean_v = cf.mean_photon_numbers(q)
    yield "mean_nH", fid.mean_nH, mean_h, cfg.fidelity_tolerance
    yield "mean_nV", fid.mean_nV, mean_v, cfg.fidelity_tolerance
    yield "F_av", fid.F_av, cf.f_average(q).value, cfg.fidelity_tolerance
    yield "F_1", fid.F_1, cf.f_one(q).value, cfg.fidelity_tolerance
    for N in (2, 3, 4):
        yield f"F_{N}", fid.F_N[N], cf.f_clone(q, N).value, cfg.fidelity_tolerance


def run_verification(cfg: SweepConfig):
    """Compare quadrature against closed forms; returns (rows, passed)."""
    qs = cfg.q_values(VERIFY_QS, allow_one=False)
    if max(qs) > DEFAULT_GRID_QMAX and not cfg.grid_overridden:
        raise ConfigError(
            f"q-end={max(qs)} exceeds {DEFAULT_GRID_QMAX}; pass --radial/--angular/--radius-mult "
            "to override the default grid")
    worst: dict[str, list] = {}
    order: list[str] = []
    errors: list[list] = []
    for q in qs:
        try:
            for name, num, ref, tol in _compare_at(q, cfg):
                err = abs(float(num) - float(ref))
                if name not in worst:
                    worst[name] = [0.0, tol, q]
                    order.append(name)
                if err > worst[name][0] or math.isnan(err):
                    worst[name] = [err, tol, q]
        except TruncationError as exc:
            errors.append(["truncation", math.nan, 0.0, q, "error", str(exc)])
        except ConvergenceError as exc:
            hist = "; ".join(f"{n} nodes: shift {s:.3e}" for n, s in exc.history)
            errors.append(["convergence", math.nan, 0.0, q, "error", f"{exc} [{hist}]"])
    rows = []
    passed = not errors
    for name in order:
        err, tol, q = worst[name]
        ok = err <= tol
        passed &= ok
        rows.append([name, err, tol, q, "pass" if ok else "fail", ""])
    rows.extend(errors)
    return rows, passed


def cmd_verify(cfg: SweepConfig) -> int:
    rows, passed = run_verification(cfg)
    for row in rows:
        if row[4] != "pass":
            log.error("%s at q=%s: %s %s", row[0], row[3], row[4], row[5])
    emit(render(VERIFY_COLUMNS, rows, cfg.format, {"passed": passed}), cfg.output)
    return 0 if passed else 1


# -- distribution -------------------------------------------------------------

def parse_qubit(text: str) -> PolarizationQubit:
    """Parse ``"c_H,c_V"`` with Python complex literals, e.g. ``"0.6,0.8j"``."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"qubit must be two comma-separated amplitudes, got {text!r}")
    try:
        c_H, c_V = (complex(p.strip().replace(" ", "")) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"cannot parse qubit {text!r}: {exc}") from None
    norm2 = abs(c_H) ** 2 + abs(c_V) ** 2
    if abs(norm2 - 1.0) > 1e-6:
        raise ConfigError(f"qubit norm^2 = {norm2:.9g} is not 1 within 1e-6")
    if abs(norm2 - 1.0) > 1e-12:
        log.warning("qubit norm^2 = %.12g; normalizing", norm2)
    return PolarizationQubit.normalized(c_H, c_V)


def distribution_rows(q: float, qubit: PolarizationQubit, cfg: SweepConfig):
    tc = TruncationConfig(dim=cfg.dim)
    grid = cfg.grid(q)
    hv = numeric_joint_distribution(q, qubit, cfg.n_max, grid, tc, cfg.tolerance,
                                    method="moments", frame="hv")
    frame = numeric_joint_distribution(q, qubit, cfg.n_max, grid, tc, cfg.tolerance,
                                       method="moments", frame="qubit")
    rows = []
    for a in range(cfg.n_max + 1):
        for b in range(cfg.n_max + 1):
            ref = cf.joint_p(q, a, b)
            num = float(frame.probabilities[a, b])
            rows.append([a, b, float(hv.probabilities[a, b]), num, ref, num - ref])
    return rows


def cmd_distribution(q: float, qubit: PolarizationQubit, cfg: SweepConfig) -> int:
    if not 0.0 <= q < 1.0:
        raise ConfigError(f"--q must lie in [0, 1), got {q}")
    if q > DEFAULT_GRID_QMAX and not cfg.grid_overridden:
        raise ConfigError(f"q={q} exceeds {DEFAULT_GRID_QMAX}; override the grid")
    rows = distribution_rows(q, qubit, cfg)
    extra = {"q": q, "qubit": [[qubit.c_H.real, qubit.c_H.imag], [qubit.c_V.real, qubit.c_V.imag]]}
    emit(render(DISTRIBUTION_COLUMNS, rows, cfg.format, extra), cfg.output)
    return 0


# -- argument parsing ---------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, n_max_default=10):
    p.add_argument("--q-start", type=float)
    p.add_argument("--q-end", type=float)
    p.add_argument("--q-steps", type=int)
    p.add_argument("--nmax", type=int, default=n_max_default, dest="n_max")
    p.add_argument("--dim", type=int, default=40)
    p.add_argument("--radial", type=int, help=f"radial Gauss-Legendre nodes (default {DEFAULT_RADIAL})")
    p.add_argument("--angular", type=int, help=f"angular trapezoid nodes (default {DEFAULT_ANGULAR})")
    p.add_argument("--radius-mult", type=float,
                   help=f"radius cut is RADIUS_MULT/sqrt(1-q^2) (default {DEFAULT_RADIUS_MULT})")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="allowed error on probabilities, also the grid-refinement limit")
    p.add_argument("--fidelity-tolerance", type=float, default=1e-5,
                   help="allowed error on means and fidelities")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvteleport",
        description="Single-photon polarization qubits through two-channel CV teleportation.")
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="emit closed-form curve data")
    fig.add_argument("which", choices=sorted(FIGURE_COLUMNS))
    _add_common(fig)

    ver = sub.add_parser("verify", help="check quadrature against closed forms")
    _add_common(ver)

    dist = sub.add_parser("distribution", help="joint photon-number table for one qubit")
    dist.add_argument("--q", type=float, required=True)
    dist.add_argument("--qubit", default="1,0", help='amplitudes "c_H,c_V", e.g. "0.6,0.8j"')
    _add_common(dist)
    return parser


def config_from_args(args) -> SweepConfig:
    cfg = SweepConfig(args.q_start, args.q_end, args.q_steps, args.n_max, args.dim,
                      args.radial, args.angular, args.radius_mult, args.tolerance,
                      args.fidelity_tolerance, args.output, args.format)
    if cfg.dim < 2:
        raise ConfigError("--dim must be at least 2")
    if cfg.n_max < 0:
        raise ConfigError("--nmax must be non-negative")
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "figure":
            return cmd_figure(args.which, cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_distribution(args.q, parse_qubit(args.qubit), cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    except (TruncationError, ConvergenceError) as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
