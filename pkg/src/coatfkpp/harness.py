"""Regime families, delta sweeps, long-time runs and reports.

Each regime cell pairs a power-law coating family ``sigma = delta**a``,
``mu = delta**b`` with the boundary law it tends to as ``delta -> 0``.
The limits of ``sigma/delta`` and ``sigma*mu`` follow from the exponents
alone: ``a - 1`` and ``a + b`` positive, zero or negative give the limits
0, 1 and infinity.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coated import CoatedSolver, CoatingSpec
from .effective import EbcKind, EffectiveSolver
from .fields import ModalField, difference_norm
from .steady import SteadyState, steady_coated, steady_effective, steady_gap
from .surface import ParameterDomainError, build_surface

DEFAULT_DELTAS = (0.1, 0.05, 0.025, 0.0125)


@dataclass(frozen=True)
class RegimeCell:
    """A cell of the limit table: ``row`` is lim sigma*mu, ``col`` is lim sigma/delta."""

    cell_id: str
    row: str
    col: str
    sigma_exp: float
    mu_exp: float
    ebc: EbcKind

    def sigma(self, delta: float) -> float:
        return delta**self.sigma_exp

    def mu(self, delta: float) -> float:
        return delta**self.mu_exp

    def depth(self, delta: float) -> float:
        """``h = delta sqrt(mu/sigma)``."""
        return delta * math.sqrt(self.mu(delta) / self.sigma(delta))

    def limits(self) -> tuple[str, str]:
        """``(lim sigma*mu, lim sigma/delta)`` by exponent arithmetic."""
        return _limit(self.sigma_exp + self.mu_exp), _limit(self.sigma_exp - 1.0)


def _limit(exponent: float) -> str:
    if exponent > 0:
        return "0"
    return "1" if exponent == 0 else "inf"


CELLS: dict[str, RegimeCell] = {c.cell_id: c for c in (
    RegimeCell("neumann", "0", "0", 2.0, 0.0, EbcKind.neumann()),
    RegimeCell("robin", "0", "1", 1.0, 1.0, EbcKind.robin(1.0)),
    RegimeCell("dirichlet-weak", "0", "inf", 0.5, 1.0, EbcKind.dirichlet()),
    RegimeCell("dtn-inf", "1", "0", 2.0, -2.0, EbcKind.dtn(1.0)),
    RegimeCell("dtn-finite", "1", "1", 1.0, -1.0, EbcKind.dtn(1.0, 1.0)),
    RegimeCell("dirichlet-mid", "1", "inf", 0.5, -0.5, EbcKind.dirichlet()),
    RegimeCell("ct-zeroflux", "inf", "0", 2.0, -3.0, EbcKind.ct_zeroflux()),
    RegimeCell("ct-robin", "inf", "1", 1.0, -2.0, EbcKind.ct_robin(1.0)),
    RegimeCell("dirichlet-strong", "inf", "inf", 0.5, -1.0, EbcKind.dirichlet()),
)}


def get_cell(cell_id: str) -> RegimeCell:
    try:
        return CELLS[cell_id]
    except KeyError:
        raise ParameterDomainError(f"unknown cell {cell_id!r}; known: {', '.join(CELLS)}") from None


def regime_family(cell_id: str, delta: float, R1: float = 4.0):
    """``(sigma, mu, ebc, h)`` of a cell at thickness ``delta``."""
    if not 0 < delta < R1 / 2:
        raise ParameterDomainError(f"delta must lie in (0, R1/2), got {delta}")
    cell = get_cell(cell_id)
    h = cell.depth(delta) if cell.ebc.tag == "dtn" else None
    return cell.sigma(delta), cell.mu(delta), cell.ebc, h


@dataclass(frozen=True)
class RunConfig:
    """Discretization and data shared by both solvers of a comparison."""

    geometry: str = "sphere"
    R1: float = 4.0
    k: float = 1.0
    L: int = 16
    Nb: int = 256
    Nc: int = 32
    dt: float = 1e-3
    theta: float = 1.0
    T: float = 1.0
    sample_dt: float = 0.01
    layer_window: float = 0.1
    u0: str = "mode1:0.5,0.3"
    reaction: str = "logistic"
    T_long: float = 50.0
    dt_long: float = 5e-4
    per_decade: int = 20

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})

    def spectrum(self):
        return build_surface(self.geometry, self.R1, self.L)


@dataclass
class ConvergenceRecord:
    """Errors of one (cell, delta) comparison; lifespan fields are NaN for sweeps."""

    cell: str
    delta: float
    sigma: float
    mu: float
    sup_error: float
    terminal_error: float
    steady_gap: float = math.nan
    wall_time: float = 0.0
    n_samples: int = 0
    t_final: float = 0.0
    u_minus_U: float = math.nan
    v_minus_V: float = math.nan
    sup_window: float = math.nan
    extra: dict = field(default_factory=dict)


def uniform_samples(T: float, dt: float, spacing: float, layer: float = 0.0) -> np.ndarray:
    """``0``, every step up to ``layer``, then every multiple of ``spacing`` up to ``T``.

    The step-resolved window catches the error peak of the initial
    boundary layer, which is otherwise narrower than ``spacing``.
    """
    n = int(round(T / spacing))
    steps = np.arange(1, int(round(min(layer, T) / dt)) + 1) * dt
    return np.unique(np.round(np.r_[0.0, dt, steps, spacing * np.arange(1, n + 1), T] / dt)) * dt


def geometric_samples(T: float, dt: float, per_decade: int = 20) -> np.ndarray:
    """``0`` plus ``per_decade`` log-spaced times per decade from ``dt`` to ``T``."""
    n = int(math.ceil(per_decade * math.log10(T / dt)))
    t = dt * 10.0 ** (np.arange(n + 1) / per_decade)
    t = np.r_[0.0, np.minimum(t, T), T]
    return np.unique(np.round(t / dt)) * dt


def _solvers(cell: RegimeCell, delta: float, cfg: RunConfig, dt: float):
    sp = cfg.spectrum()
    spec = CoatingSpec(cfg.k, cell.sigma(delta), cell.mu(delta), delta)
    coated = CoatedSolver(spec, sp, cfg.Nb, cfg.Nc, dt=dt, theta=cfg.theta, reaction=cfg.reaction)
    eff = EffectiveSolver(cell.ebc, cfg.k, sp, cfg.Nb, dt=dt, theta=cfg.theta, reaction=cfg.reaction)
    return spec, coated, eff


def compare(coated: CoatedSolver, eff: EffectiveSolver, u0, T: float, times) -> tuple[list[float], ModalField, ModalField]:
    """Bulk ``L2`` errors at ``times`` and the two terminal states."""
    U = coated.solve(u0, T, times)
    V = eff.solve(u0, T, times)
    return [difference_norm(u, v) for u, v in zip(U, V)], U[-1], V[-1]


def _sweep_one(args) -> ConvergenceRecord:
    cell_id, delta, cfg, timing = args
    cell = get_cell(cell_id)
    t0 = time.perf_counter()
    spec, coated, eff = _solvers(cell, delta, cfg, cfg.dt)
    times = uniform_samples(cfg.T, cfg.dt, cfg.sample_dt, cfg.layer_window)
    errs, _, _ = compare(coated, eff, cfg.u0, cfg.T, times)
    wall = time.perf_counter() - t0 if timing else 0.0
    return ConvergenceRecord(cell_id, delta, spec.sigma, spec.mu, float(max(errs)), float(errs[-1]),
                             wall_time=wall, n_samples=len(times), t_final=float(times[-1]))


class SweepError(RuntimeError):
    """A run failed; ``records`` holds the completed ones in delta order."""

    def __init__(self, msg, records, cause=None):
        super().__init__(msg)
        self.records = records
        self.cause = cause


def _map(fn, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        for j in jobs:
            yield fn(j)
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, j) for j in jobs]
        for f in futures:
            yield f.result()


def sweep_delta(cell_id: str, deltas=DEFAULT_DELTAS, cfg: RunConfig | None = None, threads: int = 1,
                timing: bool = False) -> list[ConvergenceRecord]:
    """Coated versus effective errors along a strictly decreasing ``deltas`` list."""
    cfg = cfg or RunConfig()
    get_cell(cell_id)
    deltas = [float(d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ParameterDomainError("delta list must be strictly decreasing")
    for d in deltas:
        regime_family(cell_id, d, cfg.R1)
    records: list[ConvergenceRecord] = []
    try:
        for rec in _map(_sweep_one, [(cell_id, d, cfg, timing) for d in deltas], threads):
            records.append(rec)
    except Exception as exc:
        raise SweepError(f"sweep of {cell_id} failed after {len(records)} runs: {exc}", records, exc) from exc
    return records


def sup_sensitivity(cell_id: str, delta: float, cfg: RunConfig | None = None) -> float:
    """Relative gap between the sampled sup and the sup over every time step."""
    cfg = cfg or RunConfig()
    cell = get_cell(cell_id)
    _, coated, eff = _solvers(cell, delta, cfg, cfg.dt)
    base = uniform_samples(cfg.T, cfg.dt, cfg.sample_dt, cfg.layer_window)
    every = uniform_samples(cfg.T, cfg.dt, cfg.dt)
    errs, _, _ = compare(coated, eff, cfg.u0, cfg.T, every)
    e = dict(zip(np.round(every / cfg.dt).astype(int), errs))
    coarse = max(e[int(round(t / cfg.dt))] for t in base)
    return (max(errs) - coarse) / max(errs) if max(errs) > 0 else 0.0


def steady_pair(cell_id: str, delta: float, cfg: RunConfig | None = None) -> tuple[SteadyState, SteadyState]:
    cfg = cfg or RunConfig()
    cell = get_cell(cell_id)
    sp = cfg.spectrum()
    spec = CoatingSpec(cfg.k, cell.sigma(delta), cell.mu(delta), delta)
    return (steady_coated(spec, sp, cfg.Nb, cfg.Nc),
            steady_effective(cell.ebc, cfg.k, sp, cfg.Nb))


def lifespan_run(cell_id: str, delta: float, T_long: float | None = None, cfg: RunConfig | None = None,
                 timing: bool = False) -> ConvergenceRecord:
    """Errors on a geometric time grid up to ``T_long`` and the terminal decomposition.

    ``sup_window`` is the sup over the samples in ``[0, cfg.T]``.
    """
    cfg = cfg or RunConfig()
    T_long = cfg.T_long if T_long is None else float(T_long)
    if T_long < 20:
        raise ParameterDomainError("lifespan runs need T_long >= 20")
    cell = get_cell(cell_id)
    regime_family(cell_id, delta, cfg.R1)
    t0 = time.perf_counter()
    spec, coated, eff = _solvers(cell, delta, cfg, cfg.dt_long)
    times = geometric_samples(T_long, cfg.dt_long, cfg.per_decade)
    errs, uT, vT = compare(coated, eff, cfg.u0, T_long, times)
    U, V = steady_pair(cell_id, delta, cfg)
    zero = ModalField(np.zeros_like(uT.values), uT.grid, uT.spectrum)
    zero_v = ModalField(np.zeros_like(vT.values), vT.grid, vT.spectrum)
    u_U = difference_norm(uT, U.profile if U.profile is not None else zero, "all")
    v_V = difference_norm(vT, V.profile if V.profile is not None else zero_v, "all")
    window = max(e for e, t in zip(errs, times) if t <= cfg.T + 1e-12)
    wall = time.perf_counter() - t0 if timing else 0.0
    return ConvergenceRecord(cell_id, delta, spec.sigma, spec.mu, float(max(errs)), float(errs[-1]),
                             steady_gap(U, V), wall, len(times), float(times[-1]), u_U, v_V, window,
                             {"U_exists": U.exists, "V_exists": V.exists})


CSV_COLUMNS = ("cell", "delta", "sigma", "mu", "sup_error", "terminal_error", "steady_gap", "wall_time")
DECOMP_COLUMNS = ("cell", "delta", "t_final", "sup_window", "u_minus_U", "v_minus_V", "steady_gap")


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in columns])
    return buf.getvalue()


def emit_report(records: list[ConvergenceRecord], path, config: RunConfig | dict | None = None,
                name: str = "report") -> list[Path]:
    """Write ``<name>.csv`` and ``<name>.json`` (and the decomposition table if present).

    Rows are grouped by cell in first-seen order and sorted by decreasing
    ``delta`` inside a cell, so the output bytes depend only on the inputs.
    """
    if not records:
        raise ValueError("no records to report")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    order = {c: i for i, c in enumerate(dict.fromkeys(r.cell for r in records))}
    rows = sorted(records, key=lambda r: (order[r.cell], -r.delta))
    if isinstance(config, RunConfig):
        config = asdict(config)
    manifest = {
        "tool": "coatfkpp",
        "version": __version__,
        "config": config or {},
        "cells": {c: {"row_sigma_mu": CELLS[c].row, "col_sigma_over_delta": CELLS[c].col,
                      "sigma": f"delta^{CELLS[c].sigma_exp:g}", "mu": f"delta^{CELLS[c].mu_exp:g}",
                      "ebc": CELLS[c].ebc.label} for c in order if c in CELLS},
        "records": [{"cell": r.cell, "delta": r.delta, "n_samples": r.n_samples, "t_final": r.t_final,
                     **{k: _jsonable(v) for k, v in r.extra.items()}} for r in rows],
    }
    written = []
    p = out / f"{name}.csv"
    p.write_text(_csv(rows, CSV_COLUMNS), newline="")
    written.append(p)
    if any(not math.isnan(r.u_minus_U) for r in rows):
        p = out / f"{name}_decomposition.csv"
        p.write_text(_csv(rows, DECOMP_COLUMNS), newline="")
        written.append(p)
    p = out / f"{name}.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=True) + "\n", newline="")
    written.append(p)
    return written


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v
