"""Command-line entry point.

Exit codes: 0 success, 2 invariant violation or invalid input, 3 solver
failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .coated import CoatedSolver, CoatingSpec
from .dtn import build_dtn
from .effective import EbcKind, EffectiveSolver
from .eigen import EigenConvergenceError, principal_eigen_coated, principal_eigen_effective
from .evolution import MaximumPrincipleError
from .fields import ModalField, volume_integral, weighted_l2_norm
from .harness import CELLS, DEFAULT_DELTAS, RunConfig, SweepError, emit_report, lifespan_run, sweep_delta
from .steady import SteadyStateError, steady_coated, steady_effective
from .surface import ParameterDomainError, build_surface

EXIT_INVARIANT = 2
EXIT_SOLVER = 3

SOLVE_DEFAULTS = {
    "geometry": "sphere", "R1": 1.0, "L": 16, "k": 1.0, "sigma": 1.0, "mu": 1.0, "delta": 0.1,
    "Nb": 256, "Nc": 32, "dt": 1e-3, "T": 1.0, "theta": 1.0, "reaction": "logistic",
    "u0": "constant:0.5", "sample_times": None, "ebc": "neumann", "alpha": None, "gamma": None,
}


def _load(path) -> dict:
    cfg = dict(SOLVE_DEFAULTS)
    if path:
        with open(path) as f:
            cfg.update(json.load(f))
    return cfg


def _spectrum(cfg):
    return build_surface(cfg["geometry"], float(cfg["R1"]), int(cfg["L"]))


def _spec(cfg):
    return CoatingSpec(float(cfg["k"]), float(cfg["sigma"]), float(cfg["mu"]), float(cfg["delta"]))


def _ebc(cfg):
    return EbcKind.from_config(cfg["ebc"], cfg.get("alpha"), cfg.get("gamma"))


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n", newline="")


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _write_states(path: Path, states: list[ModalField]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "l", "rho", "value"])
        for s in states:
            for l in range(s.values.shape[0]):
                for rho, v in zip(s.grid.nodes, s.values[l]):
                    w.writerow([repr(float(s.t)), l, repr(float(rho)), repr(float(v))])


def _write_profile(path: Path, field: ModalField) -> None:
    phys = field.values[0] * field.spectrum.e0
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rho", "value"])
        for rho, v in zip(field.grid.nodes, phys):
            w.writerow([repr(float(rho)), repr(float(v))])


def _norms(states):
    return [{"t": s.t, "l2_all": weighted_l2_norm(s), "l2_bulk": weighted_l2_norm(s, "bulk"),
             "integral": volume_integral(s), "min": float(s.nodal().min()), "max": float(s.nodal().max())}
            for s in states]


def cmd_dtn_table(args) -> int:
    sp = build_surface(args.geometry, args.R1, args.L)
    h = math.inf if args.h in ("inf", "infinity") else float(args.h)
    op = build_dtn(sp, h)
    lines = ["mode,lambda,multiplier"] + [f"{n},{lam!r},{m!r}" for n, (lam, m) in
                                          enumerate(zip(sp.eigenvalues.tolist(), op.multipliers.tolist()))]
    text = "\n".join(lines) + "\n"
    if args.out_given:
        (_out(args) / "dtn_table.csv").write_text(text, newline="")
    else:
        sys.stdout.write(text)
    return 0


def _solve(args, solver, cfg, tag) -> int:
    T = float(cfg["T"])
    times = cfg["sample_times"] if cfg["sample_times"] is not None else [0.0, T]
    states = solver.solve(cfg["u0"], T, times)
    out = _out(args)
    _write_states(out / f"{tag}.csv", states)
    _write_json(out / f"{tag}.json", {"parameters": cfg, "norms": _norms(states)})
    return 0


def cmd_solve_full(args) -> int:
    cfg = _load(args.config)
    solver = CoatedSolver(_spec(cfg), _spectrum(cfg), int(cfg["Nb"]), int(cfg["Nc"]), dt=float(cfg["dt"]),
                          theta=float(cfg["theta"]), reaction=cfg["reaction"])
    return _solve(args, solver, cfg, "solve_full")


def cmd_solve_effective(args) -> int:
    cfg = _load(args.config)
    solver = EffectiveSolver(_ebc(cfg), float(cfg["k"]), _spectrum(cfg), int(cfg["Nb"]), dt=float(cfg["dt"]),
                             theta=float(cfg["theta"]), reaction=cfg["reaction"])
    return _solve(args, solver, cfg, "solve_effective")


def cmd_eigen(args) -> int:
    cfg = _load(args.config)
    sp = _spectrum(cfg)
    if args.problem == "coated":
        pair = principal_eigen_coated(_spec(cfg), sp, int(cfg["Nb"]), int(cfg["Nc"]))
    else:
        pair = principal_eigen_effective(_ebc(cfg), float(cfg["k"]), sp, int(cfg["Nb"]))
    out = _out(args)
    result = {"lambda": pair.eigenvalue, "residual": pair.residual, "mode": pair.mode,
              "iterations": pair.iterations, "second": pair.second}
    _write_json(out / "eigen.json", result)
    _write_profile(out / "eigen_profile.csv", pair.field)
    print(json.dumps(result, sort_keys=True, default=_default))
    return 0


def cmd_steady(args) -> int:
    cfg = _load(args.config)
    sp = _spectrum(cfg)
    if args.problem == "coated":
        st = steady_coated(_spec(cfg), sp, int(cfg["Nb"]), int(cfg["Nc"]))
    else:
        st = steady_effective(_ebc(cfg), float(cfg["k"]), sp, int(cfg["Nb"]))
    out = _out(args)
    result = {"exists": st.exists, "lambda1": st.eigenvalue, "residual": st.residual,
              "march_norm": st.march_norm, "t_probe": st.t_probe}
    _write_json(out / "steady.json", result)
    if st.profile is not None:
        _write_profile(out / "steady_profile.csv", st.profile)
    print(json.dumps(result, sort_keys=True, default=_default))
    return 0


def _run_config(args) -> RunConfig:
    if not args.config:
        return RunConfig()
    with open(args.config) as f:
        return RunConfig.from_dict(json.load(f))


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    cells = list(CELLS) if args.cells == "all" else args.cells.split(",")
    deltas = [float(d) for d in args.deltas.split(",")] if args.deltas else list(DEFAULT_DELTAS)
    records = []
    try:
        for c in cells:
            records += sweep_delta(c, deltas, cfg, threads=args.threads, timing=args.timing)
    except SweepError as exc:
        records += exc.records
        if records:
            emit_report(records, _out(args), cfg, "sweep")
        raise
    emit_report(records, _out(args), cfg, "sweep")
    for r in records:
        print(f"{r.cell:17s} delta={r.delta:<8g} sup_error={r.sup_error:.6e}")
    return 0


def cmd_lifespan(args) -> int:
    cfg = _run_config(args)
    deltas = [float(d) for d in args.deltas.split(",")] if args.deltas else list(DEFAULT_DELTAS)
    records = [lifespan_run(args.cell, d, cfg.T_long, cfg, timing=args.timing) for d in deltas]
    emit_report(records, _out(args), cfg, "lifespan")
    for r in records:
        print(f"{r.cell} delta={r.delta:g} sup={r.sup_error:.6e} |u-U|={r.u_minus_U:.3e} "
              f"|v-V|={r.v_minus_V:.3e} |U-V|={r.steady_gap:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default=None, help="output directory (default: current directory)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent runs")
    common.add_argument("--timing", action="store_true", help="record wall time (breaks byte determinism)")

    p = argparse.ArgumentParser(prog="coatfkpp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dtn-table", parents=[common], help="DtN multipliers as CSV")
    s.add_argument("--geometry", default="sphere", choices=["sphere", "circle"])
    s.add_argument("--R1", type=float, default=1.0)
    s.add_argument("--L", type=int, default=8)
    s.add_argument("--h", default="inf")
    s.set_defaults(func=cmd_dtn_table)

    sub.add_parser("solve-full", parents=[common], help="coated time-dependent solve").set_defaults(func=cmd_solve_full)
    sub.add_parser("solve-effective", parents=[common], help="effective time-dependent solve").set_defaults(
        func=cmd_solve_effective)
    for name, fn, text in (("eigen", cmd_eigen, "principal eigenpair"), ("steady", cmd_steady, "positive steady state")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--problem", choices=["coated", "effective"], default="coated")
        s.set_defaults(func=fn)

    s = sub.add_parser("sweep", parents=[common], help="delta sweep over regime cells")
    s.add_argument("--cells", default="all", help="'all' or comma-separated cell ids")
    s.add_argument("--deltas", default=None, help="comma-separated, strictly decreasing")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("lifespan", parents=[common], help="long-time comparison for one cell")
    s.add_argument("--cell", required=True, choices=list(CELLS))
    s.add_argument("--deltas", default=None)
    s.set_defaults(func=cmd_lifespan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.out_given = args.out is not None
    if args.out is None:
        args.out = "."
    try:
        return args.func(args)
    except (MaximumPrincipleError, SteadyStateError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ParameterDomainError, ValueError, KeyError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SweepError as exc:
        if isinstance(exc.cause, MaximumPrincipleError):
            print(f"invariant violation: {exc}", file=sys.stderr)
            return EXIT_INVARIANT
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (np.linalg.LinAlgError, EigenConvergenceError, FloatingPointError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
