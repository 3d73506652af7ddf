"""Command-line front end: load chart files, run validations and solvers,
emit deterministic CSV or JSON tables.

Exit codes: 0 success, 1 usage or parse error, 2 validation/compatibility
failure, 3 numerical non-convergence.  Floats are printed with 17
significant digits so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import builder
from .asymptotics import ConformalMetric3, adm_mass
from .chart import BlockMetric, CoordinatePoint, load_chart, save_chart
from .curvature import curvature_pack
from .errors import CompatibilityError, ConvergenceError, ExprSyntaxError, ImcvfError
from .expr import parse
from .grid import SphereGrid
from .sphere import hawking_mass, mean_curvature_values
from .steering import frame_data, steering_parameter
from .straightout import solve_straight_out_d, straight_out_residual

SCHEMA = "imcvf-report/1"


def thread_count() -> int:
    """Worker cap from IMCVF_THREADS; 0 or unset means all cores."""
    raw = os.environ.get("IMCVF_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return os.cpu_count() or 1 if n <= 0 else n


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _emit(args, header, rows, json_payload=None):
    if args.json:
        payload = {"schema": SCHEMA, "command": args.command,
                   "columns": list(header),
                   "rows": [[_json_val(v) for v in row] for row in rows]}
        if json_payload:
            payload.update(json_payload)
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_val(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    return v


def _grid_sizes(spec: str):
    try:
        n_theta, n_phi = (int(x) for x in spec.split(","))
    except ValueError as exc:
        raise ImcvfError(f"bad --grid {spec!r}, expected 'N_THETA,N_PHI'") from exc
    if n_theta < 8 or n_phi < 8:
        raise ImcvfError("grid sizes must be at least 8")
    return n_theta, n_phi


def _floats(spec: str):
    return [float(x) for x in spec.split(",") if x.strip()]


def _load_metric(path) -> BlockMetric:
    return load_chart(path).metric()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    g = _load_metric(args.chart)
    spec = builder.ValidationSpec()
    if args.r_values:
        spec.r_values = tuple(_floats(args.r_values))
    if args.t is not None:
        spec.t = args.t
    if args.tol_cond3:
        spec.tol_cond3 = args.tol_cond3
    if args.tol_cond4:
        spec.tol_cond4 = args.tol_cond4
    report = builder.validate_chart(g, spec)
    items = sorted(report.as_dict().items())
    _emit(args, [k for k, _ in items], [[v for _, v in items]])
    return 0 if report.passed else 2


def cmd_build(args) -> int:
    cf = load_chart(args.chart)
    if not (args.solve_d or cf.solve_d):
        raise ImcvfError("nothing to do: pass --solve-d or set \"solve_d\" in the chart")
    g = builder.complete_chart_file(cf)
    save_chart(g, args.out, params=cf.params)
    print(f"wrote completed chart to {args.out}", file=sys.stderr)
    return 0


def cmd_curvature(args) -> int:
    g = _load_metric(args.chart)
    rows = []
    names = ("t", "r", "th", "ph")
    comps = [("Ric", "ricci"), ("G", "einstein")]
    header = list(names) + ["R"]
    idx = [(i, j) for i in range(4) for j in range(i, 4)]
    for label, _ in comps:
        header += [f"{label}_{names[i]}{names[j]}" for i, j in idx]
    for spec in args.points.split(";"):
        vals = _floats(spec)
        if len(vals) != 4:
            raise ImcvfError(f"bad point {spec!r}, expected 't,r,th,ph'")
        p = CoordinatePoint(*vals)
        pack = curvature_pack(g, p)
        row = list(vals) + [pack.scalar]
        for _, attr in comps:
            m = getattr(pack, attr)
            row += [m[i, j] for i, j in idx]
        rows.append(row)
    _emit(args, header, rows)
    return 0


def cmd_hawking(args) -> int:
    g = _load_metric(args.chart)
    n_theta, n_phi = _grid_sizes(args.grid)
    radii = _floats(args.r)

    def one(r):
        return hawking_mass(g, SphereGrid(args.t, r, n_theta, n_phi))

    with ThreadPoolExecutor(max_workers=min(thread_count(), len(radii))) as pool:
        masses = list(pool.map(one, radii))
    _emit(args, ["r", "m_H"], [[r, m] for r, m in zip(radii, masses)])
    return 0


def cmd_meancurv(args) -> int:
    g = _load_metric(args.chart)
    n_theta, n_phi = _grid_sizes(args.grid)
    grid = SphereGrid(args.t, args.r, n_theta, n_phi)
    h_r, h_n, star = mean_curvature_values(g, grid.env(), method=args.method)
    rows = [[grid.theta[i], grid.phi[j], h_r[i, j], h_n[i, j], star[i, j]]
            for i in range(n_theta) for j in range(n_phi)]
    _emit(args, ["th", "ph", "H_r", "H_n", "star"], rows)
    return 0


def cmd_steer(args) -> int:
    g = _load_metric(args.chart)
    n_theta, n_phi = _grid_sizes(args.grid)
    grid = SphereGrid(args.t, args.r, n_theta, n_phi)
    fd = frame_data(g, grid.env())
    q = steering_parameter(fd)
    rows = [[grid.theta[i], grid.phi[j], q[i, j]]
            for i in range(n_theta) for j in range(n_phi)]
    _emit(args, ["th", "ph", "Q"], rows)
    return 0


def cmd_straightout(args) -> int:
    g = _load_metric(args.chart)
    n_theta, n_phi = _grid_sizes(args.grid)
    grid = SphereGrid(args.t, args.r, n_theta, n_phi)
    if args.solve:
        sol = solve_straight_out_d(g, grid, compat_tol=args.compat_tol)
        for k, (upd, comp) in enumerate(zip(sol.update_norms, sol.compat_integrals)):
            print(f"iter {k}: update {upd:.3e}  solvability integral {comp:.3e}",
                  file=sys.stderr)
        if sol.compatibility_failed:
            print("compatibility failure: solvability integral is not zero",
                  file=sys.stderr)
            return 2
        if not sol.converged:
            print("Picard iteration did not converge", file=sys.stderr)
            return 3
        rows = [[grid.theta[i], grid.phi[j], sol.d[i, j]]
                for i in range(n_theta) for j in range(n_phi)]
        _emit(args, ["th", "ph", "d"], rows,
              {"residual_inf": sol.residual_inf, "iterations": sol.iterations})
        return 0
    out = straight_out_residual(g, grid)
    print(f"route agreement: max difference {out.max_difference:.3e}",
          file=sys.stderr)
    rows = [[grid.theta[i], grid.phi[j], out.closed[i, j], out.direct[i, j]]
            for i in range(n_theta) for j in range(n_phi)]
    _emit(args, ["th", "ph", "residual_closed", "residual_direct"], rows,
          {"max_difference": out.max_difference})
    return 0


def cmd_adm(args) -> int:
    factor = parse(args.factor)
    radii = _floats(args.radii)
    res = adm_mass(ConformalMetric3(factor), radii)
    rows = [[r, v] for r, v in zip(res.radii, res.values)]
    rows.append(["extrapolated", res.mass])
    _emit(args, ["r", "adm_integral"], rows, {"mass": res.mass,
                                              "diverging": bool(res.diverging)})
    if res.diverging:
        print("warning: surface integrals diverge with radius", file=sys.stderr)
        return 2
    return 0


def cmd_flowscan(args) -> int:
    cf = load_chart(args.chart)
    u, v = cf.exprs["u"], cf.exprs["v"]
    lo, hi, n = args.r_range.split(":")
    rep = builder.monotonicity_check_spherical(u, v, args.t,
                                               (float(lo), float(hi)), int(n))
    rows = [[r, m, dm, gtt] for r, m, dm, gtt in
            zip(rep.r, rep.m_h, rep.dmh_ds, rep.g_tt)]
    _emit(args, ["r", "m_H", "dmH_ds", "G_tt"], rows,
          {"identity_err_max": rep.identity_err_max,
           "monotone_ok": bool(rep.monotone_ok)})
    return 0 if rep.monotone_ok else 2


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imcvf",
                                 description="IMCVF chart construction and validation")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, chart=True, grid=True, sphere=False):
        if chart:
            p.add_argument("--chart", required=True, help="chart JSON file")
        if grid:
            p.add_argument("--grid", default="64,128", help="N_THETA,N_PHI")
        if sphere:
            p.add_argument("--t", type=float, default=0.0)
            p.add_argument("--r", type=float, required=True)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--json", action="store_true", help="JSON instead of CSV")

    p = sub.add_parser("validate", help="check the four chart conditions")
    common(p, grid=False)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--r-values", help="comma-separated radii")
    p.add_argument("--tol-cond3", type=float)
    p.add_argument("--tol-cond4", type=float)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("build", help="solve for the d component")
    p.add_argument("--chart", required=True)
    p.add_argument("--solve-d", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("curvature", help="tensor dump at points")
    common(p, grid=False)
    p.add_argument("--points", required=True, help="'t,r,th,ph;t,r,th,ph;...'")
    p.set_defaults(fn=cmd_curvature)

    p = sub.add_parser("hawking", help="Hawking mass of coordinate spheres")
    common(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--r", required=True, help="comma-separated radii")
    p.set_defaults(fn=cmd_hawking)

    p = sub.add_parser("meancurv", help="mean curvature decomposition per node")
    common(p, sphere=True)
    p.add_argument("--method", choices=("closed", "trace"), default="closed")
    p.set_defaults(fn=cmd_meancurv)

    p = sub.add_parser("steer", help="steering parameter field")
    common(p, sphere=True)
    p.set_defaults(fn=cmd_steer)

    p = sub.add_parser("straightout", help="straight-out residual or d solve")
    common(p, sphere=True)
    p.add_argument("--solve", action="store_true", help="run the Picard solver")
    p.add_argument("--compat-tol", type=float, default=1e-6)
    p.set_defaults(fn=cmd_straightout)

    p = sub.add_parser("adm", help="ADM mass surface integrals")
    p.add_argument("--factor", required=True, help="radial conformal factor u(r)")
    p.add_argument("--radii", required=True, help="comma-separated radii")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_adm)

    p = sub.add_parser("flowscan", help="m_H and G_tt along the radial flow")
    p.add_argument("--chart", required=True, help="chart with spherical u, v")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--r-range", default="1.5:10:64", help="lo:hi:n")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_flowscan)
    return ap


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ExprSyntaxError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CompatibilityError as exc:
        print(f"compatibility failure: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    except ImcvfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
