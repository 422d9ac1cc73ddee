"""Command line entry point.

Every subcommand writes deterministic CSV/JSON files into the output
directory (``--out``, else $ORTHOEXP_OUT_DIR, else ./out) and prints a short
JSON summary.  Module errors exit with status 2 and an error record on
stderr; a check that runs but fails exits with status 1.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, exact, fixtures
from .constructions import check_thm24, construct_thm21, construct_thm22
from .errors import OrthoExpError
from .fourier import fourier, singular_edge
from .geometry import Polytope, polytope_from_json, polytope_to_json, project_zonotope
from .verify import density_estimate, orthogonality_report, sigma_generators
from .zonotope import (
    WeightedQuadrature,
    WeightEvaluator,
    ZonotopeSpec,
    build_lambda,
    density_bound,
    integer_kernel,
    monte_carlo_weight,
    slice_volume,
    weighted_orthogonality_check,
)

ENV_OUT = "ORTHOEXP_OUT_DIR"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class Run:
    """Output directory plus the provenance embedded in every report."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out or os.environ.get(ENV_OUT) or "out")
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs: dict[str, str] = {}
        self.written: list[str] = []

    def read(self, path: str) -> bytes:
        data = Path(path).read_bytes()
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data

    def read_json(self, path: str) -> Any:
        return json.loads(self.read(path))

    def meta(self) -> dict:
        command = " ".join(filter(None, [self.args.command, getattr(self.args, "fixture", None)]))
        return {"tool": "orthoexp", "version": __version__, "command": command,
                "seed": self.args.seed, "inputs": dict(sorted(self.inputs.items()))}

    def write_json(self, name: str, payload: dict) -> None:
        body = {"meta": self.meta(), **payload}
        text = json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"
        (self.out / name).write_text(text)
        self.written.append(name)

    def write_csv(self, name: str, header: Sequence[str], rows, comment: str | None = None) -> None:
        buf = io.StringIO()
        if comment:
            buf.write(f"# {comment}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(x) for x in row])
        (self.out / name).write_text(buf.getvalue())
        self.written.append(name)


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def read_points(data: bytes) -> np.ndarray:
    """Numeric rows of a CSV file; '#' lines and a non-numeric header are skipped."""
    rows = []
    for line in data.decode().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append([float(Fraction(c)) if "/" in c else float(c) for c in cells])
        except ValueError:
            if rows:
                raise
            continue  # header
    if not rows:
        raise ValueError("no numeric rows in CSV")
    return np.array(rows)


def _point_columns(prefix: str, d: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(d)]


def _load_polytope(run: Run, path: str) -> Polytope:
    return polytope_from_json(run.read_json(path))


def _lambda_rows(lam) -> list[list]:
    coords = lam.integer_coords or [()] * len(lam.points)
    return [list(c) + list(p) for c, p in zip(coords, lam.points)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(run: Run, a: argparse.Namespace) -> int:
    poly = _load_polytope(run, a.polytope)
    if a.theorem == 21:
        lam = construct_thm21(poly, a.count, a.enum_bound)
        extra = {"n": lam.meta["n"], "enum_bound": lam.meta["enum_bound"],
                 "hyperplanes": lam.meta["hyperplanes"], "coverage": lam.coverage}
    else:
        if a.axis is None:
            raise ValueError("--axis is required for theorem 22")
        lam = construct_thm22(poly, a.axis - 1, a.count)
        extra = {"axis": a.axis, "scaling": lam.meta["scaling"],
                 "scaled_polytope": polytope_to_json(lam.polytope)}
    d = poly.dim
    run.write_csv("lambda.csv", _point_columns("k", d) + _point_columns("x", d), _lambda_rows(lam),
                  comment=f"scale={lam.scale!r} provenance={lam.provenance}")
    run.write_json("construct.json", {"provenance": lam.provenance, "scale": lam.scale,
                                      "count": len(lam), **extra})
    return 0


def cmd_verify(run: Run, a: argparse.Namespace) -> int:
    poly = _load_polytope(run, a.polytope)
    pts = read_points(run.read(a.points))
    if pts.shape[1] == 2 * poly.dim:
        pts = pts[:, poly.dim:]  # lambda.csv layout: integer coords then points
    report = orthogonality_report(poly, pts, a.tol)
    payload = {"orthogonality": report.to_dict()}
    if a.thm24:
        necessary = check_thm24(poly, pts)
        payload["vertex_pair_condition"] = {
            "violations": necessary.violations,
            "witnesses": [None if w is None else {"index": w.index, "vertices": list(w.vertices),
                                                   "m": w.m, "residual": w.residual}
                          for w in necessary.records]}
    run.write_json("verify.json", payload)
    return 0 if report.passed else 1


def _parse_vector(text: str) -> list[float]:
    return [float(Fraction(x)) if "/" in x else float(x) for x in text.split(",")]


def cmd_fourier(run: Run, a: argparse.Namespace) -> int:
    poly = _load_polytope(run, a.polytope)
    omegas = [_parse_vector(w) for w in (a.omega or [])]
    if a.omegas:
        omegas.extend(read_points(run.read(a.omegas)).tolist())
    if not omegas:
        raise ValueError("give --omega or --omegas")
    method = None if a.method == "auto" else a.method
    rows = []
    for w in omegas:
        val = fourier(poly, w, method)
        rows.append(list(w) + [val.value.real, val.value.imag, abs(val.value), val.method,
                               int(singular_edge(poly, w) is not None)])
    run.write_csv("fourier.csv", _point_columns("w", poly.dim) + ["re", "im", "abs", "method", "singular"],
                  rows)
    run.write_json("fourier.json", {"count": len(rows), "volume": poly.volume})
    return 0


def cmd_density(run: Run, a: argparse.Namespace) -> int:
    rhos = [float(r) for item in a.rho for r in str(item).split(",")]
    poly = _load_polytope(run, a.polytope) if a.polytope else None
    if a.generators:
        est = density_estimate(rhos, generators=read_points(run.read(a.generators)), polytope=poly)
    elif a.points:
        pts = read_points(run.read(a.points))
        if poly is not None and pts.shape[1] == 2 * poly.dim:
            pts = pts[:, poly.dim:]
        est = density_estimate(rhos, points=pts, coverage=a.coverage, polytope=poly)
    else:
        raise ValueError("give --points or --generators")
    run.write_csv("density.csv", ["rho", "sup_count", "inf_count", "sup_ratio", "inf_ratio"],
                  [list(r.values()) for r in est.rows()])
    run.write_json("density.json", est.to_dict())
    return 0


def _zonotope_outputs(run: Run, spec: ZonotopeSpec, radius: int, grid: int,
                      n_residuals: int) -> dict:
    K = integer_kernel(spec)
    lam = build_lambda(spec, K, radius)
    bound = density_bound(spec, K)
    run.write_csv("lambda.csv", _point_columns("a", spec.m) + _point_columns("x", spec.m),
                  _lambda_rows(lam.sample), comment=f"scale={math.pi!r} provenance=thm25")
    zono = project_zonotope(spec.matrix, spec.m)
    run.write_csv("projection_vertices.csv", _point_columns("x", spec.m), zono.points.tolist())
    if spec.m <= 2 and grid > 0:
        lo, hi = zono.points.min(axis=0), zono.points.max(axis=0)
        axes = [np.linspace(l, h, grid) for l, h in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, spec.m)
        run.write_csv("weight_grid.csv", _point_columns("x", spec.m) + ["W"],
                      np.c_[pts, slice_volume(spec, pts)].tolist())
    quad = WeightedQuadrature(spec)
    residuals = [weighted_orthogonality_check(spec, K, p, quad).to_dict()
                 for p in lam.sample.points[1:1 + n_residuals]]
    run.write_json("residuals.json", {"w_mass": quad.mass,
                                      "expected_mass": spec.abs_det * 2.0 ** spec.d,
                                      "fit_residual": quad.fit_residual, "checks": residuals})
    summary = {"kernel": [list(k) for k in K.K], "kernel_source": K.source,
               "kernel_residual": K.residual, "sigma": [list(r) for r in lam.sigma],
               "U": [list(r) for r in lam.U], "density": bound.to_dict(),
               "max_weighted_residual": max((r["relative"] for r in residuals), default=0.0)}
    run.write_json("zonotope.json", summary)
    return summary


def cmd_zonotope(run: Run, a: argparse.Namespace) -> int:
    obj = run.read_json(a.matrix)
    if isinstance(obj, list):
        obj = {"matrix": obj}
    m = a.m if a.m is not None else obj.get("m")
    if m is None:
        raise ValueError("target dimension m missing (--m or 'm' in the matrix file)")
    kernel = obj.get("kernel")
    if a.kernel:
        kobj = run.read_json(a.kernel)
        kernel = kobj["kernel"] if isinstance(kobj, dict) else kobj
    spec = ZonotopeSpec(tuple(tuple(r) for r in obj["matrix"]), int(m),
                        tuple(tuple(k) for k in kernel) if kernel else None)
    _zonotope_outputs(run, spec, a.radius, a.grid, a.residuals)
    return 0


# fixtures ------------------------------------------------------------------


def fixture_fig1(run: Run, a: argparse.Namespace) -> int:
    poly = fixtures.fig1_polygon()
    run.write_json("fig1_polytope.json", polytope_to_json(poly))
    lam = construct_thm21(poly, a.count)
    run.write_csv("fig1_lambda.csv", ["k1", "k2", "x1", "x2"], _lambda_rows(lam),
                  comment=f"scale={lam.scale!r} provenance=thm21")
    report = orthogonality_report(poly, lam, a.tol)
    axis = construct_thm22(poly, 0, 21)
    axis_report = orthogonality_report(axis.polytope, axis, a.tol)
    witnesses = check_thm24(poly, lam)
    ok = report.passed and axis_report.passed and witnesses.all_witnessed
    run.write_json("fig1_report.json", {
        "hyperplanes": lam.meta["hyperplanes"], "orthogonality": report.to_dict(),
        "axis_lattice": axis_report.to_dict(), "vertex_pair_violations": witnesses.violations,
        "passed": ok})
    return 0 if ok else 1


def fixture_ex32(run: Run, a: argparse.Namespace) -> int:
    p, q = a.p, a.q
    spec = fixtures.ex32_spec(p, q)
    summary = _zonotope_outputs(run, spec, a.radius, a.grid, a.residuals)
    zono = project_zonotope(spec.matrix, 2)
    printed = math.sqrt(2.0) * fixtures.ex32_hexagon(p, q)
    hex_err = max(float(np.abs(printed - v).max(axis=1).min()) for v in zono.points)
    hex_err = max(hex_err, max(float(np.abs(zono.points - h).max(axis=1).min()) for h in printed))
    run.write_csv("hexagon.csv", ["x1", "x2"], printed.tolist())
    target = fixtures.ex32_density(p, q)
    K = integer_kernel(spec)
    est = density_estimate([50, 100, 200], generators=sigma_generators(spec, K))
    exact_err = abs(summary["density"]["lattice_density"] / target - 1)
    count_err = max(abs(r / target - 1) for r in (est.sup_ratios[-1], est.inf_ratios[-1]))
    checks = {"hexagon_max_error": hex_err, "density_target": target,
              "lattice_density_rel_error": exact_err, "box_count_rel_error_rho200": count_err,
              "density_rows": est.rows()}
    if p == 1 and q == 1:
        grid = fixtures.ex32_grid()
        slice_w = slice_volume(spec, grid)
        line_w = WeightEvaluator(spec, "line_length").batch(grid)
        mc_w = monte_carlo_weight(spec, grid, 10**6, a.seed)
        checks["weight_line_vs_slice"] = float(np.abs(slice_w - line_w).max())
        checks["weight_mc_vs_slice"] = float(np.abs(slice_w - mc_w).max())
    ok = (hex_err <= 1e-10 and exact_err <= 1e-10 and count_err <= 0.05
          and summary["max_weighted_residual"] <= 1e-6)
    checks["passed"] = ok
    run.write_json("ex32_report.json", checks)
    return 0 if ok else 1


def fixture_ex33(run: Run, a: argparse.Namespace) -> int:
    spec = fixtures.ex33_spec()
    summary = _zonotope_outputs(run, spec, a.radius, 0, a.residuals)
    K = summary["kernel"]
    zono = project_zonotope(spec.matrix, 3)
    printed = set(fixtures.EX33_VERTICES)
    sigma = [[Fraction(x) for x in r] for r in summary["sigma"]]
    checks = {
        "matrix_matches_printed": [list(r) for r in spec.matrix] == fixtures.EX33_M_PRINTED,
        "kernel_spans_printed": exact.rank(K) == 3
        and exact.rank(list(K) + [list(k) for k in fixtures.EX33_KBAR]) == 3,
        "kernel_equals_printed_lattice": exact.same_lattice(K, fixtures.EX33_KBAR),
        "lambda_prime_equal": exact.same_lattice(sigma, fixtures.EX33_LAMBDA_PRIME),
        "vertices_match": set(zono.vertices) == printed,
        "vertex_count": zono.n_vertices,
    }
    ok = all(checks[k] for k in ("matrix_matches_printed", "kernel_spans_printed",
                                 "lambda_prime_equal", "vertices_match"))
    ok = ok and summary["max_weighted_residual"] <= 1e-6
    checks["passed"] = ok
    run.write_json("ex33_report.json", checks)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthoexp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"orthoexp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./out)")
    common.add_argument("--config", help="JSON file whose keys override command-line flags")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default 0)")
    common.add_argument("--tol", type=float, default=1e-8, help="orthogonality tolerance (default 1e-8)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build an orthogonal set")
    p.add_argument("--polytope", required=True, help="polytope JSON")
    p.add_argument("--theorem", type=int, choices=(21, 22), default=21)
    p.add_argument("--axis", type=int, help="1-based axis for the rank-one lattice")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--enum-bound", type=int, default=None, help="sup-norm radius (default 64n)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="pairwise orthogonality report")
    p.add_argument("--polytope", required=True)
    p.add_argument("--points", required=True, help="CSV of points (lambda.csv accepted)")
    p.add_argument("--thm24", action="store_true", help="also run the vertex-pair condition")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fourier", parents=[common], help="evaluate F_P")
    p.add_argument("--polytope", required=True)
    p.add_argument("--omega", action="append", help="comma-separated frequency; repeatable")
    p.add_argument("--omegas", help="CSV of frequencies")
    p.add_argument("--method", choices=("auto", "lawrence", "oracle"), default="auto")
    p.set_defaults(func=cmd_fourier)

    p = sub.add_parser("density", parents=[common], help="box-count density estimate")
    p.add_argument("--points", help="CSV of points")
    p.add_argument("--generators", help="CSV of lattice basis rows")
    p.add_argument("--coverage", type=float, help="sup-norm radius inside which --points is complete")
    p.add_argument("--rho", action="append", required=True, help="box sizes, comma-separated")
    p.add_argument("--polytope", help="polytope JSON for the Landau reference line")
    p.set_defaults(func=cmd_density)

    zono_opts = argparse.ArgumentParser(add_help=False)
    zono_opts.add_argument("--radius", type=int, default=2, help="sample box for Lambda (default 2)")
    zono_opts.add_argument("--grid", type=int, default=41, help="weight grid size per axis (m <= 2)")
    zono_opts.add_argument("--residuals", type=int, default=10,
                           help="weighted orthogonality checks to run (default 10)")

    p = sub.add_parser("zonotope", parents=[common, zono_opts], help="projected cube pipeline")
    p.add_argument("--matrix", required=True, help="JSON with 'matrix' (and optionally 'm', 'kernel')")
    p.add_argument("--m", type=int)
    p.add_argument("--kernel", help="JSON list of integer kernel vectors")
    p.set_defaults(func=cmd_zonotope)

    p = sub.add_parser("fixtures", help="reproduce the worked examples")
    fx = p.add_subparsers(dest="fixture", required=True)
    f = fx.add_parser("fig1", parents=[common])
    f.add_argument("--count", type=int, default=50)
    f.set_defaults(func=fixture_fig1)
    f = fx.add_parser("ex32", parents=[common, zono_opts])
    f.add_argument("--p", type=int, default=1)
    f.add_argument("--q", type=int, default=1)
    f.set_defaults(func=fixture_ex32)
    f = fx.add_parser("ex33", parents=[common, zono_opts])
    f.set_defaults(func=fixture_ex33)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            overrides = json.loads(Path(args.config).read_text())
            for key, value in overrides.items():
                setattr(args, key.replace("-", "_"), value)
        if args.tol <= 0:
            raise ValueError("tolerance must be positive")
        run = Run(args)
        if args.config:
            run.read(args.config)
        status = args.func(run, args)
    except (OrthoExpError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        record = exc.to_dict() if isinstance(exc, OrthoExpError) else {
            "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2
    print(json.dumps({"status": "ok" if status == 0 else "check_failed",
                      "out": str(run.out), "files": run.written}, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
