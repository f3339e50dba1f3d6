"""Command-line entry point.

``pscmesh --input model.psc`` refines the input and writes a VTK mesh, a
quality report and a run manifest.  ``--compare`` runs both point-placement
modes on the same input and prints a side-by-side summary.  Exit codes:
0 converged, 2 stopped at the point budget (partial output still written),
1 any error.
"""

import argparse
import sys
import time

from .config import GridSizing, RefineConfig, SizingField
from .errors import PscError, ValidationError
from .geometry import load_complex
from .quality import build_report, write_report
from .refine import Refiner
from .vtk_io import write_vtk


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through PscError so
    # every CLI failure maps to exit code 1 and maxPoints keeps code 2
    def error(self, message):
        raise ValidationError(message)


def build_parser():
    p = _Parser(prog="pscmesh", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--input", required=True, help="geometry file (.psc)")
    p.add_argument("--output", default=None, help="mesh output (.vtk)")
    p.add_argument("--report", default=None, help="quality report path")
    p.add_argument("--manifest", default=None, help="run manifest path")
    p.add_argument("--mode", choices=("classical", "frontal"),
                   default="frontal")
    p.add_argument("--rho-surf", type=float, default=1.25,
                   help="surface radius-edge bound (default 1.25)")
    p.add_argument("--rho-vol", type=float, default=2.0,
                   help="volume radius-edge bound (default 2)")
    p.add_argument("--eps-rel", type=float, default=0.25,
                   help="surface error as a fraction of the local size")
    p.add_argument("--hfun", default=None,
                   help="uniform size VALUE or grid:PATH (default: 3%% of "
                        "the mean bounding-box dimension)")
    p.add_argument("--vlen-min", type=float, default=1.0 / 3.0,
                   help="volume-length floor for sliver refinement")
    p.add_argument("--alpha", type=float, default=4.0 / 3.0,
                   help="size-constraint slack factor")
    p.add_argument("--collar-beta", type=float, default=1.5,
                   help="protecting-collar spacing factor")
    p.add_argument("--max-points", type=int, default=5_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare", action="store_true",
                   help="run classical and frontal modes and summarise both")
    return p


def load_sizing(arg, geom):
    """Resolve --hfun into a sizing field."""
    if arg is None:
        lo, hi = geom.bounds
        mean_dim = sum(hi[i] - lo[i] for i in range(3)) / 3.0
        return SizingField(h0=0.03 * mean_dim)
    if arg.startswith("grid:"):
        return SizingField(grid=_load_grid(arg[5:]))
    try:
        return SizingField(h0=float(arg))
    except ValueError as exc:
        raise ValidationError(f"bad --hfun value {arg!r}") from exc


def _load_grid(path):
    dims = origin = spacing = None
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "dims":
                dims = [int(x) for x in parts[1:4]]
            elif parts[0] == "origin":
                origin = [float(x) for x in parts[1:4]]
            elif parts[0] == "spacing":
                spacing = [float(x) for x in parts[1:4]]
            elif parts[0] == "values":
                values.extend(float(x) for x in parts[1:])
            else:
                values.extend(float(x) for x in parts)
    if dims is None or origin is None or spacing is None:
        raise ValidationError(f"sizing grid {path!r} missing dims/origin/spacing")
    return GridSizing(origin, spacing, dims, values)


def make_config(args, geom):
    if args.vlen_min > 1.0 / 3.0:
        raise ValidationError(
            f"--vlen-min {args.vlen_min:g} rejected: sliver refinement is "
            "only convergent for bounds up to 1/3")
    return RefineConfig(rho_surf=args.rho_surf, rho_vol=args.rho_vol,
                        eps_rel=args.eps_rel,
                        sizing=load_sizing(args.hfun, geom),
                        vlen_min=args.vlen_min, alpha=args.alpha,
                        mode=args.mode, collar_beta=args.collar_beta,
                        max_points=args.max_points, seed=args.seed)


def _default_paths(args):
    stem = args.input[:-4] if args.input.endswith(".psc") else args.input
    out = args.output or stem + ".vtk"
    rep = args.report or stem + ".report.txt"
    man = args.manifest or stem + ".manifest.txt"
    return out, rep, man


def _write_manifest(path, args, cfg, status, timings, outputs):
    lines = ["format = pscmesh-manifest-v1",
             f"input = {args.input}",
             f"seed = {cfg.seed}",
             f"mode = {cfg.mode}",
             f"status = {status}"]
    for k in sorted(outputs):
        lines.append(f"output.{k} = {outputs[k]}")
    lines.append(f"cfg.rho_surf = {cfg.rho_surf!r}")
    lines.append(f"cfg.rho_vol = {cfg.rho_vol!r}")
    lines.append(f"cfg.eps_rel = {cfg.eps_rel!r}")
    lines.append(f"cfg.vlen_min = {cfg.vlen_min!r}")
    lines.append(f"cfg.alpha = {cfg.alpha!r}")
    lines.append(f"cfg.collar_beta = {cfg.collar_beta!r}")
    lines.append(f"cfg.max_points = {cfg.max_points}")
    if cfg.sizing.h0 is not None:
        lines.append(f"cfg.hfun = {cfg.sizing.h0!r}")
    else:
        lines.append("cfg.hfun = gridded")
    for k in sorted(timings):
        lines.append(f"time.{k}_s = {timings[k]:.3f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def run(args):
    """Load, refine, write outputs; returns the process exit code."""
    t_load = time.perf_counter()
    geom = load_complex(args.input)
    cfg = make_config(args, geom)
    out, rep, man = _default_paths(args)
    timings = {"load": time.perf_counter() - t_load}

    refiner = Refiner(geom, cfg)
    t0 = time.perf_counter()
    refiner.setup()
    timings["setup"] = time.perf_counter() - t0
    for w in refiner.warnings:
        print(f"warning: {w}", file=sys.stderr)
    t0 = time.perf_counter()
    status = refiner.run()
    timings["refine"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    write_vtk(out, refiner.mesh, refiner.rs)
    report = build_report(refiner.mesh, refiner.rs, cfg.sizing,
                          wall_time=timings["refine"],
                          converged=status == "converged")
    write_report(report, rep)
    _write_manifest(man, args, cfg, status, timings,
                    {"mesh": out, "report": rep})
    timings["write"] = time.perf_counter() - t0
    print(f"{status}: {report.counts['points']} points, "
          f"{report.counts['curve_edges']} curve edges, "
          f"{report.counts['surface_tris']} surface triangles, "
          f"{report.counts['volume_tets']} tets -> {out}")
    return 0 if status == "converged" else 2


def compare_modes(args):
    """Run both modes on one input and print a side-by-side summary."""
    geom = load_complex(args.input)
    out, rep, man = _default_paths(args)
    results = {}
    for mode in ("classical", "frontal"):
        args.mode = mode
        cfg = make_config(args, geom)
        refiner = Refiner(geom, cfg)
        t0 = time.perf_counter()
        status = refiner.run()
        dt = time.perf_counter() - t0
        write_vtk(f"{out}.{mode}.vtk", refiner.mesh, refiner.rs)
        report = build_report(refiner.mesh, refiner.rs, cfg.sizing,
                              wall_time=dt, converged=status == "converged")
        write_report(report, f"{rep}.{mode}.txt")
        results[mode] = (status, report, dt)
    print(f"{'':24s}{'classical':>14s}{'frontal':>14s}")
    rows = [("status", lambda r: r[0]),
            ("points", lambda r: r[1].counts["points"]),
            ("surface tris", lambda r: r[1].counts["surface_tris"]),
            ("volume tets", lambda r: r[1].counts["volume_tets"]),
            ("mean a(f)", lambda r: f"{r[1].summary['area_length']['mean']:.4f}"),
            ("mean v(tau)", lambda r: f"{r[1].summary['volume_length']['mean']:.4f}"),
            ("median h_r", lambda r: f"{r[1].summary['rel_edge_length']['median']:.4f}"),
            ("time [s]", lambda r: f"{r[2]:.2f}")]
    for label, fn in rows:
        print(f"{label:24s}{str(fn(results['classical'])):>14s}"
              f"{str(fn(results['frontal'])):>14s}")
    ok = all(r[0] == "converged" for r in results.values())
    return 0 if ok else 2


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.compare:
            return compare_modes(args)
        return run(args)
    except PscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
