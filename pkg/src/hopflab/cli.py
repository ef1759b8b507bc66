"""Command-line front door: load a scene, run the requested pipeline stages
(mesh -> boundary -> extension/minimization -> fields -> analyses), and emit
JSON/CSV/SVG reports.

Subcommands:
  run       execute a scene JSON file
  minimize  constrained minimization for boundary data, result to JSON
  gallery   sample a closed-form map on a mesh and analyze it directly
  capacity  condenser capacities (disk plate or segment profile)

Reports are byte-deterministic for a fixed scene apart from wall-time
fields. HOPFLAB_THREADS is recorded in the report; all computations are
single-threaded and reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import BoundarySpec, DiscreteMap, harmonic_extension, \
    sample_boundary
from .energy import SolverConfig, dirichlet_energy, jacobian_stats, \
    minimize_admissible
from .gallery import get_gallery_map
from .hopf import TraceConfig, critical_points, hopf_product, trace_trajectory
from .mesh import build_disk_mesh, wirtinger
from .report import canonical_json, emit_svg_foliation, emit_svg_map, \
    jsonify, write_trajectory_csv
from .topology import capacity, capacity_blowup_profile, degree_in_preimage, \
    default_fiber_radius, monotonicity_report, oscillation_profile

ANALYSES = ("energy", "hopf", "trajectories", "degree", "monotonicity",
            "capacity", "oscillation")


def _scene_hash(scene: dict) -> str:
    payload = json.dumps(jsonify(scene), sort_keys=True,
                         separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()


def _parse_mesh(text: str) -> tuple[int, int]:
    rings, sectors = (int(t) for t in text.split(","))
    return rings, sectors


def _resolve_boundary(ref, base: Path) -> BoundarySpec:
    if isinstance(ref, dict):
        return BoundarySpec.from_json(ref)
    if isinstance(ref, str):
        if ref.endswith(".json") or (base / ref).exists() or Path(ref).exists():
            p = Path(ref) if Path(ref).exists() else base / ref
            return BoundarySpec.from_json(json.loads(p.read_text()))
        name = ref.split(":", 1)[1] if ref.startswith("gallery:") else ref
        return BoundarySpec.from_gallery(name)
    raise ValueError(f"cannot resolve boundary reference {ref!r}")


def _default_seeds():
    seeds = [0.55 * np.exp(2j * np.pi * (k + 0.37) / 8) for k in range(8)]
    seeds += [0.25 * np.exp(2j * np.pi * (k + 0.11) / 4) for k in range(4)]
    return seeds


def _interior_grid(values: np.ndarray, nx: int, ny: int):
    xs = np.linspace(values.real.min(), values.real.max(), nx + 2)[1:-1]
    ys = np.linspace(values.imag.min(), values.imag.max(), ny + 2)[1:-1]
    return [complex(x, y) for y in ys for x in xs]


def run_scene(scene: dict, base_dir: Path | None = None) -> tuple[dict, dict]:
    """Execute a scene; returns (report, files) where files maps relative
    file names to their textual content."""
    base = base_dir or Path.cwd()
    names = list(dict.fromkeys(scene.get("analyses", [])))
    for a in names:
        if a not in ANALYSES:
            raise ValueError(f"unknown analysis {a!r}; choose from {ANALYSES}")

    mesh_cfg = scene.get("mesh", {"rings": 32, "sectors": 12})
    mesh = build_disk_mesh(mesh_cfg["rings"], mesh_cfg["sectors"])

    report: dict = {
        "tool_version": __version__,
        "scene_hash": _scene_hash(scene),
        "hopflab_threads": int(os.environ.get("HOPFLAB_THREADS", "1")),
        "mesh": {"rings": mesh.rings, "sectors": mesh.sectors,
                 "vertices": mesh.n_vertices, "triangles": mesh.n_triangles},
        "analyses": {},
        "wall_times": {},
    }
    files: dict = {}
    ok_all = True
    minimizer = None
    extension_energy = None

    t_start = time.perf_counter()
    if scene.get("map"):
        name = scene["map"]
        name = name.split(":", 1)[1] if name.startswith("gallery:") else name
        gmap = get_gallery_map(name)
        analysis_map = DiscreteMap.from_function(mesh, gmap.evaluate)
        report["map"] = {"kind": f"gallery:{gmap.name}"}
    else:
        spec = _resolve_boundary(scene.get("boundary", "identity"), base)
        bv = sample_boundary(spec, mesh)
        ext = harmonic_extension(bv, mesh)
        extension_energy = dirichlet_energy(wirtinger(mesh, ext.values))
        if scene.get("minimize"):
            cfg = SolverConfig.from_json(scene.get("solver", {})) \
                if scene.get("solver") else SolverConfig()
            minimizer = minimize_admissible(bv, mesh, cfg)
            analysis_map = minimizer.map
        else:
            analysis_map = ext
        report["map"] = {"kind": "minimizer" if minimizer else
                         "harmonic-extension",
                         "boundary": scene.get("boundary", "identity")}

    fld = wirtinger(mesh, analysis_map.values)

    for name in names:
        t0 = time.perf_counter()
        ok = True
        if name == "energy":
            stats = jacobian_stats(fld)
            blob = {
                "dirichlet": stats.dirichlet,
                "negative_jacobian_mass": stats.negative_jacobian_mass,
                "min_jacobian": stats.min_jacobian,
            }
            if extension_energy is not None:
                blob["harmonic_extension_energy"] = extension_energy
            if minimizer is not None:
                blob["minimizer"] = {
                    "converged": minimizer.converged,
                    "iterations": minimizer.iterations,
                    "min_jacobian": minimizer.min_jacobian,
                    "jacobian_tolerance": minimizer.jacobian_tolerance,
                    "penalty_schedule": minimizer.penalty_schedule,
                    "energy_gap": stats.dirichlet - extension_energy,
                }
                ok = minimizer.converged
        elif name == "hopf":
            hf = hopf_product(fld, mesh)
            scan = critical_points(hf, mesh)
            blob = {
                "residual": hf.residual,
                "identically_zero": scan.identically_zero,
                "critical_points": [
                    {"position": c.position, "order": c.order_estimate,
                     "emanating_count": c.emanating_count}
                    for c in scan.points],
            }
        elif name == "trajectories":
            hf = hopf_product(fld, mesh)
            scan = critical_points(hf, mesh)
            cfg = TraceConfig(critical_points=[c.position for c in scan.points])
            seeds = [complex(x, y) for x, y in scene.get("trajectory_seeds", [])] \
                or _default_seeds()
            segs = []
            for s in seeds:
                for orient in ("vertical", "horizontal"):
                    try:
                        segs.append(trace_trajectory(hf, mesh, s, orient, cfg))
                    except ValueError:
                        pass
            blob = {"count": len(segs), "segments": [
                {"seed": seg.seed, "orientation": seg.orientation,
                 "points": len(seg.points),
                 "termination": list(seg.termination),
                 "endpoints": list(seg.endpoints)} for seg in segs]}
            files["trajectories.csv"] = write_trajectory_csv(segs)
            files["foliation.svg"] = emit_svg_foliation(segs, scan.points)
        elif name == "degree":
            trace = analysis_map.trace()
            if scene.get("degree_points"):
                targets = [complex(x, y) for x, y in scene["degree_points"]]
            else:
                targets = [complex(trace.mean())]
            spread = float(np.median(np.abs(trace - targets[0])))
            r = float(scene.get("degree_radius") or 0.15 * spread)
            entries = []
            for y in targets:
                rep = degree_in_preimage(analysis_map, y, r)
                comps = []
                for c in rep.components:
                    comps.append({
                        "triangles": len(c.triangle_ids),
                        "degree_winding": c.degree_winding,
                        "degree_jacobian": c.degree_jacobian,
                        "closure_meets_boundary": c.closure_meets_boundary,
                    })
                    if (not c.closure_meets_boundary and
                            abs(c.degree_jacobian - c.degree_winding) > 0.1):
                        ok = False
                entries.append({"y": y, "r": r,
                                "boundary_adjacent": rep.boundary_adjacent,
                                "total_degree": rep.total_degree,
                                "components": comps})
            blob = {"targets": entries}
        elif name == "monotonicity":
            nx, ny = scene.get("grid", [20, 20])
            r = scene.get("fiber_radius") or default_fiber_radius(mesh)
            grid = _interior_grid(analysis_map.values, nx, ny)
            mono = monotonicity_report(analysis_map, grid, float(r))
            blob = {
                "verdict": mono.verdict,
                "max_components": mono.max_components,
                "min_jacobian": mono.min_jacobian,
                "fiber_radius": float(r),
                "grid": [nx, ny],
                "multi_component_samples": [
                    s for s in jsonify(list(mono.samples))
                    if s["component_count"] > 1],
            }
        elif name == "capacity":
            cap_cfg = scene.get("capacity", {"disk_r": float(np.exp(-1.0))})
            if "disk_r" in cap_cfg:
                rr = float(cap_cfg["disk_r"])
                plate = np.nonzero(np.all(
                    np.abs(mesh.vertices[mesh.triangles]) <= rr + 1e-12,
                    axis=1))[0]
                blob = {"disk_r": rr, "capacity": capacity(plate, mesh)}
            else:
                a, *eps = cap_cfg["segment"]
                caps = capacity_blowup_profile(float(a), [float(e) for e in eps],
                                               mesh)
                increasing = bool(np.all(np.diff(caps) > 0))
                blob = {"segment_a": float(a), "eps": [float(e) for e in eps],
                        "capacities": caps, "increasing": increasing}
                ok = increasing
        elif name == "oscillation":
            osc_cfg = scene.get("oscillation", {})
            center = complex(*osc_cfg.get("center", [0.0, 0.0]))
            radii = osc_cfg.get("radii", [0.25, 0.45])
            prof = oscillation_profile(analysis_map, center, radii)
            for p in prof:
                p["K_estimate"] = (p["osc_ball"] / p["osc_circle"]
                                   if p["osc_circle"] > 0 else float("inf"))
            blob = {"center": center, "profile": prof}
        report["analyses"][name] = {"ok": ok, **blob}
        report["wall_times"][name] = time.perf_counter() - t0
        ok_all = ok_all and ok

    report["wall_times"]["total"] = time.perf_counter() - t_start
    report["ok"] = ok_all
    files["map.svg"] = emit_svg_map(analysis_map)
    files["report.json"] = canonical_json(report)
    return report, files


def _write_files(files: dict, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (outdir / name).write_text(content)


def _cmd_run(args) -> int:
    scene_path = Path(args.scene)
    scene = json.loads(scene_path.read_text())
    if args.mesh:
        rings, sectors = _parse_mesh(args.mesh)
        scene["mesh"] = {"rings": rings, "sectors": sectors}
    if args.grid:
        nx, ny = (int(t) for t in args.grid.lower().split("x"))
        scene["grid"] = [nx, ny]
    if args.fiber_radius:
        scene["fiber_radius"] = args.fiber_radius
    report, files = run_scene(scene, scene_path.parent)
    outdir = Path(scene.get("output_dir", scene_path.with_suffix("")))
    _write_files(files, outdir)
    print(f"wrote {outdir}/report.json (ok={report['ok']})")
    return 0 if report["ok"] else 1


def _cmd_minimize(args) -> int:
    rings, sectors = _parse_mesh(args.mesh)
    mesh = build_disk_mesh(rings, sectors)
    if args.gallery:
        spec = BoundarySpec.from_gallery(args.gallery)
    else:
        spec = BoundarySpec.from_json(json.loads(Path(args.boundary).read_text()))
    bv = sample_boundary(spec, mesh)
    cfg = SolverConfig.from_json(json.loads(Path(args.config).read_text())) \
        if args.config else SolverConfig()
    res = minimize_admissible(bv, mesh, cfg)
    fld = wirtinger(mesh, res.map.values)
    out = {
        "converged": res.converged,
        "iterations": res.iterations,
        "min_jacobian": res.min_jacobian,
        "jacobian_tolerance": res.jacobian_tolerance,
        "penalty_schedule": res.penalty_schedule,
        "dirichlet_energy": dirichlet_energy(fld),
        "mesh": {"rings": rings, "sectors": sectors},
        "values": [[v.real, v.imag] for v in res.map.values],
    }
    Path(args.out).write_text(canonical_json(out))
    print(f"wrote {args.out} (converged={res.converged}, "
          f"E={out['dirichlet_energy']:.6f})")
    return 0 if res.converged else 1


def _cmd_gallery(args) -> int:
    scene = {
        "mesh": dict(zip(("rings", "sectors"), _parse_mesh(args.mesh))),
        "map": args.name,
        "analyses": args.analyses.split(","),
    }
    if args.grid:
        nx, ny = (int(t) for t in args.grid.lower().split("x"))
        scene["grid"] = [nx, ny]
    if args.fiber_radius:
        scene["fiber_radius"] = args.fiber_radius
    report, files = run_scene(scene)
    outdir = Path(args.out or f"gallery_{args.name.replace(':', '_')}")
    _write_files(files, outdir)
    print(f"wrote {outdir}/report.json (ok={report['ok']})")
    return 0 if report["ok"] else 1


def _cmd_capacity(args) -> int:
    rings, sectors = _parse_mesh(args.mesh)
    mesh = build_disk_mesh(rings, sectors)
    if args.disk_r is not None:
        plate = np.nonzero(np.all(
            np.abs(mesh.vertices[mesh.triangles]) <= args.disk_r + 1e-12,
            axis=1))[0]
        value = capacity(plate, mesh)
        print(canonical_json({"disk_r": args.disk_r, "capacity": value}), end="")
        return 0
    parts = [float(t) for t in args.segment.split(",")]
    a, eps = parts[0], parts[1:]
    caps = capacity_blowup_profile(a, eps, mesh)
    increasing = bool(np.all(np.diff(caps) > 0))
    print(canonical_json({"segment_a": a, "eps": eps, "capacities": caps,
                          "increasing": increasing}), end="")
    return 0 if increasing else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hopflab",
        description="Constrained Dirichlet-energy laboratory on the unit disk")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scene JSON file")
    p_run.add_argument("scene")
    p_run.add_argument("--mesh", help="rings,sectors override")
    p_run.add_argument("--grid", help="monotonicity grid, e.g. 20x20")
    p_run.add_argument("--fiber-radius", type=float, dest="fiber_radius")
    p_run.set_defaults(func=_cmd_run)

    p_min = sub.add_parser("minimize", help="constrained minimization")
    src = p_min.add_mutually_exclusive_group(required=True)
    src.add_argument("--boundary", help="BoundarySpec JSON file")
    src.add_argument("--gallery", help="gallery boundary name")
    p_min.add_argument("--mesh", required=True, help="rings,sectors")
    p_min.add_argument("--config", help="solver config JSON file")
    p_min.add_argument("--out", default="result.json")
    p_min.set_defaults(func=_cmd_minimize)

    p_gal = sub.add_parser("gallery", help="analyze a closed-form map")
    p_gal.add_argument("--name", required=True)
    p_gal.add_argument("--analyses", required=True,
                       help="comma list from: " + ",".join(ANALYSES))
    p_gal.add_argument("--mesh", default="32,12")
    p_gal.add_argument("--grid")
    p_gal.add_argument("--fiber-radius", type=float, dest="fiber_radius")
    p_gal.add_argument("--out")
    p_gal.set_defaults(func=_cmd_gallery)

    p_cap = sub.add_parser("capacity", help="condenser capacity")
    grp = p_cap.add_mutually_exclusive_group(required=True)
    grp.add_argument("--disk-r", type=float, dest="disk_r")
    grp.add_argument("--segment", help="a,eps1[,eps2,...]")
    p_cap.add_argument("--mesh", default="64,8")
    p_cap.set_defaults(func=_cmd_capacity)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
