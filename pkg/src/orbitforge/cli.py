"""Command-line interface.

Exit codes: 0 success, 2 usage/config, 3 covering failure, 4 extraction
failure, 5 integration failure, 6 verification failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, read_config_file, resolve
from .covering import (build_band_alphabet, build_covering_graph, find_closed_subchain,
                       locate_periodic_orbit, replay_cycle)
from .errors import (BranchRefinementError, GeometryError, GrowthFailure, IncompleteGraphError,
                     IntegrationStall, InvalidInputError, NonHyperbolicOrbit, NotTriangularError)
from .flowlab import (attractor_cloud, build_section, estimate_splitting_rates,
                      extract_triangular_map, find_and_classify_singularities, integrate,
                      lyapunov_stability_probe, return_map_sample, sample_return_grid)
from .geometry import Leaf
from .models import (LorenzParams, appendix_composite, geo_lorenz, identity_map, linear_normal_form,
                     linear_saddle, linear_sink, lorenz_field, preimage_levels, rotation_flow)
from .trimap import compute_n_of_L, one_sided_limits, regularity_probe, verify_lambda_hyperbolic

log = logging.getLogger("orbitforge")

EXIT_OK, EXIT_USAGE, EXIT_COVERING, EXIT_EXTRACTION, EXIT_INTEGRATION, EXIT_VERIFY = 0, 2, 3, 4, 5, 6
MAP_MODELS = ("geo-lorenz", "appendix", "identity")
FLOW_MODELS = ("lorenz", "sink", "saddle", "rotation", "normal-form")
COMMANDS = ("singularities", "section", "return-map", "verify-hyperbolic", "find-orbit",
            "stability-probe", "pipeline")


class StageFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# output

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


class Output:
    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.dir = Path(cfg.out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def json(self, name: str, result) -> Path:
        doc = {"command": self.command, "config": self.cfg.to_json(), "seed": self.cfg.seed,
               "result": result}
        path = self.dir / f"{name}.json"
        path.write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")
        meta = {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(), "version": __version__,
                "file": path.name}
        (self.dir / f"{name}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        self.files.append(str(path))
        return path

    def text(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text)
        self.files.append(str(path))
        return path

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.files.append(str(p))
        return p


# ---------------------------------------------------------------------------
# models

def make_map(cfg: RunConfig):
    if cfg.model == "geo-lorenz":
        return geo_lorenz(cfg.mu if cfg.mu is not None else 1.9,
                          cfg.rho if cfg.rho is not None else 0.3)
    if cfg.model == "appendix":
        m = appendix_composite(cfg.mu if cfg.mu is not None else 1.8,
                               cfg.rho if cfg.rho is not None else 0.3)
        if cfg.component == "t":
            return m.restrict([0])
        if cfg.component == "b":
            return m.restrict([1])
        return m
    if cfg.model == "identity":
        return identity_map()
    raise InvalidInputError(f"model {cfg.model!r} is not a triangular map")


def make_flow(cfg: RunConfig):
    if cfg.model == "lorenz":
        d = LorenzParams()
        fs = lorenz_field(LorenzParams(cfg.sigma or d.sigma, cfg.rho if cfg.rho is not None else d.rho,
                                       cfg.beta or d.beta))
    elif cfg.model == "sink":
        fs = linear_sink()
    elif cfg.model == "saddle":
        fs = linear_saddle()
    elif cfg.model == "rotation":
        fs = rotation_flow()
    elif cfg.model == "normal-form":
        fs = linear_normal_form(d=cfg.d)
    else:
        raise InvalidInputError(f"model {cfg.model!r} is not a flow")
    return fs.with_config(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)


def is_flow(cfg: RunConfig) -> bool:
    return cfg.model in FLOW_MODELS


# ---------------------------------------------------------------------------
# stages shared by several commands

def stage_singularities(cfg, fs):
    sings = find_and_classify_singularities(fs)
    return sings, [s.to_json() for s in sings]


def stage_sections(cfg, fs, sings):
    ll = [s for s in sings if s.classification == "lorenz_like"]
    if not ll:
        raise StageFailure(EXIT_EXTRACTION, "no Lorenz-like singularity to build sections at")
    try:
        secs = [build_section(fs, sg, side, cfg.d, cfg.delta) for sg in ll for side in ("top", "bottom")]
    except GeometryError as exc:
        raise StageFailure(EXIT_EXTRACTION, f"section: {exc}")
    return secs


def stage_find_orbit(cfg, out, fmap, prefix=""):
    alphabet = build_band_alphabet(fmap)
    graph = build_covering_graph(fmap, alphabet, cfg.seeds_per_band, cfg.max_iters,
                                 require_complete=False)
    out.json(prefix + "covering_graph", dict(graph.to_json(), alphabet=alphabet.to_json()))
    out.text(prefix + "covering_graph.dot", graph.to_dot())
    if not graph.edges:
        raise GrowthFailure("growth-failure: no alphabet band is covered by an expanded image "
                            f"within {cfg.max_iters} iterates")
    cycle = find_closed_subchain(graph)
    replay = replay_cycle(fmap, cycle)
    if not replay.ok:
        raise StageFailure(EXIT_VERIFY, f"cycle replay failed: {replay.message}")
    orbit = locate_periodic_orbit(fmap, cycle)
    out.json(prefix + "orbit", dict(orbit.to_json(), dead_ends=[b.to_json() for b in graph.dead_ends],
                                    alphabet_size=len(alphabet.bands)))
    lines = [
        f"model: {fmap.name}",
        f"bands: {len(alphabet.bands)}  edges: {len(graph.edges)}  dead ends: {len(graph.dead_ends)}",
        "cycle: " + " -> ".join(f"{e.source.component}:({e.source.lo:.6g},{e.source.hi:.6g})[{e.n}]"
                                for e in cycle),
        f"period: {orbit.period} (minimal {orbit.minimal_period})",
        "leaves: " + ", ".join(f"{s:.12g}" for s in orbit.leaves),
        f"lambda_h: {orbit.lambda_h:.12g}",
        f"lambda_v: {orbit.lambda_v:.6g}",
        f"closure residual: {orbit.residual:.3g}",
        f"meets declared rate: {orbit.meets_declared_rate}",
    ]
    out.text(prefix + "summary.txt", "\n".join(lines) + "\n")
    return alphabet, graph, cycle, orbit


# ---------------------------------------------------------------------------
# commands

def cmd_singularities(cfg, out):
    if not is_flow(cfg):
        raise InvalidInputError("singularities needs a flow model")
    fs = make_flow(cfg)
    _, rep = stage_singularities(cfg, fs)
    out.json("singularities", {"model": cfg.model, "singularities": rep})
    for s in rep:
        print(f"{s['classification']:18s} at {np.round(s['location'], 9).tolist()}")
    return EXIT_OK


def cmd_section(cfg, out):
    if not is_flow(cfg):
        raise InvalidInputError("section needs a flow model")
    fs = make_flow(cfg)
    sings, _ = stage_singularities(cfg, fs)
    secs = stage_sections(cfg, fs, sings)
    out.json("sections", {"sections": [s.to_json() for s in secs]})
    print(f"{len(secs)} section(s) written to {out.dir}")
    return EXIT_OK


def cmd_return_map(cfg, out):
    if not is_flow(cfg):
        raise InvalidInputError("return-map needs a flow model")
    fs = make_flow(cfg)
    sings, _ = stage_singularities(cfg, fs)
    secs = stage_sections(cfg, fs, sings)

    def sampler(c, s, y):
        return return_map_sample(fs, secs, secs[c].to_world(s, y), cfg.t_max, source=c)

    rg = sample_return_grid(sampler, len(secs), (cfg.grid_s, cfg.grid_y))
    rg.to_csv(out.path("return_map.csv"))
    counts = {}
    for row in rg.rows():
        counts[row[6]] = counts.get(row[6], 0) + 1
    out.json("return_map", {"sections": [s.to_json() for s in secs], "status_counts": counts})
    print(f"return map samples: {counts}")
    return EXIT_OK


def cmd_verify(cfg, out):
    fmap = make_map(cfg)
    rep = verify_lambda_hyperbolic(fmap, cfg.samples, lam=cfg.lam)
    extra = {"regularity": regularity_probe(fmap), "boundary_leaves": []}
    for c in range(fmap.k):
        for s in (-1.0, 1.0):
            if fmap.in_domain(c, s):
                extra["boundary_leaves"].append(compute_n_of_L(fmap, Leaf(c, s)).to_json())
        try:
            lims = one_sided_limits(fmap, Leaf(c, 0.0))
            extra.setdefault("middle_limits", []).append(
                {"component": c, "left": None if lims[0] is None else [lims[0].component, lims[0].s],
                 "right": None if lims[1] is None else [lims[1].component, lims[1].s]})
        except Exception as exc:  # reported, not fatal
            extra.setdefault("middle_limits", []).append({"component": c, "error": str(exc)})
    out.json("hyperbolicity", dict(rep.to_json(), **extra))
    print(f"verdict: {rep.verdict} (min expansion {rep.min_expansion:.6g}, "
          f"cone fraction {rep.cone_invariance_fraction:.3f}, lambda {rep.declared_lambda:.6g})")
    return EXIT_OK if rep.verdict == "pass" else EXIT_VERIFY


def cmd_find_orbit(cfg, out):
    if is_flow(cfg):
        return cmd_pipeline(cfg, out)
    fmap = make_map(cfg)
    _, _, _, orbit = stage_find_orbit(cfg, out, fmap)
    print(f"period-{orbit.period} orbit, lambda_h={orbit.lambda_h:.9g}, residual={orbit.residual:.3g}")
    print("leaves: " + ", ".join(f"{s:.12g}" for s in orbit.leaves))
    return EXIT_OK


def cmd_stability_probe(cfg, out):
    if not is_flow(cfg):
        raise InvalidInputError("stability-probe needs a flow model")
    fs = make_flow(cfg)
    if cfg.model == "lorenz":
        cloud = attractor_cloud(fs, (1.0, 1.0, 1.0))
    else:
        cloud = np.zeros((1, 3))
    rep = lyapunov_stability_probe(fs, cloud, cfg.U, cfg.V, cfg.probe_samples, cfg.horizon, cfg.seed)
    out.json("stability_probe", rep.to_json())
    print(f"escape fraction {rep.escape_fraction:.4f} ({rep.escaped}/{rep.samples})")
    return EXIT_OK


def cmd_pipeline(cfg, out):
    stages = []
    report = {"model": cfg.model, "stages": stages}

    def finish(code, status):
        report["status"] = status
        report["exit_code"] = code
        out.json("pipeline", report)
        print(f"pipeline status: {status}")
        for st in stages:
            print(f"  {st['stage']:14s} {st['status']}" + (f" ({st['detail']})" if st.get("detail") else ""))
        return code

    if not is_flow(cfg):
        fmap = make_map(cfg)
        stages.append({"stage": "section", "status": "not-applicable"})
        stages.append({"stage": "extract", "status": "not-applicable"})
        sections = None
    else:
        fs = make_flow(cfg)
        try:
            sings, rep = stage_singularities(cfg, fs)
            stages.append({"stage": "singularities", "status": "ok", "detail": f"{len(rep)} found"})
            sections = stage_sections(cfg, fs, sings)
        except StageFailure as exc:
            stages.append({"stage": "section", "status": "failed", "detail": str(exc)})
            return finish(exc.code, "section-failed")
        stages.append({"stage": "section", "status": "ok", "detail": f"{len(sections)} sections"})
        out.json("sections", {"sections": [s.to_json() for s in sections]})
        try:
            fmap, rg = extract_triangular_map(fs, sections, (cfg.grid_s, cfg.grid_y), cfg.t_max)
            rg.to_csv(out.path("return_map.csv"))
        except NotTriangularError as exc:
            if exc.grid is not None:
                exc.grid.to_csv(out.path("return_map.csv"))
            stages.append({"stage": "extract", "status": "not-triangular", "detail": str(exc),
                           "deviation": exc.deviation})
            return finish(EXIT_EXTRACTION, "not-triangular")
        except IntegrationStall as exc:
            stages.append({"stage": "extract", "status": "integration-stall", "detail": str(exc)})
            return finish(EXIT_INTEGRATION, "integration-stall")
        if not fmap.branches:
            stages.append({"stage": "extract", "status": "empty-domain",
                           "detail": "no grid leaf returned to the sections"})
            return finish(EXIT_EXTRACTION, "empty-domain")
        stages.append({"stage": "extract", "status": "ok",
                       "detail": f"{len(fmap.branches)} branches"})
    rep = verify_lambda_hyperbolic(fmap, cfg.samples, lam=cfg.lam, analytic=not is_flow(cfg))
    stages.append({"stage": "verify", "status": rep.verdict, "report": rep.to_json()})
    if rep.verdict != "pass":
        return finish(EXIT_VERIFY, "verification-failed")
    try:
        _, _, cycle, orbit = stage_find_orbit(cfg, out, fmap)
    except (IncompleteGraphError, GrowthFailure) as exc:
        stages.append({"stage": "find-orbit", "status": "covering-failed", "detail": str(exc)})
        return finish(EXIT_COVERING, "covering-failed")
    except (NonHyperbolicOrbit, BranchRefinementError, StageFailure) as exc:
        stages.append({"stage": "find-orbit", "status": "orbit-rejected", "detail": str(exc)})
        return finish(EXIT_VERIFY, "orbit-rejected")
    stages.append({"stage": "find-orbit", "status": "ok",
                   "detail": f"period {orbit.period}, lambda_h {orbit.lambda_h:.6g}"})
    if sections is not None:
        c, s, y = orbit.points[0]
        p0 = sections[c].to_world(s, y)
        p = p0
        for _ in range(orbit.period):
            r = return_map_sample(fs, sections, p, cfg.t_max)
            if not r.returned:
                stages.append({"stage": "closure", "status": r.status})
                return finish(EXIT_VERIFY, "closure-failed")
            p = r.point
        res = float(np.linalg.norm(p - p0))
        ok = res <= 1e-4
        stages.append({"stage": "closure", "status": "ok" if ok else "residual-too-large",
                       "residual": res})
        if not ok:
            return finish(EXIT_VERIFY, "closure-failed")
    return finish(EXIT_OK, "orbit-certified")


def cmd_demo(cfg, out, which):
    if which == "geo-lorenz":
        cfg.model = "geo-lorenz"
        code = cmd_verify(cfg, out)
        return cmd_find_orbit(cfg, out) or code
    if which == "appendix":
        cfg.model = "appendix"
        full = make_map(cfg)
        top, bottom = full.restrict([0]), full.restrict([1])
        grid = np.linspace(-1, 1, 10_000)
        grid = grid[np.abs(grid) > 1e-12]
        slopes = [abs(top.branch_at(0, s).derivative(s)) for s in grid]
        pts = [(0, float(s), float(y)) for s in np.linspace(-1, 0, 101) for y in np.linspace(-1, 1, 11)]
        resid = max(math.dist(bottom.eval(p)[1:], p[1:]) for p in pts)
        levels = [len(lv) for lv in preimage_levels(top, 0, 0.0, 8)]
        rate_fix = estimate_splitting_rates(rotation_flow(), (1.0, 0.0, 1.0), 20.0)
        result = {
            "min_top_slope": min(slopes),
            "bottom_fixed_point_residual": resid,
            "preimage_tree_sizes": levels,
            "verify_top": verify_lambda_hyperbolic(top, 2000, lam=1.2).to_json(),
            "verify_bottom": verify_lambda_hyperbolic(bottom, 2000, lam=1.1).to_json(),
            "identity_branch_rates": rate_fix.to_json(),
            "wiring": full.metadata["wiring"],
        }
        out.json("appendix_evidence", result)
        print(json.dumps(_plain({k: result[k] for k in ("min_top_slope", "bottom_fixed_point_residual",
                                                         "preimage_tree_sizes")})))
        cfg.component = "t"
        return cmd_find_orbit(cfg, out)
    cfg.model = "lorenz"
    fs = make_flow(cfg)
    _, rep = stage_singularities(cfg, fs)
    traj = integrate(fs, (1.0, 1.0, 1.0), 20.0)
    dense = traj.sample(np.arange(0.0, 20.0, 0.01))
    np.savetxt(out.path("trajectory.csv"), np.column_stack([np.arange(0.0, 20.0, 0.01), dense]),
               delimiter=",", header="t,x,y,z", comments="", fmt="%.17g")
    rates = estimate_splitting_rates(fs, (1.0, 1.0, 1.0), 50.0)
    out.json("demo_lorenz", {"singularities": rep, "rates": rates.to_json()})
    for s in rep:
        print(f"{s['classification']:18s} at {np.round(s['location'], 6).tolist()}")
    print(f"rates: {rates.to_json()}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--model", choices=MAP_MODELS + FLOW_MODELS, help="system to analyse")
    c.add_argument("--config", help="flat key=value config file (flags override it)")
    c.add_argument("--mu", type=float, help="slope of the leaf map (map models)")
    c.add_argument("--rho", type=float, help="Lorenz rho for flows; vertical contraction for maps")
    c.add_argument("--sigma", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--component", choices=("all", "t", "b"), help="restrict the appendix model")
    c.add_argument("--d", type=float, help="section distance from the singularity")
    c.add_argument("--delta", type=float, help="section half-width")
    c.add_argument("--t-max", dest="t_max", type=float, help="return-time budget")
    c.add_argument("--grid-s", dest="grid_s", type=int)
    c.add_argument("--grid-y", dest="grid_y", type=int)
    c.add_argument("--abs-tol", dest="abs_tol", type=float)
    c.add_argument("--rel-tol", dest="rel_tol", type=float)
    c.add_argument("--seeds-per-band", dest="seeds_per_band", type=int)
    c.add_argument("--max-iters", dest="max_iters", type=int)
    c.add_argument("--samples", type=int, help="hyperbolicity verifier sample count")
    c.add_argument("--lambda", dest="lam", type=float, help="expansion rate to verify against")
    c.add_argument("--horizon", type=float, help="stability probe horizon")
    c.add_argument("--U", type=float)
    c.add_argument("--V", type=float)
    c.add_argument("--probe-samples", dest="probe_samples", type=int)
    c.add_argument("--out", dest="out_dir", help="output directory")
    c.add_argument("--seed", type=int)
    c.add_argument("-v", "--verbose", action="store_true")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="orbitforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    demo = sub.add_parser("demo", parents=[common])
    demo.add_argument("which", choices=("lorenz", "geo-lorenz", "appendix"))
    return p


CONFIG_FLAGS = ("model", "mu", "rho", "sigma", "beta", "component", "d", "delta", "t_max", "grid_s",
                "grid_y", "abs_tol", "rel_tol", "seeds_per_band", "max_iters", "samples", "lam",
                "horizon", "U", "V", "probe_samples", "out_dir", "seed")

HANDLERS = {
    "singularities": cmd_singularities,
    "section": cmd_section,
    "return-map": cmd_return_map,
    "verify-hyperbolic": cmd_verify,
    "find-orbit": cmd_find_orbit,
    "stability-probe": cmd_stability_probe,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve(file_values, {k: getattr(args, k) for k in CONFIG_FLAGS})
    except InvalidInputError as exc:
        parser.print_usage(sys.stderr)
        print(f"orbitforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command != "demo" and cfg.model is None:
        parser.print_usage(sys.stderr)
        print("orbitforge: error: --model is required", file=sys.stderr)
        return EXIT_USAGE
    out = Output(cfg, args.command)
    t0 = time.perf_counter()
    try:
        if args.command == "demo":
            code = cmd_demo(cfg, out, args.which)
        else:
            code = HANDLERS[args.command](cfg, out)
    except InvalidInputError as exc:
        print(f"orbitforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IncompleteGraphError, GrowthFailure) as exc:
        dead = getattr(exc, "dead_ends", None) or []
        out.json("diagnostics", {"error": type(exc).__name__, "message": str(exc),
                                 "dead_ends": [b.to_json() for b in dead]})
        print(f"orbitforge: covering failure: {exc}", file=sys.stderr)
        return EXIT_COVERING
    except (NotTriangularError, GeometryError) as exc:
        out.json("diagnostics", {"error": type(exc).__name__, "message": str(exc)})
        print(f"orbitforge: extraction failure: {exc}", file=sys.stderr)
        return EXIT_EXTRACTION
    except IntegrationStall as exc:
        out.json("diagnostics", {"error": type(exc).__name__, "message": str(exc)})
        print(f"orbitforge: integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (NonHyperbolicOrbit, BranchRefinementError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        orbit = getattr(exc, "orbit", None)
        if orbit is not None:
            payload["orbit"] = orbit.to_json()
        out.json("diagnostics", payload)
        print(f"orbitforge: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except StageFailure as exc:
        out.json("diagnostics", {"error": "StageFailure", "message": str(exc)})
        print(f"orbitforge: {exc}", file=sys.stderr)
        return exc.code
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
