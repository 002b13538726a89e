"""
FracTK — Command-Line Entry Point
Generate prefractal snowflakes, verify thickness/ball/interior conditions, estimate
dimensions and measures, classify function-space indices, and export figures.
Run with: python main.py <command> ...

Exit codes: 0 success, 1 unsatisfied verification or I/O failure, 2 usage error.
Artifacts go to --out (or stdout); logs go to stderr.
"""
import argparse
import json
import logging
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from analysis.dimension import (
    collar_measure_series, dimension_pipeline, dset_ring_check, family_xi, hausdorff_convergence,
)
from analysis.orchestrator import run_suite
from analysis.spaces import (
    SetDescriptor, SpaceParams, d0_density_decide, density_decide, kernel_window_check,
    nullity_classify, q1_equality_decide,
)
from analysis.thickness import (
    ball_condition_witness, certify_profiles, check_cond1, check_cond2, check_cond3, ethick_witness,
    exterior_cube_witness, inner_cube_witness, interior_regularity_stability, ithick_witness,
)
from config import settings
from geometry.classical import (
    ClassicalParams, classical_dimension, classical_leg, classical_level, collar_area, collar_pieces,
)
from geometry.geom import AxisSquare, Point
from geometry.prefractal import FAMILIES, PrefractalPair, build_pair
from geometry.square import (
    collar_area_square, collar_pieces_square, inner_outer, square_dimension, square_leg, square_prefractal,
)
from services.export_service import export_svg, render_csv, render_json, write_artifact
from utils.log import configure_logging
from utils.sampling import make_rng, random_subset

logger = logging.getLogger("main")

EXIT_OK, EXIT_UNSATISFIED, EXIT_USAGE = 0, 1, 2
LAYERS = ("inner", "outer", "collar", "boundary", "leg")


class RunConfig(BaseModel):
    """One CLI invocation, argparse values overlaid on the environment settings."""
    command: str
    action: Optional[str] = None
    family: Optional[str] = None
    beta: Optional[float] = Field(default=None, gt=0.0)
    level: Optional[int] = Field(default=None, ge=0)
    levels: list[int] = Field(default_factory=list)
    samples: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    rng: str = "PCG64"
    eps: float = Field(default=1e-9, gt=0.0)
    out: Optional[str] = None

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.rng)


# ── Argument parsing ──────────────────────────────────────────
def _int_range(text: str) -> list[int]:
    """'1..5' or '1,3,4'."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a..b' or a comma list of integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    """Usage errors surface as SystemExit(message) so run() can map them to exit code 2."""

    def error(self, message):
        raise SystemExit(f"{self.prog}: error: {message}")


def _family_args(p: argparse.ArgumentParser, level_required: bool = True):
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--beta", type=float, help="apex half-angle (radians) for the classical family")
    p.add_argument("--level", type=int, required=level_required)
    p.add_argument("--samples", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fractk", description="Prefractal snowflake geometry and index calculus toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--rng", help="numpy bit generator name, e.g. PCG64 or Philox")
    parser.add_argument("--eps", type=float)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="construct a prefractal level")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--beta", type=float)
    gen.add_argument("--level", type=int, required=True)
    gen.add_argument("--which", choices=LAYERS, default="inner")
    gen.add_argument("--out")

    ver = sub.add_parser("verify", help="finite-scale geometric certification")
    ver.add_argument("action", choices=("thickness", "cond", "ball", "interior", "suite"))
    _family_args(ver, level_required=False)
    ver.add_argument("--levels", type=_int_range)
    ver.add_argument("--radii", type=_float_list, default=[0.25, 0.5])
    ver.add_argument("--sides", type=_float_list, default=[0.05, 0.1])

    est = sub.add_parser("estimate", help="dimension and measure estimates")
    est.add_argument("action", choices=("dimension", "ring", "collar", "convergence"))
    _family_args(est)
    est.add_argument("--scales", type=_int_range)
    est.add_argument("--drop-low", type=int, default=1)
    est.add_argument("--drop-high", type=int, default=1)
    est.add_argument("--radii", type=_float_list)
    est.add_argument("--centers", type=int, default=50)

    cls = sub.add_parser("classify", help="function-space index decisions")
    cls.add_argument("action", choices=("nullity", "q1", "density", "d0", "kernel-window"))
    cls.add_argument("--json", dest="params", required=True)
    cls.add_argument("--out")

    exp = sub.add_parser("export", help="SVG figure of one or more layers")
    _family_args(exp)
    exp.add_argument("--layers", default="outer,inner")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        action=getattr(args, "action", None),
        family=getattr(args, "family", None),
        beta=getattr(args, "beta", None),
        level=getattr(args, "level", None),
        levels=getattr(args, "levels", None) or [],
        samples=getattr(args, "samples", None),
        seed=settings.seed if args.seed is None else args.seed,
        rng=args.rng or settings.rng_algorithm,
        eps=settings.eps if args.eps is None else args.eps,
        out=getattr(args, "out", None),
    )


@contextmanager
def _overrides(cfg: RunConfig):
    saved = (settings.eps, settings.seed, settings.rng_algorithm)
    settings.eps, settings.seed, settings.rng_algorithm = cfg.eps, cfg.seed, cfg.rng
    try:
        yield
    finally:
        settings.eps, settings.seed, settings.rng_algorithm = saved


def _need_level(cfg: RunConfig) -> int:
    if cfg.level is None:
        raise ValueError("--level is required for this command")
    return cfg.level


def _emit(data, cfg: RunConfig) -> None:
    write_artifact(render_json(data), cfg.out)


def _status(satisfied: bool) -> int:
    return EXIT_OK if satisfied else EXIT_UNSATISFIED


# ── Geometry helpers ──────────────────────────────────────────
def _params(beta: Optional[float]) -> ClassicalParams:
    if beta is None:
        raise ValueError("the classical family needs --beta")
    return ClassicalParams(beta)


def _layer(family: str, beta: Optional[float], j: int, which: str):
    """(drawable geometry, JSON payload) of one layer."""
    if family == "classical":
        p = _params(beta)
        if which == "leg":
            leg = classical_leg(p, j)
            return leg, {"points": leg.tolist(), "closed": False}
        if which == "collar":
            pieces = collar_pieces(p, j)
            return pieces, {"pieces": pieces.tolist(), "area": collar_area(p, j)}
        level = classical_level(p, j)
        polygon = level.outer if which == "outer" else level.inner
        return polygon, polygon.to_json()
    if which == "leg":
        leg = square_leg(j)
        return leg, {"points": leg.tolist(), "closed": False}
    if which == "collar":
        pieces = collar_pieces_square(j)
        return pieces, {"pieces": pieces.tolist(), "area": collar_area_square(j)}
    level = square_prefractal(j)
    if which == "boundary":
        return level.boundary, {**level.boundary.to_json(), **level.cells_json()}
    inner, outer = inner_outer(j, level)
    region = outer if which == "outer" else inner
    return region, region.to_json()


def _boundary(family: str, beta: Optional[float], j: int):
    """(∂Γ_j polygon standing in for the limit boundary, dimension of the limit)."""
    if family == "classical":
        p = _params(beta)
        return classical_level(p, j).inner, classical_dimension(p)
    return square_prefractal(j).boundary, square_dimension()


def _sample(points: np.ndarray, limit: Optional[int], cfg: RunConfig) -> np.ndarray:
    return points[random_subset(len(points), limit, cfg.generator())]


# ── generate ──────────────────────────────────────────────────
def cmd_generate(args, cfg: RunConfig) -> int:
    which = args.which
    if which == "boundary" and cfg.family == "classical":
        # the inner polygon is the classical level boundary
        which = "inner"
    geometry, payload = _layer(cfg.family, cfg.beta, _need_level(cfg), which)
    if cfg.out and cfg.out.lower().endswith(".svg"):
        export_svg([(which, geometry)], cfg.out)
    else:
        _emit({"family": cfg.family, "level": cfg.level, "which": which, **payload}, cfg)
    return EXIT_OK


# ── verify ────────────────────────────────────────────────────
def _thick_queries(pair: PrefractalPair, fine: PrefractalPair, cfg: RunConfig) -> dict[str, list[dict]]:
    """E/I-thickness witnesses for cube witnesses of the pair, the next level standing in for the limit."""
    out = {"ethick": [], "ithick": []}
    plan = (("inner", inner_cube_witness, ethick_witness, "ethick"),
            ("outer", exterior_cube_witness, ithick_witness, "ithick"))
    for which, cube_search, thick_search, key in plan:
        vertices = np.unique(pair.region(which).boundary_index.segments[:, 0], axis=0)
        for x in _sample(vertices, cfg.samples or 8, cfg):
            found = cube_search(x, pair)
            if not found.satisfied:
                out[key].append({"skipped": f"no query cube at {x.tolist()}"})
                continue
            w = found.witness
            cube = AxisSquare(Point(*w["min_corner"]), w["side"])
            try:
                out[key].append(thick_search(fine, pair, cube).model_dump())
            except ValueError as e:
                out[key].append({"skipped": str(e)})
    return out


def cmd_verify(args, cfg: RunConfig) -> int:
    family, beta = cfg.family, cfg.beta
    if cfg.action == "suite":
        levels = cfg.levels or [_need_level(cfg)]
        result = run_suite(family, levels, beta, cfg.samples)
        _emit(result.to_dict(), cfg)
        return _status(result.satisfied)

    j = _need_level(cfg)
    if cfg.action == "cond":
        pair = build_pair(family, j, beta)
        reports = {
            "cond1": check_cond1(pair, samples=cfg.samples),
            "cond2": check_cond2(pair, cfg.samples),
            "cond3": check_cond3(pair, cfg.samples),
        }
        satisfied = all(r.satisfied for r in reports.values())
        _emit({"family": family, "level": j, "satisfied": satisfied, "reports": reports}, cfg)
        return _status(satisfied)

    if cfg.action == "thickness":
        pair, fine = build_pair(family, j, beta), build_pair(family, j + 1, beta)
        profiles = certify_profiles(pair, cfg.samples)
        thick = _thick_queries(pair, fine, cfg)
        answered = [r for rs in thick.values() for r in rs if "skipped" not in r]
        satisfied = all(r["satisfied"] for r in profiles["proof"].values()) \
            and all(r["satisfied"] for r in answered)
        _emit({"family": family, "level": j, "satisfied": satisfied, "profiles": profiles, **thick}, cfg)
        return _status(satisfied)

    boundary, _ = _boundary(family, beta, j)
    centers = _sample(boundary.vertices, cfg.samples or (100 if cfg.action == "ball" else 200), cfg)
    if cfg.action == "ball":
        index = boundary.boundary_index
        reports = [ball_condition_witness(index, x, r) for x in centers for r in args.radii]
        min_eta = min(r.realized["eta"] for r in reports)
        satisfied = all(r.satisfied for r in reports)
        _emit({"family": family, "level": j, "satisfied": satisfied, "min_eta": min_eta,
               "reports": reports}, cfg)
        return _status(satisfied)

    nxt, _ = _boundary(family, beta, j + 1)
    stability = interior_regularity_stability(boundary, nxt, centers, args.sides)
    satisfied = min(stability.min_ratio_j, stability.min_ratio_next) > 0.0 and stability.margin <= 0.1
    _emit({"family": family, "level": j, "satisfied": satisfied, "points": len(centers),
           "sides": args.sides, "stability": stability}, cfg)
    return _status(satisfied)


# ── estimate ──────────────────────────────────────────────────
def _tabular(rows: list[BaseModel], columns: Sequence[str], cfg: RunConfig, payload: dict) -> None:
    if cfg.out and cfg.out.lower().endswith(".csv"):
        write_artifact(render_csv((r.model_dump() for r in rows), columns), cfg.out)
    else:
        _emit(payload, cfg)


def cmd_estimate(args, cfg: RunConfig) -> int:
    family, beta, j = cfg.family, cfg.beta, _need_level(cfg)
    if cfg.action == "dimension":
        scales = args.scales or list(range(1, max(2, j)))
        estimate = dimension_pipeline(family, beta, j, (scales[0], scales[-1]), args.drop_low, args.drop_high)
        if cfg.out and cfg.out.lower().endswith(".csv"):
            write_artifact(render_csv(estimate.series.rows(), ("r", "count", "logr", "logcount")), cfg.out)
        else:
            _emit(estimate, cfg)
        return EXIT_OK

    if cfg.action == "ring":
        boundary, d = _boundary(family, beta, j)
        xi = family_xi(family, beta)
        radii = args.radii or [xi ** k for k in range(1, j - 2)] or [1.0]
        centers = _sample(boundary.vertices, args.centers, cfg)
        report = dset_ring_check(boundary.edges, xi, d, centers, radii)
        _emit({"family": family, "level": j, "d": d, "radii": radii, **report.model_dump()}, cfg)
        return EXIT_OK

    if cfg.action == "collar":
        rows = collar_measure_series(family, beta, j)
        _tabular(rows, ("j", "area", "closed_form", "relative_error"), cfg, {"family": family, "rows": rows})
        return EXIT_OK

    rows = hausdorff_convergence(family, beta, j)
    _tabular(rows, ("j", "distance", "bound", "error_bound", "within_bound"), cfg,
             {"family": family, "j_max": j, "rows": rows})
    return _status(all(r.within_bound for r in rows))


# ── classify ──────────────────────────────────────────────────
def _space(params: dict, s_key: str = "s") -> SpaceParams:
    return SpaceParams(family=params.get("family", "H"), s=params[s_key], p=params["p"],
                       q=params.get("q", 2.0), n=params["n"])


def _closed_set(params: dict) -> SetDescriptor:
    if "snowflake" in params:
        return SetDescriptor.snowflake_boundary(params["snowflake"], params.get("beta"))
    return SetDescriptor(kind=params.get("kind", "dset"), d=params["d"], n=params.get("n"),
                         compact=params.get("compact", True))


def _domain(params: dict) -> SetDescriptor:
    if "snowflake" in params:
        return SetDescriptor.snowflake_domain(params["snowflake"], params.get("beta"))
    flags = ("boundary_measure_zero", "thick", "e_thick", "i_thick", "regular_closure")
    n = params.get("n")
    return SetDescriptor(kind=params.get("kind", "custom"), d=params.get("d", (n or 1) - 1), n=n,
                         **{f: bool(params.get(f, False)) for f in flags})


def cmd_classify(args, cfg: RunConfig) -> int:
    params = json.loads(args.params)
    if not isinstance(params, dict):
        raise ValueError("--json must be a JSON object")
    try:
        if cfg.action == "nullity":
            verdict = nullity_classify(_space(params), _closed_set(params))
        elif cfg.action == "q1":
            verdict = q1_equality_decide(_domain(params), _space(params))
        elif cfg.action == "density":
            verdict = density_decide(params["s1"], params["s2"], _space(params, "s1"), _closed_set(params))
        elif cfg.action == "d0":
            verdict = d0_density_decide(params["s1"], params["p1"], params.get("q1", 2.0),
                                        params["s2"], params["p2"], params.get("q2", 2.0), params["n"])
        else:
            verdict = kernel_window_check(params["n"], params["d"], params["p"], params.get("m", 0), params["s"])
    except KeyError as e:
        raise ValueError(f"missing parameter {e.args[0]!r}") from None
    _emit(verdict, cfg)
    return EXIT_OK


# ── export ────────────────────────────────────────────────────
def cmd_export(args, cfg: RunConfig) -> int:
    names = [name.strip() for name in args.layers.split(",") if name.strip()]
    unknown = [name for name in names if name not in LAYERS]
    if unknown or not names:
        raise ValueError(f"layers must be drawn from {LAYERS}, got {args.layers!r}")
    j = _need_level(cfg)
    layers = [(name, _layer(cfg.family, cfg.beta, j, name)[0]) for name in names]
    export_svg(layers, cfg.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
    "classify": cmd_classify,
    "export": cmd_export,
}


def _one_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        return "; ".join(f"{'.'.join(str(x) for x in err['loc']) or 'input'}: {err['msg']}" for err in e.errors())
    return str(e).splitlines()[0] if str(e) else type(e).__name__


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if isinstance(e.code, int):
            return e.code
        print(e.code, file=sys.stderr)
        return EXIT_USAGE

    configure_logging("DEBUG" if args.verbose > 1 else "INFO" if args.verbose else None)
    try:
        cfg = _config(args)
        with _overrides(cfg):
            return COMMANDS[cfg.command](args, cfg)
    except OSError as e:
        logger.error("I/O failure: %s", e)
        print(f"fractk: error: {_one_line(e)}", file=sys.stderr)
        return EXIT_UNSATISFIED
    except ValueError as e:
        print(f"fractk: error: {_one_line(e)}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(run())
