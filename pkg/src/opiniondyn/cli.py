"""Command-line surface: analyze, simulate, stepsize, estimate, samplebound,
reproduce, fixtures.

Exit codes: 0 success, 2 validation failure (bad files, flags, or matrix
structure), 3 numerical failure.  The OPINION_LOG environment variable
(error, info, debug) controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimate as est
from . import fixtures as fx
from . import simulate as sim
from . import spectral, stepsize
from .errors import NumericalError, OpinionDynError, ValidationError
from .netcore import SystemSpec, load_matrix_csv, parse_vector_arg

logger = logging.getLogger(__name__)

STABILITY_EPS = 1e-6
RESIDUAL_PIN = 1e-16
DEFAULT_SEED = 20240
REPRODUCE_NAMES = ("fig2a", "fig2b", "fig5", "fig6", "fig7a", "fig7b", "example-estimation")


@dataclass
class RunReport:
    """Summary emitted by the reproduce command; scalars are recomputable from artifacts."""

    name: str
    verdict: str
    scalars: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        # Artifact names are recorded relative to the output directory so the
        # report bytes do not depend on where the run landed.
        return {
            "name": self.name,
            "verdict": self.verdict,
            "scalars": {k: float(v) for k, v in self.scalars.items()},
            "artifacts": [Path(a).name for a in self.artifacts],
        }


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("OPINION_LOG", "error").strip().lower(), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_trajectory_csv(path: Path, traj: sim.Trajectory) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = traj.xi_series.shape[1]
    header = "k," + ",".join(f"xi_{i + 1}" for i in range(dim)) + ",spread"
    lines = [header]
    for i in range(len(traj)):
        cells = [str(int(traj.ks[i]))]
        cells += [repr(float(v)) for v in traj.xi_series[i]]
        cells.append(repr(float(traj.spread_series[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_analyze(args) -> int:
    spec = SystemSpec.from_json(args.system)
    report = spectral.classify_system(spec, tol_eig=args.tol_eig)
    doc = report.to_json_dict()
    if args.x0 is not None:
        x0 = parse_vector_arg(args.x0)
        if report.classification in (spectral.CONSENSUS, spectral.CONVERGENCE):
            pred = spectral.predict_limit(spec, x0, tol_eig=args.tol_eig, report=report)
            doc["phi"] = [float(v) for v in pred.phi]
        else:
            logger.info(
                "no limit prediction for a %s system; omitting phi", report.classification
            )
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"classification: {report.classification}", file=sys.stderr)
    return 0


def _cmd_simulate(args) -> int:
    spec = SystemSpec.from_json(args.system)
    x0 = parse_vector_arg(args.x0)
    n, ni = spec.n_agents, spec.n_issues
    if spec.mids is not None and x0.size == n * ni:
        traj = sim.run_multi_issue(
            spec, x0, max_steps=args.steps, tol_conv=args.tol, window=args.window
        )
    elif x0.size == n:
        traj = sim.run(spec, x0, max_steps=args.steps, tol_conv=args.tol, window=args.window)
    else:
        raise ValidationError(
            f"initial opinions have length {x0.size}; expected {n} (issue-free)"
            + (f" or {n * ni} (multi-issue)" if spec.mids is not None else "")
        )
    _write_trajectory_csv(Path(args.out), traj)
    print(
        f"stop={traj.stop_reason} steps={int(traj.ks[-1])} "
        f"final_spread={float(traj.spread_series[-1])!r}"
    )
    return 0


def _cmd_stepsize(args) -> int:
    L = load_matrix_csv(args.laplacian)
    out_dir = Path(args.out_dir)
    out_json = Path(args.out_json) if args.out_json else out_dir / "stepsize-region.json"
    out_csv = Path(args.out_csv) if args.out_csv else out_dir / "stepsize-scan.csv"
    mode = stepsize.MODE_EPS_FIXED if args.mode == "fixed-eps" else stepsize.MODE_EPS_EQUALS_RHO
    if mode == stepsize.MODE_EPS_FIXED and args.eps is None:
        raise ValidationError("--mode fixed-eps requires --eps")

    if args.method == "direct":
        region = stepsize.feasible_rho_direct(
            L, mode=mode, eps=args.eps, grid_step=args.grid, rho_max=args.rho_max
        )
        doc = region.to_json_dict()
    elif args.method == "corollary1":
        if mode != stepsize.MODE_EPS_FIXED:
            raise ValidationError("--method corollary1 applies to --mode fixed-eps")
        region = stepsize.feasible_rho_bound(L, args.eps)
        doc = region.to_json_dict()
    elif args.method in ("cubic", "cubic-paper"):
        if mode != stepsize.MODE_EPS_EQUALS_RHO:
            raise ValidationError("cubic methods apply to --mode rho-squared")
        variant = "corrected" if args.method == "cubic" else "paper"
        region = stepsize.feasible_rho_cubic(L, variant=variant, rho_max=args.rho_max)
        doc = region.to_json_dict()
    elif args.method == "hb":
        if mode != stepsize.MODE_EPS_EQUALS_RHO:
            raise ValidationError("--method hb applies to --mode rho-squared")
        if args.rho is None:
            raise ValidationError("--method hb requires --rho")
        diag = stepsize.hb_step_check(L, args.rho)
        doc = {
            "method": "theorem_hb",
            "rho": diag.rho,
            "hb_verdict": diag.hb_verdict,
            "direct_verdict": diag.direct_verdict,
            "f_values": [
                None if r.f_value is None else float(r.f_value) for r in diag.records
            ],
            "magnitudes": [float(r.magnitude) for r in diag.records],
        }
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown method {args.method!r}")

    rhos, mags, *_ = stepsize.magnitude_samples(
        L, mode=mode, eps=args.eps, grid_step=args.grid, rho_max=args.rho_max
    )
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# rho,max_magnitude"]
    lines += [f"{repr(float(r))},{repr(float(m))}" for r, m in zip(rhos, mags)]
    out_csv.write_text("\n".join(lines) + "\n")
    _write_json(out_json, doc)
    print(json.dumps(doc))
    return 0


def _cmd_estimate(args) -> int:
    truth = SystemSpec.from_json(args.system)
    if args.gamma0 is not None:
        m, result = est.grow_sample_estimate(
            truth, args.gamma0, m0=args.samples, m_cap=args.cap, seed=args.seed, box=args.box
        )
    else:
        scen = est.draw_scenarios(truth, args.samples, args.seed, box=args.box)
        result = est.solve_estimation(scen, truth.lam, truth.laplacian)
        m = result.m_used
    doc = result.to_json_dict()
    doc["seed"] = int(args.seed)
    _write_json(Path(args.out), doc)
    print(
        f"m={m} gamma_star={float(result.gamma_star)!r} "
        f"rank={result.rank} unique={result.unique}"
    )
    return 0


def _cmd_samplebound(args) -> int:
    d = args.dim if args.dim is not None else args.agents * args.agents
    formula = est.CAMPI_GARATTI if args.formula == "campi" else est.PAPER_LITERAL
    query = est.SampleBoundQuery(d=d, epsilon=args.eps, beta=args.beta, formula=formula)
    m = est.sample_bound(query)
    tail = (
        est.binomial_tail(m, d, args.eps)
        if formula == est.CAMPI_GARATTI
        else est.paper_tail(m, d, args.eps)
    )
    print(f"m={m} tail={tail:.6g} d={d} formula={args.formula}")
    return 0


def _cmd_fixtures(args) -> int:
    fx.validate_catalog()
    for name, f in sorted(fx.catalog().items()):
        issues = "-" if f.mids is None else f"{f.mids.shape[0]} issues"
        print(f"{name}: {f.system.n_agents} agents, {issues}; {f.description}")
    return 0


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------


def _hull_verdict(limit: float, x0: np.ndarray) -> str:
    inside = x0.min() <= limit <= x0.max()
    return "consensus-inside-hull" if inside else "consensus-outside-hull"


def _reproduce_example1(name: str, out_dir: Path) -> RunReport:
    f = fx.fixture("example1")
    lam = fx.EXAMPLE1_LAM if name == "fig2a" else fx.EXAMPLE1_LAM_FLAT
    spec = SystemSpec(lam, f.system.laplacian, f.system.appraisal)
    report = spectral.classify_system(spec)
    pred = spectral.predict_limit(spec, f.x0, report=report)
    traj = sim.run(spec, f.x0, max_steps=500)
    csv_path = out_dir / f"{name}.csv"
    _write_trajectory_csv(csv_path, traj)
    analysis_path = out_dir / f"{name}-analysis.json"
    analysis = report.to_json_dict()
    analysis["phi"] = [float(v) for v in pred.phi]
    _write_json(analysis_path, analysis)
    limit = float(np.mean(traj.final))
    verdict = _hull_verdict(limit, f.x0)
    if traj.stop_reason != sim.CONVERGED or traj.spread_series[-1] >= STABILITY_EPS:
        verdict = "no-consensus"
    return RunReport(
        name=name,
        verdict=verdict,
        scalars={
            "rho_rest": report.rho_rest,
            "final_spread": traj.spread_series[-1],
            "limit": limit,
            "predicted_limit": float(np.mean(pred.phi)),
        },
        artifacts=[csv_path, analysis_path],
    )


def _reproduce_coupled(name: str, out_dir: Path) -> RunReport:
    fixture_name, damped = {
        "fig5": ("sec5-coop", False),
        "fig6": ("sec5-antag", False),
        "fig7a": ("sec5-coop", True),
        "fig7b": ("sec5-antag", True),
    }[name]
    f = fx.fixture(fixture_name)
    spec = f.with_mids(damped=damped)
    traj = sim.run_multi_issue(spec, f.x0_multi)
    csv_path = out_dir / f"{name}.csv"
    _write_trajectory_csv(csv_path, traj)
    final = traj.final.reshape(spec.n_agents, spec.n_issues)
    issue_spread = float((final.max(axis=0) - final.min(axis=0)).max())
    final_max = float(np.abs(traj.final).max())
    if damped:
        verdict = "stability" if final_max < STABILITY_EPS else "no-stability"
        scalars = {"final_max_abs": final_max, "steps": float(traj.ks[-1])}
    else:
        verdict = spectral.classify_multi_issue(spec)
        if traj.stop_reason != sim.CONVERGED:
            verdict = "no-convergence"
        elif issue_spread < STABILITY_EPS:
            verdict = "consensus"
        else:
            verdict = "clusters"
        leader = 2  # absorbing row of the influence network
        block = slice(leader * spec.n_issues, (leader + 1) * spec.n_issues)
        variation = float(np.abs(traj.xi_series[:, block] - traj.xi_series[0, block]).max())
        scalars = {
            "issue_spread": issue_spread,
            "leader_variation": variation,
            "steps": float(traj.ks[-1]),
        }
    return RunReport(name=name, verdict=verdict, scalars=scalars, artifacts=[csv_path])


def _reproduce_estimation(out_dir: Path, seed: int) -> RunReport:
    f = fx.fixture("sec5-coop")
    truth = f.system
    scen = est.draw_scenarios(truth, 2 * truth.n_agents, seed)
    result = est.solve_estimation(scen, truth.lam, truth.laplacian)
    gauge = est.gauge_distance(result.d_hat, truth.appraisal)
    path = out_dir / "example-estimation-result.json"
    doc = result.to_json_dict()
    doc["seed"] = int(seed)
    doc["gauge_distance"] = float(gauge)
    _write_json(path, doc)
    verdict = "zero-residual" if result.gamma_star < RESIDUAL_PIN else "residual-above-pin"
    return RunReport(
        name="example-estimation",
        verdict=verdict,
        scalars={
            "gamma_star": result.gamma_star,
            "gauge_distance": gauge,
            "rank": float(result.rank),
            "m_used": float(result.m_used),
        },
        artifacts=[path],
    )


def reproduce(name: str, out_dir, seed: int = DEFAULT_SEED) -> RunReport:
    """Re-run one named benchmark and emit its CSV/JSON artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if name in ("fig2a", "fig2b"):
        report = _reproduce_example1(name, out_dir)
    elif name in ("fig5", "fig6", "fig7a", "fig7b"):
        report = _reproduce_coupled(name, out_dir)
    elif name == "example-estimation":
        report = _reproduce_estimation(out_dir, seed)
    else:
        known = ", ".join(REPRODUCE_NAMES)
        raise ValidationError(f"unknown reproduce target {name!r}; known: {known}")
    report_path = out_dir / f"{name}-report.json"
    _write_json(report_path, report.to_json_dict())
    report.artifacts.append(report_path)
    return report


def _cmd_reproduce(args) -> int:
    report = reproduce(args.name, args.out_dir, seed=args.seed)
    print(f"{report.name}: {report.verdict}")
    for key in sorted(report.scalars):
        print(f"  {key}={float(report.scalars[key])!r}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-eig", type=float, default=spectral.TOL_EIG)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out-dir", default=".")

    parser = argparse.ArgumentParser(
        prog="opiniondyn",
        description="Two-network opinion dynamics: analysis, simulation, and estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="spectral classification of a system")
    p.add_argument("--system", required=True)
    p.add_argument("--x0", default=None, help="initial opinions (inline CSV or file)")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="run a trajectory to a CSV file")
    p.add_argument("--system", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--steps", type=int, default=sim.DEFAULT_MAX_STEPS)
    p.add_argument("--tol", type=float, default=sim.DEFAULT_TOL_CONV)
    p.add_argument("--window", type=int, default=sim.DEFAULT_WINDOW)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("stepsize", parents=[common], help="feasible step-size regions")
    p.add_argument("--laplacian", required=True)
    p.add_argument("--mode", choices=["fixed-eps", "rho-squared"], default="rho-squared")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument(
        "--method",
        choices=["direct", "corollary1", "cubic", "cubic-paper", "hb"],
        default="direct",
    )
    p.add_argument("--grid", type=float, default=1e-3)
    p.add_argument("--rho-max", type=float, default=None)
    p.add_argument("--rho", type=float, default=None, help="step size to certify (hb)")
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(handler=_cmd_stepsize)

    p = sub.add_parser("estimate", parents=[common], help="appraisal estimation from scenarios")
    p.add_argument("--system", required=True, help="truth system JSON")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--gamma0", type=float, default=None, help="residual target; enables growth loop")
    p.add_argument("--cap", type=int, default=200)
    p.add_argument("--box", type=float, default=1.0)
    p.add_argument("--out", default="result.json")
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("samplebound", parents=[common], help="exact scenario sample-size bound")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--dim", type=int, default=None, help="override decision dimension (default agents^2)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--formula", choices=["campi", "paper"], default="campi")
    p.set_defaults(handler=_cmd_samplebound)

    p = sub.add_parser("reproduce", parents=[common], help="re-run a named benchmark")
    p.add_argument("name", choices=list(REPRODUCE_NAMES))
    p.set_defaults(handler=_cmd_reproduce)

    p = sub.add_parser("fixtures", parents=[common], help="list the bundled systems")
    p.set_defaults(handler=_cmd_fixtures)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OpinionDynError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
