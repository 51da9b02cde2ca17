"""Command-line front end: ``lrsync {check,solve,simulate,bounds}``.

Exit status is 0 when every requested verdict holds, 1 when a verdict
fails, and 2 on malformed input or a numerical error.
"""
import argparse
import os
import sys

import numpy as np

from . import serialization
from .errors import LrsyncError, ScenarioError
from .graphs import Graph, anderson_morley_bound, in_family, spectral_summary
from .linalg import is_metzler
from .protocol import certify_protocol, check_positivity, make_protocol, validate_protocol
from .regulator import check_e_stabilizable, compute_alpha, solve_regulator
from .scenario import GRAPH_KINDS, Scenario, load_scenario
from .simulator import (
    compute_metrics,
    input_bound_excess,
    reference_trajectory,
    simulate,
    write_trajectory_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

POSITIVITY_FLOOR = -1e-7
INPUT_BOUND_SLACK = 1e-9


def _yes(flag):
    return "yes" if flag else "NO"


def _out_dir(args, scenario=None):
    path = args.out or (scenario.outputs if scenario is not None else "lrsync-out")
    os.makedirs(path, exist_ok=True)
    return path


def _load(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    return scenario


def run_check(scenario, echo=print):
    """Evaluate the protocol hypotheses; returns ``(ok, report)``."""
    dyn = scenario.agent()
    beta, gamma, rho = (scenario.protocol[k] for k in ("beta", "gamma", "rho"))
    E_tilde = dyn.E / rho
    report = {
        "A_metzler": is_metzler(dyn.A),
        "e_stabilizable": check_e_stabilizable(dyn),
        "e_tilde_stabilizable": check_e_stabilizable(dyn, rho=rho),
        "alpha": compute_alpha(dyn, rho),
        "gamma_over_beta": gamma / beta,
        "rho_ge_inv_beta": rho >= 1.0 / beta,
        "A_minus_gamma_rho_BE_metzler": is_metzler(dyn.A - gamma * rho * np.abs(dyn.B) @ E_tilde, 1e-12),
    }
    report["alpha_condition"] = report["alpha"] >= gamma / beta
    positivity = None
    if report["e_tilde_stabilizable"]:
        try:
            cfg = make_protocol(dyn, beta, gamma, rho)
            positivity = check_positivity(dyn, cfg)
        except LrsyncError as exc:
            report["regulator_error"] = str(exc)
    report["positivity"] = None if positivity is None else positivity.guaranteed
    report["positivity_witness"] = None if positivity is None or positivity.guaranteed else list(positivity.witness)
    ok = all(report[k] for k in (
        "A_metzler", "e_stabilizable", "e_tilde_stabilizable", "alpha_condition",
        "rho_ge_inv_beta", "A_minus_gamma_rho_BE_metzler",
    )) and "regulator_error" not in report
    report["ok"] = ok

    echo(f"A Metzler:                      {_yes(report['A_metzler'])}")
    echo(f"(A, B) E-stabilizable:          {_yes(report['e_stabilizable'])}")
    echo(f"(A, B) (E/rho)-stabilizable:    {_yes(report['e_tilde_stabilizable'])}")
    echo(f"alpha = {report['alpha']:.10g}, gamma/beta = {gamma / beta:.10g}: {_yes(report['alpha_condition'])}")
    echo(f"rho = {rho:g} >= 1/beta = {1.0 / beta:g}:       {_yes(report['rho_ge_inv_beta'])}")
    echo(f"A - gamma*rho*|B|*E/rho Metzler: {_yes(report['A_minus_gamma_rho_BE_metzler'])}")
    if positivity is None:
        echo("positivity (BK >= 0):           unknown (no regulator solution)")
    elif positivity.guaranteed:
        echo("positivity (BK >= 0):           guaranteed")
    else:
        echo(f"positivity (BK >= 0):           violated at BK{positivity.witness}")
    echo("all hypotheses hold" if ok else "some hypotheses FAIL")
    return ok, report


def cmd_check(args):
    scenario = _load(args)
    ok, report = run_check(scenario)
    if args.out:
        serialization.dump(report, os.path.join(_out_dir(args), "check.json"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args):
    scenario = _load(args)
    dyn = scenario.agent()
    rho = scenario.protocol["rho"]
    sol = solve_regulator(dyn, rho=rho)
    k_is_e = bool(np.array_equal(sol.K, sol.E_tilde))
    result = {
        "p": sol.p,
        "zeta": sol.zeta,
        "K": sol.K,
        "E_tilde": sol.E_tilde,
        "residual": sol.residual,
        "lp_objective": sol.lp_value,
        "K_equals_E_tilde": k_is_e,
        "rho": rho,
    }
    out = _out_dir(args, scenario)
    serialization.dump(result, os.path.join(out, "regulator.json"))
    print(f"p = {np.array2string(sol.p, precision=10)}")
    print(f"K = {np.array2string(sol.K, precision=10)}")
    print(f"residual = {sol.residual:.3e}; K == E/rho: {_yes(k_is_e)}")
    return EXIT_OK


def run_simulation(scenario, out):
    """Certify, simulate and write artifacts for one scenario; returns the summary."""
    dyn = scenario.agent()
    p = scenario.protocol
    cfg = make_protocol(dyn, p["beta"], p["gamma"], p["rho"])
    check = validate_protocol(dyn, cfg)
    if not check:
        raise LrsyncError("protocol hypotheses fail: " + "; ".join(check.violations))
    g = scenario.build_graph()
    summary = spectral_summary(g)
    cert = certify_protocol(dyn, cfg, g, summary=summary)
    sim = scenario.sim_config()
    traj = simulate(dyn, cfg, g, sim, validate=False)
    ref = reference_trajectory(dyn, traj.states[0], traj.times)
    metrics = compute_metrics(traj, ref)
    excess = input_bound_excess(dyn, cfg, g, traj)

    os.makedirs(out, exist_ok=True)
    write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
    serialization.dump(metrics.as_dict(), os.path.join(out, "metrics.json"))

    d0 = metrics.disagreement[0]
    verdicts = {
        "protocol_valid": check.ok,
        "modes_certified": len(cert.mode_certificates),
        "positivity_guaranteed": cert.positivity.guaranteed,
        "nonnegative_trajectory": bool(metrics.min_coordinate.min() >= POSITIVITY_FLOOR),
        "input_bound_respected": excess <= INPUT_BOUND_SLACK,
        "disagreement_decreased": bool(metrics.disagreement[-1] <= d0),
    }
    ok = verdicts["input_bound_respected"] and verdicts["disagreement_decreased"]
    if cert.positivity.guaranteed:
        ok = ok and verdicts["nonnegative_trajectory"]
    summary_doc = {
        "seed": {"graph": scenario.graph.get("seed"), "init": scenario.sim["init"].get("seed")},
        "graph_sha256": g.digest(),
        "scenario": scenario.to_dict(),
        "spectrum": {"lambda2": summary.lambda2, "lambdaN": summary.lambdaN},
        "certificates": {
            "min_margin": cert.min_margin,
            "margins": [c.margin for c in cert.mode_certificates],
            "degree": cert.degree,
            "notes": list(cert.notes),
        },
        "alpha": check.alpha,
        "verdicts": verdicts,
        "metrics": {
            "initial_disagreement": d0,
            "final_disagreement": metrics.disagreement[-1],
            "final_over_initial": metrics.disagreement[-1] / d0 if d0 > 0 else 0.0,
            "min_coordinate": metrics.min_coordinate.min(),
            "input_bound_excess": excess,
            "half_life": metrics.half_life,
            "final_sync_error_vs_reference": metrics.sync_error_vs_reference[-1],
        },
        "ok": ok,
    }
    serialization.dump(summary_doc, os.path.join(out, "summary.json"))
    return summary_doc


def cmd_simulate(args):
    scenario = _load(args)
    out = _out_dir(args, scenario)
    if args.batch is None:
        doc = run_simulation(scenario, out)
        m = doc["metrics"]
        print(f"disagreement {m['initial_disagreement']:.6g} -> {m['final_disagreement']:.6g}; "
              f"half-life {m['half_life']:.4g}; min coordinate {m['min_coordinate']:.3e}")
        print(f"artifacts written to {out}")
        return EXIT_OK if doc["ok"] else EXIT_FAIL
    base = args.seed if args.seed is not None else scenario.graph.get("seed", 0)
    runs = []
    for k in range(args.batch):
        seed = base + k
        doc = run_simulation(scenario.with_seed(seed), os.path.join(out, f"run-{seed:04d}"))
        runs.append({"seed": seed, "half_life": doc["metrics"]["half_life"], "ok": doc["ok"]})
    half = np.array([r["half_life"] for r in runs])
    batch = {"runs": runs, "median_half_life": float(np.median(half)), "ok": all(r["ok"] for r in runs)}
    serialization.dump(batch, os.path.join(out, "batch.json"))
    print(f"{args.batch} runs, median half-life {batch['median_half_life']:.4g}")
    return EXIT_OK if batch["ok"] else EXIT_FAIL


def cmd_bounds(args):
    beta, gamma = args.beta, args.gamma
    if args.graph_file:
        g = Graph.load(args.graph_file)
    elif args.kind:
        if args.n is None or (args.kind == "random_regular" and args.d is None) or (
            args.kind == "erdos_renyi" and args.p_edge is None
        ):
            raise ScenarioError("--kind", "generator needs --n and --d (regular) or --p-edge (Erdos-Renyi)")
        spec = {"kind": args.kind, "n": args.n, "d": args.d, "p_edge": args.p_edge, "seed": args.seed or 0}
        g = Scenario({}, {}, spec, {}, "").build_graph()
    elif args.scenario:
        scenario = _load(args)
        g = scenario.build_graph()
        beta = scenario.protocol["beta"] if beta is None else beta
        gamma = scenario.protocol["gamma"] if gamma is None else gamma
    else:
        raise ScenarioError("bounds", "give --scenario, --graph-file or --kind")

    s = spectral_summary(g)
    report = {
        "n": g.n,
        "edges": g.n_edges,
        "connected": s.is_connected,
        "lambda2": s.lambda2,
        "lambdaN": s.lambdaN,
        "anderson_morley": anderson_morley_bound(g) if g.edges else None,
    }
    d = g.regular_degree()
    report["two_d"] = 2.0 * d if d is not None else None
    print(f"nodes {g.n}, edges {g.n_edges}, connected: {_yes(s.is_connected)}")
    print(f"lambda_2 = {s.lambda2:.10g}")
    print(f"lambda_N = {s.lambdaN:.10g}")
    if report["anderson_morley"] is not None:
        print(f"Anderson-Morley bound = {report['anderson_morley']:.10g}")
    if d is not None:
        print(f"{d}-regular: 2d = {2 * d}")
    ok = True
    if beta is not None and gamma is not None:
        member = in_family(g, beta, gamma, summary=s)
        report.update(beta=beta, gamma=gamma, in_family=member)
        print(f"in family [beta, gamma] = [{beta:g}, {gamma:g}]: {_yes(member)}")
        ok = member
    if args.out:
        serialization.dump(report, os.path.join(_out_dir(args), "bounds.json"))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="lrsync", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", required=scenario_required, help="scenario YAML file or preset name (paper-d5, paper-d7)")
        p.add_argument("--seed", type=int, help="override graph and initial-state seeds")
        p.add_argument("--out", help="output directory (overrides the scenario's 'outputs')")

    common(sub.add_parser("check", help="check the protocol hypotheses"))
    common(sub.add_parser("solve", help="solve the regulator LP and report the gain"))
    p = sub.add_parser("simulate", help="certify every mode, simulate, write artifacts")
    common(p)
    p.add_argument("--batch", type=int, help="run k seeded repetitions starting at --seed")
    p = sub.add_parser("bounds", help="spectral bounds and family membership of a graph")
    common(p, scenario_required=False)
    p.add_argument("--graph-file", help="edge-list file ('n <count>' header, then 'i j w' lines)")
    p.add_argument("--kind", choices=GRAPH_KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--p-edge", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    return parser


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "simulate": cmd_simulate, "bounds": cmd_bounds}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "batch", None) is not None and args.batch < 1:
        print("error: --batch must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except (LrsyncError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
