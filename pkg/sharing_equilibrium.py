#!/usr/bin/env python3
"""
Sharing Equilibrium Toolkit

Generates resource-sharing networks, solves for their lexicographically
optimal sharing ratios, verifies the equilibrium and stability properties of
a solution, and simulates the minimum-ratio sharing policy.
"""

import sys
import json
import argparse
import yaml
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from lib.documents import (
    SolutionDocument,
    gnuplot_script,
    load_graph,
    load_solution,
    load_trace,
    save_graph,
    save_report,
    save_solution,
    save_trace,
)
from lib.dynamics import SharingSimulator, SimConfig, convergence_report
from lib.errors import InputError, SharingError
from lib.lexopt import LexOptSolver
from lib.network_generator import EndowmentProfile, NetworkGenerator, spec_from_args
from lib.output_manager import OutputManager
from lib.verify import EquilibriumVerifier

DEFAULT_CONFIG = "config.yaml"
CHECKS = ("structure", "equilibrium", "stability", "certificate")


class SharingEquilibriumApp:
    """Main class tying the generator, solver, verifier and simulator together."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize the application with configuration."""
        self.config_path = config_path
        self.config = self._load_config()
        self._setup_logging()

        self.output_manager = OutputManager(self.config)
        self.solver = LexOptSolver(self.config)
        self.verifier = EquilibriumVerifier(self.config)
        self.generator = NetworkGenerator(self.config)

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file (optional when no path was given)."""
        if self.config_path is None:
            if not Path(DEFAULT_CONFIG).exists():
                return {}
            self.config_path = DEFAULT_CONFIG

        config_file = Path(self.config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        try:
            with open(config_file, "r") as f:
                return yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML configuration: {e}")

    def _setup_logging(self):
        """Configure logging based on config settings."""
        log_level = self.config.get("logging", {}).get("level", "INFO")
        logging.basicConfig(
            level=getattr(logging, log_level.upper()),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        self.logger = logging.getLogger(__name__)

    def generate(self, args: argparse.Namespace) -> str:
        """
        Generate an instance and write its Graph JSON.

        Returns:
            Path of the written document
        """
        profile = EndowmentProfile.parse(args.endowment)
        spec = spec_from_args(
            args.model,
            profile,
            args.seed,
            rows=args.rows,
            cols=args.cols,
            n=args.n,
            p=args.p,
            m=args.m,
            power=args.power,
            k=args.k,
            beta=args.beta,
            draw=args.draw,
            require_connected=not args.allow_disconnected,
        )
        g, d = self.generator.generate(spec)
        path = self.output_manager.resolve(args.output, f"{spec.model}-seed{spec.seed}", "graph")
        save_graph(path, g, d, meta={"generator": spec.to_dict(), "seed": spec.seed})
        return path

    def solve(self, graph_path: str, output: Optional[str] = None, certify: bool = False) -> Tuple[str, bool]:
        """
        Solve an instance and write its Solution JSON.

        Returns:
            (path of the written document, certification passed or not requested)
        """
        g, d, meta = load_graph(graph_path)
        dec = self.solver.peel_solve(g, d)
        alloc = self.solver.extract_allocation(g, d, dec)

        certification = None
        passed = True
        if certify:
            report = self.solver.certify_lexopt(g, d, dec)
            certification = report.to_dict()
            passed = report.passed

        solution = SolutionDocument(
            g, d, dec, alloc, certification, meta={"source": graph_path, "seed": meta.get("seed")}
        )
        path = self.output_manager.resolve(output, self.output_manager.instance_name(graph_path), "solution")
        save_solution(path, solution, self.output_manager.float_digits)
        return path, passed

    def verify(
        self,
        solution_path: str,
        checks: List[str],
        mode: Optional[str] = None,
        budget: Optional[int] = None,
        seed: int = 0,
        weak: bool = False,
    ) -> Dict[str, Any]:
        """
        Run the requested checks on a Solution JSON.

        Returns:
            Machine-readable report with an overall 'passed' flag
        """
        if not checks:
            raise InputError(f"No checks requested; expected some of {', '.join(CHECKS)}")
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise InputError(f"Unknown check(s) {unknown}; expected some of {', '.join(CHECKS)}")
        solution = load_solution(solution_path)
        g, d, dec = solution.graph, solution.endowments, solution.decomposition

        results = []
        for check in checks:
            if check == "structure":
                results.append(self.verifier.check_structure(g, d, dec).to_dict())
            elif check == "equilibrium":
                results.append(self.verifier.check_sharing_equilibrium(g, d, solution.allocation, dec).to_dict())
            elif check == "certificate":
                results.append(self.solver.certify_lexopt(g, d, dec).to_dict())
            else:
                chosen = self._stability_mode(mode, len(g))
                stability = self.verifier.find_blocking_coalition(g, d, dec, chosen, budget, seed, strict_all=weak)
                results.append(stability.to_dict())

        passed = all(r["passed"] for r in results)
        if passed:
            self.logger.info(f"✅ All {len(results)} check(s) passed on {solution_path}")
        else:
            self.logger.warning(f"Verification failed on {solution_path}")
        return {"solution": solution_path, "seed": seed, "passed": passed, "reports": results}

    def _stability_mode(self, mode: Optional[str], n: int) -> str:
        mode = mode or self.verifier.config.get("mode", "auto")
        if mode == "auto":
            return "exhaustive" if n <= self.verifier.exhaustive_cap else "sampled"
        return mode

    def simulate(self, args: argparse.Namespace) -> str:
        """
        Simulate the sharing policy on an instance and write the trace CSV.

        Returns:
            Path of the written trace
        """
        g, d, _ = load_graph(args.graph)
        cfg = SimConfig.from_config(
            self.config,
            steps=args.steps,
            estimator=args.estimator,
            alpha=args.alpha,
            tie_break=args.tie_break,
            seed=args.seed,
            record_every=args.record_every,
        )
        reference = None
        if args.reference:
            solution = load_solution(args.reference)
            if solution.graph != g or solution.endowments.means != d.means:
                raise InputError(f"Reference solution {args.reference} was solved on a different instance")
            reference = solution.decomposition.received

        self.logger.info(f"Simulating {args.graph} with seed {cfg.seed}")
        trace = SharingSimulator(g, d, cfg, reference).run()
        path = self.output_manager.resolve(args.output, self.output_manager.instance_name(args.graph), "trace")
        save_trace(path, trace, self.output_manager.float_digits)
        return path

    def report(self, trace_path: str, solution_path: str, output: Optional[str], gnuplot: Optional[str]) -> str:
        """
        Convergence metrics of a trace against a solution.

        Returns:
            Path of the written report
        """
        solution = load_solution(solution_path)
        trace = load_trace(trace_path, solution.endowments)
        summary = convergence_report(trace, solution.decomposition.received)
        payload = {
            "trace": trace_path,
            "solution": solution_path,
            "seed": solution.meta.get("seed"),
            **summary.to_dict(),
        }
        path = self.output_manager.resolve(output, self.output_manager.instance_name(solution_path), "report")
        save_report(path, payload)
        if gnuplot:
            Path(gnuplot).parent.mkdir(parents=True, exist_ok=True)
            Path(gnuplot).write_text(gnuplot_script(trace_path, trace.node_ids))
            self.logger.info(f"✅ Wrote gnuplot script: {gnuplot}")
        return path


def build_parser() -> argparse.ArgumentParser:
    """Command-line surface with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(description="Lexicographically optimal resource sharing on networks")
    parser.add_argument("--config", default=None, help="Path to configuration file (default: ./config.yaml if present)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a network instance")
    gen.add_argument("--model", required=True, choices=["lattice", "er", "ba", "ws"])
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--rows", type=int)
    gen.add_argument("--cols", type=int)
    gen.add_argument("--n", type=int)
    gen.add_argument("--p", type=float)
    gen.add_argument("--m", type=int)
    gen.add_argument("--power", type=float)
    gen.add_argument("--k", type=int)
    gen.add_argument("--beta", type=float)
    gen.add_argument("--endowment", default="homogeneous:30", help="homogeneous:D | hotspots:BASE:HOT:COUNT | hotspots:BASE:HOT:@ID,ID")
    gen.add_argument("--draw", default="constant", choices=["constant", "uniform", "bernoulli"])
    gen.add_argument("--allow-disconnected", action="store_true")
    gen.add_argument("-o", "--output")

    solve = sub.add_parser("solve", help="Compute the lex-optimal sharing ratios")
    solve.add_argument("graph")
    solve.add_argument("-o", "--output")
    solve.add_argument("--certify", action="store_true")

    verify = sub.add_parser("verify", help="Verify a solution")
    verify.add_argument("solution")
    verify.add_argument("--checks", default="structure,equilibrium,stability")
    verify.add_argument("--stability-mode", choices=["auto", "exhaustive", "sampled"])
    verify.add_argument("--budget", type=int)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--weak", action="store_true", help="Search for coalitions improving every member strictly")

    sim = sub.add_parser("simulate", help="Simulate the minimum-ratio sharing policy")
    sim.add_argument("graph")
    sim.add_argument("--steps", type=int)
    sim.add_argument("--estimator", choices=["exact", "running", "discounted"])
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--tie-break", dest="tie_break", choices=["split", "lowest", "random"])
    sim.add_argument("--seed", type=int)
    sim.add_argument("--record-every", dest="record_every", type=int)
    sim.add_argument("--reference")
    sim.add_argument("-o", "--output")

    report = sub.add_parser("report", help="Convergence report of a trace")
    report.add_argument("trace")
    report.add_argument("solution")
    report.add_argument("-o", "--output")
    report.add_argument("--gnuplot")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns 0 on success, 1 on failed checks, 2 on errors."""
    args = build_parser().parse_args(argv)

    try:
        app = SharingEquilibriumApp(args.config)
        if args.command == "generate":
            print(app.generate(args))
        elif args.command == "solve":
            path, passed = app.solve(args.graph, args.output, args.certify)
            print(path)
            if not passed:
                return 1
        elif args.command == "verify":
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
            result = app.verify(args.solution, checks, args.stability_mode, args.budget, args.seed, args.weak)
            print(json.dumps(result, indent=2))
            if not result["passed"]:
                return 1
        elif args.command == "simulate":
            print(app.simulate(args))
        else:
            print(app.report(args.trace, args.solution, args.output, args.gnuplot))
    except (SharingError, OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
