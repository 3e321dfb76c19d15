"""
Censoring Scheme Search - Command Line Interface
Probabilistic search, exhaustive oracle, Monte-Carlo validation and
single-scheme evaluation of progressive Type-II censoring schemes
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO

import numpy as np

from config import DEFAULT_ITERATIONS, DEFAULT_SEED, ORACLE_BUDGET, env_seed, load_config_file, validate_config
from errors import CensearchError, SchemeError
from montecarlo import empirical_variance_check
from oracle import exhaustive_search
from proposals import ProposalKind
from report import ReportWriter
from scheme import Scheme
from search import SearchConfig, relative_efficiency, run_search, write_trace
from utils.logger import set_level, setup_logger
from weibull import CriterionEvaluator, CriterionKind, CriterionSpec, WeibullParams

logger = setup_logger(__name__, "main.log")

COMMANDS = ("search", "oracle", "validate", "compare", "evaluate")

DEFAULT_TRACE_PATH = "trace.jsonl"
DEFAULT_S_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)
DEFAULT_REPLICATIONS = 5000


@dataclass
class RunRequest:
    """Fully resolved run configuration"""
    command: str
    n: int
    m: int
    params: WeibullParams
    criterion: CriterionSpec
    proposal: ProposalKind = ProposalKind.MULTINOMIAL
    iterations: int = DEFAULT_ITERATIONS
    seed: int = DEFAULT_SEED
    chains: int = 1
    workers: int = 1
    m1: Optional[int] = None
    trace: Optional[Path] = None
    oracle_budget: int = ORACLE_BUDGET
    fmt: str = "csv"
    out: Optional[Path] = None
    scheme: Optional[Scheme] = None
    reference: Optional[Scheme] = None
    replications: int = DEFAULT_REPLICATIONS
    s_grid: List[float] = field(default_factory=lambda: list(DEFAULT_S_GRID))

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            n=self.n,
            m=self.m,
            params=self.params,
            criterion=self.criterion,
            proposal=self.proposal,
            iterations=self.iterations,
            seed=self.seed,
            m1=self.m1,
            trace=self.trace is not None,
            chains=self.chains,
            workers=self.workers,
        )

    def settings(self) -> Dict[str, str]:
        """Resolved configuration as key=value pairs readable by --config"""
        settings = {
            "n": str(self.n),
            "m": str(self.m),
            "beta": f"{self.params.beta:.17g}",
            "k": f"{self.params.k:.17g}",
            "criterion": self.criterion.kind.value,
            "proposal": self.proposal.value,
            "iters": str(self.iterations),
            "seed": str(self.seed),
            "chains": str(self.chains),
            "workers": str(self.workers),
            "m1": "auto" if self.m1 is None else str(self.m1),
            "oracle-budget": str(self.oracle_budget),
            "format": self.fmt,
            "replications": str(self.replications),
            "s-grid": ",".join(f"{s:g}" for s in self.s_grid),
        }
        if self.criterion.costs is not None:
            settings["co"] = f"{self.criterion.costs.c_o:.17g}"
            settings["cf"] = f"{self.criterion.costs.c_f:.17g}"
            settings["ct"] = f"{self.criterion.costs.c_t:.17g}"
        if self.trace is not None:
            settings["trace"] = str(self.trace)
        if self.out is not None:
            settings["out"] = str(self.out)
        if self.scheme is not None:
            settings["scheme"] = str(self.scheme)
        if self.reference is not None:
            settings["reference"] = str(self.reference)
        return settings


def _m1_value(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")


def _s_grid(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated levels, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    """Parser with one sub-command per run type sharing the same flags"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key=value file supplying any flag")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration and exit")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    design = common.add_argument_group("design")
    design.add_argument("--n", type=int, required=True, help="units on test")
    design.add_argument("--m", type=int, required=True, help="observed failures")
    design.add_argument("--beta", type=float, default=1.0, help="Weibull shape")
    design.add_argument("--k", type=float, default=1.0, help="Weibull scale")
    design.add_argument("--criterion", choices=[c.value for c in CriterionKind],
                        default=CriterionKind.VARIANCE.value)
    design.add_argument("--co", type=float, help="fixed cost")
    design.add_argument("--cf", type=float, help="cost per failure")
    design.add_argument("--ct", type=float, help="cost per unit test duration")
    design.add_argument("--scheme", help="removal vector, e.g. 0,4,1,0,0 or (0^5,20,0^4)")
    design.add_argument("--reference", help="compare: fixed scheme to rate the search against")

    run = common.add_argument_group("search")
    run.add_argument("--proposal", choices=[p.value for p in ProposalKind],
                     default=ProposalKind.MULTINOMIAL.value)
    run.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    run.add_argument("--seed", type=int, help=f"default: $CENSEARCH_SEED, then {DEFAULT_SEED}")
    run.add_argument("--chains", type=int, default=1)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--m1", type=_m1_value, default=None, help="auto or a fixed integer")
    run.add_argument("--trace", nargs="?", const=DEFAULT_TRACE_PATH, type=Path,
                     help=f"write per-iteration NDJSON (default path {DEFAULT_TRACE_PATH})")
    run.add_argument("--oracle", action="store_true", help="search exhaustively instead")
    run.add_argument("--oracle-budget", type=int, default=ORACLE_BUDGET)

    checks = common.add_argument_group("validation")
    checks.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    checks.add_argument("--s-grid", type=_s_grid, default=list(DEFAULT_S_GRID))

    output = common.add_argument_group("output")
    output.add_argument("--format", choices=list(ReportWriter.FORMATS), default="csv")
    output.add_argument("--out", type=Path, help="report path (default stdout)")

    parser = argparse.ArgumentParser(
        prog="censearch",
        description="Optimal progressive Type-II censoring schemes under the Weibull model",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "search": "probabilistic accept/reject search",
        "oracle": "exhaustive search over CS(n, m)",
        "validate": "Monte-Carlo check of Var[ln X_s] for --scheme",
        "compare": "oracle (or --reference) and search side by side with relative efficiency",
        "evaluate": "criterion value of --scheme",
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])
    return parser


def _config_file_args(argv: Sequence[str]) -> List[str]:
    """Splice flags from --config right after the command so explicit flags win"""
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", type=Path)
    known, rest = pre.parse_known_args(list(argv))
    if known.config is None:
        return list(argv)

    file_args: List[str] = []
    for name, value in load_config_file(known.config).items():
        flag = "--" + name.replace("_", "-")
        if name in ("oracle", "print_config"):
            if value.lower() in ("1", "true", "yes", "on"):
                file_args.append(flag)
        elif name == "trace" and not value:
            file_args.append(flag)
        elif name != "config":
            file_args.extend([flag, value])

    for index, token in enumerate(rest):
        if token in COMMANDS:
            return rest[:index + 1] + file_args + rest[index + 1:]
    return rest + file_args


def parse_request(argv: Optional[Sequence[str]] = None) -> tuple:
    """
    Parse and validate command-line flags

    Returns:
        (RunRequest, print_config flag, log level override)

    Raises:
        SystemExit: status 2 with usage text on any flag error
    """
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _config_file_args(argv)
    except (FileNotFoundError, OSError) as e:
        parser.error(str(e))
    args = parser.parse_args(argv)

    if args.iters < 1:
        parser.error(f"--iters must be at least 1, got {args.iters}")
    if args.chains < 1 or args.workers < 1:
        parser.error("--chains and --workers must be at least 1")
    if args.oracle_budget < 1:
        parser.error("--oracle-budget must be positive")

    costs_given = [c is not None for c in (args.co, args.cf, args.ct)]
    if args.criterion == CriterionKind.COST.value:
        if not any(costs_given):
            parser.error("--criterion cost needs at least one of --co, --cf, --ct")
    elif any(costs_given):
        parser.error("--co/--cf/--ct apply only to --criterion cost")

    seed = args.seed
    if seed is None:
        try:
            seed = env_seed()
        except ValueError as e:
            parser.error(str(e))
    if seed is None:
        seed = DEFAULT_SEED

    try:
        params = WeibullParams(args.beta, args.k)
        if args.criterion == CriterionKind.COST.value:
            criterion = CriterionSpec.cost(args.co or 0.0, args.cf or 0.0, args.ct or 0.0)
        else:
            criterion = CriterionSpec.variance()
        scheme = Scheme.parse(args.n, args.m, args.scheme) if args.scheme else None
        reference = Scheme.parse(args.n, args.m, args.reference) if args.reference else None
    except (ValueError, SchemeError) as e:
        parser.error(str(e))

    if not 1 <= args.m <= args.n:
        parser.error(f"need n >= m >= 1, got n={args.n}, m={args.m}")
    if args.m1 is not None and not 1 <= args.m1 <= args.m:
        parser.error(f"--m1 must lie in [1, {args.m}]")

    command = args.command
    if command == "search" and args.oracle:
        command = "oracle"
    if command in ("evaluate", "validate") and scheme is None:
        parser.error(f"{command} needs --scheme")
    if reference is not None and command != "compare":
        parser.error("--reference applies only to compare")
    if command == "validate":
        if args.replications < 1000:
            parser.error("--replications must be at least 1000")
        if not args.s_grid or any(not 0 < s < 1 for s in args.s_grid):
            parser.error("--s-grid levels must lie in (0, 1)")

    request = RunRequest(
        command=command,
        n=args.n,
        m=args.m,
        params=params,
        criterion=criterion,
        proposal=ProposalKind(args.proposal),
        iterations=args.iters,
        seed=seed,
        chains=args.chains,
        workers=args.workers,
        m1=args.m1,
        trace=args.trace,
        oracle_budget=args.oracle_budget,
        fmt=args.format,
        out=args.out,
        scheme=scheme,
        reference=reference,
        replications=args.replications,
        s_grid=args.s_grid,
    )
    return request, args.print_config, args.log_level


class CensoringSearchApp:
    """Dispatches a RunRequest and writes its report"""

    def __init__(self, request: RunRequest, stream: Optional[TextIO] = None):
        self.request = request
        self.stream = stream
        self.writer = ReportWriter(request.fmt, request.out)

    def _base(self) -> Dict:
        request = self.request
        return {
            "beta": request.params.beta,
            "k": request.params.k,
            "n": request.n,
            "m": request.m,
            "criterion": str(request.criterion),
        }

    def _search(self) -> List[Dict]:
        request = self.request
        report = run_search(request.search_config())
        if request.trace is not None:
            write_trace(report, request.trace)
        return [{
            **self._base(),
            "proposal": request.proposal.value,
            "seed": request.seed,
            "n_it": report.n_it,
            "n_ac": report.n_ac,
            "best_scheme": report.best_scheme,
            "best_psi": report.best_psi,
            "chains": report.chains,
            "precision_fallbacks": report.precision_fallbacks,
        }]

    def _oracle(self) -> List[Dict]:
        request = self.request
        result = exhaustive_search(
            request.n, request.m, request.params, request.criterion,
            budget=request.oracle_budget, workers=request.workers,
        )
        return [{
            **self._base(),
            "best_scheme": result.best_scheme,
            "best_psi": result.best_psi,
            "evaluated": result.evaluated,
        }]

    def _compare(self) -> List[Dict]:
        request = self.request
        if request.reference is not None:
            return self._compare_reference()
        result = exhaustive_search(
            request.n, request.m, request.params, request.criterion,
            budget=request.oracle_budget, workers=request.workers,
        )
        report = run_search(request.search_config())
        if request.trace is not None:
            write_trace(report, request.trace)
        return [{
            **self._base(),
            "proposal": request.proposal.value,
            "oracle_scheme": result.best_scheme,
            "oracle_psi": result.best_psi,
            "n_it": report.n_it,
            "n_ac": report.n_ac,
            "search_scheme": report.best_scheme,
            "search_psi": report.best_psi,
            "r_eff1": relative_efficiency(result.best_psi, report.best_psi),
            "seed": request.seed,
        }]

    def _compare_reference(self) -> List[Dict]:
        """Search against a fixed scheme where the oracle is out of reach"""
        request = self.request
        evaluator = CriterionEvaluator(request.params, request.criterion)
        reference_psi = evaluator(request.reference)
        report = run_search(request.search_config(), evaluator)
        if request.trace is not None:
            write_trace(report, request.trace)
        return [{
            **self._base(),
            "proposal": request.proposal.value,
            "reference_scheme": request.reference,
            "reference_psi": reference_psi,
            "n_it": report.n_it,
            "n_ac": report.n_ac,
            "search_scheme": report.best_scheme,
            "search_psi": report.best_psi,
            "r_eff": relative_efficiency(reference_psi, report.best_psi),
            "seed": request.seed,
        }]

    def _evaluate(self) -> List[Dict]:
        request = self.request
        evaluator = CriterionEvaluator(request.params, request.criterion)
        return [{**self._base(), "scheme": request.scheme, "psi": evaluator(request.scheme)}]

    def _validate(self) -> List[Dict]:
        request = self.request
        table = empirical_variance_check(
            request.scheme,
            request.params,
            request.s_grid,
            request.replications,
            np.random.default_rng(request.seed),
            workers=request.workers,
        )
        return table.to_dict(orient="records")

    def run(self) -> int:
        """Execute the request; returns the exit status"""
        handlers = {
            "search": self._search,
            "oracle": self._oracle,
            "compare": self._compare,
            "evaluate": self._evaluate,
            "validate": self._validate,
        }
        records = handlers[self.request.command]()
        schema = "reference" if self.request.reference is not None else None
        self.writer.write(self.request.command, records, self.stream, schema)
        return 0


def run(request: RunRequest, stream: Optional[TextIO] = None) -> int:
    """
    Run one request, converting library errors to exit codes

    Returns:
        0 on success, 1 on any CensearchError (budget refusals and
        excessive MLE non-convergence included), 130 on interrupt
    """
    try:
        return CensoringSearchApp(request, stream).run()
    except KeyboardInterrupt:
        logger.info("Received interrupt signal")
        return 130
    except CensearchError as e:
        logger.error(f"{request.command} failed: {e}")
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    request, print_config, log_level = parse_request(argv)

    if log_level:
        set_level(log_level)
    if not validate_config():
        logger.error("Configuration validation failed!")
        return 1

    if print_config:
        for key, value in request.settings().items():
            print(f"{key}={value}")
        return 0

    return run(request)


if __name__ == "__main__":
    sys.exit(main())
