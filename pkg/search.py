"""
Probabilistic accept/reject search for optimal censoring schemes
Candidates come from a proposal distribution and are accepted with
min{1, f(new) pi(old) / (f(old) pi(new))}, f = exp(-psi)
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from config import DEFAULT_ITERATIONS, DEFAULT_SEED
from errors import InvalidDensity, NonPositive
from proposals import ProposalKind, draw_m1, make_proposal
from scheme import Scheme
from utils.logger import setup_logger
from weibull import CriterionEvaluator, CriterionSpec, WeibullParams

logger = setup_logger(__name__, "search.log")


@dataclass(frozen=True)
class SearchConfig:
    """One search run; m1=None draws m1 uniformly from {1..m} at every step"""
    n: int
    m: int
    params: WeibullParams
    criterion: CriterionSpec = field(default_factory=CriterionSpec.variance)
    proposal: ProposalKind = ProposalKind.MULTINOMIAL
    iterations: int = DEFAULT_ITERATIONS
    seed: int = DEFAULT_SEED
    m1: Optional[int] = None
    trace: bool = False
    chains: int = 1
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "proposal", ProposalKind(self.proposal))
        if not 1 <= self.m <= self.n:
            raise ValueError(f"Need n >= m >= 1, got n={self.n}, m={self.m}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be at least 1, got {self.iterations}")
        if self.m1 is not None and not 1 <= self.m1 <= self.m:
            raise ValueError(f"m1 must lie in [1, m={self.m}], got {self.m1}")
        if self.chains < 1 or self.workers < 1:
            raise ValueError("chains and workers must be positive")


@dataclass(frozen=True)
class TraceEntry:
    """One proposal step"""
    iteration: int
    scheme: Scheme
    psi: float
    accepted: bool
    best_psi: float
    chain: int = 0

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "iteration": self.iteration,
            "scheme": str(self.scheme),
            "psi": float(f"{self.psi:.17g}"),
            "accepted": self.accepted,
            "best_psi": float(f"{self.best_psi:.17g}"),
        }


@dataclass
class SearchReport:
    """Outcome of a search: best scheme seen, n_it proposals and n_ac acceptances"""
    best_scheme: Scheme
    best_psi: float
    n_it: int
    n_ac: int
    seed: int
    trace: Optional[List[TraceEntry]] = None
    precision_fallbacks: int = 0
    evaluations: int = 0
    chains: int = 1


def acceptance_probability(
    psi_old: float,
    psi_new: float,
    log_dens_old: float,
    log_dens_new: float
) -> float:
    """
    min{1, exp[(psi_old - psi_new) + (log_dens_old - log_dens_new)]}

    Raises:
        InvalidDensity: the current state has zero proposal density
    """
    if log_dens_old == -math.inf:
        raise InvalidDensity("Current scheme has zero proposal density")
    if math.isnan(log_dens_old) or math.isnan(log_dens_new):
        raise InvalidDensity("Proposal density is NaN")
    log_ratio = (psi_old - psi_new) + (log_dens_old - log_dens_new)
    if log_ratio >= 0:
        return 1.0
    return math.exp(log_ratio)


def relative_efficiency(psi_reference: float, psi_candidate: float) -> float:
    """psi at the reference optimum over psi at the candidate"""
    if not (psi_reference > 0 and psi_candidate > 0):
        raise NonPositive(
            f"Relative efficiency needs positive values, got {psi_reference}, {psi_candidate}"
        )
    return psi_reference / psi_candidate


def _run_chain(
    config: SearchConfig,
    evaluator: CriterionEvaluator,
    seed_seq: np.random.SeedSequence,
    chain: int
) -> SearchReport:
    """Single-threaded chain with its own generator"""
    rng = np.random.default_rng(seed_seq)
    proposal = make_proposal(config.proposal, config.n, config.m, rng)

    current, log_dens_current = proposal.initial()
    psi_current = evaluator(current)
    best_scheme, best_psi = current, psi_current
    accepted_count = 0
    trace: Optional[List[TraceEntry]] = [] if config.trace else None

    for iteration in range(1, config.iterations + 1):
        m1 = config.m1 if config.m1 is not None else draw_m1(config.m, rng)
        candidate, log_dens_candidate = proposal.propose(current, m1)
        psi_candidate = evaluator(candidate)

        # Best is tracked over every evaluated candidate; ties keep the earliest
        if psi_candidate < best_psi:
            best_scheme, best_psi = candidate, psi_candidate

        alpha = acceptance_probability(
            psi_current, psi_candidate, log_dens_current, log_dens_candidate
        )
        accepted = alpha >= 1.0 or rng.random() < alpha
        if accepted:
            current, psi_current, log_dens_current = candidate, psi_candidate, log_dens_candidate
            accepted_count += 1

        if trace is not None:
            trace.append(TraceEntry(iteration, candidate, psi_candidate, accepted, best_psi, chain))

    logger.debug(
        f"Chain {chain}: best {best_scheme.display()} psi={best_psi:.6f}, "
        f"accepted {accepted_count}/{config.iterations}"
    )
    return SearchReport(
        best_scheme=best_scheme,
        best_psi=best_psi,
        n_it=config.iterations,
        n_ac=accepted_count,
        seed=config.seed,
        trace=trace,
    )


def run_search(
    config: SearchConfig,
    evaluator: Optional[CriterionEvaluator] = None
) -> SearchReport:
    """
    Run `config.chains` independent chains and keep the overall best

    Args:
        config: Search configuration
        evaluator: Shared memo cache; a fresh one is created when omitted

    Returns:
        Aggregate report; n_it and n_ac are summed over chains
    """
    # An empty evaluator is falsy
    if evaluator is None:
        evaluator = CriterionEvaluator(config.params, config.criterion)
    fallbacks_before = evaluator.precision_fallbacks
    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)

    logger.info(
        f"Search: (n, m)=({config.n}, {config.m}), beta={config.params.beta:g}, "
        f"k={config.params.k:g}, criterion={config.criterion}, proposal={config.proposal.value}, "
        f"iterations={config.iterations}, chains={config.chains}, seed={config.seed}"
    )

    if config.chains == 1 or config.workers == 1:
        reports = [_run_chain(config, evaluator, s, i) for i, s in enumerate(seeds)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix="chain") as pool:
            futures = [
                pool.submit(_run_chain, config, evaluator, s, i) for i, s in enumerate(seeds)
            ]
            reports = [f.result() for f in futures]

    # Lowest psi wins; equal values go to the lowest chain index
    best = min(reports, key=lambda r: r.best_psi)
    trace = None
    if config.trace:
        trace = [entry for r in reports for entry in r.trace]

    report = replace(
        best,
        n_it=sum(r.n_it for r in reports),
        n_ac=sum(r.n_ac for r in reports),
        trace=trace,
        precision_fallbacks=evaluator.precision_fallbacks - fallbacks_before,
        evaluations=len(evaluator),
        chains=config.chains,
    )

    logger.info(
        f"Search finished: best {report.best_scheme.display()} psi={report.best_psi:.6f}, "
        f"n_it={report.n_it}, n_ac={report.n_ac}"
    )
    return report


def write_trace(report: SearchReport, path: Path) -> int:
    """
    Write the trace as newline-delimited JSON records

    Returns:
        Number of records written
    """
    if report.trace is None:
        raise ValueError("Search ran without tracing")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for entry in report.trace:
            f.write(json.dumps(entry.to_dict()) + "\n")
    logger.debug(f"Wrote {len(report.trace)} trace records to {path}")
    return len(report.trace)
