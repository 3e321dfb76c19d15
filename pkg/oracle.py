"""
Exhaustive search over CS(n, m)
Ground-truth optima for small n and m
"""
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional, Tuple

from config import ORACLE_BUDGET
from errors import BudgetExceeded
from scheme import Scheme, cardinality, chunk_bounds, enumerate_schemes
from utils.logger import setup_logger
from weibull import CriterionEvaluator, CriterionSpec, WeibullParams

logger = setup_logger(__name__, "oracle.log")


@dataclass(frozen=True)
class OracleResult:
    """Global minimiser R*, psi(R*) and the number of schemes evaluated"""
    best_scheme: Scheme
    best_psi: float
    evaluated: int
    precision_fallbacks: int = 0


def _best_in_chunk(
    task: Tuple[int, int, WeibullParams, CriterionSpec, int, int]
) -> Tuple[float, Tuple[int, ...], int, int]:
    """Minimum over one lexicographic rank window; first (smallest) scheme wins ties"""
    n, m, params, criterion, start, stop = task
    evaluator = CriterionEvaluator(params, criterion)
    best_psi = None
    best_r = None
    evaluated = 0

    for scheme in enumerate_schemes(n, m, start, stop):
        psi = evaluator(scheme)
        evaluated += 1
        if best_psi is None or psi < best_psi:
            best_psi, best_r = psi, scheme.r

    logger.debug(f"Chunk [{start}, {stop}): best {best_r} psi={best_psi:.6f}")
    return best_psi, best_r, evaluated, evaluator.precision_fallbacks


def exhaustive_search(
    n: int,
    m: int,
    params: WeibullParams,
    criterion: CriterionSpec,
    budget: Optional[int] = None,
    workers: int = 1
) -> OracleResult:
    """
    Evaluate psi on every scheme of CS(n, m) and return the global minimiser

    Args:
        n: Units on test
        m: Observed failures
        params: Weibull parameters
        criterion: Criterion to minimise
        budget: Largest cardinality accepted (default ORACLE_BUDGET)
        workers: Worker processes; 1 runs serially in this process

    Raises:
        BudgetExceeded: |CS(n, m)| is larger than the budget
    """
    budget = ORACLE_BUDGET if budget is None else budget
    total = cardinality(n, m)
    if total > budget:
        logger.error(f"Refusing exhaustive search over {total} schemes (budget {budget})")
        raise BudgetExceeded(total, budget)

    logger.info(
        f"Exhaustive search: (n, m)=({n}, {m}), |CS|={total}, beta={params.beta:g}, "
        f"k={params.k:g}, criterion={criterion}, workers={workers}"
    )

    tasks = [(n, m, params, criterion, start, stop) for start, stop in chunk_bounds(total, workers)]
    if len(tasks) == 1:
        results = [_best_in_chunk(tasks[0])]
    else:
        with Pool(processes=len(tasks)) as pool:
            results = pool.map(_best_in_chunk, tasks)

    # Reduce by (psi, scheme): equal psi resolves to the lexicographically smallest scheme
    best_psi, best_r, _, _ = min(results, key=lambda res: (res[0], res[1]))
    evaluated = sum(res[2] for res in results)
    fallbacks = sum(res[3] for res in results)

    result = OracleResult(
        best_scheme=Scheme(n, m, best_r),
        best_psi=best_psi,
        evaluated=evaluated,
        precision_fallbacks=fallbacks,
    )
    logger.info(f"Exhaustive optimum {result.best_scheme.display()} psi={best_psi:.6f}")
    return result
