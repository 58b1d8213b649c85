"""Exhaustive enumeration of binary designs."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from ..exceptions import TooManyDesigns
from .design import DesignVector
from .result import OEDResult

__all__ = ["brute_force", "MAX_BRUTE_FORCE_SENSORS"]

MAX_BRUTE_FORCE_SENSORS = 22


def evaluate_designs(utility, designs, workers: int = 1) -> list[float]:
    """Evaluate a pure utility over a design list, preserving order.

    With ``workers > 1`` evaluations run on a thread pool; because the
    utility is pure and results are collected by position, the output is
    identical for every worker count.
    """
    if workers <= 1:
        return [float(utility(d)) for d in designs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return [float(v) for v in pool.map(utility, designs)]


def brute_force(utility, n_s: int, workers: int = 1) -> OEDResult:
    """Evaluate all 2**n_s binary designs and return the maximizer.

    Designs are enumerated in index order, index i activating sensor j iff
    bit j of i is set; the full (index, utility) table is kept on the result
    for plotting and for use as an exact oracle. Ties break towards the
    lowest index.
    """
    if n_s < 1:
        raise ValueError("need at least one sensor")
    if n_s > MAX_BRUTE_FORCE_SENSORS:
        raise TooManyDesigns(
            f"{n_s} sensors means 2**{n_s} designs; the guard allows at most "
            f"{MAX_BRUTE_FORCE_SENSORS}"
        )
    designs = [DesignVector.from_index(i, n_s) for i in range(2**n_s)]
    values = evaluate_designs(utility, designs, workers)
    best = max(range(len(values)), key=lambda i: (values[i], -i))
    return OEDResult(
        optimal_design=designs[best],
        optimal_value=values[best],
        solver="brute-force",
        brute_force_table=list(enumerate(values)),
    )
