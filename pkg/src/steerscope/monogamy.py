"""Steering monogamy for three-qubit states.

Parties are Alice, Bob, Charlie = qubits 0, 1, 2. For each reduced pair the
CFFW maximum is taken independently (``2 sqrt(v + v_tilde)`` of that pair),
which can only overestimate what a shared choice of Alice's settings gives,
so ``s_ba_max**2 + s_ca_max**2 <= 8`` is the stronger statement checked here.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .matcore import partial_trace
from .states import EnsembleSpec, ThreeQubitState, TwoQubitState, decompose, sample_state, validate
from .steering import correlation_spectrum, steering_criterion

BOUND = 8.0
SATURATION_TOL = 1e-9
VIOLATION_TOL = 1e-9
THREADS_ENV = "STEERSCOPE_THREADS"

_KEEP = {"AB": (0, 1), "AC": (0, 2), "BC": (1, 2)}


@dataclass(frozen=True)
class MonogamyReport:
    s_ba_max: float
    s_ca_max: float
    lhs: float
    slack: float
    saturated: bool
    bound: float = BOUND


@dataclass(frozen=True, eq=False)
class ReducedCorrelations:
    t_ab: np.ndarray
    t_ac: np.ndarray


def _three_qubit(state) -> ThreeQubitState:
    if not isinstance(state, ThreeQubitState):
        raise TypeError(f"expected a ThreeQubitState, got {type(state).__name__}")
    return state


def reduced_pair(state: ThreeQubitState, pair: str) -> TwoQubitState:
    """Two-qubit marginal on ``pair`` (one of ``AB``, ``AC``, ``BC``)."""
    try:
        keep = _KEEP[pair.upper()]
    except KeyError:
        raise ValueError(f"unknown pair {pair!r}; expected AB, AC or BC") from None
    return validate(partial_trace(_three_qubit(state).matrix, 3, keep))


def reduced_correlations(state: ThreeQubitState) -> ReducedCorrelations:
    return ReducedCorrelations(
        decompose(reduced_pair(state, "AB")).T,
        decompose(reduced_pair(state, "AC")).T,
    )


def monogamy_check(state: ThreeQubitState) -> MonogamyReport:
    s_ba = steering_criterion(reduced_pair(state, "AB")).max_cffw
    s_ca = steering_criterion(reduced_pair(state, "AC")).max_cffw
    lhs = s_ba**2 + s_ca**2
    slack = BOUND - lhs
    return MonogamyReport(s_ba, s_ca, lhs, slack, abs(slack) <= SATURATION_TOL)


def trace_formula(state: ThreeQubitState, pair: str = "AB") -> tuple[float, float]:
    """``(2 sqrt(tr T T^t), 2 sqrt(v + v_tilde))`` for the reduced pair.

    The first uses all three eigenvalues of ``T T^t``, so it is never smaller
    than the second; they coincide when the smallest eigenvalue vanishes.
    """
    reduced = reduced_pair(state, pair)
    T = decompose(reduced).T
    w = correlation_spectrum(reduced)
    return 2.0 * math.sqrt(max(float(np.trace(T @ T.T)), 0.0)), 2.0 * math.sqrt(w[0] + w[1])


def state_digest(state) -> str:
    """SHA-256 of the little-endian complex128 matrix bytes."""
    return hashlib.sha256(np.ascontiguousarray(state.matrix, dtype="<c16").tobytes()).hexdigest()


@dataclass
class ScanSummary:
    samples: int
    max_lhs: float
    violations: int
    argmax_state_digest: str
    exclusivity_violations: int = 0
    reports: list[MonogamyReport] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_lhs": self.max_lhs,
            "violations": self.violations,
            "exclusivity_violations": self.exclusivity_violations,
            "argmax_state_digest": self.argmax_state_digest,
        }


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    return min(4, os.cpu_count() or 1)


def _evaluate(kind: str, seed: int, index: int) -> tuple[MonogamyReport, str]:
    state = sample_state(kind, seed, index)
    return monogamy_check(state), state_digest(state)


def monogamy_scan(spec: EnsembleSpec, threads: int | None = None, keep_reports: bool = False) -> ScanSummary:
    """Check the bound on every sample of a three-qubit ensemble.

    Samples are evaluated on a thread pool but reduced in index order, so the
    summary depends only on ``spec``. Ties for the maximum keep the lowest index.
    """
    if spec.n_qubits != 3:
        raise ValueError(f"monogamy scans need a three-qubit ensemble, got {spec.kind}")
    threads = default_threads() if threads is None else max(1, threads)

    def work(k):
        return _evaluate(spec.kind, spec.seed, k)

    if threads == 1:
        results = map(work, range(spec.count))
    else:
        pool = ThreadPoolExecutor(max_workers=threads)
        results = pool.map(work, range(spec.count))

    summary = ScanSummary(0, -math.inf, 0, "")
    try:
        for report, digest in results:
            summary.samples += 1
            if report.lhs > summary.max_lhs:
                summary.max_lhs, summary.argmax_state_digest = report.lhs, digest
            if report.lhs > BOUND + VIOLATION_TOL:
                summary.violations += 1
            if report.s_ba_max > 2.0 + VIOLATION_TOL and report.s_ca_max > 2.0 + VIOLATION_TOL:
                summary.exclusivity_violations += 1
            if keep_reports:
                summary.reports.append(report)
    finally:
        if threads != 1:
            pool.shutdown()
    return summary
