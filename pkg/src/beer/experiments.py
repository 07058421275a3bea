"""Simulation studies: solution-count sweeps, error distributions, BEEP success rates.

Every record is a pure function of the configuration and its seed.  Per-task
seeds come from ``SeedSequence(seed, spawn_key=...)`` keyed by the task's
coordinates, so worker count and scheduling never change a result.
"""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import stats

from .beep import BeepChip, run_beep
from .code import EccCode, canonicalize, parity_bits_for, sample_random_code
from .profile import (
    DEFAULT_THRESHOLD,
    enumerate_test_patterns,
    exhaustive_profile,
    monte_carlo_profile,
    threshold_filter,
)
from .retention import RetentionErrorModel, TransientNoiseModel
from .solver import solve

SWEEP_FORMAT = "beer-sweep-v1"
FIG1_CHUNK = 1 << 20


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit seed for the task at coordinates ``key``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _pool_map(fn, tasks: list, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


@dataclass(frozen=True)
class SweepConfig:
    k_values: tuple[int, ...] = (4, 8, 11, 16)
    codes_per_k: int = 50
    weights: tuple[int, ...] = (1, 2)
    # error model parameters; meaning depends on the experiment
    error_params: tuple[float, ...] = (1.0,)
    trials: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.codes_per_k < 1 or self.trials < 1:
            raise ValueError("codes_per_k and trials must be >= 1")
        if not self.k_values:
            raise ValueError("k_values must not be empty")
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "weights", tuple(sorted(set(int(w) for w in self.weights))))
        object.__setattr__(self, "error_params", tuple(float(x) for x in self.error_params))


@dataclass
class SweepResult:
    experiment: str
    config: dict[str, Any]
    records: list[dict[str, Any]]
    summary: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": SWEEP_FORMAT,
            "experiment": self.experiment,
            "config": self.config,
            "records": self.records,
            "summary": self.summary,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.records:
            writer = csv.DictWriter(buf, fieldnames=list(self.records[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.records)
        return buf.getvalue()


# -- solution-count sweep ----------------------------------------------------

def _uniqueness_task(args) -> dict[str, Any]:
    k, i, code_seed, weights, max_solutions = args
    code = sample_random_code(k, code_seed)
    prof = exhaustive_profile(code, enumerate_test_patterns(k, weights))
    out = solve(prof, k, max_solutions)
    return {
        "k": k,
        "code_id": i,
        "code_seed": code_seed,
        "solutions": len(out.solutions),
        "exhausted": out.exhausted,
        "original_recovered": canonicalize(code) in out.solutions,
        "nodes": out.stats.nodes,
    }


def run_uniqueness_sweep(
    cfg: SweepConfig, *, max_solutions: int | None = 1000, jobs: int = 1
) -> SweepResult:
    """Sample codes, profile them exhaustively, and count matching codes.

    ``max_solutions`` caps the enumeration per code; a capped count has
    ``exhausted`` False and is a lower bound.
    """
    if not set(cfg.weights) <= {1, 2, 3}:
        raise ValueError("pattern weights must be a subset of {1, 2, 3}")
    tasks = [
        (k, i, derive_seed(cfg.seed, k, i), cfg.weights, max_solutions)
        for k in cfg.k_values
        for i in range(cfg.codes_per_k)
    ]
    records = _pool_map(_uniqueness_task, tasks, jobs)
    summary = []
    for k in cfg.k_values:
        counts = [r["solutions"] for r in records if r["k"] == k]
        summary.append({
            "k": k,
            "codes": len(counts),
            "min": min(counts),
            "median": statistics.median(counts),
            "max": max(counts),
            "unique_rate": sum(c == 1 for c in counts) / len(counts),
            "original_recovered_rate": sum(
                r["original_recovered"] for r in records if r["k"] == k
            ) / len(counts),
        })
    return SweepResult("uniqueness", asdict(cfg) | {"max_solutions": max_solutions}, records, summary)


# -- post-correction error distribution --------------------------------------

def _fill_dataword(k: int, byte: int) -> int:
    d = 0
    for j in range(k):
        d |= ((byte >> (j % 8)) & 1) << j
    return d


def _fig1_counts(args) -> list[int]:
    code, rber, words, byte, seed, code_index = args
    n, k = code.n, code.k
    counts = np.zeros(k, dtype=np.int64)
    if rber <= 0 or words <= 0:
        return counts.tolist()
    # Words with fewer than two raw errors decode cleanly, so only the
    # number of words with >= 2 errors and their error counts are drawn.
    p_multi = float(stats.binom.sf(1, n, rber))
    sizes = np.arange(2, n + 1)
    pmf = stats.binom.pmf(sizes, n, rber)
    pmf = pmf / pmf.sum()
    d = _fill_dataword(k, byte)
    c = code.encode_int(d)
    for chunk, first in enumerate(range(0, words, FIG1_CHUNK)):
        size = min(FIG1_CHUNK, words - first)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(code_index, chunk)))
        m = int(rng.binomial(size, p_multi))
        if m == 0:
            continue
        for e in rng.choice(sizes, size=m, p=pmf):
            flips = 0
            for i in rng.choice(n, size=int(e), replace=False):
                flips |= 1 << int(i)
            out, _, _ = code.decode_int(c ^ flips)
            diff = out ^ d
            while diff:
                low = diff & -diff
                counts[low.bit_length() - 1] += 1
                diff ^= low
    return counts.tolist()


def run_fig1_distribution(
    codes: Sequence[EccCode],
    rber: float,
    words: int,
    data_pattern: int = 0xFF,
    *,
    seed: int = 0,
    jobs: int = 1,
) -> np.ndarray:
    """Per-data-bit post-correction error counts, one row per code.

    Raw errors hit every codeword bit independently with probability
    ``rber``.  The written dataword repeats ``data_pattern`` byte-wise.
    Code ``i`` draws from its own random stream, so two codes given the
    same seed still see independent errors.
    """
    if not codes:
        return np.zeros((0, 0), dtype=np.int64)
    nk = {(c.n, c.k) for c in codes}
    if len(nk) != 1:
        raise ValueError(f"codes must share (n, k), got {sorted(nk)}")
    if not 0.0 <= rber <= 1.0:
        raise ValueError("rber must lie in [0, 1]")
    tasks = [(code, rber, words, data_pattern, seed, i) for i, code in enumerate(codes)]
    return np.array(_pool_map(_fig1_counts, tasks, jobs), dtype=np.int64)


def compare_distributions(a: Sequence[int], b: Sequence[int]) -> float:
    """Chi-square p-value for "both count vectors share one distribution".

    Bits with no errors in either vector carry no information and are
    dropped; with fewer than two informative bits the test cannot reject
    and 1.0 is returned.
    """
    table = np.array([a, b], dtype=np.int64)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2 or np.any(table.sum(axis=1) == 0):
        return 1.0
    return float(stats.chi2_contingency(table)[1])


def fig1_result(codes: Sequence[EccCode], counts: np.ndarray, rber: float, words: int,
                data_pattern: int, seed: int) -> SweepResult:
    records = [
        {"code_id": i, "bit": j, "errors": int(counts[i, j])}
        for i in range(len(codes))
        for j in range(counts.shape[1])
    ]
    summary = [
        {"code_a": i, "code_b": j, "p_value": compare_distributions(counts[i], counts[j])}
        for i in range(len(codes))
        for j in range(i + 1, len(codes))
    ]
    config = {"n": codes[0].n, "k": codes[0].k, "rber": rber, "words": words,
              "data_pattern": data_pattern, "seed": seed,
              "codes": [c.to_dict() for c in codes]}
    return SweepResult("fig1", config, records, summary)


# -- BEEP success rate -------------------------------------------------------

@dataclass(frozen=True)
class BeepCase:
    k: int
    errors: int
    probability: float = 1.0
    passes: int = 1


def _beep_trial(args) -> bool:
    case, trial, seed = args
    t_seed = derive_seed(seed, case.k, case.errors, trial)
    rng = np.random.default_rng(t_seed)
    code = sample_random_code(case.k, int(rng.integers(2**62)))
    mask = frozenset(int(i) for i in rng.choice(code.n, size=case.errors, replace=False))
    report = run_beep(code, BeepChip(mask, case.probability, seed=t_seed), case.passes)
    return report.suspected == mask


def run_beep_sweep(
    cases: Iterable[BeepCase], trials: int = 100, *, seed: int = 0, jobs: int = 1
) -> SweepResult:
    """Exact-recovery rate of BEEP against random hidden error masks.

    A trial's code, mask and chip seed depend on ``(k, errors, trial)`` only,
    so cases that differ in passes or probability are paired trial by trial.
    """
    cases = list(cases)
    tasks = [(c, t, seed) for c in cases for t in range(trials)]
    hits = _pool_map(_beep_trial, tasks, jobs)
    records = []
    for ci, case in enumerate(cases):
        ok = hits[ci * trials:(ci + 1) * trials]
        records.append({
            "k": case.k,
            "n": case.k + parity_bits_for(case.k),
            "errors": case.errors,
            "probability": case.probability,
            "passes": case.passes,
            "trials": trials,
            "successes": int(sum(ok)),
            "success_rate": sum(ok) / trials,
        })
    config = {"cases": [asdict(c) for c in cases], "trials": trials, "seed": seed}
    return SweepResult("beep", config, records)


# -- Monte-Carlo profile vs. oracle ------------------------------------------

def _mc_task(args) -> dict[str, Any]:
    k, i, code_seed, weights, probability, words, noise, threshold, seed = args
    code = sample_random_code(k, code_seed)
    pats = enumerate_test_patterns(k, weights)
    exact = exhaustive_profile(code, pats)
    model = RetentionErrorModel(probability, seed=derive_seed(seed, k, i, 1))
    obs = monte_carlo_profile(code, pats, None, model, words, TransientNoiseModel(noise))
    filtered = threshold_filter(obs, threshold)
    out = solve(filtered, k, 2)
    return {
        "k": k,
        "code_id": i,
        "code_seed": code_seed,
        "noise": noise,
        "profile_match": filtered == exact,
        "solutions": len(out.solutions),
        "unique_original": len(out.solutions) == 1 and out.solutions[0] == canonicalize(code),
    }


def run_noise_study(
    cfg: SweepConfig,
    *,
    probability: float = 0.5,
    words: int = 100_000,
    noise_levels: Sequence[float] = (0.0, 1e-4),
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> SweepResult:
    """Thresholded Monte-Carlo profiles against the exhaustive oracle.

    ``codes_per_k`` codes are drawn for each k; every code is simulated at
    each noise level and the filtered profile is also fed to the solver.
    """
    tasks = [
        (k, i, derive_seed(cfg.seed, k, i), cfg.weights, probability, words, noise, threshold,
         cfg.seed)
        for noise in noise_levels
        for k in cfg.k_values
        for i in range(cfg.codes_per_k)
    ]
    records = _pool_map(_mc_task, tasks, jobs)
    summary = []
    for noise in noise_levels:
        rows = [r for r in records if r["noise"] == noise]
        summary.append({
            "noise": noise,
            "codes": len(rows),
            "profile_matches": sum(r["profile_match"] for r in rows),
            "unique_original": sum(r["unique_original"] for r in rows),
        })
    config = asdict(cfg) | {"probability": probability, "words": words,
                            "noise_levels": list(noise_levels), "threshold": threshold}
    return SweepResult("noise", config, records, summary)
