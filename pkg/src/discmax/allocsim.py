"""Monte Carlo and exact oracles for balls-in-boxes allocation models.

Two allocation laws are covered: the uniform multinomial (each of k balls
lands in one of n boxes independently) and its Bayesian variant, the
symmetric Dirichlet mixture of multinomials.  Both admit a conditional
representation by i.i.d. counts given their sum (Poisson for the
multinomial, negative binomial for the Dirichlet mixture), which is what
``enumerate_conditional`` verifies exactly on small instances and what
``simulate``/``merging_report`` check statistically at scale.

Reproducibility: each trial draws from its own stream derived from
(seed, trial_index) via a spawn key, and all aggregation is commutative,
so results are bit-identical for a given spec regardless of execution
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .extremes import ExtremalProfile, tie_distribution, tie_phase_threshold
from .tailmodel import NegativeBinomialModel, PoissonModel

KINDS = ("multinomial", "dirichlet")

ENUMERATION_MAX_BOXES = 6
ENUMERATION_MAX_BALLS = 12

DEFAULT_MEMORY_BUDGET = 2_000_000_000


class MemoryBudgetError(RuntimeError):
    """n_boxes * trials exceeds the configured element budget."""


@dataclass(frozen=True)
class AllocationSpec:
    n_boxes: int
    n_balls: int
    kind: str
    trials: int
    seed: int
    r: float | None = None

    def __post_init__(self) -> None:
        if self.n_boxes < 1:
            raise ValueError(f"n_boxes must be >= 1, got {self.n_boxes}")
        if self.n_balls < 0:
            raise ValueError(f"n_balls must be >= 0, got {self.n_balls}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "dirichlet":
            if self.r is None or self.r <= 0.0:
                raise ValueError("dirichlet allocations need a positive hyperparameter r")


@dataclass(frozen=True)
class AllocationSummary:
    """Aggregates over trials; histogram values are raw trial counts.

    tie count = (number of boxes achieving the maximum) - 1.
    ge_anchor_histogram tallies how many boxes hold at least m_n balls,
    which feeds the tie phase-transition rows of the merging report.
    """

    max_histogram: dict
    tie_histogram: dict
    cluster_freq: float
    mean_top_two_occupancy: float
    ge_anchor_histogram: dict
    trials: int


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def trial_counts(spec: AllocationSpec, trial: int) -> np.ndarray:
    """Box counts of one trial; deterministic in (spec.seed, trial).

    For the uniform multinomial the array covers only the occupied prefix
    of boxes (trailing empty boxes are dropped); Dirichlet trials return
    all n_boxes entries since every box carries its own weight.
    """
    rng = _trial_rng(spec.seed, trial)
    if spec.kind == "multinomial":
        if spec.n_balls == 0:
            return np.zeros(1, dtype=np.int64)
        draws = rng.integers(0, spec.n_boxes, size=spec.n_balls)
        return np.bincount(draws)
    weights = rng.gamma(spec.r, 1.0, size=spec.n_boxes)
    weights /= weights.sum()
    return rng.multinomial(spec.n_balls, weights)


def simulate(spec: AllocationSpec, prof: ExtremalProfile,
             memory_budget: int = DEFAULT_MEMORY_BUDGET) -> AllocationSummary:
    """Run spec.trials allocations and tally maxima, ties and occupancy."""
    if spec.n_boxes * spec.trials > memory_budget:
        raise MemoryBudgetError(
            f"n_boxes * trials = {spec.n_boxes * spec.trials} exceeds budget {memory_budget}")
    m = prof.m_n
    max_hist: dict = {}
    tie_hist: dict = {}
    ge_hist: dict = {}
    cluster = 0
    top_two_total = 0
    for t in range(spec.trials):
        counts = trial_counts(spec, t)
        occupied = int((counts > 0).sum())

        mx = int(counts.max()) if counts.size else 0
        if mx == 0:
            boxes_at_max = spec.n_boxes
        else:
            boxes_at_max = int((counts == mx).sum())
        ties = boxes_at_max - 1

        def boxes_with(value: int) -> int:
            if value < 0:
                return 0
            if value == 0:
                return spec.n_boxes - occupied
            return int((counts == value).sum())

        ge_anchor = spec.n_boxes if m <= 0 else int((counts >= m).sum())

        max_hist[mx] = max_hist.get(mx, 0) + 1
        tie_hist[ties] = tie_hist.get(ties, 0) + 1
        ge_hist[ge_anchor] = ge_hist.get(ge_anchor, 0) + 1
        if mx in (m, m + 1):
            cluster += 1
        top_two_total += boxes_with(m) + boxes_with(m + 1)

    return AllocationSummary(
        max_histogram=dict(sorted(max_hist.items())),
        tie_histogram=dict(sorted(tie_hist.items())),
        cluster_freq=cluster / spec.trials,
        mean_top_two_occupancy=top_two_total / spec.trials,
        ge_anchor_histogram=dict(sorted(ge_hist.items())),
        trials=spec.trials,
    )


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _rising_factorial(a: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for j in range(m):
        out *= a + j
    return out


def enumerate_conditional(n_boxes: int, n_balls: int, kind: str,
                          lam: float = 1.0, r: float = 1.0, p: float = 0.4) -> dict:
    """Exact law of the sorted box counts, by two independent routes.

    Returns {sorted_counts: (allocation_prob, conditioned_iid_prob)}.
    The allocation route evaluates the multinomial (or Dirichlet mixture)
    probability in exact rational arithmetic; the conditioning route
    evaluates products of i.i.d. pmf values (Poisson(lam), or NB(r, p))
    normalized by the total mass on the sum.  The two columns must agree:
    the mixing parameter (lam or p) cancels in the conditional law.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if n_boxes < 1 or n_boxes > ENUMERATION_MAX_BOXES:
        raise ValueError(f"enumeration supports 1..{ENUMERATION_MAX_BOXES} boxes, got {n_boxes}")
    if n_balls < 0 or n_balls > ENUMERATION_MAX_BALLS:
        raise ValueError(f"enumeration supports 0..{ENUMERATION_MAX_BALLS} balls, got {n_balls}")

    if kind == "multinomial":
        model = PoissonModel(lam)
    else:
        model = NegativeBinomialModel(r, p)
        r_frac = Fraction(r)

    fact = [math.factorial(i) for i in range(n_balls + 1)]
    alloc: dict = {}
    weight: dict = {}
    total_weight = 0.0
    for comp in _compositions(n_balls, n_boxes):
        key = tuple(sorted(comp, reverse=True))
        coeff = fact[n_balls]
        for c in comp:
            coeff //= fact[c]
        if kind == "multinomial":
            pr = Fraction(coeff, n_boxes ** n_balls)
        else:
            num = Fraction(coeff)
            for c in comp:
                num *= _rising_factorial(r_frac, c)
            pr = num / _rising_factorial(n_boxes * r_frac, n_balls)
        alloc[key] = alloc.get(key, Fraction(0)) + pr

        w = math.exp(math.fsum(model.log_pmf(c) for c in comp))
        weight[key] = weight.get(key, 0.0) + w
        total_weight += w

    return {key: (float(alloc[key]), weight[key] / total_weight) for key in sorted(alloc)}


def merging_report(spec: AllocationSpec, prof: ExtremalProfile,
                   t_max: int = 3, phase_cs: tuple = (0.5, 2.0),
                   summary: AllocationSummary | None = None) -> list:
    """Empirical-vs-theory comparison rows for a simulated allocation.

    Each row carries the empirical frequency, the limiting theoretical
    value, their absolute difference, and the binomial standard error
    sqrt(f(1-f)/trials) where a frequency is being estimated.
    """
    if summary is None:
        summary = simulate(spec, prof)
    trials = summary.trials
    m = prof.m_n

    def freq(hist: dict, value: int) -> float:
        return hist.get(value, 0) / trials

    def row(quantity: str, value, empirical: float, theory: float | None) -> dict:
        se = math.sqrt(max(empirical * (1.0 - empirical), 0.0) / trials)
        out = {"quantity": quantity, "value": value, "empirical": empirical,
               "theory": theory, "abs_error": None, "stderr": se}
        if theory is not None:
            out["abs_error"] = abs(empirical - theory)
        return out

    rows = [
        row("max_eq_anchor", m, freq(summary.max_histogram, m), prof.p_n),
        row("max_eq_anchor_plus_1", m + 1, freq(summary.max_histogram, m + 1), 1.0 - prof.p_n),
        row("max_in_cluster", (m, m + 1), summary.cluster_freq, None),
    ]

    ties = tie_distribution(prof, t_max) if prof.gamma == 0.0 else None
    for t in range(t_max + 1):
        theory = ties.exactly[t] if ties is not None else None
        rows.append(row(f"ties_eq_{t}", t, freq(summary.tie_histogram, t), theory))

    # expected number of boxes holding m or m+1 balls, from the matched model
    matched = _matched_model(spec)
    occ_theory = spec.n_boxes * (
        math.exp(matched.log_pmf(m)) + math.exp(matched.log_pmf(m + 1))) if m >= 0 else None
    occ = {"quantity": "top_two_occupancy", "value": (m, m + 1),
           "empirical": summary.mean_top_two_occupancy, "theory": occ_theory,
           "abs_error": abs(summary.mean_top_two_occupancy - occ_theory)
           if occ_theory is not None else None,
           "stderr": None}
    rows.append(occ)

    if prof.gamma == 0.0:
        for c in phase_cs:
            k = tie_phase_threshold(prof, c)
            hit = sum(cnt for j, cnt in summary.ge_anchor_histogram.items() if j >= k + 1)
            rows.append(row(f"depth_{k}_above_anchor_minus_1", k, hit / trials,
                            1.0 if c < 1.0 else 0.0))
    return rows


def _matched_model(spec: AllocationSpec):
    """The i.i.d. model whose conditional law is the allocation law."""
    lam = spec.n_balls / spec.n_boxes
    if spec.kind == "multinomial":
        return PoissonModel(lam)
    p = lam / (spec.r + lam)
    return NegativeBinomialModel(spec.r, p)
