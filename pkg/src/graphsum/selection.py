"""Budgeted submodular sentence selection.

The objective L(A) = H(A) + lambda * Q(A) combines a weighted coverage
term H(A) = sum_i max_{j in A} w[i][j] with a diversity term
Q(A) = sum_k sqrt(sum_{j in A and P_k} credit_j), where credit_j is the
average similarity of sentence j to the whole unit. Both terms are
monotone and submodular, so cost-scaled greedy carries the classic
(1 - 1/e) guarantee and admits the lazy (max-heap) acceleration, which
produces bit-identical selections.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import TaskUnit
from .errors import FormatError
from .features import SentenceFeatures
from .similarity import SimilarityGraph

BUDGET_MODES = ("bytes", "sentences", "cost")


@dataclass(frozen=True)
class SelectionConfig:
    """Knobs for one selection run."""

    budget_mode: str = "sentences"
    budget: float = 3.0
    lam: float = 6.0
    k_partitions: int = 2
    seed: int = 0
    lazy: bool = True

    def __post_init__(self):
        if self.budget_mode not in BUDGET_MODES:
            raise FormatError(f"unknown budget mode {self.budget_mode!r}")
        if self.budget <= 0:
            raise FormatError("budget must be positive")
        if self.k_partitions < 1:
            raise FormatError("k_partitions must be >= 1")
        if self.lam < 0:
            raise FormatError("lambda must be nonnegative")


@dataclass(frozen=True)
class Partition:
    """Cluster assignment over the sentence universe."""

    assignment: np.ndarray  # (n,) ints in [0, k)
    k: int

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise FormatError("partition assignment out of range")


@dataclass(frozen=True)
class TraceStep:
    sent_id: int
    gain: float  # cost-scaled marginal gain at acceptance time
    objective: float  # objective value after accepting this sentence


@dataclass
class SelectionResult:
    selected: list[int]
    objective_trace: list[TraceStep]
    budget_used: float
    config: SelectionConfig
    ranking: list[int] = field(default_factory=list)
    n_evaluations: int = 0

    def same_selection(self, other: "SelectionResult") -> bool:
        """Equality of everything that defines the selection (evaluation
        counts excluded: they differ between naive and lazy greedy)."""
        return (
            self.selected == other.selected
            and self.objective_trace == other.objective_trace
            and self.budget_used == other.budget_used
            and self.ranking == other.ranking
        )


def sentence_cost(position_m: int, n: int) -> float:
    """Positional cost c(s) = n / (n - m + 1) for 1-based position m."""
    if not 1 <= position_m <= n:
        raise FormatError(f"position {position_m} out of range [1, {n}]")
    return n / (n - position_m + 1)


def unit_costs(unit: TaskUnit) -> np.ndarray:
    return np.array([sentence_cost(s.position_m, unit.n) for s in unit.sentences])


def unit_byte_lens(unit: TaskUnit) -> np.ndarray:
    return np.array([s.byte_len for s in unit.sentences], dtype=np.float64)


def _weights(g) -> np.ndarray:
    return g.w if isinstance(g, SimilarityGraph) else np.asarray(g, dtype=np.float64)


def coverage(selected, g) -> float:
    """H(A): every sentence's best similarity to the selection, summed."""
    ids = list(selected)
    if not ids:
        return 0.0
    w = _weights(g)
    return float(w[:, ids].max(axis=1).sum())


def diversity(selected, g, partition: Partition) -> float:
    """Q(A): per-cluster square root of the selected members' summed
    average-similarity credits."""
    ids = list(selected)
    if not ids:
        return 0.0
    w = _weights(g)
    credit = w.mean(axis=0)
    sums = np.zeros(partition.k)
    for s in ids:
        sums[partition.assignment[s]] += credit[s]
    return float(np.sqrt(sums).sum())


def objective(selected, g, partition: Partition, lam: float) -> float:
    return coverage(selected, g) + lam * diversity(selected, g, partition)


def default_partition_count(n: int) -> int:
    return min(n, max(2, n // 5))


def partition_sentences(features: list[SentenceFeatures], k: int, seed: int) -> Partition:
    """K-means over the (already cosine-normalized) tf-idf vectors.

    Deterministic: farthest-point initialization seeded by ``seed``,
    assignment ties to the lower cluster id, empty clusters repaired by
    moving the farthest member out of the largest cluster.
    """
    n = len(features)
    if not 1 <= k <= n:
        raise FormatError(f"k_partitions={k} out of range [1, {n}]")
    if k == 1:
        return Partition(assignment=np.zeros(n, dtype=np.int64), k=1)

    vocab = sorted({t for f in features for t in f.tfidf.entries})
    col = {t: i for i, t in enumerate(vocab)}
    x = np.zeros((n, len(vocab)))
    for i, f in enumerate(features):
        for t, v in f.tfidf.entries.items():
            x[i, col[t]] = v

    rng = np.random.default_rng(seed)
    centers = [int(rng.integers(n))]
    mindist = ((x - x[centers[0]]) ** 2).sum(axis=1)
    mindist[centers[0]] = -1.0  # chosen points never re-picked
    while len(centers) < k:
        nxt = int(np.argmax(mindist))
        centers.append(nxt)
        d2 = ((x - x[nxt]) ** 2).sum(axis=1)
        mindist = np.minimum(mindist, d2)
        mindist[nxt] = -1.0

    c = x[centers].copy()
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(100):
        d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1).astype(np.int64)
        new_assign = _repair_empty(new_assign, x, c, k)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = assign == j
            if members.any():
                c[j] = x[members].mean(axis=0)
    return Partition(assignment=assign, k=k)


def _repair_empty(assign: np.ndarray, x: np.ndarray, c: np.ndarray, k: int) -> np.ndarray:
    assign = assign.copy()
    counts = np.bincount(assign, minlength=k)
    while (counts == 0).any():
        empty = int(np.argmin(counts))
        largest = int(np.argmax(counts))
        members = np.flatnonzero(assign == largest)
        d2 = ((x[members] - c[largest]) ** 2).sum(axis=1)
        move = members[int(np.argmax(d2))]
        assign[move] = empty
        counts[largest] -= 1
        counts[empty] += 1
    return assign


class _ObjectiveState:
    """Incremental evaluator shared by naive and lazy greedy, so both
    produce identical floating-point gains and objective values."""

    def __init__(self, w: np.ndarray, partition: Partition, lam: float):
        self.w = w
        self.lam = lam
        self.assign = partition.assignment
        self.credit = w.mean(axis=0)
        self.maxcov = np.zeros(w.shape[0])
        self.cluster_sum = np.zeros(partition.k)
        self.value = 0.0

    def gain(self, s: int) -> float:
        cov = float(np.maximum(self.w[:, s] - self.maxcov, 0.0).sum())
        kk = self.assign[s]
        div = math.sqrt(self.cluster_sum[kk] + self.credit[s]) - math.sqrt(self.cluster_sum[kk])
        return cov + self.lam * div

    def accept(self, s: int, raw_gain: float) -> None:
        np.maximum(self.maxcov, self.w[:, s], out=self.maxcov)
        self.cluster_sum[self.assign[s]] += self.credit[s]
        self.value += raw_gain


def _budget_fns(config: SelectionConfig, costs: np.ndarray, byte_lens: np.ndarray | None):
    """Returns (fits, increment): candidate feasibility given current use,
    and the budget increment a sentence consumes."""
    mode, b = config.budget_mode, config.budget
    if mode == "bytes":
        if byte_lens is None:
            raise FormatError("bytes budget requires sentence byte lengths")
        return (
            lambda s, used, count: used + byte_lens[s] <= b,
            lambda s: float(byte_lens[s]),
        )
    if mode == "sentences":
        return (lambda s, used, count: count + 1 <= b, lambda s: 1.0)
    return (lambda s, used, count: used + costs[s] <= b, lambda s: float(costs[s]))


def _validate_inputs(g, partition: Partition, costs: np.ndarray) -> np.ndarray:
    w = _weights(g)
    n = w.shape[0]
    if len(partition.assignment) != n or len(costs) != n:
        raise FormatError("graph, partition and costs must cover the same sentences")
    return w


def _residual_ranking(state: _ObjectiveState, selected: list[int], costs: np.ndarray, n: int) -> list[int]:
    """Selection order extended over unselected sentences by descending
    final-round cost-scaled gain, ties to the lower sent_id."""
    chosen = set(selected)
    rest = [s for s in range(n) if s not in chosen]
    scored = [(-(state.gain(s) / costs[s]), s) for s in rest]
    scored.sort()
    return list(selected) + [s for _, s in scored]


def greedy_select(
    g,
    partition: Partition,
    costs: np.ndarray,
    config: SelectionConfig,
    byte_lens: np.ndarray | None = None,
) -> SelectionResult:
    """Cost-scaled greedy: each round adds the feasible sentence with the
    highest marginal gain divided by its positional cost, ties to the
    lower sent_id; stops when nothing fits or the best gain is <= 0."""
    w = _validate_inputs(g, partition, costs)
    n = w.shape[0]
    state = _ObjectiveState(w, partition, config.lam)
    fits, increment = _budget_fns(config, costs, byte_lens)

    selected: list[int] = []
    trace: list[TraceStep] = []
    used = 0.0
    evals = 0
    remaining = list(range(n))
    while True:
        best_s = -1
        best_scaled = -1.0
        best_raw = 0.0
        for s in remaining:
            if not fits(s, used, len(selected)):
                continue
            raw = state.gain(s)
            evals += 1
            scaled = raw / costs[s]
            if best_s < 0 or scaled > best_scaled:
                best_s, best_scaled, best_raw = s, scaled, raw
        if best_s < 0 or best_scaled <= 0.0:
            break
        state.accept(best_s, best_raw)
        selected.append(best_s)
        remaining.remove(best_s)
        used += increment(best_s)
        trace.append(TraceStep(best_s, best_scaled, state.value))

    return SelectionResult(
        selected=selected,
        objective_trace=trace,
        budget_used=used,
        config=config,
        ranking=_residual_ranking(state, selected, costs, n),
        n_evaluations=evals,
    )


def lazy_greedy_select(
    g,
    partition: Partition,
    costs: np.ndarray,
    config: SelectionConfig,
    byte_lens: np.ndarray | None = None,
) -> SelectionResult:
    """CELF acceleration of :func:`greedy_select`.

    A max-heap holds stale upper bounds on each candidate's cost-scaled
    gain (valid because gains only shrink as the selection grows). A
    popped stale entry is re-evaluated and re-inserted; a popped fresh
    entry is accepted when its gain beats the heap's next key, ties to
    the lower sent_id. Selections are identical to naive greedy; only
    the number of gain evaluations differs.
    """
    w = _validate_inputs(g, partition, costs)
    n = w.shape[0]
    state = _ObjectiveState(w, partition, config.lam)
    fits, increment = _budget_fns(config, costs, byte_lens)

    selected: list[int] = []
    trace: list[TraceStep] = []
    used = 0.0
    evals = 0

    heap: list[tuple[float, int]] = []
    eval_at: dict[int, int] = {}
    raw_cache: dict[int, float] = {}
    for s in range(n):
        if not fits(s, used, 0):
            continue
        raw = state.gain(s)
        evals += 1
        eval_at[s] = 0
        raw_cache[s] = raw
        heap.append((-(raw / costs[s]), s))
    heapq.heapify(heap)

    while heap:
        neg_scaled, s = heapq.heappop(heap)
        if not fits(s, used, len(selected)):
            continue  # budgets only tighten: discard permanently
        if eval_at[s] < len(selected):
            raw = state.gain(s)
            evals += 1
            eval_at[s] = len(selected)
            raw_cache[s] = raw
            heapq.heappush(heap, (-(raw / costs[s]), s))
            continue
        if heap and (neg_scaled, s) > heap[0]:
            heapq.heappush(heap, (neg_scaled, s))
            continue
        scaled = -neg_scaled
        if scaled <= 0.0:
            break
        state.accept(s, raw_cache[s])
        selected.append(s)
        used += increment(s)
        trace.append(TraceStep(s, scaled, state.value))

    return SelectionResult(
        selected=selected,
        objective_trace=trace,
        budget_used=used,
        config=config,
        ranking=_residual_ranking(state, selected, costs, n),
        n_evaluations=evals,
    )


def borda_fuse(
    rankings: list[list[int]],
    costs: np.ndarray,
    config: SelectionConfig,
    byte_lens: np.ndarray | None = None,
) -> SelectionResult:
    """Borda-count fusion of per-feature rankings.

    Each ranking awards n-1, n-2, ..., 0 points from first to last; the
    summary greedily takes the highest-point sentences that fit the
    budget, ties to the lower sent_id.
    """
    n = len(costs)
    universe = list(range(n))
    for r in rankings:
        if sorted(r) != universe:
            raise FormatError("each ranking must be a total order over the same sentences")
    points = np.zeros(n, dtype=np.int64)
    for r in rankings:
        for pos, s in enumerate(r):
            points[s] += n - 1 - pos

    order = sorted(universe, key=lambda s: (-points[s], s))
    fits, increment = _budget_fns(config, costs, byte_lens)
    selected: list[int] = []
    trace: list[TraceStep] = []
    used = 0.0
    total = 0.0
    for s in order:
        if not fits(s, used, len(selected)):
            continue
        selected.append(s)
        used += increment(s)
        total += float(points[s])
        trace.append(TraceStep(s, float(points[s]), total))

    return SelectionResult(
        selected=selected,
        objective_trace=trace,
        budget_used=used,
        config=config,
        ranking=order,
        n_evaluations=0,
    )
