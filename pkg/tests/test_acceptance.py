"""Acceptance suite: every shipped guarantee at its stated tolerance.

Each test prints one PASS line on success (run with -s to see them);
tolerances are pinned here and nowhere else.
"""

import itertools
import json
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from graphsum.cli import main
from graphsum.rouge import rouge_l, rouge_n, truncate_bytes
from graphsum.selection import (
    Partition,
    SelectionConfig,
    borda_fuse,
    greedy_select,
    lazy_greedy_select,
    objective,
)
from graphsum.similarity import (
    build_graph,
    text_semantic_similarity,
    wmd_distance,
)
from graphsum.similarity import SimilarityGraph

FIXTURES = Path(__file__).parent / "fixtures"
PASS = "ACCEPTANCE {}: PASS"


def random_graph(rng, n):
    w = rng.uniform(0, 1, (n, n))
    w = np.triu(w, 1)
    w = w + w.T
    np.fill_diagonal(w, 1.0)
    return SimilarityGraph(w=w, meta="rand", k_nn=1)


def random_partition(rng, n, k):
    assignment = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    rng.shuffle(assignment)
    return Partition(assignment=assignment, k=k)


def set_value(ids, w, assignment, k, lam):
    """From-scratch evaluation of the objective for a subset (the oracle
    route: no incremental state)."""
    ids = list(ids)
    if not ids:
        return 0.0
    cov = w[:, ids].max(axis=1).sum()
    credit = w.mean(axis=0)
    div = 0.0
    for c in range(k):
        div += math.sqrt(sum(credit[j] for j in ids if assignment[j] == c))
    return float(cov + lam * div)


def test_greedy_bound_against_exhaustive_optimum():
    rng = np.random.default_rng(2024)
    bound = 1 - 1 / math.e
    start = time.monotonic()
    trials = 0
    while trials < 200:
        n = int(rng.integers(4, 13))
        budget = int(rng.integers(1, 5))
        lam = float(rng.choice([0.0, 1.0, 6.0]))
        k = int(rng.integers(1, min(n, 4) + 1))
        g = random_graph(rng, n)
        p = random_partition(rng, n, k)
        cfg = SelectionConfig(budget_mode="sentences", budget=budget, lam=lam,
                              k_partitions=k, seed=0, lazy=False)
        res = greedy_select(g, p, np.ones(n), cfg)
        greedy_val = set_value(res.selected, g.w, p.assignment, k, lam)
        opt = 0.0
        for size in range(1, budget + 1):
            for ids in itertools.combinations(range(n), size):
                opt = max(opt, set_value(ids, g.w, p.assignment, k, lam))
        assert greedy_val >= bound * opt - 1e-9, (
            f"greedy {greedy_val} < (1-1/e) * {opt} on n={n} budget={budget}")
        trials += 1
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"exhaustive comparison took {elapsed:.1f}s"
    print(PASS.format(f"greedy-bound ({trials} instances, {elapsed:.1f}s)"))


def test_lazy_equals_naive_and_saves_evaluations():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        n = int(rng.integers(2, 61))
        k = int(rng.integers(1, min(n, 6) + 1))
        g = random_graph(rng, n)
        p = random_partition(rng, n, k)
        mode = str(rng.choice(["sentences", "cost", "bytes"]))
        costs = rng.uniform(0.5, 3.0, n)
        byte_lens = rng.integers(20, 120, n).astype(float)
        budget = {"sentences": float(rng.integers(1, 8)),
                  "cost": float(rng.uniform(1, 8)),
                  "bytes": float(rng.integers(50, 400))}[mode]
        cfg = SelectionConfig(budget_mode=mode, budget=budget,
                              lam=float(rng.choice([0.0, 1.0, 6.0])),
                              k_partitions=k, seed=0, lazy=False)
        naive = greedy_select(g, p, costs, cfg, byte_lens)
        lazy = lazy_greedy_select(g, p, costs, cfg, byte_lens)
        assert naive.same_selection(lazy)

    fewer = 0
    n_big = 200
    for _ in range(20):
        g = random_graph(rng, n_big)
        p = random_partition(rng, n_big, 10)
        cfg = SelectionConfig(budget_mode="sentences", budget=10, lam=6.0,
                              k_partitions=10, seed=0, lazy=False)
        naive = greedy_select(g, p, np.ones(n_big), cfg)
        lazy = lazy_greedy_select(g, p, np.ones(n_big), cfg)
        assert naive.same_selection(lazy)
        if lazy.n_evaluations < naive.n_evaluations:
            fewer += 1
    assert fewer >= 18, f"lazy saved evaluations on only {fewer}/20 instances"
    print(PASS.format(f"lazy-equivalence (1000 instances; fewer evals on {fewer}/20 at n=200)"))


def test_monotonicity_and_submodularity_em5_triples():
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 100_000:
        n = int(rng.integers(3, 12))
        k = int(rng.integers(1, 5))
        g = random_graph(rng, n)
        p = random_partition(rng, n, min(k, n))
        lam = float(rng.choice([0.0, 1.0, 6.0]))
        for _ in range(400):
            perm = rng.permutation(n)
            a_size = int(rng.integers(0, n))
            b_size = int(rng.integers(a_size, n))
            a = perm[:a_size].tolist()
            b = perm[:b_size].tolist()
            rest = perm[b_size:].tolist()
            if not rest:
                continue
            s = rest[0]
            la = objective(a, g, p, lam)
            lb = objective(b, g, p, lam)
            assert la <= lb + 1e-9
            gain_a = objective(a + [s], g, p, lam) - la
            gain_b = objective(b + [s], g, p, lam) - lb
            assert gain_a >= gain_b - 1e-9
            checked += 1
    print(PASS.format(f"monotone-submodular ({checked} triples)"))


def brute_min_cost_matching(cost):
    n = cost.shape[0]
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(cost[k, perm[k]] for k in range(n)))
    return best / n


def test_transport_distance_against_matching_oracle():
    rng = np.random.default_rng(404)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(2, 9))
        vi = rng.normal(size=(n, d))
        vj = rng.normal(size=(n, d))
        uniform = np.full(n, 1.0 / n)
        got = wmd_distance((vi, uniform), (vj, uniform))
        cost = np.linalg.norm(vi[:, None, :] - vj[None, :, :], axis=2)
        want = brute_min_cost_matching(cost)
        assert abs(got - want) <= 1e-9, f"{got} vs {want}"

    def rand_nbow():
        kk = int(rng.integers(1, 5))
        vecs = rng.normal(size=(kk, 4))
        w = rng.uniform(0.1, 1.0, kk)
        return vecs, w / w.sum()

    for _ in range(1000):
        a, b, c = rand_nbow(), rand_nbow(), rand_nbow()
        dab = wmd_distance(a, b)
        assert dab == wmd_distance(b, a)  # symmetry exact
        assert wmd_distance(a, a) == 0.0  # identity exact
        assert dab <= wmd_distance(a, c) + wmd_distance(c, b) + 1e-7
    print(PASS.format("transport-oracle (100 matchings, 1000 metric triples)"))


def oracle_eq2(vi, vj):
    def cos(a, b):
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(x * x for x in b))
        if na == 0 or nb == 0:
            return 0.0
        return min(max(sum(x * y for x, y in zip(a, b)) / (na * nb), 0.0), 1.0)

    left = sum(max(cos(w, u) for u in vj) for w in vi) / (2 * len(vi))
    right = sum(max(cos(w, u) for u in vi) for w in vj) / (2 * len(vj))
    return left + right


def test_text_semantic_similarity_contract():
    rng = np.random.default_rng(55)
    for _ in range(200):
        m = rng.normal(size=(int(rng.integers(1, 8)), 5))
        assert text_semantic_similarity(m, m) == 1.0
    count = 0
    for _ in range(10_000):
        vi = rng.normal(size=(int(rng.integers(1, 6)), 4))
        vj = rng.normal(size=(int(rng.integers(1, 6)), 4))
        r = text_semantic_similarity(vi, vj)
        assert 0.0 <= r <= 1.0
        assert r == text_semantic_similarity(vj, vi)
        count += 1
    for _ in range(50):
        vi = rng.normal(size=(int(rng.integers(1, 7)), 4))
        vj = rng.normal(size=(int(rng.integers(1, 7)), 4))
        assert abs(text_semantic_similarity(vi, vj) - oracle_eq2(vi, vj)) <= 1e-12
    print(PASS.format(f"text-similarity ({count} pairs, 50 oracle fixtures)"))


def test_kernel_scale_invariance():
    rng = np.random.default_rng(99)
    for _ in range(10):
        n = int(rng.integers(5, 51))
        d = rng.uniform(0, 5, (n, n))
        d = np.triu(d, 1)
        d = d + d.T
        k = int(rng.integers(1, n))
        base = build_graph(d, k)
        for c in (0.1, 3.0, 100.0):
            scaled = build_graph(c * d, k)
            assert np.max(np.abs(scaled.w - base.w)) <= 1e-12
    print(PASS.format("kernel-scale-invariance (10 matrices x {0.1, 3, 100})"))


ROUGE_FIXTURES = [
    # (fn, candidate, references, kwargs, p, r, f)
    ("r1", "the cat sat", ["the cat"], {}, 2 / 3, 1.0, 0.8),
    ("r1", "a b c", ["a b c"], {}, 1.0, 1.0, 1.0),
    ("r1", "aa bb", ["cc dd"], {}, 0.0, 0.0, 0.0),
    ("r1", "a a a b", ["a b b"], {}, 0.5, 2 / 3, 4 / 7),
    ("r1", "the cat sat", ["the dog", "the cat"], {}, 2 / 3, 1.0, 0.8),
    ("r1", "", ["the cat"], {}, 0.0, 0.0, 0.0),
    ("r1", "the cat sat on the mat", ["the cat sat"], {"byte_limit": 7}, 1.0, 2 / 3, 0.8),
    ("r2", "the cat sat", ["the cat"], {}, 0.5, 1.0, 2 / 3),
    ("r2", "a b c", ["a b c"], {}, 1.0, 1.0, 1.0),
    ("rl", "a b c d", ["a c"], {}, 0.5, 1.0, 2 / 3),
    ("rl", "x y z", ["x y z"], {}, 1.0, 1.0, 1.0),
    ("rl", "b a", ["a b"], {}, 0.5, 0.5, 0.5),
]


def test_rouge_hand_fixtures_and_truncation():
    for metric, cand, refs, kwargs, p, r, f in ROUGE_FIXTURES:
        if metric == "rl":
            rep = rouge_l(cand, refs, stemming=False, **kwargs)
        else:
            rep = rouge_n(cand, refs, 1 if metric == "r1" else 2, stemming=False, **kwargs)
        assert abs(rep.precision - p) <= 1e-9, (metric, cand)
        assert abs(rep.recall - r) <= 1e-9, (metric, cand)
        assert abs(rep.f1 - f) <= 1e-9, (metric, cand)

    multilingual = ("Äußerst 漢字と仮名 mixed текст with émojis naïve façade — "
                    "統計的要約 and ελληνικά words. ") * 12
    raw = multilingual.encode("utf-8")
    assert len(raw) > 665
    for limit in [663, 664, 665, 666, 667]:
        prefix = truncate_bytes(multilingual, limit)
        assert len(prefix.encode("utf-8")) <= limit
        assert multilingual.startswith(prefix)
        nxt = multilingual[len(prefix)]
        assert len(prefix.encode("utf-8")) + len(nxt.encode("utf-8")) > limit
    print(PASS.format(f"rouge-fixtures ({len(ROUGE_FIXTURES)} cases + 665-byte truncation)"))


def test_borda_against_recount_oracle():
    rng = np.random.default_rng(11)
    cfg = SelectionConfig(budget_mode="sentences", budget=3, lam=6.0,
                          k_partitions=2, seed=0, lazy=True)
    for _ in range(100):
        n = int(rng.integers(2, 10))
        m = int(rng.integers(1, 6))
        rankings = [rng.permutation(n).tolist() for _ in range(m)]
        res = borda_fuse(rankings, np.ones(n), cfg)
        points = {s: 0 for s in range(n)}
        for rr in rankings:
            for pos, s in enumerate(rr):
                points[s] += n - 1 - pos
        want_order = sorted(range(n), key=lambda s: (-points[s], s))
        assert res.ranking == want_order
        assert res.selected == want_order[: min(3, n)]
        shuffled = [rankings[i] for i in rng.permutation(m)]
        again = borda_fuse(shuffled, np.ones(n), cfg)
        assert again.ranking == res.ranking  # permutation invariance
    unanimous = borda_fuse([[3, 1, 0, 2]] * 4, np.ones(4), cfg)
    assert unanimous.selected == [3, 1, 0]
    print(PASS.format("borda-oracle (100 ranking sets)"))


def test_end_to_end_determinism_and_budget(tmp_path):
    args_base = [
        "summarize",
        "--input", str(FIXTURES / "mini_cluster.json"),
        "--fusion", "graph",
        "--embeddings", str(FIXTURES / "toy_vectors.txt"),
        "--contextual", str(FIXTURES / "toy_contextual.jsonl"),
        "--budget-bytes", "665",
        "--seed", "1",
    ]
    outs = []
    for i in (1, 2):
        out = tmp_path / f"run{i}" / "summary.txt"
        rc = main(args_base + ["--output", str(out)])
        assert rc == 0
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    rep1 = outs[0].with_name("summary.report.json").read_bytes()
    rep2 = outs[1].with_name("summary.report.json").read_bytes()
    assert rep1 == rep2

    report = json.loads(rep1)
    emitted = outs[0].read_text("utf-8").splitlines()
    total = sum(len(ln.encode("utf-8")) for ln in emitted)
    assert total <= 665
    assert report["budget"]["used"] == total

    # pipeline determinism across --jobs
    data = tmp_path / "dataset"
    data.mkdir()
    shutil.copy(FIXTURES / "mini_cluster.json", data / "storm01.json")
    other = json.loads((FIXTURES / "mini_cluster.json").read_text("utf-8"))
    other["cluster_id"] = "storm02"
    other["documents"] = other["documents"][:2]
    (data / "storm02.json").write_text(json.dumps(other), "utf-8")
    reports = []
    for jobs in ("1", "4", "1"):
        out = tmp_path / f"pipe{len(reports)}.json"
        rc = main([
            "pipeline", "--input", str(data), "--output", str(out),
            "--embeddings", str(FIXTURES / "toy_vectors.txt"),
            "--feature", "tfidf", "--feature", "tss", "--fusion", "late",
            "--jobs", jobs, "--seed", "1",
        ])
        assert rc == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1] == reports[2]
    print(PASS.format("end-to-end-determinism (byte-identical across runs and --jobs)"))
