"""Numba vs pure-numpy timings for the hot kernels and for whole searches.

    python3 benchmarks/bench_kernels.py [--docs 20000] [--repeat 5]

Numba compile time is paid once in a warm-up call and reported separately.
With CDSBENCH_DISABLE_NUMBA set only the numpy column is printed.
"""

import argparse
import random
import time
import timeit

import numpy as np

from cdsbench import _accel, kernels
from cdsbench.corpus_io import Document
from cdsbench.index import build_index
from cdsbench.ranking import BASELINE_WEIGHTS, FacetWeights, QueryRep, search
from cdsbench.textproc.analysis import analyze

VOCAB = ("sepsis fever cough pain chest heart infection lung blood pressure stroke brain insulin glucose "
         "kidney liver rash neck headache trauma fracture patient anemia asthma biopsy cancer").split()


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def _corpus(n_docs, seed=0):
    rng = random.Random(seed)
    words = VOCAB + [f"w{i}" for i in range(2000)]

    def text(k):
        return " ".join(rng.choice(words) for _ in range(k))

    return [Document(f"D{i:06d}", title=text(6), abstract_text=text(40), body=text(120)) for i in range(n_docs)]


def kernel_rows(n, repeat):
    rng = np.random.default_rng(0)
    ords = np.sort(rng.choice(n, size=n // 3, replace=False)).astype(np.int64)
    tfs = rng.integers(1, 8, size=ords.shape[0]).astype(np.int32)
    lens = rng.integers(20, 400, size=n).astype(np.float64)
    best = np.zeros(n)
    matrix = rng.normal(size=(n, 50))
    query = rng.normal(size=50)
    diffs = rng.normal(size=(5000, 9))
    w = rng.normal(size=9)

    cases = [
        ("dismax_update", kernels.dismax_update_numpy, kernels.dismax_update_numba,
         (best, ords, tfs, lens, float(lens.mean()), 2.1, 1.2, 0.75, 1.0)),
        ("cosine_scores", kernels.cosine_scores_numpy, kernels.cosine_scores_numba, (matrix, query)),
        ("pairwise_logistic", kernels.pairwise_logistic_numpy, kernels.pairwise_logistic_numba, (diffs, w)),
    ]
    rows = []
    for name, np_fn, nb_fn, args in cases:
        t_np = _best(lambda: np_fn(*args), repeat, 20)
        t_nb = compile_s = None
        if nb_fn is not None:
            start = time.perf_counter()
            nb_fn(*args)
            compile_s = time.perf_counter() - start
            t_nb = _best(lambda: nb_fn(*args), repeat, 20)
        rows.append((name, t_np, t_nb, compile_s))
    return rows


def search_rows(n_docs, repeat):
    index = build_index(_corpus(n_docs))
    rng = random.Random(1)
    queries = [QueryRep(tuple((analyze(rng.choice(VOCAB))[0], 1.0) for _ in range(8))) for _ in range(20)]
    multi = FacetWeights({"title": 1.5, "abstract": 1.0, "body": 0.5})

    def run_all(weights):
        for q in queries:
            search(index, q, weights)

    rows = []
    for label, weights in (("search (all)", BASELINE_WEIGHTS), ("search (3 facets)", multi)):
        saved = kernels.dismax_update
        try:
            kernels.dismax_update = kernels.dismax_update_numpy
            t_np = _best(lambda: run_all(weights), repeat, 1) / len(queries)
            t_nb = None
            if kernels.dismax_update_numba is not None:
                kernels.dismax_update = kernels.dismax_update_numba
                run_all(weights)
                t_nb = _best(lambda: run_all(weights), repeat, 1) / len(queries)
        finally:
            kernels.dismax_update = saved
        rows.append((label, t_np, t_nb, None))
    return rows


def _fmt(seconds):
    if seconds is None:
        return "-"
    return f"{seconds * 1e6:10.1f} us"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"backend: {_accel.backend()}  docs: {args.docs}")
    print(f"{'case':<20} {'numpy':>13} {'numba':>13} {'speedup':>8} {'compile':>9}")
    for name, t_np, t_nb, compile_s in kernel_rows(args.docs, args.repeat) + search_rows(args.docs, args.repeat):
        speedup = f"{t_np / t_nb:7.2f}x" if t_nb else "-"
        comp = f"{compile_s:8.2f}s" if compile_s is not None else "-"
        print(f"{name:<20} {_fmt(t_np):>13} {_fmt(t_nb):>13} {speedup:>8} {comp:>9}")


if __name__ == "__main__":
    main()
