"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names (``dismax_update``, ``cosine_scores``, ``pairwise_logistic``)
pick the faster implementation per kernel. Only the dismax scatter-max gains
from numba; the other two are a matrix product and vectorized transcendentals,
where BLAS and numpy's SIMD loops beat a compiled scalar loop (see
``benchmarks/bench_kernels.py``). Every implementation stays importable for
testing and benchmarking.
"""

import numpy as np

from cdsbench._accel import HAVE_NUMBA, njit


def dismax_update_numpy(best, ords, tfs, doc_lens, avglen, idf, k1, b, facet_weight):
    """Raise ``best[d]`` to the weighted BM25 contribution of one postings list.

    ``ords`` must be unique (postings lists are), so fancy indexing is safe.
    """
    if ords.shape[0] == 0:
        return
    if avglen <= 0.0:
        avglen = 1.0
    tf = tfs.astype(np.float64)
    norm = k1 * (1.0 - b + b * (doc_lens[ords] / avglen))
    vals = facet_weight * (idf * ((tf * (k1 + 1.0)) / (tf + norm)))
    best[ords] = np.maximum(best[ords], vals)


def _dismax_update_loop(best, ords, tfs, doc_lens, avglen, idf, k1, b, facet_weight):
    if avglen <= 0.0:
        avglen = 1.0
    for i in range(ords.shape[0]):
        d = ords[i]
        tf = float(tfs[i])
        norm = k1 * (1.0 - b + b * (doc_lens[d] / avglen))
        v = facet_weight * (idf * ((tf * (k1 + 1.0)) / (tf + norm)))
        if v > best[d]:
            best[d] = v


def cosine_scores_numpy(unit_matrix, unit_query):
    return unit_matrix @ unit_query


def _cosine_scores_loop(unit_matrix, unit_query):
    n, dim = unit_matrix.shape
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(dim):
            acc += unit_matrix[i, j] * unit_query[j]
        out[i] = acc
    return out


def pairwise_logistic_numpy(diffs, w):
    """Mean pairwise logistic loss and its gradient.

    ``diffs`` holds one row ``x_pos - x_neg`` per preference pair.
    """
    margins = diffs @ w
    loss = float(np.mean(np.logaddexp(0.0, -margins)))
    # d/dm ln(1 + e^-m) = -sigmoid(-m)
    coef = -0.5 * (1.0 - np.tanh(0.5 * margins))
    grad = diffs.T @ coef / diffs.shape[0]
    return loss, grad


def _pairwise_logistic_loop(diffs, w):
    m, dim = diffs.shape
    grad = np.zeros(dim, dtype=np.float64)
    loss = 0.0
    for i in range(m):
        margin = 0.0
        for j in range(dim):
            margin += diffs[i, j] * w[j]
        loss += np.logaddexp(0.0, -margin)
        coef = -0.5 * (1.0 - np.tanh(0.5 * margin))
        for j in range(dim):
            grad[j] += coef * diffs[i, j]
    return loss / m, grad / m


if HAVE_NUMBA:
    dismax_update_numba = njit(cache=True, nogil=True)(_dismax_update_loop)
    cosine_scores_numba = njit(cache=True, nogil=True)(_cosine_scores_loop)
    _pairwise_numba_inner = njit(cache=True, nogil=True)(_pairwise_logistic_loop)

    def pairwise_logistic_numba(diffs, w):
        loss, grad = _pairwise_numba_inner(diffs, w)
        return float(loss), grad

    dismax_update = dismax_update_numba
    cosine_scores = cosine_scores_numpy
    pairwise_logistic = pairwise_logistic_numpy
else:
    dismax_update_numba = None
    cosine_scores_numba = None
    pairwise_logistic_numba = None

    dismax_update = dismax_update_numpy
    cosine_scores = cosine_scores_numpy
    pairwise_logistic = pairwise_logistic_numpy
