"""Codeword-pair enumeration, statistics, and minimum-decoherence search.

The decoherence of a codeword pair depends only on its difference vector
(entries in {-1, 0, +1}, defined up to global sign), so all pair statistics
reduce exactly to a sweep over the (3^n - 1)/2 difference classes, each
weighted by its pair multiplicity 2^(number of zeros).  Enumeration is
chunked and deterministic; chunks merge in a fixed order so results do not
depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .metric import MetricTensor, total_decoherence

__all__ = [
    "DecoStats",
    "ClassTable",
    "n_codeword_pairs",
    "n_difference_classes",
    "iter_difference_classes",
    "class_table",
    "pair_statistics",
    "decoherence_vs_hamming",
    "min_decoherence",
    "select_code",
]

_CHUNK = 1 << 16
_MEAN_GUARD_RTOL = 1e-10


@dataclass(frozen=True)
class DecoStats:
    """Exact statistics of pairwise decoherences over all codeword pairs."""

    n_pairs: int
    min: float
    max: float
    mean: float
    stddev: float
    histogram: list[tuple[float, float, int]]

    def to_dict(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "stddev": self.stddev,
            "histogram": [[lo, hi, int(w)] for lo, hi, w in self.histogram],
        }


@dataclass(frozen=True)
class ClassTable:
    """Materialized canonical difference classes with pair multiplicities."""

    representatives: np.ndarray  # (n_classes, n) int8, first nonzero entry +1
    multiplicities: np.ndarray  # (n_classes,) int64, 2^(zeros per row)

    @property
    def n_classes(self) -> int:
        return self.representatives.shape[0]


def n_codeword_pairs(n: int) -> int:
    """Unordered pairs of distinct length-n codewords: 2^(n-1) (2^n - 1)."""
    return (1 << (n - 1)) * ((1 << n) - 1)


def n_difference_classes(n: int) -> int:
    return (3**n - 1) // 2


def iter_difference_classes(n: int, chunk: int = _CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (deltas, multiplicities) blocks of canonical difference classes.

    Canonical representative: first nonzero entry is +1.  Blocks appear in a
    fixed (base-3 code) order regardless of chunk size.
    """
    if not 1 <= n <= 20:
        raise ValueError(f"difference-class enumeration supports 1 <= n <= 20, got {n}")
    total = 3**n
    powers = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        codes = np.arange(start, stop, dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % 3
        deltas = digits.astype(np.int8) - 1
        nonzero = deltas != 0
        any_nonzero = nonzero.any(axis=1)
        first = np.argmax(nonzero, axis=1)
        canonical = any_nonzero & (deltas[np.arange(len(deltas)), first] == 1)
        if not canonical.any():
            continue
        deltas = deltas[canonical]
        zeros = (deltas == 0).sum(axis=1)
        yield deltas, (np.int64(1) << zeros.astype(np.int64))


def class_table(n: int) -> ClassTable:
    """Materialize the full class table (kept small: n <= 12)."""
    if not 1 <= n <= 12:
        raise ValueError(f"class table materialization supports 1 <= n <= 12, got {n}")
    reps, mults = [], []
    for deltas, m in iter_difference_classes(n):
        reps.append(deltas)
        mults.append(m)
    return ClassTable(np.concatenate(reps), np.concatenate(mults))


def _quadratic_forms(deltas: np.ndarray, m: np.ndarray) -> np.ndarray:
    d = deltas.astype(float)
    return np.einsum("ij,jk,ik->i", d, m, d)


def pair_statistics(tensor: MetricTensor, bins: int = 50, threads: int = 1) -> DecoStats:
    """Exact min/max/mean/stddev and histogram over all codeword pairs.

    Two passes over the difference classes: one for extremes and moments,
    one to fill the histogram (linear bins over [0, max], weighted by pair
    multiplicity).  The mean is cross-checked against the trace identity.
    """
    n = tensor.n
    if n > 20:
        raise ValueError(f"exact enumeration supports n <= 20, got {n}")
    if bins < 1:
        raise ValueError("bins must be positive")

    chunks = list(iter_difference_classes(n))

    def moments(block):
        deltas, mult = block
        d = _quadratic_forms(deltas, tensor.entries)
        w = mult.astype(float)
        return d.min(), d.max(), float(w.sum()), float(d @ w), float((d * d) @ w)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(moments, chunks))
    else:
        results = [moments(c) for c in chunks]

    d_min = min(r[0] for r in results)
    d_max = max(r[1] for r in results)
    w_total = math.fsum(r[2] for r in results)
    d_sum = math.fsum(r[3] for r in results)
    d2_sum = math.fsum(r[4] for r in results)

    n_pairs = n_codeword_pairs(n)
    assert int(w_total) == n_pairs
    mean = d_sum / w_total
    var = max(d2_sum / w_total - mean * mean, 0.0)
    stddev = math.sqrt(var)

    reference_mean = total_decoherence(tensor)
    scale = max(abs(reference_mean), abs(mean))
    if scale > 0.0 and abs(mean - reference_mean) > _MEAN_GUARD_RTOL * scale * 100.0:
        raise RuntimeError(
            f"enumerated mean {mean!r} disagrees with trace identity {reference_mean!r}"
        )

    if d_max <= 0.0:
        histogram = [(0.0, 0.0, n_pairs)]
    else:
        edges = np.linspace(0.0, d_max, bins + 1)
        counts = np.zeros(bins, dtype=np.int64)

        def fill(block):
            deltas, mult = block
            d = _quadratic_forms(deltas, tensor.entries)
            h, _ = np.histogram(d, bins=edges, weights=mult.astype(float))
            return np.rint(h).astype(np.int64)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for h in pool.map(fill, chunks):
                    counts += h
        else:
            for c in chunks:
                counts += fill(c)
        histogram = [(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(bins)]

    return DecoStats(
        n_pairs=n_pairs,
        min=float(d_min),
        max=float(d_max),
        mean=mean,
        stddev=stddev,
        histogram=histogram,
    )


def iter_class_points(tensor: MetricTensor, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Stream (hamming, decoherence, multiplicity) rows, one per class."""
    n = tensor.n
    for deltas, mult in iter_difference_classes(n, chunk):
        d = _quadratic_forms(deltas, tensor.entries)
        h = (deltas != 0).sum(axis=1)
        yield np.column_stack([h.astype(float), d, mult.astype(float)])


def decoherence_vs_hamming(tensor: MetricTensor) -> np.ndarray:
    """All (hamming, decoherence, multiplicity) class points as one array."""
    if tensor.n > 16:
        raise ValueError(f"scatter enumeration supports n <= 16, got {tensor.n}")
    return np.concatenate(list(iter_class_points(tensor)))


def _min_exhaustive(tensor: MetricTensor) -> tuple[np.ndarray, float]:
    best_val = math.inf
    best_delta: Optional[np.ndarray] = None
    for deltas, _ in iter_difference_classes(tensor.n):
        d = _quadratic_forms(deltas, tensor.entries)
        k = int(np.argmin(d))
        if d[k] < best_val:
            best_val = float(d[k])
            best_delta = deltas[k].copy()
    assert best_delta is not None
    return best_delta, best_val


def _suffix_min_eigs(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    lam = np.zeros(n + 1)
    for k in range(n):
        lam[k] = max(float(np.linalg.eigvalsh(m[k:, k:])[0]), 0.0)
    return lam


def _min_branch_and_bound(tensor: MetricTensor) -> tuple[np.ndarray, float]:
    """Depth-first search over {-1, 0, +1} assignments with suffix bounds.

    For a partial assignment x of the first k entries, every completion y
    satisfies  d >= x' M x + sum_i min(0, lam_k - 2 |b_i|)  with b = M[k:, :k] x
    and lam_k the smallest eigenvalue of the trailing submatrix (clipped at
    zero).  The first nonzero entry is pinned to +1, which enumerates one
    representative per class.
    """
    m = tensor.entries
    n = tensor.n
    lam = _suffix_min_eigs(m)

    best_delta, best_val = None, math.inf
    # warm start: cheapest single-support class
    k0 = int(np.argmin(np.diag(m)))
    best_val = float(m[k0, k0])
    seed = np.zeros(n, dtype=np.int8)
    seed[k0] = 1
    best_delta = seed

    x = np.zeros(n)

    def descend(k: int, current: float, b: np.ndarray) -> None:
        nonlocal best_delta, best_val
        if k == n:
            if current < best_val:
                best_val = current
                best_delta = x.astype(np.int8).copy()
            return
        bound = current + float(np.minimum(0.0, lam[k] - 2.0 * np.abs(b[k:])).sum())
        if bound >= best_val:
            return
        for v in (-1.0, 0.0, 1.0):
            x[k] = v
            new_current = current + v * v * m[k, k] + 2.0 * v * b[k]
            if v == 0.0:
                descend(k + 1, new_current, b)
            else:
                descend(k + 1, new_current, b + v * m[:, k])
        x[k] = 0.0

    for p in range(n):
        # first nonzero at p with value +1
        x[:] = 0.0
        x[p] = 1.0
        descend(p + 1, float(m[p, p]), m[:, p].copy())
    x[:] = 0.0

    assert best_delta is not None
    return best_delta, best_val


def min_decoherence(tensor: MetricTensor, mode: str = "exhaustive") -> tuple[np.ndarray, float]:
    """Minimum of the class quadratic form over nonzero difference classes.

    Returns (canonical difference vector, value).  Exhaustive scanning is
    bounded at n <= 16; branch and bound prunes with eigenvalue suffix
    bounds and returns the same value wherever both run.
    """
    if mode == "exhaustive":
        if tensor.n > 16:
            raise ValueError(f"exhaustive search supports n <= 16, got {tensor.n}")
        return _min_exhaustive(tensor)
    if mode == "branch_and_bound":
        return _min_branch_and_bound(tensor)
    raise ValueError(f"mode must be 'exhaustive' or 'branch_and_bound', got {mode!r}")


def _all_codewords(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def select_code(tensor: MetricTensor, size: int) -> list[np.ndarray]:
    """Greedy code construction: seed with the least-decohering pair, then
    repeatedly add the codeword minimizing the maximum pairwise decoherence
    to the chosen set.  Ties break toward the lexicographically smallest
    word (with -1 ordered before +1).  Greedy optimality is not claimed.
    """
    n = tensor.n
    if n > 16:
        raise ValueError(f"code selection supports n <= 16, got {n}")
    if not 2 <= size <= (1 << n):
        raise ValueError(f"code size must be in [2, 2^{n}], got {size}")

    delta, _ = min_decoherence(tensor, mode="exhaustive")
    first = np.where(delta >= 0, 1, -1).astype(np.int8)
    second = (first - 2 * delta).astype(np.int8)

    words = _all_codewords(n)
    chosen_idx: list[int] = []

    def word_index(w: np.ndarray) -> int:
        bits = (w > 0).astype(np.int64)
        return int(bits @ (np.int64(1) << np.arange(n - 1, -1, -1, dtype=np.int64)))

    chosen_idx.append(word_index(first))
    chosen_idx.append(word_index(second))
    if chosen_idx[0] == chosen_idx[1]:
        raise RuntimeError("degenerate seed pair")

    # running maximum pairwise decoherence from each candidate to the set
    max_d = np.full(len(words), -math.inf)
    for idx in chosen_idx:
        diff = (words - words[idx]).astype(float)
        d = 0.25 * np.einsum("ij,jk,ik->i", diff, tensor.entries, diff)
        np.maximum(max_d, d, out=max_d)

    available = np.ones(len(words), dtype=bool)
    available[chosen_idx] = False
    while len(chosen_idx) < size:
        masked = np.where(available, max_d, math.inf)
        pick = int(np.argmin(masked))  # argmin takes the first (lexicographic) tie
        chosen_idx.append(pick)
        available[pick] = False
        diff = (words - words[pick]).astype(float)
        d = 0.25 * np.einsum("ij,jk,ik->i", diff, tensor.entries, diff)
        np.maximum(max_d, d, out=max_d)

    return [words[i].copy() for i in chosen_idx]
