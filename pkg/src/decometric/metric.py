"""Decoherence metric tensor: assembly and codeword quadratic forms.

The tensor M(t) is real, symmetric, and non-negative.  Its quadratic form in
the half-difference of two codewords gives their lowest-order decoherence;
its square root (halved, in the raw difference) is a pseudometric of
Mahalanobis type that generalizes the Hamming distance, which is recovered
exactly for M = identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_codeword
from .kernels import pair_kernel, phase_kernel, self_kernel
from .model import AtomConfig, BathParams, pair_geometry

__all__ = [
    "MetricTensor",
    "build_metric_tensor",
    "decoherence",
    "metric_distance",
    "hamming",
    "total_decoherence",
    "psd_check",
]

PSD_TOL = 1e-10


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric n x n decoherence metric tensor at a fixed evaluation time.

    ``includes_indirect`` records whether traced-out atoms contributed their
    mediated (phase-kernel-squared) part.
    """

    time: float
    entries: np.ndarray
    includes_indirect: bool = False

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"entries must be square, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("entries must be exactly symmetric")
        if self.time < 0.0:
            raise ValueError(f"time must be non-negative, got {self.time!r}")
        if self.time == 0.0 and np.any(m != 0.0):
            raise ValueError("a tensor at time 0 must be identically zero")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def to_dict(self) -> dict:
        return {
            "t": self.time,
            "n": self.n,
            "entries": [float(x) for x in self.entries.ravel()],
            "includes_indirect": self.includes_indirect,
        }

    @staticmethod
    def from_dict(doc: dict) -> "MetricTensor":
        n = int(doc["n"])
        entries = np.asarray(doc["entries"], dtype=float).reshape(n, n)
        return MetricTensor(float(doc["t"]), entries, bool(doc["includes_indirect"]))


def build_metric_tensor(cfg: AtomConfig, bath: BathParams, t: float) -> MetricTensor:
    """Assemble M(t) over the selected atoms.

    Direct part: 4x the pair dephasing kernel between selected atoms (self
    kernel on the diagonal and for coincident pairs).  Indirect part: 2x the
    Gram matrix of phase-kernel couplings to each traced-out atom.
    """
    t = float(t)
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t!r}")
    sel = cfg.selected
    n = len(sel)
    if t == 0.0:
        return MetricTensor(0.0, np.zeros((n, n)), includes_indirect=cfg.n_atoms > n)
    cfg.require_parallel_dipoles()

    m = np.zeros((n, n))
    f_self = self_kernel(t, bath).value
    for a in range(n):
        m[a, a] = 4.0 * f_self
        for b in range(a + 1, n):
            r, theta = pair_geometry(cfg, sel[a], sel[b])
            f_ab = f_self if r == 0.0 else pair_kernel(t, r, theta, bath).value
            m[a, b] = m[b, a] = 4.0 * f_ab

    unsel = cfg.unselected
    if unsel:
        couplings = np.zeros((n, len(unsel)))
        for a in range(n):
            for li, l in enumerate(unsel):
                r, theta = pair_geometry(cfg, sel[a], l)
                couplings[a, li] = phase_kernel(t, r, theta, bath).value
        indirect = couplings @ couplings.T
        indirect = (indirect + indirect.T) / 2.0  # exact symmetry under rounding
        m = m + 2.0 * indirect

    return MetricTensor(t, m, includes_indirect=bool(unsel))


def decoherence(word_a, word_b, tensor: MetricTensor) -> float:
    """Lowest-order decoherence of the superposition of two codewords:
    one quarter of the tensor quadratic form in their difference."""
    a = as_codeword(word_a, tensor.n)
    b = as_codeword(word_b, tensor.n)
    delta = (a - b).astype(float)
    return 0.25 * float(delta @ tensor.entries @ delta)


def metric_distance(word_a, word_b, tensor: MetricTensor) -> float:
    """Pseudometric distance between codewords: the square root of their
    decoherence.  Tiny negative quadratic forms from rounding are clamped."""
    return math.sqrt(max(decoherence(word_a, word_b, tensor), 0.0))


def hamming(word_a, word_b) -> int:
    """Number of positions in which two codewords differ."""
    a = as_codeword(word_a)
    b = as_codeword(word_b, a.shape[0])
    return int(np.count_nonzero(a != b))


def total_decoherence(tensor: MetricTensor) -> float:
    """Uniform average of the decoherence over all distinct codeword pairs;
    depends on the tensor only through its trace."""
    n = tensor.n
    if n < 1:
        raise ValueError("tensor must be at least 1 x 1")
    return tensor.trace / (2.0 - 2.0 ** (1 - n))


def psd_check(tensor: MetricTensor) -> tuple[float, bool]:
    """Smallest eigenvalue and whether it clears -PSD_TOL * trace."""
    min_eig = float(np.linalg.eigvalsh(tensor.entries)[0])
    return min_eig, min_eig >= -PSD_TOL * tensor.trace
