"""Exact matrix-element evolution for small systems.

Independent oracle for the quadratic (metric-tensor) approximation: the
coherence between two pointer-basis codewords evolves with an exponential
dephasing factor in the pair kernels, a phase factor in the phase kernels,
and one cosine factor per traced-out atom.  Expanding to lowest order
reproduces the quadratic form of the metric tensor, including the indirect
part mediated by the traced-out atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_codeword
from .ensemble import iter_difference_classes
from .kernels import pair_kernel, phase_kernel, self_kernel
from .model import AtomConfig, BathParams, pair_geometry

__all__ = ["AmplitudeRatio", "amplitude_ratio", "iter_class_comparison", "validate_quadratic"]

_MAX_EXACT_N = 12


@dataclass(frozen=True)
class AmplitudeRatio:
    """|rho(t)| / |rho(0)| for one coherence, split into magnitude and phase.

    The magnitude never exceeds one (coherences only contract); equal
    codewords give magnitude 1 and phase 0 exactly.
    """

    word_a: tuple[int, ...]
    word_b: tuple[int, ...]
    magnitude: float
    phase: float


def _selected_kernel_matrices(cfg: AtomConfig, bath: BathParams, t: float):
    """Pair-kernel matrix over selected atoms and phase couplings to the rest."""
    sel = cfg.selected
    n = len(sel)
    f_self = self_kernel(t, bath).value
    f_mat = np.zeros((n, n))
    for a in range(n):
        f_mat[a, a] = f_self
        for b in range(a + 1, n):
            r, theta = pair_geometry(cfg, sel[a], sel[b])
            f_mat[a, b] = f_mat[b, a] = f_self if r == 0.0 else pair_kernel(t, r, theta, bath).value
    unsel = cfg.unselected
    phi_out = np.zeros((n, len(unsel)))
    for a in range(n):
        for li, l in enumerate(unsel):
            r, theta = pair_geometry(cfg, sel[a], l)
            phi_out[a, li] = phase_kernel(t, r, theta, bath).value
    phi_in = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            r, theta = pair_geometry(cfg, sel[a], sel[b])
            phi_in[a, b] = phi_in[b, a] = phase_kernel(t, r, theta, bath).value
    return f_mat, phi_in, phi_out


def amplitude_ratio(
    word_a, word_b, cfg: AtomConfig, bath: BathParams, t: float
) -> AmplitudeRatio:
    """Exact coherence contraction between two codewords of the selected atoms."""
    n = cfg.n_selected
    if n > _MAX_EXACT_N:
        raise ValueError(f"exact evolution supports n <= {_MAX_EXACT_N}, got {n}")
    a = as_codeword(word_a, n)
    b = as_codeword(word_b, n)
    if np.array_equal(a, b):
        return AmplitudeRatio(tuple(int(x) for x in a), tuple(int(x) for x in b), 1.0, 0.0)
    t = float(t)
    if t == 0.0:
        return AmplitudeRatio(tuple(int(x) for x in a), tuple(int(x) for x in b), 1.0, 0.0)

    f_mat, phi_in, phi_out = _selected_kernel_matrices(cfg, bath, t)
    delta = (a - b).astype(float)

    damping = float(delta @ f_mat @ delta)
    cos_args = delta @ phi_out if phi_out.size else np.zeros(0)
    cos_factors = np.cos(cos_args)
    magnitude = math.exp(-damping) * float(np.prod(np.abs(cos_factors)))

    af = a.astype(float)
    bf = b.astype(float)
    pair_term = np.outer(af, af) - np.outer(bf, bf)
    phase = float(np.triu(pair_term * phi_in, k=1).sum())
    phase += math.pi * int(np.count_nonzero(cos_factors < 0.0))
    phase = math.remainder(phase, 2.0 * math.pi)

    return AmplitudeRatio(tuple(int(x) for x in a), tuple(int(x) for x in b), magnitude, phase)


def iter_class_comparison(
    cfg: AtomConfig, bath: BathParams, t: float, include_indirect: bool = True
):
    """Per difference class: (hamming, 1 - magnitude, quadratic decoherence).

    Yields blocks of three aligned arrays.  ``include_indirect=False`` drops
    the traced-out-atom part from the quadratic form only (the exact
    magnitude always contains it), which is the negative control for the
    indirect contribution.
    """
    n = cfg.n_selected
    if n > 8:
        raise ValueError(f"quadratic validation supports n <= 8, got {n}")
    t = float(t)
    f_mat, _, phi_out = _selected_kernel_matrices(cfg, bath, t)
    m = 4.0 * f_mat
    if include_indirect and phi_out.size:
        m = m + 2.0 * (phi_out @ phi_out.T)

    for deltas, _ in iter_difference_classes(n):
        d = deltas.astype(float)
        # raw codeword difference is twice the class vector
        damping = 4.0 * np.einsum("ij,jk,ik->i", d, f_mat, d)
        if phi_out.size:
            cos_args = 2.0 * (d @ phi_out)
            cos_prod = np.prod(np.abs(np.cos(cos_args)), axis=1)
        else:
            cos_prod = np.ones(len(d))
        one_minus_mag = 1.0 - np.exp(-damping) * cos_prod
        quad = np.einsum("ij,jk,ik->i", d, m, d)
        ham = (deltas != 0).sum(axis=1)
        yield ham, one_minus_mag, quad


def validate_quadratic(
    cfg: AtomConfig, bath: BathParams, t: float, include_indirect: bool = True
) -> float:
    """Largest defect |(1 - magnitude) - quadratic decoherence| over classes."""
    t = float(t)
    if t == 0.0:
        if cfg.n_selected > 8:
            raise ValueError(f"quadratic validation supports n <= 8, got {cfg.n_selected}")
        return 0.0
    worst = 0.0
    for _, one_minus_mag, quad in iter_class_comparison(cfg, bath, t, include_indirect):
        worst = max(worst, float(np.max(np.abs(one_minus_mag - quad))))
    return worst
