"""Brute-force discrete mode-sum oracle for the bath kernels.

Sums over box-quantized wave vectors k = 2*pi*n/L (integer n, periodic
boundary conditions) with two explicit physical polarizations per mode and a
sharp spherical cutoff |k| <= kappa, for arbitrary per-atom dipole
orientations.  All physical constants collapse into the fine-structure
constant and the dimensionless box volume; the normalization is fixed
uniquely by agreement with the closed-form single-atom kernel in the
large-box limit.

The summand is even under k -> -k, so the sum runs over a fixed half-space
with weight two, in raster order, with compensated accumulation of the
per-slab partial sums.  Results are bitwise reproducible for a fixed
chunking and stable to ~1e-12 across chunkings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DEFAULT_ALPHA, AtomConfig, ConfigError

__all__ = ["ModeGrid", "polarization_basis", "dephasing_mode_sum", "phase_mode_sum"]

_AXIS_TOL = 1e-12


@dataclass(frozen=True)
class ModeGrid:
    """Box-quantization parameters: box edge (reduced units), per-axis mode
    cap, and spherical cutoff.  The cap must let the cube cover the cutoff
    sphere, otherwise modes would be silently dropped."""

    box_L: float
    n_max: int
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.box_L) and self.box_L > 0.0):
            raise ConfigError(f"box_L must be positive, got {self.box_L!r}")
        if int(self.n_max) < 1:
            raise ConfigError(f"n_max must be a positive integer, got {self.n_max!r}")
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise ConfigError(f"kappa must be positive, got {self.kappa!r}")
        if self.n_max * 2.0 * math.pi / self.box_L < self.kappa:
            raise ConfigError(
                f"mode grid too coarse: n_max*2*pi/L = {self.n_max * 2 * math.pi / self.box_L:.6g}"
                f" < kappa = {self.kappa:.6g}"
            )

    @property
    def dq(self) -> float:
        return 2.0 * math.pi / self.box_L

    @staticmethod
    def for_box(box_L: float, kappa: float) -> "ModeGrid":
        """Grid with the smallest per-axis cap covering the cutoff sphere."""
        n_max = int(math.ceil(kappa * box_L / (2.0 * math.pi)))
        return ModeGrid(box_L=box_L, n_max=max(1, n_max), kappa=kappa)


def _polarization_pair(khat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized deterministic polarization construction for unit rows."""
    kx, ky, kz = khat[:, 0], khat[:, 1], khat[:, 2]
    h = np.hypot(kx, ky)
    on_axis = h < _AXIS_TOL
    hs = np.where(on_axis, 1.0, h)
    e1 = np.stack([-ky / hs, kx / hs, np.zeros_like(kz)], axis=1)
    e1[on_axis] = (1.0, 0.0, 0.0)
    e2 = np.cross(khat, e1)
    e2[on_axis] = (0.0, 1.0, 0.0)
    return e1, e2


def polarization_basis(k) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal polarization vectors transverse to k.

    Deterministic and dependent only on the direction of k; k along the z
    axis maps to the canonical (x, y) pair.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ValueError(f"wave vector must be a 3-vector, got shape {k.shape}")
    norm = float(np.linalg.norm(k))
    if norm == 0.0:
        raise ValueError("polarization basis undefined for the zero wave vector")
    e1, e2 = _polarization_pair((k / norm)[None, :])
    return e1[0], e2[0]


def _half_space_slabs(n_max: int):
    """Integer (nx, ny) arrays per nz slab covering one half-space.

    Half-space: nz > 0 full plane; nz = 0 restricted to ny > 0 plus the
    positive nx semi-axis.  Every excluded mode is the negative of an
    included one, and the summands are even, so the total is twice the
    half-space sum.
    """
    full = np.arange(-n_max, n_max + 1)
    gx, gy = np.meshgrid(full, full, indexing="ij")
    plane = (gx.ravel(), gy.ravel())
    pos = np.arange(1, n_max + 1)
    zx, zy = np.meshgrid(full, pos, indexing="ij")
    axis_x = np.arange(1, n_max + 1)
    yield 0, (np.concatenate([zx.ravel(), axis_x]), np.concatenate([zy.ravel(), np.zeros_like(axis_x)]))
    for nz in range(1, n_max + 1):
        yield nz, plane


def _mode_sum(
    t: float,
    cfg: AtomConfig,
    i: int,
    j: int,
    grid: ModeGrid,
    theta_T: float,
    phase_weight: bool,
    chunk_rows: int,
) -> float:
    n = cfg.n_atoms
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"atom indices ({i}, {j}) out of range for {n} atoms")
    t = float(t)
    if t == 0.0:
        return 0.0

    dq = grid.dq
    r_cut2 = (grid.kappa / dq) ** 2
    u_i = cfg.dipoles[i]
    u_j = cfg.dipoles[j]
    delta_r = cfg.positions[i] - cfg.positions[j]

    partials: list[float] = []
    pending: list[np.ndarray] = []

    def flush():
        if pending:
            partials.append(float(np.sum(np.concatenate(pending))))
            pending.clear()

    rows_in_chunk = 0
    for nz, (nx, ny) in _half_space_slabs(grid.n_max):
        rad2 = nx.astype(float) ** 2 + ny.astype(float) ** 2 + float(nz) ** 2
        mask = rad2 <= r_cut2
        if not mask.any():
            continue
        q = dq * np.stack([nx[mask], ny[mask], np.full(mask.sum(), nz)], axis=1).astype(float)
        qn = dq * np.sqrt(rad2[mask])
        khat = q / qn[:, None]
        e1, e2 = _polarization_pair(khat)
        coupling = (e1 @ u_i) * (e1 @ u_j) + (e2 @ u_i) * (e2 @ u_j)
        phase = np.cos(q @ delta_r)
        if phase_weight:
            time_factor = qn * t - np.sin(qn * t)
        else:
            time_factor = 2.0 * np.sin(0.5 * qn * t) ** 2
            if theta_T > 0.0:
                z = qn / (2.0 * theta_T)
                time_factor = time_factor * np.where(z > 19.0, 1.0, 1.0 / np.tanh(np.minimum(z, 19.0)))
        pending.append(coupling * phase * time_factor / qn)
        rows_in_chunk += 1
        if rows_in_chunk >= chunk_rows:
            flush()
            rows_in_chunk = 0
    flush()

    return math.fsum(partials)


def dephasing_mode_sum(
    t: float,
    cfg: AtomConfig,
    i: int,
    j: int,
    grid: ModeGrid,
    theta_T: float = 0.0,
    alpha: float = DEFAULT_ALPHA,
    chunk_rows: int = 1,
) -> float:
    """Discrete-sum dephasing kernel between atoms i and j.

    Converges to the continuum pair kernel (self kernel for i = j) as the
    box grows at fixed cutoff.  theta_T = 0 drops the thermal factor.
    """
    if theta_T < 0.0:
        raise ValueError("theta_T must be non-negative")
    half = _mode_sum(t, cfg, i, j, grid, theta_T, phase_weight=False, chunk_rows=max(1, int(chunk_rows)))
    return 2.0 * (2.0 * math.pi * alpha / grid.box_L**3) * half


def phase_mode_sum(
    t: float,
    cfg: AtomConfig,
    i: int,
    j: int,
    grid: ModeGrid,
    alpha: float = DEFAULT_ALPHA,
    chunk_rows: int = 1,
) -> float:
    """Discrete-sum phase kernel between atoms i and j (no thermal factor)."""
    half = _mode_sum(t, cfg, i, j, grid, 0.0, phase_weight=True, chunk_rows=max(1, int(chunk_rows)))
    return 2.0 * (4.0 * math.pi * alpha / grid.box_L**3) * half
