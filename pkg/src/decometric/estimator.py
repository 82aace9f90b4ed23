"""Scikit-learn style estimator facade over the metric-tensor pipeline.

The decoherence metric is a Mahalanobis-type distance between binary
codewords, so it composes naturally with the metric-learning idiom: fit on
the atom geometry, then transform codewords into a Euclidean embedding or
query pairwise decoherences directly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_codeword_matrix
from .metric import build_metric_tensor, total_decoherence
from .model import DEFAULT_ALPHA, AtomConfig, BathParams

__all__ = ["DecoherenceMetric"]


class DecoherenceMetric(BaseEstimator, TransformerMixin):
    """Time-dependent codeword metric induced by a bosonic heat bath.

    Parameters
    ----------
    time : evaluation time in reduced units.
    kappa : dimensionless UV cutoff of the bath.
    alpha : coupling strength (fine-structure constant by default).
    temperature : reduced temperature; 0 selects the exact closed forms.
    dipole : common dipole direction shared by all atoms.
    selected : indices of the observed sub-cluster (default: all atoms).

    Attributes (after ``fit``)
    --------------------------
    metric_tensor_ : the assembled n x n ``MetricTensor``.
    components_ : matrix L with L' L = M, so that the transform
        ``w -> 0.5 * w @ L.T`` turns metric distances into Euclidean ones.

    Examples
    --------
    >>> est = DecoherenceMetric(time=200.0, kappa=0.01)
    >>> est.fit([[0, 0, 0], [580, 0, 0]])              # doctest: +ELLIPSIS
    DecoherenceMetric(...)
    >>> d = est.pairwise_decoherence([[1, 1]], [[1, -1]])
    """

    def __init__(
        self,
        time: float = 200.0,
        kappa: float = 0.01,
        alpha: float = DEFAULT_ALPHA,
        temperature: float = 0.0,
        dipole: tuple = (0.0, 0.0, 1.0),
        selected: tuple | None = None,
    ):
        self.time = time
        self.kappa = kappa
        self.alpha = alpha
        self.temperature = temperature
        self.dipole = dipole
        self.selected = selected

    def fit(self, X, y=None):
        """Build the metric tensor from atom positions (shape (N, 3))."""
        positions = np.asarray(X, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ValueError(f"X must be an (N, 3) array of positions, got shape {positions.shape}")
        if not np.all(np.isfinite(positions)):
            raise ValueError("positions must be finite")
        dipole = np.asarray(self.dipole, dtype=float)
        norm = float(np.linalg.norm(dipole))
        if dipole.shape != (3,) or norm == 0.0:
            raise ValueError("dipole must be a nonzero 3-vector")
        dipoles = np.tile(dipole / norm, (positions.shape[0], 1))
        cfg = AtomConfig(
            positions=positions,
            dipoles=dipoles,
            selected=tuple(self.selected) if self.selected is not None else (),
        )
        bath = BathParams(kappa=self.kappa, alpha=self.alpha, theta_T=self.temperature)
        self.atom_config_ = cfg
        self.bath_params_ = bath
        self.metric_tensor_ = build_metric_tensor(cfg, bath, self.time)
        w, v = np.linalg.eigh(self.metric_tensor_.entries)
        self.components_ = np.sqrt(np.clip(w, 0.0, None))[:, None] * v.T
        self.n_features_in_ = 3
        return self

    @property
    def n_codeword_bits_(self) -> int:
        check_is_fitted(self, "metric_tensor_")
        return self.metric_tensor_.n

    def transform(self, X):
        """Embed codeword rows so Euclidean distances equal metric distances."""
        check_is_fitted(self, "components_")
        words = as_codeword_matrix(X, self.metric_tensor_.n)
        return 0.5 * words.astype(float) @ self.components_.T

    def pairwise_decoherence(self, X, Y=None):
        """Matrix of decoherences between codeword rows of X and Y (or X)."""
        check_is_fitted(self, "metric_tensor_")
        a = as_codeword_matrix(X, self.metric_tensor_.n).astype(float)
        b = a if Y is None else as_codeword_matrix(Y, self.metric_tensor_.n).astype(float)
        m = self.metric_tensor_.entries
        # 1/4 (a - b) M (a - b)^T expanded to avoid the (ma, mb, n) broadcast
        aa = 0.25 * np.einsum("ij,jk,ik->i", a, m, a)
        bb = 0.25 * np.einsum("ij,jk,ik->i", b, m, b)
        cross = 0.25 * (a @ m @ b.T)
        return aa[:, None] + bb[None, :] - 2.0 * cross

    def pairwise_distance(self, X, Y=None):
        """Metric distances (square roots of decoherences)."""
        return np.sqrt(np.clip(self.pairwise_decoherence(X, Y), 0.0, None))

    def mean_pair_decoherence(self) -> float:
        """Uniform average decoherence over all codeword pairs (trace identity)."""
        check_is_fitted(self, "metric_tensor_")
        return total_decoherence(self.metric_tensor_)
