"""Evaluation metrics: summed normalized L2, PCA projection, pairwise
distances, and per-seed report aggregation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

log = logging.getLogger(__name__)


def nrmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Per-step relative L2 error, summed over the leading (time) axis."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    p = pred.reshape(pred.shape[0], -1)
    t = truth.reshape(truth.shape[0], -1)
    denom = np.linalg.norm(t, axis=1)
    if np.any(denom == 0.0):
        raise ValueError("true trajectory has a zero-norm snapshot")
    return float(np.sum(np.linalg.norm(p - t, axis=1) / denom))


def required_seeds(two_d: bool) -> int:
    return 3 if two_d else 5


@dataclass
class MetricReport:
    task: str
    variant: str
    per_seed: list = field(default_factory=list)
    mean: float = 0.0
    std: float = 0.0

    @classmethod
    def from_values(cls, task: str, variant: str, values,
                    min_count: int = 2) -> "MetricReport":
        values = [float(v) for v in values]
        if len(values) < min_count:
            raise ValueError(
                f"{task}/{variant}: {len(values)} values, need >= {min_count}")
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return cls(task, variant, values, float(np.mean(values)), std)

    def row(self) -> dict:
        return {"task": self.task, "variant": self.variant,
                "n": len(self.per_seed), "mean": self.mean, "std": self.std,
                "values": ";".join(f"{v:.10g}" for v in self.per_seed)}


@dataclass
class Pca:
    mean: np.ndarray              # (D,)
    components: np.ndarray        # (k, D), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) @ self.components.T


def fit_pca(x: np.ndarray, d: int = 16) -> Pca:
    """Principal components by SVD; rank-deficient input falls back to the
    available rank (logged) instead of fabricating directions."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a (n, D) matrix of embeddings")
    n = x.shape[0]
    if n < d:
        raise ValueError(f"need at least {d} embeddings to fit {d} components, got {n}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    tol = s[0] * max(x.shape) * np.finfo(float).eps if s.size else 0.0
    rank = int(np.sum(s > tol))
    k = min(d, rank)
    if k < d:
        log.warning("rank-deficient embeddings: projecting onto %d of %d requested components", k, d)
    return Pca(mean, vt[:k], s[:k] ** 2 / max(n - 1, 1))


def pca_project(x: np.ndarray, d: int = 16) -> np.ndarray:
    return fit_pca(x, d).transform(x)


def max_normalize(x: np.ndarray) -> np.ndarray:
    """Divide every vector by the largest L2 norm in the set."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m = np.linalg.norm(x, axis=1).max()
    if m == 0.0:
        raise ValueError("all vectors are zero; nothing to normalize against")
    return x / m


def pairwise_mean_distance(a: np.ndarray, b: np.ndarray | None = None) -> float:
    """Mean L2 distance over unordered pairs of ``a``, or over a x b."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] == 0:
        raise ValueError("empty vector set")
    if b is None:
        if a.shape[0] < 2:
            raise ValueError("pairwise distance needs at least two vectors")
        return float(pdist(a).mean())
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] == 0:
        raise ValueError("empty vector set")
    return float(cdist(a, b).mean())
