"""Latent-space analysis: tokenwise arithmetic on encoder outputs and
pairwise-distance comparisons between embedding models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..maecore import LatentState, MaeConfig, decode, encode, patchify_batch
from ..numkit import Tensor, no_grad
from .metrics import MetricReport, fit_pca, max_normalize, pairwise_mean_distance


def _encode_all(params: dict, cfg: MaeConfig, windows: np.ndarray):
    """Encode with every patch visible."""
    patches = patchify_batch(windows, cfg.patch)
    b, n, _ = patches.shape
    visible = np.tile(np.arange(n), (b, 1))
    return encode(params, cfg, patches, np.arange(n), visible), n


def reconstruct(params: dict, cfg: MaeConfig, window: np.ndarray,
                standardizer=None) -> np.ndarray:
    """Plain encode-decode of one window with nothing masked."""
    return latent_arithmetic(params, cfg, window, window, (1.0, 0.0),
                             standardizer=standardizer)


def latent_arithmetic(params: dict, cfg: MaeConfig, window_a: np.ndarray,
                      window_b: np.ndarray, weights=(0.5, 0.5),
                      standardizer=None) -> np.ndarray:
    """Decode w_a*z_a + w_b*z_b, the weighted tokenwise sum (CLS included)
    of the two windows' unmasked encodings."""
    a = np.asarray(window_a, dtype=float)
    b = np.asarray(window_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"window shapes differ: {a.shape} vs {b.shape}")
    if standardizer is not None:
        a, b = standardizer.apply(a), standardizer.apply(b)
    wa, wb = (float(w) for w in weights)
    with no_grad():
        la, n = _encode_all(params, cfg, a[None])
        lb, _ = _encode_all(params, cfg, b[None])
        mixed = LatentState(cls=Tensor(wa * la.cls.data + wb * lb.cls.data),
                            tokens=Tensor(wa * la.tokens.data + wb * lb.tokens.data),
                            grid_token=None)
        out = decode(params, cfg, mixed, np.arange(n), np.arange(n)[None],
                     np.zeros((1, 0), dtype=int), a.shape)
    result = out.data[0]
    return standardizer.invert(result) if standardizer is not None else result


def cls_encoder(params: dict, cfg: MaeConfig, standardizer=None,
                batch_size: int = 32):
    """Wrap a checkpoint as a windows -> (B, D) embedding function."""
    def embed(windows: np.ndarray) -> np.ndarray:
        w = np.asarray(windows, dtype=float)
        if standardizer is not None:
            w = standardizer.apply(w)
        chunks = []
        with no_grad():
            for i in range(0, len(w), batch_size):
                latent, _ = _encode_all(params, cfg, w[i:i + batch_size])
                chunks.append(latent.cls.data)
        return np.concatenate(chunks)
    return embed


@dataclass
class ComparisonData:
    """Windows for the three distance scenarios.

    * ``arithmetic``: (a, b, target) triples - how far emb(a)+emb(b) lands
      from emb(target).
    * ``similarity``: groups of windows sharing coefficients - spread within
      each group.
    * ``temporal``: (window, next window) pairs from the same trajectory.
    """
    arithmetic: list = field(default_factory=list)
    similarity: list = field(default_factory=list)
    temporal: list = field(default_factory=list)


def embedding_comparison(encoders: dict, data: ComparisonData,
                         d: int = 16) -> list[MetricReport]:
    """Distance reports per (scenario, encoder).

    Each encoder's embeddings are projected with its own PCA fit onto ``d``
    components, then jointly scaled so the largest norm is 1; distances are
    only comparable across encoders after that common treatment.
    """
    reports = []
    for name, embed in encoders.items():
        windows = ([w for t in data.arithmetic for w in t]
                   + [w for g in data.similarity for w in g]
                   + [w for p in data.temporal for w in p])
        if not windows:
            raise ValueError("no windows in any scenario")
        z = embed(np.stack(windows))
        z = max_normalize(fit_pca(z, d).transform(z))

        pos = 0
        arith = []
        for _ in data.arithmetic:
            za, zb, zt = z[pos], z[pos + 1], z[pos + 2]
            pos += 3
            arith.append(pairwise_mean_distance([za + zb], [zt]))
        sim = []
        for g in data.similarity:
            sim.append(pairwise_mean_distance(z[pos:pos + len(g)]))
            pos += len(g)
        temp = []
        for _ in data.temporal:
            temp.append(pairwise_mean_distance([z[pos]], [z[pos + 1]]))
            pos += 2

        for scenario, values in (("latent-arithmetic", arith),
                                 ("latent-similarity", sim),
                                 ("latent-temporal", temp)):
            if values:
                reports.append(MetricReport.from_values(scenario, name, values,
                                                        min_count=1))
    return reports
