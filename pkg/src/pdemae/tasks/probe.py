"""Feature probing: small heads over the encoder's CLS embedding."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..maecore import MaeConfig, Standardizer, encode, patchify_batch
from ..numkit import (AdamW, Tensor, cross_entropy, gelu, linear, mse,
                      no_grad, one_cycle_lr)
from ..pdegen.types import Family

# class sets for the categorical probes
HEAT_BC_CLASSES = ("periodic", "dirichlet", "neumann")
WAVE_BC_CLASSES = ("dirichlet", "neumann")
PDE_CLASSES = (Family.HEAT_1D, Family.ADVECTION_1D,
               Family.BURGERS_INVISCID_1D, Family.KS_1D)
RES_CLASSES_1D = (32, 40, 50, 64, 80, 100)
RES_CLASSES_2D = (32, 40, 48, 56, 64)


class TaskKind(str, Enum):
    REGRESS = "regress"
    CLASSIFY = "classify"
    TIMESTEP = "timestep"
    SUPERRES = "superres"


@dataclass
class TaskSpec:
    kind: TaskKind
    targets: tuple            # coefficient names, or the class tuple

    @property
    def n_outputs(self) -> int:
        return len(self.targets)

    def target_vector(self, spec) -> np.ndarray:
        if self.kind != TaskKind.REGRESS:
            raise ValueError("target_vector applies to regression tasks")
        missing = [t for t in self.targets if t not in spec.coefficients]
        if missing:
            raise ValueError(f"spec lacks regression targets {missing}")
        return np.array([float(spec.coefficients[t]) for t in self.targets])


def init_head(rng: np.random.Generator, d_in: int, n_out: int,
              hidden: int = 64) -> dict:
    return {
        "head.fc1.w": Tensor(rng.normal(0.0, 0.02, (d_in, hidden)), requires_grad=True),
        "head.fc1.b": Tensor(np.zeros(hidden), requires_grad=True),
        "head.fc2.w": Tensor(rng.normal(0.0, 0.02, (hidden, n_out)), requires_grad=True),
        "head.fc2.b": Tensor(np.zeros(n_out), requires_grad=True),
    }


def head_forward(head: dict, cls: Tensor) -> Tensor:
    h = gelu(linear(cls, head["head.fc1.w"], head["head.fc1.b"]))
    return linear(h, head["head.fc2.w"], head["head.fc2.b"])


def encode_cls(mae_params: dict, mae_cfg: MaeConfig, windows: np.ndarray) -> Tensor:
    patches = patchify_batch(np.asarray(windows), mae_cfg.patch)
    b, n, _ = patches.shape
    return encode(mae_params, mae_cfg, patches, np.arange(n),
                  np.tile(np.arange(n), (b, 1))).cls


def probe_forward(mae_params: dict, mae_cfg: MaeConfig, head: dict,
                  windows: np.ndarray, frozen: bool = True) -> Tensor:
    if frozen:
        with no_grad():
            cls = encode_cls(mae_params, mae_cfg, windows)
        cls = Tensor(cls.data)
    else:
        cls = encode_cls(mae_params, mae_cfg, windows)
    return head_forward(head, cls)


@dataclass
class ProbeResult:
    head: dict
    mae_params: dict
    standardizer: Standardizer
    curve: list


def _fit_std(windows) -> Standardizer:
    flat = np.concatenate([np.asarray(w, dtype=float).ravel() for w in windows])
    return Standardizer(float(flat.mean()), float(flat.std()) or 1.0)


def encode_cls_each(mae_params: dict, mae_cfg: MaeConfig, windows,
                    std: Standardizer) -> np.ndarray:
    """Per-sample CLS for windows of possibly different resolutions."""
    with no_grad():
        rows = [encode_cls(mae_params, mae_cfg,
                           std.apply(np.asarray(w, dtype=float))[None]).data
                for w in windows]
    return np.concatenate(rows)


def train_probe(mae_params: dict, mae_cfg: MaeConfig, windows,
                targets: np.ndarray, task: TaskSpec, *, epochs: int = 40,
                batch_size: int = 32, lr: float = 1e-3, seed: int = 0,
                frozen: bool = True, standardizer: Standardizer | None = None,
                hidden: int = 64) -> ProbeResult:
    """Fit a head (optionally finetuning the encoder) on (windows, targets).

    ``windows``: raw (B, window, nx[, ny]) fields, or a list of windows with
    differing resolutions (frozen mode only); standardized internally.
    Classification targets are integer labels; regression targets (B, k).
    """
    rng = np.random.default_rng(seed)
    mixed = isinstance(windows, (list, tuple))
    if mixed and not frozen:
        raise ValueError("mixed-resolution probing only supports the frozen path")
    std = standardizer or _fit_std(windows if mixed else [windows])
    data = None if mixed else std.apply(np.asarray(windows, dtype=float))
    head = init_head(rng, mae_cfg.encoder_dim, task.n_outputs, hidden)
    trained = dict(head)
    if not frozen:
        trained.update(mae_params)
    opt = AdamW(trained, lr=lr, weight_decay=0.01)

    cached_cls = None
    if frozen:
        # the encoder never changes: embed once, train the head on the cache
        if mixed:
            cached_cls = encode_cls_each(mae_params, mae_cfg, windows, std)
        else:
            with no_grad():
                cached_cls = encode_cls(mae_params, mae_cfg, data).data

    n = len(windows) if mixed else data.shape[0]
    steps_per_epoch = max(1, n // batch_size)
    total = epochs * steps_per_epoch
    step = 0
    curve = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        losses = []
        for s in range(steps_per_epoch):
            idx = order[s * batch_size:(s + 1) * batch_size]
            if cached_cls is not None:
                out = head_forward(head, Tensor(cached_cls[idx]))
            else:
                out = probe_forward(mae_params, mae_cfg, head, data[idx], frozen=False)
            if task.kind == TaskKind.CLASSIFY:
                loss = cross_entropy(out, targets[idx])
            else:
                loss = mse(out, Tensor(np.asarray(targets)[idx]))
            opt.lr = one_cycle_lr(step, total, lr)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
            step += 1
        curve.append(float(np.mean(losses)))
    return ProbeResult(head, mae_params, std, curve)


def probe_predict(result: ProbeResult, mae_cfg: MaeConfig,
                  windows) -> np.ndarray:
    if isinstance(windows, (list, tuple)):
        cls = encode_cls_each(result.mae_params, mae_cfg, windows,
                              result.standardizer)
        with no_grad():
            return head_forward(result.head, Tensor(cls)).data
    data = result.standardizer.apply(np.asarray(windows, dtype=float))
    with no_grad():
        out = probe_forward(result.mae_params, mae_cfg, result.head, data)
    return out.data
