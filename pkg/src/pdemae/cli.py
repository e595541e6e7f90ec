"""Command-line interface.

Every subcommand that produces metrics writes a CSV (with the run
configuration echoed in a comment line) plus rendered figures into its
report directory, so each artifact documents how it was made.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
from pathlib import Path

import numpy as np

from .bench import (ComparisonData, MetricReport, cls_encoder,
                    embedding_comparison, latent_arithmetic, read_dataset,
                    reconstruct, save_bar_chart, save_field_comparison,
                    save_loss_curves, write_metrics_csv, write_dataset)
from .liesym import AugmentConfig, augment
from .maecore import (MaeConfig, Strategy, evaluate, load_checkpoint,
                      pretrain, save_checkpoint)
from .pdegen import Boundary, Family, generate_dataset
from .tasks import (CondSource, TaskKind, TaskSpec, coarsen, predict_rollout,
                    probe_predict, sr_forward, train_probe, train_sr,
                    train_timestepper)

log = logging.getLogger("pdemae")


def _echo(args) -> dict:
    """The run configuration as written into artifacts."""
    skip = {"func"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _report_dir(args) -> Path | None:
    if args.report_dir is None:
        return None
    path = Path(args.report_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _first_windows(samples, length: int) -> np.ndarray:
    return np.stack([s.values[:length] for s in samples])


# --------------------------------------------------------------------------


def cmd_generate(args):
    families = [Family(f.strip()) for f in args.family.split(",")]
    bc = Boundary(args.bc) if args.bc else None
    samples = generate_dataset(families, args.count, master_seed=args.seed,
                               bc=bc, target_nx=args.nx)
    write_dataset(samples, args.out, master_seed=args.seed)
    log.info("wrote %d samples to %s", len(samples), args.out)
    report = _report_dir(args)
    if report:
        with open(report / "samples.csv", "w", newline="") as f:
            f.write("# config: " + json.dumps(_echo(args), sort_keys=True) + "\n")
            writer = csv.writer(f)
            writer.writerow(["index", "family", "bc", "shape", "coefficients"])
            for i, s in enumerate(samples):
                writer.writerow([i, s.spec.family.value, s.spec.bc.value,
                                 "x".join(map(str, s.values.shape)),
                                 json.dumps(s.spec.coefficients, sort_keys=True)])
        gallery = {f"{s.spec.family.value} #{i}": s.values
                   for i, s in enumerate(samples[:4])}
        save_field_comparison(report / "gallery.png", gallery)


def cmd_augment(args):
    samples = read_dataset(args.data)
    rng = np.random.default_rng(args.seed)
    out = []
    for i, s in enumerate(samples):
        cfg = AugmentConfig.for_grid(s.grid, probability=args.probability)
        out.append(augment(s, cfg, np.random.default_rng(rng.integers(2**63)),
                           window_len=args.window))
    write_dataset(out, args.out, master_seed=args.seed)
    log.info("augmented %d samples into %s", len(out), args.out)
    report = _report_dir(args)
    if report:
        save_field_comparison(report / "augmented.png",
                              {"original": samples[0].values,
                               "augmented": out[0].values})


def _mae_config(args, spatial_rank: int) -> MaeConfig:
    patch = tuple(int(p) for p in args.patch.split(","))
    if len(patch) != spatial_rank + 1:
        raise SystemExit(f"--patch needs {spatial_rank + 1} extents, got {len(patch)}")
    return MaeConfig(encoder_dim=args.dim, encoder_depth=args.depth,
                     encoder_heads=args.heads, decoder_dim=args.decoder_dim,
                     decoder_depth=args.decoder_depth, patch=patch,
                     mask_ratio=args.mask_ratio, time_window=args.window,
                     strategy=Strategy(args.strategy),
                     masked_loss_only=args.masked_loss_only)


def cmd_pretrain(args):
    samples = read_dataset(args.data)
    cfg = _mae_config(args, samples[0].values.ndim - 1)
    augment_cfg = None
    if args.augment_prob > 0:
        augment_cfg = AugmentConfig.for_grid(samples[0].grid,
                                             probability=args.augment_prob)
    result = pretrain(cfg, samples, epochs=args.epochs,
                      batch_size=args.batch_size, base_lr=args.lr,
                      seed=args.seed, augment_cfg=augment_cfg,
                      deterministic=args.deterministic, log=log.info)
    save_checkpoint(args.out, result.best_params, cfg, result.standardizer,
                    meta=_echo(args))
    log.info("saved checkpoint %s (best epoch %d, val %.5f)", args.out,
             result.best_epoch, result.val_curve[result.best_epoch])
    report = _report_dir(args)
    if report:
        rows = [MetricReport.from_values("pretrain-train-loss", "final",
                                         result.train_curve[-1:], min_count=1),
                MetricReport.from_values("pretrain-val-loss", "best",
                                         [result.val_curve[result.best_epoch]],
                                         min_count=1)]
        write_metrics_csv(report / "pretrain.csv", rows, config=_echo(args))
        save_loss_curves(report / "loss.png", {"train": result.train_curve,
                                               "val": result.val_curve})
        window = samples[0].values[:cfg.time_window]
        recon = reconstruct(result.best_params, cfg, window,
                            standardizer=result.standardizer)
        save_field_comparison(report / "reconstruction.png",
                              {"input": window, "reconstruction": recon,
                               "error": recon - window})


def _probe_task(samples, target: str):
    """Map a probe target name onto (task, labels, class names)."""
    specs = [s.spec for s in samples]
    if target == "family":
        classes = sorted({sp.family.value for sp in specs})
        labels = np.array([classes.index(sp.family.value) for sp in specs])
        return TaskSpec(TaskKind.CLASSIFY, tuple(classes)), labels, classes
    if target == "bc":
        classes = sorted({sp.bc.value for sp in specs})
        labels = np.array([classes.index(sp.bc.value) for sp in specs])
        return TaskSpec(TaskKind.CLASSIFY, tuple(classes)), labels, classes
    if target == "resolution":
        classes = sorted({s.values.shape[1] for s in samples})
        labels = np.array([classes.index(s.values.shape[1]) for s in samples])
        return TaskSpec(TaskKind.CLASSIFY, tuple(classes)), labels, classes
    task = TaskSpec(TaskKind.REGRESS, (target,))
    return task, np.stack([task.target_vector(sp) for sp in specs]), None


def cmd_probe(args):
    samples = read_dataset(args.data)
    params, cfg, std, _, _ = load_checkpoint(args.ckpt)
    task, labels, classes = _probe_task(samples, args.target)
    wins = [s.values[:cfg.time_window] for s in samples]
    uniform = len({w.shape for w in wins}) == 1
    windows = np.stack(wins) if uniform else wins

    def take(idx):
        return windows[idx] if uniform else [windows[i] for i in idx]

    values, baselines = [], []
    for seed in range(args.seeds):
        rng = np.random.default_rng(seed)
        perm = rng.permutation(len(samples))
        n_test = max(1, int(round(args.test_fraction * len(samples))))
        test, train = perm[:n_test], perm[n_test:]
        result = train_probe(params, cfg, take(train), labels[train], task,
                             epochs=args.epochs, seed=seed,
                             frozen=not args.finetune, standardizer=std,
                             hidden=args.hidden)
        pred = probe_predict(result, cfg, take(test))
        if task.kind == TaskKind.CLASSIFY:
            values.append(float(np.mean(pred.argmax(axis=1) == labels[test])))
        else:
            values.append(float(np.sqrt(np.mean((pred - labels[test]) ** 2))))
            mean_pred = labels[train].mean(axis=0)
            baselines.append(float(np.sqrt(np.mean((labels[test] - mean_pred) ** 2))))
    metric = "accuracy" if task.kind == TaskKind.CLASSIFY else "rmse"
    variant = "finetune" if args.finetune else "frozen"
    reports = [MetricReport.from_values(f"probe-{args.target}-{metric}",
                                        variant, values, min_count=1)]
    if baselines:
        reports.append(MetricReport.from_values(
            f"probe-{args.target}-{metric}", "predict-mean", baselines,
            min_count=1))
    for r in reports:
        log.info("%s/%s: %.4f +- %.4f", r.task, r.variant, r.mean, r.std)
    report = _report_dir(args)
    if report:
        write_metrics_csv(report / "probe.csv", reports, config=_echo(args))
        save_bar_chart(report / "probe.png", reports,
                       title=f"{args.target} ({metric}, {args.seeds} seeds)")
    if classes:
        log.info("classes: %s", classes)


def _load_mae(args):
    if args.ckpt is None:
        return None
    params, cfg, std, _, _ = load_checkpoint(args.ckpt)
    return params, cfg, std


def cmd_timestep(args):
    samples = read_dataset(args.data)
    variant = CondSource(args.variant)
    mae = _load_mae(args)
    if mae is None and variant in (CondSource.FROZEN_MAE, CondSource.FINETUNED_MAE):
        raise SystemExit(f"--variant {variant.value} requires --ckpt")
    results, curves = [], {}
    for seed in range(args.seeds):
        res = train_timestepper(samples, kind=args.kind, variant=variant,
                                mae=mae, t_in=args.t_in, chunk=args.chunk,
                                epochs=args.epochs, batch_size=args.batch_size,
                                lr=args.lr, seed=seed,
                                pushforward=not args.no_pushforward,
                                rollout_horizon=args.horizon)
        results.append(res)
        curves[f"seed {seed}"] = res.train_curve
        log.info("seed %d: rollout nrmse %.4f", seed, res.mean_nrmse)
    reports = [MetricReport.from_values(f"timestep-{args.kind}", variant.value,
                                        [r.mean_nrmse for r in results],
                                        min_count=1)]
    report = _report_dir(args)
    if report:
        write_metrics_csv(report / "timestep.csv", reports, config=_echo(args))
        save_loss_curves(report / "training.png", curves)
        pred, truth = predict_rollout(results[-1], args.kind, samples[0],
                                      horizon=args.horizon)
        save_field_comparison(report / "rollout.png",
                              {"truth": truth, "prediction": pred,
                               "error": pred - truth})


def cmd_superres(args):
    samples = read_dataset(args.data)
    variant = CondSource(args.variant)
    mae = _load_mae(args)
    if mae is None and variant in (CondSource.FROZEN_MAE, CondSource.FINETUNED_MAE):
        raise SystemExit(f"--variant {variant.value} requires --ckpt")
    model_vals, interp_vals = [], []
    last = None
    for seed in range(args.seeds):
        last = train_sr(samples, factor=args.factor, t_window=args.window,
                        variant=variant, mae=mae, epochs=args.epochs,
                        batch_size=args.batch_size, lr=args.lr, seed=seed)
        model_vals.append(last.val_rmse)
        interp_vals.append(last.baseline_rmse)
        log.info("seed %d: model rmse %.5f vs interpolation %.5f", seed,
                 last.val_rmse, last.baseline_rmse)
    reports = [
        MetricReport.from_values("superres-rmse", variant.value, model_vals,
                                 min_count=1),
        MetricReport.from_values("superres-rmse", "interpolation", interp_vals,
                                 min_count=1),
    ]
    report = _report_dir(args)
    if report:
        write_metrics_csv(report / "superres.csv", reports, config=_echo(args))
        save_bar_chart(report / "superres.png", reports,
                       title=f"{args.factor}x super-resolution")
        truth = samples[0].values[:args.window]
        low = coarsen(truth, args.factor, samples[0].grid.is_2d)
        target = truth.shape[1:] if samples[0].grid.is_2d else truth.shape[1]
        lifted = sr_forward(last.params, last.cfg,
                            last.standardizer.apply(low)[None], target,
                            interp_only=True)
        refined = sr_forward(last.params, last.cfg,
                             last.standardizer.apply(low)[None], target)
        save_field_comparison(report / "fields.png", {
            "truth": truth,
            "interpolation": last.standardizer.invert(lifted.data[0]),
            "refined": last.standardizer.invert(refined.data[0]),
        })


def cmd_latent(args):
    samples = read_dataset(args.data)
    params, cfg, std, _, _ = load_checkpoint(args.ckpt)
    wa, wb = (float(w) for w in args.weights.split(","))
    windows = _first_windows(samples, cfg.time_window)
    report = _report_dir(args)

    mixed = latent_arithmetic(params, cfg, windows[0], windows[1], (wa, wb),
                              standardizer=std)
    if report:
        save_field_comparison(report / "arithmetic.png", {
            f"a (w={wa})": windows[0], f"b (w={wb})": windows[1],
            "decoded sum": mixed,
        })

    # same-trajectory windows share coefficients; consecutive windows probe
    # temporal coherence
    step = cfg.time_window
    sim_groups, temporal = [], []
    for s in samples[:max(2, args.count)]:
        starts = range(0, s.grid.nt - step, step)
        wins = [s.values[t:t + step] for t in starts]
        if len(wins) >= 2:
            sim_groups.append(wins[:4])
            temporal.append((wins[0], wins[1]))
    data = ComparisonData(similarity=sim_groups, temporal=temporal)
    reports = embedding_comparison(
        {"mae": cls_encoder(params, cfg, standardizer=std)}, data, d=args.pca_dim)
    for r in reports:
        log.info("%s: %.4f +- %.4f", r.task, r.mean, r.std)
    if report:
        write_metrics_csv(report / "latent.csv", reports, config=_echo(args))
        save_bar_chart(report / "distances.png", reports,
                       title="embedding distances (per-model PCA fit)")


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON file of option defaults for this subcommand")
    common.add_argument("--deterministic", action="store_true",
                        help="single-worker, bit-reproducible runs")
    common.add_argument("--report-dir", type=Path, default=None,
                        help="write CSV metrics and figures here")

    parser = argparse.ArgumentParser(prog="pdemae")
    parser.subcommands = {}
    _sub = parser.add_subparsers(dest="command", required=True)

    def sub_parser(name, **kwargs):
        p = _sub.add_parser(name, parents=[common], **kwargs)
        parser.subcommands[name] = p
        return p

    p = sub_parser("generate",
                   help="solve PDE trajectories into a dataset container")
    p.add_argument("--family", required=True,
                   help="comma-separated family names, e.g. kdv_burgers,heat_1d")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--nx", type=int, default=None,
                   help="downsample storage resolution")
    p.add_argument("--bc", choices=[b.value for b in Boundary], default=None)
    p.set_defaults(func=cmd_generate)

    p = sub_parser("augment",
                       help="apply symmetry augmentations to a dataset")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--probability", type=float, default=0.5)
    p.add_argument("--window", type=int, default=20)
    p.set_defaults(func=cmd_augment)

    p = sub_parser("pretrain",
                       help="train the masked autoencoder")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--heads", type=int, default=8)
    p.add_argument("--decoder-dim", type=int, default=32)
    p.add_argument("--decoder-depth", type=int, default=2)
    p.add_argument("--patch", default="5,5", help="comma-separated extents (t,x[,y])")
    p.add_argument("--mask-ratio", type=float, default=0.75)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--strategy", choices=[s.value for s in Strategy],
                   default=Strategy.NONE.value)
    p.add_argument("--masked-loss-only", action="store_true")
    p.add_argument("--augment-prob", type=float, default=0.0)
    p.set_defaults(func=cmd_pretrain)

    p = sub_parser("probe",
                       help="regression/classification probes on the CLS embedding")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("--target", required=True,
                   help="coefficient name, or family/bc/resolution")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--finetune", action="store_true")
    p.set_defaults(func=cmd_probe)

    p = sub_parser("timestep",
                       help="train an autoregressive surrogate")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--variant", choices=[c.value for c in CondSource],
                   default=CondSource.NONE.value)
    p.add_argument("--ckpt", type=Path, default=None)
    p.add_argument("--kind", choices=["fno", "unet"], default="fno")
    p.add_argument("--t-in", type=int, default=20)
    p.add_argument("--chunk", type=int, default=None)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=8e-4)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--no-pushforward", action="store_true")
    p.set_defaults(func=cmd_timestep)

    p = sub_parser("superres",
                       help="train the super-resolution pipeline")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--variant", choices=[c.value for c in CondSource],
                   default=CondSource.NONE.value)
    p.add_argument("--ckpt", type=Path, default=None)
    p.add_argument("--factor", type=int, default=2)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=8e-4)
    p.add_argument("--seeds", type=int, default=3)
    p.set_defaults(func=cmd_superres)

    p = sub_parser("latent",
                       help="latent arithmetic and embedding distances")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("--weights", default="0.5,0.5")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--pca-dim", type=int, default=16)
    p.set_defaults(func=cmd_latent)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        with open(args.config) as f:
            overrides = json.load(f)
        unknown = set(overrides) - set(vars(args))
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        # subparsers parse into a fresh namespace, so the defaults must be
        # planted on the chosen subcommand's parser, not on the root
        parser.subcommands[args.command].set_defaults(**overrides)
        args = parser.parse_args(argv)
    if args.deterministic:
        os.environ["PDEMAE_WORKERS"] = "1"
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
