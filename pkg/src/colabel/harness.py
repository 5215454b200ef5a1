"""Experiment runner: config in, metrics.csv / summary.json / transition.json out.

Identical config and seed produce a byte-identical metrics.csv.
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import ExperimentConfig, load_config
from .data import IdxFormatError, gen_gaussian_blobs, gen_rings, load_idx, train_test_split
from .metrics import summarize, write_metrics_csv
from .noise import build_transition, confusion_matrix, inject_noise, row_normalize
from .rng import SeededRng
from .train.baselines import (
    BaselineConfig,
    train_bootstrap,
    train_codistillation,
    train_coteaching,
    train_decouple,
    train_forward,
    train_self_paced,
    train_standard,
)
from .train.clc import ClcConfig, _run as _run_clc
from .train.common import MetricsRecorder

__all__ = ["DatasetError", "OutputError", "run_experiment", "sweep"]


class DatasetError(Exception):
    pass


class OutputError(Exception):
    pass


def _build_datasets(cfg: ExperimentConfig):
    ds = cfg.dataset
    seed = cfg.train.seed
    try:
        if ds.kind == "blobs":
            full = gen_gaussian_blobs(
                ds.classes, ds.per_class, ds.dim, ds.separation, SeededRng(seed, "data/gen")
            )
            return train_test_split(full, ds.test_fraction, SeededRng(seed, "data/split"))
        if ds.kind == "rings":
            full = gen_rings(ds.classes, ds.per_class, ds.noise_std, SeededRng(seed, "data/gen"))
            return train_test_split(full, ds.test_fraction, SeededRng(seed, "data/split"))
        train = load_idx(ds.images, ds.labels, ds.max_n)
        if ds.test_images is not None:
            test = load_idx(ds.test_images, ds.test_labels, ds.test_max_n)
            if test.n_classes != train.n_classes:
                raise IdxFormatError(
                    f"class count mismatch: train {train.n_classes} vs test {test.n_classes}"
                )
            return train, test
        return train_test_split(train, ds.test_fraction, SeededRng(seed, "data/split"))
    except (IdxFormatError, OSError, ValueError) as exc:
        raise DatasetError(str(exc)) from exc


def _apply_noise(cfg: ExperimentConfig, train_ds):
    if cfg.noise is None:
        return train_ds, np.eye(train_ds.n_classes)
    transition = build_transition(cfg.noise, train_ds.n_classes)
    seed = cfg.noise.seed if cfg.noise.seed is not None else cfg.train.seed
    noisy = inject_noise(train_ds.clean_labels, transition, SeededRng(seed, "noise/inject"))
    return train_ds.with_noisy_labels(noisy), transition


def _dispatch(cfg: ExperimentConfig, train_ds, test_ds, transition):
    """Run the configured method; returns (history, nets dict, resolved gamma)."""
    t = cfg.train
    if cfg.method in ("clc", "slc"):
        ccfg = ClcConfig(
            total_epochs=t.epochs,
            seed=t.seed,
            alpha=t.alpha,
            beta=t.beta,
            gamma_policy=t.gamma,
            warm_up_epochs=t.warm_up_epochs,
            batch_size=t.batch_size,
            learning_rate=t.learning_rate,
            hidden_dims=cfg.hidden_dims,
            hard_pseudo_labels=t.hard_pseudo_labels,
            gamma_from_both=t.gamma_from_both,
        )
        state, recorder = _run_clc(train_ds, test_ds, ccfg, dual=cfg.method == "clc")
        return recorder.history, {"f": state.f, "g": state.g}, state.gamma
    noise_ratio = cfg.noise.ratio if cfg.noise is not None else 0.0
    bcfg = BaselineConfig(
        method=cfg.method,
        epochs=t.epochs,
        seed=t.seed,
        batch_size=t.batch_size,
        learning_rate=t.learning_rate,
        warm_up_epochs=t.warm_up_epochs,
        hidden_dims=cfg.hidden_dims,
        bootstrap_kappa=t.bootstrap_kappa,
        codistill_lambda=t.codistill_lambda,
        noise_ratio=noise_ratio,
        schedule_epochs=t.schedule_epochs,
    )
    if cfg.method == "standard":
        history, net = train_standard(train_ds, test_ds, bcfg)
        return history, {"f": net, "g": None}, None
    if cfg.method == "bootstrap":
        history, net = train_bootstrap(train_ds, test_ds, bcfg)
        return history, {"f": net, "g": None}, None
    if cfg.method == "forward":
        history, net = train_forward(train_ds, test_ds, bcfg, transition)
        return history, {"f": net, "g": None}, None
    if cfg.method == "self_paced":
        history, net = train_self_paced(train_ds, test_ds, bcfg)
        return history, {"f": net, "g": None}, None
    if cfg.method == "decouple":
        history, nets = train_decouple(train_ds, test_ds, bcfg)
        return history, {"f": nets[0], "g": nets[1]}, None
    if cfg.method == "co_teaching":
        history, nets = train_coteaching(train_ds, test_ds, bcfg)
        return history, {"f": nets[0], "g": nets[1]}, None
    history, nets = train_codistillation(train_ds, test_ds, bcfg)
    return history, {"f": nets[0], "g": nets[1]}, None


def _corrected_labels(cfg, train_ds, test_ds, nets, gamma):
    """Final effective supervision labels for network f."""
    if cfg.method in ("clc", "slc") and gamma is not None:
        recorder = MetricsRecorder(train_ds, test_ds)
        partner = nets["g"] if cfg.method == "clc" else nets["f"]
        return recorder.corrected_labels(nets["f"], partner, gamma)
    return train_ds.noisy_labels.copy()


def run_experiment(config_path, out_dir=None, seed=None) -> Path:
    """Execute one config; returns the output directory it wrote."""
    cfg = load_config(config_path)
    if seed is not None:
        cfg = replace(cfg, train=replace(cfg.train, seed=int(seed)))
    out = Path(out_dir) if out_dir is not None else Path(cfg.output.dir)

    train_ds, test_ds = _build_datasets(cfg)
    train_ds, transition = _apply_noise(cfg, train_ds)
    history, nets, gamma = _dispatch(cfg, train_ds, test_ds, transition)

    try:
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out / "metrics.csv", history, cfg.method)

        corrected = _corrected_labels(cfg, train_ds, test_ds, nets, gamma)
        vs_clean = confusion_matrix(corrected, train_ds.clean_labels, train_ds.n_classes)
        vs_noisy = confusion_matrix(corrected, train_ds.noisy_labels, train_ds.n_classes)
        summary = {
            "version": __version__,
            "backend": kernels.BACKEND,
            "method": cfg.method,
            "config": cfg.to_dict(),
            "resolved_gamma": gamma,
            "summary": summarize(history, cfg.output.last_k),
            "corrected_vs_clean": vs_clean.tolist(),
            "corrected_vs_clean_normalized": row_normalize(vs_clean).tolist(),
            "corrected_vs_noisy": vs_noisy.tolist(),
            "corrected_vs_noisy_normalized": row_normalize(vs_noisy).tolist(),
        }
        with open(out / "summary.json", "w") as f:
            json.dump(summary, f, indent=2)
            f.write("\n")

        noise_doc = {
            "kind": cfg.noise.kind if cfg.noise else "none",
            "ratio": cfg.noise.ratio if cfg.noise else 0.0,
            "pairs": [list(p) for p in cfg.noise.pairs] if cfg.noise and cfg.noise.pairs else None,
            "matrix": np.asarray(transition).tolist(),
        }
        with open(out / "transition.json", "w") as f:
            json.dump(noise_doc, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write results under {out}: {exc}") from exc
    return out


_SWEEP_COLUMNS = (
    "config",
    "method",
    "dataset_kind",
    "noise_kind",
    "noise_ratio",
    "seed",
    "epochs",
    "mean_test_accuracy",
    "mean_supervision_precision",
    "mean_n_selected",
    "mean_n_low_f",
    "mean_n_low_g",
    "resolved_gamma",
)


def sweep(config_dir, out_dir) -> Path:
    """Run every config in a directory; aggregate into comparison.csv."""
    config_dir = Path(config_dir)
    out = Path(out_dir)
    paths = sorted(list(config_dir.glob("*.yaml")) + list(config_dir.glob("*.yml")))
    rows = []
    for path in paths:
        run_out = out / path.stem
        run_experiment(path, out_dir=run_out)
        with open(run_out / "summary.json") as f:
            s = json.load(f)
        cfg = s["config"]
        noise = cfg.get("noise") or {}
        summary = s["summary"]

        def fmt(x):
            return "nan" if x is None else f"{float(x):.6f}"

        rows.append(
            [
                path.name,
                s["method"],
                cfg["dataset"]["kind"],
                noise.get("kind", "none"),
                fmt(noise.get("ratio", 0.0)),
                str(cfg["train"]["seed"]),
                str(cfg["train"]["epochs"]),
                fmt(summary["test_accuracy"]),
                fmt(summary["supervision_precision"]),
                fmt(summary["n_selected"]),
                fmt(summary["n_low_f"]),
                fmt(summary["n_low_g"]),
                fmt(s["resolved_gamma"]),
            ]
        )
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "comparison.csv", "w", newline="") as f:
            f.write(",".join(_SWEEP_COLUMNS) + "\n")
            for row in rows:
                f.write(",".join(row) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write sweep results under {out}: {exc}") from exc
    return out / "comparison.csv"
