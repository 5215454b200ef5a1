"""Strict parsing of the YAML experiment config document.

Unknown keys anywhere in the document are rejected so a typoed
hyperparameter can never silently fall back to a default.
"""

from dataclasses import dataclass
from typing import Optional

import yaml

from .noise import NOISE_KINDS, NoiseSpec
from .selection import GammaPolicy

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "METHODS"]

METHODS = (
    "standard",
    "bootstrap",
    "forward",
    "decouple",
    "self_paced",
    "co_teaching",
    "co_distillation",
    "slc",
    "clc",
)

_MISSING = object()


class ConfigError(ValueError):
    pass


def _mapping(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(d, allowed, path):
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _get(d, key, path, kind, default=_MISSING):
    if key not in d or d[key] is None:
        if default is _MISSING:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return default
    value = d[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    bad_type = not isinstance(value, kind)
    bad_bool = isinstance(value, bool) and kind is not bool  # bool is an int subclass
    if bad_type or bad_bool:
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")
    return value


@dataclass(frozen=True)
class DatasetConfig:
    kind: str
    classes: int = 4
    per_class: int = 250
    dim: int = 10
    separation: float = 6.0
    noise_std: float = 0.2
    images: Optional[str] = None
    labels: Optional[str] = None
    max_n: Optional[int] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    test_max_n: Optional[int] = None
    test_fraction: float = 0.25


@dataclass(frozen=True)
class TrainSettings:
    epochs: int
    seed: int = 0
    batch_size: int = 128
    learning_rate: float = 0.001
    warm_up_epochs: int = 10
    alpha: float = 0.1
    beta: float = 0.5
    gamma: GammaPolicy = GammaPolicy("auto")
    hard_pseudo_labels: bool = False
    gamma_from_both: bool = False
    bootstrap_kappa: float = 0.95
    codistill_lambda: float = 1.0
    schedule_epochs: int = 10


@dataclass(frozen=True)
class OutputConfig:
    dir: str
    last_k: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    noise: Optional[NoiseSpec]
    method: str
    hidden_dims: tuple
    train: TrainSettings
    output: OutputConfig

    def to_dict(self):
        """Plain-dict echo of the resolved configuration (for summary.json)."""
        d = {
            "dataset": {"kind": self.dataset.kind},
            "noise": None,
            "method": self.method,
            "model": {"hidden_dims": list(self.hidden_dims)},
            "train": {
                "epochs": self.train.epochs,
                "seed": self.train.seed,
                "batch_size": self.train.batch_size,
                "learning_rate": self.train.learning_rate,
                "warm_up_epochs": self.train.warm_up_epochs,
                "alpha": self.train.alpha,
                "beta": self.train.beta,
                "gamma": "auto" if self.train.gamma.mode == "auto" else self.train.gamma.value,
                "hard_pseudo_labels": self.train.hard_pseudo_labels,
                "gamma_from_both": self.train.gamma_from_both,
                "bootstrap_kappa": self.train.bootstrap_kappa,
                "codistill_lambda": self.train.codistill_lambda,
                "schedule_epochs": self.train.schedule_epochs,
            },
            "output": {"dir": self.output.dir, "last_k": self.output.last_k},
        }
        ds = self.dataset
        if ds.kind == "blobs":
            d["dataset"].update(
                classes=ds.classes, per_class=ds.per_class, dim=ds.dim,
                separation=ds.separation, test_fraction=ds.test_fraction,
            )
        elif ds.kind == "rings":
            d["dataset"].update(
                classes=ds.classes, per_class=ds.per_class, noise_std=ds.noise_std,
                test_fraction=ds.test_fraction,
            )
        else:
            d["dataset"].update(
                images=ds.images, labels=ds.labels, max_n=ds.max_n,
                test_images=ds.test_images, test_labels=ds.test_labels,
                test_max_n=ds.test_max_n, test_fraction=ds.test_fraction,
            )
        if self.noise is not None:
            d["noise"] = {
                "kind": self.noise.kind,
                "ratio": self.noise.ratio,
                "pairs": [list(p) for p in self.noise.pairs] if self.noise.pairs else None,
                "seed": self.noise.seed,
            }
        return d


def _parse_dataset(d):
    d = _mapping(d, "dataset")
    kind = _get(d, "kind", "dataset", str)
    if kind == "blobs":
        _check_keys(d, {"kind", "classes", "per_class", "dim", "separation", "test_fraction"}, "dataset")
        return DatasetConfig(
            kind=kind,
            classes=_get(d, "classes", "dataset", int, 4),
            per_class=_get(d, "per_class", "dataset", int, 250),
            dim=_get(d, "dim", "dataset", int, 10),
            separation=_get(d, "separation", "dataset", float, 6.0),
            test_fraction=_get(d, "test_fraction", "dataset", float, 0.25),
        )
    if kind == "rings":
        _check_keys(d, {"kind", "classes", "per_class", "noise_std", "test_fraction"}, "dataset")
        return DatasetConfig(
            kind=kind,
            classes=_get(d, "classes", "dataset", int, 4),
            per_class=_get(d, "per_class", "dataset", int, 250),
            noise_std=_get(d, "noise_std", "dataset", float, 0.2),
            test_fraction=_get(d, "test_fraction", "dataset", float, 0.25),
        )
    if kind == "idx":
        _check_keys(
            d,
            {"kind", "images", "labels", "max_n", "test_images", "test_labels",
             "test_max_n", "test_fraction"},
            "dataset",
        )
        if ("test_images" in d) != ("test_labels" in d):
            raise ConfigError("dataset: test_images and test_labels must be given together")
        return DatasetConfig(
            kind=kind,
            images=_get(d, "images", "dataset", str),
            labels=_get(d, "labels", "dataset", str),
            max_n=_get(d, "max_n", "dataset", int, None),
            test_images=_get(d, "test_images", "dataset", str, None),
            test_labels=_get(d, "test_labels", "dataset", str, None),
            test_max_n=_get(d, "test_max_n", "dataset", int, None),
            test_fraction=_get(d, "test_fraction", "dataset", float, 0.25),
        )
    raise ConfigError(f"dataset.kind: expected blobs|rings|idx, got {kind!r}")


def _parse_noise(d):
    if d is None:
        return None
    d = _mapping(d, "noise")
    _check_keys(d, {"kind", "ratio", "pairs", "seed"}, "noise")
    kind = _get(d, "kind", "noise", str)
    if kind not in NOISE_KINDS:
        raise ConfigError(f"noise.kind: expected one of {NOISE_KINDS}, got {kind!r}")
    pairs = _get(d, "pairs", "noise", list, None)
    if pairs is not None:
        try:
            pairs = tuple((int(s), int(dd)) for s, dd in pairs)
        except (TypeError, ValueError):
            raise ConfigError("noise.pairs: expected a list of [source, destination] pairs")
    try:
        return NoiseSpec(
            kind=kind,
            ratio=_get(d, "ratio", "noise", float),
            pairs=pairs,
            seed=_get(d, "seed", "noise", int, None),
        )
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}")


def _parse_gamma(value):
    if value == "auto":
        return GammaPolicy("auto")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        try:
            return GammaPolicy("fixed", float(value))
        except ValueError as exc:
            raise ConfigError(f"train.gamma: {exc}")
    raise ConfigError(f'train.gamma: expected "auto" or a number, got {value!r}')


def _parse_train(d):
    d = _mapping(d, "train")
    _check_keys(
        d,
        {"epochs", "seed", "batch_size", "learning_rate", "warm_up_epochs", "alpha",
         "beta", "gamma", "hard_pseudo_labels", "gamma_from_both", "bootstrap_kappa",
         "codistill_lambda", "schedule_epochs"},
        "train",
    )
    t = TrainSettings(
        epochs=_get(d, "epochs", "train", int),
        seed=_get(d, "seed", "train", int, 0),
        batch_size=_get(d, "batch_size", "train", int, 128),
        learning_rate=_get(d, "learning_rate", "train", float, 0.001),
        warm_up_epochs=_get(d, "warm_up_epochs", "train", int, 10),
        alpha=_get(d, "alpha", "train", float, 0.1),
        beta=_get(d, "beta", "train", float, 0.5),
        gamma=_parse_gamma(d.get("gamma", "auto")),
        hard_pseudo_labels=_get(d, "hard_pseudo_labels", "train", bool, False),
        gamma_from_both=_get(d, "gamma_from_both", "train", bool, False),
        bootstrap_kappa=_get(d, "bootstrap_kappa", "train", float, 0.95),
        codistill_lambda=_get(d, "codistill_lambda", "train", float, 1.0),
        schedule_epochs=_get(d, "schedule_epochs", "train", int, 10),
    )
    if t.epochs < 1:
        raise ConfigError("train.epochs: must be >= 1")
    if not (0 <= t.warm_up_epochs <= t.epochs):
        raise ConfigError("train.warm_up_epochs: must be in [0, epochs]")
    if t.batch_size < 1:
        raise ConfigError("train.batch_size: must be >= 1")
    if t.learning_rate <= 0:
        raise ConfigError("train.learning_rate: must be positive")
    if t.alpha < 0 or t.beta < 0:
        raise ConfigError("train.alpha/beta: must be non-negative")
    return t


def _parse_model(d):
    if d is None:
        return (64, 64)
    d = _mapping(d, "model")
    _check_keys(d, {"hidden_dims"}, "model")
    dims = _get(d, "hidden_dims", "model", list, [64, 64])
    if not dims or not all(isinstance(x, int) and not isinstance(x, bool) and x > 0 for x in dims):
        raise ConfigError("model.hidden_dims: expected a non-empty list of positive ints")
    return tuple(dims)


def _parse_output(d):
    d = _mapping(d, "output")
    _check_keys(d, {"dir", "last_k"}, "output")
    out = OutputConfig(
        dir=_get(d, "dir", "output", str),
        last_k=_get(d, "last_k", "output", int, 10),
    )
    if out.last_k < 1:
        raise ConfigError("output.last_k: must be >= 1")
    return out


def parse_config(doc) -> ExperimentConfig:
    doc = _mapping(doc, "config")
    _check_keys(doc, {"dataset", "noise", "method", "model", "train", "output"}, "config")
    for key in ("dataset", "method", "train", "output"):
        if key not in doc:
            raise ConfigError(f"config: missing required section {key!r}")
    method = doc["method"]
    if method not in METHODS:
        raise ConfigError(f"method: expected one of {METHODS}, got {method!r}")
    cfg = ExperimentConfig(
        dataset=_parse_dataset(doc["dataset"]),
        noise=_parse_noise(doc.get("noise")),
        method=method,
        hidden_dims=_parse_model(doc.get("model")),
        train=_parse_train(doc["train"]),
        output=_parse_output(doc["output"]),
    )
    if cfg.method in ("clc", "slc") and not (cfg.train.warm_up_epochs < cfg.train.epochs):
        raise ConfigError("train.warm_up_epochs: must be < epochs for clc/slc")
    if cfg.output.last_k > cfg.train.epochs:
        raise ConfigError("output.last_k: cannot exceed train.epochs")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}")
    return parse_config(doc)
