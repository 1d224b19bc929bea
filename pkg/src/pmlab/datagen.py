"""Synthetic multi-label data and its corruption into partial-label form.

Each class owns a random unit "concept" direction in latent space; a sample is
positive for a class when its latent vector projects above a per-class
threshold. Thresholds are calibrated so the expected number of positives per
row matches ``avg_positives`` under an optional geometric head/tail skew.
Features are the latent vector plus isotropic Gaussian noise, so the classes
stay linearly separable in expectation and the dataset is learnable by a small
classifier.

Partial labels are produced by flipping each irrelevant label into a candidate
one independently with probability q.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from statistics import NormalDist

import numpy as np

from .numeric import split_rng


class DatasetFormatError(ValueError):
    """Raised when a dataset file is malformed or violates invariants."""


# Per-class positive rates above this are treated as a calibration failure.
_MAX_CLASS_RATE = 0.95


@dataclass(frozen=True)
class DatasetSpec:
    n_train: int
    n_test: int
    n_features: int
    n_classes: int
    avg_positives: float
    class_frequency_skew: float = 0.0
    concept_noise_std: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")
        if not (1 <= self.avg_positives < self.n_classes):
            raise ValueError(
                f"avg_positives must be in [1, n_classes), got {self.avg_positives}"
            )
        if self.class_frequency_skew < 0:
            raise ValueError("class_frequency_skew must be >= 0")
        if self.concept_noise_std < 0:
            raise ValueError("concept_noise_std must be >= 0")
        if self.n_train < 1 or self.n_test < 0:
            raise ValueError("n_train must be >= 1 and n_test >= 0")

    def class_rates(self) -> np.ndarray:
        """Per-class positive rates summing to avg_positives (geometric skew)."""
        k = np.arange(self.n_classes, dtype=np.float64)
        decay = np.exp(-self.class_frequency_skew * k)
        rates = self.avg_positives * decay / decay.sum()
        if rates.max() > _MAX_CLASS_RATE:
            raise ValueError(
                "cannot calibrate class rates: head-class positive rate "
                f"{rates.max():.3f} exceeds {_MAX_CLASS_RATE} "
                "(avg_positives too large for this skew)"
            )
        return rates


@dataclass
class MultiLabelDataset:
    features: np.ndarray  # (n, d) float64
    true_labels: np.ndarray  # (n, K) int {0,1}

    def validate(self) -> None:
        if self.features.ndim != 2 or self.true_labels.ndim != 2:
            raise ValueError("features and true_labels must be 2-D")
        if self.features.shape[0] != self.true_labels.shape[0]:
            raise ValueError("features/true_labels row count mismatch")
        y = self.true_labels
        if not np.isin(y, (0, 1)).all():
            raise ValueError("true_labels entries must be 0/1")
        if (y.sum(axis=1) < 1).any():
            raise ValueError("every row must have at least one positive label")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return self.true_labels.shape[1]


@dataclass
class PartialDataset:
    train: MultiLabelDataset
    candidates: np.ndarray  # (n, K) int {0,1}, superset of train.true_labels
    flip_rate: float
    test: MultiLabelDataset
    seed: int = 0
    spec: dict = field(default_factory=dict)

    def validate(self) -> None:
        self.train.validate()
        self.test.validate()
        if self.candidates.shape != self.train.true_labels.shape:
            raise ValueError("candidates shape must match true_labels")
        if not np.isin(self.candidates, (0, 1)).all():
            raise ValueError("candidates entries must be 0/1")
        if (self.candidates < self.train.true_labels).any():
            raise ValueError("every true label must be a candidate")
        if not (0 <= self.flip_rate < 1):
            raise ValueError(f"flip_rate must be in [0, 1), got {self.flip_rate}")


def _draw_labeled_split(
    n: int,
    spec: DatasetSpec,
    concepts: np.ndarray,
    thresholds: np.ndarray,
    rng_tag: str,
) -> MultiLabelDataset:
    d, K = spec.n_features, spec.n_classes
    z = np.empty((n, d))
    y = np.zeros((n, K), dtype=np.int64)
    pending = np.arange(n)
    round_ = 0
    # Rows with zero positives are re-drawn until every row has >= 1.
    while pending.size:
        rng = split_rng(spec.seed, rng_tag, round_)
        z_new = rng.standard_normal((pending.size, d))
        y_new = (z_new @ concepts.T > thresholds).astype(np.int64)
        z[pending] = z_new
        y[pending] = y_new
        pending = pending[y_new.sum(axis=1) == 0]
        round_ += 1
        if round_ > 10_000:
            raise ValueError("calibration failure: cannot draw rows with >= 1 positive")
    noise_rng = split_rng(spec.seed, rng_tag + "-noise")
    x = z + spec.concept_noise_std * noise_rng.standard_normal((n, d))
    return MultiLabelDataset(features=x, true_labels=y)


def generate(spec: DatasetSpec) -> tuple[MultiLabelDataset, MultiLabelDataset]:
    """Generate (train, test) splits sharing the same class concepts."""
    spec.validate()
    rates = spec.class_rates()
    d, K = spec.n_features, spec.n_classes

    concept_rng = split_rng(spec.seed, "concepts")
    concepts = concept_rng.standard_normal((K, d))
    concepts /= np.linalg.norm(concepts, axis=1, keepdims=True)
    # w_j . z is standard normal for unit w_j, so the per-class threshold is
    # just the normal quantile of the complement rate.
    nd = NormalDist()
    thresholds = np.array([nd.inv_cdf(1.0 - r) for r in rates])

    train = _draw_labeled_split(spec.n_train, spec, concepts, thresholds, "train")
    test = _draw_labeled_split(max(spec.n_test, 1), spec, concepts, thresholds, "test")
    if spec.n_test == 0:
        test = MultiLabelDataset(test.features[:0], test.true_labels[:0])
    return train, test


def corrupt(dataset: MultiLabelDataset, q: float, seed: int) -> PartialDataset:
    """Flip each irrelevant label into a candidate with probability q."""
    if not (0 <= q < 1):
        raise ValueError(f"flip rate q must be in [0, 1), got {q}")
    dataset.validate()
    rng = split_rng(seed, "flips")
    y = dataset.true_labels
    flips = (rng.random(y.shape) < q).astype(np.int64)
    candidates = np.maximum(y, flips)
    # placeholder test split; callers building from generate() overwrite it
    empty = MultiLabelDataset(dataset.features[:0], dataset.true_labels[:0])
    return PartialDataset(
        train=dataset, candidates=candidates, flip_rate=q, test=empty, seed=seed
    )


def make_partial_dataset(spec: DatasetSpec, q: float) -> PartialDataset:
    """generate + corrupt as one deterministic pipeline keyed by (spec, q)."""
    train, test = generate(spec)
    p = corrupt(train, q, seed=spec.seed)
    p.test = test
    p.spec = asdict(spec)
    return p


def noise_rate_per_class(p: PartialDataset) -> np.ndarray:
    """Fraction of each class's candidates that are false positives."""
    y = p.train.true_labels
    cand = p.candidates
    false_pos = ((cand == 1) & (y == 0)).sum(axis=0)
    observed = np.maximum(1, cand.sum(axis=0))
    return false_pos / observed


def save(p: PartialDataset, path) -> None:
    p.validate()
    doc = {
        "n": int(p.train.n),
        "d": int(p.train.d),
        "K": int(p.train.n_classes),
        "q": float(p.flip_rate),
        "features": p.train.features.tolist(),
        "true_labels": p.train.true_labels.tolist(),
        "candidates": p.candidates.tolist(),
        "test_features": p.test.features.tolist(),
        "test_true_labels": p.test.true_labels.tolist(),
        "seed": int(p.seed),
        "spec": p.spec,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _require(doc: dict, key: str):
    if key not in doc:
        raise DatasetFormatError(f"dataset file missing field {key!r}")
    return doc[key]


def load(path) -> PartialDataset:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"malformed dataset file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DatasetFormatError(f"dataset file {path} must hold a JSON object")

    features = np.asarray(_require(doc, "features"), dtype=np.float64)
    true_labels = np.asarray(_require(doc, "true_labels"), dtype=np.int64)
    candidates = np.asarray(_require(doc, "candidates"), dtype=np.int64)
    test_features = np.asarray(_require(doc, "test_features"), dtype=np.float64)
    test_true = np.asarray(_require(doc, "test_true_labels"), dtype=np.int64)
    n, d, K = _require(doc, "n"), _require(doc, "d"), _require(doc, "K")
    if features.shape != (n, d):
        raise DatasetFormatError(
            f"field 'features': expected shape {(n, d)}, got {features.shape}"
        )
    if true_labels.shape != (n, K):
        raise DatasetFormatError(
            f"field 'true_labels': expected shape {(n, K)}, got {true_labels.shape}"
        )
    if candidates.shape != (n, K):
        raise DatasetFormatError(
            f"field 'candidates': expected shape {(n, K)}, got {candidates.shape}"
        )
    p = PartialDataset(
        train=MultiLabelDataset(features, true_labels),
        candidates=candidates,
        flip_rate=float(_require(doc, "q")),
        test=MultiLabelDataset(test_features, test_true),
        seed=int(doc.get("seed", 0)),
        spec=doc.get("spec", {}),
    )
    try:
        p.validate()
    except ValueError as exc:
        raise DatasetFormatError(f"invalid dataset file {path}: {exc}") from exc
    return p
