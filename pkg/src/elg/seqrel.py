"""Supervised recognition of sequential relations and their direction.

Two binary tasks over annotated event pairs: does an ordered relation hold
(relation task, positive/negative), and which way does it run (direction
task, forward/backward, defined only for positive pairs). Pairs are oriented
so the A-before-B count is at least the B-before-A count, which makes the
constant-forward baseline meaningful.

Evaluation is stratified k-fold cross-validation repeated with different
shuffles. Everything fit from data (oversampling, standardization, the PMI
threshold, model weights) sees training folds only; `fold_callback` exposes
the exact index sets each fold used so tests can assert the separation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .classifiers import Standardizer, make_model
from .embeddings import EmbeddingTable
from .errors import DataError
from .pairstats import (
    GROUP_ORDER,
    CoOccurrenceContext,
    FeatureVector,
    PairCounts,
    build_feature_vector,
)

RELATION_LABELS = ("positive", "negative")
DIRECTION_LABELS = ("forward", "backward")
POSITIVE_BY_TASK = {"relation": "positive", "direction": "forward"}

# index of the event-vs-event PMI inside the pmi feature block
A2_INDEX = 1


@dataclass(frozen=True)
class LabeledPair:
    pair: tuple[str, str]
    features: FeatureVector
    relation_label: str
    direction_label: str | None = None

    def __post_init__(self) -> None:
        if self.relation_label not in RELATION_LABELS:
            raise DataError(f"bad relation label {self.relation_label!r}")
        if (self.direction_label is not None) != (self.relation_label == "positive"):
            raise DataError(
                f"pair {self.pair}: direction label must be present exactly for positives"
            )
        if self.direction_label is not None and self.direction_label not in DIRECTION_LABELS:
            raise DataError(f"bad direction label {self.direction_label!r}")


def task_label(pair: LabeledPair, task: str) -> str:
    if task == "relation":
        return pair.relation_label
    if task == "direction":
        if pair.direction_label is None:
            raise DataError(f"pair {pair.pair} has no direction label")
        return pair.direction_label
    raise ValueError(f"unknown task {task!r}")


def direction_subset(dataset: Sequence[LabeledPair]) -> list[LabeledPair]:
    """Positive pairs only; the direction task is undefined elsewhere."""
    return [p for p in dataset if p.relation_label == "positive"]


@dataclass
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    fold_values: list[dict]
    repeats: int


def _harmonic(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p > 0 and r > 0 else 0.0


def binary_metrics(y_true: Sequence[str], y_pred: Sequence[str], positive: str) -> dict:
    """Accuracy/precision/recall/F1 as percentages; empty denominators give 0."""
    if len(y_true) != len(y_pred):
        raise ValueError("prediction/label length mismatch")
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if p == positive:
            if t == positive:
                tp += 1
            else:
                fp += 1
        else:
            if t == positive:
                fn += 1
            else:
                tn += 1
    n = len(y_true)
    accuracy = 100.0 * (tp + tn) / n if n else 0.0
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    return {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": _harmonic(precision, recall),
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
    }


def pmi_threshold_baseline(pairs: Sequence[LabeledPair], threshold: float) -> list[str]:
    """Positive whenever the event-pair PMI clears the threshold."""
    return [
        "positive" if p.features.pmi[A2_INDEX] >= threshold else "negative" for p in pairs
    ]


def fit_pmi_threshold(pairs: Sequence[LabeledPair]) -> float:
    """Training-accuracy-maximizing cut over observed PMI values.

    Candidates are -inf (all positive), each observed value, and +inf (all
    negative); ties keep the smallest candidate.
    """
    scores = sorted({float(p.features.pmi[A2_INDEX]) for p in pairs})
    labels = [p.relation_label for p in pairs]
    best_t = float("-inf")
    best_acc = -1.0
    for cand in [float("-inf"), *scores, float("inf")]:
        preds = pmi_threshold_baseline(pairs, cand)
        acc = sum(1 for t, p in zip(labels, preds) if t == p) / len(labels)
        if acc > best_acc:
            best_acc = acc
            best_t = cand
    return best_t


def preceding_assumption_baseline(pairs: Sequence[LabeledPair]) -> list[str]:
    """Constant forward: pairs are oriented so forward is the frequent order."""
    return ["forward"] * len(pairs)


def oversample(
    train: Sequence[LabeledPair], seed: int, task: str = "relation"
) -> list[LabeledPair]:
    """Resample the minority class with replacement until classes balance."""
    idx = _oversample_indices([task_label(p, task) for p in train], np.random.default_rng(seed))
    return [train[i] for i in idx]


def _oversample_indices(labels: Sequence[str], rng: np.random.Generator) -> list[int]:
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    if len(by_class) < 2:
        raise ValueError("training data contains a single class; cannot balance")
    if len(by_class) > 2:
        raise ValueError("binary tasks only")
    sizes = {lab: len(ix) for lab, ix in by_class.items()}
    minority = min(sorted(by_class), key=lambda lab: sizes[lab])
    need = max(sizes.values()) - sizes[minority]
    out = list(range(len(labels)))
    if need:
        pool = by_class[minority]
        out.extend(pool[j] for j in rng.integers(0, len(pool), size=need))
    return out


def _stratified_folds(
    labels: Sequence[str], folds: int, rng: np.random.Generator
) -> list[list[int]]:
    """Deal shuffled per-class runs round-robin; fold sizes differ by at most 1
    overall and within each class."""
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    stream: list[int] = []
    for lab in sorted(by_class):
        members = by_class[lab]
        order = rng.permutation(len(members))
        stream.extend(members[j] for j in order)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    for pos, i in enumerate(stream):
        buckets[pos % folds].append(i)
    return buckets


def _fold_seed(seed: int, repeat: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, repeat, fold]).generate_state(1)[0])


def cross_validate(
    kind: str,
    dataset: Sequence[LabeledPair],
    folds: int = 5,
    repeats: int = 10,
    mask: Iterable[str] = GROUP_ORDER,
    seed: int = 0,
    task: str = "relation",
    fold_callback: Callable[[dict], None] | None = None,
) -> EvalMetrics:
    """Repeated stratified cross-validation of one classifier or baseline.

    kind: nb | lr | mlp | svm | pmi | preceding. Baselines skip oversampling
    and standardization; `pmi` fits its threshold on the raw training fold.
    """
    if len(dataset) < folds:
        raise ValueError(f"dataset of {len(dataset)} pairs cannot fill {folds} folds")
    mask = tuple(g for g in GROUP_ORDER if g in set(mask))
    labels = [task_label(p, task) for p in dataset]
    positive = POSITIVE_BY_TASK[task]
    fold_values: list[dict] = []
    for repeat in range(repeats):
        buckets = _stratified_folds(labels, folds, np.random.default_rng([seed, repeat]))
        for fold in range(folds):
            test_idx = buckets[fold]
            train_idx = [i for f, b in enumerate(buckets) if f != fold for i in b]
            run_seed = _fold_seed(seed, repeat, fold)
            y_test = [labels[i] for i in test_idx]
            info: dict = {
                "repeat": repeat,
                "fold": fold,
                "train_indices": list(train_idx),
                "test_indices": list(test_idx),
                "fitted_indices": list(train_idx),
            }
            if kind == "preceding":
                preds = ["forward"] * len(test_idx)
            elif kind == "pmi":
                threshold = fit_pmi_threshold([dataset[i] for i in train_idx])
                preds = pmi_threshold_baseline([dataset[i] for i in test_idx], threshold)
                info["threshold"] = threshold
            else:
                sampled = _oversample_indices(
                    [labels[i] for i in train_idx], np.random.default_rng(run_seed)
                )
                fit_idx = [train_idx[j] for j in sampled]
                x_train = np.stack([dataset[i].features.as_array(mask) for i in fit_idx])
                y_train = np.array([labels[i] == positive for i in fit_idx], dtype=int)
                x_test = np.stack([dataset[i].features.as_array(mask) for i in test_idx])
                model = make_model(kind, seed=run_seed)
                if kind != "nb":
                    scaler = Standardizer().fit(x_train)
                    x_train = scaler.transform(x_train)
                    x_test = scaler.transform(x_test)
                    info["standardizer_mean"] = scaler.mean
                model.fit(x_train, y_train)
                raw = model.predict(x_test)
                neg = DIRECTION_LABELS[1] if task == "direction" else RELATION_LABELS[1]
                preds = [positive if v == 1 else neg for v in raw]
                info["fitted_indices"] = fit_idx
            fold_values.append(binary_metrics(y_test, preds, positive))
            if fold_callback is not None:
                fold_callback(info)
    acc = float(np.mean([v["accuracy"] for v in fold_values]))
    prec = float(np.mean([v["precision"] for v in fold_values]))
    rec = float(np.mean([v["recall"] for v in fold_values]))
    return EvalMetrics(
        accuracy=acc,
        precision=prec,
        recall=rec,
        f1=_harmonic(prec, rec),
        fold_values=fold_values,
        repeats=repeats,
    )


def all_masks() -> list[tuple[str, ...]]:
    """The 15 nonempty feature-group subsets, smallest first, canonical order."""
    masks = []
    for n in range(1, 1 << len(GROUP_ORDER)):
        mask = tuple(g for i, g in enumerate(GROUP_ORDER) if n & (1 << i))
        masks.append(mask)
    masks.sort(key=lambda m: (len(m), tuple(GROUP_ORDER.index(g) for g in m)))
    return masks


def feature_group_search(
    kinds: Sequence[str],
    dataset: Sequence[LabeledPair],
    folds: int = 5,
    repeats: int = 10,
    seed: int = 0,
    task: str = "relation",
) -> tuple[dict[str, tuple[tuple[str, ...], EvalMetrics]], list[dict]]:
    """Evaluate every feature-group subset per classifier.

    Returns the per-classifier winner (accuracy, then F1; earlier and thus
    smaller masks win ties) and the full result table.
    """
    best: dict[str, tuple[tuple[str, ...], EvalMetrics]] = {}
    rows: list[dict] = []
    for kind in kinds:
        for mask in all_masks():
            metrics = cross_validate(
                kind, dataset, folds=folds, repeats=repeats, mask=mask, seed=seed, task=task
            )
            rows.append(
                {
                    "classifier": kind,
                    "mask": mask,
                    "accuracy": metrics.accuracy,
                    "precision": metrics.precision,
                    "recall": metrics.recall,
                    "f1": metrics.f1,
                }
            )
            if kind not in best or (metrics.accuracy, metrics.f1) > (
                best[kind][1].accuracy,
                best[kind][1].f1,
            ):
                best[kind] = (mask, metrics)
    return best, rows


def format_report(rows: Sequence[dict]) -> str:
    """Fixed-width table: Features, Classifier, Accuracy, Precision, Recall, F1."""
    header = ("Features", "Classifier", "Accuracy", "Precision", "Recall", "F1")
    body = []
    for r in rows:
        mask = r.get("mask", GROUP_ORDER)
        body.append(
            (
                "+".join(mask),
                r["classifier"],
                f"{r['accuracy']:.1f}",
                f"{r['precision']:.1f}",
                f"{r['recall']:.1f}",
                f"{r['f1']:.1f}",
            )
        )
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def load_annotations(path: str | Path) -> list[tuple[str, str, str, str | None]]:
    """Read "keyA keyB relation direction" rows; "-" marks no direction."""
    rows: list[tuple[str, str, str, str | None]] = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{n}: expected 4 tab-separated fields")
            a, b, relation, direction = parts
            if relation not in RELATION_LABELS:
                raise DataError(f"{path}:{n}: bad relation label {relation!r}")
            if direction == "-":
                direction_val: str | None = None
            elif direction in DIRECTION_LABELS:
                direction_val = direction
            else:
                raise DataError(f"{path}:{n}: bad direction label {direction!r}")
            if (direction_val is not None) != (relation == "positive"):
                raise DataError(f"{path}:{n}: direction must accompany positives only")
            rows.append((a, b, relation, direction_val))
    return rows


def save_annotations(rows: Sequence[tuple[str, str, str, str | None]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for a, b, relation, direction in rows:
            fh.write(f"{a}\t{b}\t{relation}\t{direction or '-'}\n")


def build_dataset(
    rows: Sequence[tuple[str, str, str, str | None]],
    counts: PairCounts,
    contexts: dict[tuple[str, str], list[CoOccurrenceContext]],
    table: EmbeddingTable,
) -> list[LabeledPair]:
    """Attach features to annotations, orienting each pair so t2 >= t3.

    Swapping a pair to satisfy the orientation flips its direction label.
    """
    out = []
    for a, b, relation, direction in rows:
        if counts.t2(a, b) < counts.t3(a, b):
            a, b = b, a
            if direction is not None:
                direction = "backward" if direction == "forward" else "forward"
        features = build_feature_vector(
            (a, b), counts, contexts.get(tuple(sorted((a, b))), []), table
        )
        out.append(
            LabeledPair(
                pair=(a, b),
                features=features,
                relation_label=relation,
                direction_label=direction,
            )
        )
    return out
