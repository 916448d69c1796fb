"""Skip-gram word embeddings and additive event vector composition.

A small numpy implementation of skip-gram with negative sampling. It is meant
for desk-scale corpora; pretrained vectors in the common text format can be
loaded instead via :func:`load_vectors`.

Event vectors are the unweighted mean of the in-vocabulary slot lemmas, and
similarity between events is cosine similarity of their vectors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import ParsedCorpus
from .errors import DataError, EmptyCorpusError
from .events import EventTuple


@dataclass
class EmbeddingTable:
    dim: int
    vocab: dict[str, int]  # lemma -> dense row index
    vectors: np.ndarray  # shape (len(vocab), dim)
    meta: dict = field(default_factory=dict)

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.vocab

    def vector(self, lemma: str) -> np.ndarray | None:
        idx = self.vocab.get(lemma)
        return None if idx is None else self.vectors[idx]


@dataclass(frozen=True)
class EventVector:
    event: str  # canonical key
    vec: np.ndarray
    oov: bool = False  # True when no slot lemma was in vocabulary


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 when either vector is all zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _sigmoid(x: np.ndarray | float):
    return 1.0 / (1.0 + np.exp(-x))


def train_skipgram(
    corpus: ParsedCorpus,
    dim: int = 100,
    window: int = 5,
    epochs: int = 5,
    negative_samples: int = 5,
    seed: int = 1,
    min_count: int = 5,
    learning_rate: float = 0.025,
) -> EmbeddingTable:
    """Train skip-gram embeddings with negative sampling on corpus lemmas.

    Deterministic for a fixed seed (single worker). The vocabulary keeps
    lemmas with frequency >= min_count, ordered by descending frequency with
    a lexicographic tie-break. Per-epoch mean losses are recorded in
    ``meta["epoch_losses"]``; the two halves of the first epoch are recorded
    in ``meta["first_epoch_halves"]``.
    """
    if dim < 1 or window < 1:
        raise ValueError("dim and window must be >= 1")
    sentences = [
        [t.lemma.lower() for t in sent.tokens] for sent in corpus.iter_sentences()
    ]
    if not sentences:
        raise EmptyCorpusError("cannot train embeddings on an empty corpus")

    counts = Counter(lemma for sent in sentences for lemma in sent)
    vocab_items = sorted(
        ((lemma, c) for lemma, c in counts.items() if c >= min_count),
        key=lambda kv: (-kv[1], kv[0]),
    )
    if not vocab_items:
        # desk-scale corpora may sit entirely under min_count; fall back to 1
        vocab_items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    vocab = {lemma: i for i, (lemma, _) in enumerate(vocab_items)}

    freqs = np.array([c for _, c in vocab_items], dtype=float)
    noise = freqs**0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng(seed)
    n = len(vocab)
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))

    encoded = [
        [vocab[lemma] for lemma in sent if lemma in vocab] for sent in sentences
    ]
    encoded = [sent for sent in encoded if len(sent) >= 2]
    pairs_per_epoch = sum(
        sum(min(i + window, len(sent) - 1) - max(i - window, 0) for i in range(len(sent)))
        for sent in encoded
    )
    total_pairs = max(pairs_per_epoch * epochs, 1)

    epoch_losses: list[float] = []
    halves: list[float] = []
    seen_pairs = 0
    for epoch in range(epochs):
        loss_sum = 0.0
        loss_n = 0
        half_marker = pairs_per_epoch // 2
        half_sums = [0.0, 0.0]
        half_ns = [0, 0]
        for sent in encoded:
            for i, center in enumerate(sent):
                lo = max(i - window, 0)
                hi = min(i + window, len(sent) - 1)
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    ctx = sent[j]
                    lr = learning_rate * max(
                        1.0 - seen_pairs / total_pairs, 1e-4
                    )
                    negs = np.searchsorted(
                        noise_cdf, rng.random(negative_samples)
                    )
                    v = w_in[center]
                    targets = np.concatenate(([ctx], negs))
                    labels = np.zeros(len(targets))
                    labels[0] = 1.0
                    u = w_out[targets]
                    scores = _sigmoid(u @ v)
                    # pair loss before the update
                    eps = 1e-10
                    loss = -np.log(scores[0] + eps) - np.sum(
                        np.log(1.0 - scores[1:] + eps)
                    )
                    grad = (scores - labels)[:, None]
                    w_in[center] = v - lr * (grad * u).sum(axis=0)
                    w_out[targets] = u - lr * grad * v
                    loss_sum += float(loss)
                    loss_n += 1
                    seen_pairs += 1
                    if epoch == 0:
                        half = 0 if loss_n <= half_marker else 1
                        half_sums[half] += float(loss)
                        half_ns[half] += 1
        epoch_losses.append(loss_sum / max(loss_n, 1))
        if epoch == 0:
            halves = [
                half_sums[0] / max(half_ns[0], 1),
                half_sums[1] / max(half_ns[1], 1),
            ]

    meta = {
        "dim": dim,
        "window": window,
        "epochs": epochs,
        "negative_samples": negative_samples,
        "seed": seed,
        "min_count": min_count,
        "learning_rate": learning_rate,
        "vocab_size": n,
        "epoch_losses": epoch_losses,
        "first_epoch_halves": halves,
    }
    return EmbeddingTable(dim=dim, vocab=vocab, vectors=w_in, meta=meta)


def embed_event(event: EventTuple | str, table: EmbeddingTable) -> EventVector:
    """Mean of the in-vocabulary slot lemma vectors; zero vector when all OOV."""
    if isinstance(event, str):
        event = EventTuple.from_key(event)
    lemmas = list(event.subject) + list(event.predicate) + list(event.object)
    rows = [table.vector(lemma) for lemma in lemmas]
    rows = [r for r in rows if r is not None]
    if not rows:
        return EventVector(event=event.key, vec=np.zeros(table.dim), oov=True)
    return EventVector(event=event.key, vec=np.mean(rows, axis=0), oov=False)


def save_vectors(table: EmbeddingTable, path: str | Path) -> None:
    """Write the common text vector format: header line, one word per line."""
    items = sorted(table.vocab.items(), key=lambda kv: kv[1])
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(items)} {table.dim}\n")
        for lemma, idx in items:
            coords = " ".join(repr(float(x)) for x in table.vectors[idx])
            fh.write(f"{lemma} {coords}\n")


def load_vectors(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"bad vector file header in {path}")
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"bad vector file header in {path}") from exc
        vocab: dict[str, int] = {}
        vectors = np.zeros((n, dim))
        for i, line in enumerate(fh):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise DataError(f"bad vector line {i + 2} in {path}")
            if i >= n:
                raise DataError(f"vector file {path} has more rows than its header claims")
            vocab[parts[0]] = i
            vectors[i] = [float(x) for x in parts[1:]]
    if len(vocab) != n:
        raise DataError(f"vector file {path} has fewer rows than its header claims")
    if not np.isfinite(vectors).all():
        raise DataError(f"non-finite vector entries in {path}")
    return EmbeddingTable(dim=dim, vocab=vocab, vectors=vectors, meta={"source": str(path)})
