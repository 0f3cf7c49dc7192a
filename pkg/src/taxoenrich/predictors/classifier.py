"""Single-hidden-layer softmax classifier over hypernym synset classes.

Network: ``h = relu(x @ W1 + b1)``, inverted dropout on ``h`` while
training, ``logits = h @ W2 + b2``, softmax with mean cross-entropy.
Trained with plain mini-batch gradient descent.
"""
from __future__ import annotations

import json
import logging
import zipfile
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..embeddings import EmbeddingStore
from ..taxonomy import TaxonomyGraph
from .common import MAX_CANDIDATES, Prediction, frequency_prior

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "taxoenrich-mlp-1"


@dataclass(frozen=True)
class ClassifierParams:
    hidden_dim: int = 386
    dropout: float = 0.1
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 200
    tol: float = 1e-4
    patience: int = 5
    min_class_freq: int = 3
    seed: int = 0


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class ClassifierModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    classes: tuple[str, ...]
    dropout_rate: float = 0.1

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("class ids must be unique")
        if self.W2.shape[1] != len(self.classes):
            raise ValueError("output layer does not match class count")
        for p in self.params():
            if not np.all(np.isfinite(p)):
                raise ValueError("parameters must be finite")

    @property
    def input_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    @classmethod
    def initialise(cls, input_dim, hidden_dim, classes, dropout_rate, rng) -> "ClassifierModel":
        return cls(
            glorot(rng, input_dim, hidden_dim),
            np.zeros(hidden_dim),
            glorot(rng, hidden_dim, len(classes)),
            np.zeros(len(classes)),
            tuple(classes),
            dropout_rate,
        )

    def logits(self, X: np.ndarray) -> np.ndarray:
        h = np.maximum(X @ self.W1 + self.b1, 0.0)
        return h @ self.W2 + self.b2

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.logits(np.atleast_2d(X)))

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray, mask: np.ndarray | None = None):
        """Mean cross-entropy and its gradients w.r.t. (W1, b1, W2, b2).

        ``mask`` is an already-scaled dropout mask over the hidden units;
        ``None`` disables dropout.
        """
        n = X.shape[0]
        pre = X @ self.W1 + self.b1
        h = np.maximum(pre, 0.0)
        if mask is not None:
            h = h * mask
        probs = softmax(h @ self.W2 + self.b2)
        loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))

        dlogits = probs
        dlogits[np.arange(n), y] -= 1.0
        dlogits /= n
        dW2 = h.T @ dlogits
        db2 = dlogits.sum(axis=0)
        dh = dlogits @ self.W2.T
        if mask is not None:
            dh = dh * mask
        dpre = dh * (pre > 0)
        dW1 = X.T @ dpre
        db1 = dpre.sum(axis=0)
        return float(loss), [dW1, db1, dW2, db2]

    def save(self, path) -> None:
        header = {
            "format": CHECKPOINT_FORMAT,
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "class_count": self.class_count,
            "dropout_rate": self.dropout_rate,
            "classes": list(self.classes),
        }
        arrays = {"header": np.array(json.dumps(header)), "W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}
        # np.savez stamps members with the wall clock; fixed timestamps keep checkpoints byte-reproducible
        with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
            for name, arr in arrays.items():
                info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
                with zf.open(info, "w", force_zip64=True) as fh:
                    np.lib.format.write_array(fh, np.asarray(arr), allow_pickle=False)

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format") != CHECKPOINT_FORMAT:
                raise ValueError(f"{path}: not a classifier checkpoint")
            model = cls(data["W1"], data["b1"], data["W2"], data["b2"],
                        tuple(header["classes"]), header["dropout_rate"])
        if (model.input_dim, model.hidden_dim) != (header["input_dim"], header["hidden_dim"]):
            raise ValueError(f"{path}: header dimensions do not match weights")
        return model


def build_training_matrix(
    pairs: Sequence[tuple[str, str]], store: EmbeddingStore, min_class_freq: int
) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    counts = Counter(sid for _, sid in pairs)
    classes = tuple(sorted(sid for sid, c in counts.items() if c >= min_class_freq))
    if not classes:
        raise ValueError(f"no hypernym occurs at least {min_class_freq} times")
    class_index = {sid: i for i, sid in enumerate(classes)}
    rows, labels = [], []
    dropped = 0
    for lemma, sid in pairs:
        if sid not in class_index:
            continue
        emb = store.phrase_vector(lemma.split())
        if emb.degenerate:
            dropped += 1
            continue
        rows.append(emb.vector)
        labels.append(class_index[sid])
    if dropped:
        log.info("dropped %d training rows with degenerate vectors", dropped)
    if not rows:
        raise ValueError("no usable training rows")
    return np.array(rows), np.array(labels, dtype=np.int64), classes


def fit(model: ClassifierModel, X: np.ndarray, y: np.ndarray, params: ClassifierParams,
        rng: np.random.Generator) -> list[float]:
    """Train in place; returns per-epoch mean loss."""
    history: list[float] = []
    best = np.inf
    stale = 0
    keep = 1.0 - model.dropout_rate
    for _ in range(params.max_epochs):
        order = rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(X), params.batch_size):
            batch = order[start:start + params.batch_size]
            mask = None
            if model.dropout_rate > 0:
                mask = (rng.random((len(batch), model.hidden_dim)) < keep) / keep
            loss, grads = model.loss_and_grads(X[batch], y[batch], mask)
            for p, g in zip(model.params(), grads):
                p -= params.learning_rate * g
            total += loss * len(batch)
        epoch_loss = total / len(X)
        history.append(epoch_loss)
        if best - epoch_loss < params.tol:
            stale += 1
            if stale >= params.patience:
                break
        else:
            stale = 0
        best = min(best, epoch_loss)
    return history


def train_classifier(
    pairs: Sequence[tuple[str, str]],
    store: EmbeddingStore,
    params: ClassifierParams | None = None,
) -> ClassifierModel:
    """Fit the classifier on ``(lemma, hypernym id)`` pairs; fixed seed, fixed result."""
    params = params or ClassifierParams()
    X, y, classes = build_training_matrix(pairs, store, params.min_class_freq)
    rng = np.random.default_rng(params.seed)
    model = ClassifierModel.initialise(X.shape[1], params.hidden_dim, classes, params.dropout, rng)
    history = fit(model, X, y, params, rng)
    log.info("trained %d epochs, final loss %.4f", len(history), history[-1])
    return model


def rank_classes(model: ClassifierModel, x: np.ndarray, n: int = MAX_CANDIDATES) -> list[str]:
    probs = model.predict_proba(x)[0]
    order = sorted(range(model.class_count), key=lambda i: (-probs[i], model.classes[i]))
    return [model.classes[i] for i in order[:n]]


def classifier_predict(
    model: ClassifierModel,
    orphan: str,
    store: EmbeddingStore,
    graph: TaxonomyGraph | None = None,
    pos: str | None = None,
) -> Prediction:
    """Top classes by probability; degenerate orphans fall back to the hyponym-count prior."""
    emb = store.phrase_vector(orphan.lower().split())
    if emb.degenerate:
        if graph is None or pos is None:
            raise ValueError(f"{orphan!r} has no vector and no graph was given for the fallback")
        return Prediction(orphan, frequency_prior(graph, pos), fallback=True)
    return Prediction(orphan, tuple(rank_classes(model, emb.vector)))
