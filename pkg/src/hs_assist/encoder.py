"""Trainable description encoder with a linear classification head.

The reference encoder is a bag of trainable token embeddings, mean-pooled
over the in-vocabulary tokens of a description, followed by a linear head
and softmax. It trains by deterministic mini-batch gradient descent on the
categorical cross-entropy, keeps the parameter snapshot with the best
validation top-1 accuracy, and is calibrated post hoc by temperature
scaling. A stronger backbone can replace it without touching retrieval,
which only consumes ``encode`` outputs and embedding rows.

A finished :class:`ModelArtifact` is immutable (arrays are write-protected)
and safe for unlimited concurrent inference.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import CaseCollection, CodeLevel
from .errors import (
    EmptyCorpusError,
    EmptyDescriptionError,
    LabelCoverageError,
    ParseError,
    ValidationError,
)
from .text import IdfTable, Token, Vocabulary, build_vocabulary, compute_idf, tokenize
from .version import __version__

ARTIFACT_MAGIC = b"HSXAI1"

# Temperature search window and golden-section interval tolerance.
TEMPERATURE_RANGE = (0.05, 20.0)
TEMPERATURE_TOL = 1e-4


@dataclass(frozen=True)
class EncoderConfig:
    dim: int = 768
    epochs: int = 100
    learning_rate: float = 8.0
    batch_size: int = 32
    seed: int = 0
    min_count: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1 or self.min_count < 1:
            raise ValidationError("bad epochs/batch_size/min_count")


@dataclass(frozen=True)
class ModelArtifact:
    """Everything inference needs: vocabulary, IDF table, token embeddings,
    classification head, calibration temperature and the label index."""

    vocab: Vocabulary
    idf: IdfTable
    token_embeddings: np.ndarray  # |V| x d
    head: np.ndarray  # d x C
    labels: tuple[str, ...]  # sorted subheading digits
    temperature: float
    config: EncoderConfig
    version: str = __version__

    def __post_init__(self) -> None:
        v, d = self.token_embeddings.shape
        if v != len(self.vocab) or d != self.config.dim:
            raise ValidationError("embedding matrix shape does not match vocab/config")
        if self.head.shape != (d, len(self.labels)):
            raise ValidationError("head shape does not match dim/labels")
        if self.temperature <= 0:
            raise ValidationError("temperature must be positive")
        if list(self.labels) != sorted(set(self.labels)):
            raise ValidationError("labels must be unique and sorted")
        self.token_embeddings.flags.writeable = False
        self.head.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.token_embeddings.shape[1]

    def label_index(self, digits: str) -> int:
        try:
            return self.labels.index(digits)
        except ValueError:
            raise LabelCoverageError(f"label {digits} not in model index") from None


class EncodeResult(NamedTuple):
    vector: np.ndarray
    low_confidence: bool  # true when every token was out of vocabulary


class RankedCode(NamedTuple):
    code: str
    raw_prob: float
    calibrated_prob: float


@dataclass(frozen=True)
class Prediction:
    level: CodeLevel
    ranked: tuple[RankedCode, ...]
    description_embedding: np.ndarray
    low_confidence: bool


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _token_ids(vocab: Vocabulary, tokens: Sequence[Token]) -> list[int]:
    index = vocab.index
    return [index[t] for t in tokens if t in index]


def _pool(embeddings: np.ndarray, ids: Sequence[int], dim: int) -> np.ndarray:
    if not ids:
        return np.zeros(dim)
    return embeddings[ids].sum(axis=0) / len(ids)


def encode(model: ModelArtifact, tokens: Sequence[Token]) -> EncodeResult:
    """Mean of the in-vocabulary token embeddings; zero vector when every
    token is unknown (flagged low-confidence)."""
    if not tokens:
        raise EmptyDescriptionError("cannot encode an empty token list")
    ids = _token_ids(model.vocab, tokens)
    return EncodeResult(_pool(model.token_embeddings, ids, model.dim), not ids)


def forward(model: ModelArtifact, tokens: Sequence[Token]) -> np.ndarray:
    """Class probabilities (softmax over the linear head, temperature 1)."""
    vec = encode(model, tokens).vector
    return _softmax(vec @ model.head)


def _loss_and_grads(
    embeddings: np.ndarray,
    head: np.ndarray,
    token_ids: Sequence[Sequence[int]],
    label_ids: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy over the batch and its exact gradients.

    Returns (loss, d_head, d_embeddings); the embedding gradient is dense
    (zero rows for untouched tokens) so finite-difference checks can index
    any row.
    """
    n = len(token_ids)
    dim = embeddings.shape[1]
    feats = np.stack([_pool(embeddings, ids, dim) for ids in token_ids])
    logits = feats @ head
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(logz - shifted[np.arange(n), label_ids]))
    probs = _softmax(logits)

    delta = probs.copy()
    delta[np.arange(n), label_ids] -= 1.0
    delta /= n
    d_head = feats.T @ delta
    d_feats = delta @ head.T

    d_emb = np.zeros_like(embeddings)
    for row, ids in zip(d_feats, token_ids):
        if ids:
            np.add.at(d_emb, list(ids), row / len(ids))
    return loss, d_head, d_emb


def init_parameters(
    rng: np.random.Generator, vocab_size: int, dim: int, n_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform embeddings in [-0.5/d, 0.5/d]; zero head so the first forward
    pass is exactly uniform."""
    embeddings = rng.uniform(-0.5 / dim, 0.5 / dim, size=(vocab_size, dim))
    head = np.zeros((dim, n_classes))
    return embeddings, head


def _prepare(vocab: Vocabulary, labels: tuple[str, ...], cases: CaseCollection):
    index = {l: i for i, l in enumerate(labels)}
    ids = [_token_ids(vocab, tokenize(c.description)) for c in cases]
    y = np.array([index[c.label.digits] for c in cases], dtype=np.int64)
    return ids, y


def _validation_score(
    embeddings: np.ndarray, head: np.ndarray, token_ids: Sequence[Sequence[int]], y: np.ndarray
) -> tuple[float, float]:
    """(top-1 accuracy, negative NLL): lexicographically larger is better."""
    dim = embeddings.shape[1]
    feats = np.stack([_pool(embeddings, ids, dim) for ids in token_ids])
    logits = feats @ head
    acc = float(np.mean(np.argmax(logits, axis=1) == y))
    return acc, -_nll_at(logits, y, 1.0)


def train(
    train_cases: CaseCollection, val_cases: CaseCollection, config: EncoderConfig
) -> ModelArtifact:
    """Minimize mean categorical cross-entropy by mini-batch gradient descent.

    Deterministic given the seed. Returns the parameter snapshot with the
    highest validation top-1 accuracy across epochs; among equally accurate
    epochs the one with the lowest validation loss wins, so saturating
    accuracy does not freeze an underconfident early snapshot. With an empty
    validation set the final epoch wins.
    """
    if len(train_cases) == 0:
        raise EmptyCorpusError("no training cases")
    vocab = build_vocabulary(train_cases, config.min_count)
    idf = compute_idf(train_cases, vocab)
    labels = tuple(sorted({c.label.digits for c in train_cases} | {c.label.digits for c in val_cases}))

    train_ids, train_y = _prepare(vocab, labels, train_cases)
    val_ids, val_y = _prepare(vocab, labels, val_cases)

    rng = np.random.default_rng(config.seed)
    embeddings, head = init_parameters(rng, len(vocab), config.dim, len(labels))

    n = len(train_cases)
    best_score = (-1.0, -np.inf)
    best: tuple[np.ndarray, np.ndarray] | None = None
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            _, d_head, d_emb = _loss_and_grads(
                embeddings, head, [train_ids[i] for i in batch], train_y[batch]
            )
            head -= config.learning_rate * d_head
            embeddings -= config.learning_rate * d_emb
        if len(val_cases) > 0:
            score = _validation_score(embeddings, head, val_ids, val_y)
            if score > best_score:
                best_score = score
                best = (embeddings.copy(), head.copy())
    if best is not None:
        embeddings, head = best
    return ModelArtifact(
        vocab=vocab,
        idf=idf,
        token_embeddings=embeddings,
        head=head,
        labels=labels,
        temperature=1.0,
        config=config,
    )


def _logits(model: ModelArtifact, cases: CaseCollection) -> tuple[np.ndarray, np.ndarray]:
    token_ids = [_token_ids(model.vocab, tokenize(c.description)) for c in cases]
    feats = np.stack([_pool(model.token_embeddings, ids, model.dim) for ids in token_ids])
    y = np.array([model.label_index(c.label.digits) for c in cases], dtype=np.int64)
    return feats @ model.head, y


def mean_nll(model: ModelArtifact, cases: CaseCollection, temperature: float | None = None) -> float:
    """Mean negative log-likelihood of the true labels at the given
    temperature (defaults to the model's)."""
    if len(cases) == 0:
        raise EmptyCorpusError("no cases to score")
    logits, y = _logits(model, cases)
    return _nll_at(logits, y, model.temperature if temperature is None else temperature)


def _nll_at(logits: np.ndarray, y: np.ndarray, temperature: float) -> float:
    scaled = logits / temperature
    shifted = scaled - scaled.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(logz - shifted[np.arange(len(y)), y]))


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    a, b = lo, hi
    h = b - a
    c, d = a + invphi2 * h, a + invphi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    return (a + b) / 2.0


def calibrate_temperature(model: ModelArtifact, val_cases: CaseCollection) -> ModelArtifact:
    """Fit the softmax temperature that minimizes validation NLL.

    Golden-section search over ``TEMPERATURE_RANGE``; never worse than the
    uncalibrated model (falls back to T=1 if the search cannot beat it) and
    never changes any argmax since scaling is monotone per sample.
    """
    if len(val_cases) == 0:
        raise EmptyCorpusError("calibration needs a non-empty validation set")
    logits, y = _logits(model, val_cases)

    def nll(t: float) -> float:
        return _nll_at(logits, y, t)

    t_star = _golden_section(nll, *TEMPERATURE_RANGE, tol=TEMPERATURE_TOL)
    if nll(t_star) > nll(1.0):
        t_star = 1.0
    return dataclasses.replace(model, temperature=t_star)


def predict_topk(
    model: ModelArtifact, description: str, k: int, level: CodeLevel = CodeLevel.SUBHEADING
) -> Prediction:
    """Rank codes at the requested level by calibrated probability.

    Subheadings rank by softmax(logits / T); headings rank by the sum of
    their subheadings' probabilities, so heading mass is exactly the prefix
    sum and still totals 1. Ties break toward the smaller code.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    tokens = tokenize(description)
    if not tokens:
        raise EmptyDescriptionError("empty description")
    enc = encode(model, tokens)
    logits = enc.vector @ model.head
    raw = _softmax(logits)
    calibrated = _softmax(logits / model.temperature)

    if level == CodeLevel.SUBHEADING:
        items = [(code, float(raw[i]), float(calibrated[i])) for i, code in enumerate(model.labels)]
    elif level == CodeLevel.HEADING:
        raw_sum: dict[str, float] = {}
        cal_sum: dict[str, float] = {}
        for i, code in enumerate(model.labels):
            h = code[:4]
            raw_sum[h] = raw_sum.get(h, 0.0) + float(raw[i])
            cal_sum[h] = cal_sum.get(h, 0.0) + float(calibrated[i])
        items = [(h, raw_sum[h], cal_sum[h]) for h in raw_sum]
    else:
        raise ValidationError("prediction level must be heading or subheading")

    items.sort(key=lambda it: (-it[2], it[0]))
    ranked = tuple(RankedCode(*it) for it in items[:k])
    return Prediction(
        level=level,
        ranked=ranked,
        description_embedding=enc.vector,
        low_confidence=enc.low_confidence,
    )


def save_artifact(model: ModelArtifact, path: str | Path) -> None:
    """Write the artifact: magic, JSON header, then float64 sections in a
    fixed order. Loading and re-saving reproduces the bytes exactly."""
    header = {
        "format": 1,
        "version": model.version,
        "dim": model.dim,
        "vocab_size": len(model.vocab),
        "n_classes": len(model.labels),
        "n_docs": model.idf.n_docs,
        "vocab": model.vocab.tokens,
        "labels": list(model.labels),
        "config": {
            "dim": model.config.dim,
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
            "min_count": model.config.min_count,
        },
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")
    idf_weights = np.array([model.idf.weights[t] for t in model.vocab.tokens], dtype="<f8")
    scalars = np.array([model.idf.oov_weight, model.temperature], dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(ARTIFACT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(idf_weights.tobytes())
        fh.write(scalars.tobytes())
        fh.write(model.token_embeddings.astype("<f8", copy=False).tobytes())
        fh.write(model.head.astype("<f8", copy=False).tobytes())


def load_artifact(path: str | Path) -> ModelArtifact:
    raw = Path(path).read_bytes()
    if raw[: len(ARTIFACT_MAGIC)] != ARTIFACT_MAGIC:
        raise ParseError("not a model artifact (bad magic)")
    offset = len(ARTIFACT_MAGIC)
    (header_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"corrupt artifact header: {exc}") from exc
    offset += header_len

    v, d, c = header["vocab_size"], header["dim"], header["n_classes"]

    def take(count: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).copy()
        offset += count * 8
        return arr

    idf_weights = take(v)
    oov_weight, temperature = take(2)
    embeddings = take(v * d).reshape(v, d)
    head = take(d * c).reshape(d, c)
    if offset != len(raw):
        raise ParseError("artifact has trailing bytes")

    tokens = header["vocab"]
    vocab = Vocabulary(
        index={t: i for i, t in enumerate(tokens)}, min_count=header["config"]["min_count"]
    )
    idf = IdfTable(
        weights={t: float(w) for t, w in zip(tokens, idf_weights)},
        n_docs=header["n_docs"],
        oov_weight=float(oov_weight),
    )
    return ModelArtifact(
        vocab=vocab,
        idf=idf,
        token_embeddings=embeddings,
        head=head,
        labels=tuple(header["labels"]),
        temperature=float(temperature),
        config=EncoderConfig(**header["config"]),
        version=header["version"],
    )
