"""Multitask text-CNN: embeddings, multi-width convolutions, max-over-time
pooling, and one softmax head per task.

Everything runs in float64 numpy with hand-written backpropagation and plain
seeded SGD, which keeps training bitwise-reproducible and makes the analytic
gradients checkable against finite differences.
"""

import copy
import json
import struct
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCorpus, FormatVersionMismatch
from .labels import LABELS, LABEL_INDEX, NUM_LABELS, SatdLabel, TaskId, TASKS
from .textproc import PAD_ID, Vocab, build_vocab, encode, tokenize

FORMAT_MAGIC = b"DBVZCNN1"


@dataclass(frozen=True)
class CnnHyperparams:
    embed_dim: int = 64
    widths: tuple[int, ...] = (1, 2, 3, 4, 5)
    filters_per_width: int = 32
    max_len: int = 128
    dropout_rate: float = 0.5

    @property
    def pooled_dim(self) -> int:
        return self.filters_per_width * len(self.widths)


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    lr: float = 0.05
    seed: int = 0
    # "auto" = inverse-frequency per task; None = unweighted; or an explicit
    # {SatdLabel: weight} map applied to every task.
    class_weights: object = "auto"
    # Stop after any epoch where every task's train accuracy reaches this.
    stop_at_accuracy: float | None = None


@dataclass
class Classification:
    label: SatdLabel
    probs: list[float]
    model_version: str
    classified_at: int
    target_kind: str | None = None
    target_id: int | None = None


@dataclass
class ForwardResult:
    probs: np.ndarray  # (5,)
    pooled: np.ndarray  # (pooled_dim,)
    # Window start index chosen by max-over-time pooling, per pooled slot.
    argmax_pos: np.ndarray  # (pooled_dim,) int


@dataclass
class EpochMetrics:
    epoch: int
    task: TaskId
    loss: float
    accuracy: float


class CnnModel:
    """Immutable-after-training model holding all parameter tensors.

    Filter weights for width w are stored as an (f, w*d) matrix whose row j
    concatenates the w position slices of filter j (offset 0 first).
    """

    def __init__(self, vocab: Vocab, hp: CnnHyperparams, version: str):
        self.vocab = vocab
        self.hp = hp
        self.version = version
        V, d = vocab.size, hp.embed_dim
        f = hp.filters_per_width
        self.embedding = np.zeros((V, d))
        self.filters = {w: np.zeros((f, w * d)) for w in hp.widths}
        self.filter_biases = {w: np.zeros(f) for w in hp.widths}
        F = hp.pooled_dim
        self.heads = {t: np.zeros((F, NUM_LABELS)) for t in TASKS}
        self.head_biases = {t: np.zeros(NUM_LABELS) for t in TASKS}

    @classmethod
    def initialize(cls, vocab: Vocab, hp: CnnHyperparams, seed: int = 0,
                   version: str = "dev") -> "CnnModel":
        """Seeded init: random embeddings and filters, zero heads and biases.

        Unit-scale embeddings with fan-in-scaled filters keep activations
        O(1) for any width, and the zero heads make a fresh model output an
        exactly uniform distribution.  Draw order is fixed (embedding, then
        filters by ascending width) so a seed pins every parameter.  The PAD
        row starts at zero but trains.
        """
        model = cls(vocab, hp, version)
        rng = np.random.default_rng(seed)
        model.embedding = rng.normal(0.0, 1.0, model.embedding.shape)
        model.embedding[PAD_ID] = 0.0
        for w in hp.widths:
            scale = np.sqrt(2.0 / (w * hp.embed_dim))
            model.filters[w] = rng.normal(0.0, scale, model.filters[w].shape)
        return model

    def parameters(self):
        """Named parameter tensors, in the documented serialization order."""
        yield "embedding", self.embedding
        for w in self.hp.widths:
            yield f"filters_w{w}", self.filters[w]
            yield f"filter_biases_w{w}", self.filter_biases[w]
        for t in TASKS:
            yield f"head_{t.value}", self.heads[t]
            yield f"head_bias_{t.value}", self.head_biases[t]

    def set_parameter(self, name: str, value: np.ndarray) -> None:
        for pname, arr in self.parameters():
            if pname == name:
                arr[...] = value
                return
        raise KeyError(name)

    def assert_finite(self) -> None:
        for name, arr in self.parameters():
            assert np.isfinite(arr).all(), f"non-finite values in {name}"

    # -- forward ----------------------------------------------------------

    def _convolve(self, X: np.ndarray, w: int):
        """X: (B, L, d) -> relu'd activations (B, P, f) for width w."""
        B, L, d = X.shape
        P = L - w + 1
        windows = np.concatenate([X[:, i:P + i, :] for i in range(w)], axis=2)
        conv = windows @ self.filters[w].T + self.filter_biases[w]
        return np.maximum(conv, 0.0), windows

    def forward_batch(self, ids: np.ndarray, task: TaskId,
                      dropout_mask: np.ndarray | None = None):
        """Returns (probs (B,5), cache) for a batch of encoded sequences."""
        ids = np.asarray(ids, dtype=np.int64)
        assert ids.shape[1] == self.hp.max_len, "sequence length != max_len"
        X = self.embedding[ids]
        pooled_parts, argmax_parts, acts, wins = [], [], {}, {}
        for w in self.hp.widths:
            a, windows = self._convolve(X, w)
            pooled_parts.append(a.max(axis=1))
            argmax_parts.append(a.argmax(axis=1))
            acts[w], wins[w] = a, windows
        pooled = np.concatenate(pooled_parts, axis=1)
        argmax = np.concatenate(argmax_parts, axis=1)
        dropped = pooled if dropout_mask is None else pooled * dropout_mask
        logits = dropped @ self.heads[task] + self.head_biases[task]
        probs = _softmax(logits)
        cache = {
            "ids": ids, "pooled": pooled, "argmax": argmax,
            "dropped": dropped, "dropout_mask": dropout_mask,
            "probs": probs, "task": task, "wins": wins,
        }
        return probs, cache

    def forward(self, ids, task: TaskId,
                train_mode: bool = False,
                rng: np.random.Generator | None = None) -> ForwardResult:
        """Single-sequence forward pass.

        Dropout applies to the pooled vector only when train_mode is set; an
        rng must then be supplied.
        """
        mask = None
        if train_mode:
            assert rng is not None, "train_mode forward needs an rng"
            mask = _dropout_mask(rng, (1, self.hp.pooled_dim),
                                 self.hp.dropout_rate)
        probs, cache = self.forward_batch(
            np.asarray([ids], dtype=np.int64), task, mask)
        return ForwardResult(probs=probs[0], pooled=cache["pooled"][0],
                             argmax_pos=cache["argmax"][0])

    # -- backward ---------------------------------------------------------

    def backward(self, cache, label_ids: np.ndarray,
                 class_weights: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of the class-weighted mean cross-entropy."""
        probs = cache["probs"]
        task = cache["task"]
        B = probs.shape[0]
        f = self.hp.filters_per_width
        onehot = np.zeros_like(probs)
        onehot[np.arange(B), label_ids] = 1.0
        sample_w = class_weights[label_ids] / B
        dlogits = (probs - onehot) * sample_w[:, None]

        grads: dict[str, np.ndarray] = {}
        grads[f"head_{task.value}"] = cache["dropped"].T @ dlogits
        grads[f"head_bias_{task.value}"] = dlogits.sum(axis=0)
        ddropped = dlogits @ self.heads[task].T
        mask = cache["dropout_mask"]
        dpooled = ddropped if mask is None else ddropped * mask

        ids = cache["ids"]
        dX = np.zeros((B, self.hp.max_len, self.hp.embed_dim))
        for wi, w in enumerate(self.hp.widths):
            sl = slice(wi * f, (wi + 1) * f)
            pooled_w = cache["pooled"][:, sl]
            dpooled_w = dpooled[:, sl] * (pooled_w > 0.0)
            argmax_w = cache["argmax"][:, sl]
            windows = cache["wins"][w]
            P = windows.shape[1]
            a = np.zeros((B, P, f))
            np.put_along_axis(a, argmax_w[:, None, :],
                              dpooled_w[:, None, :], axis=1)
            flat_dconv = a.reshape(B * P, f)
            flat_win = windows.reshape(B * P, -1)
            grads[f"filters_w{w}"] = flat_dconv.T @ flat_win
            grads[f"filter_biases_w{w}"] = flat_dconv.sum(axis=0)
            dwin = a @ self.filters[w]  # (B, P, w*d)
            d = self.hp.embed_dim
            for i in range(w):
                dX[:, i:P + i, :] += dwin[:, :, i * d:(i + 1) * d]
        dE = np.zeros_like(self.embedding)
        np.add.at(dE, ids, dX)
        grads["embedding"] = dE
        return grads


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    if rate <= 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def weighted_ce_loss(probs: np.ndarray, label_ids: np.ndarray,
                     class_weights: np.ndarray) -> float:
    """Mean over the batch of weight[y] * -log p[y]."""
    B = probs.shape[0]
    picked = probs[np.arange(B), label_ids]
    w = class_weights[label_ids]
    return float(np.mean(-w * np.log(np.maximum(picked, 1e-300))))


def loss_and_grads(model: CnnModel, ids: np.ndarray, label_ids: np.ndarray,
                   task: TaskId, class_weights: np.ndarray,
                   dropout_mask: np.ndarray | None = None):
    probs, cache = model.forward_batch(ids, task, dropout_mask)
    loss = weighted_ce_loss(probs, label_ids, class_weights)
    grads = model.backward(cache, label_ids, class_weights)
    return loss, grads


# -- training -------------------------------------------------------------


def _class_weight_vector(spec, label_counts: np.ndarray) -> np.ndarray:
    if spec is None:
        return np.ones(NUM_LABELS)
    if isinstance(spec, dict):
        return np.array([float(spec.get(lab, 1.0)) for lab in LABELS])
    if spec == "auto":
        present = label_counts > 0
        total = label_counts.sum()
        w = np.ones(NUM_LABELS)
        w[present] = total / (present.sum() * label_counts[present])
        return w
    raise ValueError(f"bad class_weights spec: {spec!r}")


def train(model_init: CnnModel, corpus, config: TrainConfig):
    """Train a copy of model_init on (text, task, label) examples.

    Batches alternate strictly between tasks (absent tasks are skipped), the
    shared embedding and filters learn from both tasks while each softmax
    head learns only from its own.  Fully deterministic for a fixed seed.
    Returns (trained model, per-epoch per-task metrics).
    """
    examples = list(corpus)
    if not examples:
        raise EmptyCorpus("training corpus is empty")
    model = copy.deepcopy(model_init)
    hp = model.hp

    per_task: dict[TaskId, tuple[np.ndarray, np.ndarray]] = {}
    weights: dict[TaskId, np.ndarray] = {}
    for task in TASKS:
        rows = [e for e in examples if e.task is task]
        if not rows:
            continue
        ids = np.array([encode(tokenize(e.text), model.vocab, hp.max_len)
                        for e in rows], dtype=np.int64)
        labels = np.array([LABEL_INDEX[e.label] for e in rows], dtype=np.int64)
        counts = np.bincount(labels, minlength=NUM_LABELS).astype(np.float64)
        if (counts > 0).sum() == 1:
            warnings.warn(f"{task.value}: every example has the same label; "
                          "training anyway", stacklevel=2)
        per_task[task] = (ids, labels)
        weights[task] = _class_weight_vector(config.class_weights, counts)

    rng = np.random.default_rng(config.seed)
    metrics: list[EpochMetrics] = []
    for epoch in range(1, config.epochs + 1):
        orders = {t: rng.permutation(len(per_task[t][0]))
                  for t in TASKS if t in per_task}
        cursors = {t: 0 for t in orders}
        while any(cursors[t] < len(orders[t]) for t in cursors):
            for task in TASKS:
                if task not in cursors or cursors[task] >= len(orders[task]):
                    continue
                ids, labels = per_task[task]
                take = orders[task][cursors[task]:cursors[task] + config.batch_size]
                cursors[task] += config.batch_size
                batch_ids, batch_labels = ids[take], labels[take]
                mask = _dropout_mask(rng, (len(take), hp.pooled_dim),
                                     hp.dropout_rate)
                _, grads = loss_and_grads(model, batch_ids, batch_labels,
                                          task, weights[task], mask)
                for name, arr in model.parameters():
                    if name in grads:
                        arr -= config.lr * grads[name]
                model.assert_finite()
        epoch_accs = []
        for task in TASKS:
            if task not in per_task:
                continue
            ids, labels = per_task[task]
            probs, _ = model.forward_batch(ids, task)
            loss = weighted_ce_loss(probs, labels, weights[task])
            acc = float(np.mean(probs.argmax(axis=1) == labels))
            metrics.append(EpochMetrics(epoch, task, loss, acc))
            epoch_accs.append(acc)
        if (config.stop_at_accuracy is not None
                and min(epoch_accs) >= config.stop_at_accuracy):
            break
    return model, metrics


# -- inference ------------------------------------------------------------


def predict(model: CnnModel, text: str, task: TaskId) -> Classification:
    """Classify one text.  Pure: the same text always yields the same probs."""
    ids = encode(tokenize(text), model.vocab, model.hp.max_len)
    result = model.forward(ids, task)
    label_idx = int(result.probs.argmax())  # first max: lowest label index
    return Classification(
        label=LABELS[label_idx],
        probs=[float(p) for p in result.probs],
        model_version=model.version,
        classified_at=int(time.time()),
    )


# -- serialization --------------------------------------------------------


def save_model(model: CnnModel, path) -> None:
    """Write the versioned binary container (header JSON + float64 tensors)."""
    vocab_tokens = [None] * len(model.vocab.token_to_id)
    for tok, tid in model.vocab.token_to_id.items():
        vocab_tokens[tid - 2] = tok
    manifest = [{"name": name, "shape": list(arr.shape)}
                for name, arr in model.parameters()]
    header = {
        "format_version": 1,
        "model_version": model.version,
        "hyperparams": {
            "embed_dim": model.hp.embed_dim,
            "widths": list(model.hp.widths),
            "filters_per_width": model.hp.filters_per_width,
            "max_len": model.hp.max_len,
            "dropout_rate": model.hp.dropout_rate,
        },
        "vocab": {"min_freq": model.vocab.min_freq, "tokens": vocab_tokens},
        "tensors": manifest,
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FORMAT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in model.parameters():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> CnnModel:
    """Read a model container; raises FormatVersionMismatch on bad files."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(FORMAT_MAGIC) + 4 or not data.startswith(FORMAT_MAGIC):
        raise FormatVersionMismatch(f"{path}: not a recognized model file")
    off = len(FORMAT_MAGIC)
    (header_len,) = struct.unpack_from("<I", data, off)
    off += 4
    try:
        header = json.loads(data[off:off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatVersionMismatch(f"{path}: corrupt header") from exc
    off += header_len
    if header.get("format_version") != 1:
        raise FormatVersionMismatch(
            f"{path}: unsupported format version {header.get('format_version')}")
    hp_raw = header["hyperparams"]
    hp = CnnHyperparams(
        embed_dim=hp_raw["embed_dim"],
        widths=tuple(hp_raw["widths"]),
        filters_per_width=hp_raw["filters_per_width"],
        max_len=hp_raw["max_len"],
        dropout_rate=hp_raw["dropout_rate"],
    )
    vocab = Vocab({tok: i + 2 for i, tok in enumerate(header["vocab"]["tokens"])},
                  min_freq=header["vocab"]["min_freq"])
    model = CnnModel(vocab, hp, header["model_version"])
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape)) * 8
        if off + nbytes > len(data):
            raise FormatVersionMismatch(f"{path}: truncated tensor data")
        arr = np.frombuffer(data[off:off + nbytes], dtype="<f8").reshape(shape)
        model.set_parameter(entry["name"], arr.astype(np.float64))
        off += nbytes
    return model


def build_model_from_corpus(corpus, hp: CnnHyperparams | None = None,
                            min_freq: int = 1, seed: int = 0,
                            version: str = "dev") -> CnnModel:
    """Vocabulary + seeded init from a corpus, ready for train()."""
    examples = list(corpus)
    vocab = build_vocab((e.text for e in examples), min_freq=min_freq)
    return CnnModel.initialize(vocab, hp or CnnHyperparams(), seed=seed,
                               version=version)
