"""Experiment runner: configuration, training loop, timing, persistence.

One process runs one experiment.  Everything is deterministic given the
config seed: parameter init, batch shuffling, and the sequential gradient
reduction over each batch.  Results accumulate in an append-only
``runs.csv`` keyed by config hash, with a JSON record (epoch curves, config
echo) and serialized final weights per run.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cells import (
    CellParams,
    backward_sequence,
    forward_sequence,
    get_cell,
    init_params,
    param_census,
    save_params,
    zero_state,
)
from .data import (
    IntrusionSchema,
    SequenceDataset,
    batches,
    load_mnist,
    prepare_intrusion,
    subset,
)
from .heads import dense_backward, dense_forward, init_dense, softmax_xent
from .metrics import MetricsReport, confusion, report_from_confusion
from .optim import adam_init, adam_step

DATA_DIR_ENV = "RNNLAB_DATA_DIR"

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

# Fields that identify a run for hashing purposes; paths are excluded so the
# same protocol hashes identically on different machines.
_HASH_FIELDS = (
    "architecture",
    "dataset",
    "hidden_size",
    "reshape",
    "window",
    "label_mode",
    "batch_size",
    "epochs",
    "lr",
    "beta1",
    "beta2",
    "eps",
    "gate_fn",
    "seed",
    "clip_norm",
    "bptt_truncate",
    "limit_train",
    "limit_test",
    "test_fraction",
)


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass
class ExperimentConfig:
    architecture: str = "litelstm"
    dataset: str = "mnist"
    hidden_size: int = 100
    reshape: str = "rows28x28"
    window: int | None = None
    label_mode: str = "binary"
    batch_size: int | None = None  # default: 128 for mnist, 32 for intrusion_csv
    epochs: int = 20
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    gate_fn: str = "logistic"
    seed: int = 0
    clip_norm: float | None = None
    bptt_truncate: int | None = None  # backward window; None = full sequence
    data_dir: str | None = None
    csv_path: str | None = None
    schema_path: str | None = None
    out_dir: str = "runs"
    limit_train: int | None = None
    limit_test: int | None = None
    eval_batch_size: int = 512
    test_fraction: float = 0.2
    eval_every_epoch: bool = True

    def resolved_batch_size(self) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 128 if self.dataset == "mnist" else 32

    def resolved_data_dir(self) -> Path:
        if self.data_dir:
            return Path(self.data_dir)
        env = os.environ.get(DATA_DIR_ENV)
        if env:
            return Path(env)
        return Path("data/mnist")

    def config_hash(self) -> str:
        payload = {name: getattr(self, name) for name in _HASH_FIELDS}
        payload["batch_size"] = self.resolved_batch_size()
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def validate(self) -> None:
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.hidden_size < 1:
            raise ValueError(f"hidden size must be >= 1, got {self.hidden_size}")
        if self.resolved_batch_size() < 1:
            raise ValueError(f"batch size must be >= 1, got {self.resolved_batch_size()}")
        if self.bptt_truncate is not None and self.bptt_truncate < 1:
            raise ValueError(f"bptt_truncate must be >= 1, got {self.bptt_truncate}")
        if self.dataset not in ("mnist", "intrusion_csv"):
            raise ValueError(f"unknown dataset {self.dataset!r}")


@dataclass
class RunRecord:
    config: dict
    config_hash: str
    arch: str
    dataset: str
    param_count: int
    train_losses: list[float]
    epoch_metrics: list[dict]
    time_train_s: float
    time_total_s: float
    final: MetricsReport
    version: str = __version__

    def to_csv_row(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "arch": self.arch,
            "dataset": self.dataset,
            "params": str(self.param_count),
            "time_train_s": f"{self.time_train_s:.3f}",
            "time_total_s": f"{self.time_total_s:.3f}",
            "accuracy": f"{self.final.accuracy:.10f}",
            "precision": f"{self.final.precision:.10f}",
            "recall": f"{self.final.recall:.10f}",
            "f1": f"{self.final.f1:.10f}",
        }


RUNS_CSV_COLUMNS = (
    "config_hash",
    "arch",
    "dataset",
    "params",
    "time_train_s",
    "time_total_s",
    "accuracy",
    "precision",
    "recall",
    "f1",
)


def load_datasets(cfg: ExperimentConfig) -> tuple[SequenceDataset, SequenceDataset]:
    """Resolve the configured dataset into (train, test) splits."""
    if cfg.dataset == "mnist":
        data_dir = cfg.resolved_data_dir()
        paths = []
        for split in ("train", "test"):
            images, labels = MNIST_FILES[split]
            for name in (images, labels):
                p = data_dir / name
                if not p.exists():
                    raise FileNotFoundError(
                        f"missing dataset file {p}; point --data-dir or ${DATA_DIR_ENV} "
                        f"at a directory holding the four IDX files"
                    )
            paths.append((data_dir / images, data_dir / labels))
        train = load_mnist(*paths[0], reshape=cfg.reshape)
        test = load_mnist(*paths[1], reshape=cfg.reshape)
    else:
        if not cfg.csv_path or not cfg.schema_path:
            raise ValueError("intrusion_csv dataset requires csv_path and schema_path")
        schema = IntrusionSchema.from_json(cfg.schema_path)
        train, test = prepare_intrusion(
            cfg.csv_path,
            cfg.label_mode,
            schema,
            window_length=cfg.window,
            test_fraction=cfg.test_fraction,
            seed=cfg.seed,
        )
    if cfg.limit_train is not None:
        train = subset(train, cfg.limit_train, seed=cfg.seed)
    if cfg.limit_test is not None:
        test = subset(test, cfg.limit_test, seed=cfg.seed + 1)
    return train, test


def evaluate(cell, params: CellParams, head, ds: SequenceDataset, batch_size: int = 512) -> np.ndarray:
    """Confusion matrix of argmax predictions over a dataset."""
    preds = np.empty(ds.n_samples, dtype=np.int64)
    pos = 0
    for batch in batches(ds, batch_size, shuffle=False):
        B = batch.labels.shape[0]
        states, _ = forward_sequence(cell, params, batch.inputs, zero_state(cell, params.n, B))
        logits = dense_forward(head, states[-1].h)
        preds[pos : pos + B] = np.argmax(logits, axis=-1)
        pos += B
    return confusion(preds, ds.labels, ds.n_classes)


def _metrics_from_cm(cm, ds: SequenceDataset, wall_minutes: float, param_count: int) -> MetricsReport:
    positive = None
    if ds.n_classes == 2 and "attack" in ds.class_names:
        positive = ds.class_names.index("attack")
    return report_from_confusion(cm, wall_minutes, param_count, positive=positive)


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Train one model per the config and persist the results."""
    cfg.validate()
    cell = get_cell(cfg.architecture)
    train, test = load_datasets(cfg)

    n, m, k = cfg.hidden_size, train.features, train.n_classes
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cell, n, m, rng, cfg.gate_fn)
    head = init_dense(k, n, rng)
    trainable = dict(params.arrays, **head)
    opt = adam_init(trainable, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.clip_norm)
    param_count = param_census(params)["scalars"] + sum(a.size for a in head.values())

    t_start = time.perf_counter()
    train_time = 0.0
    losses: list[float] = []
    epoch_metrics: list[dict] = []
    B = cfg.resolved_batch_size()
    T = train.timesteps

    for epoch in range(cfg.epochs):
        t_epoch = time.perf_counter()
        epoch_loss = 0.0
        n_batches = 0
        for b_idx, batch in enumerate(batches(train, B, shuffle=True, seed=[cfg.seed, epoch])):
            bsz = batch.labels.shape[0]
            states, caches = forward_sequence(cell, params, batch.inputs, zero_state(cell, n, bsz))
            h_last = states[-1].h
            logits = dense_forward(head, h_last)
            loss, d_logits = softmax_xent(logits, batch.labels)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss {loss} at epoch {epoch}, batch {b_idx}"
                )
            head_grads, d_h_last = dense_backward(head, h_last, d_logits)
            # the loss reads only the final h, so truncated BPTT is simply a
            # backward pass over the last K cached steps
            K = T if cfg.bptt_truncate is None else min(cfg.bptt_truncate, T)
            d_h_list = [np.zeros_like(d_h_last) for _ in range(K - 1)] + [d_h_last]
            seq_grads = backward_sequence(cell, params, caches[-K:], d_h_list)
            grads = dict(seq_grads.by_name, **head_grads)
            trainable, opt = adam_step(trainable, grads, opt)
            params.arrays = {name: trainable[name] for name in params.arrays}
            head = {name: trainable[name] for name in head}
            epoch_loss += loss
            n_batches += 1
        train_time += time.perf_counter() - t_epoch
        losses.append(epoch_loss / max(n_batches, 1))

        if cfg.eval_every_epoch or epoch == cfg.epochs - 1:
            cm = evaluate(cell, params, head, test, cfg.eval_batch_size)
            rep = _metrics_from_cm(cm, test, 0.0, param_count)
            epoch_metrics.append(
                {"epoch": epoch, "train_loss": losses[-1], "accuracy": rep.accuracy, "f1": rep.f1}
            )

    cm = evaluate(cell, params, head, test, cfg.eval_batch_size)
    total_time = time.perf_counter() - t_start
    final = _metrics_from_cm(cm, test, train_time / 60.0, param_count)

    record = RunRecord(
        config=asdict(cfg),
        config_hash=cfg.config_hash(),
        arch=cfg.architecture,
        dataset=cfg.dataset,
        param_count=param_count,
        train_losses=losses,
        epoch_metrics=epoch_metrics,
        time_train_s=train_time,
        time_total_s=total_time,
        final=final,
    )
    persist_record(cfg, record, params, head)
    return record


def persist_record(cfg: ExperimentConfig, record: RunRecord, params: CellParams, head) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    append_runs_csv(out / "runs.csv", record)
    payload = {
        "config": record.config,
        "config_hash": record.config_hash,
        "version": record.version,
        "param_count": record.param_count,
        "train_losses": record.train_losses,
        "epoch_metrics": record.epoch_metrics,
        "time_train_s": record.time_train_s,
        "time_total_s": record.time_total_s,
        "final": {
            "accuracy": record.final.accuracy,
            "precision": record.final.precision,
            "recall": record.final.recall,
            "f1": record.final.f1,
            "macro_f1": record.final.macro_f1,
            "micro_f1": record.final.micro_f1,
            "notes": record.final.notes,
        },
    }
    stamp = time.strftime("%Y%m%d-%H%M%S")
    with open(out / f"run-{record.config_hash}-{stamp}.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    save_params(out / f"weights-{record.config_hash}.bin", params, extra=head)


def append_runs_csv(path: Path, record: RunRecord) -> None:
    row = record.to_csv_row()
    new = not path.exists()
    with open(path, "a") as fh:
        if new:
            fh.write(",".join(RUNS_CSV_COLUMNS) + "\n")
        fh.write(",".join(row[c] for c in RUNS_CSV_COLUMNS) + "\n")
