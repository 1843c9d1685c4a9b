"""Dataset ingestion and batching.

Two sources are supported: the classic handwritten-digit corpus in its
native IDX binary format, and intrusion-detection feature tables as CSV
(pre-extracted features; raw packet captures are out of scope).  Loaders
return immutable :class:`SequenceDataset` values; batching is deterministic
given a seed.
"""

from __future__ import annotations

import csv
import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

RESHAPE_MODES = ("rows28x28", "pixels784x1")


@dataclass
class SequenceDataset:
    """Fixed-length sequences with one class label per sequence.

    sequences: (N, T, m) float64; labels: (N,) integer class indices.
    """

    sequences: np.ndarray
    labels: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        if self.sequences.ndim != 3:
            raise ValueError(f"sequences must be (N, T, m), got shape {self.sequences.shape}")
        if len(self.labels) != len(self.sequences):
            raise ValueError(
                f"{len(self.sequences)} sequences but {len(self.labels)} labels"
            )
        if not np.all(np.isfinite(self.sequences)):
            raise ValueError("sequences contain non-finite values")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError(
                f"labels outside [0, {len(self.class_names)}): "
                f"min {self.labels.min()}, max {self.labels.max()}"
            )

    @property
    def n_samples(self) -> int:
        return self.sequences.shape[0]

    @property
    def timesteps(self) -> int:
        return self.sequences.shape[1]

    @property
    def features(self) -> int:
        return self.sequences.shape[2]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass
class Batch:
    """Time-major batch: inputs (T, B, m), labels (B,)."""

    inputs: np.ndarray
    labels: np.ndarray


def _read_idx_header(blob: bytes, path, expected_magic: int, n_dims: int) -> tuple:
    need = 4 * (1 + n_dims)
    if len(blob) < need:
        raise ValueError(f"{path}: truncated IDX header, file ends at byte {len(blob)}")
    magic = struct.unpack_from(">I", blob, 0)[0]
    if magic != expected_magic:
        raise ValueError(
            f"{path}: bad IDX magic at byte 0: got 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    dims = struct.unpack_from(f">{n_dims}I", blob, 4)
    return dims


def load_mnist(images_path, labels_path, reshape: str = "rows28x28") -> SequenceDataset:
    """Load an IDX image/label file pair into sequences of pixel rows.

    Pixels are scaled to [0, 1].  ``rows28x28`` reads each image as a
    sequence of rows (T=rows, m=cols); ``pixels784x1`` flattens it into a
    sequence of single pixels (T=rows*cols, m=1).
    """
    if reshape not in RESHAPE_MODES:
        raise ValueError(f"unknown reshape mode {reshape!r}, expected one of {RESHAPE_MODES}")
    images_path, labels_path = Path(images_path), Path(labels_path)

    blob = images_path.read_bytes()
    count, rows, cols = _read_idx_header(blob, images_path, IMAGE_MAGIC, 3)
    header = 16
    expected = header + count * rows * cols
    if len(blob) != expected:
        raise ValueError(
            f"{images_path}: payload ends at byte {len(blob)}, expected {expected} "
            f"for {count} images of {rows}x{cols}"
        )
    pixels = np.frombuffer(blob, dtype=np.uint8, offset=header).astype(np.float64) / 255.0

    lblob = labels_path.read_bytes()
    (lcount,) = _read_idx_header(lblob, labels_path, LABEL_MAGIC, 1)
    lheader = 8
    if len(lblob) != lheader + lcount:
        raise ValueError(
            f"{labels_path}: payload ends at byte {len(lblob)}, expected {lheader + lcount}"
        )
    if lcount != count:
        raise ValueError(
            f"image/label count mismatch: {images_path} has {count}, {labels_path} has {lcount}"
        )
    labels = np.frombuffer(lblob, dtype=np.uint8, offset=lheader).astype(np.int64)

    if reshape == "rows28x28":
        sequences = pixels.reshape(count, rows, cols)
    else:
        sequences = pixels.reshape(count, rows * cols, 1)
    return SequenceDataset(
        sequences=sequences,
        labels=labels,
        class_names=[str(d) for d in range(10)],
    )


@dataclass
class IntrusionSchema:
    """Column layout for an intrusion-detection feature CSV.

    ``label_map`` sends each raw label string to a class name; the class
    named "normal" is the benign class, everything else is an attack.
    Class indices follow first appearance in the map (binary mode always
    uses normal=0, attack=1).
    """

    feature_columns: list[str]
    label_column: str
    label_map: dict[str, str]
    window_length: int = 10

    @classmethod
    def from_json(cls, path) -> "IntrusionSchema":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            feature_columns=list(raw["feature_columns"]),
            label_column=raw["label_column"],
            label_map=dict(raw["label_map"]),
            window_length=int(raw.get("window_length", 10)),
        )

    def class_names(self, label_mode: str) -> list[str]:
        if label_mode == "binary":
            return ["normal", "attack"]
        names: list[str] = []
        for cls_name in self.label_map.values():
            if cls_name not in names:
                names.append(cls_name)
        return names


def load_intrusion_csv(
    path,
    label_mode: str,
    schema: IntrusionSchema,
    window_length: int | None = None,
) -> SequenceDataset:
    """Read a feature CSV and group consecutive rows into fixed windows.

    Binary mode labels a window 1 when any row in it is an attack;
    multiclass mode takes the majority class (ties break to the smaller
    class index).  A trailing partial window is dropped.  Features are
    returned unnormalized; see :func:`prepare_intrusion` for split-aware
    min-max scaling.
    """
    if label_mode not in ("binary", "multiclass"):
        raise ValueError(f"unknown label mode {label_mode!r}")
    W = window_length or schema.window_length
    if W < 1:
        raise ValueError(f"window length must be >= 1, got {W}")
    names = schema.class_names(label_mode)
    name_to_idx = {name: i for i, name in enumerate(names)}

    feats: list[list[float]] = []
    row_classes: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in schema.feature_columns + [schema.label_column] if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}; header has {reader.fieldnames}")
        for row in reader:
            line = reader.line_num
            values = []
            for col in schema.feature_columns:
                cell = row[col]
                try:
                    values.append(float(cell))
                except (TypeError, ValueError):
                    raise ValueError(
                        f"{path}: line {line}: non-numeric value {cell!r} in column {col!r}"
                    ) from None
            raw_label = row[schema.label_column]
            if raw_label not in schema.label_map:
                raise ValueError(
                    f"{path}: line {line}: unknown label {raw_label!r}; "
                    f"known labels: {sorted(schema.label_map)}"
                )
            cls_name = schema.label_map[raw_label]
            if label_mode == "binary":
                row_classes.append(0 if cls_name == "normal" else 1)
            else:
                row_classes.append(name_to_idx[cls_name])
            feats.append(values)

    n_windows = len(feats) // W
    if n_windows == 0:
        raise ValueError(f"{path}: {len(feats)} rows cannot fill a single window of {W}")
    m = len(schema.feature_columns)
    sequences = np.asarray(feats[: n_windows * W], dtype=np.float64).reshape(n_windows, W, m)
    classes = np.asarray(row_classes[: n_windows * W], dtype=np.int64).reshape(n_windows, W)

    labels = np.empty(n_windows, dtype=np.int64)
    for i in range(n_windows):
        if label_mode == "binary":
            labels[i] = 1 if np.any(classes[i] == 1) else 0
        else:
            counts = np.bincount(classes[i], minlength=len(names))
            labels[i] = int(np.argmax(counts))

    if len(np.unique(labels)) < 2:
        warnings.warn(
            f"{path}: degenerate class balance, every window labeled "
            f"{names[int(labels[0])]!r}",
            stacklevel=2,
        )
    return SequenceDataset(sequences=sequences, labels=labels, class_names=names)


def stratified_split(
    ds: SequenceDataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[SequenceDataset, SequenceDataset]:
    """Deterministic per-class split; every class contributes ~test_fraction."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx: list[np.ndarray] = []
    for cls in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == cls)
        if len(members) == 0:
            continue
        members = members[rng.permutation(len(members))]
        n_test = max(1, int(round(test_fraction * len(members)))) if len(members) > 1 else 0
        test_idx.append(members[:n_test])
    test_mask = np.zeros(ds.n_samples, dtype=bool)
    if test_idx:
        test_mask[np.concatenate(test_idx)] = True

    def take(mask):
        return SequenceDataset(
            sequences=ds.sequences[mask],
            labels=ds.labels[mask],
            class_names=list(ds.class_names),
        )

    return take(~test_mask), take(test_mask)


def fit_minmax(ds: SequenceDataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature min and max over every row of every sequence."""
    flat = ds.sequences.reshape(-1, ds.features)
    return flat.min(axis=0), flat.max(axis=0)


def apply_minmax(ds: SequenceDataset, lo: np.ndarray, hi: np.ndarray) -> SequenceDataset:
    """Apply the affine min-max transform fitted elsewhere (typically on the
    training split).  The fitted split lands in [0, 1]; values outside the
    fitted range map outside it, unclipped.  Zero-range columns map to 0."""
    span = hi - lo
    safe = np.where(span == 0, 1.0, span)
    scaled = (ds.sequences - lo) / safe
    scaled[..., span == 0] = 0.0
    return SequenceDataset(sequences=scaled, labels=ds.labels, class_names=list(ds.class_names))


def prepare_intrusion(
    path,
    label_mode: str,
    schema: IntrusionSchema,
    window_length: int | None = None,
    test_fraction: float = 0.2,
    seed: int = 0,
) -> tuple[SequenceDataset, SequenceDataset]:
    """Load, split stratified, then min-max normalize using training-split
    statistics only (applied unchanged to the test split)."""
    ds = load_intrusion_csv(path, label_mode, schema, window_length)
    train, test = stratified_split(ds, test_fraction=test_fraction, seed=seed)
    lo, hi = fit_minmax(train)
    return apply_minmax(train, lo, hi), apply_minmax(test, lo, hi)


def batches(ds: SequenceDataset, batch_size: int, shuffle: bool = False, seed=0):
    """Yield time-major batches covering the dataset exactly once.

    The permutation is deterministic given the seed; the final short batch
    is emitted, not dropped.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    order = np.arange(ds.n_samples)
    if shuffle:
        order = np.random.default_rng(seed).permutation(ds.n_samples)
    for start in range(0, ds.n_samples, batch_size):
        idx = order[start : start + batch_size]
        yield Batch(
            inputs=np.ascontiguousarray(ds.sequences[idx].transpose(1, 0, 2)),
            labels=ds.labels[idx],
        )


def subset(ds: SequenceDataset, count: int, seed: int = 0) -> SequenceDataset:
    """Deterministic random subset of ``count`` samples."""
    if count >= ds.n_samples:
        return ds
    idx = np.random.default_rng(seed).permutation(ds.n_samples)[:count]
    return SequenceDataset(
        sequences=ds.sequences[idx],
        labels=ds.labels[idx],
        class_names=list(ds.class_names),
    )
