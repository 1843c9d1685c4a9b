"""Regenerates the committed test fixtures.  Deterministic; run from the
repo root:

    python tests/fixtures/generate.py

Produces:
  tiny-images-idx3-ubyte / tiny-labels-idx1-ubyte
      two fabricated 4x3 images with known bytes, for exact loader checks
  iot_synthetic.csv / iot_schema.json
      synthetic intrusion-style feature log: windows of 10 consecutive rows,
      each window drawn from one of four Gaussian feature regimes (normal
      traffic plus three attack types)
"""

import csv
import json
import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent

FEATURES = ["byte_rate", "pkt_rate", "syn_ratio", "dst_entropy", "pkt_len_mean", "iat_ms"]

# Per-regime feature means; scales are arbitrary (the loader normalizes).
REGIMES = {
    "normal": [120.0, 40.0, 0.08, 2.2, 520.0, 35.0],
    "dos_syn_flood": [480.0, 260.0, 0.85, 0.9, 95.0, 4.0],
    "arp_spoof": [90.0, 55.0, 0.05, 1.1, 180.0, 22.0],
    "scan_port_os": [60.0, 150.0, 0.55, 3.4, 70.0, 9.0],
}
WINDOW = 10
COUNTS = {"normal": 160, "dos_syn_flood": 60, "arp_spoof": 50, "scan_port_os": 50}


def write_tiny_idx() -> None:
    rows, cols = 4, 3
    img0 = bytes(range(rows * cols))
    img1 = bytes((7 * i + 3) % 256 for i in range(rows * cols))
    with open(HERE / "tiny-images-idx3-ubyte", "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, 2, rows, cols))
        fh.write(img0)
        fh.write(img1)
    with open(HERE / "tiny-labels-idx1-ubyte", "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, 2))
        fh.write(bytes([7, 1]))


def write_iot_csv() -> None:
    rng = np.random.default_rng(20240817)
    window_labels = [name for name, k in COUNTS.items() for _ in range(k)]
    order = rng.permutation(len(window_labels))

    rows = []
    for w in order:
        label = window_labels[w]
        mu = np.asarray(REGIMES[label])
        sigma = 0.12 * np.abs(mu)
        # whole-window drift plus per-row noise, so rows within a window cohere
        drift = rng.normal(0.0, 0.6, size=len(mu)) * sigma
        for _ in range(WINDOW):
            sample = mu + drift + rng.normal(0.0, 1.0, size=len(mu)) * sigma
            rows.append((np.maximum(sample, 0.0), label))

    with open(HERE / "iot_synthetic.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURES + ["label"])
        for values, label in rows:
            writer.writerow([f"{v:.6f}" for v in values] + [label])

    schema = {
        "feature_columns": FEATURES,
        "label_column": "label",
        "label_map": {name: name for name in REGIMES},
        "window_length": WINDOW,
    }
    with open(HERE / "iot_schema.json", "w") as fh:
        json.dump(schema, fh, indent=2)


if __name__ == "__main__":
    write_tiny_idx()
    write_iot_csv()
    print("fixtures written to", HERE)
