"""Compare training settings for the 50-epoch relative-decrease target."""

import sys
import time

import numpy as np

sys.path.insert(0, "tests")

from tjplan.data import load_dataset, record_to_samples  # noqa: E402
from tjplan.model import ModelConfig, TrainSettings, train  # noqa: E402

records, manifest = load_dataset("/tmp/full/ds", validate=False)
config = ModelConfig(joints=3, max_waypoints=8, dim=16, heads=4,
                     context_layers=2, source_layers=2, dropout=0.0)
train_s = [s for r in records if r.split == "train"
           for s in record_to_samples(r, config)]
val_s = [s for r in records if r.split == "validation"
         for s in record_to_samples(r, config)]

configs = {
    "B-knotheavy": TrainSettings(learning_rate=2e-3, weight_decay=1e-4,
                                 batch_size=32, epochs=60, theta1=0.5,
                                 theta2=2.0, plateau_patience=10),
    "C-fastlr": TrainSettings(learning_rate=3e-3, weight_decay=1e-4,
                              batch_size=64, epochs=60, plateau_patience=10),
    "D-knotonly-ish": TrainSettings(learning_rate=2e-3, weight_decay=1e-4,
                                    batch_size=32, epochs=60, theta1=0.25,
                                    theta2=1.0, plateau_patience=10),
}
for name, settings in configs.items():
    t0 = time.time()
    _, history = train(train_s, val_s, config, settings,
                       np.random.default_rng(7))
    e1 = history[0]["validation_loss"]
    b50 = min(h["validation_loss"] for h in history[:50])
    b60 = min(h["validation_loss"] for h in history)
    print(f"{name}: epoch1 {e1:.4f} best50 {b50:.4f} ratio {b50/e1:.3f} "
          f"best60 {b60:.4f} [{time.time()-t0:.0f}s]", flush=True)
