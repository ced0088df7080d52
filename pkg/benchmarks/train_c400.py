"""Full 400-epoch run of the chosen settings + held-out benchmark."""

import sys
import time

import numpy as np

sys.path.insert(0, "tests")
from test_coldstart import desk_limits  # noqa: E402

from tjplan.bench import BenchProblem, bench_compare  # noqa: E402
from tjplan.data import load_dataset, record_to_samples  # noqa: E402
from tjplan.model import ModelConfig, TrainSettings, save_model, train  # noqa: E402

records, manifest = load_dataset("/tmp/full/ds", validate=False)
config = ModelConfig(joints=3, max_waypoints=8, dim=16, heads=4,
                     context_layers=2, source_layers=2, dropout=0.0)
train_s = [s for r in records if r.split == "train"
           for s in record_to_samples(r, config)]
val_s = [s for r in records if r.split == "validation"
         for s in record_to_samples(r, config)]

settings = TrainSettings(learning_rate=3e-3, weight_decay=1e-4,
                         batch_size=64, epochs=400, plateau_patience=10)
t0 = time.time()
params, history = train(train_s, val_s, config, settings,
                        np.random.default_rng(7))
e1 = history[0]["validation_loss"]
b50 = min(h["validation_loss"] for h in history[:50])
best = min(h["validation_loss"] for h in history)
print(f"[{time.time()-t0:.0f}s train] epoch1 {e1:.4f} best50 {b50:.4f} "
      f"ratio {b50/e1:.3f} best {best:.4f}", flush=True)
save_model(params, config, "/tmp/full/model_c400.bin")

limits = desk_limits(3)
held = [r for r in records if r.split != "train"][:110]
problems = [
    BenchProblem(r.path(), limits, r.lam,
                 collocation_density=manifest.collocation_density,
                 margin=manifest.margin)
    for r in held
]
report = bench_compare(problems, params, config,
                       methods=("cold-sqp", "warm-sqp"))
summary = report.summary()
print("bench:", summary, flush=True)
cold = {r.problem: r for r in report.rows if r.method == "cold-sqp"}
warm = {r.problem: r for r in report.rows if r.method == "warm-sqp"}
bad = [
    (p, (warm[p].objective - cold[p].objective) / abs(cold[p].objective))
    for p in sorted(cold)
    if p in warm and cold[p].converged and warm[p].converged
    and (warm[p].objective - cold[p].objective) / abs(cold[p].objective) > 0.01
]
print("pairs over 1%:", bad, flush=True)
