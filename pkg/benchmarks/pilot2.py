"""Second pilot: polished labels + longer training."""

import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, "tests")
from test_coldstart import desk_limits  # noqa: E402

from tjplan.bench import BenchProblem, bench_compare  # noqa: E402
from tjplan.data import generate_dataset, load_dataset, record_to_samples  # noqa: E402
from tjplan.model import ModelConfig, TrainSettings, train  # noqa: E402
from tjplan.plan import PlanRequest, assemble_warm_start, plan  # noqa: E402

t0 = time.time()
out = Path(tempfile.mkdtemp()) / "pilot2"
limits = desk_limits(3)
manifest = generate_dataset(400, (4, 8), limits, 0.5, 101, out, jobs=1)
print(f"[{time.time()-t0:.0f}s] generated {manifest.total}", flush=True)

records, _ = load_dataset(out, validate=False)
config = ModelConfig(joints=3, max_waypoints=8, dim=16, heads=4,
                     context_layers=2, source_layers=2, dropout=0.0)
train_s = [s for r in records if r.split == "train"
           for s in record_to_samples(r, config)]
val_s = [s for r in records if r.split == "validation"
         for s in record_to_samples(r, config)]

settings = TrainSettings(learning_rate=2e-3, weight_decay=1e-4,
                         batch_size=32, epochs=400, plateau_patience=10)
t1 = time.time()
params, history = train(train_s, val_s, config, settings,
                        np.random.default_rng(7))
best = min(h["validation_loss"] for h in history)
print(f"[{time.time()-t1:.0f}s train] epoch1 {history[0]['validation_loss']:.4f} "
      f"epoch50 {history[49]['validation_loss']:.4f} best {best:.4f}", flush=True)

held = [r for r in records if r.split != "train"][:50]
problems = [
    BenchProblem(r.path(), limits, r.lam,
                 collocation_density=manifest.collocation_density,
                 margin=manifest.margin)
    for r in held
]
t2 = time.time()
report = bench_compare(problems, params, config,
                       methods=("cold-sqp", "warm-sqp"))
print(f"[{time.time()-t2:.0f}s bench] {report.summary()}", flush=True)

stub = []
for r in held[:30]:
    dv = assemble_warm_start(r.control_points, r.knots, limits)
    req = PlanRequest(r.path(), limits, r.lam,
                      collocation_density=manifest.collocation_density,
                      margin=manifest.margin)
    res = plan(req, dv)
    stub.append(sum(a.solver.iterations for a in res.attempts))
print("stub max:", max(stub), "all:", stub, flush=True)
print(f"total {time.time()-t0:.0f}s")
