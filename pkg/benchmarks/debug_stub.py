"""Trace why replanning from a stored optimum can need >3 iterations."""

import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, "tests")
from test_coldstart import desk_limits  # noqa: E402

from tjplan.data import generate_dataset, load_dataset  # noqa: E402
from tjplan.plan import PlanRequest, assemble_warm_start, encode, plan  # noqa: E402
from tjplan.plan.nlp import TrajectoryNlp  # noqa: E402
from tjplan.sqp import SqpSettings, solve  # noqa: E402

out = Path(tempfile.mkdtemp()) / "dbg"
limits = desk_limits(3)
manifest = generate_dataset(60, (4, 8), limits, 0.5, 101, out, jobs=1)
records, _ = load_dataset(out, validate=False)

for r in records:
    dv = assemble_warm_start(r.control_points, r.knots, limits)
    req = PlanRequest(r.path(), limits, r.lam,
                      collocation_density=manifest.collocation_density,
                      margin=manifest.margin)
    res = plan(req, dv)
    iters = sum(a.solver.iterations for a in res.attempts)
    if iters > 3:
        print(f"record {r.index}: iters {iters} attempts {len(res.attempts)}")
        nlp = TrajectoryNlp(r.path(), limits, r.lam, margin=manifest.margin,
                            collocation_density=manifest.collocation_density)
        sr = solve(nlp.as_problem(), dv.flatten(), SqpSettings(trace=True))
        for row in sr.trace:
            print("   ", {k: (f"{v:.3e}" if isinstance(v, float) else v)
                          for k, v in row.items()})
        # how far is the round-tripped start from the stored decision?
        d0 = dv.flatten()
        stored = encode(r.trajectory()).flatten()
        print("    start vs stored max diff:", np.abs(d0 - stored).max())
        print("    kkt at end:", sr.kkt_residual, sr.status)
        break
