"""Does polishing labels to kkt 1e-8 make replans converge in <=3 iters?"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, "tests")
from test_coldstart import desk_limits  # noqa: E402

from tjplan.data import generate_dataset, load_dataset  # noqa: E402
from tjplan.plan import PlanRequest, assemble_warm_start, encode, plan  # noqa: E402
from tjplan.sqp import SqpSettings  # noqa: E402

out = Path(tempfile.mkdtemp()) / "dbg"
limits = desk_limits(3)
manifest = generate_dataset(60, (4, 8), limits, 0.5, 101, out, jobs=1)
records, _ = load_dataset(out, validate=False)

tight = SqpSettings(kkt_tolerance=1e-8)
for r in records:
    req = PlanRequest(r.path(), limits, r.lam,
                      collocation_density=manifest.collocation_density,
                      margin=manifest.margin)
    dv = assemble_warm_start(r.control_points, r.knots, limits)
    try:
        polished = plan(req, dv, tight)
    except Exception as e:
        print(f"record {r.index}: polish failed {type(e).__name__}")
        continue
    p_iters = sum(a.solver.iterations for a in polished.attempts)
    dv2 = encode(polished.trajectory)
    replan = plan(req, dv2)
    r_iters = sum(a.solver.iterations for a in replan.attempts)
    flag = " <-- SLOW" if r_iters > 3 else ""
    print(f"record {r.index}: polish {p_iters} (att {len(polished.attempts)}) "
          f"replan {r_iters}{flag}")
