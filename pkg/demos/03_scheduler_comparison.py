#!/usr/bin/env python3
"""Compare the four schedulers over a batch of random dense instances.

Prints mean totals normalized to the LP-ordered list scheduler, the
experiment the comparison methodology is built around.
"""

import numpy as np

from coflowsched import lp_ii_gb, lp_ov_gb, lp_ov_ls, solve_ordering_lp, varys
from coflowsched.sim import total_weighted_completion, validate
from coflowsched.workload import SyntheticConfig, generate

REPS = 5
totals = {"lp-ov-ls": [], "varys": [], "lp-ii-gb": [], "lp-ov-gb": []}
bounds = []

for rep in range(REPS):
    inst = generate(SyntheticConfig(n_ports=8, n_coflows=24, kind="dense", seed=300 + rep))
    result = solve_ordering_lp(inst)
    bounds.append(result.objective)
    for name, sched in (
        ("lp-ov-ls", lp_ov_ls(inst, result)),
        ("varys", varys(inst)),
        ("lp-ii-gb", lp_ii_gb(inst)),
        ("lp-ov-gb", lp_ov_gb(inst, result)),
    ):
        assert validate(sched, inst).ok
        totals[name].append(total_weighted_completion(sched, inst))
    print(f"instance {rep}: " + "  ".join(
        f"{name}={totals[name][-1]:9.0f}" for name in totals))

base = np.mean(totals["lp-ov-ls"])
print(f"\nmeans over {REPS} dense instances (8 ports, 24 coflows, releases spread):")
for name, values in totals.items():
    mean = np.mean(values)
    print(f"  {name:9s} mean={mean:10.1f}  normalized={mean / base:.3f}")
print(f"  mean LP lower bound: {np.mean(bounds):.1f} "
      f"(lp-ov-ls ratio {base / np.mean(bounds):.3f})")
