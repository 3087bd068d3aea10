"""
Tag selection and a small Monte Carlo sweep
===========================================

When several tags are in range, the reader solves the beamforming
problem per tag and serves the one with the best feasible SNR.  This
script first shows that selection step on a single channel draw, then
runs a small sweep over the transmit power comparing the detection-aware
design against two classical baselines: a matched filter that pretends
the direct link was canceled, and an MMSE filter that treats it as
interference.  The sweep writes the same CSV the command-line interface
produces.
"""

import math
import os
import tempfile
from collections import defaultdict

import numpy as np

from backci.channel import SystemParams, gen_channel_set
from backci.harness import SweepConfig, run_sweep
from backci.selection import greedy_select

# One draw, three candidate tags: the per-tag SNRs differ, and the
# greedy rule picks the best feasible one.
params = SystemParams(K=3, M=4, seed=0)
chans = gen_channel_set(params, 9)
res = greedy_select(chans, params, "consensual")
print("per-tag consensual solves (seed 9):")
for k, sol in enumerate(res.per_tag, start=1):
    if sol is None or not sol.feasible:
        print(f"  tag {k}: infeasible")
    else:
        print(f"  tag {k}: {10 * math.log10(sol.snr):7.3f} dB")
print(f"selected tag: {res.selected_tag}\n")

# A small sweep: 30 trials per transmit power, three algorithms.  The
# benchmark schemes rate their fixed filters on the same channel draws,
# so every row with the same (value, trial) shares one realization.
out = os.path.join(tempfile.gettempdir(), "demo_sweep.csv")
cfg = SweepConfig(
    sweep_var="sigma_s2",
    values=[0.2, 0.4, 0.6, 0.8],
    trials=30,
    algorithms=["consensual", "canceled_dli", "harmful_dli"],
    base=SystemParams(K=3, M=4),
    out_path=out,
)
records = run_sweep(cfg, workers=2)
print(f"sweep produced {len(records)} records -> {out}")

# Aggregate: mean SNR of feasible rows per (power, algorithm), plus the
# feasibility rate of the detection-aware design.
cells = defaultdict(list)
for r in records:
    if r.feasible:
        cells[(r.value, r.algorithm)].append(r.snr_db)

print("\nsigma_s2   consensual     canceled      harmful   feas%")
for value in cfg.values:
    row = [f"{value:8.2f}"]
    for alg in cfg.algorithms:
        xs = cells.get((value, alg), [])
        row.append(f"{np.mean(xs):9.3f} dB" if xs else "        --")
    n_feas = len(cells.get((value, "consensual"), []))
    row.append(f"{100.0 * n_feas / cfg.trials:5.0f}")
    print("  ".join(row))

print("\n(canceled_dli assumes the direct link was removed in hardware "
      "and\n matched-filters the backscatter alone; harmful_dli keeps "
      "the direct\n link but spends degrees of freedom suppressing it.  "
      "The detection-aware\n design beats both because it recruits the "
      "direct link as signal\n instead of treating it as a nuisance.)")

with open(out, "r", encoding="ascii") as fh:
    head = [next(fh) for _ in range(3)]
print("\nfirst CSV lines:")
for line in head:
    print("  " + line.rstrip())
