"""
Comparing receive beamformer designs on one channel draw
========================================================

Three ways to point a 4-antenna reader at the same backscatter tag: a
matched-style design that only keeps both detection floors satisfied
(consensual), a stricter design that additionally forbids the direct
link from ever hurting detection (evolved), and a classical MMSE filter
that simply suppresses the direct link as interference.  The first two
trade SNR for detection guarantees in different ways; the MMSE filter
maximizes neither.
"""

import numpy as np

from backci.beamforming import (
    consensual_sca,
    divergence_floors,
    evolved_sdp,
    mmse_beamformer,
)
from backci.channel import SystemParams, gen_channel_set
from backci.detection import detection_stats

params = SystemParams(K=1, M=4)
chans = gen_channel_set(params, 1)
h0, h1, hs = chans.tag_channels(0)
gamma = params.gamma

d_min, e_min, f_with, f_without = divergence_floors(params)
print(f"divergence floors: with-DL {d_min:.4f}, without-DL {e_min:.4f}")
print(f"channel norms: |h0| = {np.linalg.norm(h0):.3f}, "
      f"|h1| = {np.linalg.norm(h1):.3f}, |h_str| = {np.linalg.norm(hs):.3f}")

sol_c = consensual_sca((h0, h1, hs), params)
sol_e = evolved_sdp((h0, h1, hs), params)
v_m = mmse_beamformer(h0, hs, params.sigma_s2, params.sigma_w2)
st_m = detection_stats(v_m, h0, h1, hs, params.sigma_s2, params.sigma_w2,
                       params.N)


def row(name, stats, snr):
    snr_db = 10.0 * np.log10(snr) if snr > 0 else float("-inf")
    print(f"  {name:12s} {snr_db:7.2f}  {stats.kld_with:8.3f}"
          f"  {stats.kld_without:8.3f}  {stats.delta_kld:+9.3f}")


print("\n  design       SNR(dB)  KLD w/DL  KLD no-DL  KLD gain")
row("consensual", sol_c.stats, sol_c.snr)
row("evolved", sol_e.stats, sol_e.snr)
row("mmse", st_m, gamma * abs(np.vdot(v_m, h1)) ** 2)

# The consensual design happily lets the direct link carry part of the
# detection work (its KLD gain may be negative); the evolved design
# certifies the gain is nonnegative, at some SNR cost.
print(f"\nconsensual: feasible = {sol_c.feasible}, "
      f"{sol_c.iterations} iterations")
print(f"evolved:    feasible = {sol_e.feasible}, "
      f"{sol_e.iterations} iterations, "
      f"rank residual = {sol_e.rank_residual:.2e}")

# Both iterative designs improve monotonically (up to the stopping
# tolerance); the trace shows the surrogate objective per step.
tr = sol_c.objective_trace
print(f"\nconsensual objective trace: {tr[0]:.4f} -> {tr[-1]:.4f} "
      f"in {len(tr)} steps, monotone = "
      f"{bool(np.all(np.diff(tr) >= -params.omega * np.abs(tr[:-1])))}")

# Alignment with the combined channel explains the SNR ranking: the
# evolved constraint pulls the beam away from the direct link, and the
# MMSE filter nulls it almost entirely.
print("\n  design       |<v, h1>|/|h1|   |<v, h0>|/|h0|")
for name, v in (("consensual", sol_c.v), ("evolved", sol_e.v),
                ("mmse", v_m)):
    a1 = abs(np.vdot(v, h1)) / np.linalg.norm(h1)
    a0 = abs(np.vdot(v, h0)) / np.linalg.norm(h0)
    print(f"  {name:12s} {a1:12.4f}   {a0:12.4f}")
