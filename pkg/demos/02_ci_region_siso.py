"""
Constructive-interference region with one antenna
=================================================

With a single reader antenna there is nothing to beamform, and the
feasibility question collapses to a closed form: the input SNR must sit
in an interval.  Its lower end guarantees the tag stays detectable even
if the direct source-reader link disappears; its upper end keeps the
direct link from turning destructive at the reader.  This script walks
the interval, its phase sensitivity, and the equivalent angle condition.
"""

import cmath
import math

import numpy as np

from backci.channel import SystemParams
from backci.detection import kld_threshold
from backci.harness import ci_region_report
from backci.siso import ci_angle, snr_interval, theta_max_at_min_snr

params = SystemParams()
g_min = kld_threshold(params.zeta_max) / params.N + 1.0
print(f"samples per slot N = {params.N}, tolerated no-DL error "
      f"{params.zeta_max} -> g_min = {g_min:.4f}")

# Aligned channels: the direct link adds coherently with the backscatter
# path, so the admissible SNR interval is wide.
h_sr, h_str = 0.8, 0.5
reg = snr_interval(h_sr, h_str, g_min)
print(f"\naligned   h_sr = {h_sr}, h_str = {h_str}: "
      f"gamma in [{reg.gamma_lo:.3f}, {reg.gamma_hi:.3f}]"
      f"  nonempty = {reg.nonempty}")

# Rotating the direct link shrinks the upper end; past 90 degrees the
# interference is destructive at every SNR and the region empties.
print("\nrelative phase (deg) -> interval")
for deg in (0, 30, 60, 85, 95, 180):
    rot = h_sr * cmath.exp(1j * math.radians(deg))
    reg = snr_interval(rot, h_str, g_min)
    hi = "inf" if math.isinf(reg.gamma_hi) else f"{reg.gamma_hi:7.3f}"
    print(f"  {deg:3d} -> [{reg.gamma_lo:.3f}, {hi}]"
          f"  nonempty = {reg.nonempty}")

# No direct link at all: only the detection floor remains, so the
# interval is one-sided.
reg = snr_interval(0.0, h_str, g_min)
print(f"\nno direct link: gamma >= {reg.gamma_lo:.3f} (upper end "
      f"{reg.gamma_hi})")

# The upper end rewrites as a tolerable-angle condition.  Raising the
# SNR narrows the cone of direct-link phases that stay constructive;
# operating at the floor SNR leaves the widest cone.
print("\ngamma -> max constructive angle (deg)")
for g in (0.5, 2.0, 4.0, 4.9):
    th = ci_angle(abs(h_sr), abs(h_str), g)
    print(f"  {g:4.1f} -> {'none' if th is None else f'{math.degrees(th):6.2f}'}")
th = theta_max_at_min_snr(abs(h_sr), abs(h_str), g_min)
print(f"widest cone, at the floor SNR: {math.degrees(th):.2f} deg")

# The same trade-off tabulated against the tolerated no-DL error: a
# stricter detection requirement raises the SNR floor and narrows the
# angle available at it.
print("\nzeta_max  gamma_lo  gamma_hi  theta_max (deg)")
rows = ci_region_report("zeta_max", np.linspace(0.1, 1.0, 7), params,
                        h_sr_mag=abs(h_sr), h_str_mag=abs(h_str))
for _, val, lo, hi, theta in rows:
    print(f"  {val:6.2f}  {lo:8.3f}  {hi:8.3f}  {math.degrees(theta):10.2f}")
