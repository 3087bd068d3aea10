"""Closed-form constructive-interference region for the single-antenna case.

With one reader antenna the beamformer drops out and the evolved-CI
feasibility question has a closed form: the input SNR gamma must lie in an
interval whose lower end enforces the no-direct-link detection floor and
whose upper end keeps the direct link constructive.  The upper end also
rewrites as an angle condition between the direct and backscatter channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from backci.numerics import big_f


@dataclass
class CiRegion:
    """CI region summary for one SISO link pair.

    Attributes:
        gamma_lo: Smallest input SNR meeting the no-DL detection floor.
        gamma_hi: Largest input SNR at which the DL stays constructive
            (math.inf when there is no direct link).
        nonempty: Whether the interval [gamma_lo, gamma_hi] is nonempty.
        theta_max: CI angle at some operating SNR, when computed (radians).
        theta_max_at_min_snr: Widest CI angle, attained at gamma_lo (radians).
    """

    gamma_lo: float
    gamma_hi: float
    nonempty: bool
    theta_max: Optional[float] = None
    theta_max_at_min_snr: Optional[float] = None


def snr_interval(h_sr: complex, h_str: complex, g_min: float) -> CiRegion:
    """Evolved-CI input-SNR interval for scalar channels.

    Args:
        h_sr: Direct-link coefficient (may be 0).
        h_str: Backscatter-link coefficient, nonzero.
        g_min: No-DL threshold argument E_min/N + 1, >= 1.

    Returns:
        CiRegion with gamma_lo = (F(g_min) - 1)/|h_str|^2 and
        gamma_hi = 2 Re(h_sr^* h_str) / (|h_sr|^2 |h_str|^2), infinite when
        h_sr = 0.

    Raises:
        ValueError: If h_str = 0 (the lower bound diverges) or g_min < 1.
    """
    h_sr = complex(h_sr)
    h_str = complex(h_str)
    if h_str == 0:
        raise ValueError("h_str must be nonzero")
    if g_min < 1.0:
        raise ValueError("g_min must be >= 1")
    a_str = abs(h_str) ** 2
    gamma_lo = (big_f(g_min) - 1.0) / a_str
    if h_sr == 0:
        gamma_hi = math.inf
    else:
        a_sr = abs(h_sr) ** 2
        gamma_hi = 2.0 * (h_sr.conjugate() * h_str).real / (a_sr * a_str)
    return CiRegion(gamma_lo=gamma_lo, gamma_hi=gamma_hi,
                    nonempty=gamma_lo <= gamma_hi)


def ci_angle(h_sr_mag: float, h_str_mag: float,
             gamma: float) -> Optional[float]:
    """Largest channel angle at which the direct link is constructive.

    Args:
        h_sr_mag: |h_sr| > 0.
        h_str_mag: |h_str| > 0.
        gamma: Input SNR, >= 0.

    Returns:
        min(pi/2, arccos(gamma * |h_sr| * |h_str| / 2)) in radians, or None
        when the arccos argument exceeds 1 (no angle is constructive).
    """
    if h_sr_mag <= 0 or h_str_mag <= 0:
        raise ValueError("magnitudes must be positive")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    arg = gamma * h_sr_mag * h_str_mag / 2.0
    if arg > 1.0:
        return None
    return min(math.pi / 2.0, math.acos(arg))


def theta_max_at_min_snr(h_sr_mag: float, h_str_mag: float,
                         g_min: float) -> Optional[float]:
    """Widest CI angle, attained by operating at the minimum feasible SNR.

    Substituting gamma_lo into the angle condition gives
    arccos(|h_sr| (F(g_min) - 1) / (2 |h_str|)); None when the argument
    exceeds 1 (the floor SNR already breaks constructiveness).
    """
    if h_sr_mag <= 0 or h_str_mag <= 0:
        raise ValueError("magnitudes must be positive")
    if g_min < 1.0:
        raise ValueError("g_min must be >= 1")
    arg = h_sr_mag * (big_f(g_min) - 1.0) / (2.0 * h_str_mag)
    if arg > 1.0:
        return None
    return min(math.pi / 2.0, math.acos(arg))
