"""Hypothesis-testing layer for tag detection.

Under the on/off tag hypotheses the combined receive samples are
zero-mean complex Gaussian with per-sample variances

    delta_i = |v^H h_i|^2 sigma_s^2 + sigma_w^2 ||v||^2,  i in {0, 1},

with and without the direct link.  Detectability is measured by the KLD of
the two sample distributions; the Bretagnolle-Huber bound converts KLD floors
into detection-error-probability (DEP) ceilings.  An exact DEP oracle based on
the Gamma sufficient statistic validates the bound direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from backci.numerics import big_f


@dataclass
class DetectionStats:
    """Variances, KLDs and DEP bounds for one (beamformer, tag) pair.

    Attributes:
        delta0, delta1: Sample variances with the direct link, under H0/H1.
        delta0_bar, delta1_bar: Same without the direct link.
        kld_with: KLD between the hypothesis distributions with the DL (nats).
        kld_without: KLD without the DL.
        delta_kld: kld_with - kld_without.
        dep_bound_with: Bretagnolle-Huber DEP lower bound with the DL.
        dep_bound_without: Same without the DL.
    """

    delta0: float
    delta1: float
    delta0_bar: float
    delta1_bar: float
    kld_with: float
    kld_without: float
    delta_kld: float
    dep_bound_with: float
    dep_bound_without: float


def hypothesis_variances(v: np.ndarray, h0: np.ndarray, h1: np.ndarray,
                         sigma_s2: float, sigma_w2: float) -> tuple[float, float]:
    """Per-sample variances of the combined signal under both hypotheses.

    Args:
        v: Receive beamformer (any norm; the norm term is kept explicit).
        h0: Channel under H0 (tag silent).
        h1: Channel under H1 (tag reflecting).
        sigma_s2: Transmit power (watts).
        sigma_w2: Noise power (watts).

    Returns:
        (delta0, delta1) with delta_i = |v^H h_i|^2 sigma_s2 + sigma_w2 ||v||^2.
    """
    v = np.asarray(v, dtype=complex)
    h0 = np.asarray(h0, dtype=complex)
    h1 = np.asarray(h1, dtype=complex)
    if v.shape != h0.shape or v.shape != h1.shape:
        raise ValueError(f"dimension mismatch: {v.shape}, {h0.shape}, {h1.shape}")
    if sigma_s2 <= 0 or sigma_w2 <= 0:
        raise ValueError("powers must be positive")
    nv2 = float(np.vdot(v, v).real)
    d0 = abs(np.vdot(v, h0)) ** 2 * sigma_s2 + sigma_w2 * nv2
    d1 = abs(np.vdot(v, h1)) ** 2 * sigma_s2 + sigma_w2 * nv2
    return float(d0), float(d1)


def kld(delta_num: float, delta_den: float, n: int) -> float:
    """KLD between N-sample complex Gaussian vectors of the given variances.

    Args:
        delta_num: Variance of the alternative (H1) distribution, the
            numerator of the log ratio.
        delta_den: Variance of the reference (H0) distribution.
        n: Samples per detection interval.

    Returns:
        N * (ln(delta_num/delta_den) + delta_den/delta_num - 1), >= 0 with
        equality iff the variances agree.
    """
    if delta_den <= 0 or delta_num <= 0:
        raise ValueError("variances must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    r = delta_num / delta_den
    return n * (math.log(r) + 1.0 / r - 1.0)


def kld_threshold(eps_max: float) -> float:
    """Minimum KLD forcing the optimal DEP below eps_max.

    Inverts the Bretagnolle-Huber bound: returns -ln(1 - (1 - eps_max)^2).
    This is D_min for the with-DL tolerance and E_min for the without-DL one.

    Args:
        eps_max: Acceptable DEP, in (0, 1].
    """
    if eps_max <= 0.0 or eps_max > 1.0:
        raise ValueError("eps_max must lie in (0, 1]")
    if eps_max == 1.0:
        return 0.0
    return -math.log1p(-((1.0 - eps_max) ** 2))


def dep_lower_bound(d: float) -> float:
    """Bretagnolle-Huber lower bound on the optimal DEP given a KLD of d."""
    if d < 0.0:
        raise ValueError("KLD must be nonnegative")
    # expm1 keeps the sqrt argument exact for small d.
    return 1.0 - math.sqrt(-math.expm1(-d))


def dep_oracle(delta0: float, delta1: float, n: int) -> float:
    """Exact optimal DEP for the two-variance Gaussian test.

    The energy statistic T = sum |y_i|^2 is sufficient and Gamma(n, delta)
    distributed under each hypothesis; the likelihood ratio is monotone in T,
    so the total variation is attained at the single density crossing

        tau = n * ln(delta1/delta0) / (1/delta0 - 1/delta1).

    Returns:
        xi* = 1 - [F(tau; n, delta_min) - F(tau; n, delta_max)], the sum of
        the two conditional error probabilities at the optimal threshold.
    """
    if delta0 <= 0 or delta1 <= 0:
        raise ValueError("variances must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta0 == delta1:
        return 1.0
    lo, hi = (delta0, delta1) if delta0 < delta1 else (delta1, delta0)
    tau = n * math.log(delta1 / delta0) / (1.0 / delta0 - 1.0 / delta1)
    cdf_lo = float(gammainc(n, tau / lo))
    cdf_hi = float(gammainc(n, tau / hi))
    return 1.0 - (cdf_lo - cdf_hi)


def detection_stats(v: np.ndarray, h0: np.ndarray, h1: np.ndarray,
                    h1_bar: np.ndarray, sigma_s2: float, sigma_w2: float,
                    n: int) -> DetectionStats:
    """Full detection summary for a beamformer against one tag's channels.

    h1_bar is the backscatter-only channel; the no-DL hypothesis pair is
    (0, h1_bar), so delta0_bar is the pure noise floor.
    """
    d0, d1 = hypothesis_variances(v, h0, h1, sigma_s2, sigma_w2)
    zeros = np.zeros_like(np.asarray(h0))
    d0b, d1b = hypothesis_variances(v, zeros, h1_bar, sigma_s2, sigma_w2)
    k_with = kld(d1, d0, n)
    k_without = kld(d1b, d0b, n)
    return DetectionStats(
        delta0=d0,
        delta1=d1,
        delta0_bar=d0b,
        delta1_bar=d1b,
        kld_with=k_with,
        kld_without=k_without,
        delta_kld=k_with - k_without,
        dep_bound_with=dep_lower_bound(k_with),
        dep_bound_without=dep_lower_bound(k_without),
    )


def ci_inequality_margin(v: np.ndarray, h0: np.ndarray, h1_bar: np.ndarray,
                         gamma: float) -> float:
    """Margin of the evolved-CI channel inequality at a unit-norm beamformer.

    Returns lhs - rhs of

        |v^H h1|^2 - |v^H h0|^2 - |v^H h1_bar|^2 >= gamma |v^H h0|^2 |v^H h1_bar|^2

    with h1 = h0 + h1_bar.  Positive margin means the direct link is
    constructive (delta-KLD >= 0) whenever delta1 >= delta0, which the
    inequality itself implies when it holds.
    """
    v = np.asarray(v, dtype=complex)
    a0 = abs(np.vdot(v, np.asarray(h0, dtype=complex))) ** 2
    ab = abs(np.vdot(v, np.asarray(h1_bar, dtype=complex))) ** 2
    a1 = abs(np.vdot(v, np.asarray(h0, dtype=complex)
                     + np.asarray(h1_bar, dtype=complex))) ** 2
    return float(a1 - a0 - ab - gamma * a0 * ab)
