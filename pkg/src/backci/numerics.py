"""Scalar special functions and small Hermitian eigensolves.

The detection thresholds of this package all reduce to inverting
``ln y + 1/y = x``, whose two real solution branches are expressed through the
two real branches of the Lambert W function.  Everything here is scalar or
small-dense (matrix dimension <= 8), so the implementations favor robustness
and auditability over asymptotics.
"""

from __future__ import annotations

import math

import numpy as np

_INV_E = math.exp(-1.0)

# Step tolerance for the Halley polish.  Both branches converge cubically, so
# this is reached in a handful of iterations from the guesses below.
_HALLEY_TOL = 1e-14
_HALLEY_MAX_ITER = 60


def _halley_lambert(w: float, x: float) -> float:
    """Polish a Lambert W estimate with Halley iterations on w*e^w - x = 0."""
    for _ in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        fp = ew * (w + 1.0)
        fpp = ew * (w + 2.0)
        denom = fp - 0.5 * f * fpp / fp
        step = f / denom
        w -= step
        if abs(step) <= _HALLEY_TOL * max(1.0, abs(w)):
            break
    return w


def _branch_point_series(p: float) -> float:
    # Expansion of W around the branch point x = -1/e; p = +-sqrt(2(e*x + 1)).
    return -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function.

    Args:
        x: Argument, must satisfy x >= -1/e.

    Returns:
        w >= -1 with w * exp(w) = x, residual below 1e-12 * max(1, |x|).

    Raises:
        ValueError: If x < -1/e (outside the real domain).
    """
    x = float(x)
    if x < -_INV_E:
        if x > -_INV_E - 1e-15 * max(1.0, abs(x)):
            return -1.0  # representation noise at the branch point
        raise ValueError(f"lambert_w0 domain error: x = {x} < -1/e")
    if x == 0.0:
        return 0.0
    if x < -_INV_E + 1e-14:
        return -1.0 + math.sqrt(2.0 * (math.e * x + 1.0))

    if x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    elif x > -0.2:
        # Series around the origin, rough but inside Halley's basin.
        w = x * (1.0 - x + 1.5 * x * x) if abs(x) < 0.5 else math.log(1.0 + x)
    else:
        w = _branch_point_series(math.sqrt(2.0 * (math.e * x + 1.0)))
    return _halley_lambert(w, x)


def lambert_wm1(x: float) -> float:
    """Secondary real branch of the Lambert W function.

    Args:
        x: Argument in [-1/e, 0).

    Returns:
        w <= -1 with w * exp(w) = x, residual below 1e-12 * max(1, |x|).

    Raises:
        ValueError: If x is outside [-1/e, 0).
    """
    x = float(x)
    if x >= 0.0 or x < -_INV_E:
        if -_INV_E - 1e-15 <= x < -_INV_E:
            return -1.0
        raise ValueError(f"lambert_wm1 domain error: x = {x} not in [-1/e, 0)")
    if x < -_INV_E + 1e-14:
        return -1.0 - math.sqrt(2.0 * (math.e * x + 1.0))

    if x > -0.27:
        # Asymptotic guess for x -> 0-: w ~ ln(-x) - ln(-ln(-x)).
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    else:
        w = _branch_point_series(-math.sqrt(2.0 * (math.e * x + 1.0)))
    return _halley_lambert(w, x)


def big_f(x: float) -> float:
    """Upper solution branch of ln y + 1/y = x.

    This is the threshold map F(x) = exp(W0(-exp(-x)) + x) that converts a KLD
    floor into a variance-ratio floor.  F is strictly increasing on [1, inf)
    with F(1) = 1.

    Args:
        x: Threshold argument, must be >= 1.

    Returns:
        y >= 1 solving ln y + 1/y = x.

    Raises:
        ValueError: If x < 1.
    """
    x = float(x)
    if x < 1.0:
        if x > 1.0 - 1e-12:
            return 1.0
        raise ValueError(f"big_f domain error: x = {x} < 1")
    if x == 1.0:
        return 1.0
    return math.exp(lambert_w0(-math.exp(-x)) + x)


def big_f_discard(x: float) -> float:
    """Lower solution branch of ln y + 1/y = x, via the W_{-1} branch.

    The solvers never use this branch: it corresponds to the variance ratio
    dropping below one (the tag reflection canceling the direct link), which
    the detection constraints discard.  It exists to test branch selection.
    """
    x = float(x)
    if x < 1.0:
        if x > 1.0 - 1e-12:
            return 1.0
        raise ValueError(f"big_f_discard domain error: x = {x} < 1")
    if x == 1.0:
        return 1.0
    return math.exp(lambert_wm1(-math.exp(-x)) + x)


def hermitian_eig(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a small dense Hermitian matrix.

    Args:
        H: Square complex array equal to its conjugate transpose within 1e-12
            relative tolerance.

    Returns:
        Tuple (eigenvalues, eigenvectors) with eigenvalues real and sorted
        descending, and eigenvectors[:, i] the orthonormal eigenvector for
        eigenvalues[i].

    Raises:
        ValueError: If H is not square or not Hermitian.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"hermitian_eig expects a square matrix, got {H.shape}")
    scale = np.linalg.norm(H)
    if scale > 0 and np.linalg.norm(H - H.conj().T) > 1e-12 * scale:
        raise ValueError("hermitian_eig input is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(H)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def top_eigvec(H: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its unit eigenvector of a Hermitian matrix."""
    vals, vecs = hermitian_eig(H)
    return float(vals[0]), vecs[:, 0]
