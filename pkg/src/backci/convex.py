"""Small dense convex kernels: a ball-constrained QCQP and a small SDP.

Both solvers are textbook logarithmic-barrier interior-point methods with
damped Newton centering, specialized to the problem sizes of this package
(vector dimension <= 8, matrix dimension <= 8).  Complex decision variables
are embedded into real coordinates: a complex vector v becomes
z = [Re v; Im v], and a Hermitian matrix W becomes its coefficient vector in
an orthonormal Hermitian basis (dimension M^2).

Problems are normalized before solving (unit objective norm, per-constraint
scale factors), which leaves the argmax unchanged and makes the barrier
schedule meaningful across the wide dynamic range of channel realizations:
mu starts at 1, divides by 10, and stops once m * mu <= tol, where m is the
total barrier parameter (constraint count for the QCQP ball and quadratics,
matrix dimension plus inequality count for the SDP).  Infeasibility is
detected by a phase-one problem minimizing the maximum constraint violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"

_MU_FACTOR = 0.1
_MAX_NEWTON = 200
_ARMIJO = 1e-4
_FEAS_MARGIN = 1e-10    # strict-interior margin on normalized constraints


# ---------------------------------------------------------------------------
# Complex -> real embeddings
# ---------------------------------------------------------------------------

def embed_vector(c: np.ndarray) -> np.ndarray:
    """Real embedding of a complex vector: Re(c^H v) = embed(c) . embed(v)."""
    c = np.asarray(c, dtype=complex)
    return np.concatenate([c.real, c.imag])


def embed_hermitian(A: np.ndarray) -> np.ndarray:
    """Real symmetric embedding with v^H A v = z^T embed(A) z."""
    A = np.asarray(A, dtype=complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def unembed_vector(z: np.ndarray) -> np.ndarray:
    m = z.size // 2
    return z[:m] + 1j * z[m:]


def _solve_newton(H, g):
    try:
        return np.linalg.solve(H, -g)
    except np.linalg.LinAlgError:
        reg = 1e-12 * (np.abs(np.trace(H)) / H.shape[0] + 1.0)
        return np.linalg.solve(H + reg * np.eye(H.shape[0]), -g)


# ---------------------------------------------------------------------------
# Ball-constrained QCQP
# ---------------------------------------------------------------------------

@dataclass
class QcqpProblem:
    """maximize Re(c^H v) subject to quadratic constraints and a norm ball.

    Each constraint is a triple (A, q, b) encoding

        v^H A v + 2 Re(q^H v) <= b,

    with A Hermitian PSD or None (no quadratic part) and q a complex vector
    or None (no linear part).  The ball ||v||^2 <= ball_radius is always
    present and makes the problem compact.
    """

    c: np.ndarray
    quad_constraints: list
    ball_radius: float = 1.0

    def dim(self) -> int:
        return np.asarray(self.c).size


@dataclass
class QcqpResult:
    v: Optional[np.ndarray]
    status: str
    objective: float = np.nan
    certificate: float = np.nan   # max violation at the phase-one optimum
    newton_steps: int = 0


def _qcqp_normalize(p: QcqpProblem):
    """Real-embedded, per-constraint-scaled problem data.

    Returns (c_hat, c_norm, cons) where cons holds (At, qr, b, s) with the
    normalized constraint z^T At z + qr . z <= b and s the original scale.
    """
    m = p.dim()
    r = float(p.ball_radius)
    cr = embed_vector(p.c)
    c_norm = float(np.linalg.norm(cr))
    c_hat = cr / c_norm if c_norm > 0 else cr
    cons = []
    for A, q, b in p.quad_constraints:
        At = embed_hermitian(A) if A is not None else None
        qr = 2.0 * embed_vector(q) if q is not None else np.zeros(2 * m)
        # A constant row (no quadratic or linear part) reads 0 <= b.  When
        # b >= 0 it is vacuous but blocks *strict* feasibility in phase
        # one, so drop it; when b < 0 keep it and let phase one certify.
        if ((At is None or float(np.linalg.norm(At)) <= 1e-14)
                and float(np.linalg.norm(qr)) <= 1e-14
                and float(b) >= -1e-12):
            continue
        s = abs(float(b))
        if A is not None:
            s = max(s, float(np.trace(np.asarray(A)).real) * r)
        s = max(s, float(np.linalg.norm(qr)) * np.sqrt(r), 1e-12)
        cons.append((At / s if At is not None else None, qr / s,
                     float(b) / s, s))
    return c_hat, c_norm, cons


def _qcqp_eval(cons, r, z):
    """Normalized constraint values g_i(z) (<= 0 feasible) and ball value."""
    vals = np.empty(len(cons))
    for i, (At, qr, b, _s) in enumerate(cons):
        g = qr @ z - b
        if At is not None:
            g += z @ (At @ z)
        vals[i] = g
    return vals, (z @ z - r) / max(1.0, r)


def _qcqp_phase_one(cons, r, z0):
    """Minimize the max violation s over the ball; exit once s < 0 strictly.

    Returns (z, feasible, max_violation, steps); violations are in
    normalized units.
    """
    m2 = z0.size
    z = z0.copy()
    if z @ z >= 0.9 * r:
        z *= np.sqrt(0.5 * r / (z @ z))
    if not cons:
        return z, True, -1.0, 0
    gs, _ = _qcqp_eval(cons, r, z)
    s = float(np.max(gs)) + 0.5
    steps = 0
    mu = 1.0
    n_par = len(cons) + 1
    while True:
        for _ in range(_MAX_NEWTON):
            gs, gb = _qcqp_eval(cons, r, z)
            if np.max(gs) < -_FEAS_MARGIN:
                return z, True, float(np.max(gs)), steps
            slack = s - gs
            sball = -gb
            grad_z = np.zeros(m2)
            H_zz = np.zeros((m2, m2))
            grad_s = 1.0
            H_ss = 0.0
            H_zs = np.zeros(m2)
            for (At, qr, _b, _sc), si in zip(cons, slack):
                gp = qr.copy()
                if At is not None:
                    gp += 2.0 * At @ z
                grad_z += mu * gp / si
                H_zz += mu * np.outer(gp, gp) / si ** 2
                if At is not None:
                    H_zz += mu * 2.0 * At / si
                grad_s -= mu / si
                H_ss += mu / si ** 2
                H_zs -= mu * gp / si ** 2
            grad_z += mu * 2.0 * z / (sball * max(1.0, r))
            H_zz += mu * (2.0 * np.eye(m2) / (sball * max(1.0, r))
                          + 4.0 * np.outer(z, z)
                          / (sball * max(1.0, r)) ** 2)
            H = np.block([[H_zz, H_zs[:, None]],
                          [H_zs[None, :], np.array([[H_ss]])]])
            g_full = np.concatenate([grad_z, [grad_s]])
            step = _solve_newton(H, g_full)
            dec = -g_full @ step
            steps += 1
            if dec / 2.0 <= 1e-12:
                break
            t = 1.0
            while t > 1e-14:
                zn = z + t * step[:m2]
                sn = s + t * step[m2]
                gsn, gbn = _qcqp_eval(cons, r, zn)
                if gbn < 0 and np.all(sn - gsn > 0):
                    break
                t *= 0.5
            else:
                break
            z, s = zn, sn
        gs, _ = _qcqp_eval(cons, r, z)
        worst = float(np.max(gs))
        if worst < -_FEAS_MARGIN:
            return z, True, worst, steps
        # Barrier gap bound: the true min-max violation is >= s - mu*n_par.
        if s - mu * n_par > 1e-9 or mu * n_par <= 1e-10:
            return z, False, worst, steps
        mu *= _MU_FACTOR


def solve_ball_qcqp(p: QcqpProblem, tol: float = 1e-8,
                    v0: Optional[np.ndarray] = None) -> QcqpResult:
    """Solve the ball-constrained QCQP by a log-barrier interior method.

    Args:
        p: Problem data.
        tol: Duality-gap and stationarity target on the internally
            normalized problem (so effectively relative for the original).
        v0: Optional warm-start vector (complex); pulled into the strictly
            feasible region by phase one if necessary.

    Returns:
        QcqpResult with status "optimal", "infeasible" (certificate holds
        the max violation, in normalized units, at the phase-one optimum)
        or "max_iter".
    """
    if p.ball_radius <= 0:
        raise ValueError("ball_radius must be positive")
    c_hat, c_norm, cons = _qcqp_normalize(p)
    m2 = c_hat.size
    r = float(p.ball_radius)
    steps = 0

    z = np.zeros(m2) if v0 is None else embed_vector(v0)
    gs, gb = _qcqp_eval(cons, r, z)
    strictly_ok = gb < -_FEAS_MARGIN and (len(gs) == 0
                                          or np.max(gs) < -_FEAS_MARGIN)
    if not strictly_ok:
        z, ok, cert, ph_steps = _qcqp_phase_one(cons, r, z)
        steps += ph_steps
        if not ok:
            return QcqpResult(v=None, status=INFEASIBLE, certificate=cert,
                              newton_steps=steps)

    n_par = len(cons) + 1
    mu = 1.0
    status = OPTIMAL
    while True:
        last_stage = n_par * mu * _MU_FACTOR <= tol
        for _ in range(_MAX_NEWTON):
            gs, gb = _qcqp_eval(cons, r, z)
            slack = -gs
            sball = -gb
            grad = -c_hat + mu * 2.0 * z / (sball * max(1.0, r))
            H = mu * (2.0 * np.eye(m2) / (sball * max(1.0, r))
                      + 4.0 * np.outer(z, z) / (sball * max(1.0, r)) ** 2)
            for (At, qr, _b, _sc), si in zip(cons, slack):
                gp = qr.copy()
                if At is not None:
                    gp += 2.0 * At @ z
                grad += mu * gp / si
                H += mu * np.outer(gp, gp) / si ** 2
                if At is not None:
                    H += mu * 2.0 * At / si
            if last_stage and np.linalg.norm(grad) <= tol:
                break
            step = _solve_newton(H, grad)
            dec = -grad @ step
            if dec / 2.0 <= (1e-16 if last_stage else 1e-2 * mu):
                break
            steps += 1
            merit_old = (-c_hat @ z
                         - mu * (np.sum(np.log(slack)) + np.log(sball)))
            t = 1.0
            while t > 1e-14:
                zn = z + t * step
                gsn, gbn = _qcqp_eval(cons, r, zn)
                if gbn < 0 and np.all(gsn < 0):
                    merit_new = (-c_hat @ zn
                                 - mu * (np.sum(np.log(-gsn))
                                         + np.log(-gbn)))
                    if merit_new <= merit_old - _ARMIJO * t * dec:
                        break
                t *= 0.5
            else:
                break
            z = zn
        if n_par * mu <= tol:
            break
        if steps >= _MAX_NEWTON * 20:
            status = MAX_ITER
            break
        mu *= _MU_FACTOR

    v = unembed_vector(z)
    return QcqpResult(v=v, status=status,
                      objective=float(c_norm * (c_hat @ z)),
                      newton_steps=steps)


def qcqp_max_violation(p: QcqpProblem, v: np.ndarray) -> float:
    """Largest normalized constraint violation of v (negative if interior)."""
    _c_hat, _c_norm, cons = _qcqp_normalize(p)
    z = embed_vector(v)
    gs, gb = _qcqp_eval(cons, p.ball_radius, z)
    return float(max(gb, np.max(gs) if len(gs) else -np.inf))


# ---------------------------------------------------------------------------
# Small dense SDP
# ---------------------------------------------------------------------------

@dataclass
class SdpProblem:
    """maximize Tr(C W) s.t. Tr(A W) = b, Tr(A W) <= b, W PSD.

    eq_constraints and ineq_constraints are lists of (A, b) pairs with A
    Hermitian; inequalities are in <= form (flip signs for >=).
    """

    C: np.ndarray
    dim: int
    eq_constraints: list = field(default_factory=list)
    ineq_constraints: list = field(default_factory=list)


@dataclass
class SdpResult:
    W: Optional[np.ndarray]
    status: str
    objective: float = np.nan
    gap: float = np.nan           # duality-gap bound, original units
    certificate: float = np.nan
    newton_steps: int = 0
    # Well-centered interior iterate (first barrier stage).  Unlike W it has
    # healthy slack on binding constraints, so it is the right warm start for
    # a re-solve with a perturbed objective and unchanged constraints.
    center: Optional[np.ndarray] = None


@lru_cache(maxsize=16)
def _herm_basis(m: int) -> np.ndarray:
    """Orthonormal basis of m x m Hermitian matrices, stacked (m^2, m, m)."""
    mats = []
    for i in range(m):
        E = np.zeros((m, m), dtype=complex)
        E[i, i] = 1.0
        mats.append(E)
    s = 1.0 / np.sqrt(2.0)
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = s
            E[j, i] = s
            mats.append(E)
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = 1j * s
            E[j, i] = -1j * s
            mats.append(E)
    return np.stack(mats)


def svec(A: np.ndarray) -> np.ndarray:
    """Coefficients of Hermitian A in the orthonormal basis (real vector)."""
    A = np.asarray(A, dtype=complex)
    B = _herm_basis(A.shape[0])
    return np.einsum("aij,ji->a", B, A).real


def smat(w: np.ndarray, m: int) -> np.ndarray:
    """Inverse of svec."""
    B = _herm_basis(m)
    return np.einsum("a,aij->ij", np.asarray(w, dtype=float), B)


def _chol_pd(W: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(W)
        return True
    except np.linalg.LinAlgError:
        return False


def _sdp_affine(p: SdpProblem):
    """Particular solution w_p and nullspace Z of the equality constraints."""
    m = p.dim
    n = m * m
    if not p.eq_constraints:
        return np.zeros(n), np.eye(n)
    E = np.stack([svec(A) for A, _ in p.eq_constraints])
    b = np.array([float(bb) for _, bb in p.eq_constraints])
    wp, *_ = np.linalg.lstsq(E, b, rcond=None)
    if np.linalg.norm(E @ wp - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
        return None, None  # inconsistent equalities
    _u, sv, vt = np.linalg.svd(E)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0] if sv.size else 1.0)))
    Z = vt[rank:].T
    return wp, Z


def _sdp_phase_one(m, wp, Z, a_mat, b_vec, w_start):
    """Find a strictly feasible point or certify infeasibility.

    Inequalities arrive in normalized units.  Returns (w, ok, cert, steps).
    """
    nfree = Z.shape[1]
    Bs = _herm_basis(m)
    y = Z.T @ (w_start - wp)
    w = wp + Z @ y
    W = smat(w, m)
    if not _chol_pd(W - 1e-12 * np.eye(m)):
        y = Z.T @ (svec(np.eye(m) / m) - wp)
        w = wp + Z @ y
        W = smat(w, m)
        if not _chol_pd(W - 1e-14 * np.eye(m)):
            return w, False, np.inf, 0
    n_con = len(b_vec)
    viol = a_mat @ w - b_vec if n_con else np.zeros(0)
    if n_con == 0 or np.max(viol) < -_FEAS_MARGIN:
        return w, True, float(np.max(viol)) if n_con else -1.0, 0
    s = float(np.max(viol)) + 0.5
    steps = 0
    mu = 1.0
    n_par = n_con + m
    while True:
        for _ in range(_MAX_NEWTON):
            viol = a_mat @ w - b_vec
            if np.max(viol) < -_FEAS_MARGIN:
                return w, True, float(np.max(viol)), steps
            slack = s - viol
            W = smat(w, m)
            Winv = np.linalg.inv(W)
            P = np.einsum("ij,ajk->aik", Winv, Bs)
            grad_w = -mu * svec(Winv) + mu * (a_mat.T @ (1.0 / slack))
            H_w = (mu * np.einsum("aij,bji->ab", P, P).real
                   + mu * (a_mat.T * (1.0 / slack ** 2)) @ a_mat)
            grad_s = 1.0 - mu * np.sum(1.0 / slack)
            H_ss = mu * np.sum(1.0 / slack ** 2)
            H_ws = -mu * (a_mat.T @ (1.0 / slack ** 2))
            gy = Z.T @ grad_w
            Hy = Z.T @ H_w @ Z
            Hys = Z.T @ H_ws
            H = np.block([[Hy, Hys[:, None]],
                          [Hys[None, :], np.array([[H_ss]])]])
            g_full = np.concatenate([gy, [grad_s]])
            step = _solve_newton(H, g_full)
            dec = -g_full @ step
            steps += 1
            if dec / 2.0 <= 1e-12:
                break
            t = 1.0
            while t > 1e-14:
                yn = y + t * step[:nfree]
                sn = s + t * step[nfree]
                wn = wp + Z @ yn
                if _chol_pd(smat(wn, m)) and np.all(
                        sn - (a_mat @ wn - b_vec) > 0):
                    break
                t *= 0.5
            else:
                break
            y, s = yn, sn
            w = wp + Z @ y
        viol = a_mat @ w - b_vec
        worst = float(np.max(viol))
        if worst < -_FEAS_MARGIN:
            return w, True, worst, steps
        if s - mu * n_par > 1e-9 or mu * n_par <= 1e-10:
            return w, False, worst, steps
        mu *= _MU_FACTOR


def solve_small_sdp(p: SdpProblem, tol: float = 1e-8,
                    W0: Optional[np.ndarray] = None) -> SdpResult:
    """Solve the small SDP by a log-barrier interior method.

    Args:
        p: Problem data (objective maximized).
        tol: Relative duality-gap target.
        W0: Optional warm-start matrix; nudged toward the identity to regain
            strict feasibility.

    Returns:
        SdpResult; gap is the barrier bound in original objective units,
        certificate the phase-one max violation (normalized) when
        infeasible.
    """
    m = p.dim
    C = np.asarray(p.C, dtype=complex)
    wp, Z = _sdp_affine(p)
    if wp is None:
        return SdpResult(W=None, status=INFEASIBLE, certificate=np.inf)
    c_w = svec(C)
    c_norm = float(np.linalg.norm(c_w))
    c_hat = c_w / c_norm if c_norm > 0 else c_w
    # A row with A ~ 0 reads 0 <= b: vacuous when b >= 0, impossible when
    # b < 0.  Either way phase one could never reach *strict* feasibility
    # on it, so settle such rows here instead of handing them to the
    # barrier.
    ineqs = []
    for A, b in p.ineq_constraints:
        na = float(np.linalg.norm(svec(A)))
        if na <= 1e-14 * max(1.0, abs(float(b))):
            if float(b) < -1e-12:
                return SdpResult(W=None, status=INFEASIBLE,
                                 certificate=-float(b) / max(abs(float(b)),
                                                             1e-12))
            continue
        ineqs.append((A, b))
    scales = np.array([max(abs(float(b)), float(np.linalg.norm(svec(A))),
                           1e-12) for A, b in ineqs])
    a_mat = (np.stack([svec(A) / s for (A, _b), s
                       in zip(ineqs, scales)])
             if ineqs else np.zeros((0, m * m)))
    b_vec = np.array([float(b) / s for (_A, b), s
                      in zip(ineqs, scales)])
    Bs = _herm_basis(m)
    nfree = Z.shape[1]

    if nfree == 0:
        # Fully determined by the equalities (e.g. M = 1 with Tr W = 1).
        w = wp
        W = smat(w, m)
        lam_min = float(np.linalg.eigvalsh(W)[0])
        viol = a_mat @ w - b_vec if len(b_vec) else np.zeros(0)
        worst = max(float(np.max(viol)) if len(viol) else -np.inf, -lam_min)
        if worst > 1e-9:
            return SdpResult(W=None, status=INFEASIBLE, certificate=worst)
        return SdpResult(W=W, status=OPTIMAL, objective=float(c_w @ w),
                         gap=0.0, center=W)

    if W0 is not None:
        # Prefer the caller's point as-is; blends toward the identity can
        # cross a binding inequality and force a fresh phase-one run.
        raw = svec(W0)
        w_start = raw
        proj = wp + Z @ (Z.T @ (raw - wp))
        sl = b_vec - a_mat @ proj if len(b_vec) else np.zeros(0)
        if not (_chol_pd(smat(proj, m))
                and (not len(sl) or np.min(sl) > _FEAS_MARGIN)):
            w_start = 0.98 * raw + 0.02 * svec(np.eye(m) / m)
    else:
        w_start = svec(np.eye(m) / m)
    w, ok, cert, steps = _sdp_phase_one(m, wp, Z, a_mat, b_vec, w_start)
    if not ok:
        return SdpResult(W=None, status=INFEASIBLE, certificate=cert,
                         newton_steps=steps)
    y = Z.T @ (w - wp)

    n_par = m + len(b_vec)
    mu = 1.0
    status = OPTIMAL
    center = None
    while True:
        last_stage = n_par * mu * _MU_FACTOR <= tol
        for _ in range(_MAX_NEWTON):
            w = wp + Z @ y
            W = smat(w, m)
            slack = b_vec - a_mat @ w if len(b_vec) else np.zeros(0)
            Winv = np.linalg.inv(W)
            P = np.einsum("ij,ajk->aik", Winv, Bs)
            grad_w = -c_hat - mu * svec(Winv)
            H_w = mu * np.einsum("aij,bji->ab", P, P).real
            if len(b_vec):
                grad_w += mu * (a_mat.T @ (1.0 / slack))
                H_w += mu * (a_mat.T * (1.0 / slack ** 2)) @ a_mat
            gy = Z.T @ grad_w
            if last_stage and np.linalg.norm(gy) <= tol:
                break
            Hy = Z.T @ H_w @ Z
            step = _solve_newton(Hy, gy)
            dec = -gy @ step
            if dec / 2.0 <= (1e-16 if last_stage else 0.125 * mu):
                break
            steps += 1
            merit_old = (-c_hat @ w - mu * (np.linalg.slogdet(W)[1]
                         + (np.sum(np.log(slack)) if len(b_vec) else 0.0)))
            t = 1.0
            while t > 1e-14:
                yn = y + t * step
                wn = wp + Z @ yn
                Wn = smat(wn, m)
                sn = b_vec - a_mat @ wn if len(b_vec) else np.zeros(0)
                if _chol_pd(Wn) and (not len(sn) or np.all(sn > 0)):
                    merit_new = (-c_hat @ wn
                                 - mu * (np.linalg.slogdet(Wn)[1]
                                 + (np.sum(np.log(sn)) if len(sn) else 0.0)))
                    if merit_new <= merit_old - _ARMIJO * t * dec:
                        break
                t *= 0.5
            else:
                break
            y = yn
        w = wp + Z @ y
        if center is None:
            Wc = smat(w, m)
            center = 0.5 * (Wc + Wc.conj().T)
        obj = c_norm * (c_hat @ w)
        gap_ok = (n_par * mu * max(c_norm, 1.0) <= tol * max(1.0, abs(obj))
                  or mu <= 1e-13)
        if n_par * mu <= tol and gap_ok:
            break
        if steps >= _MAX_NEWTON * 25:
            status = MAX_ITER
            break
        mu *= _MU_FACTOR

    W = smat(w, m)
    W = 0.5 * (W + W.conj().T)   # clear embedding round-off
    return SdpResult(W=W, status=status,
                     objective=float(c_norm * (c_hat @ w)),
                     gap=float(n_par * mu * max(c_norm, 1.0)),
                     newton_steps=steps, center=center)


def sdp_max_violation(p: SdpProblem, W: np.ndarray) -> float:
    """Largest normalized violation over equalities, inequalities, the cone."""
    W = np.asarray(W, dtype=complex)
    worst = -np.inf
    for A, b in p.eq_constraints:
        worst = max(worst, abs(float(np.trace(A @ W).real) - b)
                    / max(1.0, abs(b)))
    for A, b in p.ineq_constraints:
        s = max(abs(float(b)), float(np.linalg.norm(svec(A))), 1e-12)
        worst = max(worst, (float(np.trace(A @ W).real) - b) / s)
    lam_min = float(np.linalg.eigvalsh(W)[0])
    return max(worst, -lam_min)
