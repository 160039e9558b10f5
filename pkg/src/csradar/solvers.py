"""Sparse recovery over a Gabor dictionary.

Basis pursuit is solved with ADMM using only ``apply``/``adjoint`` plus a
factorization of the N x N frame operator ``Phi Phi^*``. For Gabor frames
of a unit-norm probe that operator is ``N * I``, which is detected and used
as a fast path. The entrywise-bounded variant goes through its small dual
with an interior-point method. Both finish with a certified exact refit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gabor import GaborDictionary


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 20000
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    penalty: float = 3.0
    relaxation: float = 1.6
    polish_every: int = 25
    adaptive_penalty: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.penalty > 0):
            raise ValueError("tolerances and penalty must be positive")
        if self.polish_every < 1:
            raise ValueError("polish_every must be >= 1")
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")


@dataclass
class RecoveryResult:
    solution: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    objective: float
    support: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.support:
            self.support = tuple(int(i) for i in np.flatnonzero(self.solution))


_ADAPT_EVERY = 50
_ADAPT_RATIO = 10.0


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Complex shrinkage: scale moduli down by ``tau``, keep phases."""
    mag = np.abs(v)
    return v * (np.maximum(mag - tau, 0.0) / np.maximum(mag, np.finfo(float).tiny))


class _FrameInverse:
    """Solves ``(c*I + Phi Phi^*) x = b``; diagonal fast path for tight frames."""

    def __init__(self, d: GaborDictionary, shift: float = 0.0):
        g = d.frame_operator()
        n = d.n
        scale = np.real(np.trace(g)) / n
        if np.max(np.abs(g - scale * np.eye(n))) <= 1e-10 * max(scale, 1.0):
            self._diag = scale + shift
            self._chol = None
        else:
            self._diag = None
            self._chol = np.linalg.cholesky(g + shift * np.eye(n))

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._chol is None:
            return b / self._diag
        z = np.linalg.solve(self._chol, b)
        return np.linalg.solve(self._chol.conj().T, z)


def _check_obs(d: GaborDictionary, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (d.n,):
        raise ValueError(f"observation must have length {d.n}, got {y.shape}")
    return y


def _l1(s) -> float:
    return float(np.sum(np.abs(s)))


def basis_pursuit(d: GaborDictionary, y, opts: SolverOptions | None = None) -> RecoveryResult:
    """Minimize the complex l1 norm subject to ``Phi s = y``.

    ADMM on ``min ||z||_1 + I{Phi x = y}`` s.t. ``x = z`` with
    over-relaxation. Whenever the support of ``z`` has been stable for
    ``polish_every`` iterations and has at most N cells, the least-squares
    fit on that support is tried: it is accepted only if it is feasible and
    a dual vector ``w`` with ``(Phi^* w)_S = sign(s_S)`` and
    ``max |Phi^* w| <= 1 + rel_tol`` off the support exists, which
    certifies optimality.

    ``primal_residual`` is ``||Phi s - y||_2``. ``dual_residual`` is
    ``rho * ||z - z_prev||_2`` for a plain ADMM exit and the certificate's
    excess over 1 for a polished exit.
    """
    opts = opts or SolverOptions()
    y = _check_obs(d, y)
    n, m = d.n, d.atom_count
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return RecoveryResult(np.zeros(m, complex), 0, 0.0, 0.0, True, 0.0)

    frame = _FrameInverse(d)
    rho, alpha = opts.penalty, opts.relaxation
    tau = 1.0 / rho
    z = d.adjoint(frame.solve(y))  # least-norm solution
    u = np.zeros(m, complex)
    feas_tol = opts.abs_tol * math.sqrt(n) + opts.rel_tol * ynorm
    eps_dual_abs = opts.abs_tol * math.sqrt(m)

    def project(v):
        return v - d.adjoint(frame.solve(d.apply(v) - y))

    dual = math.inf
    last_support = None
    it = 0
    for it in range(1, opts.max_iterations + 1):
        x = project(z - u)
        x_hat = alpha * x + (1 - alpha) * z
        z_old = z
        z = soft_threshold(x_hat + u, tau)
        u = u + x_hat - z
        dual = rho * float(np.linalg.norm(z - z_old))
        split = float(np.linalg.norm(x - z))
        if split <= feas_tol and dual <= eps_dual_abs + opts.rel_tol * rho * float(np.linalg.norm(u)):
            primal = float(np.linalg.norm(d.apply(z) - y))
            if primal <= feas_tol:
                return RecoveryResult(z, it, primal, dual, True, _l1(z))
        if opts.adaptive_penalty and it % _ADAPT_EVERY == 0:
            # residual balancing; u is the scaled multiplier so it rescales inversely
            if split > _ADAPT_RATIO * dual:
                rho *= 2.0
                u /= 2.0
            elif dual > _ADAPT_RATIO * split:
                rho /= 2.0
                u *= 2.0
            tau = 1.0 / rho
        if it % opts.polish_every == 0:
            support = np.flatnonzero(z)
            if last_support is not None and np.array_equal(support, last_support):
                polished = _polish(d, y, support, rho * u, frame, feas_tol, opts.rel_tol)
                if polished is not None:
                    sol, primal, excess = polished
                    return RecoveryResult(sol, it, primal, excess, True, _l1(sol))
            last_support = support
    primal = float(np.linalg.norm(d.apply(z) - y))
    return RecoveryResult(z, it, primal, dual, False, _l1(z))


def _polish(d, y, support, dual_est, frame, feas_tol, cert_tol):
    """Refit on ``support`` and certify l1 optimality, or return None.

    Supports of at most N cells are refit by least squares and the dual
    vector is the ADMM multiplier corrected to satisfy the support
    equations exactly. Larger supports (common above the phase transition)
    solve the restricted optimality system by Newton's method instead.
    Either way the result is accepted only if ``|Phi^* w| <= 1 + cert_tol``
    off the support.
    """
    if support.size == 0:
        return None
    cols = d.columns(support)
    w = frame.solve(d.apply(dual_est))
    if support.size <= d.n:
        coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
        mag = np.abs(coef)
        if np.any(mag == 0):
            return None
        gram = cols.conj().T @ cols
        try:
            w = w + cols @ np.linalg.solve(gram, coef / mag - cols.conj().T @ w)
        except np.linalg.LinAlgError:
            return None
    else:
        fit = _newton_kkt(cols, y, w, feas_tol)
        if fit is None:
            return None
        coef, w = fit
    primal = float(np.linalg.norm(cols @ coef - y))
    if primal > feas_tol:
        return None
    g = np.abs(d.adjoint(w))
    g[support] = 0.0
    excess = max(float(g.max()) - 1.0, 0.0)
    if excess > cert_tol:
        return None
    sol = np.zeros(d.atom_count, complex)
    sol[support] = coef
    return sol, primal, excess


def _newton_kkt(a, y, w, feas_tol, max_steps=30):
    """Solve ``a (r * g) = y``, ``|g| = 1`` with ``g = a^H w``, r > 0.

    These are the optimality conditions of l1 minimization restricted to
    the columns of ``a``. Unknowns are the real vector ``[Re w, Im w, r]``.
    """
    n, p = a.shape
    ah = a.conj().T
    g = ah @ w
    # least-squares magnitudes consistent with the starting phases
    r, *_ = np.linalg.lstsq(np.vstack([(a * g).real, (a * g).imag]),
                            np.concatenate([y.real, y.imag]), rcond=None)
    for _ in range(max_steps):
        g = ah @ w
        f1 = a @ (r * g) - y
        f2 = np.abs(g) ** 2 - 1.0
        if np.linalg.norm(f1) <= 0.1 * feas_tol and np.max(np.abs(f2)) <= 1e-13:
            break
        lin = (a * r) @ ah
        b = a * g
        c = g.conj()[:, None] * ah
        jac = np.block([
            [lin.real, -lin.imag, b.real],
            [lin.imag, lin.real, b.imag],
            [2 * c.real, -2 * c.imag, np.zeros((p, p))],
        ])
        rhs = -np.concatenate([f1.real, f1.imag, f2])
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            return None
        w = w + step[:n] + 1j * step[n:2 * n]
        r = r + step[2 * n:]
    else:
        return None
    if np.any(r <= 0):
        return None
    return r * g, w


def bpdn_entrywise(d: GaborDictionary, y, eps: float,
                   opts: SolverOptions | None = None) -> RecoveryResult:
    """Minimize the complex l1 norm subject to ``|(Phi s - y)_n| <= eps`` for every n.

    ``eps == 0`` is delegated to :func:`basis_pursuit`. Otherwise the dual
    problem, which lives in only 3N real unknowns, is solved by a
    primal-dual interior-point method; the primal solution is read off the
    cone multipliers. The support and active disks of that point are then
    refit by Newton's method on the exact optimality system and kept only
    when certified (nonnegative multipliers, feasibility, dual bound).

    ``primal_residual`` is ``max_n |(Phi s - y)_n|``; ``dual_residual`` is
    the certificate excess for a polished result and the interior-point
    duality gap otherwise.
    """
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if eps == 0:
        return basis_pursuit(d, y, opts)
    opts = opts or SolverOptions()
    y = _check_obs(d, y)
    m = d.atom_count
    if np.max(np.abs(y)) <= eps:
        return RecoveryResult(np.zeros(m, complex), 0, float(np.max(np.abs(y))), 0.0, True, 0.0)

    sol, w, it, gap, ok = _bpdn_interior_point(d, y, eps, opts)
    mags, wmag = np.abs(sol), np.abs(w)
    for th in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        support = np.flatnonzero(mags > th * mags.max())
        active = np.flatnonzero(wmag > th * wmag.max())
        if 2 * support.size + active.size > 4 * d.n:
            break
        polished = _polish_bpdn(d, y, eps, sol[support], support, active, wmag[active] / eps, opts)
        if polished is not None:
            s, primal, excess = polished
            return RecoveryResult(s, it, primal, excess, True, _l1(s))
    # uncertified: drop entries at round-off level when that keeps feasibility
    pruned = np.where(mags > 1e-12 * mags.max(), sol, 0)
    if np.max(np.abs(d.apply(pruned) - y)) <= eps + opts.abs_tol:
        sol = pruned
    primal = float(np.max(np.abs(d.apply(sol) - y)))
    converged = ok and primal <= eps + opts.abs_tol
    return RecoveryResult(sol, it, primal, gap, converged, _l1(sol))


# Second-order cone helpers. Rows of an (k, 3) array are points (u0, u1, u2)
# of k Lorentz cones u0 >= |(u1, u2)|.

def _jdot(u, v):
    return u[:, 0] * v[:, 0] - u[:, 1] * v[:, 1] - u[:, 2] * v[:, 2]


def _jnorm2(u):
    r = np.hypot(u[:, 1], u[:, 2])
    return (u[:, 0] - r) * (u[:, 0] + r)


def _jprod(u, v):
    return np.column_stack([np.sum(u * v, axis=1),
                            u[:, :1] * v[:, 1:] + v[:, :1] * u[:, 1:]])


def _jsolve(lam, rhs):
    """Solve ``lam o x = rhs`` for the Jordan product."""
    x0 = _jdot(lam, rhs) / _jnorm2(lam)
    x1 = (rhs[:, 1:] - x0[:, None] * lam[:, 1:]) / lam[:, :1]
    return np.column_stack([x0, x1])


def _max_step(u, du):
    """Largest alpha with ``u + alpha du`` in the cone (u interior)."""
    a, b, c = _jdot(du, du), _jdot(u, du), _jnorm2(u)
    alpha = np.full(len(u), np.inf)
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = b * b - a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        quad = np.abs(a) > 1e-14 * np.maximum(np.abs(b), 1e-300)
        for root in ((-b - sq) / a, (-b + sq) / a):
            alpha = np.where(quad & (disc >= 0) & (root > 0), np.minimum(alpha, root), alpha)
        alpha = np.where(~quad & (b < 0), np.minimum(alpha, -c / (2 * b)), alpha)
        alpha = np.where(du[:, 0] < 0, np.minimum(alpha, -u[:, 0] / du[:, 0]), alpha)
    return float(alpha.min())


class _NTScaling:
    """Nesterov-Todd scaling ``W`` per cone: ``W z = W^-1 s``."""

    def __init__(self, s, z):
        js, jz = np.sqrt(_jnorm2(s)), np.sqrt(_jnorm2(z))
        sb, zb = s / js[:, None], z / jz[:, None]
        gam = np.sqrt((1 + np.sum(sb * zb, axis=1)) / 2)
        wb = np.column_stack([sb[:, 0] + zb[:, 0], sb[:, 1:] - zb[:, 1:]]) / (2 * gam)[:, None]
        beta = np.sqrt(js / jz)
        w0, w1 = wb[:, 0], wb[:, 1:]
        inner = np.eye(2)[None] + w1[:, :, None] * w1[:, None, :] / (1 + w0)[:, None, None]
        fwd = np.empty((len(s), 3, 3))
        fwd[:, 0, 0] = w0
        fwd[:, 0, 1:] = w1
        fwd[:, 1:, 0] = w1
        fwd[:, 1:, 1:] = inner
        inv = fwd.copy()
        inv[:, 0, 1:] *= -1
        inv[:, 1:, 0] *= -1
        self.w = fwd * beta[:, None, None]
        self.w_inv = inv / beta[:, None, None]
        self.w_inv2 = np.einsum("kij,kjl->kil", self.w_inv, self.w_inv)

    def scale(self, v):
        return np.einsum("kij,kj->ki", self.w, v)

    def unscale(self, v):
        return np.einsum("kij,kj->ki", self.w_inv, v)


def _bpdn_interior_point(d: GaborDictionary, y, eps, opts, max_iter=80):
    """Mehrotra predictor-corrector on the dual of the disk-constrained problem.

    Dual: maximize ``Re<w, y> - eps * sum |w_n|`` s.t. ``|(Phi^* w)_i| <= 1``,
    written over ``x = [Re w, Im w, t]`` with one 3-dim cone per atom and one
    per epigraph pair ``(t_n, w_n)``. The multiplier of atom cone i is
    ``-(Re s_i, Im s_i)``. Returns ``(s, w, iterations, gap, converged)``.
    """
    a = d.dense(allow_large=True)
    n, m = a.shape
    pm = np.hstack([a.real.T, a.imag.T])   # Re(Phi^* w) = pm @ [Re w, Im w]
    qm = np.hstack([-a.imag.T, a.real.T])  # Im(Phi^* w)
    c = np.concatenate([-y.real, -y.imag, np.full(n, eps)])
    k = m + n
    b = np.zeros((k, 3))
    b[:m, 0] = 1.0
    tcols = np.column_stack([2 * n + np.arange(n), np.arange(n), n + np.arange(n)])

    def amul(x):
        out = np.empty((k, 3))
        out[:m, 0] = 0.0
        out[:m, 1] = -(pm @ x[:2 * n])
        out[:m, 2] = -(qm @ x[:2 * n])
        out[m:] = -x[tcols]
        return out

    def atmul(v):
        out = np.zeros(3 * n)
        out[:2 * n] = -(pm.T @ v[:m, 1]) - qm.T @ v[:m, 2]
        np.add.at(out, tcols.ravel(), -v[m:].ravel())
        return out

    x = np.concatenate([np.zeros(2 * n), np.ones(n)])
    s = b - amul(x)
    z = np.zeros((k, 3))
    z[:, 0] = 1.0
    unit = z.copy()
    cnorm = max(1.0, float(np.linalg.norm(c)))
    tol = opts.rel_tol
    it, gap, converged = 0, math.inf, False
    for it in range(1, max_iter + 1):
        rx = atmul(z) + c
        rz = amul(x) + s - b
        gap = float(np.sum(s * z))
        if (np.linalg.norm(rx) <= tol * cnorm and np.linalg.norm(rz) <= tol
                and gap <= tol * max(1.0, abs(float(c @ x)))):
            converged = True
            break
        if np.any(_jnorm2(s) <= 0) or np.any(_jnorm2(z) <= 0):
            break
        sc = _NTScaling(s, z)
        lam = sc.scale(z)
        h = np.zeros((3 * n, 3 * n))
        g = sc.w_inv2[:m]
        h[:2 * n, :2 * n] = (pm.T @ (g[:, 1, 1, None] * pm + g[:, 1, 2, None] * qm)
                             + qm.T @ (g[:, 2, 1, None] * pm + g[:, 2, 2, None] * qm))
        for i in range(3):
            for j in range(3):
                h[tcols[:, i], tcols[:, j]] += sc.w_inv2[m:, i, j]
        try:
            chol = np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            break

        def direction(comp):
            t = np.einsum("kij,kj->ki", sc.w_inv2, rz) + sc.unscale(_jsolve(lam, comp))
            dx = np.linalg.solve(chol.T, np.linalg.solve(chol, -rx - atmul(t)))
            dz = np.einsum("kij,kj->ki", sc.w_inv2, amul(dx)) + t
            return dx, -rz - amul(dx), dz

        lam2 = _jprod(lam, lam)
        dxa, dsa, dza = direction(-lam2)
        step = min(1.0, _max_step(s, dsa), _max_step(z, dza))
        sigma = (1.0 - step) ** 3
        comp = -lam2 - _jprod(sc.unscale(dsa), sc.scale(dza)) + sigma * (gap / k) * unit
        dx, ds, dz = direction(comp)
        step = min(1.0, 0.99 * min(_max_step(s, ds), _max_step(z, dz)))
        if not (step > 1e-10 and np.all(np.isfinite(dx)) and np.all(np.isfinite(dz))):
            break
        x, s, z = x + step * dx, s + step * ds, z + step * dz
    sol = -(z[:m, 1] + 1j * z[:m, 2])
    return sol, x[:n] + 1j * x[n:2 * n], it, gap, converged


def _polish_bpdn(d, y, eps, s0, support, active, lam0, opts, max_steps=30):
    """Newton on the restricted optimality system of the disk-constrained problem.

    With ``r = Phi_S s - y`` and ``w = lam * r`` on the active rows A:
    ``(Phi^* w)_S = -sign(s)`` and ``|r_A| = eps``. Real unknowns are
    ``[Re s, Im s, lam]``. Returns ``(solution, max residual, excess)`` or None.
    """
    p, q = support.size, active.size
    cols = d.columns(support)
    b = cols[active]
    bh = b.conj().T
    ya = y[active]
    s = s0.astype(complex)
    lam = lam0.astype(float)
    for _ in range(max_steps):
        mag = np.abs(s)
        if np.any(mag == 0) or not np.all(np.isfinite(s)):
            return None
        r = b @ s - ya
        f1 = bh @ (lam * r) + s / mag
        f2 = np.abs(r) ** 2 - eps ** 2
        if np.max(np.abs(f1)) <= 1e-13 and np.max(np.abs(f2)) <= 1e-13 * eps ** 2:
            break
        hm = bh @ (lam[:, None] * b)
        ua, ub = s.real / mag, s.imag / mag
        jac = np.zeros((2 * p + q, 2 * p + q))
        jac[:p, :p] = hm.real + np.diag((1 - ua * ua) / mag)
        jac[:p, p:2 * p] = -hm.imag - np.diag(ua * ub / mag)
        jac[p:2 * p, :p] = hm.imag - np.diag(ua * ub / mag)
        jac[p:2 * p, p:2 * p] = hm.real + np.diag((1 - ub * ub) / mag)
        dl = bh * r[None, :]
        jac[:p, 2 * p:] = dl.real
        jac[p:2 * p, 2 * p:] = dl.imag
        c = r.conj()[:, None] * b
        jac[2 * p:, :p] = 2 * c.real
        jac[2 * p:, p:2 * p] = -2 * c.imag
        rhs = -np.concatenate([f1.real, f1.imag, f2])
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e6 * (1 + np.linalg.norm(s)):
            return None
        s = s + step[:p] + 1j * step[p:2 * p]
        lam = lam + step[2 * p:]
    else:
        return None
    if np.any(lam < 0):
        return None
    sol = np.zeros(d.atom_count, complex)
    sol[support] = s
    resid = d.apply(sol) - y
    primal = float(np.max(np.abs(resid)))
    if primal > eps + opts.abs_tol:
        return None
    mult = np.zeros(d.n, complex)
    mult[active] = lam * resid[active]
    g = np.abs(d.adjoint(mult))
    g[support] = 0.0
    excess = max(float(g.max()) - 1.0, 0.0)
    if excess > opts.rel_tol:
        return None
    return sol, primal, excess


def _least_squares(d: GaborDictionary, support, y):
    cols = d.columns(support)
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    resid = y - cols @ coef
    return coef, resid, cols


def omp(d: GaborDictionary, y, sparsity_limit: int, residual_tol: float = 1e-10) -> RecoveryResult:
    """Orthogonal matching pursuit; lowest flat index wins exact ties."""
    if sparsity_limit < 1:
        raise ValueError("sparsity_limit must be >= 1")
    y = _check_obs(d, y)
    m = d.atom_count
    sol = np.zeros(m, complex)
    resid = y.copy()
    support: list[int] = []
    coef = np.zeros(0, complex)
    ok = True
    it = 0
    while len(support) < min(sparsity_limit, m) and np.linalg.norm(resid) > residual_tol:
        corr = np.abs(d.adjoint(resid))
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        it += 1
        coef, resid, cols = _least_squares(d, support, y)
        if np.linalg.cond(cols) > 1e12:
            ok = False
            break
    sol[support] = coef
    rnorm = float(np.linalg.norm(resid))
    return RecoveryResult(sol, it, rnorm, 0.0, ok, _l1(sol), tuple(support))


L0_BUDGET = 10**7


def l0_oracle(d: GaborDictionary, y, k_max: int, tie_tol: float = 1e-10) -> RecoveryResult:
    """Exhaustive search over supports of size <= k_max.

    Residuals within ``tie_tol * max(1, ||y||)`` of the best count as ties;
    the first candidate found wins, so smaller supports beat larger ones and
    lexicographically earlier supports beat later ones.
    """
    y = _check_obs(d, y)
    m = d.atom_count
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if sum(math.comb(m, k) for k in range(1, k_max + 1)) > L0_BUDGET:
        raise ValueError(f"enumeration budget exceeded: C({m}, <= {k_max}) > {L0_BUDGET}")
    ynorm = float(np.linalg.norm(y))
    slack = tie_tol * max(1.0, ynorm)
    best_support: tuple[int, ...] = ()
    best_coef = np.zeros(0, complex)
    best_res = ynorm
    evaluated = 0
    for k in range(1, k_max + 1):
        if best_res <= slack:
            break
        for support in itertools.combinations(range(m), k):
            coef, resid, _ = _least_squares(d, support, y)
            evaluated += 1
            r = float(np.linalg.norm(resid))
            if r < best_res - slack:
                best_res, best_support, best_coef = r, support, coef
    sol = np.zeros(m, complex)
    sol[list(best_support)] = best_coef
    return RecoveryResult(sol, evaluated, best_res, 0.0, True, _l1(sol), best_support)
