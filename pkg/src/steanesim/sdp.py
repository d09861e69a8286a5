"""Small dense semidefinite-program solver (primal-dual path following).

Solves standard-form problems over block-diagonal complex Hermitian
variables:

    minimize    <C, X>
    subject to  <A_i, X> = b_i   (i = 1..m),   X >= 0

with dual  maximize b.y  subject to  C - sum_i y_i A_i >= 0.

The implementation is a textbook Mehrotra predictor-corrector with HKM
directions, adequate for the fixed, tiny problems in this package
(blocks of size <= 4, m <= 20).  All inner products are Frobenius,
<A, B> = Tr(A^dag B), and are real for Hermitian arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SDPResult:
    X: list[np.ndarray]
    y: np.ndarray
    Z: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    gap: float
    iterations: int
    status: str


class SDPError(RuntimeError):
    """Raised when the interior-point iteration fails to converge."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def _inner(a: list[np.ndarray], b: list[np.ndarray]) -> float:
    return float(sum(np.trace(x.conj().T @ y).real for x, y in zip(a, b)))


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha dx >= 0 (x positive definite up to roundoff)."""
    w, v = np.linalg.eigh(_herm(x))
    w = np.clip(w, w.max() * 1e-14, None)
    isqrt = (v / np.sqrt(w)) @ v.conj().T
    e = np.linalg.eigvalsh(_herm(isqrt @ dx @ isqrt))
    emin = e.min()
    if emin >= 0:
        return np.inf
    return -1.0 / emin


def _min_eig(blocks: list[np.ndarray]) -> float:
    return min(np.linalg.eigvalsh(_herm(blk)).min() for blk in blocks)


def solve_sdp(c_blocks, a_blocks, b, tol=1e-10, max_iter=100, x0=None) -> SDPResult:
    """a_blocks[i] is the list of Hermitian blocks of constraint matrix A_i.
    A strictly feasible primal start may be supplied as x0; Newton steps then
    keep the primal residual at roundoff level throughout."""
    m = len(b)
    b = np.asarray(b, dtype=float)
    sizes = [blk.shape[0] for blk in c_blocks]
    nblk = len(sizes)
    scale = 1.0 + max(np.abs(blk).max() for blk in c_blocks) + np.abs(b).max()
    # stacked constraint tensors, one (m, s, s) array per block
    a_stack = [np.stack([a_blocks[i][k] for i in range(m)]) for k in range(nblk)]

    if x0 is None:
        x = [np.eye(s, dtype=complex) * scale for s in sizes]
    else:
        x = [np.asarray(blk, dtype=complex).copy() for blk in x0]
    z = [np.eye(s, dtype=complex) * scale for s in sizes]
    y = np.zeros(m)
    nu = sum(sizes)

    def operator(blocks):
        out = np.zeros(m)
        for k in range(nblk):
            out += np.einsum("iab,ab->i", a_stack[k].conj(), blocks[k]).real
        return out

    def adjoint(vec):
        return [np.einsum("i,iab->ab", vec, a_stack[k]) for k in range(nblk)]

    feas_tol = max(tol, 1e-9)
    best = None
    for it in range(1, max_iter + 1):
        rp = b - operator(x)
        at_y = adjoint(y)
        rd = [c_blocks[k] - at_y[k] - z[k] for k in range(len(sizes))]
        mu = _inner(x, z) / nu

        pobj = _inner(c_blocks, x)
        dobj = float(b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / scale
        dinf = max(np.abs(blk).max() for blk in rd) / scale
        if (pinf < 1e-7 and dinf < 1e-7
                and (best is None or gap < best.gap)):
            best = SDPResult([blk.copy() for blk in x], y.copy(),
                             [blk.copy() for blk in z], pobj, dobj, gap, it, "stalled")
        if gap < tol and pinf < feas_tol and dinf < feas_tol:
            return SDPResult(x, y, z, pobj, dobj, gap, it, "optimal")
        if mu < 1e-14 * scale:
            break  # at the float64 floor; report the best feasible iterate

        zinv = [np.linalg.inv(blk) for blk in z]

        # Schur complement M[i, j] = Re <A_i, X A_j Z^-1>
        schur = np.zeros((m, m))
        for k in range(nblk):
            t = np.einsum("ab,jbc,cd->jad", x[k], a_stack[k], zinv[k])
            schur += np.einsum("iab,jab->ij", a_stack[k].conj(), t).real
        schur = (schur + schur.T) / 2
        try:
            schur_chol = np.linalg.cholesky(schur + np.eye(m) * 1e-14 * np.trace(schur) / m)
        except np.linalg.LinAlgError:
            break

        def direction(sigma_mu, corr=None):
            # dZ = Rd - A*(dy); dX from the linearized complementarity.
            rhs_blocks = []
            for k in range(len(sizes)):
                t = sigma_mu * zinv[k] - x[k] - x[k] @ rd[k] @ zinv[k]
                if corr is not None:
                    t -= corr[0][k] @ corr[1][k] @ zinv[k]
                rhs_blocks.append(t)
            rhs = rp - operator(rhs_blocks)
            dy = np.linalg.solve(schur_chol.T, np.linalg.solve(schur_chol, rhs))
            at_dy = adjoint(dy)
            dz = [rd[k] - at_dy[k] for k in range(len(sizes))]
            dx = []
            for k in range(len(sizes)):
                t = rhs_blocks[k] - x[k] @ (-at_dy[k]) @ zinv[k]
                dx.append(_herm(t))
            return dx, dy, dz

        # predictor
        dx_a, dy_a, dz_a = direction(0.0)
        ap = min(1.0, 0.99 * min(_max_step(x[k], dx_a[k]) for k in range(len(sizes))))
        ad = min(1.0, 0.99 * min(_max_step(z[k], dz_a[k]) for k in range(len(sizes))))
        mu_aff = _inner([x[k] + ap * dx_a[k] for k in range(len(sizes))],
                        [z[k] + ad * dz_a[k] for k in range(len(sizes))]) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu)) ** 3)

        # corrector
        dx, dy, dz = direction(sigma * mu, corr=(dx_a, dz_a))
        ap = min(1.0, 0.97 * min(_max_step(x[k], dx[k]) for k in range(len(sizes))))
        ad = min(1.0, 0.97 * min(_max_step(z[k], dz[k]) for k in range(len(sizes))))
        if ap < 1e-10 or ad < 1e-10:
            break

        x_new = [_herm(x[k] + ap * dx[k]) for k in range(len(sizes))]
        z_new = [_herm(z[k] + ad * dz[k]) for k in range(len(sizes))]
        for _ in range(40):  # backtrack if roundoff pushed an iterate out of the cone
            if _min_eig(x_new) > 0 and _min_eig(z_new) > 0:
                break
            ap *= 0.5
            ad *= 0.5
            x_new = [_herm(x[k] + ap * dx[k]) for k in range(len(sizes))]
            z_new = [_herm(z[k] + ad * dz[k]) for k in range(len(sizes))]
        else:
            break
        x, z = x_new, z_new
        y = y + ad * dy

    if best is not None and best.gap < max(1e3 * tol, 1e-7):
        return best
    raise SDPError("no convergence (best gap "
                   f"{'n/a' if best is None else format(best.gap, '.2e')})", best)
