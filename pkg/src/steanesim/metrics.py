"""Scalar noise-strength functionals on single-qubit channels.

All five metrics vanish on the identity channel and accept either a
``Channel`` or a bare process matrix.  The diamond distance follows the
half-normalized convention

    D(E) = (1/2) sup_psi || (E (x) id)(psi) - psi ||_1

computed through the semidefinite characterization for differences of
channels (Hermitian Choi difference J):

    D(E) = 2 max { <J, W> : 0 <= W <= I (x) rho, rho a state }.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .channels import Channel, PAULIS, gamma_to_choi
from .sdp import SDPError, solve_sdp

_CHOI_ID = gamma_to_choi(np.eye(4))


def _as_gamma(channel) -> np.ndarray:
    if isinstance(channel, Channel):
        return channel.gamma
    return np.asarray(channel, dtype=float)


class MetricKind(str, Enum):
    INFIDELITY = "infidelity"
    DIAMOND = "diamond"
    TRACE_NORM = "trace_norm"
    FROBENIUS_NORM = "frobenius_norm"
    WORST_CASE = "worst_case"


def infidelity(channel) -> float | np.ndarray:
    """Entanglement infidelity, 1 - Tr(gamma)/4; affine in gamma."""
    g = _as_gamma(channel)
    return 1.0 - np.trace(g, axis1=-2, axis2=-1) / 4.0


def choi_norm_distance(channel, order: int = 1) -> float:
    """Trace (order 1) or Frobenius (order 2) norm of J - J_id."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    diff = gamma_to_choi(_as_gamma(channel)) - _CHOI_ID
    eigs = np.linalg.eigvalsh(diff)
    if order == 1:
        return float(np.abs(eigs).sum())
    return float(np.sqrt((eigs ** 2).sum()))


def worst_case_error(channel, tol: float = 1e-8, return_flag: bool = False):
    """Least x in [0, 1] with J - (1 - x) J_id positive semidefinite,
    located by bisection on the (monotone) minimum eigenvalue.

    For a Pauli channel this equals the total non-identity probability.
    Returns 1.0 (flagged when requested) if no x in [0, 1] is feasible.
    """
    choi = gamma_to_choi(_as_gamma(channel))

    def min_eig(x):
        return np.linalg.eigvalsh(choi - (1.0 - x) * _CHOI_ID).min()

    feas_tol = -1e-11
    if min_eig(1.0) < feas_tol:
        return (1.0, True) if return_flag else 1.0
    if min_eig(0.0) >= feas_tol:
        return (0.0, False) if return_flag else 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if min_eig(mid) >= feas_tol:
            hi = mid
        else:
            lo = mid
    return (hi, False) if return_flag else hi


# ---------------------------------------------------------------------------
# diamond distance
# ---------------------------------------------------------------------------

def _hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j / np.sqrt(2)
            e[j, i] = 1j / np.sqrt(2)
            basis.append(e)
    return basis


def _partial_trace_first(m: np.ndarray) -> np.ndarray:
    r = m.reshape(2, 2, 2, 2)
    return r[0, :, 0, :] + r[1, :, 1, :]


def diamond_distance(channel, tol: float = 1e-9) -> float:
    """Half diamond-norm distance to the identity channel via the
    semidefinite program over (W, rho) with 0 <= W <= I (x) rho."""
    j_diff = gamma_to_choi(_as_gamma(channel)) - _CHOI_ID
    j_diff = (j_diff + j_diff.conj().T) / 2
    if np.abs(j_diff).max() < 1e-14:
        return 0.0

    zeros2 = np.zeros((2, 2), dtype=complex)
    zeros4 = np.zeros((4, 4), dtype=complex)
    c_blocks = [-j_diff, zeros4, zeros2]

    a_blocks = []
    b = []
    for e in _hermitian_basis(4):
        a_blocks.append([e, e, -_partial_trace_first(e)])
        b.append(0.0)
    eye2 = np.eye(2, dtype=complex)
    a_blocks.append([zeros4, zeros4, eye2])
    b.append(1.0)
    x0 = [np.eye(4, dtype=complex) / 4, np.eye(4, dtype=complex) / 4, eye2 / 2]

    try:
        res = solve_sdp(c_blocks, a_blocks, b, tol=tol, x0=x0)
    except SDPError as exc:
        if exc.best is None or exc.best.gap > 1e-6:
            raise
        res = exc.best
    value = -2.0 * res.primal_objective
    return float(max(value, 0.0))


def extended_action_on_pure(channel, psi: np.ndarray) -> np.ndarray:
    """(E (x) id) applied to a pure two-qubit state, via Kraus operators."""
    ch = channel if isinstance(channel, Channel) else Channel(_as_gamma(channel))
    psi = np.asarray(psi, dtype=complex).reshape(4)
    rho = np.zeros((4, 4), dtype=complex)
    for k in ch.kraus():
        v = np.kron(k, np.eye(2)) @ psi
        rho += np.outer(v, v.conj())
    return rho


def diamond_lower_bound(channel, psi: np.ndarray) -> float:
    """Half trace distance of (E (x) id)(psi) to psi; a certified lower
    bound on diamond_distance for any pure two-qubit input."""
    psi = np.asarray(psi, dtype=complex).reshape(4)
    psi = psi / np.linalg.norm(psi)
    out = extended_action_on_pure(channel, psi)
    diff = out - np.outer(psi, psi.conj())
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


_METRIC_FNS = {
    MetricKind.INFIDELITY: infidelity,
    MetricKind.DIAMOND: diamond_distance,
    MetricKind.TRACE_NORM: lambda ch: choi_norm_distance(ch, order=1),
    MetricKind.FROBENIUS_NORM: lambda ch: choi_norm_distance(ch, order=2),
    MetricKind.WORST_CASE: worst_case_error,
}


def get_metric(kind) -> callable:
    return _METRIC_FNS[MetricKind(kind)]


def evaluate_metric(kind, gammas: np.ndarray) -> np.ndarray:
    """Metric values for an array of process matrices (..., 4, 4)."""
    kind = MetricKind(kind)
    gammas = np.asarray(gammas, dtype=float)
    if kind == MetricKind.INFIDELITY:
        return np.asarray(infidelity(gammas))
    fn = get_metric(kind)
    flat = gammas.reshape(-1, 4, 4)
    vals = np.array([fn(g) for g in flat])
    return vals.reshape(gammas.shape[:-2])
