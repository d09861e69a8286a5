"""Brute-force density-matrix reference for one error-correction round.

Everything here works on dense 2^(n+1)-dimensional states (n code qubits
plus one noiseless reference qubit, reference stored as the highest index
bit).  It shares only the Pauli/stabilizer bookkeeping with the fast
group-sum path in ``qec``; states, projections, and channel applications
are computed from scratch so the two routes are independent checks of
each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel, choi_to_gamma, gamma_to_chi
from .pauli import _SINGLE_QUBIT, PauliOperator, StabilizerCode

DECODER_TIE_TOL = 1e-9


def _action_coeffs(p: PauliOperator, nq: int, dtype) -> tuple[int, np.ndarray]:
    """P|j> = coeffs[j] |j ^ xmask> for the operator embedded in nq qubits."""
    idx = np.arange(1 << nq)
    n_y = bin(p.x & p.z).count("1")
    signs = 1 - 2 * (np.bitwise_count(idx & p.z) % 2).astype(np.int64)
    phase = (1j) ** ((p.phase_exp + n_y) % 4)
    return p.x, (phase * signs).astype(dtype)


def _left_mult(p_x: int, coeffs: np.ndarray, rho: np.ndarray) -> np.ndarray:
    idx = np.arange(rho.shape[0]) ^ p_x
    return coeffs[idx][:, None] * rho[idx, :]


def _conjugate(p_x: int, coeffs: np.ndarray, rho: np.ndarray) -> np.ndarray:
    idx = np.arange(rho.shape[0]) ^ p_x
    return (coeffs[idx][:, None] * np.conj(coeffs[idx])[None, :]) * rho[np.ix_(idx, idx)]


def _apply_vector(p_x: int, coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
    idx = np.arange(v.shape[0]) ^ p_x
    return coeffs[idx] * v[idx]


def _apply_channel(rho: np.ndarray, chi: np.ndarray, qubit: int, nq: int) -> np.ndarray:
    """Apply sum_kl chi[k,l] P_k rho P_l on one qubit by tensor contraction."""
    paulis = [_SINGLE_QUBIT[k] for k in range(4)]
    m = np.zeros((2, 2, 2, 2), dtype=complex)  # [p, q, a, b]
    for k in range(4):
        for l in range(4):
            m += chi[k, l] * np.einsum("pa,bq->pqab", paulis[k], paulis[l])
    hi = 1 << (nq - 1 - qubit)
    lo = 1 << qubit
    rho6 = rho.reshape(hi, 2, lo, hi, 2, lo)
    out = np.einsum("pqab,uavwbx->upvwqx", m.astype(rho.dtype), rho6)
    return out.reshape(rho.shape)


@dataclass
class OracleRecord:
    prob: float
    gamma: np.ndarray
    choi: np.ndarray
    correction: int


class DenseOracle:
    """One QEC round on the encoded-plus-reference maximally entangled state."""

    def __init__(self, code: StabilizerCode, dtype=np.complex128):
        if code.n > 7:
            raise ValueError("dense oracle limited to at most 7 code qubits")
        self.code = code
        self.nq = code.n + 1
        self.dtype = dtype
        self._entangled = self._build_entangled_state()
        self._isometry = self._build_isometry()

    # -- state construction -------------------------------------------------

    def _logical_zero(self) -> np.ndarray:
        code = self.code
        dim = 1 << code.n
        ops = []
        for elem in code.elements:
            ops.append(_action_coeffs(elem, code.n, self.dtype) + (elem,))
        zbar = code.logical_z
        for seed in range(dim):
            v = np.zeros(dim, dtype=self.dtype)
            e = np.zeros(dim, dtype=self.dtype)
            e[seed] = 1.0
            zx, zc = _action_coeffs(zbar, code.n, self.dtype)[:2]
            seed_vec = e + _apply_vector(zx, zc, e)  # (1 + Zbar) |seed>
            for px, pc, _ in ops:
                v += _apply_vector(px, pc, seed_vec)
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                return v / norm
        raise RuntimeError("failed to construct the logical zero state")

    def _build_entangled_state(self) -> np.ndarray:
        code = self.code
        zero = self._logical_zero()
        xx, xc = _action_coeffs(code.logical_x, code.n, self.dtype)
        one = _apply_vector(xx, xc, zero)
        dim = 1 << code.n
        psi = np.zeros(2 * dim, dtype=self.dtype)
        psi[:dim] = zero / np.sqrt(2)      # reference bit 0
        psi[dim:] = one / np.sqrt(2)       # reference bit 1
        return psi

    def _build_isometry(self) -> np.ndarray:
        """Columns map the 2-qubit (logical, reference) basis into the
        code-space-plus-reference Hilbert space; logical qubit is the
        first (output) factor of the extracted Choi matrix."""
        dim = 1 << self.code.n
        zero = self._entangled[:dim] * np.sqrt(2)
        one = self._entangled[dim:] * np.sqrt(2)
        w = np.zeros((2 * dim, 4), dtype=self.dtype)
        w[:dim, 0] = zero   # |logical 0, ref 0>
        w[dim:, 1] = zero   # |logical 0, ref 1>
        w[:dim, 2] = one    # |logical 1, ref 0>
        w[dim:, 3] = one    # |logical 1, ref 1>
        return w

    # -- the QEC round ------------------------------------------------------

    def run(self, channels: list[Channel] | list[np.ndarray]) -> list[OracleRecord]:
        """Apply per-qubit channels, measure every syndrome, correct, and
        extract the conditional logical channel for each syndrome."""
        code = self.code
        if len(channels) != code.n:
            raise ValueError(f"expected {code.n} channels")
        chis = [gamma_to_chi(ch.gamma if isinstance(ch, Channel) else np.asarray(ch))
                for ch in channels]

        rho = np.outer(self._entangled, np.conj(self._entangled))
        for q, chi in enumerate(chis):
            rho = _apply_channel(rho, chi, qubit=q, nq=self.nq)

        # Binary projection tree over the generators.
        branches = {0: rho}
        for j, g in enumerate(code.generators):
            gx, gc = _action_coeffs(g, self.nq, self.dtype)
            new = {}
            for s, r in branches.items():
                grg = _conjugate(gx, gc, r)
                gr = _left_mult(gx, gc, r)
                rg = np.conj(gr.T)  # rho and g Hermitian
                new[s] = 0.25 * (r + grg + gr + rg)
                new[s | (1 << j)] = 0.25 * (r + grg - gr - rg)
            branches = new

        logical_actions = [_action_coeffs(L, self.nq, self.dtype)
                           for L in code.logicals]
        out = []
        for s in range(code.num_syndromes):
            rho_s = branches[s]
            prob = float(np.trace(rho_s).real)
            t = code.pure_errors[s]
            tx, tc = _action_coeffs(t, self.nq, self.dtype)
            rho_c = _conjugate(tx, tc, rho_s)
            fids = []
            for lx, lc in logical_actions:
                w = _apply_vector(lx, lc, self._entangled)
                fids.append(float(np.real(np.conj(w) @ rho_c @ w)))
            if prob <= 0:
                out.append(OracleRecord(prob=max(prob, 0.0), gamma=np.eye(4),
                                        choi=None, correction=0))
                continue
            best = max(fids)
            q_max = next(i for i, f in enumerate(fids)
                         if f >= best - DECODER_TIE_TOL * prob)
            qx, qc = logical_actions[q_max]
            rho_fix = _conjugate(qx, qc, rho_c)
            choi = (self._isometry.conj().T @ rho_fix @ self._isometry) / prob
            choi = np.asarray(choi, dtype=complex)
            out.append(OracleRecord(prob=prob, gamma=choi_to_gamma(choi),
                                    choi=choi, correction=q_max))
        return out


def oracle_qec_round(code: StabilizerCode, channels, dtype=np.complex128):
    """Convenience wrapper returning {syndrome: OracleRecord}."""
    oracle = DenseOracle(code, dtype=dtype)
    return {s: rec for s, rec in enumerate(oracle.run(channels))}
