"""One error-correction round via exact stabilizer-group double sums.

The 7-qubit process matrix is never materialized: every entry of the
group-restricted sum factorizes into a product of seven single-qubit
process-matrix entries times an exact Pauli phase, precomputed per code.
For a block with per-qubit process matrices G_q, the unnormalized
conditional channel is

    U[s][a, b] = (1/|S|) sum_{C,D in S} ph(C,a) ph(D,b) phi_s(D) nu_s(b)
                 prod_q G_q[x_q(D,b), w_q(C,a)]

where (w, ph) label the products (stabilizer element C) * (logical rep a)
and phi/nu are the anticommutation signs picked up by the syndrome
projector and the pure error.  Pr(s) = U[s][0, 0]; the fidelity of the
four candidate corrections is read off the diagonal, and the chosen
correction flips the signs of the output-Pauli components it
anticommutes with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelValidationError, gamma_to_choi
from .pauli import StabilizerCode

DECODER_TIE_TOL = 1e-9
NEGATIVE_PROB_TOL = 1e-10


@dataclass(frozen=True)
class BlockInput:
    """Seven (generally distinct) per-qubit process matrices entering one round."""

    code: StabilizerCode
    gammas: np.ndarray  # (n, 4, 4)

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        if g.shape != (self.code.n, 4, 4):
            raise ValueError(f"expected {(self.code.n, 4, 4)} gammas, got {g.shape}")
        object.__setattr__(self, "gammas", g)

    @classmethod
    def iid(cls, code: StabilizerCode, gamma: np.ndarray) -> "BlockInput":
        return cls(code, np.broadcast_to(np.asarray(gamma, dtype=float), (code.n, 4, 4)).copy())


@dataclass
class SyndromeRecord:
    s: int
    prob: float
    weight: float
    gamma_logical: np.ndarray
    correction: int


class _BlockTables:
    """Per-code phase tables for the vectorized group sums."""

    def __init__(self, code: StabilizerCode):
        n, G, S = code.n, len(code.elements), code.num_syndromes
        lab = np.empty((4, G, n), dtype=np.intp)
        ph = np.empty((4, G))
        for a, L in enumerate(code.logicals):
            for c, E in enumerate(code.elements):
                prod = E * L
                if not prod.is_hermitian:
                    raise AssertionError("stabilizer-coset product must be Hermitian")
                lab[a, c] = prod.labels()
                ph[a, c] = prod.phase.real
        self.lab_flat = lab.reshape(4 * G, n)
        phase_outer = np.outer(ph.ravel(), ph.ravel())
        # Per-qubit gather tables into a signed 32-entry flattening of the
        # 4x4 process matrix; the +-1 pair phase is folded into qubit 0.
        il = self.lab_flat[:, None, :]
        ir = self.lab_flat[None, :, :]
        idx = (il * 4 + ir).astype(np.intp)  # (4G, 4G, n)
        idx[:, :, 0][phase_outer < 0] += 16
        self.gather_idx = np.ascontiguousarray(np.moveaxis(idx, 2, 0))  # (n, 4G, 4G)

        masks = np.asarray(code.gen_masks)
        syndromes = np.arange(S)
        self.phi = 1.0 - 2.0 * (np.bitwise_count(syndromes[:, None] & masks[None, :]) % 2)

        nu = np.empty((S, 4))
        for s in range(S):
            t = code.pure_errors[s]
            nu[s] = [1.0 if t.commutes_with(L) else -1.0 for L in code.logicals]
        self.nu = nu

        lam = np.empty((4, 4))
        for q in range(4):
            for b in range(4):
                lam[q, b] = 1.0 if code.logicals[q].commutes_with(code.logicals[b]) else -1.0
        self.lam = lam
        self.n, self.G, self.S = n, G, S


_TABLES: dict[int, _BlockTables] = {}


def _tables(code: StabilizerCode) -> _BlockTables:
    key = id(code)
    if key not in _TABLES:
        _TABLES[key] = _BlockTables(code)
    return _TABLES[key]


_BATCH_CHUNK = 16  # keeps the (chunk, 4G, 4G) intermediate inside the cache


def _block_sums(t: _BlockTables, gm: np.ndarray, dtype) -> np.ndarray:
    flat = gm.reshape(gm.shape[0], t.n, 16)
    signed = np.concatenate([flat, -flat], axis=2)  # (B, n, 32)
    m = np.take(signed[:, 0], t.gather_idx[0], axis=1)
    for q in range(1, t.n):
        np.multiply(m, np.take(signed[:, q], t.gather_idx[q], axis=1), out=m)
    r = m.reshape(-1, 4, t.G, 4, t.G).sum(axis=2)            # (B, a, b, D)
    u = np.tensordot(r, t.phi.astype(dtype), axes=([3], [1])) / t.G
    return np.moveaxis(u, 3, 1)                              # (B, s, a, b)


def block_conditionals_batch(code: StabilizerCode, gammas: np.ndarray,
                             dtype=np.float64):
    """All syndrome probabilities, conditional logical channels, and chosen
    corrections for a batch of blocks.

    gammas: (B, n, 4, 4) per-qubit process matrices.
    Returns (probs (B, S), gamma_out (B, S, 4, 4), corrections (B, S)).
    Syndromes with zero probability get an identity placeholder channel.
    """
    t = _tables(code)
    gb = np.asarray(gammas, dtype=dtype)
    if gb.ndim == 3:
        gb = gb[None]
    B = gb.shape[0]
    gm = np.swapaxes(gb, -1, -2)  # index as [input row, output col] of the sums

    if B <= _BATCH_CHUNK:
        u = _block_sums(t, gm, dtype)
    else:
        u = np.empty((B, t.S, 4, 4), dtype=dtype)
        for lo in range(0, B, _BATCH_CHUNK):
            hi = min(lo + _BATCH_CHUNK, B)
            u[lo:hi] = _block_sums(t, gm[lo:hi], dtype)
    u *= t.nu[None, :, None, :].astype(dtype)

    probs = np.asarray(u[:, :, 0, 0], dtype=np.float64)
    if probs.min() < -NEGATIVE_PROB_TOL:
        raise ChannelValidationError(
            f"negative syndrome probability {probs.min():.3e}")
    probs = np.clip(probs, 0.0, None)

    diag = u[:, :, np.arange(4), np.arange(4)]               # (B, s, 4)
    fids = 0.25 * (diag @ t.lam.T.astype(dtype))             # (B, s, Q)
    fmax = fids.max(axis=-1, keepdims=True)
    tie = (DECODER_TIE_TOL * np.maximum(probs, 1e-300))[:, :, None]
    corrections = np.argmax(fids >= fmax - tie, axis=-1)

    col_signs = t.lam[corrections].astype(dtype)             # (B, s, 4) on output index
    denom = np.where(probs > 0.0, probs, 1.0)
    gamma_out = np.swapaxes(u, 2, 3) * col_signs[:, :, :, None]
    gamma_out = np.asarray(gamma_out, dtype=np.float64) / denom[:, :, None, None]
    dead = probs == 0.0
    if dead.any():
        gamma_out[dead] = np.eye(4)
        corrections[dead] = 0
    return probs, gamma_out, corrections


def block_conditionals(block: BlockInput, dtype=np.float64):
    probs, gammas, corr = block_conditionals_batch(block.code, block.gammas[None], dtype)
    return probs[0], gammas[0], corr[0]


def syndrome_distribution(block: BlockInput, dtype=np.float64) -> np.ndarray:
    """Born probabilities of all syndromes; sums to 1 for CPTP inputs."""
    return block_conditionals(block, dtype)[0]


def decode_and_extract(block: BlockInput, s: int, dtype=np.float64,
                       validate: bool = True) -> SyndromeRecord:
    """Conditional logical channel for syndrome s with the fidelity-maximizing
    logical correction (ties resolved toward the lowest index I, X, Y, Z)."""
    probs, gammas, corr = block_conditionals(block, dtype)
    if not 0 <= s < block.code.num_syndromes:
        raise ValueError(f"syndrome {s} out of range")
    if probs[s] <= 0.0:
        raise ValueError(f"syndrome {s} has zero probability; conditional undefined")
    rec = SyndromeRecord(s=s, prob=float(probs[s]), weight=1.0,
                         gamma_logical=gammas[s], correction=int(corr[s]))
    if validate:
        eigs = np.linalg.eigvalsh(gamma_to_choi(rec.gamma_logical))
        if eigs.min() < -1e-9 or abs(rec.gamma_logical[0, 0] - 1.0) > 1e-9:
            raise ChannelValidationError(
                f"conditional channel for syndrome {s} fails CPTP check "
                f"(min Choi eigenvalue {eigs.min():.3e})")
    return rec


def sample_syndrome(block: BlockInput, rng: np.random.Generator,
                    q_probs: np.ndarray | None = None,
                    dtype=np.float64) -> SyndromeRecord:
    """Draw a syndrome (from Born probabilities or a supplied importance
    distribution) and return its record with weight Pr(s)/Q(s)."""
    probs, gammas, corr = block_conditionals(block, dtype)
    if q_probs is None:
        q = probs
    else:
        q = np.asarray(q_probs, dtype=float)
        if q.shape != probs.shape or q.min() < -1e-12 or abs(q.sum() - 1.0) > 1e-9:
            raise ValueError("importance distribution is not a valid distribution")
        if np.any((probs > 0) & (q <= 0)):
            raise ValueError("importance distribution must cover the support of Pr")
    s = int(rng.choice(len(q), p=q / q.sum()))
    weight = 1.0 if q_probs is None else float(probs[s] / q[s])
    return SyndromeRecord(s=s, prob=float(probs[s]), weight=weight,
                          gamma_logical=gammas[s], correction=int(corr[s]))
