"""Single-qubit CPTP channel representations, conversions, and generators.

Representation conventions (fixed for all file formats):

* Pauli order is (I, X, Y, Z) everywhere.
* Process matrix: ``gamma[i, j] = Tr(P_i E(P_j)) / 2`` so a
  trace-preserving map has row 0 equal to (1, 0, 0, 0) and channel
  composition is plain matrix multiplication, ``gamma(A o B) = gamma(A)
  @ gamma(B)``.
* Choi matrix: ``J = sum_k E(P_k) (x) P_k^T / 4`` (output factor first),
  positive semidefinite with unit trace for a CPTP map, and
  ``gamma[i, j] = Tr(J (P_i (x) P_j^T))``.
* Chi matrix: ``E(rho) = sum_{k,l} chi[k, l] P_k rho P_l``, Hermitian
  with unit trace; a diagonal chi is a Pauli (stochastic) channel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .pauli import _SINGLE_QUBIT

PAULIS = [_SINGLE_QUBIT[k] for k in range(4)]

# Bell-basis change used by the chi <-> Choi conversion: column k is
# (P_k (x) I) |Phi+>.
_PHI_PLUS = np.zeros(4, dtype=complex)
_PHI_PLUS[0] = _PHI_PLUS[3] = 1 / np.sqrt(2)
_BELL = np.column_stack([np.kron(P, np.eye(2)) @ _PHI_PLUS for P in PAULIS])

PSD_TOL = 1e-9
ROUNDTRIP_TOL = 1e-12


class ChannelValidationError(ValueError):
    """Raised when a matrix fails CPTP validation."""


# ---------------------------------------------------------------------------
# representation conversions
# ---------------------------------------------------------------------------

def gamma_to_choi(gamma: np.ndarray) -> np.ndarray:
    J = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            J += gamma[i, j] * np.kron(PAULIS[i], PAULIS[j].T)
    return J / 4.0


def choi_to_gamma(choi: np.ndarray) -> np.ndarray:
    gamma = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            gamma[i, j] = np.trace(choi @ np.kron(PAULIS[i], PAULIS[j].T)).real
    return gamma


def choi_to_chi(choi: np.ndarray) -> np.ndarray:
    return _BELL.conj().T @ choi @ _BELL


def chi_to_choi(chi: np.ndarray) -> np.ndarray:
    return _BELL @ chi @ _BELL.conj().T


def gamma_to_chi(gamma: np.ndarray) -> np.ndarray:
    return choi_to_chi(gamma_to_choi(gamma))


def chi_to_gamma(chi: np.ndarray) -> np.ndarray:
    return choi_to_gamma(chi_to_choi(chi))


def kraus_to_gamma(kraus: Iterable[np.ndarray]) -> np.ndarray:
    gamma = np.zeros((4, 4))
    for K in kraus:
        Kd = K.conj().T
        for j in range(4):
            out = K @ PAULIS[j] @ Kd
            for i in range(4):
                gamma[i, j] += 0.5 * np.trace(PAULIS[i] @ out).real
    return gamma


def apply_gamma(gamma: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Act on a single-qubit density matrix through the process matrix."""
    coeffs = np.array([0.5 * np.trace(P @ rho) for P in PAULIS])
    out_coeffs = gamma @ coeffs.real if np.allclose(coeffs.imag, 0) else gamma @ coeffs
    return sum(c * P for c, P in zip(out_coeffs, PAULIS))


@dataclass
class ValidationReport:
    row0_error: float
    choi_min_eig: float
    choi_trace_error: float
    roundtrip_error: float

    @property
    def is_cptp(self) -> bool:
        return (self.row0_error < 1e-9 and self.choi_min_eig > -PSD_TOL
                and self.choi_trace_error < 1e-9
                and self.roundtrip_error < ROUNDTRIP_TOL)


def validate_gamma(gamma: np.ndarray) -> ValidationReport:
    choi = gamma_to_choi(gamma)
    eigs = np.linalg.eigvalsh((choi + choi.conj().T) / 2)
    row0 = np.abs(gamma[0] - np.array([1.0, 0, 0, 0])).max()
    back = choi_to_gamma(choi)
    return ValidationReport(
        row0_error=float(row0),
        choi_min_eig=float(eigs.min()),
        choi_trace_error=float(abs(np.trace(choi).real - 1.0)),
        roundtrip_error=float(np.abs(back - gamma).max()),
    )


# ---------------------------------------------------------------------------
# the Channel value type
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Channel:
    """Immutable single-qubit CPTP map; gamma is the canonical storage."""

    gamma: np.ndarray
    seed: int | None = None
    delta: float | None = None
    ensemble: str | None = None
    _choi: np.ndarray | None = field(default=None, repr=False)
    _chi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float).reshape(4, 4)
        self.gamma.setflags(write=False)

    @property
    def choi(self) -> np.ndarray:
        if self._choi is None:
            self._choi = gamma_to_choi(self.gamma)
        return self._choi

    @property
    def chi(self) -> np.ndarray:
        if self._chi is None:
            self._chi = choi_to_chi(self.choi)
        return self._chi

    def validate(self) -> ValidationReport:
        return validate_gamma(self.gamma)

    def require_cptp(self):
        report = self.validate()
        if not report.is_cptp:
            raise ChannelValidationError(f"channel fails CPTP validation: {report}")
        return self

    def kraus(self) -> list[np.ndarray]:
        """Kraus operators from the Choi eigendecomposition (CP maps only)."""
        vals, vecs = np.linalg.eigh(self.choi)
        ops = []
        for lam, v in zip(vals, vecs.T):
            if lam < -PSD_TOL:
                raise ChannelValidationError(f"Choi eigenvalue {lam} < 0")
            if lam > 1e-14:
                # |v> = (K (x) I)|Phi+> / sqrt(2)-normalized: K[a,b] = sqrt(2 lam) v[2a+b]
                ops.append(np.sqrt(2.0 * max(lam, 0.0)) * v.reshape(2, 2))
        return ops

    def __matmul__(self, other: "Channel") -> "Channel":
        return Channel(self.gamma @ other.gamma)


# ---------------------------------------------------------------------------
# named channels
# ---------------------------------------------------------------------------

def identity_channel() -> Channel:
    return Channel(np.eye(4), ensemble="identity")


def depolarizing(p: float) -> Channel:
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing strength must lie in [0, 1]")
    return Channel(np.diag([1.0, 1 - p, 1 - p, 1 - p]), ensemble=f"depolarizing({p})")


def unitary_channel(u: np.ndarray, tag: str = "unitary") -> Channel:
    gamma = np.empty((4, 4))
    ud = u.conj().T
    for i in range(4):
        for j in range(4):
            gamma[i, j] = 0.5 * np.trace(PAULIS[i] @ u @ PAULIS[j] @ ud).real
    return Channel(gamma, ensemble=tag)


def rotation(theta: float) -> Channel:
    """Coherent rotation exp(i theta X / 2) applied by conjugation."""
    u = np.cos(theta / 2) * PAULIS[0] + 1j * np.sin(theta / 2) * PAULIS[1]
    return unitary_channel(u, tag=f"rotation({theta})")


def pauli_channel(p_i: float, p_x: float, p_y: float, p_z: float) -> Channel:
    probs = np.array([p_i, p_x, p_y, p_z], dtype=float)
    if probs.min() < -1e-12 or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("Pauli probabilities must be nonnegative and sum to 1")
    gamma = chi_to_gamma(np.diag(probs).astype(complex))
    ch = Channel(gamma, ensemble="pauli")
    ch._chi = np.diag(probs).astype(complex)
    return ch


# ---------------------------------------------------------------------------
# random channel generation
# ---------------------------------------------------------------------------

def random_channel(delta: float, seed: int) -> Channel:
    """Unitary-dilation sample: an 8x8 Hamiltonian with unit-variance Gaussian
    entries, U = exp(i delta H), two environment qubits traced out of |00>.

    Sampling order (the reproducibility contract): with rng =
    default_rng(seed), draw A = standard_normal((8, 8)) then
    B = standard_normal((8, 8)) and set H = (M + M^dag)/2 for M = A + iB.
    Diagonal entries are then real N(0,1) and off-diagonal entries have
    independent N(0, 1/2) real and imaginary parts.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((8, 8))
    b = rng.standard_normal((8, 8))
    m = a + 1j * b
    h = (m + m.conj().T) / 2
    evals, evecs = np.linalg.eigh(h)
    u = (evecs * np.exp(1j * delta * evals)) @ evecs.conj().T
    # Basis ordering is qubit (x) environment: K_e[a, b] = U[4a + e, 4b].
    kraus = [u[e::4, 0::4] for e in range(4)]
    gamma = kraus_to_gamma(kraus)
    gamma[0] = [1.0, 0.0, 0.0, 0.0]  # snap the TP row exactly
    return Channel(gamma, seed=int(seed), delta=float(delta))


def channel_seed(master_seed: int, index: int) -> int:
    """Stable per-channel seed derived from (master seed, index)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ChannelEnsemble:
    channels: list[Channel]
    delta: float
    master_seed: int
    scheme: str = "gaussian-hamiltonian-dilation"

    @classmethod
    def generate(cls, count: int, delta: float, master_seed: int) -> "ChannelEnsemble":
        chans = [random_channel(delta, channel_seed(master_seed, i)) for i in range(count)]
        return cls(chans, delta=delta, master_seed=master_seed)


# ---------------------------------------------------------------------------
# JSON-lines persistence: {"seed": u64, "delta": f64, "gamma": [16 floats]}
# ---------------------------------------------------------------------------

def channel_to_json(channel: Channel) -> str:
    return json.dumps({
        "seed": channel.seed,
        "delta": channel.delta,
        "gamma": [float(v) for v in channel.gamma.ravel()],
    })


def channel_from_json(line: str) -> Channel:
    rec = json.loads(line)
    gamma = np.array(rec["gamma"], dtype=float).reshape(4, 4)
    return Channel(gamma, seed=rec.get("seed"), delta=rec.get("delta"))


def save_channels(path, channels: Iterable[Channel]):
    with open(path, "w") as fh:
        for ch in channels:
            fh.write(channel_to_json(ch) + "\n")


def load_channels(path) -> list[Channel]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(channel_from_json(line))
    return out
