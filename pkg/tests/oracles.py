"""Independent reference computations used only by the test suite."""

import numpy as np
from scipy.optimize import minimize

from steanesim.metrics import diamond_lower_bound


def dnorm_direct_max(channel, n_coarse=400, n_refine=8, seed=0):
    """Grid-plus-refinement maximization of the half trace distance of
    (E (x) id)(psi) from psi over pure two-qubit inputs; an independent
    route to the diamond distance."""
    rng = np.random.default_rng(seed)

    def f(v8):
        v = v8[:4] + 1j * v8[4:]
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            return 0.0
        return diamond_lower_bound(channel, v / nv)

    cands = rng.standard_normal((n_coarse, 8))
    vals = np.array([f(c) for c in cands])
    best = float(vals.max())
    for idx in np.argsort(vals)[-n_refine:]:
        res = minimize(lambda v: -f(v), cands[idx], method="Nelder-Mead",
                       options=dict(xatol=1e-9, fatol=1e-13, maxiter=4000))
        best = max(best, float(-res.fun))
    return best


def wce_sdp(channel, tol=1e-10):
    """Worst-case error as a semidefinite program (interior-point route),
    independent of the production bisection."""
    from steanesim.channels import gamma_to_choi
    from steanesim.metrics import _CHOI_ID, _hermitian_basis, _as_gamma
    from steanesim.sdp import solve_sdp

    choi = gamma_to_choi(_as_gamma(channel))
    rhs = choi - _CHOI_ID
    one = np.ones((1, 1), dtype=complex)
    zero1 = np.zeros((1, 1), dtype=complex)
    zeros4 = np.zeros((4, 4), dtype=complex)
    # blocks: M = J - (1-x) J_id >= 0, [x] >= 0, [1-x] >= 0
    c_blocks = [zeros4, one, zero1]
    a_blocks = []
    b = []
    for e in _hermitian_basis(4):
        coeff = np.trace(e.conj().T @ _CHOI_ID).real
        a_blocks.append([e, -coeff * one, zero1])
        b.append(float(np.trace(e.conj().T @ rhs).real))
    a_blocks.append([zeros4, one, one])
    b.append(1.0)
    lam = float(np.linalg.eigvalsh(choi).min())
    x0 = None
    if lam > 1e-10:
        x_start = 1.0 - lam / 2
        x0 = [choi - (lam / 2) * _CHOI_ID, one * x_start, one * (1 - x_start)]
    res = solve_sdp(c_blocks, a_blocks, b, tol=tol, x0=x0)
    return float(res.X[1][0, 0].real)


def ml_coset_decoder(code, pauli_probs):
    """Maximum-likelihood coset decoding of an i.i.d. Pauli channel by
    brute-force enumeration of all 4^n errors.

    pauli_probs: (n, 4) per-qubit probabilities in (I, X, Y, Z) order.
    Returns (syndrome -> best logical class index) plus the coset masses.
    """
    n = code.n
    labels = np.array(np.meshgrid(*[range(4)] * n, indexing="ij"))
    labels = labels.reshape(n, -1).T  # (4^n, n), label of qubit q in column q
    probs = np.prod(pauli_probs[np.arange(n), labels], axis=1)

    # symplectic bit masks per error
    xmask = np.zeros(len(labels), dtype=np.int64)
    zmask = np.zeros(len(labels), dtype=np.int64)
    for q in range(4):
        pass
    xbit = np.isin(labels, (1, 2))
    zbit = np.isin(labels, (2, 3))
    for q in range(n):
        xmask |= xbit[:, q].astype(np.int64) << q
        zmask |= zbit[:, q].astype(np.int64) << q

    def anticommutes(x1, z1, p):
        return (np.bitwise_count(x1 & p.z) + np.bitwise_count(z1 & p.x)) % 2

    synd = np.zeros(len(labels), dtype=np.int64)
    for j, g in enumerate(code.generators):
        synd |= anticommutes(xmask, zmask, g).astype(np.int64) << j

    masses = np.zeros((code.num_syndromes, 4))
    for s in range(code.num_syndromes):
        sel = synd == s
        t = code.pure_errors[s]
        ex, ez = xmask[sel] ^ t.x, zmask[sel] ^ t.z
        ax = anticommutes(ex, ez, code.logical_z)  # X-type logical component
        az = anticommutes(ex, ez, code.logical_x)  # Z-type logical component
        cls = np.select([(ax == 0) & (az == 0), (ax == 1) & (az == 0),
                         (ax == 1) & (az == 1), (ax == 0) & (az == 1)],
                        [0, 1, 2, 3])
        for k in range(4):
            masses[s, k] = probs[sel][cls == k].sum()
    return masses.argmax(axis=1), masses
