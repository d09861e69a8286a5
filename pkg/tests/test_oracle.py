import time

import numpy as np
import pytest

from steanesim.channels import (depolarizing, identity_channel, random_channel,
                                rotation, unitary_channel, PAULIS)
from steanesim.oracle import DenseOracle, oracle_qec_round


class TestRotationFixture:
    @pytest.mark.parametrize("theta", [0.1, 0.3, 1.0])
    def test_syndrome_probabilities(self, rep3, theta):
        recs = oracle_qec_round(rep3, [rotation(theta)] * 3)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        assert abs(recs[0].prob - (c ** 6 + s ** 6)) < 1e-12
        other = c ** 4 * s ** 2 + c ** 2 * s ** 4
        for k in (1, 2, 3):
            assert abs(recs[k].prob - other) < 1e-12

    @pytest.mark.parametrize("theta", [0.1, 0.3, 1.0])
    def test_trivial_syndrome_residual_rotation(self, rep3, theta):
        # surviving coherence cos^3 (identity) vs sin^3 (logical flip): a
        # residual rotation with tan(phi/2) = tan(theta/2)^3
        recs = oracle_qec_round(rep3, [rotation(theta)] * 3)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        norm = np.sqrt(c ** 6 + s ** 6)
        u = (c ** 3 * PAULIS[0] - 1j * s ** 3 * PAULIS[1]) / norm
        expected = unitary_channel(u).gamma
        assert np.abs(recs[0].gamma - expected).max() < 1e-10
        phi = 2 * np.arctan(np.tan(theta / 2) ** 3)
        assert abs(np.trace(recs[0].gamma) - (2 + 2 * np.cos(phi))) < 1e-10

    def test_runtime_budget(self, rep3):
        start = time.perf_counter()
        for theta in (0.1, 0.3, 1.0):
            oracle_qec_round(rep3, [rotation(theta)] * 3)
        assert time.perf_counter() - start < 1.0


class TestOracleInvariants:
    def test_identity_trivial(self, rep3, steane):
        for code in (rep3, steane):
            recs = oracle_qec_round(code, [identity_channel()] * code.n)
            assert abs(recs[0].prob - 1.0) < 1e-12
            assert np.abs(recs[0].gamma - np.eye(4)).max() < 1e-12
            assert all(recs[s].prob < 1e-12 for s in range(1, code.num_syndromes))

    def test_probability_closure_and_psd(self, steane):
        for seed in (0, 1):
            ch = random_channel(0.08, seed)
            recs = oracle_qec_round(steane, [ch] * 7)
            total = sum(recs[s].prob for s in range(64))
            assert abs(total - 1.0) < 1e-12
            for s in range(64):
                eigs = np.linalg.eigvalsh(recs[s].choi)
                assert eigs.min() > -1e-10
                assert abs(np.trace(recs[s].choi).real - 1.0) < 1e-10

    def test_distinct_channels_per_qubit(self, steane):
        chans = [random_channel(0.1, s) for s in range(7)]
        recs = oracle_qec_round(steane, chans)
        assert abs(sum(recs[s].prob for s in range(64)) - 1.0) < 1e-12

    def test_depolarizing_conditionals_diagonal(self, rep3):
        recs = oracle_qec_round(rep3, [depolarizing(0.2)] * 3)
        for s in range(4):
            g = recs[s].gamma
            assert np.abs(g - np.diag(np.diag(g))).max() < 1e-12

    def test_rejects_large_codes(self):
        class Fake:
            n = 8
        with pytest.raises(ValueError):
            DenseOracle(Fake())

    def test_channel_count_checked(self, rep3):
        with pytest.raises(ValueError):
            oracle_qec_round(rep3, [identity_channel()] * 2)
