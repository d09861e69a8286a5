import numpy as np
import pytest
from scipy import stats

from steanesim.channels import (ChannelValidationError, depolarizing,
                                gamma_to_choi, identity_channel, pauli_channel,
                                random_channel, rotation)
from steanesim.oracle import oracle_qec_round
from steanesim.qec import (BlockInput, block_conditionals,
                           block_conditionals_batch, decode_and_extract,
                           sample_syndrome, syndrome_distribution)

from oracles import ml_coset_decoder


class TestSyndromeDistribution:
    def test_identity(self, steane):
        probs = syndrome_distribution(BlockInput.iid(steane, identity_channel().gamma))
        assert abs(probs[0] - 1.0) < 1e-12 and probs[1:].max() < 1e-12

    def test_closure_mixed_blocks(self, steane):
        rng = np.random.default_rng(0)
        for trial in range(20):
            gams = np.stack([random_channel(0.1, int(rng.integers(1 << 30))).gamma
                             for _ in range(7)])
            probs = syndrome_distribution(BlockInput(steane, gams))
            assert probs.min() >= 0.0
            assert abs(probs.sum() - 1.0) < 1e-10

    def test_unitary_noise_spreads_syndromes(self, steane):
        # coherent errors leave the syndrome undetermined
        probs = syndrome_distribution(BlockInput.iid(steane, rotation(0.4).gamma))
        assert (probs > 1e-6).sum() > 1

    def test_depolarizing_matches_oracle(self, steane):
        probs = syndrome_distribution(BlockInput.iid(steane, depolarizing(0.1).gamma))
        recs = oracle_qec_round(steane, [depolarizing(0.1)] * 7)
        for s in range(64):
            assert abs(probs[s] - recs[s].prob) < 1e-10

    def test_invalid_channel_rejected(self, steane):
        bad = np.diag([1.0, 40.0, -40.0, 40.0])
        with pytest.raises(ChannelValidationError):
            syndrome_distribution(BlockInput.iid(steane, bad))


class TestDecodeAndExtract:
    def test_identity_trivial(self, steane):
        rec = decode_and_extract(BlockInput.iid(steane, identity_channel().gamma), 0)
        assert rec.correction == 0
        assert np.abs(rec.gamma_logical - np.eye(4)).max() < 1e-12

    def test_zero_probability_rejected(self, steane):
        with pytest.raises(ValueError, match="zero probability"):
            decode_and_extract(BlockInput.iid(steane, identity_channel().gamma), 5)

    def test_depolarizing_conditionals_pauli(self, steane):
        blk = BlockInput.iid(steane, depolarizing(0.1).gamma)
        probs, gammas, _ = block_conditionals(blk)
        recs = oracle_qec_round(steane, [depolarizing(0.1)] * 7)
        for s in range(64):
            g = gammas[s]
            assert np.abs(g - np.diag(np.diag(g))).max() < 1e-9
            assert np.abs(g - recs[s].gamma).max() < 1e-9

    def test_rep3_rotation_matches_oracle(self, rep3):
        blk = BlockInput.iid(rep3, rotation(0.3).gamma)
        probs, gammas, corr = block_conditionals(blk)
        recs = oracle_qec_round(rep3, [rotation(0.3)] * 3)
        for s in range(4):
            assert abs(probs[s] - recs[s].prob) < 1e-12
            assert np.abs(gammas[s] - recs[s].gamma).max() < 1e-10

    def test_conditional_cptp(self, steane):
        blk = BlockInput.iid(steane, random_channel(0.1, 17).gamma)
        probs, gammas, _ = block_conditionals(blk)
        for s in range(64):
            choi = gamma_to_choi(gammas[s])
            assert np.linalg.eigvalsh(choi).min() > -1e-9
            assert np.abs(gammas[s][0] - np.array([1, 0, 0, 0])).max() < 1e-9

    def test_channel_closure(self, steane):
        blk = BlockInput.iid(steane, random_channel(0.1, 21).gamma)
        probs, gammas, _ = block_conditionals(blk)
        avg = np.tensordot(probs, gammas, axes=([0], [0]))
        assert np.linalg.eigvalsh(gamma_to_choi(avg)).min() > -1e-9


class TestOracleEquivalence:
    @pytest.mark.parametrize("delta,seed", [(0.01, 3), (0.05, 4), (0.1, 5)])
    def test_extended_precision_match(self, steane, delta, seed):
        ch = random_channel(delta, seed)
        probs, gammas, corr = block_conditionals(
            BlockInput.iid(steane, ch.gamma), dtype=np.longdouble)
        recs = oracle_qec_round(steane, [ch] * 7)
        for s in range(64):
            assert abs(float(probs[s]) - recs[s].prob) < 1e-9
            assert np.abs(gammas[s] - recs[s].gamma).max() < 1e-9
            assert corr[s] == recs[s].correction

    def test_float64_matches_at_moderate_delta(self, steane):
        ch = random_channel(0.05, 6)
        probs, gammas, _ = block_conditionals(BlockInput.iid(steane, ch.gamma))
        recs = oracle_qec_round(steane, [ch] * 7)
        worst = max(np.abs(gammas[s] - recs[s].gamma).max() for s in range(64))
        assert worst < 1e-9

    def test_mixed_qubit_channels_match(self, steane):
        chans = [random_channel(0.08, 30 + q) for q in range(7)]
        gams = np.stack([c.gamma for c in chans])
        probs, gammas, _ = block_conditionals(BlockInput(steane, gams),
                                              dtype=np.longdouble)
        recs = oracle_qec_round(steane, chans)
        for s in range(64):
            assert abs(float(probs[s]) - recs[s].prob) < 1e-9
            assert np.abs(gammas[s] - recs[s].gamma).max() < 1e-9


class TestDecoderOptimality:
    def test_matches_ml_coset_decoding(self, steane):
        rng = np.random.default_rng(8)
        for _ in range(3):
            per_qubit = rng.dirichlet([40, 2, 1.5, 1], size=7)
            gams = np.stack([pauli_channel(*p).gamma for p in per_qubit])
            _, _, corr = block_conditionals(BlockInput(steane, gams))
            ml, masses = ml_coset_decoder(steane, per_qubit)
            # skip near-ties, where either answer is optimal
            sorted_masses = np.sort(masses, axis=1)
            clear = (sorted_masses[:, -1] - sorted_masses[:, -2]
                     > 1e-6 * sorted_masses[:, -1])
            assert (corr[clear] == ml[clear]).all()
            assert clear.sum() > 50


class TestSampling:
    def test_direct_frequencies_chi2(self, steane):
        blk = BlockInput.iid(steane, random_channel(0.3, 12).gamma)
        probs, _, _ = block_conditionals(blk)
        rng = np.random.default_rng(0)
        n = 100_000
        counts = np.zeros(64)
        records = [sample_syndrome(blk, rng) for _ in range(n)]
        for r in records:
            counts[r.s] += 1
            assert r.weight == 1.0
        keep = probs * n >= 10
        merged_obs = np.append(counts[keep], counts[~keep].sum())
        merged_exp = np.append(probs[keep] * n, probs[~keep].sum() * n)
        res = stats.chisquare(merged_obs, merged_exp)
        assert res.pvalue > 1e-4

    def test_uniform_importance_reproduces_probs(self, steane):
        blk = BlockInput.iid(steane, random_channel(0.3, 13).gamma)
        probs, _, _ = block_conditionals(blk)
        q = np.full(64, 1 / 64)
        rng = np.random.default_rng(1)
        n = 20_000
        acc = np.zeros(64)
        for _ in range(n):
            r = sample_syndrome(blk, rng, q_probs=q)
            acc[r.s] += r.weight
        est = acc / n
        sigma = np.sqrt(probs * 64 / n) + 1e-9  # indicator variance bound
        assert (np.abs(est - probs) < 4 * sigma + 1e-3).all()

    def test_degenerate_distribution(self, steane):
        blk = BlockInput.iid(steane, identity_channel().gamma)
        rng = np.random.default_rng(2)
        for _ in range(10):
            r = sample_syndrome(blk, rng)
            assert r.s == 0 and r.weight == 1.0
        q = np.full(64, 1 / 64)
        r = sample_syndrome(blk, rng, q_probs=q)
        if r.s == 0:
            assert abs(r.weight - 64.0) < 1e-9
        else:
            assert r.weight == 0.0

    def test_unsupported_importance_rejected(self, steane):
        blk = BlockInput.iid(steane, random_channel(0.3, 14).gamma)
        q = np.zeros(64)
        q[0] = 1.0
        with pytest.raises(ValueError, match="support"):
            sample_syndrome(blk, np.random.default_rng(0), q_probs=q)


class TestBatch:
    def test_batch_matches_single(self, steane):
        gams = np.stack([np.broadcast_to(random_channel(0.08, s).gamma, (7, 4, 4))
                         for s in range(5)])
        pb, gb, cb = block_conditionals_batch(steane, gams)
        for i in range(5):
            p, g, c = block_conditionals(BlockInput(steane, gams[i]))
            assert np.abs(pb[i] - p).max() < 1e-12
            assert np.abs(gb[i] - g).max() < 1e-10
            assert (cb[i] == c).all()

    def test_batch_repeatable(self, steane):
        gams = np.stack([np.broadcast_to(random_channel(0.08, s).gamma, (7, 4, 4))
                         for s in range(40)])
        out1 = block_conditionals_batch(steane, gams)
        out2 = block_conditionals_batch(steane, gams)
        assert np.array_equal(out1[0], out2[0])
        assert np.array_equal(out1[1], out2[1])
