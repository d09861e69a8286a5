import numpy as np
import pytest

from steanesim.channels import (depolarizing, identity_channel, pauli_channel,
                                random_channel, rotation, gamma_to_choi)
from steanesim.metrics import (MetricKind, choi_norm_distance, diamond_distance,
                               diamond_lower_bound, evaluate_metric, get_metric,
                               infidelity, worst_case_error)

from oracles import dnorm_direct_max, wce_sdp

ALL_METRICS = [m.value for m in MetricKind]


class TestInfidelity:
    def test_identity(self):
        assert infidelity(identity_channel()) == 0.0

    def test_depolarizing(self):
        assert abs(infidelity(depolarizing(0.2)) - 0.15) < 1e-14

    def test_rotation_vs_choi_overlap(self):
        # infidelity = 1 - <Phi+| J |Phi+>, evaluated densely
        th = 0.9
        ch = rotation(th)
        phi = np.zeros(4, dtype=complex)
        phi[0] = phi[3] = 2 ** -0.5
        dense = 1 - float(np.real(phi.conj() @ ch.choi @ phi))
        assert abs(infidelity(ch) - dense) < 1e-13
        assert abs(infidelity(ch) - np.sin(th / 2) ** 2) < 1e-13

    def test_vectorized(self):
        gams = np.stack([depolarizing(p).gamma for p in (0.0, 0.1, 0.4)])
        vals = evaluate_metric("infidelity", gams)
        assert np.allclose(vals, [0.0, 0.075, 0.3])


class TestChoiNorms:
    def test_identity_zero(self):
        assert choi_norm_distance(identity_channel(), 1) == 0.0
        assert choi_norm_distance(identity_channel(), 2) == 0.0

    def test_depolarizing_closed_form(self):
        # J - J_id has eigenvalues (-3p/4, p/4, p/4, p/4)
        p = 0.13
        assert abs(choi_norm_distance(depolarizing(p), 1) - 1.5 * p) < 1e-12
        assert abs(choi_norm_distance(depolarizing(p), 2) - np.sqrt(0.75) * p) < 1e-12

    def test_order2_below_order1(self):
        for seed in range(20):
            ch = random_channel(0.2, seed)
            assert choi_norm_distance(ch, 2) <= choi_norm_distance(ch, 1) + 1e-12

    def test_bad_order(self):
        with pytest.raises(ValueError):
            choi_norm_distance(identity_channel(), 3)


class TestWorstCaseError:
    def test_identity(self):
        assert worst_case_error(identity_channel()) == 0.0

    def test_pauli_channels(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            p = rng.dirichlet([6, 1, 1, 1])
            ch = pauli_channel(*p)
            assert abs(worst_case_error(ch) - (1 - p[0])) < 1e-8

    def test_unitary_saturates(self):
        assert abs(worst_case_error(rotation(0.4)) - 1.0) < 1e-12

    def test_monotone_feasibility(self):
        # min eigenvalue of J - (1-x) J_id is nondecreasing in x
        from steanesim.metrics import _CHOI_ID
        for seed in range(100):
            choi = gamma_to_choi(random_channel(0.15, seed).gamma)
            xs = np.linspace(0, 1, 21)
            eigs = [np.linalg.eigvalsh(choi - (1 - x) * _CHOI_ID).min() for x in xs]
            assert all(b >= a - 1e-12 for a, b in zip(eigs, eigs[1:]))

    def test_against_sdp_oracle(self):
        for seed in range(20):
            ch = random_channel(0.2, seed)
            assert abs(worst_case_error(ch) - wce_sdp(ch)) < 1e-6

    def test_flag_for_non_cp(self):
        bad = np.diag([1.0, 1.2, 1.2, 1.2])
        val, flagged = worst_case_error(bad, return_flag=True)
        assert val == 1.0 and flagged


class TestDiamondDistance:
    def test_identity_zero(self):
        assert abs(diamond_distance(identity_channel())) < 1e-8

    def test_depolarizing(self):
        assert abs(diamond_distance(depolarizing(0.1)) - 0.075) < 1e-7

    def test_pauli_equals_wce(self):
        ch = pauli_channel(0.85, 0.1, 0.03, 0.02)
        assert abs(diamond_distance(ch) - 0.15) < 1e-7

    def test_rotation_closed_form(self):
        for th in (0.2, 0.8):
            assert abs(diamond_distance(rotation(th)) - np.sin(th / 2)) < 1e-7

    def test_against_direct_maximization(self):
        for seed in range(12):
            ch = random_channel(0.15, seed)
            sdp = diamond_distance(ch)
            direct = dnorm_direct_max(ch, seed=seed)
            assert abs(sdp - direct) < 1e-5

    def test_lower_bound_property(self):
        rng = np.random.default_rng(9)
        for seed in range(10):
            ch = random_channel(0.2, seed)
            d = diamond_distance(ch)
            for _ in range(5):
                psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
                assert d >= diamond_lower_bound(ch, psi) - 1e-7


class TestFamilyMonotonicity:
    def test_all_metrics_monotone_in_depolarizing_strength(self):
        grid = np.arange(0.0, 0.31, 0.01)
        for kind in ALL_METRICS:
            fn = get_metric(kind)
            vals = [fn(depolarizing(p)) for p in grid]
            assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:])), kind

    def test_identity_zero_for_all(self):
        for kind in ALL_METRICS:
            assert abs(get_metric(kind)(identity_channel())) < 1e-8
