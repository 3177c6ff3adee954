import numpy as np
import pytest
from scipy import integrate

from dmrate.channel import (
    ChannelModel,
    DiscretizedDistribution,
    ProtocolParams,
    discretization_distribution,
    ec_cost,
    effective_excess_noise,
    pdf_outcome,
    simulate_statistics,
    simulated_conditional_state,
    untrusted_statistics,
)
from dmrate.detector import DetectorModel
from dmrate.observables import moment_observables

DET = DetectorModel.simple(0.719, 0.01)


class TestChannelModel:
    def test_distance_conversion(self):
        ch = ChannelModel.from_distance(10.0, 0.01)
        assert ch.eta_t == pytest.approx(10 ** (-0.2))

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelModel(eta_t=0.0, xi=0.01)
        with pytest.raises(ValueError):
            ChannelModel(eta_t=0.5, xi=-0.01)
        with pytest.raises(ValueError):
            ChannelModel.from_distance(-5.0, 0.01)


class TestProtocolParams:
    def test_signal_constellation(self):
        pp = ProtocolParams(alpha=0.75)
        assert pp.signal(0) == pytest.approx(0.75)
        assert pp.signal(1) == pytest.approx(0.75j)
        assert pp.signal(2) == pytest.approx(-0.75)
        assert sum(pp.PRIORS) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            ProtocolParams(alpha=0.0)
        with pytest.raises(ValueError):
            ProtocolParams(alpha=0.5, beta=0.0)
        with pytest.raises(ValueError):
            ProtocolParams(alpha=0.5, delta_a=-1.0)


class TestSimulatedStatistics:
    def test_noiseless_limit(self):
        ch = ChannelModel(eta_t=1.0, xi=0.0)
        stats = simulate_statistics(ch, DetectorModel.ideal(), ProtocolParams(alpha=0.75))
        assert stats.sq[0] == pytest.approx(2 * 0.75**2 + 1)
        assert stats.fq[0] == pytest.approx(np.sqrt(2) * 0.75)

    def test_first_moment_value(self):
        ch = ChannelModel.from_distance(10.0, 0.01)
        stats = simulate_statistics(ch, DET, ProtocolParams(alpha=0.75))
        assert stats.fq[0] == pytest.approx(np.sqrt(2 * 0.719 * 10**-0.2) * 0.75)

    def test_constellation_symmetry(self):
        ch = ChannelModel.from_distance(25.0, 0.02)
        pp = ProtocolParams(alpha=0.8)
        stats = simulate_statistics(ch, DET, pp)
        target = 2 * 0.719 * ch.eta_t * 0.8**2
        for x in range(4):
            assert stats.fq[x] ** 2 + stats.fp[x] ** 2 == pytest.approx(target)

    def test_consistency_bridge(self):
        # Truncated-operator traces against the analytic statistics at N=20.
        ch = ChannelModel.from_distance(10.0, 0.01)
        pp = ProtocolParams(alpha=0.75, cutoff=20)
        stats = simulate_statistics(ch, DET, pp)
        obs = moment_observables(DET, 20)
        for x in range(4):
            sigma = simulated_conditional_state(ch, x, pp, 20)
            assert np.trace(sigma @ obs.fq.entries).real == pytest.approx(stats.fq[x], abs=1e-6)
            assert np.trace(sigma @ obs.fp.entries).real == pytest.approx(stats.fp[x], abs=1e-6)
            assert np.trace(sigma @ obs.sq.entries).real == pytest.approx(stats.sq[x], abs=1e-6)
            assert np.trace(sigma @ obs.sp.entries).real == pytest.approx(stats.sp[x], abs=1e-6)

    def test_general_detector_path(self):
        det = DetectorModel(0.7, 0.7 - 1e-9, 0.02, 0.02)
        ch = ChannelModel(eta_t=0.9, xi=0.01)
        pp = ProtocolParams(alpha=0.5, cutoff=8)
        got = simulate_statistics(ch, det, pp)
        ref = simulate_statistics(ch, DetectorModel.simple(0.7, 0.02), pp)
        for x in range(4):
            assert got.fq[x] == pytest.approx(ref.fq[x], abs=2e-4)
            assert got.sq[x] == pytest.approx(ref.sq[x], abs=2e-4)

    def test_untrusted_inversion(self):
        ch = ChannelModel.from_distance(15.0, 0.015)
        pp = ProtocolParams(alpha=0.7)
        stats = simulate_statistics(ch, DET, pp)
        eff = untrusted_statistics(stats)
        eta = 0.719 * ch.eta_t
        for x in range(4):
            assert eff["q"][x] == stats.fq[x]
            assert eff["n"][x] == pytest.approx(eta * 0.49 + 0.5 * eta * 0.015 + 0.01)
        assert eff["d"][0] == pytest.approx(2 * eta * 0.49)
        assert eff["d"][1] == pytest.approx(-2 * eta * 0.49)


class TestPdfOutcome:
    CH = ChannelModel.from_distance(20.0, 0.01)
    PP = ProtocolParams(alpha=0.75)

    def test_peak_value(self):
        s = 1 + 0.5 * 0.719 * self.CH.eta_t * 0.01 + 0.01
        c = np.sqrt(0.719 * self.CH.eta_t) * 0.75
        assert pdf_outcome(c, 0, self.CH, DET, self.PP) == pytest.approx(1 / (np.pi * s))

    def test_normalized(self):
        val, _ = integrate.dblquad(
            lambda p, q: pdf_outcome(q + 1j * p, 1, self.CH, DET, self.PP),
            -8, 8, -8, 8, epsabs=1e-10,
        )
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_husimi_limit(self):
        # Ideal detector, xi = 0: the Q function of the attenuated coherent state.
        ch = ChannelModel(eta_t=0.6, xi=0.0)
        det = DetectorModel.ideal()
        pp = ProtocolParams(alpha=0.9)
        y = 0.3 - 0.1j
        expect = np.exp(-abs(y - np.sqrt(0.6) * 0.9) ** 2) / np.pi
        assert pdf_outcome(y, 0, ch, det, pp) == pytest.approx(expect, rel=1e-12)


class TestDiscretization:
    CH = ChannelModel.from_distance(20.0, 0.01)

    def test_no_postselection_partition(self):
        dd = discretization_distribution(self.CH, DET, ProtocolParams(alpha=0.75))
        assert dd.conditional.sum(axis=1) == pytest.approx(np.ones(4), abs=1e-9)
        assert dd.p_pass == pytest.approx(1.0, abs=1e-9)

    def test_rotational_symmetry(self):
        dd = discretization_distribution(self.CH, DET, ProtocolParams(alpha=0.7, delta_a=0.4))
        for x in range(4):
            for z in range(4):
                assert dd.conditional[x, z] == pytest.approx(
                    dd.conditional[(x + 1) % 4, (z + 1) % 4], abs=1e-10
                )

    def test_strong_signal_limit(self):
        ch = ChannelModel(eta_t=1.0, xi=0.0)
        dd = discretization_distribution(ch, DetectorModel.ideal(), ProtocolParams(alpha=6.0))
        assert np.all(np.diag(dd.conditional) > 1 - 1e-6)

    def test_p_pass_monotone_in_radius(self):
        vals = []
        for da in (0.0, 0.3, 0.6, 0.9, 1.2):
            dd = discretization_distribution(self.CH, DET, ProtocolParams(alpha=0.75, delta_a=da))
            vals.append(dd.p_pass)
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_against_raw_2d_quadrature(self):
        pp = ProtocolParams(alpha=0.75, delta_a=0.5)
        dd = discretization_distribution(self.CH, DET, pp)
        for (x, z) in [(0, 0), (0, 1), (2, 0)]:
            ref, _ = integrate.dblquad(
                lambda r, th: pdf_outcome(r * np.exp(1j * th), x, self.CH, DET, pp) * r,
                (2 * z - 1) * np.pi / 4,
                (2 * z + 1) * np.pi / 4,
                pp.delta_a,
                10.0,
                epsabs=1e-11,
            )
            assert dd.conditional[x, z] == pytest.approx(ref, abs=1e-9)


class TestEcCost:
    def test_perfect_correlation(self):
        joint = np.eye(4) / 4
        dd = DiscretizedDistribution(ptilde=joint, p_pass=1.0, conditional=joint * 4)
        delta, p_pass, h_z, mi = ec_cost(dd, 1.0)
        assert h_z == pytest.approx(2.0)
        assert mi == pytest.approx(2.0)
        assert delta == pytest.approx(0.0, abs=1e-12)

    def test_independent_uniform(self):
        joint = np.full((4, 4), 1 / 16)
        dd = DiscretizedDistribution(ptilde=joint, p_pass=1.0, conditional=joint * 4)
        delta, _, h_z, mi = ec_cost(dd, 0.95)
        assert mi == pytest.approx(0.0, abs=1e-12)
        assert delta == pytest.approx(2.0)

    def test_mutual_information_bounds(self):
        dd = discretization_distribution(
            ChannelModel.from_distance(30.0, 0.02), DET, ProtocolParams(alpha=0.8, delta_a=0.5)
        )
        _, _, h_z, mi = ec_cost(dd, 0.95)
        assert 0.0 <= mi <= min(2.0, h_z) + 1e-12

    def test_against_brute_force_oracle(self):
        # Independent oracle: entropies from the raw 2-D quadrature masses.
        ch = ChannelModel.from_distance(20.0, 0.01)
        pp = ProtocolParams(alpha=0.75, delta_a=0.3)
        dd = discretization_distribution(ch, DET, pp)
        cond = np.zeros((4, 4))
        for x in range(4):
            for z in range(4):
                cond[x, z], _ = integrate.dblquad(
                    lambda r, th: pdf_outcome(r * np.exp(1j * th), x, ch, DET, pp) * r,
                    (2 * z - 1) * np.pi / 4,
                    (2 * z + 1) * np.pi / 4,
                    pp.delta_a,
                    10.0,
                    epsabs=1e-11,
                )
        joint = cond / 4
        p_pass = joint.sum()
        joint /= p_pass

        def ent(p):
            p = p[p > 0]
            return -np.sum(p * np.log2(p))

        h_z = ent(joint.sum(axis=0))
        mi = ent(joint.sum(axis=1)) + h_z - ent(joint.ravel())
        ref_delta = h_z - 0.95 * mi
        delta, got_pass, _, _ = ec_cost(dd, 0.95)
        assert delta == pytest.approx(ref_delta, abs=1e-6)
        assert got_pass == pytest.approx(p_pass, abs=1e-8)

    def test_degenerate_rejected(self):
        joint = np.zeros((4, 4))
        dd = DiscretizedDistribution(ptilde=joint, p_pass=0.0, conditional=joint)
        with pytest.raises(ValueError):
            ec_cost(dd, 0.95)


class TestEffectiveNoise:
    def test_reference_value(self):
        ch = ChannelModel.from_distance(20.0, 0.01)
        assert effective_excess_noise(ch, DET) == pytest.approx(0.045, abs=0.001)
