"""Pilot plan and LMMSE closed forms."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ariscf.channel import compute_stats
from ariscf.estimation import (
    assign_pilots,
    compute_estimation_stats,
    estimate_channels,
    lmmse_coefficient,
    nmse,
)
from ariscf.oracle import simulate_pilot_phase
from ariscf.ris import RisState
from ariscf.scenario import Scenario

from _instances import cascade_instance, synthetic_realization


class TestPilotPlan:
    def test_round_robin_cosets(self):
        plan = assign_pilots(4, 2)
        assert list(plan.coset(0)) == [0, 2]
        assert list(plan.coset(1)) == [1, 3]
        assert all(k in plan.coset(k) for k in range(4))

    def test_full_pilots_no_contamination(self):
        plan = assign_pilots(15, 15)
        assert all(plan.coset(k).size == 1 for k in range(15))

    def test_cosets_partition_users(self):
        plan = assign_pilots(7, 3)
        seen = np.concatenate([plan.coset(p) for p in range(3)])
        assert sorted(seen) == list(range(7))

    @pytest.mark.parametrize("basis", ["canonical", "dft"])
    def test_pilot_orthonormality(self, basis):
        plan = assign_pilots(5, 4, basis=basis)
        gram = np.conj(plan.pilot_matrix).T @ plan.pilot_matrix
        assert_allclose(gram, np.eye(4), atol=1e-12)


class TestLmmseCoefficient:
    def test_equal_signal_and_noise_gives_half(self):
        # singleton coset, a = 0, rho*tau_p*beta == sigma2 -> c = 1/2
        sc = Scenario(M=1, K=1, N_H=1, N_V=1, tau_p=1, rho=1.0, sigma2=1e-8,
                      sigma2_bar=1e-11)
        rl = synthetic_realization(sc, beta=np.array([[1e-8]]),
                                   alpha=np.array([1e-9]), alpha_bar=np.array([1e-9]))
        stats = compute_stats(rl, RisState(phases=np.zeros(1), a=0.0))
        plan = assign_pilots(1, 1)
        assert lmmse_coefficient(sc, stats, plan, 0, 0) == pytest.approx(0.5, rel=1e-12)
        assert nmse(compute_estimation_stats(sc, stats, plan), 0, 0) == pytest.approx(0.5)

    def test_high_power_limits(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        state = RisState(phases=phases, a=2.0)
        for rho in (1e2, 1e4):
            sc2 = Scenario(**{**{f: getattr(sc, f) for f in (
                "M", "K", "N_H", "N_V", "tau_p", "rho_u", "sigma2", "sigma2_bar", "a_max")},
                "rho": rho})
            stats = compute_stats(rl, state)
            est = compute_estimation_stats(sc2, stats, assign_pilots(2, 1))
            floor = stats.kappa[0, 0] / stats.kappa[0, :].sum()
            assert est.c[0, 0] < floor
        # contaminated c approaches kappa_k / sum(coset kappa) from below
        assert est.c[0, 0] == pytest.approx(floor, rel=1e-3)
        # singleton coset approaches 1
        est1 = compute_estimation_stats(sc2, stats, assign_pilots(2, 2))
        assert est1.c[0, 0] == pytest.approx(1.0, rel=1e-3)
        assert est1.nmse[0, 0] < 1e-3

    def test_independent_transcription(self):
        # c = E{y* q} / E{|y|^2} transcribed from scratch with plain python
        sc, rl, phases = cascade_instance(tau_p=1)
        state = RisState(phases=phases, a=2.0)
        stats = compute_stats(rl, state)
        est = compute_estimation_stats(sc, stats, assign_pilots(2, 1))
        m, k = 0, 0
        area = sc.d_H * sc.d_V
        t1 = 0.0
        for i in range(sc.N):
            for j in range(sc.N):
                t1 += (np.exp(1j * (phases[i] - phases[j])) * rl.R[i, j] * rl.R[j, i]).real
        kap = [rl.beta[m, kk] + 4.0 * rl.alpha[m] * rl.alpha_bar[kk] * area ** 2 * t1
               for kk in range(sc.K)]
        rt = sc.rho * sc.tau_p
        pilot_noise = sc.sigma2_bar * 4.0 * rl.alpha[m] * area * sc.N + sc.sigma2
        c_expected = rt * kap[k] / (rt * (kap[0] + kap[1]) + pilot_noise)
        assert est.c[m, k] == pytest.approx(c_expected, rel=1e-10)

    def test_invariant_ranges_and_decomposition(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        stats = compute_stats(rl, RisState(phases=phases, a=2.0))
        est = compute_estimation_stats(sc, stats, assign_pilots(2, 1))
        assert ((est.c > 0) & (est.c < 1)).all()
        assert_allclose(est.gamma, stats.kappa * est.c, rtol=1e-12)
        assert_allclose(est.nmse, 1.0 - est.c, rtol=1e-12)
        # kappa = gamma + error variance, exactly in closed form
        assert_allclose(stats.kappa, est.gamma + (stats.kappa - est.gamma), rtol=1e-15)

    def test_nmse_decreasing_in_rho_with_floor(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        state = RisState(phases=phases, a=2.0)
        stats = compute_stats(rl, state)
        plan = assign_pilots(2, 1)
        rhos = np.logspace(-6, 4, 24)
        vals = []
        for rho in rhos:
            sc2 = Scenario(M=2, K=2, N_H=2, N_V=2, tau_p=1, rho=float(rho),
                           rho_u=sc.rho_u, sigma2=sc.sigma2, sigma2_bar=sc.sigma2_bar,
                           a_max=sc.a_max)
            vals.append(compute_estimation_stats(sc2, stats, plan).nmse[0, 0])
        assert all(v1 > v2 for v1, v2 in zip(vals, vals[1:]))
        floor = 1.0 - stats.kappa[0, 0] / stats.kappa[0, :].sum()
        assert vals[-1] == pytest.approx(floor, rel=1e-4)
        assert floor > 0

    def test_nmse_phase_rotation_invariant(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        plan = assign_pilots(2, 1)
        e1 = compute_estimation_stats(sc, compute_stats(rl, RisState(phases=phases, a=2.0)), plan)
        e2 = compute_estimation_stats(sc, compute_stats(rl, RisState(phases=phases + 0.77, a=2.0)), plan)
        assert_allclose(e1.nmse, e2.nmse, rtol=1e-12)


class TestEstimateChannels:
    def test_near_noiseless_recovery(self):
        # strong pilots, no sharing: qhat -> q up to the c < 1 shrinkage
        sc, rl, _ = cascade_instance(tau_p=2, rho=1e4)
        state = RisState(phases=np.zeros(sc.N), a=2.0)
        stats = compute_stats(rl, state)
        plan = assign_pilots(2, 2)
        est = compute_estimation_stats(sc, stats, plan)
        obs = simulate_pilot_phase(rl, state, plan, np.random.default_rng(0))
        q_hat, err = estimate_channels(obs, est)
        assert np.abs(err).max() / np.abs(obs.sample.q).min() < 1e-2
        assert_allclose(q_hat, est.c * obs.projections, rtol=1e-15)

    def test_estimate_statistics_match(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        state = RisState(phases=phases, a=2.0)
        stats = compute_stats(rl, state)
        plan = assign_pilots(2, 1)
        est = compute_estimation_stats(sc, stats, plan)
        rng = np.random.default_rng(4)
        n = 6000
        qh = np.empty((n, 2, 2), dtype=complex)
        ee = np.empty((n, 2, 2), dtype=complex)
        for t in range(n):
            obs = simulate_pilot_phase(rl, state, plan, rng)
            qh[t], ee[t] = estimate_channels(obs, est)
        assert_allclose(np.mean(np.abs(qh) ** 2, axis=0), est.gamma, rtol=0.08)
        assert_allclose(np.mean(np.abs(ee) ** 2, axis=0), stats.kappa - est.gamma, rtol=0.08)
        corr = np.abs(np.mean(np.conj(qh[:, 0, 0]) * ee[:, 0, 0]))
        corr /= np.sqrt(np.mean(np.abs(qh[:, 0, 0]) ** 2) * np.mean(np.abs(ee[:, 0, 0]) ** 2))
        assert corr < 4 / np.sqrt(n)

    def test_dft_basis_equivalent_statistics(self):
        sc, rl, phases = cascade_instance(tau_p=1)
        state = RisState(phases=phases, a=2.0)
        stats = compute_stats(rl, state)
        for basis in ("canonical", "dft"):
            plan = assign_pilots(2, 1, basis=basis)
            est = compute_estimation_stats(sc, stats, plan)
            obs = simulate_pilot_phase(rl, state, plan, np.random.default_rng(9))
            # shared pilot: projection contains the coset sum for either basis
            coset_sum = obs.sample.q.sum(axis=1)
            noise = obs.projections[:, 0] - coset_sum
            assert np.abs(noise).max() < np.abs(coset_sum).max() * 0.3
