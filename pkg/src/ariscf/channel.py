"""Correlated fading realizations and the analytic channel moments used by every closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ris import RisState
from .scenario import NetworkRealization, psd_factor

# Analytic traces are real; anything beyond this relative imaginary residual
# indicates a transcription bug rather than round-off.
IMAG_TOL = 1e-9


def _real_trace(value: complex) -> float:
    if abs(value.imag) > IMAG_TOL * max(abs(value.real), 1e-300):
        raise FloatingPointError(f"trace has non-negligible imaginary part: {value!r}")
    return float(value.real)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_correlated_vector(covariance: np.ndarray, rng: np.random.Generator,
                             size: int | None = None) -> np.ndarray:
    """Zero-mean CN(0, covariance) draw(s) via the eigendecomposition factor."""
    factor = psd_factor(covariance)
    n = covariance.shape[0]
    shape = (n,) if size is None else (size, n)
    return complex_normal(rng, shape) @ factor.T


@dataclass(frozen=True)
class ChannelSample:
    """One small-scale fading realization for every link, plus RIS thermal noise."""

    h: np.ndarray        # (M, N) AP-RIS channels
    z: np.ndarray        # (K, N) RIS-user channels
    g: np.ndarray        # (M, K) direct channels
    q: np.ndarray        # (M, K) aggregated channels g + h^H Theta z
    v_pilot: np.ndarray  # (N, tau_p) RIS noise during the pilot phase
    v_data: np.ndarray   # (N,) RIS noise during one data symbol


def sample_channels(realization: NetworkRealization, ris_state: RisState,
                    rng: np.random.Generator) -> ChannelSample:
    sc = realization.scenario
    area = sc.element_area
    # R_m and R_bar_k are scalar multiples of the common R, so one factor serves all links.
    base = complex_normal(rng, (sc.M, sc.N)) @ realization.R_factor.T
    h = np.sqrt(realization.alpha * area)[:, None] * base
    base = complex_normal(rng, (sc.K, sc.N)) @ realization.R_factor.T
    z = np.sqrt(realization.alpha_bar * area)[:, None] * base
    g = np.sqrt(realization.beta) * complex_normal(rng, (sc.M, sc.K))
    q = g + ris_state.a * np.einsum("mn,n,kn->mk", np.conj(h), ris_state.phasor, z)
    v_pilot = np.sqrt(sc.sigma2_bar) * complex_normal(rng, (sc.N, sc.tau_p))
    v_data = np.sqrt(sc.sigma2_bar) * complex_normal(rng, (sc.N,))
    return ChannelSample(h=h, z=z, g=g, q=q, v_pilot=v_pilot, v_data=v_data)


@dataclass(frozen=True)
class SecondOrderStats:
    """Second-order quantities of the aggregated channels for one RIS state.

    Every Xi_{m,k} = a^2 Psi Rbar_k Psi^H R_m is a scalar multiple of the
    common matrix W = (P o R) R with P_{ij} = exp(j(psi_i - psi_j)), so only
    the shared traces t1 = tr(W), t2 = tr(W^2), t3 = tr((P o R) R^2) and the
    per-link scales are stored.
    """

    realization: NetworkRealization
    ris_state: RisState
    kappa: np.ndarray      # (M, K) aggregated channel power beta + tr(Xi)
    alpha_an: np.ndarray   # (M, K) active-noise cross moment E{|pbar* q|^2}
    xi_scale: np.ndarray   # (M, K) scale s with Xi_{m,k} = s * (P o R) R
    t1: float
    t2: float
    t3: float

    @property
    def M(self) -> int:
        return self.kappa.shape[0]

    @property
    def K(self) -> int:
        return self.kappa.shape[1]

    def tr_xi(self, m: int, k: int) -> float:
        return self.xi_scale[m, k] * self.t1

    def tr_xi_xi(self, m: int, k: int, m2: int, k2: int) -> float:
        return self.xi_scale[m, k] * self.xi_scale[m2, k2] * self.t2

    def xi(self, m: int, k: int) -> np.ndarray:
        """Dense Xi_{m,k}; intended for small-instance checks only."""
        rl = self.realization
        phasor = self.ris_state.phasor
        modulated = (phasor[:, None] * np.conj(phasor)[None, :]) * rl.R
        a2 = self.ris_state.a ** 2
        scale = a2 * rl.alpha[m] * rl.alpha_bar[k] * rl.scenario.element_area ** 2
        return scale * (modulated @ rl.R)


def compute_stats(realization: NetworkRealization, ris_state: RisState) -> SecondOrderStats:
    sc = realization.scenario
    area = sc.element_area
    a = ris_state.a

    phasor = ris_state.phasor
    modulated = (phasor[:, None] * np.conj(phasor)[None, :]) * realization.R
    W = modulated @ realization.R
    t1 = _real_trace(np.trace(W))
    t2 = _real_trace(np.sum(W * W.T))
    t3 = _real_trace(np.sum(modulated * (realization.R @ realization.R).T))

    xi_scale = (a * a * area * area) * np.outer(realization.alpha, realization.alpha_bar)
    kappa = realization.beta + xi_scale * t1

    # E{|pbar*_{m,k} q_{m,k}|^2}: direct term beta * sigma2_bar * tr(A^2 R_m)
    # plus the Wishart term sigma2_bar * tr(Theta Rbar_k Theta^H (R_m A^2 R_m + tr(A^2 R_m) R_m)).
    tr_rm = realization.alpha * area * sc.N
    wishart = (a ** 4) * (area ** 3) * np.outer(realization.alpha ** 2, realization.alpha_bar) * (t3 + sc.N * t1)
    alpha_an = sc.sigma2_bar * ((a * a) * realization.beta * tr_rm[:, None] + wishart)

    return SecondOrderStats(
        realization=realization,
        ris_state=ris_state,
        kappa=kappa,
        alpha_an=alpha_an,
        xi_scale=xi_scale,
        t1=t1,
        t2=t2,
        t3=t3,
    )


def active_noise_moment_main_text(stats: SecondOrderStats, m: int, k: int) -> float:
    """Alternative active-noise moment as printed in the main text (comparison only).

    N sigma2_bar a^2 beta tr(R_m) + N^2 sigma2_bar a^4 (tr(R_m^2) + tr(R_m)^2) tr(Rbar_k),
    reading the undefined Rbar_m of the printed expression as R_m. The
    appendix derivation (stats.alpha_an) is the form every oracle check uses.
    """
    rl = stats.realization
    sc = rl.scenario
    a = stats.ris_state.a
    R_m = rl.R_m(m)
    tr_rm = np.trace(R_m)
    tr_rm2 = np.trace(R_m @ R_m)
    tr_rbark = np.trace(rl.R_bar_k(k))
    return float(sc.N * sc.sigma2_bar * a ** 2 * rl.beta[m, k] * tr_rm
                 + sc.N ** 2 * sc.sigma2_bar * a ** 4 * (tr_rm2 + tr_rm ** 2) * tr_rbark)


def fourth_moment(stats: SecondOrderStats, m: int, k: int) -> float:
    """E{|q_{m,k}|^4} = 2 kappa^2 + 2 tr(Xi^2)."""
    return 2.0 * stats.kappa[m, k] ** 2 + 2.0 * stats.tr_xi_xi(m, k, m, k)


def cross_moments(stats: SecondOrderStats, m: int, m2: int, k: int, k2: int) -> float:
    """E{|q_{m,k} q*_{m2,k2}|^2} for distinct link pairs.

    kappa kappa' when both indices differ; kappa kappa' + tr(Xi Xi') when
    exactly one does. The identical pair is the fourth moment and is rejected.
    """
    if m == m2 and k == k2:
        raise ValueError("identical link pair: use fourth_moment")
    base = stats.kappa[m, k] * stats.kappa[m2, k2]
    if m != m2 and k != k2:
        return float(base)
    return float(base + stats.tr_xi_xi(m, k, m2, k2))


def cross_moment_cyclic(stats: SecondOrderStats, m: int, m2: int, k: int, k2: int) -> float:
    """E{q*_{m,k} q_{m,k2} q*_{m2,k2} q_{m2,k}} = tr(Xi_{m,k2} Xi_{m2,k}) for m != m2, k != k2."""
    if m == m2 or k == k2:
        raise ValueError("cyclic cross moment requires m != m2 and k != k2")
    return stats.tr_xi_xi(m, k2, m2, k)
