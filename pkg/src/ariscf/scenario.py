"""Network scenario: static parameters, geometry, large-scale gains, RIS spatial correlation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
import yaml

SPEED_OF_LIGHT = 299_792_458.0

# Fields holding powers in watts; the config loader also accepts "<name>_dbm".
POWER_FIELDS = ("rho", "rho_u", "sigma2", "sigma2_bar", "P_aris", "P_c", "P_dc", "P0")

# Minimum link distance in meters; the path-loss model diverges as d -> 0.
MIN_DISTANCE = 1.0


def dbm_to_watt(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0) * 1e-3


def _default_wavelength() -> float:
    return SPEED_OF_LIGHT / 1.9e9


@dataclass(frozen=True)
class Scenario:
    """Static system parameters, SI units throughout.

    Defaults follow the reference urban deployment: 500 m disc, 1.9 GHz
    carrier, -80 dBm noise, quarter-wavelength RIS elements.
    """

    M: int = 20                     # access points (single antenna)
    K: int = 15                     # users (single antenna)
    N_H: int = 8                    # RIS elements per row
    N_V: int = 8                    # RIS elements per column
    d_H: float | None = None        # element width (m), default wavelength/4
    d_V: float | None = None        # element height (m), default wavelength/4
    wavelength: float = _default_wavelength()
    radius: float = 500.0           # deployment disc radius (m)
    rho: float = 0.1                # pilot transmit power (W)
    rho_u: float = 0.1              # uplink data power (W)
    tau_p: int = 15                 # pilot length (symbols)
    tau_c: int = 200                # coherence interval (symbols)
    sigma2: float = dbm_to_watt(-80.0)       # AP noise power (W)
    sigma2_bar: float = dbm_to_watt(-80.0)   # RIS element noise power (W)
    beta_exp: float = 4.0           # AP-user path-loss exponent
    alpha1_exp: float = 2.5         # AP-RIS path-loss exponent
    alpha2_exp: float = 2.5         # RIS-user path-loss exponent
    P_aris: float = 1.0             # active-RIS power budget (W), 30 dBm
    P_c: float = dbm_to_watt(-10.0)          # per-element circuit power (W)
    P_dc: float = dbm_to_watt(-5.0)          # per-element DC bias power (W)
    xi: float = 0.8                 # amplifier efficiency
    a_max: float = 10.0             # maximum amplitude gain
    zeta: float = 0.3               # user PA efficiency
    P0: float = 0.825               # fixed backhaul power per AP (W)
    Pbt: float = 0.25e-9            # traffic-dependent backhaul power (W per bit/s)
    B: float = 20e6                 # system bandwidth (Hz)
    grid_indexing: str = "paper"    # "paper" | "row_major", see build_correlation_matrix

    def __post_init__(self):
        if self.d_H is None:
            object.__setattr__(self, "d_H", self.wavelength / 4.0)
        if self.d_V is None:
            object.__setattr__(self, "d_V", self.wavelength / 4.0)
        self.validate()

    @property
    def N(self) -> int:
        return self.N_H * self.N_V

    @property
    def element_area(self) -> float:
        return self.d_H * self.d_V

    def validate(self) -> None:
        if self.M < 1 or self.K < 1 or self.N_H < 1 or self.N_V < 1:
            raise ValueError("M, K, N_H, N_V must all be >= 1")
        if self.tau_p < 1 or self.tau_p > self.tau_c:
            raise ValueError("need 1 <= tau_p <= tau_c")
        for name in POWER_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 < self.xi <= 1:
            raise ValueError("xi must be in (0, 1]")
        if not 0 < self.zeta <= 1:
            raise ValueError("zeta must be in (0, 1]")
        if self.a_max < 1:
            raise ValueError("a_max must be >= 1")
        for name in ("d_H", "d_V", "wavelength", "radius", "B"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.grid_indexing not in ("paper", "row_major"):
            raise ValueError("grid_indexing must be 'paper' or 'row_major'")

    def config_hash(self) -> str:
        """SHA-256 of the fully resolved parameter set (stable key order)."""
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


def load_scenario(path: str) -> Scenario:
    """Load a Scenario from a flat key-value YAML file.

    Keys match Scenario field names. Power fields may instead be given in dBm
    with an `_dbm` suffix (converted on load). `carrier_frequency` (Hz) is
    accepted as an alternative to `wavelength`.
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValueError(f"config {path!r} must be a flat key-value mapping")
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> Scenario:
    int_fields = {f.name for f in fields(Scenario) if f.type == "int"}
    known = {f.name for f in fields(Scenario)}
    kwargs = {}
    for key, value in raw.items():
        if key == "carrier_frequency":
            kwargs["wavelength"] = SPEED_OF_LIGHT / float(value)
        elif key.endswith("_dbm") and key[:-4] in POWER_FIELDS:
            kwargs[key[:-4]] = dbm_to_watt(float(value))
        elif key in int_fields:
            kwargs[key] = int(value)
        elif key == "grid_indexing":
            kwargs[key] = str(value)
        elif key in known:
            # YAML 1.1 reads exponents like 1.0e6 as strings; coerce
            kwargs[key] = float(value)
        else:
            raise ValueError(f"unknown config key: {key!r}")
    return Scenario(**kwargs)


def with_params(scenario: Scenario, **overrides) -> Scenario:
    """Return a copy of `scenario` with the given fields replaced."""
    return replace(scenario, **overrides)


def element_positions(N_H: int, N_V: int, d_H: float, d_V: float,
                      indexing: str = "paper") -> np.ndarray:
    """3-D positions of the RIS elements, one row per element.

    "paper" enumerates horizontal offsets mod N_H and vertical offsets by
    floor division with N_V; for N_H != N_V this is not a plain row-major
    grid walk (it can revisit positions). "row_major" divides by N_H instead
    and always fills the N_H x N_V grid.
    """
    idx = np.arange(N_H * N_V)
    if indexing == "paper":
        horiz = np.mod(idx, N_H) * d_H
        vert = (idx // N_V) * d_V
    elif indexing == "row_major":
        horiz = np.mod(idx, N_H) * d_H
        vert = (idx // N_H) * d_V
    else:
        raise ValueError("indexing must be 'paper' or 'row_major'")
    return np.column_stack([np.zeros_like(horiz), horiz, vert])


def build_correlation_matrix(N_H: int, N_V: int, d_H: float, d_V: float,
                             wavelength: float, indexing: str = "paper") -> np.ndarray:
    """Base spatial correlation of the RIS: [R]_(n1,n2) = sinc(2 ||u_n1 - u_n2|| / wavelength)."""
    pos = element_positions(N_H, N_V, d_H, d_V, indexing)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=-1))
    return np.sinc(2.0 * dist / wavelength)


def large_scale_gain(distance_m: float, exponent: float) -> float:
    """Power-law gain 1e-3 * d^(-exponent); distances below 1 m are clamped."""
    d = np.maximum(distance_m, MIN_DISTANCE)
    return 1e-3 * d ** (-exponent)


def psd_factor(cov: np.ndarray) -> np.ndarray:
    """Factor F with F F^H == cov after clipping negative eigenvalues to zero.

    Eigendecomposition rather than Cholesky: the sinc kernel is PSD only up
    to numerical noise and may be singular.
    """
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class NetworkRealization:
    """One draw of the network geometry and its large-scale quantities."""

    scenario: Scenario
    ap_positions: np.ndarray      # (M, 2)
    user_positions: np.ndarray    # (K, 2)
    ris_position: np.ndarray      # (2,)
    beta: np.ndarray              # (M, K) AP-user gains
    alpha: np.ndarray             # (M,)   AP-RIS gains
    alpha_bar: np.ndarray         # (K,)   RIS-user gains
    R: np.ndarray                 # (N, N) base correlation matrix
    R_factor: np.ndarray          # (N, N) PSD-repaired factor of R

    def R_m(self, m: int) -> np.ndarray:
        return self.alpha[m] * self.scenario.element_area * self.R

    def R_bar_k(self, k: int) -> np.ndarray:
        return self.alpha_bar[k] * self.scenario.element_area * self.R


def sample_layout(scenario: Scenario, rng_seed: int) -> NetworkRealization:
    """Drop APs equispaced on the disc diameter, the RIS at one diameter
    endpoint, and users uniformly inside the disc; derive all large-scale
    quantities. Deterministic in `rng_seed`."""
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    r = scenario.radius
    m_idx = np.arange(scenario.M)
    ap_positions = np.column_stack([-r + (2 * m_idx + 1) * r / scenario.M,
                                    np.zeros(scenario.M)])
    ris_position = np.array([r, 0.0])

    u = rng.uniform(size=scenario.K)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=scenario.K)
    user_positions = np.column_stack([r * np.sqrt(u) * np.cos(phi),
                                      r * np.sqrt(u) * np.sin(phi)])

    d_mk = np.linalg.norm(ap_positions[:, None, :] - user_positions[None, :, :], axis=-1)
    d_m = np.linalg.norm(ap_positions - ris_position, axis=-1)
    d_k = np.linalg.norm(user_positions - ris_position, axis=-1)

    beta = large_scale_gain(d_mk, scenario.beta_exp)
    alpha = large_scale_gain(d_m, scenario.alpha1_exp)
    alpha_bar = large_scale_gain(d_k, scenario.alpha2_exp)

    R = build_correlation_matrix(scenario.N_H, scenario.N_V, scenario.d_H,
                                 scenario.d_V, scenario.wavelength,
                                 scenario.grid_indexing)
    return NetworkRealization(
        scenario=scenario,
        ap_positions=ap_positions,
        user_positions=user_positions,
        ris_position=ris_position,
        beta=beta,
        alpha=alpha,
        alpha_bar=alpha_bar,
        R=R,
        R_factor=psd_factor(R),
    )
