"""Entangled interferometer-network model.

Builds the 2d-mode Gaussian output state of d Mach-Zehnder sensors that share
one split squeezed-vacuum resource, and evaluates the moment matrices and the
error-propagation variance

    Delta^2(nu . theta) = nu^T C^{-1} Gamma (C^T)^{-1} nu

where C_ij = d<Q_i>/d(theta_j) and Gamma is the covariance of the measured
output quadratures.

Mode layout inside the engine: modes 0..d-1 carry the split squeezed vacuum
("b" modes, measured ports), modes d..2d-1 the coherent inputs ("a" modes).

Multipass: a K-pass interrogation with multipass coefficient mu amplifies the
variance denominator by mu*K**2, i.e. the measured signal amplitude by
g = sqrt(mu*K**2) (the signal gain).  The engine realizes this by driving the
interferometer rotation with phase g*theta_j.  At the default mu = 1/K the
enhancement equals the pass count.

Loss model: distribution loss eta_dis is applied to both inputs of each
sensor and eta_mzi * eta_m^(2K-1) to the measured output, which makes the
measured-port statistics exactly those of a single lumped transmission
eta = eta_dis * eta_mzi * eta_m^(2K-1) at any working point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import gaussian as g
from .errors import ConfigError, DarkResponseError, InfeasibleSplitError

__all__ = [
    "NetworkConfig",
    "MomentData",
    "qc_cascade",
    "build_network",
    "response_matrix",
    "noise_matrix",
    "moment_data",
    "sensitivity_numeric",
    "sensitivity_separable",
    "closed_form_variance",
    "sql_reference_config",
    "weight_pattern",
]

PROB_TOL = 1e-12
REMAINDER_FLOOR = 1e-15
DARK_THRESHOLD = 1e-12  # relative to max |C_jj|


@dataclass(frozen=True)
class NetworkConfig:
    """Immutable description of one sensor network.

    Fields:
        d: number of interferometers.
        K: multipass count (integer >= 1).
        mu: multipass coefficient; None means the default 1/K.
        r: squeezing strength of the shared resource (scalar), or a per-node
           tuple for the separable topology.
        alphas: d pairs (|alpha_j|, phi_j) of coherent amplitudes/phases.
        thetas: d working-point phases (radians).
        weights: weight vector nu of the estimated phase combination.
        P: splitting probabilities of the shared resource (sum to 1).
        eta_dis, eta_mzi, eta_m: efficiencies in (0, 1].
        topology: "entangled" or "separable".
    """

    d: int
    r: float | tuple = 0.0
    K: int = 1
    mu: float | None = None
    alphas: tuple = ()
    thetas: tuple = ()
    weights: tuple = ()
    P: tuple = ()
    eta_dis: float = 1.0
    eta_mzi: float = 1.0
    eta_m: float = 1.0
    topology: str = "entangled"

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(tuple(a) for a in self.alphas))
        for name in ("thetas", "weights", "P"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if isinstance(self.r, (list, tuple, np.ndarray)):
            object.__setattr__(self, "r", tuple(float(x) for x in self.r))
        if not self.thetas:
            object.__setattr__(self, "thetas", (0.0,) * self.d)
        self.validate()

    def validate(self):
        if self.d < 1:
            raise ConfigError("d", "need at least one interferometer")
        if self.K < 1 or int(self.K) != self.K:
            raise ConfigError("K", "multipass count must be an integer >= 1")
        if self.mu is not None and self.mu <= 0:
            raise ConfigError("mu", "multipass coefficient must be > 0")
        if self.topology not in ("entangled", "separable"):
            raise ConfigError("topology", f"unknown topology {self.topology!r}")
        rs = self.r if isinstance(self.r, tuple) else (self.r,)
        if isinstance(self.r, tuple) and self.topology == "entangled":
            raise ConfigError("r", "entangled topology uses one shared squeezer")
        if isinstance(self.r, tuple) and len(self.r) != self.d:
            raise ConfigError("r", f"need {self.d} per-node squeezing strengths")
        if any(x < 0 for x in rs):
            raise ConfigError("r", "squeezing strength must be >= 0")
        if len(self.alphas) != self.d:
            raise ConfigError("alphas", f"need {self.d} (magnitude, phase) pairs")
        if any(mag < 0 for mag, _ in self.alphas):
            raise ConfigError("alphas", "amplitudes must be >= 0")
        if len(self.thetas) != self.d:
            raise ConfigError("thetas", f"need {self.d} working-point phases")
        if len(self.weights) != self.d:
            raise ConfigError("weights", f"need {self.d} weights")
        if len(self.P) != self.d:
            raise ConfigError("P", f"need {self.d} splitting probabilities")
        if any(p < 0 for p in self.P):
            raise ConfigError("P", "splitting probabilities must be >= 0")
        if abs(sum(self.P) - 1.0) > PROB_TOL:
            raise ConfigError("P", f"probabilities sum to {sum(self.P)!r}, not 1")
        for name in ("eta_dis", "eta_mzi", "eta_m"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(name, f"must lie in (0, 1], got {value}")
        if self.enhancement <= 0:
            raise ConfigError("mu", "effective enhancement mu*K^2 must be > 0")

    # -- derived quantities -------------------------------------------------

    @property
    def mu_value(self) -> float:
        return self.mu if self.mu is not None else 1.0 / self.K

    @property
    def enhancement(self) -> float:
        """Effective multipass enhancement of the variance denominator."""
        return self.mu_value * self.K**2

    @property
    def signal_gain(self) -> float:
        """Amplitude gain of the measured phase signal, sqrt(mu*K^2)."""
        return math.sqrt(self.enhancement)

    @property
    def eta_total(self) -> float:
        return self.eta_dis * self.eta_mzi * self.eta_m ** (2 * self.K - 1)

    @property
    def Lambda(self) -> float:
        return 1.0 / self.eta_total - 1.0

    @property
    def n_c(self) -> float:
        return sum(mag**2 for mag, _ in self.alphas)

    @property
    def n_s(self) -> float:
        rs = self.r if isinstance(self.r, tuple) else (self.r,)
        return sum(math.sinh(x) ** 2 for x in rs)

    @property
    def n_T(self) -> float:
        return self.n_c + self.n_s

    def with_updates(self, **kwargs) -> "NetworkConfig":
        return replace(self, **kwargs)


@dataclass
class MomentData:
    """Response matrix C and noise matrix Gamma at one working point."""

    C: np.ndarray
    Gamma: np.ndarray
    thetas: tuple
    phis: tuple


def weight_pattern(name: str, d: int) -> tuple:
    """Named weight vectors: 'ave', 'single', 'stag', 'asym' (all 1/d scaled)."""
    if name == "ave":
        signs = [1.0] * d
    elif name == "single":
        return tuple([1.0] + [0.0] * (d - 1))
    elif name == "stag":
        signs = [(-1.0) ** j for j in range(d)]
    elif name == "asym":
        signs = [1.0 if j < d - d // 2 else -1.0 for j in range(d)]
    else:
        raise ConfigError("weights", f"unknown weight pattern {name!r}")
    return tuple(s / d for s in signs)


def qc_cascade(P) -> list:
    """Sequential peel decomposition of a 1-to-d splitting.

    For j = 2..d a beam splitter peels fraction R_j = P_j / (remaining mass)
    off the carrier; the pair ordering (peeled mode, carrier) keeps every
    single-photon amplitude positive, matching the all-positive multinomial
    splitting.  Returns [((mode_i, mode_j), transmissivity), ...] ready for
    apply_beam_splitter; the carrier is mode 0.

    The resulting single-photon output distribution equals P exactly.
    """
    P = [float(p) for p in P]
    if any(p < 0 for p in P):
        raise InfeasibleSplitError("probabilities must be >= 0")
    if abs(sum(P) - 1.0) > PROB_TOL:
        raise InfeasibleSplitError(f"probabilities sum to {sum(P)!r}, not 1")
    ops = []
    remaining = 1.0
    for j in range(1, len(P)):
        if remaining < REMAINDER_FLOOR:
            if P[j] > 0:
                raise InfeasibleSplitError(
                    f"no probability mass left for output {j} (P_j = {P[j]})"
                )
            reflectivity = 0.0
        else:
            reflectivity = min(max(P[j] / remaining, 0.0), 1.0)
        ops.append(((j, 0), 1.0 - reflectivity))
        remaining -= P[j]
    return ops


def _require_entangled(config: NetworkConfig):
    if config.topology != "entangled":
        raise ConfigError("topology", "this operation needs the entangled topology")


def build_network(config: NetworkConfig) -> g.GaussianState:
    """Assemble the network and return its 2d-mode output state.

    Pipeline: squeeze the carrier, split it over the d sensor inputs,
    distribute (loss eta_dis on both inputs of each sensor), displace the
    coherent inputs, interfere with phase g*theta_j, and apply the readout
    loss eta_mzi * eta_m^(2K-1) to each measured port.
    """
    _require_entangled(config)
    d = config.d
    state = g.vacuum_state(2 * d)
    state = g.apply_squeezer(state, 0, float(config.r))
    for (i, j), t in qc_cascade(config.P):
        state = g.apply_beam_splitter(state, i, j, t)
    gain = config.signal_gain
    eta_out = config.eta_mzi * config.eta_m ** (2 * config.K - 1)
    for j in range(d):
        mag, phi = config.alphas[j]
        state = g.apply_displacement(state, d + j, mag, phi)
        state = g.apply_loss(state, j, config.eta_dis)
        state = g.apply_loss(state, d + j, config.eta_dis)
        state = g.apply_mzi(state, d + j, j, gain * config.thetas[j])
        state = g.apply_loss(state, j, eta_out)
    return state


def response_matrix(config: NetworkConfig) -> np.ndarray:
    """Diagonal response C_jj = sqrt(eta) * g * |alpha_j| cos(phi_j) cos(g theta_j / 2).

    This is the exact derivative of the engine's measured means with respect
    to theta_j (cross-validated against finite differences in the tests).
    """
    _require_entangled(config)
    root_eta = math.sqrt(config.eta_total)
    gain = config.signal_gain
    c = np.zeros((config.d, config.d))
    for j in range(config.d):
        mag, phi = config.alphas[j]
        c[j, j] = (
            root_eta * gain * mag * math.cos(phi) * math.cos(gain * config.thetas[j] / 2.0)
        )
    return c


def noise_matrix(config: NetworkConfig) -> np.ndarray:
    """Covariance Gamma of the measured output quadratures, from the engine.

    Valid at any working point; at theta = 0 and phi in {0, pi} it equals
    eta sqrt(P_j P_k) (e^{-2r} - 1) + delta_jk.  Away from theta = 0 the
    loss contribution here is theta-independent (independent vacuum per loss
    channel); a single shared loss vacuum would add a sin(theta_j) term of
    convention-dependent sign, which only matters off the working point.
    """
    state = build_network(config)
    _, cov = g.homodyne_moments(state, list(range(config.d)), "q")
    return cov


def moment_data(config: NetworkConfig) -> MomentData:
    return MomentData(
        C=response_matrix(config),
        Gamma=noise_matrix(config),
        thetas=config.thetas,
        phis=tuple(phi for _, phi in config.alphas),
    )


def _active_channels(config, C, nu):
    """Indices used for inversion; zero-weight dark channels are dropped,
    weighted dark channels raise.  Darkness is judged against the theta = 0
    response magnitude so a fully dark channel is caught even when d = 1."""
    diag = np.abs(np.diag(C))
    full_response = (
        math.sqrt(config.eta_total)
        * config.signal_gain
        * max(mag for mag, _ in config.alphas)
    )
    scale = full_response if full_response > 0 else 1.0
    dark = diag <= DARK_THRESHOLD * scale
    weighted = np.abs(np.asarray(nu, dtype=float)) > 0
    bad = np.nonzero(dark & weighted)[0]
    if bad.size:
        raise DarkResponseError(bad.tolist())
    return np.nonzero(~dark)[0]


def sensitivity_numeric(config: NetworkConfig, nu=None) -> float:
    """Error-propagation variance nu^T C^{-1} Gamma (C^T)^{-1} nu (rad^2).

    Channels with zero weight and zero response are excluded from the
    inversion; a weighted channel without response raises DarkResponseError.
    """
    _require_entangled(config)
    nu = np.asarray(config.weights if nu is None else nu, dtype=float)
    if nu.shape != (config.d,):
        raise ConfigError("weights", f"need {config.d} weights")
    data = moment_data(config)
    keep = _active_channels(config, data.C, nu)
    c_sub = data.C[np.ix_(keep, keep)]
    gamma_sub = data.Gamma[np.ix_(keep, keep)]
    nu_sub = nu[keep]
    if np.count_nonzero(c_sub - np.diag(np.diag(c_sub))):
        x = np.linalg.solve(c_sub.T, nu_sub)
    else:
        x = nu_sub / np.diag(c_sub)
    return float(x @ gamma_sub @ x)


def sensitivity_separable(config: NetworkConfig, nu=None) -> float:
    """Variance of d independent sensors with per-node squeezed inputs:

        sum_j nu_j^2 (e^{-2 r_j} + Lambda) / |alpha_j|^2 / (mu K^2)

    using the same loss model and multipass enhancement as the shared
    resource network.
    """
    if config.topology != "separable":
        raise ConfigError("topology", "sensitivity_separable needs topology='separable'")
    nu = np.asarray(config.weights if nu is None else nu, dtype=float)
    rs = config.r if isinstance(config.r, tuple) else (config.r,) * config.d
    total = 0.0
    dark = [
        j for j in range(config.d) if nu[j] != 0 and config.alphas[j][0] == 0
    ]
    if dark:
        raise DarkResponseError(dark)
    for j in range(config.d):
        if nu[j] == 0.0:
            continue
        mag = config.alphas[j][0]
        total += nu[j] ** 2 * (math.exp(-2.0 * rs[j]) + config.Lambda) / mag**2
    return total / config.enhancement


def closed_form_variance(config: NetworkConfig, nu=None) -> float:
    """Working-point variance for an arbitrary allocation:

        [ (e^{-2r} - 1) (sum_j nu_j sqrt(P_j) / (|a_j| cos phi_j))^2
          + sum_j nu_j^2 / (eta |a_j|^2) ] / (mu K^2)

    Requires theta_j = 0 and phi_j in {0, pi}; used as the independent
    cross-check of the numeric engine.
    """
    _require_entangled(config)
    nu = np.asarray(config.weights if nu is None else nu, dtype=float)
    if any(abs(t) > 1e-12 for t in config.thetas):
        raise ConfigError("thetas", "closed form is valid at theta = 0 only")
    varq = math.exp(-2.0 * float(config.r))
    cross = 0.0
    direct = 0.0
    for j in range(config.d):
        if nu[j] == 0.0:
            continue
        mag, phi = config.alphas[j]
        sign = math.cos(phi)
        if abs(abs(sign) - 1.0) > 1e-12:
            raise ConfigError("alphas", "closed form needs phi_j in {0, pi}")
        if mag == 0.0:
            raise DarkResponseError([j])
        cross += nu[j] * math.sqrt(config.P[j]) / (mag * sign)
        direct += nu[j] ** 2 / (config.eta_total * mag**2)
    return ((varq - 1.0) * cross**2 + direct) / config.enhancement


def sql_reference_config(config: NetworkConfig) -> NetworkConfig:
    """Ideal shot-noise reference: same coherent budget, no squeezing,
    lossless, single pass."""
    return config.with_updates(
        r=0.0,
        K=1,
        mu=None,
        eta_dis=1.0,
        eta_mzi=1.0,
        eta_m=1.0,
        thetas=(0.0,) * config.d,
        topology="entangled",
    )
