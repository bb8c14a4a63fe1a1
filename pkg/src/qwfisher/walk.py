"""Coined discrete-time walk on the integer line.

A step applies a U(2) coin to the internal qubit and then shifts coin
component 0 to x+1 and component 1 to x-1.  States are stored densely on
the light cone: an (n, 2) complex amplitude array whose row i is the
spinor at site ``origin + i``.

Momentum-space picture: with spinor(k) = sum_x c_x e^{-ikx}, one step is
multiplication by u(k) = diag(e^{-ik}, e^{ik}) @ C, so evolution
factorises over k.  Both pictures are implemented and kept numerically
interchangeable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, DegenerateWalk
from .quadrature import TWO_PI, dft_exact_nodes, uniform_k_grid

NORM_TOL = 1e-12


def _wrap_angle(a: float) -> float:
    """Map an angle to [-pi, pi)."""
    a = math.remainder(float(a), TWO_PI)
    if a >= np.pi:          # remainder returns (-pi, pi], fold the endpoint
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class CoinParams:
    """Coin angles (theta, alpha, beta), canonicalised to [-pi, pi).

    sin(theta) = 0 is rejected: the walk then never mixes the coin
    components and every construction downstream (projector norms,
    Fisher blocks) degenerates.  Use :func:`coin_matrix` directly if you
    need the raw matrix at such a point.
    """

    theta: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("theta", "alpha", "beta"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, _wrap_angle(v))
        if abs(math.sin(self.theta)) < 1e-12:
            raise DegenerateWalk(
                f"sin(theta) = 0 at theta={self.theta!r}: coin does not mix "
                "the internal components")

    def replace(self, **kw) -> "CoinParams":
        d = {"theta": self.theta, "alpha": self.alpha, "beta": self.beta}
        d.update(kw)
        return CoinParams(**d)


PARAM_NAMES = ("theta", "alpha", "beta")


def coin_matrix(theta: float, alpha: float, beta: float) -> np.ndarray:
    """Raw coin matrix; no domain validation.

    [[ e^{i alpha} cos(theta),  e^{i beta} sin(theta)],
     [-e^{-i beta} sin(theta),  e^{-i alpha} cos(theta)]]
    """
    ct, st = np.cos(theta), np.sin(theta)
    ea, eb = np.exp(1j * alpha), np.exp(1j * beta)
    return np.array([[ea * ct, eb * st],
                     [-st / eb, ct / ea]], dtype=complex)


def build_coin(p: CoinParams) -> np.ndarray:
    """Coin matrix for validated parameters."""
    return coin_matrix(p.theta, p.alpha, p.beta)


def dcoin_matrix(p: CoinParams) -> np.ndarray:
    """Stack of coin derivatives d C / d(theta, alpha, beta), shape (3, 2, 2)."""
    ct, st = np.cos(p.theta), np.sin(p.theta)
    ea, eb = np.exp(1j * p.alpha), np.exp(1j * p.beta)
    d_theta = np.array([[-ea * st, eb * ct],
                        [-ct / eb, -st / ea]])
    d_alpha = np.array([[1j * ea * ct, 0.0],
                        [0.0, -1j * ct / ea]])
    d_beta = np.array([[0.0, 1j * eb * st],
                       [1j * st / eb, 0.0]])
    return np.array([d_theta, d_alpha, d_beta])


def shift_phases(k) -> np.ndarray:
    """diag(e^{-ik}, e^{ik}) for scalar or array k; array input gives (n, 2, 2)."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-1j * k)
    out[..., 1, 1] = np.exp(1j * k)
    return out


def u_k(p: CoinParams, k) -> np.ndarray:
    """Single-step momentum-space unitary diag(e^{-ik}, e^{ik}) @ C.

    Scalar ``k`` gives a (2, 2) matrix, an array of momenta an (n, 2, 2)
    stack.
    """
    return shift_phases(k) @ build_coin(p)


# ---------------------------------------------------------------------------
# position-space states


@dataclass(frozen=True)
class WalkerState:
    """Dense amplitude window on the line.

    amps[i, c] is the amplitude of coin state c at site origin + i.  The
    norm must be 1 within 1e-12; construction enforces it.
    """

    origin: int
    amps: np.ndarray
    steps_elapsed: int = 0

    def __post_init__(self):
        a = np.ascontiguousarray(self.amps, dtype=complex)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError(f"amps must have shape (n, 2), got {a.shape}")
        object.__setattr__(self, "amps", a)
        nrm = np.linalg.norm(a)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {nrm!r} deviates from 1 beyond {NORM_TOL}")

    @property
    def n_sites(self) -> int:
        return self.amps.shape[0]

    @property
    def sites(self) -> np.ndarray:
        return self.origin + np.arange(self.n_sites)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def to_json_dict(self) -> dict:
        """JSON layout: origin, steps_elapsed, amps as [re, im] pairs.

        Pairs run site-major with the coin index inner, i.e.
        [site0 coin0, site0 coin1, site1 coin0, ...].
        """
        flat = self.amps.reshape(-1)
        return {
            "origin": int(self.origin),
            "steps_elapsed": int(self.steps_elapsed),
            "amps": [[float(z.real), float(z.imag)] for z in flat],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "WalkerState":
        pairs = np.asarray(d["amps"], dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] % 2:
            raise ValueError("amps must be an even-length list of [re, im] pairs")
        flat = pairs[:, 0] + 1j * pairs[:, 1]
        return WalkerState(origin=int(d["origin"]),
                           amps=flat.reshape(-1, 2),
                           steps_elapsed=int(d["steps_elapsed"]))


def step(s: WalkerState, p: CoinParams) -> WalkerState:
    """One coin-then-shift step; the window grows by one site on each side."""
    rotated = s.amps @ build_coin(p).T
    n = s.amps.shape[0]
    out = np.zeros((n + 2, 2), dtype=complex)
    out[2:, 0] = rotated[:, 0]      # coin 0 hops to x + 1
    out[:-2, 1] = rotated[:, 1]     # coin 1 hops to x - 1
    return WalkerState(origin=s.origin - 1, amps=out,
                       steps_elapsed=s.steps_elapsed + 1)


def evolve(s: WalkerState, p: CoinParams, t: int) -> WalkerState:
    """t steps in the position picture."""
    if t < 0:
        raise ValueError(f"step count must be nonnegative, got {t}")
    C_T = build_coin(p).T
    origin, amps = s.origin, s.amps
    for _ in range(int(t)):
        rotated = amps @ C_T
        n = rotated.shape[0]
        nxt = np.zeros((n + 2, 2), dtype=complex)
        nxt[2:, 0] = rotated[:, 0]
        nxt[:-2, 1] = rotated[:, 1]
        origin -= 1
        amps = nxt
    return WalkerState(origin=origin, amps=amps,
                       steps_elapsed=s.steps_elapsed + int(t))


# ---------------------------------------------------------------------------
# initial states


@dataclass(frozen=True)
class CoinBlochState:
    """Internal qubit state given by a Bloch vector, ||r|| <= 1."""

    r: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (3,):
            raise ValueError(f"Bloch vector must have shape (3,), got {r.shape}")
        if np.linalg.norm(r) > 1.0 + 1e-12:
            raise ValueError(f"Bloch vector length {np.linalg.norm(r)} exceeds 1")
        object.__setattr__(self, "r", r)

    @property
    def purity_defect(self) -> float:
        return abs(1.0 - float(np.linalg.norm(self.r)))

    def spinor(self) -> np.ndarray:
        """Spinor of a pure state (up to global phase); rejects mixed input."""
        if self.purity_defect > 1e-10:
            raise ValueError(
                f"Bloch vector has length {np.linalg.norm(self.r)}; only pure "
                "states have a spinor")
        x, y, z = self.r / np.linalg.norm(self.r)
        th = math.acos(np.clip(z, -1.0, 1.0))
        ph = math.atan2(y, x)
        return np.array([math.cos(th / 2.0),
                         np.exp(1j * ph) * math.sin(th / 2.0)], dtype=complex)


def initial_localized(x0: int = 0, spinor=None, bloch: CoinBlochState | None = None
                      ) -> WalkerState:
    """Walker at a single site with the given internal state.

    Exactly one of ``spinor`` (complex 2-vector, normalised) or ``bloch``
    may be supplied; the default internal state is coin |0>.
    """
    if spinor is not None and bloch is not None:
        raise ValueError("give either spinor or bloch, not both")
    if bloch is not None:
        chi = bloch.spinor()
    elif spinor is not None:
        chi = np.asarray(spinor, dtype=complex)
        if chi.shape != (2,):
            raise ValueError(f"spinor must have shape (2,), got {chi.shape}")
        nrm = np.linalg.norm(chi)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"spinor norm {nrm!r} deviates from 1")
    else:
        chi = np.array([1.0, 0.0], dtype=complex)
    return WalkerState(origin=int(x0), amps=chi[None, :].copy())


def initial_gamma(gamma: float) -> WalkerState:
    """Walker at the origin with spinor (|0> + e^{i gamma} |1>)/sqrt(2).

    Coin Bloch vector (cos gamma, sin gamma, 0): the equatorial family
    used throughout the localized-input closed forms.
    """
    chi = np.array([1.0, np.exp(1j * float(gamma))]) / np.sqrt(2.0)
    return WalkerState(origin=0, amps=chi[None, :])


def initial_entangled(x1: int = 0, x2: int = 1) -> WalkerState:
    """Position-coin entangled input (|x1, 0> + |x2, 1>)/sqrt(2).

    Odd separations |x1 - x2| keep the k-spinor norm constant over the
    zone; even separations are accepted with a warning since the
    asymptotic information then picks up a k-dependent weight.
    """
    x1, x2 = int(x1), int(x2)
    if x1 == x2:
        raise ValueError("entangled input needs two distinct sites")
    if (x1 - x2) % 2 == 0:
        warnings.warn(
            f"separation {x1 - x2} is even: the k-spinor norm varies over "
            "the zone and the asymptotic formulas apply in their weighted form",
            stacklevel=2)
    lo, hi = min(x1, x2), max(x1, x2)
    amps = np.zeros((hi - lo + 1, 2), dtype=complex)
    amps[x1 - lo, 0] = 1.0 / np.sqrt(2.0)
    amps[x2 - lo, 1] = 1.0 / np.sqrt(2.0)
    return WalkerState(origin=lo, amps=amps)


def make_initial(kind: str, **kw) -> WalkerState:
    """Dispatcher for the three named input families.

    kind = "localized" (x0, spinor | bloch), "entangled" (x1, x2) or
    "gamma" (gamma).
    """
    builders = {"localized": initial_localized,
                "entangled": initial_entangled,
                "gamma": initial_gamma}
    if kind not in builders:
        raise ValueError(f"unknown initial-state kind {kind!r}; "
                         f"choose from {sorted(builders)}")
    return builders[kind](**kw)


# ---------------------------------------------------------------------------
# momentum-space picture


@dataclass(frozen=True)
class KSpinorGrid:
    """Sampled k-spinors plus the window metadata needed to invert exactly."""

    nodes: np.ndarray
    weights: np.ndarray
    spinors: np.ndarray
    origin: int
    n_sites: int
    steps_elapsed: int = 0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        spinors = np.ascontiguousarray(self.spinors, dtype=complex)
        if spinors.shape != (nodes.size, 2):
            raise ValueError(
                f"spinors shape {spinors.shape} does not match {nodes.size} nodes")
        if abs(weights.sum() - TWO_PI) > 1e-9:
            raise ValueError("weights must sum to 2 pi")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "spinors", spinors)

    def norm_integral(self) -> float:
        """(1/2pi) * integral ||spinor(k)||^2 dk, should be 1."""
        dens = np.sum(np.abs(self.spinors) ** 2, axis=1)
        return float(np.dot(self.weights, dens) / TWO_PI)


def spinors_at(s: WalkerState, k_nodes: np.ndarray) -> np.ndarray:
    """Evaluate spinor(k) = sum_x c_x e^{-ikx} at arbitrary momenta, (n, 2)."""
    k = np.asarray(k_nodes, dtype=float)
    phases = np.exp(-1j * np.outer(k, s.sites))
    return phases @ s.amps


def to_k_space(s: WalkerState, n_nodes: int | None = None) -> KSpinorGrid:
    """Sample the state on a uniform k-grid.

    The grid must oversample the support: n_nodes >= 2 * window width,
    otherwise an AliasingError explains the required count.  The default
    picks the smallest adequate power of two.
    """
    width = s.n_sites
    if n_nodes is None:
        n_nodes = dft_exact_nodes(2 * width)
    if n_nodes < 2 * width:
        raise AliasingError(
            f"{n_nodes} nodes cannot faithfully represent a window of "
            f"{width} sites; need at least {2 * width}")
    nodes, weights = uniform_k_grid(n_nodes)
    return KSpinorGrid(nodes=nodes, weights=weights,
                       spinors=spinors_at(s, nodes),
                       origin=s.origin, n_sites=width,
                       steps_elapsed=s.steps_elapsed)


def from_k_space(g: KSpinorGrid) -> WalkerState:
    """Invert the zone integral c_x = (1/2pi) * integral e^{ikx} spinor(k) dk."""
    x = g.origin + np.arange(g.n_sites)
    phases = np.exp(1j * np.outer(x, g.nodes)) * g.weights
    amps = (phases @ g.spinors) / TWO_PI
    return WalkerState(origin=g.origin, amps=amps,
                       steps_elapsed=g.steps_elapsed)


def evolve_k(s: WalkerState, p: CoinParams, t: int,
             n_nodes: int | None = None) -> WalkerState:
    """t steps through the momentum picture; equals :func:`evolve` exactly.

    The node count must cover the final window (2 * (width + 2t)); the
    default again rounds up to a power of two.
    """
    if t < 0:
        raise ValueError(f"step count must be nonnegative, got {t}")
    final_width = s.n_sites + 2 * int(t)
    if n_nodes is None:
        n_nodes = dft_exact_nodes(2 * final_width)
    if n_nodes < 2 * final_width:
        raise AliasingError(
            f"{n_nodes} nodes alias a final window of {final_width} sites; "
            f"need at least {2 * final_width}")
    g = to_k_space(s, n_nodes)
    u = u_k(p, g.nodes)
    spin = g.spinors
    for _ in range(int(t)):
        spin = np.einsum("kij,kj->ki", u, spin)
    g2 = KSpinorGrid(nodes=g.nodes, weights=g.weights, spinors=spin,
                     origin=s.origin - int(t), n_sites=final_width,
                     steps_elapsed=s.steps_elapsed + int(t))
    return from_k_space(g2)
