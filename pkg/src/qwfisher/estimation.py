"""Measurement sampling, classical Fisher information and MLE closure.

The measurement is position-only (coin traced out).  Sampling is
multinomial with a counter-based generator so every record is a pure
function of (seed, config).  The likelihood over a (theta, alpha) grid
is evaluated from a shared probability table; fits refine the grid
argmax by Fisher scoring with exact scores from the derivative-state
engine.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import derivative_state
from .walk import CoinParams, WalkerState, coin_matrix, evolve, spinors_at
from .quadrature import dft_exact_nodes, uniform_k_grid

MASS_THRESHOLD = 1e-12


def philox_rng(seed: int, *stream) -> np.random.Generator:
    """Counter-based generator; extra integers key independent substreams."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PositionDistribution:
    """Probability vector over the dense site window of a walker state."""

    sites: np.ndarray
    probs: np.ndarray
    t: int = 0

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=int)
        probs = np.asarray(self.probs, dtype=float)
        if sites.shape != probs.shape or probs.ndim != 1:
            raise ValueError("sites and probs must be matching 1D arrays")
        if probs.min() < -1e-15:
            raise ValueError(f"negative probability {probs.min()!r}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "probs", probs)


def position_distribution(s: WalkerState) -> PositionDistribution:
    """p(x) = sum_c |amp(x, c)|^2 over the state's window."""
    probs = np.sum(np.abs(s.amps) ** 2, axis=1)
    return PositionDistribution(sites=s.sites, probs=probs, t=s.steps_elapsed)


@dataclass(frozen=True)
class MeasurementRecord:
    """Observed position counts plus everything needed to re-score them."""

    t: int
    shots: int
    counts: dict
    seed: int
    params_true: CoinParams | None = None

    def __post_init__(self):
        counts = {int(x): int(c) for x, c in self.counts.items()}
        if any(c < 0 for c in counts.values()):
            raise ValueError("counts must be nonnegative")
        total = sum(counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected shots={self.shots}")
        object.__setattr__(self, "counts", counts)

    def count_vector(self, sites: np.ndarray) -> np.ndarray:
        """Counts aligned to a site axis; refuses counts outside it."""
        sites = np.asarray(sites, dtype=int)
        lookup = {int(x): i for i, x in enumerate(sites)}
        vec = np.zeros(sites.size)
        for x, c in self.counts.items():
            if x not in lookup:
                raise ValueError(f"observed site {x} outside the model window")
            vec[lookup[x]] = c
        return vec

    def to_json_dict(self) -> dict:
        d = {
            "t": int(self.t),
            "shots": int(self.shots),
            "seed": int(self.seed),
            "counts": {str(x): int(c) for x, c in sorted(self.counts.items())},
        }
        if self.params_true is not None:
            d["params_true"] = {"theta": self.params_true.theta,
                                "alpha": self.params_true.alpha,
                                "beta": self.params_true.beta}
        else:
            d["params_true"] = None
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "MeasurementRecord":
        pt = d.get("params_true")
        return MeasurementRecord(
            t=int(d["t"]), shots=int(d["shots"]),
            counts={int(x): int(c) for x, c in d["counts"].items()},
            seed=int(d["seed"]),
            params_true=None if pt is None else CoinParams(**pt))


def sample(dist: PositionDistribution, shots: int, seed: int,
           params_true: CoinParams | None = None, stream=()) -> MeasurementRecord:
    """Multinomial position draws; deterministic in (seed, stream)."""
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")
    rng = philox_rng(seed, *stream)
    p = dist.probs / dist.probs.sum()
    draws = rng.multinomial(int(shots), p)
    counts = {int(x): int(c) for x, c in zip(dist.sites, draws) if c}
    return MeasurementRecord(t=dist.t, shots=int(shots), counts=counts,
                             seed=int(seed), params_true=params_true)


# ---------------------------------------------------------------------------
# classical information


def _prob_derivatives(p: CoinParams, init: WalkerState, t: int, params,
                      method: str = "sum"):
    """(sites, probs, dprobs) with dp_mu(x) = 2 Re conj(amp) d_mu amp."""
    psi = evolve(init, p, t)
    dprobs = []
    for mu in params:
        d = derivative_state(init, p, t, mu, method=method)
        if d.origin != psi.origin or d.amps.shape != psi.amps.shape:
            raise RuntimeError("derivative window misaligned with the state")
        dprobs.append(2.0 * np.sum((psi.amps.conj() * d.amps).real, axis=1))
    return psi.sites, np.sum(np.abs(psi.amps) ** 2, axis=1), np.array(dprobs)


def classical_fi(p: CoinParams, init: WalkerState, t: int,
                 params=("theta", "alpha"), method: str = "sum") -> np.ndarray:
    """Fisher information of the position outcome, I_uv = sum dp dp / p.

    Bins with mass below 1e-12 are excluded.  For special inputs the
    alpha sensitivity of the marginal can vanish; the zero rows are
    reported as computed.
    """
    _, probs, dprobs = _prob_derivatives(p, init, t, params, method)
    mask = probs > MASS_THRESHOLD
    w = dprobs[:, mask] / np.sqrt(probs[mask])
    return w @ w.T


# ---------------------------------------------------------------------------
# likelihood table and MLE


@dataclass(frozen=True)
class GridSpec:
    """Prior box and resolution for the likelihood grid search."""

    theta_min: float = 0.1
    theta_max: float = 1.47
    alpha_min: float = -1.47
    alpha_max: float = 1.47
    n_theta: int = 200
    n_alpha: int = 200

    def __post_init__(self):
        if not (self.theta_min < self.theta_max and self.alpha_min < self.alpha_max):
            raise ValueError("grid box is empty")
        if min(self.n_theta, self.n_alpha) < 2:
            raise ValueError("grid needs at least 2 points per axis")

    def axes(self):
        return (np.linspace(self.theta_min, self.theta_max, self.n_theta),
                np.linspace(self.alpha_min, self.alpha_max, self.n_alpha))


@dataclass(frozen=True)
class LikelihoodTable:
    """Position probabilities over a (theta, alpha) grid, shots-independent."""

    grid: GridSpec
    beta: float
    t: int
    sites: np.ndarray
    probs: np.ndarray            # (n_theta, n_alpha, n_sites)
    init_amps: np.ndarray
    init_origin: int


def _chebyshev_power_spinors(phi0, coins, phases, t):
    """phi_t = u^t phi0 for a batch of coins at all nodes, closed form in t.

    u = diag(e^{-ik}, e^{ik}) C has real trace 2 cos(k - alpha) cos theta,
    so u^t = sin(t w)/sin w * u - sin((t-1) w)/sin w * 1 with
    cos w = trace/2.  Valid while sin w stays away from 0, which the
    caller guarantees by its grid box.
    """
    # row scaling implements diag(e^{-ik}, e^{ik}) C; phases is (n, 2)
    u = phases[None, :, :, None] * coins[:, None, :, :]   # (g, n, 2, 2)
    tr_half = 0.5 * np.einsum("gnaa->gn", u).real
    cw = np.clip(tr_half, -1.0, 1.0)
    w = np.arccos(cw)
    sw = np.sin(w)
    if np.min(sw) < 1e-6:
        raise ValueError("grid touches a degenerate quasi-energy; "
                         "shrink the box or step explicitly")
    a = np.sin(t * w) / sw
    b = -np.sin((t - 1) * w) / sw
    uphi = np.einsum("gnab,nb->gna", u, phi0)
    return a[:, :, None] * uphi + b[:, :, None] * phi0[None, :, :]


def make_likelihood_table(init: WalkerState, p_true: CoinParams, t: int,
                          grid: GridSpec | None = None,
                          chunk: int = 2048) -> LikelihoodTable:
    """Tabulate p(x | theta, alpha) over the grid at fixed beta = p_true.beta.

    One-time cost shared by every record fitted against the same model;
    evolution is done spectrally per momentum node so the cost does not
    grow with t.
    """
    grid = grid or GridSpec()
    thetas, alphas = grid.axes()
    width = init.n_sites + 2 * int(t)
    n = dft_exact_nodes(2 * width)
    nodes, _ = uniform_k_grid(n)
    phi0 = spinors_at(init, nodes)
    phases = np.column_stack([np.exp(-1j * nodes), np.exp(1j * nodes)])
    origin = init.origin - int(t)
    offsets = (origin + np.arange(width)) % n
    tt, aa = np.meshgrid(thetas, alphas, indexing="ij")
    pairs = np.column_stack([tt.ravel(), aa.ravel()])
    out = np.empty((pairs.shape[0], width))
    for lo in range(0, pairs.shape[0], chunk):
        sl = slice(lo, min(lo + chunk, pairs.shape[0]))
        th, al = pairs[sl, 0], pairs[sl, 1]
        coins = np.empty((th.size, 2, 2), dtype=complex)
        ct, st = np.cos(th), np.sin(th)
        ea, eb = np.exp(1j * al), np.exp(1j * p_true.beta)
        coins[:, 0, 0] = ea * ct
        coins[:, 0, 1] = eb * st
        coins[:, 1, 0] = -st / eb
        coins[:, 1, 1] = ct / ea
        phi_t = _chebyshev_power_spinors(phi0, coins, phases, int(t))
        amps = np.fft.ifft(phi_t, axis=1)                  # (g, n, 2)
        probs = np.sum(np.abs(amps) ** 2, axis=2)
        out[sl] = probs[:, offsets]
    probs = out.reshape(grid.n_theta, grid.n_alpha, width)
    return LikelihoodTable(grid=grid, beta=p_true.beta, t=int(t),
                           sites=origin + np.arange(width), probs=probs,
                           init_amps=init.amps.copy(), init_origin=init.origin)


def _connected_from_argmax(mask: np.ndarray, start) -> np.ndarray:
    """Cells of ``mask`` reachable 4-connectedly from ``start``."""
    reached = np.zeros_like(mask)
    reached[start] = mask[start]
    while True:
        grown = reached.copy()
        grown[1:, :] |= reached[:-1, :]
        grown[:-1, :] |= reached[1:, :]
        grown[:, 1:] |= reached[:, :-1]
        grown[:, :-1] |= reached[:, 1:]
        grown &= mask
        if np.array_equal(grown, reached):
            return reached
        reached = grown


@dataclass(frozen=True)
class MLEResult:
    theta: float
    alpha: float
    cov: np.ndarray
    loglik: float
    multimodal: bool
    converged: bool
    iterations: int
    grid_theta: float
    grid_alpha: float


def _score_and_info(rec_counts, init, params_point, t, params=("theta", "alpha")):
    sites, probs, dprobs = _prob_derivatives(params_point, init, t, params)
    mask = probs > MASS_THRESHOLD
    pm = probs[mask]
    score = np.array([np.sum(rec_counts[mask] * d[mask] / pm) for d in dprobs])
    w = dprobs[:, mask] / np.sqrt(pm)
    info = w @ w.T          # per shot
    return score, info, sites, probs


def mle_fit(rec: MeasurementRecord, init: WalkerState | None = None,
            t: int | None = None, grid: GridSpec | None = None,
            table: LikelihoodTable | None = None, refine: bool = True,
            max_refine: int = 12) -> MLEResult:
    """Maximum-likelihood (theta, alpha) from position counts.

    Grid search over a shared probability table, a connectivity
    diagnostic for secondary modes (cells within 2 log-likelihood units
    of the maximum that do not touch the main one), then Fisher-scoring
    refinement with exact scores.  The covariance estimate is the
    inverse observed information at the fit; a direction the data carry
    no information about (the position marginal can be exactly flat in
    alpha for some inputs) gets an infinite diagonal entry.
    """
    if table is None:
        if init is None:
            raise ValueError("need either a likelihood table or an initial state")
        if rec.params_true is None:
            raise ValueError("without a table, params_true is needed to pin beta")
        table = make_likelihood_table(init, rec.params_true,
                                      rec.t if t is None else int(t), grid)
    if t is not None and int(t) != table.t:
        raise ValueError(f"t={t} disagrees with the table's t={table.t}")
    if rec.t != table.t:
        raise ValueError(f"record t={rec.t} disagrees with the table t={table.t}")
    counts = rec.count_vector(table.sites)
    observed = counts > 0
    with np.errstate(divide="ignore"):
        logp = np.log(np.clip(table.probs[:, :, observed], 1e-300, None))
    loglik = logp @ counts[observed]
    flat_idx = int(np.argmax(loglik))
    it, ia = np.unravel_index(flat_idx, loglik.shape)
    thetas, alphas = table.grid.axes()
    th_hat, al_hat = float(thetas[it]), float(alphas[ia])
    mask = loglik >= loglik[it, ia] - 2.0
    reached = _connected_from_argmax(mask, (it, ia))
    multimodal = bool(mask.sum() - reached.sum() > 0)

    init_state = WalkerState(origin=table.init_origin, amps=table.init_amps)
    x = np.array([th_hat, al_hat])
    converged = not refine
    iters = 0
    if refine:
        for iters in range(1, max_refine + 1):
            pt = CoinParams(theta=x[0], alpha=x[1], beta=table.beta)
            score, info, _, _ = _score_and_info(counts, init_state, pt, table.t)
            step = np.linalg.pinv(info * rec.shots, rcond=1e-10, hermitian=True) \
                @ score
            x = np.clip(x + step,
                        [table.grid.theta_min, table.grid.alpha_min],
                        [table.grid.theta_max, table.grid.alpha_max])
            if np.max(np.abs(step)) < 1e-9:
                converged = True
                break

    pt = CoinParams(theta=x[0], alpha=x[1], beta=table.beta)
    h = 1e-5
    hess = np.zeros((2, 2))
    for j, mu in enumerate(("theta", "alpha")):
        up = pt.replace(**{mu: getattr(pt, mu) + h})
        dn = pt.replace(**{mu: getattr(pt, mu) - h})
        s_up, _, _, _ = _score_and_info(counts, init_state, up, table.t)
        s_dn, _, _, _ = _score_and_info(counts, init_state, dn, table.t)
        hess[:, j] = (s_up - s_dn) / (2.0 * h)
    hess = 0.5 * (hess + hess.T)
    evals, evecs = np.linalg.eigh(-hess)
    good = evals > 1e-10 * max(float(evals.max(initial=0.0)), 1.0)
    inv = np.where(good, 1.0 / np.where(good, evals, 1.0), 0.0)
    cov = (evecs * inv) @ evecs.T
    # a parameter living mostly in a zero-information direction has no
    # finite variance; report inf there instead of the pinv zero
    null_weight = (evecs[:, ~good] ** 2).sum(axis=1)
    cov[np.diag_indices_from(cov)] = np.where(null_weight > 0.5, np.inf,
                                              np.diag(cov))
    _, _, _, probs_fit = _score_and_info(counts, init_state, pt, table.t)
    mask_fit = probs_fit > MASS_THRESHOLD
    ll_fit = float(np.sum(counts[mask_fit] * np.log(probs_fit[mask_fit]))) \
        if np.all(counts[~mask_fit] == 0) else -np.inf
    return MLEResult(theta=float(x[0]), alpha=float(x[1]), cov=cov,
                     loglik=ll_fit, multimodal=multimodal, converged=converged,
                     iterations=iters, grid_theta=th_hat, grid_alpha=al_hat)
