"""Exact finite-time information matrices from derivative states.

This route never touches the asymptotic formulas: parameter derivatives
of the evolved state are accumulated step by step in momentum space,

    d_mu |psi_t> = G_mu(t) |psi_t>,   G_mu(t) = sum_{m=1..t} u^m O_mu u^{-m},

with O_mu = C^dag d_mu C, via the recurrence G <- u (O_mu + G) u^dag.
Zone integrals become plain node averages on a uniform grid that is
fine enough for the discrete orthogonality to make them exact (every
integrand is a trigonometric polynomial of bounded degree).

Everything here is O(t * n_nodes) with 2x2 blocks, so t of a few
hundred is cheap; it serves as the independent check of the analytic
module and as the exact-score engine for estimation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qfim import QFIMatrix
from .quadrature import dft_exact_nodes, uniform_k_grid
from .walk import (PARAM_NAMES, CoinParams, WalkerState, build_coin,
                   dcoin_matrix, evolve, spinors_at, u_k)


@dataclass(frozen=True)
class AmplitudeWindow:
    """Dense amplitude window without a norm constraint (derivative states)."""

    origin: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.amps, dtype=complex)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError(f"amps must have shape (n, 2), got {a.shape}")
        object.__setattr__(self, "amps", a)

    @property
    def sites(self) -> np.ndarray:
        return self.origin + np.arange(self.amps.shape[0])


def coin_generators(p: CoinParams) -> np.ndarray:
    """O_mu = C^dag dC/dmu for mu = (theta, alpha, beta), shape (3, 2, 2).

    Momentum independent: the shift phases commute out of u^dag d_mu u.
    """
    c = build_coin(p)
    return np.einsum("ba,mbc->mac", c.conj(), dcoin_matrix(p))


def _grid_for(init: WalkerState, t: int, n_nodes: int | None) -> np.ndarray:
    final_width = init.n_sites + 2 * int(t)
    if n_nodes is None:
        n_nodes = dft_exact_nodes(2 * final_width)
    if n_nodes < 2 * final_width:
        raise ValueError(
            f"{n_nodes} nodes cannot integrate window {final_width} exactly; "
            f"need at least {2 * final_width}")
    nodes, _ = uniform_k_grid(n_nodes)
    return nodes


def _evolve_with_generators(init: WalkerState, p: CoinParams, t: int,
                            n_nodes: int | None = None):
    """Evolved k-spinors and accumulated generators on a uniform grid.

    Returns (nodes, phi_t, G) with phi_t of shape (n, 2) and G of shape
    (3, n, 2, 2); d_mu phi_t = G[mu] @ phi_t node by node.
    """
    nodes = _grid_for(init, t, n_nodes)
    u = u_k(p, nodes)
    uc = u.conj()
    o = coin_generators(p)
    phi = spinors_at(init, nodes)
    g = np.zeros((3, nodes.size, 2, 2), dtype=complex)
    for _ in range(int(t)):
        g = np.einsum("nab,mnbc,ndc->mnad", u, g + o[:, None, :, :], uc)
        phi = np.einsum("nab,nb->na", u, phi)
    return nodes, phi, g


def derivative_state(init: WalkerState, p: CoinParams, t: int, mu: str,
                     method: str = "sum", h: float = 1e-6,
                     n_nodes: int | None = None) -> AmplitudeWindow:
    """Position-space d_mu |psi_t>.

    method "sum" uses the exact generator accumulation; "finite_diff"
    central-differences two full evolutions with step ``h`` and exists
    to cross-check the sum route.
    """
    if mu not in PARAM_NAMES:
        raise ValueError(f"unknown parameter {mu!r}; choose from {PARAM_NAMES}")
    if method == "sum":
        nodes, phi, g = _evolve_with_generators(init, p, t, n_nodes)
        dphi = np.einsum("nab,nb->na", g[PARAM_NAMES.index(mu)], phi)
        origin = init.origin - int(t)
        width = init.n_sites + 2 * int(t)
        x = origin + np.arange(width)
        phases = np.exp(1j * np.outer(x, nodes))
        amps = phases @ dphi / nodes.size
        return AmplitudeWindow(origin=origin, amps=amps)
    if method == "finite_diff":
        plus = evolve(init, p.replace(**{mu: getattr(p, mu) + h}), t)
        minus = evolve(init, p.replace(**{mu: getattr(p, mu) - h}), t)
        return AmplitudeWindow(origin=plus.origin,
                               amps=(plus.amps - minus.amps) / (2.0 * h))
    raise ValueError(f"unknown method {method!r}; use 'sum' or 'finite_diff'")


def _gram(init: WalkerState, p: CoinParams, t: int, idx,
          n_nodes: int | None = None):
    """Zone-averaged Gram data: G[u,v] = <d_u psi|d_v psi>, v[u] = <psi|d_u psi>."""
    nodes, phi, g = _evolve_with_generators(init, p, t, n_nodes)
    dphi = np.einsum("mnab,nb->mna", g[idx], phi)
    n = nodes.size
    m = len(idx)
    gram = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for b in range(a, m):
            gram[a, b] = np.vdot(dphi[a], dphi[b]) / n
            if b != a:
                gram[b, a] = np.conj(gram[a, b])
    overlap = np.einsum("na,mna->m", phi.conj(), dphi) / n
    return gram, overlap


def _gram_finite_diff(init: WalkerState, p: CoinParams, t: int, idx,
                      h: float = 1e-6):
    ds = [derivative_state(init, p, t, PARAM_NAMES[i], method="finite_diff", h=h)
          for i in idx]
    psi = evolve(init, p, t)
    m = len(idx)
    gram = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for b in range(a, m):
            gram[a, b] = np.vdot(ds[a].amps, ds[b].amps)
            if b != a:
                gram[b, a] = np.conj(gram[a, b])
    overlap = np.array([np.vdot(psi.amps, d.amps) for d in ds])
    return gram, overlap


def qfim_exact(init: WalkerState, p: CoinParams, t: int,
               params=PARAM_NAMES, method: str = "sum",
               n_nodes: int | None = None) -> QFIMatrix:
    """Finite-t information matrix 4 Re(<d_u|d_v> - <d_u|psi><psi|d_v>)."""
    idx = [PARAM_NAMES.index(l) for l in params]
    if method == "sum":
        gram, v = _gram(init, p, t, idx, n_nodes)
    elif method == "finite_diff":
        gram, v = _gram_finite_diff(init, p, t, idx)
    else:
        raise ValueError(f"unknown method {method!r}")
    f = 4.0 * (gram - np.outer(np.conj(v), v)).real
    return QFIMatrix(entries=f, labels=tuple(params), t=int(t), asymptotic=False)


def uhlmann_exact(init: WalkerState, p: CoinParams, t: int,
                  params=PARAM_NAMES, method: str = "sum",
                  n_nodes: int | None = None) -> QFIMatrix:
    """Finite-t mixed-derivative curvature 4 Im(<d_u|d_v> - <d_u|psi><psi|d_v>).

    Decays like 1/t on the walk models here; the asymptotic route
    reports an exact zero instead.
    """
    idx = [PARAM_NAMES.index(l) for l in params]
    if method == "sum":
        gram, v = _gram(init, p, t, idx, n_nodes)
    elif method == "finite_diff":
        gram, v = _gram_finite_diff(init, p, t, idx)
    else:
        raise ValueError(f"unknown method {method!r}")
    d = 4.0 * (gram - np.outer(np.conj(v), v)).imag
    return QFIMatrix(entries=d, labels=tuple(params), t=int(t),
                     antisymmetric=True, asymptotic=False)
