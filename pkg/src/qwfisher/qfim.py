"""Asymptotic quantum Fisher information of the walk, per step squared.

For large step counts the information matrix grows as t^2 with a
coefficient given by zone integrals of the coin generators sandwiched
between stationary projectors:

    F_uv / t^2 = (1/2pi) Int dk o0(k) (O_u | A1_k | O_v)
               - [(1/2pi) Int dk (O_u | A1_k | rho0(k))]
               * [(1/2pi) Int dk (rho0(k) | A1_k | O_v)]

with O_u = C^dag dC/du (momentum independent) and rho0(k) the
unnormalised Pauli 4-vector of the initial k-spinor, whose norm o0(k)
is constant (=1) for the usual single-site and odd-separation inputs.
Since A1 is rank 2 with spatial part u u^T / sin^2 w, every bracket
reduces to scalar products with u(k), which is how the integrands are
evaluated here.  The mixed-derivative (Uhlmann) curvature vanishes
identically in this limit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureError
from .quadrature import adaptive_mean_over_bz, gauss_k_grid, mean_over_bz, uniform_k_grid
from .superop import Bloch4, a1_grid, invariant_vector, sin2_omega
from .walk import PARAM_NAMES, CoinParams, WalkerState, spinors_at

SYM_TOL = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True)
class QFIMatrix:
    """Information matrix with parameter labels and the step count it refers to.

    ``entries`` holds the matrix itself (including any t^2 growth);
    symmetry (or antisymmetry, for mixed-derivative curvature matrices)
    and positive semidefiniteness are validated on the per-step-squared
    scale so the gates do not depend on t.  ``asymptotic`` records
    whether the entries came from the long-time formulas or from an
    exact finite-t computation.
    """

    entries: np.ndarray
    labels: tuple
    t: int = 1
    antisymmetric: bool = False
    asymptotic: bool = False

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        m = len(self.labels)
        if e.shape != (m, m):
            raise ValueError(f"entries shape {e.shape} does not match labels {self.labels}")
        if self.t < 1:
            raise ValueError(f"step count must be >= 1, got {self.t}")
        scaled = e / float(self.t) ** 2
        scale = max(1.0, float(np.max(np.abs(scaled))) if e.size else 1.0)
        if self.antisymmetric:
            defect = np.max(np.abs(scaled + scaled.T))
            if defect > SYM_TOL * scale:
                raise ValueError(f"antisymmetry defect {defect:.3e} beyond tolerance")
        else:
            defect = np.max(np.abs(scaled - scaled.T))
            if defect > SYM_TOL * scale:
                raise ValueError(f"symmetry defect {defect:.3e} beyond tolerance")
            lo = float(np.min(np.linalg.eigvalsh(0.5 * (scaled + scaled.T))))
            if lo < -PSD_TOL * scale:
                raise ValueError(f"matrix not positive semidefinite: min eig {lo:.3e}")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def per_t2(self) -> np.ndarray:
        return self.entries / float(self.t) ** 2

    def block(self, labels) -> "QFIMatrix":
        """Submatrix over a subset of the labels, order as given."""
        idx = [self.labels.index(l) for l in labels]
        return QFIMatrix(entries=self.entries[np.ix_(idx, idx)],
                         labels=tuple(labels), t=self.t,
                         antisymmetric=self.antisymmetric,
                         asymptotic=self.asymptotic)

    def identifiable_block(self) -> "QFIMatrix":
        """Restriction to (theta, alpha) when a beta row is present."""
        if "beta" in self.labels:
            return self.block(("theta", "alpha"))
        return self


# ---------------------------------------------------------------------------
# coin generators in the Pauli basis


def generator_spatial(p: CoinParams) -> np.ndarray:
    """Real spatial vectors w_u with |O_u) = i (0, w_u), rows (theta, alpha, beta).

    With phi = alpha - beta:
        w_theta = 2 (-sin phi, cos phi, 0)
        w_alpha = (cos phi sin 2th, sin phi sin 2th,  2 cos^2 th)
        w_beta  = (cos phi sin 2th, sin phi sin 2th, -2 sin^2 th)
    """
    phi = p.alpha - p.beta
    sp, cp = np.sin(phi), np.cos(phi)
    s2t = np.sin(2 * p.theta)
    return np.array([
        [-2.0 * sp, 2.0 * cp, 0.0],
        [cp * s2t, sp * s2t, 2.0 * np.cos(p.theta) ** 2],
        [cp * s2t, sp * s2t, -2.0 * np.sin(p.theta) ** 2],
    ])


def o_vector(p: CoinParams, mu: str) -> Bloch4:
    """Generator O_mu = u_k^dag d_mu u_k as a Pauli 4-vector.

    Momentum independent: the shift phases carry no coin parameter, so
    O_mu = C^dag d_mu C.  Always traceless and antihermitian.
    """
    if mu not in PARAM_NAMES:
        raise ValueError(f"unknown parameter {mu!r}; choose from {PARAM_NAMES}")
    w = generator_spatial(p)[PARAM_NAMES.index(mu)]
    return Bloch4(c=1j * np.concatenate(([0.0], w)), kind="antihermitian")


def beta_null_check(p: CoinParams, n_nodes: int = 512) -> float:
    """max_k || A1_k |O_beta) || on a uniform grid; exactly zero in theory.

    The spatial direction u(k) is orthogonal to w_beta at every momentum,
    so this is a pure roundoff diagnostic.
    """
    nodes, _ = uniform_k_grid(n_nodes)
    a1 = a1_grid(p, nodes)
    ob = np.concatenate(([0.0], generator_spatial(p)[2]))
    return float(np.max(np.linalg.norm(a1 @ ob, axis=-1)))


# ---------------------------------------------------------------------------
# the zone integrals


def _rho_bloch(init: WalkerState, k: np.ndarray) -> np.ndarray:
    """Unnormalised Pauli 4-vector of the initial k-spinor, shape (n, 4)."""
    phi = spinors_at(init, k)
    a, b = phi[:, 0], phi[:, 1]
    out = np.empty((k.size, 4))
    out[:, 0] = np.abs(a) ** 2 + np.abs(b) ** 2
    cross = a * np.conj(b)
    out[:, 1] = 2.0 * cross.real
    out[:, 2] = -2.0 * cross.imag
    out[:, 3] = np.abs(a) ** 2 - np.abs(b) ** 2
    return out


def _integrands(p: CoinParams, init, idx: np.ndarray):
    """Callable k -> stacked integrand values for the selected parameters.

    Layout per node: the upper triangle of the state-independent matrix
    (o0-weighted) followed by the state-dependent scalars, one per
    parameter.
    """
    w = generator_spatial(p)[idx]
    m = len(idx)
    iu = np.triu_indices(m)

    def f(k):
        k = np.asarray(k, dtype=float)
        u = invariant_vector(p, k)
        s2 = sin2_omega(p, k)
        a = (u @ w.T) / np.sqrt(s2)[:, None]        # (n, m): (u.w_mu)/sin w
        rho = _rho_bloch(init, k)
        first = a[:, iu[0]] * a[:, iu[1]] * rho[:, :1]
        b = np.einsum("ni,ni->n", u, rho[:, 1:]) / s2
        state = a * (b * np.sqrt(s2))[:, None]
        return np.concatenate([first, state], axis=1)

    return f, iu, m


def qfim_theorem1(p: CoinParams, init: WalkerState, t: int,
                  params=("theta", "alpha"), rel_tol: float = 1e-9,
                  n_nodes: int | None = None) -> QFIMatrix:
    """Asymptotic information matrix at step count t from the zone integrals.

    params may be ("theta", "alpha") or the full triple; the beta row of
    the full matrix comes out at machine zero because the stationary
    projector annihilates O_beta.  With ``n_nodes`` unset the quadrature
    doubles Gauss-Legendre nodes until the integrals settle to
    ``rel_tol``; a fixed node count skips the adaptation.
    """
    idx = np.array([PARAM_NAMES.index(l) for l in params])
    f, iu, m = _integrands(p, init, idx)
    if n_nodes is None:
        vals, _ = adaptive_mean_over_bz(f, rel_tol=rel_tol)
    else:
        vals = mean_over_bz(f, *gauss_k_grid(n_nodes))
    n_first = iu[0].size
    first = np.zeros((m, m))
    first[iu] = vals[:n_first]
    first = first + first.T - np.diag(np.diag(first))
    y = vals[n_first:]
    per_t2 = first - np.outer(y, y)
    return QFIMatrix(entries=per_t2 * float(t) ** 2, labels=tuple(params),
                     t=int(t), asymptotic=True)


def qfim_first_term(p: CoinParams, params=("theta", "alpha"),
                    rel_tol: float = 1e-9) -> np.ndarray:
    """State-independent part of the asymptotic matrix, per step squared.

    Equals the full coefficient whenever the state-dependent integrals
    vanish; its diagonal is what the optimal-input closed forms quote.
    """
    idx = np.array([PARAM_NAMES.index(l) for l in params])
    w = generator_spatial(p)[idx]
    m = len(idx)
    iu = np.triu_indices(m)

    def f(k):
        k = np.asarray(k, dtype=float)
        u = invariant_vector(p, k)
        s2 = sin2_omega(p, k)
        a = (u @ w.T) / np.sqrt(s2)[:, None]
        return a[:, iu[0]] * a[:, iu[1]]

    vals, _ = adaptive_mean_over_bz(f, rel_tol=rel_tol)
    first = np.zeros((m, m))
    first[iu] = vals
    return first + first.T - np.diag(np.diag(first))


def uhlmann_analytic(p: CoinParams, init: WalkerState, t: int,
                     params=("theta", "alpha")) -> QFIMatrix:
    """Mixed-derivative curvature in the long-time limit: identically zero.

    Every bracket entering the asymptotic formulas is real (the
    projector is a real matrix and the generator components are purely
    imaginary), so no imaginary part survives.
    """
    m = len(params)
    return QFIMatrix(entries=np.zeros((m, m)), labels=tuple(params),
                     t=int(t), antisymmetric=True, asymptotic=True)


# ---------------------------------------------------------------------------
# closed forms for distinguished inputs


def _require_positive_sin(theta: float) -> float:
    s = np.sin(theta)
    if not s > 0.0:
        raise ValueError(f"closed form needs sin(theta) > 0, got theta={theta!r}")
    return float(s)


def qfim_max_diag(theta: float, t: int) -> tuple[float, float]:
    """Optimal-input diagonal (F_theta, F_alpha) = 4 t^2 (s/(1+s), 1-s).

    The theta optimum is reached by equatorial coin states orthogonal to
    the coin plane and the alpha optimum by the complementary family;
    cross terms vanish at the optima.
    """
    s = _require_positive_sin(theta)
    tt = float(t) ** 2
    return 4.0 * tt * s / (1.0 + s), 4.0 * tt * (1.0 - s)


def qfim_localized(theta: float, phi: float, r, t: int) -> QFIMatrix:
    """Information matrix over (theta, phi) for a single-site input.

    ``phi`` is the phase difference alpha - beta and ``r`` the coin Bloch
    vector of the input.  With n = (sin th cos phi, sin th sin phi, cos th):

        F_tt = (4 t^2/(1+s)) [ s - (n x r)_z^2 / (1+s) ]
        F_pp = 4 t^2 (1-s) [ 1 - (n.r)^2 / (1+s) ]
        F_tp = -4 t^2 cos th (n.r) (n x r)_z / (1+s)^2

    The cross term is written in its everywhere-regular form; it equals
    the -4 t^2 (1-s) (n.r)(n x r)_z / (cos th (1+s)) variant away from
    theta = pi/2 since (1-s)/cos th = cos th/(1+s).
    """
    s = _require_positive_sin(theta)
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"coin Bloch vector must have shape (3,), got {r.shape}")
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise ValueError("coin Bloch vector length exceeds 1")
    ct = np.cos(theta)
    n = np.array([s * np.cos(phi), s * np.sin(phi), ct])
    ndotr = float(n @ r)
    ncross = float(n[0] * r[1] - n[1] * r[0])
    tt = float(t) ** 2
    f_tt = 4.0 * tt / (1.0 + s) * (s - ncross ** 2 / (1.0 + s))
    f_pp = 4.0 * tt * (1.0 - s) * (1.0 - ndotr ** 2 / (1.0 + s))
    f_tp = -4.0 * tt * ct * ndotr * ncross / (1.0 + s) ** 2
    return QFIMatrix(entries=np.array([[f_tt, f_tp], [f_tp, f_pp]]),
                     labels=("theta", "phi"), t=int(t), asymptotic=True)


def single_param_qfi(theta: float, r_y: float, t: int) -> float:
    """Theta information for a single-site input with coin component r_y.

    4 t^2 s [1 + s (1 - r_y^2)] / (1+s)^2: maximal on the equatorial
    circle r_y = 0 and minimal at the poles r_y = +-1, with ratio 1 + s.
    """
    s = _require_positive_sin(theta)
    if abs(r_y) > 1.0 + 1e-12:
        raise ValueError(f"|r_y| must not exceed 1, got {r_y!r}")
    return float(4.0 * float(t) ** 2 * s * (1.0 + s * (1.0 - r_y ** 2))
                 / (1.0 + s) ** 2)
