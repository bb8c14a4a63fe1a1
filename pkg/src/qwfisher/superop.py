"""Bloch-vector picture of one walk step at fixed momentum.

A 2x2 operator O is encoded by the 4-vector o_i = Tr(O sigma_i) with
sigma = (1, sx, sy, sz), so O = (1/2) sum_i o_i sigma_i and
Tr(A B) = (1/2) sum_i a_i b_i.  Conjugation by the one-step unitary
u(k) acts on these 4-vectors as a real orthogonal-block matrix; its
unit-eigenvalue subspace carries everything that survives long times,
and the projector onto it has a small closed form used throughout the
asymptotic information formulas.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateK
from .walk import CoinParams

EPS_DEGENERATE = 1e-9

PAULI = np.array([
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, -1.0j], [1.0j, 0.0]],
    [[1.0, 0.0], [0.0, -1.0]],
], dtype=complex)


@dataclass(frozen=True)
class Bloch4:
    """Pauli components of a 2x2 operator, with a hermiticity tag.

    kind = "hermitian" forces real components, "antihermitian" purely
    imaginary ones, "general" accepts anything.
    """

    c: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (4,):
            raise ValueError(f"need 4 components, got shape {c.shape}")
        scale = max(1.0, float(np.max(np.abs(c))))
        if self.kind == "hermitian":
            if np.max(np.abs(c.imag)) > 1e-12 * scale:
                raise ValueError("hermitian tag but components are not real")
        elif self.kind == "antihermitian":
            if np.max(np.abs(c.real)) > 1e-12 * scale:
                raise ValueError("antihermitian tag but components are not imaginary")
        elif self.kind != "general":
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "c", c)

    @property
    def scalar(self) -> complex:
        return complex(self.c[0])

    @property
    def vector(self) -> np.ndarray:
        return self.c[1:]


def to_bloch(op: np.ndarray, kind: str | None = None) -> Bloch4:
    """Components o_i = Tr(O sigma_i); autodetects the hermiticity tag."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"need a 2x2 operator, got shape {op.shape}")
    c = np.einsum("iab,ba->i", PAULI, op)
    if kind is None:
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c.imag)) <= 1e-12 * scale:
            kind = "hermitian"
        elif np.max(np.abs(c.real)) <= 1e-12 * scale:
            kind = "antihermitian"
        else:
            kind = "general"
    return Bloch4(c=c, kind=kind)


def from_bloch(b: Bloch4) -> np.ndarray:
    """O = (1/2) sum_i c_i sigma_i."""
    return 0.5 * np.einsum("i,iab->ab", b.c, PAULI)


def pair_trace(a: Bloch4, b: Bloch4) -> complex:
    """Tr(AB) = (1/2)(a0 b0 + a.b); no conjugation."""
    return complex(0.5 * np.dot(a.c, b.c))


def hs_inner(a: Bloch4, b: Bloch4) -> complex:
    """(A|B) = Tr(A^dag B) = (1/2) sum_i conj(a_i) b_i."""
    return complex(0.5 * np.vdot(a.c, b.c))


def triple_trace(a: Bloch4, b: Bloch4, c: Bloch4) -> complex:
    """Tr(ABC) in components: (1/4)[i a.(b x c) + a0 b.c + b0 a.c + c0 a.b + a0 b0 c0]."""
    av, bv, cv = a.vector, b.vector, c.vector
    return complex(0.25 * (1j * np.dot(av, np.cross(bv, cv))
                           + a.scalar * np.dot(bv, cv)
                           + b.scalar * np.dot(av, cv)
                           + c.scalar * np.dot(av, bv)
                           + a.scalar * b.scalar * c.scalar))


def commutator_trace(a: Bloch4, b: Bloch4, c: Bloch4) -> complex:
    """Tr(A [B, C]) = (i/2) a.(b x c)."""
    return complex(0.5j * np.dot(a.vector, np.cross(b.vector, c.vector)))


def anticommutator_trace(a: Bloch4, b: Bloch4, c: Bloch4) -> complex:
    """Tr(A {B, C}): the cross-product term of the triple trace cancels."""
    av, bv, cv = a.vector, b.vector, c.vector
    return complex(0.5 * (a.scalar * np.dot(bv, cv)
                          + b.scalar * np.dot(av, cv)
                          + c.scalar * np.dot(av, bv)
                          + a.scalar * b.scalar * c.scalar))


# ---------------------------------------------------------------------------
# the one-step superoperator on 4-vectors


@dataclass(frozen=True)
class Superop4:
    """Real 4x4 matrix acting on Pauli 4-vectors.

    Trace preservation pins the first row to (1,0,0,0) and unitality the
    first column; both are checked on construction.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"need a 4x4 matrix, got {m.shape}")
        if np.max(np.abs(m[0] - np.array([1.0, 0, 0, 0]))) > 1e-12 \
                or np.max(np.abs(m[:, 0] - np.array([1.0, 0, 0, 0]))) > 1e-12:
            raise ValueError("first row/column must be (1,0,0,0): the map must "
                             "be trace preserving and unital")
        object.__setattr__(self, "m", m)

    @property
    def spatial(self) -> np.ndarray:
        return self.m[1:, 1:]

    def __call__(self, b: Bloch4) -> Bloch4:
        return Bloch4(c=self.m @ b.c, kind="general")


def _spatial_block(p: CoinParams, k):
    """3x3 spatial block of the step map, vectorized over k (shape k + (3,3))."""
    k = np.asarray(k, dtype=float)
    th, al, be = p.theta, p.alpha, p.beta
    c2, s2 = np.cos(th) ** 2, np.sin(th) ** 2
    s2t, c2t = np.sin(2 * th), np.cos(2 * th)
    ka, kb = k - al, k - be
    out = np.empty(k.shape + (3, 3))
    out[..., 0, 0] = np.cos(2 * ka) * c2 - np.cos(2 * kb) * s2
    out[..., 0, 1] = -np.sin(2 * ka) * c2 - np.sin(2 * kb) * s2
    out[..., 0, 2] = -np.cos(2 * k - al - be) * s2t
    out[..., 1, 0] = np.sin(2 * ka) * c2 - np.sin(2 * kb) * s2
    out[..., 1, 1] = np.cos(2 * ka) * c2 + np.cos(2 * kb) * s2
    out[..., 1, 2] = -np.sin(2 * k - al - be) * s2t
    out[..., 2, 0] = np.cos(al - be) * s2t
    out[..., 2, 1] = np.sin(al - be) * s2t
    out[..., 2, 2] = c2t
    return out


def superop_matrix(p: CoinParams, k: float) -> Superop4:
    """Matrix of O -> u(k) O u(k)^dag in the Pauli basis at one momentum."""
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    m[1:, 1:] = _spatial_block(p, float(k))
    return Superop4(m=m)


def cos_omega(p: CoinParams, k):
    """cos of the quasi-energy: cos w = cos(k - alpha) cos theta."""
    return np.cos(np.asarray(k, dtype=float) - p.alpha) * np.cos(p.theta)


def invariant_vector(p: CoinParams, k):
    """Spatial direction u(k) spanning the moving part of the fixed subspace.

    u = (sin(k-beta) sin th, -cos(k-beta) sin th, sin(k-alpha) cos th);
    its squared length is sin^2 w = 1 - cos^2 th cos^2(k-alpha), bounded
    below by sin^2 th.  Returned with shape k + (3,).
    """
    k = np.asarray(k, dtype=float)
    st, ct = np.sin(p.theta), np.cos(p.theta)
    out = np.empty(k.shape + (3,))
    out[..., 0] = np.sin(k - p.beta) * st
    out[..., 1] = -np.cos(k - p.beta) * st
    out[..., 2] = np.sin(k - p.alpha) * ct
    return out


def sin2_omega(p: CoinParams, k):
    return 1.0 - cos_omega(p, k) ** 2


@dataclass(frozen=True)
class SpectralData:
    """Eigen-structure of the step map at one momentum."""

    omega: float
    eigenvalues: np.ndarray          # (1, 1, e^{2iw}, e^{-2iw})
    lam1: np.ndarray                 # unit eigenvectors of eigenvalue 1
    lam2: np.ndarray


def spectral(p: CoinParams, k: float) -> SpectralData:
    """Closed-form spectral data; degenerate momenta are refused.

    Eigenvalues are (1, 1, e^{2iw}, e^{-2iw}) with cos w = cos(k-a) cos th.
    The two eigenvalue-1 unit vectors are
    (cos w -+ 1, u) / sqrt(2 (1 -+ cos w)).
    """
    k = float(k)
    cw = float(cos_omega(p, k))
    gap = 1.0 - abs(cw)
    if gap <= EPS_DEGENERATE:
        raise DegenerateK(
            f"|cos w| = {abs(cw)!r} at k={k!r}: oscillating and stationary "
            "subspaces merge (within 1e-9)")
    omega = float(np.arccos(np.clip(cw, -1.0, 1.0)))
    u = invariant_vector(p, k)
    lam1 = np.concatenate(([cw - 1.0], u)) / np.sqrt(2.0 * (1.0 - cw))
    lam2 = np.concatenate(([cw + 1.0], u)) / np.sqrt(2.0 * (1.0 + cw))
    eigs = np.array([1.0, 1.0, np.exp(2j * omega), np.exp(-2j * omega)])
    return SpectralData(omega=omega, eigenvalues=eigs, lam1=lam1, lam2=lam2)


def _a1_spatial(p: CoinParams, k):
    """3x3 spatial part u u^T / sin^2 w of the stationary projector, over k."""
    u = invariant_vector(p, k)
    s2 = sin2_omega(p, k)
    return u[..., :, None] * u[..., None, :] / s2[..., None, None]


def projector_A1(p: CoinParams, k: float) -> Superop4:
    """Projector onto the eigenvalue-1 subspace of the step map.

    Closed form: identity on the trace component plus u u^T / sin^2 w on
    the spatial block; rank 2, trace 2, well defined at every momentum
    once sin theta != 0.
    """
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    m[1:, 1:] = _a1_spatial(p, float(k))
    return Superop4(m=m)


def a1_grid(p: CoinParams, k: np.ndarray) -> np.ndarray:
    """Stack of stationary projectors over momenta, shape (n, 4, 4)."""
    k = np.asarray(k, dtype=float)
    m = np.zeros(k.shape + (4, 4))
    m[..., 0, 0] = 1.0
    m[..., 1:, 1:] = _a1_spatial(p, k)
    return m
